//! Exact operator calculus for the cover-counting potentials of closed
//! curves.
//!
//! The engine works over a Laurent ring in the half-genus marker `h`
//! (`hbar = h^2`) with arbitrary-precision rational coefficients; there is no
//! floating point and no hidden rounding. It provides:
//!
//! * a graded Weyl algebra of orbit variables `q_k`, `p_k` with
//!   `[p_k, q_k] = k*hbar`, including operator products, commutators, the
//!   action on states, and the gluing pairing between potentials,
//! * a fermionic Fock space with normal-ordered bilinears, the boson-fermion
//!   transfer map, and diagonal dressing operators,
//! * the dispersionful Hamiltonian hierarchy obtained from the generating
//!   function of a circle-valued field, in both bosonic and fermionic form,
//! * Hurwitz number enumeration and the pair-of-pants potential,
//! * gluing pipelines assembling the potentials of the sphere, the torus,
//!   higher-genus target curves, and the descendant cap, each cross-checked
//!   against an independent computation path.

pub mod error;
pub mod fermion;
pub mod hurwitz;
pub mod pipelines;
pub mod poly;
pub mod qdkdv;
pub mod scalar;
pub mod trunc;
pub mod weyl;

pub use error::{CalcError, Result};
pub use poly::{Alphabet, ClassVar, Grading, Monomial, Poly, SparsePoly};
pub use scalar::ScalarSeries;
pub use trunc::TruncationContext;
