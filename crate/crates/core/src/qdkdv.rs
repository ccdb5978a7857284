//! The dispersionful Hamiltonian hierarchy of the cylinder.
//!
//! The generating function `H(z)` is the zero-mode integral of the
//! normal-ordered exponential of a dressed circle-valued field, divided by
//! the dispersion factor `S(hz)` with `S(t) = sinh(t/2)/(t/2)`. Its
//! `z^(n+2)` coefficient over `hbar` is the n-th Hamiltonian, an
//! energy-conserving element of the Weyl algebra. The same Hamiltonians act
//! diagonally on the fermionic side; the transfer map intertwines the two
//! pictures.

use crate::error::{CalcError, Result};
use crate::fermion::{
    align_gradings, diagonal_eigenvalue, enumerate_states, phi, FermionVector,
};
use crate::poly::{ClassVar, Monomial, Poly};
use crate::scalar::{factorial, rat_int, rat_pow, zeta_neg, ScalarSeries};
use crate::trunc::TruncationContext;
use crate::weyl::{act_on_state, commutator, BosonicState};
use num_rational::BigRational;
use num_traits::One;

/// Taylor coefficient of `S(t) = sinh(t/2)/(t/2)` at `t^(2j)`:
/// `1 / (4^j (2j+1)!)`.
pub fn dispersion_coefficient(j: u32) -> BigRational {
    (rat_pow(&rat_int(4), i64::from(j)) * factorial(2 * j + 1)).recip()
}

/// The dressing series of a winding-k mode as z-power coefficients up to
/// z^z_top: entry 2j is `hbar^j k^(2j) / (4^j (2j+1)!)`, odd entries vanish.
fn mode_dressing(k: u32, z_top: u32) -> Vec<ScalarSeries> {
    let mut out = vec![ScalarSeries::zero(); z_top as usize + 1];
    let mut j = 0;
    while 2 * j <= z_top {
        let c = dispersion_coefficient(j)
            * rat_pow(&rat_int(i64::from(k)), 2 * i64::from(j));
        out[2 * j as usize] = ScalarSeries::term(c, 2 * j as i32);
        j += 1;
    }
    out
}

/// `1 / S(hz)` as z-power coefficients up to z^z_top.
fn inverse_dispersion(z_top: u32) -> Vec<ScalarSeries> {
    let a = mode_dressing(1, z_top);
    let mut b = vec![ScalarSeries::zero(); z_top as usize + 1];
    b[0] = ScalarSeries::one();
    for m in 1..=z_top as usize {
        let mut acc = ScalarSeries::zero();
        for j in 1..=m {
            acc += &(&a[j] * &b[m - j]);
        }
        b[m] = -&acc;
    }
    b
}

/// One factor of the zero-mode integral: the exponential of
/// `z * dressing(z) * var`, truncated under `ctx` and `z <= z_top`.
fn mode_factor(var: Monomial, dressing: &[ScalarSeries], z_top: u32, ctx: &TruncationContext) -> Poly {
    let mut step = Poly::zero();
    for (zpow, c) in dressing.iter().enumerate() {
        if zpow as u32 + 1 > z_top || c.is_zero() {
            continue;
        }
        let mut m = var.clone();
        m.z += zpow as u32 + 1;
        step.add_term(m, c);
    }
    let mut acc = Poly::one();
    let mut term = Poly::one();
    let mut e: u64 = 1;
    loop {
        term = term.mul(&step, ctx);
        term = term
            .iter()
            .filter(|(m, _)| m.z <= z_top)
            .fold(Poly::zero(), |mut p, (m, s)| {
                p.add_term(m.clone(), s);
                p
            });
        if term.is_zero() {
            break;
        }
        term = term.scale_rat(&rat_int(e as i64).recip());
        acc.add_assign(&term);
        e += 1;
    }
    acc
}

/// The Hamiltonians of one truncation context, built from the generating
/// function expanded once up to a chosen z-power.
pub struct HamiltonianFamily {
    generating: Poly,
    z_top: u32,
}

impl HamiltonianFamily {
    /// Expand the generating function far enough for `bosonic(n)` with
    /// `n <= max_n`.
    pub fn new(ctx: &TruncationContext, max_n: u32) -> Self {
        let z_top = max_n + 2;
        let mut gates = ctx.clone();
        gates.max_z = z_top;

        let mut product = Poly::one();
        for k in 1..=ctx.max_energy {
            let d = mode_dressing(k, z_top);
            product = product.mul(&mode_factor(Monomial::q_var(0, k, 1), &d, z_top, &gates), &gates);
        }
        for k in 1..=ctx.max_energy {
            let d = mode_dressing(k, z_top);
            product = product.mul(&mode_factor(Monomial::p_var(0, k, 1), &d, z_top, &gates), &gates);
        }
        let undressed = vec![ScalarSeries::one()];
        product = product.mul(
            &mode_factor(Monomial::class_var(ClassVar::T0, 1), &undressed, z_top, &gates),
            &gates,
        );

        // Zero-mode extraction: keep winding-balanced terms only.
        let mut balanced = Poly::zero();
        for (m, s) in product.iter() {
            if m.energy_q() == m.energy_p() {
                balanced.add_term(m.clone(), s);
            }
        }

        let inv = inverse_dispersion(z_top);
        let mut generating = Poly::zero();
        for (m, s) in balanced.iter() {
            for (extra, c) in inv.iter().enumerate() {
                if c.is_zero() || m.z + extra as u32 > z_top {
                    continue;
                }
                let mut shifted = m.clone();
                shifted.z += extra as u32;
                generating.add_term(shifted, &(s * c));
            }
        }
        HamiltonianFamily { generating, z_top }
    }

    /// The full generating function (z-powers up to the construction bound).
    pub fn generating(&self) -> &Poly {
        &self.generating
    }

    /// The n-th Hamiltonian: `z^(n+2)` coefficient over `hbar`; `n = -1`
    /// yields `t0 / hbar`.
    pub fn bosonic(&self, n: i32) -> Poly {
        let zpow = (n + 2) as u32;
        assert!(
            n >= -1 && zpow <= self.z_top,
            "Hamiltonian index {n} outside expanded range"
        );
        self.generating.z_coefficient(zpow).scale(&ScalarSeries::h_pow(-2))
    }
}

/// The fermionic form of the n-th Hamiltonian: a diagonal operator with
/// per-mode weights plus an identity constant.
pub struct DiagonalHamiltonian {
    pub n: u32,
    pub constant: ScalarSeries,
}

/// Build the fermionic n-th Hamiltonian. The constant is
/// `h^n (1 - 2^-(n+1)) zeta(-(n+1)) / (n+1)!`.
pub fn hamiltonian_fermionic(n: u32) -> DiagonalHamiltonian {
    let c = (BigRational::one() - rat_pow(&rat_int(2), -i64::from(n) - 1))
        * zeta_neg(n + 1)
        / factorial(n + 1);
    DiagonalHamiltonian {
        n,
        constant: ScalarSeries::term(c, n as i32),
    }
}

impl DiagonalHamiltonian {
    /// Weight of the doubled mode index `k2`: `h^n (k2/2)^(n+1) / (n+1)!`.
    pub fn mode_weight(&self, k2: i32) -> ScalarSeries {
        let c = rat_pow(&rat_int(i64::from(k2)), i64::from(self.n) + 1)
            / (rat_pow(&rat_int(2), i64::from(self.n) + 1) * factorial(self.n + 1));
        ScalarSeries::term(c, self.n as i32)
    }

    /// Eigenvalue on one basis state, constant included.
    pub fn eigenvalue(&self, state: &crate::fermion::FockState) -> ScalarSeries {
        let w = |k2: i32| self.mode_weight(k2);
        &diagonal_eigenvalue(state, &w) + &self.constant
    }

    /// Apply to a vector (diagonal action).
    pub fn apply(&self, v: &FermionVector) -> FermionVector {
        let mut out = FermionVector::zero();
        for (s, c) in v.iter() {
            out.add_term(s.clone(), &(c * &self.eigenvalue(s)));
        }
        out
    }
}

/// Commutator of the m-th and n-th Hamiltonians under `ctx`; returns the
/// residual, which is exactly zero because the Hamiltonians conserve energy
/// and so commute with the per-side truncation.
pub fn commute_residual(m: i32, n: i32, ctx: &TruncationContext) -> Poly {
    let top = m.max(n).max(0) as u32;
    let family = HamiltonianFamily::new(ctx, top);
    commutator(&family.bosonic(m), &family.bosonic(n), ctx)
}

/// True when the m-th and n-th Hamiltonians commute under `ctx`.
pub fn check_commute(m: i32, n: i32, ctx: &TruncationContext) -> bool {
    commute_residual(m, n, ctx).is_zero()
}

/// Check that the transfer map intertwines the fermionic and bosonic n-th
/// Hamiltonians on every basis state with energy within `ctx`: with both
/// sides grading-aligned, `phi(H_ferm v) = H_bos acting on phi(v)`, with no
/// residual normalization. Returns the list of failing states (empty on
/// success).
pub fn phi_equivariance_failures(n: u32, ctx: &TruncationContext) -> Vec<String> {
    let family = HamiltonianFamily::new(ctx, n);
    let h_bos = family.bosonic(n as i32).set_classical_zero(ClassVar::T0);
    let h_ferm = hamiltonian_fermionic(n);
    let mut failures = Vec::new();
    for state in enumerate_states(ctx.max_energy) {
        let v = FermionVector::basis(state.clone());
        let lhs = align_gradings(phi(&h_ferm.apply(&v), ctx).poly());
        let transferred =
            BosonicState::new(align_gradings(phi(&v, ctx).poly())).expect("aligned state");
        let rhs = act_on_state(&h_bos, &transferred, ctx);
        if lhs != *rhs.poly() {
            failures.push(format!("{state}"));
        }
    }
    failures
}

/// Equivariance as a result, for pipeline use.
pub fn verify_phi_equivariance(n: u32, ctx: &TruncationContext) -> Result<()> {
    let failures = phi_equivariance_failures(n, ctx);
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CalcError::PipelineMismatch(format!(
            "transfer map fails to intertwine Hamiltonian {n} on: {}",
            failures.join(", ")
        )))
    }
}
