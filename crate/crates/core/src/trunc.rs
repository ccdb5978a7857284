//! Truncation contexts: the finite windows that make every expansion a
//! finite exact computation.
//!
//! Monomial gates (energy, degree marker, descendant order, classical degree)
//! discard whole monomials and are applied during products, so intermediate
//! results stay bounded. The `h`-window is different: `h`-powers multiply
//! across terms, so it is only applied when terminating the exponential of a
//! pure scalar and when projecting a final result for output, never inside a
//! product of polynomials.

/// Bounds for one computation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncationContext {
    /// Per-side winding weight bound: a monomial is kept only if the total
    /// winding of its q-variables and the total winding of its p-variables
    /// are each at most this.
    pub max_energy: u32,
    /// Maximum power of the degree marker `z`.
    pub max_z: u32,
    /// Total degree bound in the descendant variables `s2_n`.
    pub max_s_order: u32,
    /// Largest descendant index `n` that is kept.
    pub max_n: u32,
    /// Total degree bound in the classical variables `t0, t1, s1, s2`.
    pub max_classical: u32,
    /// Inclusive window of retained `h`-exponents for final output.
    pub h_window: (i32, i32),
}

impl Default for TruncationContext {
    fn default() -> Self {
        TruncationContext {
            max_energy: 6,
            max_z: 5,
            max_s_order: 4,
            max_n: 6,
            max_classical: 8,
            h_window: (-8, 12),
        }
    }
}

impl TruncationContext {
    pub fn with_max_energy(mut self, e: u32) -> Self {
        self.max_energy = e;
        self
    }

    pub fn with_max_z(mut self, z: u32) -> Self {
        self.max_z = z;
        self
    }

    pub fn with_max_s_order(mut self, s: u32) -> Self {
        self.max_s_order = s;
        self
    }

    pub fn with_max_n(mut self, n: u32) -> Self {
        self.max_n = n;
        self
    }

    pub fn with_max_classical(mut self, c: u32) -> Self {
        self.max_classical = c;
        self
    }

    pub fn with_h_window(mut self, lo: i32, hi: i32) -> Self {
        self.h_window = (lo, hi);
        self
    }

    /// Context used internally by gluing pipelines: wide enough that the
    /// final projection to `self` loses nothing it should have kept.
    /// Windings up to `max_z` must survive gluing even when the user asked
    /// for a small energy bound, since a winding-k contraction feeds `z^k`.
    pub fn widened_for_gluing(&self) -> Self {
        let mut ctx = self.clone();
        ctx.max_energy = ctx.max_energy.max(ctx.max_z);
        ctx
    }
}
