//! Charge-zero fermionic Fock space: half-integer modes, normal-ordered
//! bilinears, the mode operators built from them, and the transfer map onto
//! bosonic states.
//!
//! Half-integers are stored doubled (so `1` means `1/2`, `3` means `3/2`),
//! always odd and positive inside a state. A state lists its excited
//! particles and holes; the vacuum has neither. Annihilation carries a
//! factor `hbar = h^2`, creation carries `1`, so the pairing
//! `{psi_m, psi*_m} = hbar` matches the orbit commutator scale.

use crate::error::{CalcError, Result};
use crate::poly::{Monomial, Poly};
use crate::scalar::{rat, rat_int, ScalarSeries};
use crate::trunc::TruncationContext;
use crate::weyl::BosonicState;
use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// A charge-eligible basis state: excited particle and hole modes, each a
/// doubled positive half-integer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FockState {
    particles: BTreeSet<u32>,
    holes: BTreeSet<u32>,
}

impl FockState {
    pub fn vacuum() -> Self {
        FockState { particles: BTreeSet::new(), holes: BTreeSet::new() }
    }

    /// Build from doubled half-integers; entries must be odd and distinct.
    pub fn new(particles: &[u32], holes: &[u32]) -> Self {
        let p: BTreeSet<u32> = particles.iter().copied().collect();
        let h: BTreeSet<u32> = holes.iter().copied().collect();
        assert_eq!(p.len(), particles.len(), "repeated particle mode");
        assert_eq!(h.len(), holes.len(), "repeated hole mode");
        assert!(
            p.iter().chain(h.iter()).all(|m| m % 2 == 1),
            "modes must be doubled half-integers (odd)"
        );
        FockState { particles: p, holes: h }
    }

    pub fn particles(&self) -> &BTreeSet<u32> {
        &self.particles
    }

    pub fn holes(&self) -> &BTreeSet<u32> {
        &self.holes
    }

    /// Particle count minus hole count.
    pub fn charge(&self) -> i64 {
        self.particles.len() as i64 - self.holes.len() as i64
    }

    /// Twice the energy (sum of all doubled modes), always an integer.
    pub fn energy2(&self) -> u32 {
        self.particles.iter().sum::<u32>() + self.holes.iter().sum::<u32>()
    }

    pub fn is_vacuum(&self) -> bool {
        self.particles.is_empty() && self.holes.is_empty()
    }
}

impl Ord for FockState {
    /// Energy first, then the mode sets; ascending iteration starts at the
    /// vacuum.
    fn cmp(&self, other: &Self) -> Ordering {
        (self.energy2(), &self.particles, &self.holes).cmp(&(
            other.energy2(),
            &other.particles,
            &other.holes,
        ))
    }
}

impl PartialOrd for FockState {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for FockState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_vacuum() {
            return write!(f, "|vac>");
        }
        let fr = |s: &BTreeSet<u32>| {
            s.iter()
                .rev()
                .map(|m| format!("{m}/2"))
                .collect::<Vec<_>>()
                .join(",")
        };
        write!(f, "P{{{}}}H{{{}}}", fr(&self.particles), fr(&self.holes))
    }
}

/// A vector in the Fock space with exact scalar coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FermionVector {
    terms: BTreeMap<FockState, ScalarSeries>,
}

impl FermionVector {
    pub fn zero() -> Self {
        FermionVector::default()
    }

    pub fn vacuum() -> Self {
        FermionVector::basis(FockState::vacuum())
    }

    pub fn basis(state: FockState) -> Self {
        let mut v = FermionVector::zero();
        v.add_term(state, &ScalarSeries::one());
        v
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&FockState, &ScalarSeries)> {
        self.terms.iter()
    }

    pub fn coeff(&self, state: &FockState) -> ScalarSeries {
        self.terms.get(state).cloned().unwrap_or_else(ScalarSeries::zero)
    }

    pub fn add_term(&mut self, state: FockState, c: &ScalarSeries) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(state) {
            Entry::Vacant(slot) => {
                slot.insert(c.clone());
            }
            Entry::Occupied(mut slot) => {
                *slot.get_mut() += c;
                if slot.get().is_zero() {
                    slot.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &FermionVector) -> FermionVector {
        let mut out = self.clone();
        for (s, c) in &other.terms {
            out.add_term(s.clone(), c);
        }
        out
    }

    pub fn sub(&self, other: &FermionVector) -> FermionVector {
        let mut out = self.clone();
        for (s, c) in &other.terms {
            out.add_term(s.clone(), &(-c));
        }
        out
    }

    pub fn scale(&self, c: &ScalarSeries) -> FermionVector {
        let mut out = FermionVector::zero();
        for (s, x) in &self.terms {
            out.add_term(s.clone(), &(x * c));
        }
        out
    }

    /// Drop states of energy above the bound.
    pub fn truncate_energy(&self, max_energy: u32) -> FermionVector {
        let mut out = FermionVector::zero();
        for (s, c) in &self.terms {
            if s.energy2() <= 2 * max_energy {
                out.add_term(s.clone(), c);
            }
        }
        out
    }
}

fn sign(neg: bool) -> ScalarSeries {
    if neg {
        ScalarSeries::from_int(-1)
    } else {
        ScalarSeries::one()
    }
}

/// Apply the mode operator `psi_m` (m a doubled odd index, sign meaningful):
/// positive m creates a particle, negative m removes the hole at `-m` with a
/// factor `hbar`.
pub fn apply_psi(m: i32, v: &FermionVector) -> FermionVector {
    let mut out = FermionVector::zero();
    for (state, c) in v.iter() {
        if m > 0 {
            let a = m as u32;
            if state.particles.contains(&a) {
                continue;
            }
            let above = state.particles.range(a + 1..).count();
            let mut s = state.clone();
            s.particles.insert(a);
            out.add_term(s, &(c * &sign(above % 2 == 1)));
        } else {
            let b = (-m) as u32;
            if !state.holes.contains(&b) {
                continue;
            }
            let flips = state.particles.len() + state.holes.range(b + 1..).count();
            let mut s = state.clone();
            s.holes.remove(&b);
            let coeff = &(c * &sign(flips % 2 == 1)) * &ScalarSeries::h_pow(2);
            out.add_term(s, &coeff);
        }
    }
    out
}

/// Apply `psi*_n` (doubled odd index): positive n removes the particle at n
/// with a factor `hbar`, negative n creates the hole at `-n`.
pub fn apply_psi_star(n: i32, v: &FermionVector) -> FermionVector {
    let mut out = FermionVector::zero();
    for (state, c) in v.iter() {
        if n > 0 {
            let a = n as u32;
            if !state.particles.contains(&a) {
                continue;
            }
            let above = state.particles.range(a + 1..).count();
            let mut s = state.clone();
            s.particles.remove(&a);
            let coeff = &(c * &sign(above % 2 == 1)) * &ScalarSeries::h_pow(2);
            out.add_term(s, &coeff);
        } else {
            let b = (-n) as u32;
            if state.holes.contains(&b) {
                continue;
            }
            let flips = state.particles.len() + state.holes.range(b + 1..).count();
            let mut s = state.clone();
            s.holes.insert(b);
            out.add_term(s, &(c * &sign(flips % 2 == 1)));
        }
    }
    out
}

/// Normal-ordered bilinear `:psi_m psi*_n:` applied to a vector; for m, n
/// both negative the ordering symbol reverses the factors with a sign.
pub fn apply_bilinear(m: i32, n: i32, v: &FermionVector) -> FermionVector {
    if m < 0 && n < 0 {
        apply_psi_star(n, &apply_psi(m, v)).scale(&ScalarSeries::from_int(-1))
    } else {
        apply_psi(m, &apply_psi_star(n, v))
    }
}

/// Which family of mode operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlphaKind {
    /// Raises energy by n: the sum of `:psi_m psi*_{m-n}:`.
    P,
    /// Lowers energy by n: the sum of `:psi_m psi*_{m+n}:`.
    Q,
}

/// Apply the mode operator `alpha_{p,n}` or `alpha_{q,n}`, truncating output
/// states to the context's energy bound.
pub fn apply_alpha(
    kind: AlphaKind,
    n: u32,
    v: &FermionVector,
    ctx: &TruncationContext,
) -> FermionVector {
    let reach = (2 * ctx.max_energy + 2 * n + 1) as i32;
    let mut out = FermionVector::zero();
    let mut m = -reach;
    while m <= reach {
        let star = match kind {
            AlphaKind::P => m - 2 * n as i32,
            AlphaKind::Q => m + 2 * n as i32,
        };
        if star != 0 {
            out = out.add(&apply_bilinear(m, star, v));
        }
        m += 2;
    }
    out.truncate_energy(ctx.max_energy)
}

/// Eigenvalue of a diagonal combination of bilinears on a basis state:
/// particles contribute `w(a)`, holes contribute `-w(-b)` (doubled indices).
pub fn diagonal_eigenvalue(
    state: &FockState,
    weight: &dyn Fn(i32) -> ScalarSeries,
) -> ScalarSeries {
    let mut acc = ScalarSeries::zero();
    for &a in &state.particles {
        acc += &weight(a as i32);
    }
    for &b in &state.holes {
        acc = &acc - &weight(-(b as i32));
    }
    acc
}

/// Scale each basis state by the exponential of its eigenvalue under the
/// diagonal combination with per-mode weight `c` (doubled indices). The
/// exponential is expanded exactly, which requires every eigenvalue term to
/// carry a positive h-power; an eigenvalue reaching h^0 or below cannot
/// terminate and is rejected.
pub fn diagonal_exp(
    c: &dyn Fn(i32) -> ScalarSeries,
    v: &FermionVector,
    ctx: &TruncationContext,
) -> Result<FermionVector> {
    let mut out = FermionVector::zero();
    for (state, coeff) in v.iter() {
        let lambda = diagonal_eigenvalue(state, c);
        let scale = if lambda.is_zero() {
            ScalarSeries::one()
        } else if lambda.min_exp().expect("nonzero series") > 0 {
            lambda.exp_positive(ctx.h_window.1)?
        } else {
            return Err(CalcError::NonTerminating(format!(
                "diagonal exponential on {state} has an eigenvalue term at h^0 or below"
            )));
        };
        out.add_term(state.clone(), &(coeff * &scale));
    }
    Ok(out)
}

/// All charge-zero basis states of energy at most `max_energy`, ascending.
pub fn enumerate_states(max_energy: u32) -> Vec<FockState> {
    fn subsets(budget: u32, smallest_allowed: u32, acc: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        out.push(acc.clone());
        let mut m = smallest_allowed;
        while m <= budget {
            acc.push(m);
            subsets(budget - m, m + 2, acc, out);
            acc.pop();
            m += 2;
        }
    }
    let budget = 2 * max_energy;
    let mut particle_sets = Vec::new();
    subsets(budget, 1, &mut Vec::new(), &mut particle_sets);
    let mut states = Vec::new();
    for ps in &particle_sets {
        let used: u32 = ps.iter().sum();
        let mut hole_sets = Vec::new();
        subsets(budget - used, 1, &mut Vec::new(), &mut hole_sets);
        for hs in hole_sets {
            if hs.len() == ps.len() {
                states.push(FockState::new(ps, &hs));
            }
        }
    }
    states.sort();
    states
}

/// Transfer a fermionic vector to a bosonic state: the vacuum expectation of
/// `e^K` applied to the vector, where `K` attaches `p_n / (n hbar^2)` to each
/// energy-lowering mode operator `alpha_{q,n}`.
pub fn phi(v: &FermionVector, ctx: &TruncationContext) -> BosonicState {
    // Intermediate vectors carry Poly coefficients: the attached p-monomials.
    let mut current: BTreeMap<FockState, Poly> = BTreeMap::new();
    for (s, c) in v.iter() {
        current.insert(s.clone(), Poly::constant(c.clone()));
    }
    let mut result = Poly::zero();
    if let Some(p) = current.get(&FockState::vacuum()) {
        result = result.add(p);
    }
    let mut j: u32 = 0;
    while !current.is_empty() {
        j += 1;
        let mut next: BTreeMap<FockState, Poly> = BTreeMap::new();
        for (state, carried) in &current {
            let top = state.energy2() / 2;
            for n in 1..=top {
                let moved = apply_alpha(AlphaKind::Q, n, &FermionVector::basis(state.clone()), ctx);
                for (s2, c2) in moved.iter() {
                    let attach = Poly::from_term(
                        Monomial::p_var(0, n, 1),
                        c2.scale(&rat(1, i64::from(n) * i64::from(j)), -4),
                    );
                    let add = carried.mul(&attach, ctx);
                    if !add.is_zero() {
                        next.entry(s2.clone()).or_insert_with(Poly::zero).add_assign(&add);
                    }
                }
            }
        }
        next.retain(|_, p| !p.is_zero());
        if let Some(p) = next.get(&FockState::vacuum()) {
            result = result.add(p);
        }
        // Every step lowers energy, so only states above the vacuum continue.
        next.remove(&FockState::vacuum());
        current = next;
    }
    BosonicState::new(result).expect("transfer map produced q-variables")
}

/// Inverse transfer: a pure p-polynomial maps to the product of
/// energy-raising mode operators applied to the vacuum.
pub fn phi_inverse(s: &BosonicState, ctx: &TruncationContext) -> Result<FermionVector> {
    let mut out = FermionVector::zero();
    for (m, c) in s.poly().iter() {
        if m.z != 0 || !m.classical.is_empty() || !m.descendant.is_empty() {
            return Err(CalcError::AlphabetMismatch(
                "inverse transfer input must be a pure p-polynomial".to_string(),
            ));
        }
        let mut v = FermionVector::vacuum();
        for (&(end, k), &e) in m.p.iter().rev() {
            if end != 0 {
                return Err(CalcError::AlphabetMismatch(
                    "inverse transfer input must live on the unlabeled end".to_string(),
                ));
            }
            for _ in 0..e {
                v = apply_alpha(AlphaKind::P, k, &v, ctx);
            }
        }
        out = out.add(&v.scale(c));
    }
    Ok(out)
}

/// Rescale each p-variable of winding k by `h^(1-k)`, aligning the
/// fermionic energy grading with the winding grading of the orbit variables.
pub fn align_gradings(s: &Poly) -> Poly {
    let mut out = Poly::zero();
    for (m, c) in s.iter() {
        let shift: i32 = m
            .p
            .iter()
            .map(|(&(_, k), &e)| (1 - k as i32) * e as i32)
            .sum();
        out.add_term(m.clone(), &c.scale(&rat_int(1), shift));
    }
    out
}
