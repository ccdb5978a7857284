//! The graded Weyl algebra of orbit variables and its three uses: operator
//! products, the left action on states, and the gluing pairing between
//! potentials.
//!
//! Orbit variables on the same (end, winding) satisfy `[p, q] = k*hbar` with
//! `hbar = h^2` and winding `k`; all other pairs commute. Elements are kept
//! normal-ordered (q's left of p's) by construction, so the structural
//! content of an operator is a `Poly` and only the product rule differs from
//! the commutative one.

use crate::error::{CalcError, Result};
use crate::poly::{Monomial, Orbit, Poly};
use crate::scalar::{binomial, factorial, rat, rat_int, ScalarSeries};
use crate::trunc::TruncationContext;
use num_rational::BigRational;
use num_traits::One;
use std::collections::{BTreeMap, BTreeSet};

/// Falling factorial c(c-1)...(c-a+1) as a rational.
fn falling(c: u32, a: u32) -> BigRational {
    let mut acc = BigRational::one();
    for j in 0..a {
        acc *= rat_int(i64::from(c) - i64::from(j));
    }
    acc
}

fn filter_terms(f: &Poly, keep: impl Fn(&Monomial) -> bool) -> Poly {
    let mut out = Poly::zero();
    for (m, s) in f.iter() {
        if keep(m) {
            out.add_term(m.clone(), s);
        }
    }
    out
}

fn dec_exponent(map: &mut BTreeMap<Orbit, u32>, key: Orbit, by: u32) {
    if by == 0 {
        return;
    }
    let e = map.get_mut(&key).expect("exponent underflow");
    assert!(*e >= by, "exponent underflow");
    *e -= by;
    if *e == 0 {
        map.remove(&key);
    }
}

/// Normal-ordered operator product under the monomial gates of `ctx`.
///
/// For each shared orbit key with winding k, moving p^m across q^n produces
/// the contraction sum over j of C(m,j) C(n,j) j! (k hbar)^j q^(n-j) p^(m-j);
/// independent keys contract independently.
pub fn weyl_mul(a: &Poly, b: &Poly, ctx: &TruncationContext) -> Poly {
    let mut out = Poly::zero();
    for (ma, sa) in a.iter() {
        for (mb, sb) in b.iter() {
            let shared: Vec<(Orbit, u32, u32)> = ma
                .p
                .iter()
                .filter_map(|(&o, &m)| mb.q.get(&o).map(|&n| (o, m, n)))
                .collect();
            let base = ma.mul(mb);
            let scalar = sa * sb;
            let ranges: Vec<u32> = shared.iter().map(|&(_, m, n)| m.min(n)).collect();
            let mut js = vec![0u32; shared.len()];
            loop {
                let mut mono = base.clone();
                let mut factor = ScalarSeries::one();
                for (idx, &(o, m, n)) in shared.iter().enumerate() {
                    let j = js[idx];
                    if j > 0 {
                        dec_exponent(&mut mono.q, o, j);
                        dec_exponent(&mut mono.p, o, j);
                        let k = o.1;
                        let c = binomial(m, j)
                            * binomial(n, j)
                            * factorial(j)
                            * rat_int(i64::from(k)).pow(j as i32);
                        factor = factor.scale(&c, 2 * j as i32);
                    }
                }
                if mono.passes(ctx) {
                    out.add_term(mono, &(&scalar * &factor));
                }
                // odometer over the contraction orders
                let mut i = 0;
                loop {
                    if i == js.len() {
                        break;
                    }
                    js[i] += 1;
                    if js[i] <= ranges[i] {
                        break;
                    }
                    js[i] = 0;
                    i += 1;
                }
                if i == js.len() {
                    break;
                }
            }
        }
    }
    out
}

/// Operator commutator `weyl_mul(a, b) - weyl_mul(b, a)`.
pub fn commutator(a: &Poly, b: &Poly, ctx: &TruncationContext) -> Poly {
    weyl_mul(a, b, ctx).sub(&weyl_mul(b, a, ctx))
}

/// A state: a polynomial in p-variables (classical variables, z and h ride
/// along in the coefficients), with no q-variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BosonicState(Poly);

impl BosonicState {
    pub fn new(poly: Poly) -> Result<Self> {
        for (m, _) in poly.iter() {
            if !m.q.is_empty() {
                return Err(CalcError::AlphabetMismatch(
                    "state contains q-variables".to_string(),
                ));
            }
        }
        Ok(BosonicState(poly))
    }

    pub fn vacuum() -> Self {
        BosonicState(Poly::one())
    }

    pub fn poly(&self) -> &Poly {
        &self.0
    }

    pub fn into_poly(self) -> Poly {
        self.0
    }
}

/// Left action of an operator on a state: each q-variable of winding k acts
/// as `k * hbar * d/dp` on the matching p-variable, derivatives are applied
/// first, and the operator's own p-part multiplies afterwards.
pub fn act_on_state(op: &Poly, state: &BosonicState, ctx: &TruncationContext) -> BosonicState {
    let mut out = Poly::zero();
    for (mo, so) in op.iter() {
        for (ms, ss) in state.poly().iter() {
            let mut coeff = so * ss;
            let mut mono = ms.clone();
            let mut dead = false;
            for (&(end, k), &a) in &mo.q {
                let have = mono.p.get(&(end, k)).copied().unwrap_or(0);
                if have < a {
                    dead = true;
                    break;
                }
                let c = falling(have, a) * rat_int(i64::from(k)).pow(a as i32);
                coeff = coeff.scale(&c, 2 * a as i32);
                dec_exponent(&mut mono.p, (end, k), a);
            }
            if dead {
                continue;
            }
            let mut rest = mo.clone();
            rest.q.clear();
            let m = mono.mul(&rest);
            if m.passes(ctx) {
                out.add_term(m, &coeff);
            }
        }
    }
    BosonicState(out)
}

fn max_iterations(ctx: &TruncationContext) -> u32 {
    2 * (ctx.max_energy + ctx.max_z + ctx.max_s_order + ctx.max_classical) + 16
}

/// Action of the operator exponential `e^op` on a state, summed exactly.
///
/// Terminates when iterated actions vanish under `ctx`; an operator whose
/// action fails to raise any truncated grade or lower the p-count (for
/// example a bare diagonal `q_k p_k` with no small variable attached) is
/// rejected rather than looped on.
pub fn exp_act_on_state(
    op: &Poly,
    state: &BosonicState,
    ctx: &TruncationContext,
) -> Result<BosonicState> {
    let mut acc = state.clone();
    let mut term = state.clone();
    let cap = max_iterations(ctx);
    let mut k: u64 = 1;
    loop {
        term = act_on_state(op, &term, ctx);
        term = BosonicState(term.0.scale_rat(&rat(1, k as i64)));
        if term.poly().is_zero() {
            break;
        }
        if k > u64::from(cap) {
            return Err(CalcError::NonTerminating(format!(
                "operator exponential action still alive after {cap} steps"
            )));
        }
        acc = BosonicState(acc.0.add(term.poly()));
        k += 1;
    }
    Ok(acc)
}

/// How the z-marker is assigned to the contractions of one glued end.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZAssign {
    /// Every winding contributes z to this fixed power.
    Const(u32),
    /// Winding k contributes z^k.
    PerWinding,
}

impl ZAssign {
    fn exponent(self, winding: u32) -> u32 {
        match self {
            ZAssign::Const(a) => a,
            ZAssign::PerWinding => winding,
        }
    }
}

/// Side channel of a gluing: the additive scalar constant dropped from the
/// logarithm, reported instead of silently discarded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlueReport {
    pub dropped_constant: ScalarSeries,
}

/// Pair two potentials along the declared ends.
///
/// Computes `log` of the operator `e^{f_minus}` (each glued p of winding k
/// replaced by `hbar * k * z^a * d/dq`) applied to `e^{f_plus}` with glued
/// q's then set to zero. Termwise: a p-block on a glued (end, k) of order m
/// pairs only with a q-block of equal order, contributing
/// `m! * (hbar * k * z^a)^m`; spectator variables pass through. Scalar
/// constants of either exponent, and any h-only unit constant produced by
/// full contractions, contribute to the log only as an additive scalar;
/// that scalar is dropped from the result and reported.
pub fn glue(
    f_minus: &Poly,
    f_plus: &Poly,
    assign: &BTreeMap<u8, ZAssign>,
    ctx: &TruncationContext,
) -> Result<(Poly, GlueReport)> {
    for (m, _) in f_minus.iter() {
        if m.q.keys().any(|(end, _)| assign.contains_key(end)) {
            return Err(CalcError::UnmatchedGluingEnd(
                "lower potential carries q-variables on a glued end".to_string(),
            ));
        }
    }
    for (m, _) in f_plus.iter() {
        if m.p.keys().any(|(end, _)| assign.contains_key(end)) {
            return Err(CalcError::UnmatchedGluingEnd(
                "upper potential carries p-variables on a glued end".to_string(),
            ));
        }
    }

    let ictx = ctx.widened_for_gluing();

    // A term whose glued content uses a winding the other side never carries
    // can pair with nothing, even inside the exponentials, so drop it first.
    let mut lower_body = f_minus.clone();
    let mut upper_body = f_plus.clone();
    loop {
        let lower_alive: BTreeSet<Orbit> = lower_body
            .iter()
            .flat_map(|(m, _)| m.p.keys().filter(|(end, _)| assign.contains_key(end)))
            .copied()
            .collect();
        let upper_alive: BTreeSet<Orbit> = upper_body
            .iter()
            .flat_map(|(m, _)| m.q.keys().filter(|(end, _)| assign.contains_key(end)))
            .copied()
            .collect();
        let keep_lower = |m: &Monomial| {
            m.p.keys()
                .filter(|(end, _)| assign.contains_key(end))
                .all(|o| upper_alive.contains(o))
        };
        let keep_upper = |m: &Monomial| {
            m.q.keys()
                .filter(|(end, _)| assign.contains_key(end))
                .all(|o| lower_alive.contains(o))
        };
        let next_lower = filter_terms(&lower_body, keep_lower);
        let next_upper = filter_terms(&upper_body, keep_upper);
        let stable = next_lower.num_terms() == lower_body.num_terms()
            && next_upper.num_terms() == upper_body.num_terms();
        lower_body = next_lower;
        upper_body = next_upper;
        if stable {
            break;
        }
    }

    // A scalar constant in either exponent adds to the log verbatim, so it is
    // split off exactly here and reported, never exponentiated.
    let c_minus = lower_body.constant_part();
    let c_plus = upper_body.constant_part();
    lower_body.add_term(Monomial::one(), &(-&c_minus));
    upper_body.add_term(Monomial::one(), &(-&c_plus));
    let mut dropped = &c_minus + &c_plus;

    let lower = lower_body.exp_truncated(&ictx)?;
    let upper = upper_body.exp_truncated(&ictx)?;

    let glued_content = |map: &BTreeMap<Orbit, u32>| -> Vec<(Orbit, u32)> {
        map.iter()
            .filter(|((end, _), _)| assign.contains_key(end))
            .map(|(&o, &e)| (o, e))
            .collect()
    };

    // Index the upper exponential by its glued q-content; every lower term
    // pairs only with the bucket carrying exactly matching content.
    let mut by_content: BTreeMap<Vec<(Orbit, u32)>, Vec<(Monomial, ScalarSeries)>> =
        BTreeMap::new();
    for (mb, sb) in upper.iter() {
        let key = glued_content(&mb.q);
        let mut stripped = mb.clone();
        for &(o, e) in &key {
            dec_exponent(&mut stripped.q, o, e);
        }
        by_content.entry(key).or_default().push((stripped, sb.clone()));
    }

    let mut paired = Poly::zero();
    for (ma, sa) in lower.iter() {
        let glued_p = glued_content(&ma.p);
        let Some(bucket) = by_content.get(&glued_p) else {
            continue;
        };
        let mut factor = ScalarSeries::one();
        let mut z_extra: u32 = 0;
        for &((end, k), m) in &glued_p {
            let a = assign[&end].exponent(k);
            z_extra += a * m;
            let c = factorial(m) * rat_int(i64::from(k)).pow(m as i32);
            factor = factor.scale(&c, 2 * m as i32);
        }
        let mut stripped_a = ma.clone();
        for &(o, e) in &glued_p {
            dec_exponent(&mut stripped_a.p, o, e);
        }
        for (mb, sb) in bucket {
            let mut mono = stripped_a.mul(mb);
            mono.z += z_extra;
            if mono.passes(&ictx) {
                paired.add_term(mono, &(&(sa * sb) * &factor));
            }
        }
    }

    let c0 = paired.constant_part();
    let body = if c0.is_one() {
        paired
    } else if c0.coeff(0).is_one() {
        // Full contractions can still leave an h-only unit constant. Its
        // logarithm joins the drop; the division is exact up to the cutoff
        // and the residue above it is folded into the pinned constant term.
        let cutoff = ctx.h_window.1 - ctx.h_window.0.min(0) + 8;
        let from_contractions = c0.log_unit(cutoff)?;
        let inv = (-&from_contractions).exp_positive(cutoff)?;
        dropped += &from_contractions;
        let mut body = paired.scale(&inv);
        let residue = &ScalarSeries::one() - &body.constant_part();
        body.add_term(Monomial::one(), &residue);
        body
    } else {
        return Err(CalcError::NonUnitConstant(format!(
            "glued series has constant part {c0}"
        )));
    };

    let log = body.log_truncated(&ictx)?.truncate(ctx);
    Ok((log, GlueReport { dropped_constant: dropped }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::ClassVar;
    use crate::scalar::rat;

    fn ctx() -> TruncationContext {
        TruncationContext::default()
    }

    fn p(k: u32) -> Poly {
        Poly::from_term(Monomial::p_var(0, k, 1), ScalarSeries::one())
    }

    fn q(k: u32) -> Poly {
        Poly::from_term(Monomial::q_var(0, k, 1), ScalarSeries::one())
    }

    #[test]
    fn canonical_commutation_relation() {
        // p_1 q_1 = q_1 p_1 + h^2
        let lhs = weyl_mul(&p(1), &q(1), &ctx());
        let mut expected = Poly::from_term(
            Monomial::q_var(0, 1, 1).mul(&Monomial::p_var(0, 1, 1)),
            ScalarSeries::one(),
        );
        expected.add_term(Monomial::one(), &ScalarSeries::h_pow(2));
        assert_eq!(lhs, expected);

        // [p_k, q_k] = k h^2
        for k in 1..=4 {
            let c = commutator(&p(k), &q(k), &ctx());
            assert_eq!(
                c,
                Poly::constant(ScalarSeries::term(rat_int(i64::from(k)), 2))
            );
        }

        // different windings commute
        assert!(commutator(&p(1), &q(2), &ctx()).is_zero());
        // different ends commute
        let p_end1 = Poly::from_term(Monomial::p_var(1, 1, 1), ScalarSeries::one());
        assert!(commutator(&p_end1, &q(1), &ctx()).is_zero());
    }

    #[test]
    fn normal_ordering_of_squared_diagonal() {
        // (q_1 p_1)^2 = q_1^2 p_1^2 + h^2 q_1 p_1
        let d = Poly::from_term(
            Monomial::q_var(0, 1, 1).mul(&Monomial::p_var(0, 1, 1)),
            ScalarSeries::one(),
        );
        let sq = weyl_mul(&d, &d, &ctx());
        let mut expected = Poly::from_term(
            Monomial::q_var(0, 1, 2).mul(&Monomial::p_var(0, 1, 2)),
            ScalarSeries::one(),
        );
        expected.add_term(
            Monomial::q_var(0, 1, 1).mul(&Monomial::p_var(0, 1, 1)),
            &ScalarSeries::h_pow(2),
        );
        assert_eq!(sq, expected);
    }

    #[test]
    fn commutator_with_quadratic() {
        // [q_2 p_2, q_2^2] = 4 h^2 q_2^2
        let d = Poly::from_term(
            Monomial::q_var(0, 2, 1).mul(&Monomial::p_var(0, 2, 1)),
            ScalarSeries::one(),
        );
        let qsq = Poly::from_term(Monomial::q_var(0, 2, 2), ScalarSeries::one());
        let c = commutator(&d, &qsq, &ctx());
        let expected = Poly::from_term(
            Monomial::q_var(0, 2, 2),
            ScalarSeries::term(rat_int(4), 2),
        );
        assert_eq!(c, expected);
    }

    #[test]
    fn action_applies_derivatives_before_multiplying() {
        // (q_1 p_1) acting on p_1: h^2 d/dp_1 then times p_1 gives h^2 p_1
        let d = Poly::from_term(
            Monomial::q_var(0, 1, 1).mul(&Monomial::p_var(0, 1, 1)),
            ScalarSeries::one(),
        );
        let state = BosonicState::new(p(1)).unwrap();
        let acted = act_on_state(&d, &state, &ctx());
        assert_eq!(
            acted.poly(),
            &Poly::from_term(Monomial::p_var(0, 1, 1), ScalarSeries::h_pow(2))
        );
    }

    #[test]
    fn action_reverses_products() {
        // act(A*B, s) = act(B, act(A, s)) with A = p_1, B = q_1:
        // A*B = q_1 p_1 + h^2, acting on 1 gives h^2;
        // the other composition also gives h^2, while act(A, act(B, 1)) = 0.
        let a = p(1);
        let b = q(1);
        let ab = weyl_mul(&a, &b, &ctx());
        let vac = BosonicState::vacuum();
        let via_product = act_on_state(&ab, &vac, &ctx());
        let via_steps = act_on_state(&b, &act_on_state(&a, &vac, &ctx()), &ctx());
        assert_eq!(via_product, via_steps);
        assert_eq!(
            via_product.poly(),
            &Poly::constant(ScalarSeries::h_pow(2))
        );
        let wrong_order = act_on_state(&a, &act_on_state(&b, &vac, &ctx()), &ctx());
        assert!(wrong_order.poly().is_zero());
    }

    #[test]
    fn exponential_action_of_annihilator() {
        // e^(q_1-action) on p_1^2 = p_1^2 + 2 h^2 p_1 + h^4
        let state = BosonicState::new(Poly::from_term(
            Monomial::p_var(0, 1, 2),
            ScalarSeries::one(),
        ))
        .unwrap();
        let acted = exp_act_on_state(&q(1), &state, &ctx()).unwrap();
        let mut expected = Poly::from_term(Monomial::p_var(0, 1, 2), ScalarSeries::one());
        expected.add_term(
            Monomial::p_var(0, 1, 1),
            &ScalarSeries::term(rat_int(2), 2),
        );
        expected.add_term(Monomial::one(), &ScalarSeries::h_pow(4));
        assert_eq!(acted.poly(), &expected);
    }

    #[test]
    fn exponential_action_rejects_non_terminating_operator() {
        // A bare diagonal preserves p_1 forever; nothing truncates it.
        let d = Poly::from_term(
            Monomial::q_var(0, 1, 1).mul(&Monomial::p_var(0, 1, 1)),
            ScalarSeries::one(),
        );
        let state = BosonicState::new(p(1)).unwrap();
        assert!(exp_act_on_state(&d, &state, &ctx()).is_err());
    }

    #[test]
    fn glue_of_exponential_points() {
        // glue(p_1/hbar, q_1/hbar) with z per winding gives z/hbar exactly
        let f_minus = Poly::from_term(Monomial::p_var(0, 1, 1), ScalarSeries::h_pow(-2));
        let f_plus = Poly::from_term(Monomial::q_var(0, 1, 1), ScalarSeries::h_pow(-2));
        let assign: BTreeMap<u8, ZAssign> = [(0u8, ZAssign::PerWinding)].into();
        let (log, report) = glue(&f_minus, &f_plus, &assign, &ctx()).unwrap();
        assert_eq!(
            log,
            Poly::from_term(Monomial::z_pow(1), ScalarSeries::h_pow(-2))
        );
        assert!(report.dropped_constant.is_zero());
    }

    #[test]
    fn glue_drops_scalar_constant_into_report() {
        // An h-only constant on the upper side cannot survive the log; it is
        // split off as the dropped constant and the body is normalized to a
        // unit constant term.
        let f_minus = Poly::from_term(Monomial::p_var(0, 1, 1), ScalarSeries::h_pow(-2));
        let mut f_plus = Poly::from_term(Monomial::q_var(0, 1, 1), ScalarSeries::h_pow(-2));
        f_plus.add_term(Monomial::one(), &ScalarSeries::h_pow(2));
        let assign: BTreeMap<u8, ZAssign> = [(0u8, ZAssign::PerWinding)].into();
        let (log, report) = glue(&f_minus, &f_plus, &assign, &ctx()).unwrap();
        assert_eq!(
            log,
            Poly::from_term(Monomial::z_pow(1), ScalarSeries::h_pow(-2))
        );
        assert_eq!(report.dropped_constant.coeff(2), rat(1, 1));
    }

    #[test]
    fn glue_reports_constant_made_by_full_contractions() {
        // glue(h^4 p_1, h^4 q_1) at z^0 pairs away every variable; the whole
        // log is the scalar h^10 and lands in the report.
        let f_minus = Poly::from_term(Monomial::p_var(0, 1, 1), ScalarSeries::h_pow(4));
        let f_plus = Poly::from_term(Monomial::q_var(0, 1, 1), ScalarSeries::h_pow(4));
        let assign: BTreeMap<u8, ZAssign> = [(0u8, ZAssign::Const(0))].into();
        let (log, report) = glue(&f_minus, &f_plus, &assign, &ctx()).unwrap();
        assert!(log.is_zero());
        assert_eq!(report.dropped_constant, ScalarSeries::h_pow(10));
    }

    #[test]
    fn glue_quadratic_example() {
        // glue(p_1/h^4, q_1^2/(2h^2)): only the double contraction pairs,
        // log picks up z^2/(2h^6).
        let f_minus = Poly::from_term(Monomial::p_var(0, 1, 1), ScalarSeries::h_pow(-4));
        let f_plus = Poly::from_term(
            Monomial::q_var(0, 1, 2),
            ScalarSeries::term(rat(1, 2), -2),
        );
        let assign: BTreeMap<u8, ZAssign> = [(0u8, ZAssign::PerWinding)].into();
        let (log, _) = glue(&f_minus, &f_plus, &assign, &ctx()).unwrap();
        assert_eq!(
            log,
            Poly::from_term(Monomial::z_pow(2), ScalarSeries::term(rat(1, 2), -6))
        );
    }

    #[test]
    fn glue_against_zero_restricts_q_to_zero() {
        // glue(0, G) keeps exactly the q-free part of G.
        let mut g = Poly::from_term(Monomial::q_var(0, 1, 1), ScalarSeries::h_pow(-2));
        g.add_term(
            Monomial::class_var(ClassVar::T0, 1),
            &ScalarSeries::one(),
        );
        let assign: BTreeMap<u8, ZAssign> = [(0u8, ZAssign::Const(0))].into();
        let (log, _) = glue(&Poly::zero(), &g, &assign, &ctx()).unwrap();
        assert_eq!(
            log,
            Poly::from_term(Monomial::class_var(ClassVar::T0, 1), ScalarSeries::one())
        );
    }

    #[test]
    fn glue_rejects_wrong_polarity() {
        let assign: BTreeMap<u8, ZAssign> = [(0u8, ZAssign::Const(0))].into();
        let has_q = Poly::from_term(Monomial::q_var(0, 1, 1), ScalarSeries::one());
        assert!(glue(&has_q, &Poly::zero(), &assign, &ctx()).is_err());
        let has_p = Poly::from_term(Monomial::p_var(0, 1, 1), ScalarSeries::one());
        assert!(glue(&Poly::zero(), &has_p, &assign, &ctx()).is_err());
    }
}
