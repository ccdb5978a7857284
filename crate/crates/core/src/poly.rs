//! Sparse polynomials over the full variable alphabet of the calculus:
//! the degree marker `z`, classical variables `t0, t1, s1, s2`, descendant
//! variables `s2_n`, and orbit variables `q` and `p` indexed by an end label
//! and a winding number.
//!
//! Monomials store q's and p's in separate maps, so a `Poly` is always in
//! normal-ordered form by construction. `Poly::mul` is the commutative
//! product (all variables commute, as inside a normal-ordering symbol);
//! the operator product with contractions lives in `weyl`.

use crate::error::{CalcError, Result};
use crate::scalar::{factorial, rat, ScalarSeries};
use crate::trunc::TruncationContext;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Map, Value};
use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Classical variables in canonical alphabet order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ClassVar {
    T0,
    T1,
    S1,
    S2,
}

impl ClassVar {
    pub fn name(self) -> &'static str {
        match self {
            ClassVar::T0 => "t0",
            ClassVar::T1 => "t1",
            ClassVar::S1 => "s1",
            ClassVar::S2 => "s2",
        }
    }

    /// Degree in the grading where t1 and s2 weigh -1, t0 and s1 weigh -2.
    pub fn grading(self) -> i64 {
        match self {
            ClassVar::T0 | ClassVar::S1 => -2,
            ClassVar::T1 | ClassVar::S2 => -1,
        }
    }
}

/// An orbit variable key: (end label, winding number).
///
/// End 0 is the unlabeled end of single-ended objects; positive labels
/// distinguish the ends of multi-ended surfaces.
pub type Orbit = (u8, u32);

/// Canonical identity of a variable, ordered z < classical < descendant <
/// orbit, with orbit variables by (end, winding) and q before p.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum VarId {
    Z,
    Classical(ClassVar),
    Descendant(u8),
    OrbitVar { end: u8, winding: u32, momentum: bool },
}

/// A commutative monomial; exponents are always positive in the maps.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Monomial {
    pub z: u32,
    pub classical: BTreeMap<ClassVar, u32>,
    pub descendant: BTreeMap<u8, u32>,
    pub q: BTreeMap<Orbit, u32>,
    pub p: BTreeMap<Orbit, u32>,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial::default()
    }

    pub fn is_one(&self) -> bool {
        self.z == 0
            && self.classical.is_empty()
            && self.descendant.is_empty()
            && self.q.is_empty()
            && self.p.is_empty()
    }

    pub fn z_pow(e: u32) -> Self {
        Monomial { z: e, ..Monomial::default() }
    }

    pub fn class_var(v: ClassVar, e: u32) -> Self {
        let mut m = Monomial::one();
        if e > 0 {
            m.classical.insert(v, e);
        }
        m
    }

    pub fn desc_var(n: u8, e: u32) -> Self {
        let mut m = Monomial::one();
        if e > 0 {
            m.descendant.insert(n, e);
        }
        m
    }

    pub fn q_var(end: u8, winding: u32, e: u32) -> Self {
        let mut m = Monomial::one();
        if e > 0 {
            m.q.insert((end, winding), e);
        }
        m
    }

    pub fn p_var(end: u8, winding: u32, e: u32) -> Self {
        let mut m = Monomial::one();
        if e > 0 {
            m.p.insert((end, winding), e);
        }
        m
    }

    /// Sum of all exponents, including the power of z.
    pub fn total_degree(&self) -> u32 {
        self.z
            + self.classical.values().sum::<u32>()
            + self.descendant.values().sum::<u32>()
            + self.q.values().sum::<u32>()
            + self.p.values().sum::<u32>()
    }

    /// Total winding weight carried by the q-variables.
    pub fn energy_q(&self) -> u32 {
        self.q.iter().map(|(&(_, k), &e)| k * e).sum()
    }

    /// Total winding weight carried by the p-variables.
    pub fn energy_p(&self) -> u32 {
        self.p.iter().map(|(&(_, k), &e)| k * e).sum()
    }

    pub fn classical_degree(&self) -> u32 {
        self.classical.values().sum()
    }

    pub fn descendant_order(&self) -> u32 {
        self.descendant.values().sum()
    }

    /// True when every truncation gate of `ctx` admits this monomial.
    pub fn passes(&self, ctx: &TruncationContext) -> bool {
        self.z <= ctx.max_z
            && self.classical_degree() <= ctx.max_classical
            && self.descendant_order() <= ctx.max_s_order
            && self.descendant.keys().all(|&n| u32::from(n) <= ctx.max_n)
            && self.energy_q() <= ctx.max_energy
            && self.energy_p() <= ctx.max_energy
    }

    /// Exponent-wise product.
    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = self.clone();
        out.z += other.z;
        for (v, e) in &other.classical {
            *out.classical.entry(*v).or_insert(0) += e;
        }
        for (n, e) in &other.descendant {
            *out.descendant.entry(*n).or_insert(0) += e;
        }
        for (k, e) in &other.q {
            *out.q.entry(*k).or_insert(0) += e;
        }
        for (k, e) in &other.p {
            *out.p.entry(*k).or_insert(0) += e;
        }
        out
    }

    /// Swap the roles of q and p on every end.
    pub fn mirror(&self) -> Monomial {
        let mut out = self.clone();
        std::mem::swap(&mut out.q, &mut out.p);
        out
    }

    /// Relabel one end of the orbit variables. Panics if the target label is
    /// already in use, since silently merging distinct ends would corrupt a
    /// gluing.
    pub fn rename_end(&self, from: u8, to: u8) -> Monomial {
        let mut out = self.clone();
        for map in [&mut out.q, &mut out.p] {
            let moved: Vec<(Orbit, u32)> = map
                .iter()
                .filter(|(&(end, _), _)| end == from)
                .map(|(&k, &e)| (k, e))
                .collect();
            for ((_, winding), e) in moved {
                map.remove(&(from, winding));
                let prev = map.insert((to, winding), e);
                assert!(prev.is_none(), "end relabel collision on end {to}");
            }
        }
        out
    }

    /// Degree in the grading with deg t1 = deg s2 = -1, deg t0 = deg s1 = -2,
    /// deg q = deg p = -2, deg s2_n = 2n - 1, deg z = 0 (h weighs -2 and is
    /// accounted separately by the caller).
    pub fn grading(&self) -> i64 {
        let mut d: i64 = 0;
        for (v, e) in &self.classical {
            d += v.grading() * i64::from(*e);
        }
        for (n, e) in &self.descendant {
            d += (2 * i64::from(*n) - 1) * i64::from(*e);
        }
        for e in self.q.values() {
            d -= 2 * i64::from(*e);
        }
        for e in self.p.values() {
            d -= 2 * i64::from(*e);
        }
        d
    }

    /// Variables in canonical order with their exponents.
    pub fn vars(&self) -> Vec<(VarId, u32)> {
        let mut out = Vec::new();
        if self.z > 0 {
            out.push((VarId::Z, self.z));
        }
        for (v, e) in &self.classical {
            out.push((VarId::Classical(*v), *e));
        }
        for (n, e) in &self.descendant {
            out.push((VarId::Descendant(*n), *e));
        }
        let mut qi = self.q.iter().peekable();
        let mut pi = self.p.iter().peekable();
        loop {
            let take_q = match (qi.peek(), pi.peek()) {
                (None, None) => break,
                (Some(_), None) => true,
                (None, Some(_)) => false,
                (Some((&qk, _)), Some((&pk, _))) => qk <= pk,
            };
            if take_q {
                let (&(end, winding), &e) = qi.next().unwrap();
                out.push((VarId::OrbitVar { end, winding, momentum: false }, e));
            } else {
                let (&(end, winding), &e) = pi.next().unwrap();
                out.push((VarId::OrbitVar { end, winding, momentum: true }, e));
            }
        }
        out
    }
}

impl Ord for Monomial {
    /// Graded lexicographic order over the canonical variable sequence.
    fn cmp(&self, other: &Self) -> Ordering {
        match self.total_degree().cmp(&other.total_degree()) {
            Ordering::Equal => {}
            ord => return ord,
        }
        let a = self.vars();
        let b = other.vars();
        let mut ai = a.iter();
        let mut bi = b.iter();
        loop {
            match (ai.next(), bi.next()) {
                (None, None) => return Ordering::Equal,
                (Some(_), None) => return Ordering::Greater,
                (None, Some(_)) => return Ordering::Less,
                (Some((va, ea)), Some((vb, eb))) => {
                    // Terms print ascending: the earlier variable, and at the
                    // same variable the higher exponent, comes first.
                    match va.cmp(vb) {
                        Ordering::Less => return Ordering::Less,
                        Ordering::Greater => return Ordering::Greater,
                        Ordering::Equal => match eb.cmp(ea) {
                            Ordering::Equal => {}
                            ord => return ord,
                        },
                    }
                }
            }
        }
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn var_name(v: VarId) -> String {
    match v {
        VarId::Z => "z".to_string(),
        VarId::Classical(c) => c.name().to_string(),
        VarId::Descendant(n) => format!("s2_{n}"),
        VarId::OrbitVar { end, winding, momentum } => {
            let letter = if momentum { "p" } else { "q" };
            if end == 0 {
                format!("{letter}_{winding}")
            } else {
                format!("{letter}{end}_{winding}")
            }
        }
    }
}

/// Homogeneity report of a polynomial under the grading table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Grading {
    Zero,
    Homogeneous(i64),
    Mixed,
}

/// A polynomial: monomials mapped to exact scalar coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, ScalarSeries>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Poly::constant(ScalarSeries::one())
    }

    pub fn constant(s: ScalarSeries) -> Self {
        Poly::from_term(Monomial::one(), s)
    }

    pub fn from_term(m: Monomial, s: ScalarSeries) -> Self {
        let mut p = Poly::zero();
        p.add_term(m, &s);
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Monomial, &ScalarSeries)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> ScalarSeries {
        self.terms.get(m).cloned().unwrap_or_else(ScalarSeries::zero)
    }

    /// Coefficient of the empty monomial.
    pub fn constant_part(&self) -> ScalarSeries {
        self.coeff(&Monomial::one())
    }

    pub fn add_term(&mut self, m: Monomial, s: &ScalarSeries) {
        if s.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(slot) => {
                slot.insert(s.clone());
            }
            Entry::Occupied(mut slot) => {
                *slot.get_mut() += s;
                if slot.get().is_zero() {
                    slot.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    pub fn add_assign(&mut self, other: &Poly) {
        for (m, s) in &other.terms {
            self.add_term(m.clone(), s);
        }
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, s) in &other.terms {
            out.add_term(m.clone(), &(-s));
        }
        out
    }

    pub fn neg(&self) -> Poly {
        let mut out = Poly::zero();
        for (m, s) in &self.terms {
            out.terms.insert(m.clone(), -s);
        }
        out
    }

    pub fn scale(&self, s: &ScalarSeries) -> Poly {
        if s.is_zero() {
            return Poly::zero();
        }
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), &(c * s));
        }
        out
    }

    pub fn scale_rat(&self, r: &BigRational) -> Poly {
        self.scale(&ScalarSeries::from_rational(r.clone()))
    }

    /// Commutative product with the monomial gates of `ctx` applied to each
    /// product term. The h-window is not applied here.
    pub fn mul(&self, other: &Poly, ctx: &TruncationContext) -> Poly {
        let mut out = Poly::zero();
        for (ma, sa) in &self.terms {
            for (mb, sb) in &other.terms {
                let m = ma.mul(mb);
                if m.passes(ctx) {
                    out.add_term(m, &(sa * sb));
                }
            }
        }
        out
    }

    /// Keep only monomials admitted by `ctx` (h-window untouched).
    pub fn truncate(&self, ctx: &TruncationContext) -> Poly {
        let mut out = Poly::zero();
        for (m, s) in &self.terms {
            if m.passes(ctx) {
                out.terms.insert(m.clone(), s.clone());
            }
        }
        out
    }

    /// Project every coefficient to the h-window of `ctx`; used on final
    /// output, never between ring operations.
    pub fn project_h(&self, ctx: &TruncationContext) -> Poly {
        let (lo, hi) = ctx.h_window;
        let mut out = Poly::zero();
        for (m, s) in &self.terms {
            let w = s.project_window(lo, hi);
            if !w.is_zero() {
                out.terms.insert(m.clone(), w);
            }
        }
        out
    }

    /// Smallest h-exponent appearing in any non-constant term.
    fn min_h_nonconstant(&self) -> i32 {
        self.terms
            .iter()
            .filter(|(m, _)| !m.is_one())
            .filter_map(|(_, s)| s.min_exp())
            .min()
            .unwrap_or(0)
    }

    fn max_iterations(ctx: &TruncationContext) -> u32 {
        2 * (ctx.max_energy + ctx.max_z + ctx.max_s_order + ctx.max_classical) + 16
    }

    /// Exponential, exact under the monomial gates of `ctx`.
    ///
    /// The non-constant part must be nilpotent under truncation (every
    /// monomial raises some truncated grade, so high powers vanish); a pure
    /// scalar constant part must sit at strictly positive h-powers, and is
    /// expanded far enough that the final h-window projection of any caller
    /// is unaffected by its cutoff.
    pub fn exp_truncated(&self, ctx: &TruncationContext) -> Result<Poly> {
        let c = self.constant_part();
        let mut rest = self.clone();
        rest.terms.remove(&Monomial::one());

        let scalar_cutoff = ctx.h_window.1 - rest.min_h_nonconstant().min(0);
        let const_factor = if c.is_zero() {
            ScalarSeries::one()
        } else {
            c.exp_positive(scalar_cutoff)?
        };

        let mut acc = Poly::one();
        let mut power = Poly::one();
        let mut k: u64 = 1;
        let cap = Poly::max_iterations(ctx);
        loop {
            power = power.mul(&rest, ctx);
            if power.is_zero() {
                break;
            }
            if k > u64::from(cap) {
                return Err(CalcError::NonTerminating(format!(
                    "exp still has {} terms after {} powers",
                    power.num_terms(),
                    cap
                )));
            }
            acc = acc.add(&power.scale(&ScalarSeries::from_rational(
                factorial(k as u32).recip(),
            )));
            k += 1;
        }
        Ok(acc.scale(&const_factor))
    }

    /// Logarithm of a polynomial whose constant part is exactly 1, exact
    /// under the monomial gates of `ctx`.
    pub fn log_truncated(&self, ctx: &TruncationContext) -> Result<Poly> {
        let c = self.constant_part();
        if !c.is_one() {
            return Err(CalcError::NonUnitConstant(format!(
                "polynomial log with constant part {c}"
            )));
        }
        let mut n = self.clone();
        n.terms.remove(&Monomial::one());

        let mut acc = Poly::zero();
        let mut power = Poly::one();
        let mut k: i64 = 1;
        let cap = Poly::max_iterations(ctx);
        loop {
            power = power.mul(&n, ctx);
            if power.is_zero() {
                break;
            }
            if k > i64::from(cap) {
                return Err(CalcError::NonTerminating(format!(
                    "log still has {} terms after {} powers",
                    power.num_terms(),
                    cap
                )));
            }
            let sign = if k % 2 == 1 { 1 } else { -1 };
            acc = acc.add(&power.scale(&ScalarSeries::from_rational(rat(sign, k))));
            k += 1;
        }
        Ok(acc)
    }

    /// Coefficient of z^d, with the z-power stripped from the monomials.
    pub fn z_coefficient(&self, d: u32) -> Poly {
        let mut out = Poly::zero();
        for (m, s) in &self.terms {
            if m.z == d {
                let mut stripped = m.clone();
                stripped.z = 0;
                out.add_term(stripped, s);
            }
        }
        out
    }

    /// Drop every term containing the given classical variable
    /// (specialization to zero).
    pub fn set_classical_zero(&self, v: ClassVar) -> Poly {
        let mut out = Poly::zero();
        for (m, s) in &self.terms {
            if !m.classical.contains_key(&v) {
                out.terms.insert(m.clone(), s.clone());
            }
        }
        out
    }

    /// Evaluate the q-variables of one end at given rational values
    /// (windings absent from the map evaluate to zero).
    pub fn eval_q_end(&self, end: u8, values: &BTreeMap<u32, BigRational>) -> Poly {
        let mut out = Poly::zero();
        for (m, s) in &self.terms {
            let mut factor = BigRational::one();
            let mut stripped = m.clone();
            let mut dead = false;
            let on_end: Vec<(Orbit, u32)> = m
                .q
                .iter()
                .filter(|(&(e, _), _)| e == end)
                .map(|(&k, &x)| (k, x))
                .collect();
            for ((_, winding), exp) in on_end {
                match values.get(&winding) {
                    Some(v) if !v.is_zero() => {
                        factor *= crate::scalar::rat_pow(v, i64::from(exp));
                    }
                    _ => {
                        dead = true;
                        break;
                    }
                }
                stripped.q.remove(&(end, winding));
            }
            if !dead {
                out.add_term(stripped, &s.scale(&factor, 0));
            }
        }
        out
    }

    /// Set h = 1 in every coefficient.
    pub fn eval_h_one(&self) -> Poly {
        let mut out = Poly::zero();
        for (m, s) in &self.terms {
            out.add_term(
                m.clone(),
                &ScalarSeries::from_rational(s.eval_at_one()),
            );
        }
        out
    }

    /// Swap q and p on every end of every monomial.
    pub fn mirror(&self) -> Poly {
        let mut out = Poly::zero();
        for (m, s) in &self.terms {
            out.add_term(m.mirror(), s);
        }
        out
    }

    /// Relabel one orbit end across all monomials.
    pub fn rename_end(&self, from: u8, to: u8) -> Poly {
        let mut out = Poly::zero();
        for (m, s) in &self.terms {
            out.add_term(m.rename_end(from, to), s);
        }
        out
    }

    /// Homogeneity under the grading table, counting h at weight -2.
    pub fn grading_degree(&self) -> Grading {
        let mut seen: Option<i64> = None;
        for (m, s) in &self.terms {
            let base = m.grading();
            for (e, _) in s.iter() {
                let d = base - 2 * i64::from(*e);
                match seen {
                    None => seen = Some(d),
                    Some(prev) if prev == d => {}
                    Some(_) => return Grading::Mixed,
                }
            }
        }
        match seen {
            None => Grading::Zero,
            Some(d) => Grading::Homogeneous(d),
        }
    }

    /// Flattened JSON rendering: one object per (monomial, h-power) pair, in
    /// canonical order. Every key is always present.
    pub fn to_json(&self) -> Value {
        let mut arr = Vec::new();
        for (m, s) in &self.terms {
            for (e, c) in s.iter() {
                let mut vars = Map::new();
                for (v, exp) in m.vars() {
                    match v {
                        VarId::OrbitVar { .. } | VarId::Z => {}
                        _ => {
                            vars.insert(var_name(v), json!(exp));
                        }
                    }
                }
                let mut qmap = Map::new();
                for (&(end, winding), &exp) in &m.q {
                    qmap.insert(format!("{end}:{winding}"), json!(exp));
                }
                let mut pmap = Map::new();
                for (&(end, winding), &exp) in &m.p {
                    pmap.insert(format!("{end}:{winding}"), json!(exp));
                }
                arr.push(json!({
                    "coeff": c.to_string(),
                    "h": e,
                    "z": m.z,
                    "vars": Value::Object(vars),
                    "q": Value::Object(qmap),
                    "p": Value::Object(pmap),
                }));
            }
        }
        Value::Array(arr)
    }
}

impl fmt::Display for Poly {
    /// Terms ascending in the monomial order, each coefficient flattened into
    /// (rational, h-power) factors.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, s) in &self.terms {
            for (e, c) in s.iter() {
                if first {
                    if c.is_negative() {
                        write!(f, "-")?;
                    }
                    first = false;
                } else if c.is_negative() {
                    write!(f, " - ")?;
                } else {
                    write!(f, " + ")?;
                }
                let a = c.abs();
                let mut factors: Vec<String> = Vec::new();
                if !a.is_one() {
                    factors.push(a.to_string());
                }
                match *e {
                    0 => {}
                    1 => factors.push("h".to_string()),
                    _ => factors.push(format!("h^{e}")),
                }
                for (v, exp) in m.vars() {
                    if exp == 1 {
                        factors.push(var_name(v));
                    } else {
                        factors.push(format!("{}^{}", var_name(v), exp));
                    }
                }
                if factors.is_empty() {
                    write!(f, "1")?;
                } else {
                    write!(f, "{}", factors.join("*"))?;
                }
            }
        }
        Ok(())
    }
}

/// The set of variables a sparse series is declared over.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Alphabet {
    pub z: bool,
    pub classical: BTreeSet<ClassVar>,
    pub descendants: bool,
    pub q_ends: BTreeSet<u8>,
    pub p_ends: BTreeSet<u8>,
}

impl Alphabet {
    /// Alphabet containing every variable kind.
    pub fn full() -> Self {
        Alphabet {
            z: true,
            classical: [ClassVar::T0, ClassVar::T1, ClassVar::S1, ClassVar::S2]
                .into_iter()
                .collect(),
            descendants: true,
            q_ends: (0..=4).collect(),
            p_ends: (0..=4).collect(),
        }
    }

    pub fn admits(&self, m: &Monomial) -> bool {
        (self.z || m.z == 0)
            && m.classical.keys().all(|v| self.classical.contains(v))
            && (self.descendants || m.descendant.is_empty())
            && m.q.keys().all(|(end, _)| self.q_ends.contains(end))
            && m.p.keys().all(|(end, _)| self.p_ends.contains(end))
    }
}

/// A polynomial together with its declared alphabet; operations between
/// series over different alphabets are rejected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsePoly {
    poly: Poly,
    alphabet: Alphabet,
}

impl SparsePoly {
    pub fn new(poly: Poly, alphabet: Alphabet) -> Result<Self> {
        for (m, _) in poly.iter() {
            if !alphabet.admits(m) {
                return Err(CalcError::AlphabetMismatch(format!(
                    "monomial outside declared alphabet in {m:?}"
                )));
            }
        }
        Ok(SparsePoly { poly, alphabet })
    }

    pub fn poly(&self) -> &Poly {
        &self.poly
    }

    pub fn into_poly(self) -> Poly {
        self.poly
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn series_mul(&self, other: &SparsePoly, ctx: &TruncationContext) -> Result<SparsePoly> {
        if self.alphabet != other.alphabet {
            return Err(CalcError::AlphabetMismatch(
                "series_mul over different alphabets".to_string(),
            ));
        }
        Ok(SparsePoly {
            poly: self.poly.mul(&other.poly, ctx),
            alphabet: self.alphabet.clone(),
        })
    }

    pub fn exp_truncated(&self, ctx: &TruncationContext) -> Result<SparsePoly> {
        Ok(SparsePoly {
            poly: self.poly.exp_truncated(ctx)?,
            alphabet: self.alphabet.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat_int;

    fn s_int(n: i64) -> ScalarSeries {
        ScalarSeries::from_int(n)
    }

    #[test]
    fn monomial_order_is_graded() {
        let one = Monomial::one();
        let t0 = Monomial::class_var(ClassVar::T0, 1);
        let t0sq = Monomial::class_var(ClassVar::T0, 2);
        let q1 = Monomial::q_var(0, 1, 1);
        assert!(one < t0);
        assert!(t0 < t0sq);
        assert!(t0 < q1, "classical precedes orbit at equal degree");
        assert!(q1 < t0sq, "degree dominates");
    }

    #[test]
    fn q_precedes_p_at_same_orbit() {
        let q = Monomial::q_var(0, 2, 1);
        let p = Monomial::p_var(0, 2, 1);
        // Earlier variable in the alphabet compares smaller, so q-terms
        // print before p-terms at the same degree.
        assert!(q < p);
    }

    #[test]
    fn energy_weights_count_windings() {
        let m = Monomial::q_var(0, 3, 2).mul(&Monomial::p_var(1, 2, 1));
        assert_eq!(m.energy_q(), 6);
        assert_eq!(m.energy_p(), 2);
        assert_eq!(m.total_degree(), 3);
    }

    #[test]
    fn truncation_gates() {
        let ctx = TruncationContext::default().with_max_energy(4);
        assert!(Monomial::q_var(0, 4, 1).passes(&ctx));
        assert!(!Monomial::q_var(0, 5, 1).passes(&ctx));
        assert!(!Monomial::q_var(0, 2, 3).passes(&ctx));
        // Per-side bound: weight 4 on each side passes.
        let both = Monomial::q_var(0, 4, 1).mul(&Monomial::p_var(0, 4, 1));
        assert!(both.passes(&ctx));
    }

    #[test]
    fn poly_mul_is_commutative_merge() {
        let ctx = TruncationContext::default();
        let a = Poly::from_term(Monomial::p_var(0, 1, 1), s_int(2));
        let b = Poly::from_term(Monomial::q_var(0, 1, 1), s_int(3));
        let ab = a.mul(&b, &ctx);
        let ba = b.mul(&a, &ctx);
        assert_eq!(ab, ba);
        let expected = Poly::from_term(
            Monomial::q_var(0, 1, 1).mul(&Monomial::p_var(0, 1, 1)),
            s_int(6),
        );
        assert_eq!(ab, expected);
    }

    #[test]
    fn exp_log_roundtrip() {
        let ctx = TruncationContext::default().with_max_classical(6);
        let mut f = Poly::from_term(Monomial::class_var(ClassVar::T0, 1), s_int(1));
        f.add_term(
            Monomial::class_var(ClassVar::S2, 1),
            &ScalarSeries::term(rat(1, 3), -2),
        );
        let e = f.exp_truncated(&ctx).unwrap();
        let back = e.log_truncated(&ctx).unwrap();
        assert_eq!(back.truncate(&ctx), f);
    }

    #[test]
    fn exp_of_pure_scalar_respects_window() {
        let ctx = TruncationContext::default().with_h_window(-4, 4);
        let f = Poly::constant(ScalarSeries::h_pow(2));
        let e = f.exp_truncated(&ctx).unwrap().project_h(&ctx);
        let expected = {
            let mut s = ScalarSeries::one();
            s.add_term(2, &rat_int(1));
            s.add_term(4, &rat(1, 2));
            Poly::constant(s)
        };
        assert_eq!(e, expected);
    }

    #[test]
    fn log_requires_unit_constant() {
        let ctx = TruncationContext::default();
        let f = Poly::constant(s_int(2));
        assert!(f.log_truncated(&ctx).is_err());
    }

    #[test]
    fn grading_of_mixed_and_homogeneous() {
        // t0^2 s2 and h^2 s2 both weigh -5.
        let mut f = Poly::from_term(
            Monomial::class_var(ClassVar::T0, 2).mul(&Monomial::class_var(ClassVar::S2, 1)),
            s_int(1),
        );
        f.add_term(
            Monomial::class_var(ClassVar::S2, 1),
            &ScalarSeries::h_pow(2),
        );
        assert_eq!(f.grading_degree(), Grading::Homogeneous(-5));
        f.add_term(Monomial::class_var(ClassVar::T1, 1), &s_int(1));
        assert_eq!(f.grading_degree(), Grading::Mixed);
    }

    #[test]
    fn display_is_canonical() {
        let mut f = Poly::constant(ScalarSeries::term(rat(-1, 24), 0));
        f.add_term(
            Monomial::class_var(ClassVar::T0, 2).mul(&Monomial::class_var(ClassVar::S2, 1)),
            &ScalarSeries::term(rat(1, 2), -2),
        );
        f.add_term(
            Monomial::q_var(0, 1, 1).mul(&Monomial::p_var(0, 1, 1)),
            &ScalarSeries::h_pow(-2),
        );
        assert_eq!(
            f.to_string(),
            "-1/24 + h^-2*q_1*p_1 + 1/2*h^-2*t0^2*s2"
        );
    }

    #[test]
    fn sparse_poly_alphabet_mismatch() {
        let classical_only = Alphabet {
            classical: [ClassVar::T0].into_iter().collect(),
            ..Alphabet::default()
        };
        let ok = SparsePoly::new(
            Poly::from_term(Monomial::class_var(ClassVar::T0, 1), s_int(1)),
            classical_only.clone(),
        );
        assert!(ok.is_ok());
        let bad = SparsePoly::new(
            Poly::from_term(Monomial::q_var(0, 1, 1), s_int(1)),
            classical_only.clone(),
        );
        assert!(bad.is_err());

        let a = ok.unwrap();
        let b = SparsePoly::new(Poly::one(), Alphabet::full()).unwrap();
        assert!(a.series_mul(&b, &TruncationContext::default()).is_err());
    }

    #[test]
    fn json_terms_have_stable_shape() {
        let f = Poly::from_term(
            Monomial::q_var(1, 2, 1).mul(&Monomial::class_var(ClassVar::S2, 1)),
            ScalarSeries::term(rat(1, 2), -2),
        );
        let v = f.to_json();
        let term = &v.as_array().unwrap()[0];
        assert_eq!(term["coeff"], "1/2");
        assert_eq!(term["h"], -2);
        assert_eq!(term["z"], 0);
        assert_eq!(term["vars"]["s2"], 1);
        assert_eq!(term["q"]["1:2"], 1);
        assert_eq!(term["p"].as_object().unwrap().len(), 0);
    }
}
