//! Hurwitz numbers of the sphere with three branch profiles, counted by
//! exact permutation enumeration, and the pair-of-pants potential built from
//! them. A separate count of commutator tuples provides an independent
//! oracle for unramified covers of higher-genus surfaces.

use crate::error::{CalcError, Result};
use crate::poly::{ClassVar, Monomial, Poly};
use crate::scalar::{factorial, rat_int, ScalarSeries};
use crate::trunc::TruncationContext;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Degrees above this are rejected: the enumeration walks all of S_d.
pub const MAX_ENUMERATION_DEGREE: u32 = 7;

/// Degrees above this are rejected for commutator-tuple counting, which
/// walks all pairs of S_d.
pub const MAX_TUPLE_DEGREE: u32 = 6;

/// A partition: weakly decreasing positive parts.
pub type Partition = Vec<u32>;

/// All partitions of d, parts descending within each, list in
/// lexicographically descending order starting from [d].
pub fn partitions(d: u32) -> Vec<Partition> {
    fn rec(remaining: u32, max_part: u32, acc: &mut Partition, out: &mut Vec<Partition>) {
        if remaining == 0 {
            out.push(acc.clone());
            return;
        }
        let top = remaining.min(max_part);
        for part in (1..=top).rev() {
            acc.push(part);
            rec(remaining - part, part, acc, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    rec(d, d, &mut Vec::new(), &mut out);
    out
}

/// Number of partitions of d.
pub fn partition_count(d: u32) -> u64 {
    partitions(d).len() as u64
}

fn cycle_type(perm: &[u8]) -> Partition {
    let n = perm.len();
    let mut seen = vec![false; n];
    let mut t = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut len = 0u32;
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            i = perm[i] as usize;
            len += 1;
        }
        t.push(len);
    }
    t.sort_unstable_by(|a, b| b.cmp(a));
    t
}

/// A permutation with consecutive cycles of the given lengths.
fn representative(t: &Partition) -> Vec<u8> {
    let mut perm = Vec::new();
    let mut base = 0u8;
    for &len in t {
        for i in 0..len as u8 {
            perm.push(base + (i + 1) % len as u8);
        }
        base += len as u8;
    }
    perm
}

/// Size of the conjugacy class with this cycle type in S_d.
fn class_size(t: &Partition, d: u32) -> BigInt {
    let mut z = BigInt::one();
    let mut run = 1u32;
    for i in 0..t.len() {
        z *= BigInt::from(t[i]);
        if i + 1 < t.len() && t[i + 1] == t[i] {
            run += 1;
        } else {
            for m in 2..=run {
                z *= BigInt::from(m);
            }
            run = 1;
        }
    }
    factorial(d).numer() / z
}

fn next_permutation(perm: &mut [u8]) -> bool {
    let n = perm.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

fn compose(a: &[u8], b: &[u8]) -> Vec<u8> {
    b.iter().map(|&x| a[x as usize]).collect()
}

fn inverse(a: &[u8]) -> Vec<u8> {
    let mut inv = vec![0u8; a.len()];
    for (i, &x) in a.iter().enumerate() {
        inv[x as usize] = i as u8;
    }
    inv
}

/// True when the group generated by the two permutations acts transitively.
fn transitive_pair(a: &[u8], b: &[u8]) -> bool {
    let n = a.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for i in 0..n {
        for perm in [a, b] {
            let (ri, rj) = (find(&mut parent, i), find(&mut parent, perm[i] as usize));
            if ri != rj {
                parent[ri] = rj;
            }
        }
    }
    let root = find(&mut parent, 0);
    (1..n).all(|i| find(&mut parent, i) == root)
}

/// Branch data of a degree-d cover of the sphere with three marked points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HurwitzKey {
    pub d: u32,
    pub mu0: Partition,
    pub mu1: Partition,
    pub muinf: Partition,
}

impl HurwitzKey {
    pub fn new(d: u32, mu0: Partition, mu1: Partition, muinf: Partition) -> Result<Self> {
        for mu in [&mu0, &mu1, &muinf] {
            if mu.iter().sum::<u32>() != d || mu.windows(2).any(|w| w[0] < w[1]) {
                return Err(CalcError::AlphabetMismatch(format!(
                    "profile {mu:?} is not a partition of {d}"
                )));
            }
        }
        Ok(HurwitzKey { d, mu0, mu1, muinf })
    }

    /// Genus of a connected cover with this branch data, from the total
    /// branching 2 - 2g = 2d - sum(d - length(mu)).
    pub fn genus(&self) -> u32 {
        let b: i64 = [&self.mu0, &self.mu1, &self.muinf]
            .iter()
            .map(|mu| i64::from(self.d) - mu.len() as i64)
            .sum();
        let two_g = b - 2 * i64::from(self.d) + 2;
        assert!(two_g >= 0 && two_g % 2 == 0, "branch data is not realizable");
        (two_g / 2) as u32
    }
}

/// Weighted count of transitive monodromy triples for one key: the class of
/// mu0 is represented once and weighted by its size, the middle factor runs
/// over all of S_d, and the third is forced by the product being trivial.
fn weighted_triple_count(key: &HurwitzKey) -> u64 {
    let s0 = representative(&key.mu0);
    let mut s1: Vec<u8> = (0..key.d as u8).collect();
    let mut count: u64 = 0;
    loop {
        if cycle_type(&s1) == key.mu1 {
            let prod = compose(&s0, &s1);
            let sinf = inverse(&prod);
            if cycle_type(&sinf) == key.muinf && transitive_pair(&s0, &s1) {
                count += 1;
            }
        }
        if !next_permutation(&mut s1) {
            break;
        }
    }
    count
}

/// The Hurwitz number of the key: the weighted triple count over d!.
/// Returns the value with the forced genus, or None when no cover exists.
pub fn hurwitz_number(key: &HurwitzKey) -> Result<Option<(BigRational, u32)>> {
    if key.d > MAX_ENUMERATION_DEGREE {
        return Err(CalcError::DegreeOverBound {
            degree: key.d,
            bound: MAX_ENUMERATION_DEGREE,
        });
    }
    let count = weighted_triple_count(key);
    if count == 0 {
        return Ok(None);
    }
    let weighted = BigRational::from_integer(class_size(&key.mu0, key.d) * BigInt::from(count));
    Ok(Some((weighted / factorial(key.d), key.genus())))
}

/// Count the same triples by brute force over both free factors; used to
/// validate the class-weighted enumeration at small degree.
pub fn raw_triple_count(key: &HurwitzKey) -> Result<BigInt> {
    if key.d > 4 {
        return Err(CalcError::DegreeOverBound { degree: key.d, bound: 4 });
    }
    let mut total = BigInt::zero();
    let mut s0: Vec<u8> = (0..key.d as u8).collect();
    loop {
        if cycle_type(&s0) == key.mu0 {
            let mut s1: Vec<u8> = (0..key.d as u8).collect();
            loop {
                if cycle_type(&s1) == key.mu1 {
                    let sinf = inverse(&compose(&s0, &s1));
                    if cycle_type(&sinf) == key.muinf && transitive_pair(&s0, &s1) {
                        total += 1;
                    }
                }
                if !next_permutation(&mut s1) {
                    break;
                }
            }
        }
        if !next_permutation(&mut s0) {
            break;
        }
    }
    Ok(total)
}

/// Number of homomorphisms from the fundamental group of a genus-g surface
/// to S_d, divided by d!: counts degree-d unramified covers weighted by
/// automorphisms. g = 1 recovers the partition count of d.
pub fn commutator_tuple_count(g: u32, d: u32) -> Result<BigRational> {
    if d > MAX_TUPLE_DEGREE {
        return Err(CalcError::DegreeOverBound { degree: d, bound: MAX_TUPLE_DEGREE });
    }
    assert!(g >= 1, "surface group count needs g >= 1");
    // Index all of S_d.
    let mut perms: Vec<Vec<u8>> = Vec::new();
    let mut p: Vec<u8> = (0..d as u8).collect();
    loop {
        perms.push(p.clone());
        if !next_permutation(&mut p) {
            break;
        }
    }
    let order = perms.len();
    let index_of = |perm: &[u8]| -> usize {
        perms.binary_search_by(|probe| probe.as_slice().cmp(perm)).unwrap()
    };
    // Distribution of commutators over the group.
    let mut single = vec![0u128; order];
    for a in &perms {
        let a_inv = inverse(a);
        for b in &perms {
            let c = compose(&compose(a, b), &compose(&a_inv, &inverse(b)));
            single[index_of(&c)] += 1;
        }
    }
    // g-fold convolution evaluated at the identity.
    let mut dist = single.clone();
    for _ in 1..g {
        let mut next = vec![0u128; order];
        for (i, &ci) in dist.iter().enumerate() {
            if ci == 0 {
                continue;
            }
            for (j, &cj) in single.iter().enumerate() {
                if cj == 0 {
                    continue;
                }
                let x = compose(&perms[i], &perms[j]);
                next[index_of(&x)] += ci * cj;
            }
        }
        dist = next;
    }
    let id_index = index_of(&(0..d as u8).collect::<Vec<u8>>());
    Ok(BigRational::new(BigInt::from(dist[id_index]), BigInt::from(order as u64)))
}

/// z-power coefficients of the logarithm of the inverse Euler product:
/// entry d is sigma_1(d)/d (entry 0 is zero).
pub fn eta_log_series(max_d: u32) -> Vec<BigRational> {
    let mut out = vec![BigRational::zero()];
    for d in 1..=max_d {
        let sigma: u32 = (1..=d).filter(|k| d % k == 0).sum();
        out.push(BigRational::new(BigInt::from(sigma), BigInt::from(d)));
    }
    out
}

/// The classical sector shared by the cap and the pants:
/// `(1/hbar)[t0^2 s2/2 + t0 t1 s1 - hbar s2/24]`, with the middle term only
/// present when `two_marked` is set (the pants has both marked classes).
fn classical_sector(two_marked: bool) -> Poly {
    let mut f = Poly::from_term(
        Monomial::class_var(ClassVar::T0, 2).mul(&Monomial::class_var(ClassVar::S2, 1)),
        ScalarSeries::term(crate::scalar::rat(1, 2), -2),
    );
    if two_marked {
        f.add_term(
            Monomial::class_var(ClassVar::T0, 1)
                .mul(&Monomial::class_var(ClassVar::T1, 1))
                .mul(&Monomial::class_var(ClassVar::S1, 1)),
            &ScalarSeries::h_pow(-2),
        );
    }
    f.add_term(
        Monomial::class_var(ClassVar::S2, 1),
        &ScalarSeries::term(crate::scalar::rat(-1, 24), 0),
    );
    f
}

pub(crate) fn pants_classical() -> Poly {
    classical_sector(true)
}

pub(crate) fn cap_classical() -> Poly {
    classical_sector(false)
}

fn partition_monomial(end: u8, mu: &Partition, momentum: bool) -> Monomial {
    let mut m = Monomial::one();
    for &part in mu {
        let key = (end, part);
        let map = if momentum { &mut m.p } else { &mut m.q };
        *map.entry(key).or_insert(0) += 1;
    }
    m
}

/// Expanded Euler dressing `exp(d * s2)` up to the classical-degree gate.
pub(crate) fn euler_dressing(d: u32, ctx: &TruncationContext) -> Poly {
    let mut out = Poly::zero();
    for j in 0..=ctx.max_classical {
        out.add_term(
            Monomial::class_var(ClassVar::S2, j),
            &ScalarSeries::from_rational(
                rat_int(i64::from(d)).pow(j as i32) / factorial(j),
            ),
        );
    }
    out
}

/// The pair-of-pants potential: classical sector plus, for every degree and
/// triple of branch profiles, the Hurwitz number times
/// `q^mu1 (p1)^mu0 (p2)^muinf h^(2g-2) exp(|mu1| s2)`, with q's on end 0 and
/// p's on ends 1 and 2.
pub fn pants_potential(ctx: &TruncationContext) -> Result<Poly> {
    let mut f = pants_classical().truncate(ctx);
    f.add_assign(&hurwitz_sector(ctx, false, true)?);
    Ok(f)
}

/// The pants with its q-end flipped positive (all three ends carry p's) and
/// no classical or dressing decoration: the symmetric building block for
/// closed-surface gluings, evaluated at t = s = 0.
pub fn pants_all_positive(ctx: &TruncationContext) -> Result<Poly> {
    hurwitz_sector(ctx, true, false)
}

/// The pants with q's on end 0 and p's on ends 1 and 2, stripped of the
/// classical sector and the dressing: the piece glued onto an existing chain
/// to add one more handle, evaluated at t = s = 0.
pub(crate) fn pants_bare(ctx: &TruncationContext) -> Result<Poly> {
    hurwitz_sector(ctx, false, false)
}

fn hurwitz_sector(ctx: &TruncationContext, all_positive: bool, dressed: bool) -> Result<Poly> {
    let d_max = ctx.max_energy.min(MAX_ENUMERATION_DEGREE);
    let mut f = Poly::zero();
    for d in 1..=d_max {
        let profiles = partitions(d);
        for mu0 in &profiles {
            for mu1 in &profiles {
                for muinf in &profiles {
                    let mono = partition_monomial(1, mu0, true)
                        .mul(&partition_monomial(2, muinf, true))
                        .mul(&partition_monomial(0, mu1, all_positive));
                    if !mono.passes(ctx) {
                        continue;
                    }
                    let key = HurwitzKey::new(d, mu0.clone(), mu1.clone(), muinf.clone())?;
                    let Some((value, genus)) = hurwitz_number(&key)? else {
                        continue;
                    };
                    let coeff = ScalarSeries::term(value, 2 * genus as i32 - 2);
                    let base = Poly::from_term(mono, coeff);
                    if dressed {
                        f.add_assign(&base.mul(&euler_dressing(d, ctx), ctx));
                    } else {
                        f.add_assign(&base);
                    }
                }
            }
        }
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn key(d: u32, a: &[u32], b: &[u32], c: &[u32]) -> HurwitzKey {
        HurwitzKey::new(d, a.to_vec(), b.to_vec(), c.to_vec()).unwrap()
    }

    #[test]
    fn partitions_of_small_numbers() {
        assert_eq!(partitions(0), vec![Vec::<u32>::new()]);
        assert_eq!(partitions(3), vec![vec![3], vec![2, 1], vec![1, 1, 1]]);
        assert_eq!(partition_count(5), 7);
        assert_eq!(partition_count(10), 42);
    }

    #[test]
    fn class_sizes_in_s4() {
        assert_eq!(class_size(&vec![4], 4), BigInt::from(6));
        assert_eq!(class_size(&vec![2, 2], 4), BigInt::from(3));
        assert_eq!(class_size(&vec![2, 1, 1], 4), BigInt::from(6));
        assert_eq!(class_size(&vec![1, 1, 1, 1], 4), BigInt::from(1));
    }

    #[test]
    fn degree_one_cover() {
        let (v, g) = hurwitz_number(&key(1, &[1], &[1], &[1])).unwrap().unwrap();
        assert_eq!(v, rat_int(1));
        assert_eq!(g, 0);
    }

    #[test]
    fn degree_two_covers() {
        let (v, g) = hurwitz_number(&key(2, &[2], &[2], &[1, 1])).unwrap().unwrap();
        assert_eq!(v, rat(1, 2));
        assert_eq!(g, 0);
        // Parity forbids an odd number of transpositions multiplying to 1.
        assert!(hurwitz_number(&key(2, &[2], &[2], &[2])).unwrap().is_none());
        // The unramified double cover of the sphere does not exist
        // (it would be disconnected).
        assert!(hurwitz_number(&key(2, &[1, 1], &[1, 1], &[1, 1]))
            .unwrap()
            .is_none());
    }

    #[test]
    fn degree_three_torus_cover() {
        let (v, g) = hurwitz_number(&key(3, &[3], &[3], &[3])).unwrap().unwrap();
        assert_eq!(v, rat(1, 3));
        assert_eq!(g, 1);
    }

    #[test]
    fn weighted_count_matches_raw_enumeration() {
        for d in 1..=4u32 {
            for mu0 in partitions(d) {
                for mu1 in partitions(d) {
                    for muinf in partitions(d) {
                        let k = key(d, &mu0, &mu1, &muinf);
                        let raw = raw_triple_count(&k).unwrap();
                        let weighted = match hurwitz_number(&k).unwrap() {
                            None => BigRational::zero(),
                            Some((v, _)) => v * factorial(d),
                        };
                        assert_eq!(
                            BigRational::from_integer(raw),
                            weighted,
                            "degree {d} profiles {mu0:?} {mu1:?} {muinf:?}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn enumeration_bound_is_enforced() {
        let k = key(8, &[8], &[8], &[8]);
        assert!(hurwitz_number(&k).is_err());
    }

    #[test]
    fn commutator_tuple_counts() {
        assert_eq!(commutator_tuple_count(1, 1).unwrap(), rat_int(1));
        assert_eq!(commutator_tuple_count(1, 2).unwrap(), rat_int(2));
        assert_eq!(commutator_tuple_count(2, 2).unwrap(), rat_int(8));
        assert_eq!(commutator_tuple_count(3, 2).unwrap(), rat_int(32));
        // g = 1 counts conjugacy classes.
        for d in 1..=5 {
            assert_eq!(
                commutator_tuple_count(1, d).unwrap(),
                rat_int(partition_count(d) as i64)
            );
        }
    }

    #[test]
    fn eta_log_coefficients() {
        let s = eta_log_series(6);
        assert_eq!(s[1], rat_int(1));
        assert_eq!(s[2], rat(3, 2));
        assert_eq!(s[3], rat(4, 3));
        assert_eq!(s[4], rat(7, 4));
        assert_eq!(s[5], rat(6, 5));
        assert_eq!(s[6], rat_int(2));
    }

    #[test]
    fn pants_contains_the_trivial_cover() {
        let ctx = TruncationContext::default().with_max_energy(2);
        let f = pants_potential(&ctx).unwrap();
        // Degree 1: H = 1, genus 0, so the coefficient of q_1 p1_1 p2_1 is
        // h^-2 (times the dressing, whose s2^0 part is 1).
        let mono = Monomial::q_var(0, 1, 1)
            .mul(&Monomial::p_var(1, 1, 1))
            .mul(&Monomial::p_var(2, 1, 1));
        assert_eq!(f.coeff(&mono), ScalarSeries::h_pow(-2));
        // Its s2-dressed companion carries |mu| = 1.
        let dressed = mono.mul(&Monomial::class_var(ClassVar::S2, 1));
        assert_eq!(f.coeff(&dressed), ScalarSeries::h_pow(-2));
    }

    #[test]
    fn pants_degree_two_sector() {
        // Degree-two terms carry p-energy 4: two ends of total winding 2 each.
        let ctx = TruncationContext::default().with_max_energy(4);
        let f = pants_potential(&ctx).unwrap();
        // (2),(2),(1,1): value 1/2, genus 0: coefficient of q_2 p1_2 p2_1^2.
        let mono = Monomial::q_var(0, 2, 1)
            .mul(&Monomial::p_var(1, 2, 1))
            .mul(&Monomial::p_var(2, 1, 2));
        assert_eq!(f.coeff(&mono), ScalarSeries::term(rat(1, 2), -2));
        // (2),(2),(2) does not exist.
        let absent = Monomial::q_var(0, 2, 1)
            .mul(&Monomial::p_var(1, 2, 1))
            .mul(&Monomial::p_var(2, 2, 1));
        assert!(f.coeff(&absent).is_zero());
    }
}
