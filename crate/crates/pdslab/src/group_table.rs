//! Generic finite-group plumbing over dense element indices.
//!
//! Everything downstream of the twisted groups (PDS verification, scheme
//! counting, the regular 2-groups) only needs multiply, invert, identity
//! and a size, so that is the whole trait. Groups of order up to 2^16
//! stay comfortable; nothing here materializes an N x N table unless you
//! ask for a `DenseGroup`.

use crate::bitset::IndexSet;
use crate::twisted::GroupContext;
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use serde::Serialize;

pub trait FiniteGroup {
    fn size(&self) -> usize;
    fn identity(&self) -> usize;
    fn mul(&self, a: usize, b: usize) -> usize;
    fn inv(&self, a: usize) -> usize;
}

/// A twisted group G_e seen through the generic trait.
pub struct TwistedTable<'a>(pub &'a GroupContext);

impl FiniteGroup for TwistedTable<'_> {
    fn size(&self) -> usize {
        self.0.order()
    }
    fn identity(&self) -> usize {
        0
    }
    #[inline]
    fn mul(&self, a: usize, b: usize) -> usize {
        self.0.add_idx(a, b)
    }
    #[inline]
    fn inv(&self, a: usize) -> usize {
        self.0.neg_idx(a)
    }
}

/// Fully materialized multiplication table; only for small orders.
pub struct DenseGroup {
    size: usize,
    identity: usize,
    mul: Vec<u32>,
    inv: Vec<u32>,
}

impl DenseGroup {
    pub fn from_group<G: FiniteGroup>(g: &G) -> DenseGroup {
        let n = g.size();
        assert!(n <= 4096, "dense table would be too large");
        let mut mul = vec![0u32; n * n];
        for a in 0..n {
            for b in 0..n {
                mul[a * n + b] = g.mul(a, b) as u32;
            }
        }
        let inv = (0..n).map(|a| g.inv(a) as u32).collect();
        DenseGroup {
            size: n,
            identity: g.identity(),
            mul,
            inv,
        }
    }

    /// Relabels the group through a bijection sigma, conjugating the
    /// operation: mul'(a, b) = sigma(mul(sigma^-1 a, sigma^-1 b)).
    pub fn relabel(&self, sigma: &[usize]) -> DenseGroup {
        let n = self.size;
        assert_eq!(sigma.len(), n);
        let mut sigma_inv = vec![0usize; n];
        for (i, &s) in sigma.iter().enumerate() {
            sigma_inv[s] = i;
        }
        let mut mul = vec![0u32; n * n];
        for a in 0..n {
            for b in 0..n {
                mul[a * n + b] =
                    sigma[self.mul[sigma_inv[a] * n + sigma_inv[b]] as usize] as u32;
            }
        }
        let inv = (0..n)
            .map(|a| sigma[self.inv[sigma_inv[a]] as usize] as u32)
            .collect();
        DenseGroup {
            size: n,
            identity: sigma[self.identity],
            mul,
            inv,
        }
    }
}

impl FiniteGroup for DenseGroup {
    fn size(&self) -> usize {
        self.size
    }
    fn identity(&self) -> usize {
        self.identity
    }
    #[inline]
    fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.size + b] as usize
    }
    #[inline]
    fn inv(&self, a: usize) -> usize {
        self.inv[a] as usize
    }
}

/// Spot-checks the group axioms: identity and inverse laws exhaustively,
/// associativity exhaustively for orders <= 256 and on 10^5 seeded
/// triples otherwise.
pub fn validate_group<G: FiniteGroup>(g: &G, seed: u64) -> Result<()> {
    validate_group_with_limit(g, seed, 256)
}

/// The same axioms with sampled associativity regardless of order; cheap
/// enough to run on every construction.
pub fn spot_check_group<G: FiniteGroup>(g: &G, seed: u64) -> Result<()> {
    validate_group_with_limit(g, seed, 0)
}

fn validate_group_with_limit<G: FiniteGroup>(
    g: &G,
    seed: u64,
    exhaustive_limit: usize,
) -> Result<()> {
    let n = g.size();
    let e = g.identity();
    for a in 0..n {
        if g.mul(e, a) != a || g.mul(a, e) != a {
            return Err(Error::BadGroupTable(format!("identity law fails at {a}")));
        }
        let ai = g.inv(a);
        if ai >= n || g.mul(a, ai) != e || g.mul(ai, a) != e {
            return Err(Error::BadGroupTable(format!("inverse law fails at {a}")));
        }
    }
    let check = |a: usize, b: usize, c: usize| -> Result<()> {
        if g.mul(g.mul(a, b), c) != g.mul(a, g.mul(b, c)) {
            return Err(Error::BadGroupTable(format!(
                "associativity fails at ({a},{b},{c})"
            )));
        }
        Ok(())
    };
    if n <= exhaustive_limit {
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    check(a, b, c)?;
                }
            }
        }
    } else {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..100_000 {
            check(rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n))?;
        }
    }
    Ok(())
}

/// Subgroup generated by `gens`, as a membership set.
///
/// Orbit of the identity under right multiplication by the kept
/// generators; in a finite group that reachable set is the subgroup.
/// Generators already inside the running closure are skipped, so large
/// redundant generator lists are cheap.
pub fn closure<G: FiniteGroup>(g: &G, gens: &[usize]) -> IndexSet {
    let mut members = IndexSet::new(g.size());
    members.insert(g.identity());
    let mut kept: Vec<usize> = Vec::new();
    for &x in gens {
        if members.contains(x) {
            continue;
        }
        kept.push(x);
        let mut queue: Vec<usize> = members.iter().collect();
        members.insert(x);
        queue.push(x);
        while let Some(m) = queue.pop() {
            for &s in &kept {
                let z = g.mul(m, s);
                if members.insert(z) {
                    queue.push(z);
                }
            }
        }
    }
    members
}

/// Greedy small generating set for a subgroup given as a membership set.
pub fn subgroup_generators<G: FiniteGroup>(g: &G, members: &IndexSet) -> Vec<usize> {
    let mut gens: Vec<usize> = Vec::new();
    let mut span = closure(g, &[]);
    for x in members.iter() {
        if span.contains(x) {
            continue;
        }
        gens.push(x);
        span = closure(g, &gens);
        if span.count() == members.count() {
            break;
        }
    }
    gens
}

/// Normal closure of `seed` under conjugation by `conj_gens`, joined with
/// the subgroup it generates.
pub fn normal_closure<G: FiniteGroup>(g: &G, seed: &[usize], conj_gens: &[usize]) -> IndexSet {
    let mut gens: Vec<usize> = seed.to_vec();
    let mut members = closure(g, &gens);
    loop {
        let mut new_gens = Vec::new();
        for x in members.iter() {
            for &c in conj_gens {
                let conj = g.mul(g.mul(c, x), g.inv(c));
                if !members.contains(conj) {
                    new_gens.push(conj);
                }
            }
        }
        if new_gens.is_empty() {
            return members;
        }
        gens.extend(new_gens);
        members = closure(g, &gens);
    }
}

#[inline]
pub fn commutator<G: FiniteGroup>(g: &G, a: usize, b: usize) -> usize {
    g.mul(g.mul(g.mul(a, b), g.inv(a)), g.inv(b))
}

/// Center as the centralizer of a generating set, by full scan.
pub fn center_of<G: FiniteGroup>(g: &G, gens: &[usize]) -> IndexSet {
    let mut members = IndexSet::new(g.size());
    for x in 0..g.size() {
        if gens.iter().all(|&y| g.mul(x, y) == g.mul(y, x)) {
            members.insert(x);
        }
    }
    members
}

/// Derived subgroup: normal closure of the generator commutators.
pub fn derived_of<G: FiniteGroup>(g: &G, gens: &[usize]) -> IndexSet {
    let mut seeds = Vec::new();
    for (i, &a) in gens.iter().enumerate() {
        for &b in &gens[i + 1..] {
            seeds.push(commutator(g, a, b));
        }
    }
    normal_closure(g, &seeds, gens)
}

/// gamma_2, gamma_3, ... down to and including the trivial subgroup.
/// Each step is the normal closure of commutators between generators of
/// the previous term and the group generators.
pub fn lower_central_series_of<G: FiniteGroup>(g: &G, gens: &[usize]) -> Vec<IndexSet> {
    let mut series = vec![derived_of(g, gens)];
    loop {
        let prev = series.last().unwrap();
        if prev.count() == 1 {
            break;
        }
        let prev_gens = subgroup_generators(g, prev);
        let mut seeds = Vec::new();
        for &x in &prev_gens {
            for &y in gens {
                seeds.push(commutator(g, x, y));
            }
        }
        let next = normal_closure(g, &seeds, gens);
        if &next == prev {
            break; // non-nilpotent input; series stalled
        }
        series.push(next);
    }
    series
}

/// Frattini subgroup of a finite 2-group: the subgroup generated by all
/// squares.
pub fn frattini_of<G: FiniteGroup>(g: &G) -> IndexSet {
    let mut squares = IndexSet::new(g.size());
    for x in 0..g.size() {
        squares.insert(g.mul(x, x));
    }
    let gens: Vec<usize> = squares.iter().collect();
    closure(g, &gens)
}

/// Largest element order; for a 2-group this is the exponent.
pub fn exponent_of<G: FiniteGroup>(g: &G) -> u64 {
    (0..g.size()).map(|x| element_order(g, x)).max().unwrap_or(1)
}

pub fn element_order<G: FiniteGroup>(g: &G, x: usize) -> u64 {
    let e = g.identity();
    let mut acc = x;
    let mut ord = 1u64;
    while acc != e {
        acc = g.mul(acc, x);
        ord += 1;
        assert!(ord <= g.size() as u64, "element order exceeded group size");
    }
    ord
}

/// Do all members commute pairwise? Checked on a small generating set.
pub fn is_abelian_subgroup<G: FiniteGroup>(g: &G, members: &IndexSet) -> bool {
    let gens = subgroup_generators(g, members);
    for (i, &a) in gens.iter().enumerate() {
        for &b in &gens[i + 1..] {
            if g.mul(a, b) != g.mul(b, a) {
                return false;
            }
        }
    }
    true
}

/// Invariant-factor type of a finite abelian 2-group.
///
/// `factors[k]` counts the Z_{2^{k+1}} summands. Derived from the
/// counting sequence n_k = #{g : g^(2^k) = 1}: with d_k the log2 jumps,
/// the number of Z_{2^k} factors is d_k - d_{k+1}.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AbelianType {
    pub factors: Vec<u32>,
}

impl AbelianType {
    /// Builds Z2^a + Z4^b style types directly; `pairs` lists (k, count)
    /// meaning `count` copies of Z_{2^k}.
    pub fn from_pairs(pairs: &[(u32, u32)]) -> AbelianType {
        let maxk = pairs.iter().map(|&(k, _)| k).max().unwrap_or(0) as usize;
        let mut factors = vec![0u32; maxk];
        for &(k, c) in pairs {
            if k >= 1 && c > 0 {
                factors[(k - 1) as usize] += c;
            }
        }
        while factors.last() == Some(&0) {
            factors.pop();
        }
        AbelianType { factors }
    }

    pub fn order(&self) -> u64 {
        let bits: u32 = self
            .factors
            .iter()
            .enumerate()
            .map(|(k, &c)| (k as u32 + 1) * c)
            .sum();
        1u64 << bits
    }

    pub fn is_trivial(&self) -> bool {
        self.factors.is_empty()
    }
}

impl std::fmt::Display for AbelianType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "1");
        }
        let mut first = true;
        for (k, &c) in self.factors.iter().enumerate() {
            if c == 0 {
                continue;
            }
            if !first {
                write!(f, "x")?;
            }
            first = false;
            write!(f, "Z{}^{}", 1u64 << (k + 1), c)?;
        }
        Ok(())
    }
}

/// Abelian type of an abelian subgroup, via order counting. The caller is
/// responsible for the set actually being an abelian subgroup.
pub fn abelian_type_of<G: FiniteGroup>(g: &G, members: &IndexSet) -> AbelianType {
    let e = g.identity();
    // n_k = #{x : x^(2^k) = e}; square every member until it hits identity
    let mut n = vec![1u64];
    let mut current: Vec<usize> = members.iter().filter(|&x| x != e).collect();
    let mut k = 0;
    while !current.is_empty() {
        k += 1;
        let mut survivors = Vec::new();
        let mut killed = 0u64;
        for &x in &current {
            let sq = g.mul(x, x);
            if sq == e {
                killed += 1;
            } else {
                survivors.push(sq);
            }
        }
        // n_k counts everything annihilated by 2^k: previous plus newly killed
        n.push(n[k - 1] + killed);
        current = survivors;
        assert!(k <= 64, "runaway order counting");
    }
    assert_eq!(
        *n.last().unwrap(),
        members.count() as u64,
        "subgroup not closed under squaring"
    );
    type_from_counts(&n)
}

/// Abelian type of the quotient big/small, where small <= big are
/// subgroups of an abelian ambient group. Counts cosets annihilated by
/// successive squarings: n_k = #{x in big : x^(2^k) in small} / |small|.
pub fn quotient_abelian_type<G: FiniteGroup>(
    g: &G,
    big: &IndexSet,
    small: &IndexSet,
) -> AbelianType {
    assert!(small.is_subset(big));
    let small_size = small.count() as u64;
    let mut n = Vec::new();
    let mut current: Vec<usize> = big.iter().collect();
    loop {
        let inside = current.iter().filter(|&&x| small.contains(x)).count() as u64;
        assert_eq!(inside % small_size, 0, "preimage must be a union of cosets");
        n.push(inside / small_size);
        if inside == big.count() as u64 {
            break;
        }
        current = current.iter().map(|&x| g.mul(x, x)).collect();
        assert!(n.len() <= 64, "runaway quotient counting");
    }
    type_from_counts(&n)
}

/// Invariant factors from the annihilator counting sequence: with d_k the
/// log2 jumps of n, the number of Z_{2^k} factors is d_k - d_{k+1}.
fn type_from_counts(n: &[u64]) -> AbelianType {
    let d: Vec<u32> = (1..n.len())
        .map(|k| (n[k].trailing_zeros()) - (n[k - 1].trailing_zeros()))
        .collect();
    let mut pairs = Vec::new();
    for k in 1..=d.len() {
        let next = if k < d.len() { d[k] } else { 0 };
        let cnt = d[k - 1] - next;
        pairs.push((k as u32, cnt));
    }
    AbelianType::from_pairs(&pairs)
}
