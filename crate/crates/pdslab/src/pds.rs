//! Brute-force partial difference set verification and LS/NLS
//! classification.
//!
//! A subset D of a finite group is verified by counting |D ∩ gD| for
//! every non-identity g from scratch: one convolution pass over D x D
//! fills a count table indexed by h' h^{-1}, then the table must be
//! constant on D (lambda) and on the complement (mu). Counting is the
//! single source of truth; no character theory.

use crate::bitset::IndexSet;
use crate::group_table::FiniteGroup;
use crate::{Error, Result};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PdsParams {
    pub v: u64,
    pub k: u64,
    pub lambda: u64,
    pub mu: u64,
}

impl PdsParams {
    pub fn as_tuple(&self) -> (u64, u64, u64, u64) {
        (self.v, self.k, self.lambda, self.mu)
    }

    /// k(k - lambda - 1) = (v - k - 1) mu.
    pub fn counting_identity_holds(&self) -> bool {
        let (v, k, l, m) = (
            self.v as i128,
            self.k as i128,
            self.lambda as i128,
            self.mu as i128,
        );
        k * (k - l - 1) == (v - k - 1) * m
    }
}

impl std::fmt::Display for PdsParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{},{})", self.v, self.k, self.lambda, self.mu)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Side {
    #[serde(rename = "in_D")]
    InD,
    #[serde(rename = "out_D")]
    OutD,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PdsFailure {
    ContainsIdentity,
    NotInverseClosed {
        witness: usize,
    },
    NotConstant {
        violating_g: usize,
        count: u64,
        expected: u64,
        side: Side,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PdsVerification {
    pub params: PdsParams,
    /// Set when D is empty or all of G\{1}; lambda or mu defaults to 0
    /// where no witness pair exists.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PdsOutcome {
    Verified(PdsVerification),
    Failed(PdsFailure),
}

impl PdsOutcome {
    pub fn verified(&self) -> Option<&PdsVerification> {
        match self {
            PdsOutcome::Verified(v) => Some(v),
            PdsOutcome::Failed(_) => None,
        }
    }
}

/// Counts c(g) = |{h in D : g h in D}| for every g, via one convolution
/// over ordered pairs of D.
pub fn difference_counts<G: FiniteGroup + Sync>(
    g: &G,
    d: &IndexSet,
    threads: usize,
) -> Vec<u32> {
    let n = g.size();
    let members: Vec<usize> = d.iter().collect();
    let inverses: Vec<usize> = members.iter().map(|&h| g.inv(h)).collect();
    let threads = threads.max(1).min(members.len().max(1));
    if threads <= 1 || members.len() < 1024 {
        let mut counts = vec![0u32; n];
        for &h2 in &members {
            for &hi in &inverses {
                counts[g.mul(h2, hi)] += 1;
            }
        }
        return counts;
    }
    let chunk = members.len().div_ceil(threads);
    let partials: Vec<Vec<u32>> = std::thread::scope(|scope| {
        let handles: Vec<_> = members
            .chunks(chunk)
            .map(|slice| {
                let inverses = &inverses;
                scope.spawn(move || {
                    let mut counts = vec![0u32; n];
                    for &h2 in slice {
                        for &hi in inverses {
                            counts[g.mul(h2, hi)] += 1;
                        }
                    }
                    counts
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let mut counts = vec![0u32; n];
    for p in partials {
        for (c, q) in counts.iter_mut().zip(p) {
            *c += q;
        }
    }
    counts
}

/// Verifies the PDS axioms for D in G by exhaustive counting.
pub fn verify_pds<G: FiniteGroup + Sync>(
    g: &G,
    d: &IndexSet,
    threads: usize,
) -> Result<PdsOutcome> {
    let n = g.size();
    if d.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: d.len(),
        });
    }
    let e = g.identity();
    if d.contains(e) {
        return Ok(PdsOutcome::Failed(PdsFailure::ContainsIdentity));
    }
    for h in d.iter() {
        if !d.contains(g.inv(h)) {
            return Ok(PdsOutcome::Failed(PdsFailure::NotInverseClosed { witness: h }));
        }
    }
    let k = d.count() as u64;
    if k == 0 {
        return Ok(PdsOutcome::Verified(PdsVerification {
            params: PdsParams {
                v: n as u64,
                k: 0,
                lambda: 0,
                mu: 0,
            },
            degenerate: true,
        }));
    }

    let counts = difference_counts(g, d, threads);

    let lambda = counts[d.first().expect("nonempty")] as u64;
    let first_out = (0..n).find(|&x| x != e && !d.contains(x));
    let mu = first_out.map_or(0, |x| counts[x] as u64);

    for x in 0..n {
        if x == e {
            continue;
        }
        let c = counts[x] as u64;
        let (expected, side) = if d.contains(x) {
            (lambda, Side::InD)
        } else {
            (mu, Side::OutD)
        };
        if c != expected {
            return Ok(PdsOutcome::Failed(PdsFailure::NotConstant {
                violating_g: x,
                count: c,
                expected,
                side,
            }));
        }
    }

    let degenerate = k == 0 || k == n as u64 - 1;
    Ok(PdsOutcome::Verified(PdsVerification {
        params: PdsParams {
            v: n as u64,
            k,
            lambda,
            mu,
        },
        degenerate,
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevelClass {
    Zero,
    Nonzero,
}

/// The closed-form parameters for level sets of a rank-n form with the
/// given sign. The empty zero level (n = 1, sign = -1) comes back as
/// (v, 0, 0, 0).
pub fn expected_params(n: u32, sign: i32, level: LevelClass) -> PdsParams {
    assert!(n >= 1);
    assert!(sign == 1 || sign == -1);
    let s = sign as i64;
    let v = 4i64.pow(2 * n);
    let p = 4i64.pow(n - 1); // 4^{n-1}
    let q = 4i64.pow(n); // 4^n
    let (k, lambda, mu) = match level {
        LevelClass::Zero => ((p + s) * (q - s), p * p + 3 * p * s - 2, p * p + p * s),
        LevelClass::Nonzero => (p * (q - s), p * p + p * s, p * p - p * s),
    };
    if k == 0 {
        return PdsParams {
            v: v as u64,
            k: 0,
            lambda: 0,
            mu: 0,
        };
    }
    assert!(k > 0 && lambda >= 0 && mu >= 0);
    PdsParams {
        v: v as u64,
        k: k as u64,
        lambda: lambda as u64,
        mu: mu as u64,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Classification {
    /// Latin square type (n^2, r(n-1), n+r^2-3r, r^2-r).
    Ls { n: u64, r: u64 },
    /// Negative Latin square type (n^2, r(n+1), -n+r^2+3r, r^2+r).
    Nls { n: u64, r: u64 },
    /// Both parameterizations match; reported with the LS tag.
    Both { n: u64, r: u64 },
    Neither,
}

impl Classification {
    pub fn is_ls(&self) -> bool {
        matches!(self, Classification::Ls { .. } | Classification::Both { .. })
    }
    pub fn is_nls(&self) -> bool {
        matches!(self, Classification::Nls { .. } | Classification::Both { .. })
    }
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Classification::Ls { n, r } | Classification::Both { n, r } => write!(f, "LS({n},{r})"),
            Classification::Nls { n, r } => write!(f, "NLS({n},{r})"),
            Classification::Neither => write!(f, "NEITHER"),
        }
    }
}

/// Matches parameters against (N^2, r(N-eps), eps N + r^2 - 3 eps r,
/// r^2 - eps r) for eps = +1 and -1.
pub fn classify_ls_nls(p: &PdsParams) -> Classification {
    let n = (p.v as f64).sqrt().round() as u64;
    if n * n != p.v {
        return Classification::Neither;
    }
    let matches_eps = |eps: i64| -> Option<u64> {
        let denom = n as i64 - eps;
        if denom <= 0 || p.k as i64 % denom != 0 {
            return None;
        }
        let r = p.k as i64 / denom;
        let lambda = eps * n as i64 + r * r - 3 * eps * r;
        let mu = r * r - eps * r;
        if lambda == p.lambda as i64 && mu == p.mu as i64 {
            Some(r as u64)
        } else {
            None
        }
    };
    match (matches_eps(1), matches_eps(-1)) {
        (Some(r), None) => Classification::Ls { n, r },
        (None, Some(r)) => Classification::Nls { n, r },
        (Some(r), Some(_)) => Classification::Both { n, r },
        (None, None) => Classification::Neither,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::FormSpec;
    use crate::gf4::GF4;
    use crate::group_table::{DenseGroup, TwistedTable};
    use crate::twisted::GroupContext;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;

    fn level_pds(bits: &str, a: &str, level: char) -> (GroupContext, IndexSet) {
        let ctx = GroupContext::parse(bits).unwrap();
        let f = FormSpec::parse(a).unwrap();
        let d = f.level_set(&ctx, GF4::from_char(level).unwrap()).unwrap();
        (ctx, d)
    }

    fn verify(bits: &str, a: &str, level: char) -> PdsVerification {
        let (ctx, d) = level_pds(bits, a, level);
        verify_pds(&TwistedTable(&ctx), &d, 1)
            .unwrap()
            .verified()
            .expect("should verify")
            .clone()
    }

    #[test]
    fn single_block_parameters() {
        assert_eq!(verify("0", "0", '0').params.as_tuple(), (16, 6, 2, 2));
        assert_eq!(verify("0", "w", '1').params.as_tuple(), (16, 5, 0, 2));
        assert_eq!(verify("1", "0", 'w').params.as_tuple(), (16, 3, 2, 0));
        let empty = verify("1", "w", '0');
        assert_eq!(empty.params.as_tuple(), (16, 0, 0, 0));
        assert!(empty.degenerate);
    }

    #[test]
    fn expected_params_examples() {
        assert_eq!(
            expected_params(2, 1, LevelClass::Zero).as_tuple(),
            (256, 75, 26, 20)
        );
        assert_eq!(
            expected_params(2, -1, LevelClass::Zero).as_tuple(),
            (256, 51, 2, 12)
        );
        assert_eq!(
            expected_params(2, -1, LevelClass::Nonzero).as_tuple(),
            (256, 68, 12, 20)
        );
        assert_eq!(
            expected_params(1, 1, LevelClass::Zero).as_tuple(),
            (16, 6, 2, 2)
        );
        assert_eq!(
            expected_params(1, -1, LevelClass::Nonzero).as_tuple(),
            (16, 5, 0, 2)
        );
        assert_eq!(
            expected_params(1, -1, LevelClass::Zero).as_tuple(),
            (16, 0, 0, 0)
        );
    }

    #[test]
    fn counting_identity_on_verified_sets() {
        for (bits, a, level) in [("0", "0", '0'), ("0", "w", 'W'), ("1", "0", '1')] {
            let ver = verify(bits, a, level);
            assert!(ver.params.counting_identity_holds(), "{:?}", ver.params);
        }
    }

    #[test]
    fn classify_examples() {
        let c = classify_ls_nls(&PdsParams { v: 16, k: 6, lambda: 2, mu: 2 });
        assert_eq!(c, Classification::Ls { n: 4, r: 2 });
        assert_eq!(c.to_string(), "LS(4,2)");
        let c = classify_ls_nls(&PdsParams { v: 16, k: 5, lambda: 0, mu: 2 });
        assert_eq!(c, Classification::Nls { n: 4, r: 1 });
        let c = classify_ls_nls(&PdsParams { v: 256, k: 60, lambda: 20, mu: 12 });
        assert_eq!(c, Classification::Ls { n: 16, r: 4 });
        let c = classify_ls_nls(&PdsParams { v: 256, k: 68, lambda: 12, mu: 20 });
        assert_eq!(c, Classification::Nls { n: 16, r: 4 });
        assert_eq!(
            classify_ls_nls(&PdsParams { v: 15, k: 6, lambda: 2, mu: 2 }),
            Classification::Neither
        );
    }

    #[test]
    fn failure_reports_name_the_first_violation() {
        let ctx = GroupContext::parse("0").unwrap();
        let t = TwistedTable(&ctx);
        // identity inside
        let mut d = IndexSet::new(16);
        d.insert(0);
        d.insert(5);
        match verify_pds(&t, &d, 1).unwrap() {
            PdsOutcome::Failed(PdsFailure::ContainsIdentity) => {}
            other => panic!("unexpected: {other:?}"),
        }
        // a symmetric set that is not a PDS
        let mut d = IndexSet::new(16);
        d.insert(1);
        d.insert(4);
        match verify_pds(&t, &d, 1).unwrap() {
            PdsOutcome::Failed(PdsFailure::NotConstant { .. }) => {}
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn full_complement_is_degenerate() {
        let ctx = GroupContext::parse("0").unwrap();
        let mut d = IndexSet::full(16);
        d.remove(0);
        let out = verify_pds(&TwistedTable(&ctx), &d, 1).unwrap();
        let v = out.verified().unwrap();
        assert!(v.degenerate);
        assert_eq!(v.params.as_tuple(), (16, 15, 14, 0));
    }

    #[test]
    fn invariant_under_relabeling() {
        let ctx = GroupContext::parse("1").unwrap();
        let f = FormSpec::parse("0").unwrap();
        let d = f.level_set(&ctx, GF4::ZERO).unwrap();
        let dense = DenseGroup::from_group(&TwistedTable(&ctx));
        let base = verify_pds(&dense, &d, 1).unwrap().verified().unwrap().clone();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        for _ in 0..10 {
            let mut sigma: Vec<usize> = (0..16).collect();
            sigma.shuffle(&mut rng);
            let relabeled = dense.relabel(&sigma);
            let mut d2 = IndexSet::new(16);
            for x in d.iter() {
                d2.insert(sigma[x]);
            }
            let v = verify_pds(&relabeled, &d2, 1).unwrap().verified().unwrap().clone();
            assert_eq!(v.params, base.params);
        }
    }

    #[test]
    fn threads_agree_with_single_thread() {
        let ctx = GroupContext::parse("00").unwrap();
        let f = FormSpec::parse("00").unwrap();
        let d = f.level_set(&ctx, GF4::ZERO).unwrap();
        let t = TwistedTable(&ctx);
        let c1 = difference_counts(&t, &d, 1);
        let c4 = difference_counts(&t, &d, 4);
        assert_eq!(c1, c4);
    }
}
