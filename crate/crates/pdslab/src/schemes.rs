//! Symmetric association schemes from form level sets: class partitions,
//! intersection numbers by convolution counting, fusion enumeration for
//! the amorphy check, and scheme automorphisms.

use crate::bitset::IndexSet;
use crate::endo::EndoMap;
use crate::forms::FormSpec;
use crate::gf4::GF4;
use crate::group_table::FiniteGroup;
use crate::pds::{classify_ls_nls, verify_pds, PdsOutcome};
use crate::twisted::GroupContext;
use crate::{Error, Result};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeVariant {
    Four,
    Three,
}

impl SchemeVariant {
    pub fn parse(v: u32) -> Result<SchemeVariant> {
        match v {
            4 => Ok(SchemeVariant::Four),
            3 => Ok(SchemeVariant::Three),
            _ => Err(Error::InvalidLiteral(format!("variant {v}"))),
        }
    }
}

/// A partition of G \ {identity} into inverse-closed classes. Class 0 is
/// the implicit identity class; the stored classes are numbered from 1.
#[derive(Debug, Clone)]
pub struct SchemePartition {
    pub size: usize,
    pub identity: usize,
    pub classes: Vec<IndexSet>,
}

impl SchemePartition {
    /// Which class an element belongs to: 0 for the identity, 1.. for the
    /// stored classes. Panics if the partition does not cover the group.
    pub fn class_map(&self) -> Vec<u8> {
        let mut map = vec![u8::MAX; self.size];
        map[self.identity] = 0;
        for (i, c) in self.classes.iter().enumerate() {
            for g in c.iter() {
                debug_assert_eq!(map[g], u8::MAX);
                map[g] = (i + 1) as u8;
            }
        }
        assert!(map.iter().all(|&c| c != u8::MAX), "partition must cover G");
        map
    }

    pub fn class_sizes(&self) -> Vec<usize> {
        self.classes.iter().map(|c| c.count()).collect()
    }
}

/// The level-set partition of a form over G_e: four classes
/// (zero level minus the origin, then levels 1, w, w+1), or three with
/// the last two merged.
pub fn build_scheme(
    ctx: &GroupContext,
    form: &FormSpec,
    variant: SchemeVariant,
) -> Result<SchemePartition> {
    let zero = form.level_set(ctx, GF4::ZERO)?;
    let one = form.level_set(ctx, GF4::ONE)?;
    let w = form.level_set(ctx, GF4::OMEGA)?;
    let w1 = form.level_set(ctx, GF4::OMEGA1)?;
    let classes = match variant {
        SchemeVariant::Four => vec![zero, one, w, w1],
        SchemeVariant::Three => {
            let mut merged = w;
            merged.union_with(&w1);
            vec![zero, one, merged]
        }
    };
    for (i, c) in classes.iter().enumerate() {
        if c.is_empty() {
            return Err(Error::EmptySchemeClass { class: i + 1 });
        }
    }
    Ok(SchemePartition {
        size: ctx.order(),
        identity: 0,
        classes,
    })
}

/// Structural validation: disjoint inverse-closed classes covering
/// everything but the identity.
pub fn validate_partition<G: FiniteGroup>(g: &G, s: &SchemePartition) -> Result<()> {
    if s.size != g.size() || s.identity != g.identity() {
        return Err(Error::InvalidScheme("partition/group mismatch".into()));
    }
    let mut seen = IndexSet::new(s.size);
    seen.insert(s.identity);
    for (i, c) in s.classes.iter().enumerate() {
        if c.is_empty() {
            return Err(Error::EmptySchemeClass { class: i + 1 });
        }
        for x in c.iter() {
            if !seen.insert(x) {
                return Err(Error::InvalidScheme(format!(
                    "element {x} appears twice (class {})",
                    i + 1
                )));
            }
            if !c.contains(g.inv(x)) {
                return Err(Error::InvalidScheme(format!(
                    "class {} not inverse-closed at {x}",
                    i + 1
                )));
            }
        }
    }
    if seen.count() != s.size {
        return Err(Error::InvalidScheme("classes do not cover the group".into()));
    }
    Ok(())
}

/// p[i][j][k] over class indices 0..=m, identity class included.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntersectionNumbers {
    pub m: usize,
    p: Vec<u64>,
}

impl IntersectionNumbers {
    pub fn get(&self, i: usize, j: usize, k: usize) -> u64 {
        let d = self.m + 1;
        self.p[(i * d + j) * d + k]
    }
}

/// First witness that a pair of classes fails to convolve constantly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SchemeWitness {
    pub i: usize,
    pub j: usize,
    pub g1: usize,
    pub g2: usize,
    pub count1: u64,
    pub count2: u64,
}

#[derive(Debug, Clone)]
pub enum SchemeCheck {
    Scheme(IntersectionNumbers),
    NotScheme(SchemeWitness),
}

impl SchemeCheck {
    pub fn numbers(&self) -> Option<&IntersectionNumbers> {
        match self {
            SchemeCheck::Scheme(p) => Some(p),
            SchemeCheck::NotScheme(_) => None,
        }
    }
}

/// Counts c_{i,j}(g) = |{(u,v) in D_i x D_j : uv = g}| for every pair of
/// classes and demands constancy on every class.
pub fn intersection_numbers<G: FiniteGroup>(g: &G, s: &SchemePartition) -> Result<SchemeCheck> {
    validate_partition(g, s)?;
    let m = s.classes.len();
    let d = m + 1;
    let mut p = vec![0u64; d * d * d];
    let class_map = s.class_map();
    let mut id_class = IndexSet::new(s.size);
    id_class.insert(s.identity);
    let class_sets: Vec<&IndexSet> = std::iter::once(&id_class).chain(s.classes.iter()).collect();
    let mut counts = vec![0u32; s.size];
    for i in 0..d {
        for j in 0..d {
            counts.iter_mut().for_each(|c| *c = 0);
            for u in class_sets[i].iter() {
                for v in class_sets[j].iter() {
                    counts[g.mul(u, v)] += 1;
                }
            }
            for (k, set) in class_sets.iter().enumerate() {
                let first = set.first().expect("classes are nonempty");
                let value = counts[first] as u64;
                for x in set.iter() {
                    if counts[x] as u64 != value {
                        return Ok(SchemeCheck::NotScheme(SchemeWitness {
                            i,
                            j,
                            g1: first,
                            g2: x,
                            count1: value,
                            count2: counts[x] as u64,
                        }));
                    }
                }
                p[(i * d + j) * d + k] = value;
            }
            let _ = class_map; // retained for symmetry with callers
        }
    }
    Ok(SchemeCheck::Scheme(IntersectionNumbers { m, p }))
}

/// All set partitions of {1..m} as restricted-growth strings, in
/// lexicographic order. Bell(3) = 5, Bell(4) = 15.
pub fn set_partitions(m: usize) -> Vec<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    let mut rgs = vec![0usize; m];
    loop {
        let blocks = rgs.iter().copied().max().map_or(0, |mx| mx + 1);
        let mut partition = vec![Vec::new(); blocks];
        for (i, &b) in rgs.iter().enumerate() {
            partition[b].push(i + 1); // classes are 1-based
        }
        out.push(partition);
        // next RGS in lex order
        let mut i = m;
        loop {
            if i == 1 {
                return out;
            }
            i -= 1;
            let cap = rgs[..i].iter().copied().max().unwrap_or(0) + 1;
            if rgs[i] < cap {
                rgs[i] += 1;
                for r in rgs.iter_mut().skip(i + 1) {
                    *r = 0;
                }
                break;
            }
        }
    }
}

/// Merges classes along a partition of the class indices (1-based).
pub fn fuse(s: &SchemePartition, blocks: &[Vec<usize>]) -> SchemePartition {
    let classes = blocks
        .iter()
        .map(|blk| {
            let mut set = IndexSet::new(s.size);
            for &ci in blk {
                set.union_with(&s.classes[ci - 1]);
            }
            set
        })
        .collect();
    SchemePartition {
        size: s.size,
        identity: s.identity,
        classes,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FusionVerdict {
    pub partition: Vec<Vec<usize>>,
    pub scheme: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct AmorphicReport {
    pub amorphic: bool,
    pub fusions: Vec<FusionVerdict>,
    pub class_types: Vec<String>,
    /// "LS" or "NLS" when every class classifies uniformly.
    pub uniform_type: Option<String>,
    /// Fused tensors equal block sums of the base tensor, on every
    /// passing fusion.
    pub fusion_sums_consistent: bool,
}

/// Enumerates every fusion of the classes and re-runs the intersection
/// number check on each; amorphic iff all pass. The cross-check records
/// the LS/NLS classification of each single class.
pub fn is_amorphic<G: FiniteGroup + Sync>(g: &G, s: &SchemePartition) -> Result<AmorphicReport> {
    let base = intersection_numbers(g, s)?;
    let base_numbers = base.numbers();
    let m = s.classes.len();
    let mut fusions = Vec::new();
    let mut all_pass = base_numbers.is_some();
    let mut sums_consistent = true;
    for partition in set_partitions(m) {
        let fused = fuse(s, &partition);
        let check = intersection_numbers(g, &fused)?;
        let pass = match (&check, base_numbers) {
            (SchemeCheck::Scheme(fp), Some(bp)) => {
                sums_consistent &= fusion_sums_match(bp, fp, &partition);
                true
            }
            (SchemeCheck::Scheme(_), None) => true,
            (SchemeCheck::NotScheme(_), _) => false,
        };
        all_pass &= pass;
        fusions.push(FusionVerdict {
            partition,
            scheme: pass,
        });
    }
    let mut class_types = Vec::new();
    let mut all_ls = true;
    let mut all_nls = true;
    for c in &s.classes {
        let ty = match verify_pds(g, c, 1)? {
            PdsOutcome::Verified(v) => {
                let cl = classify_ls_nls(&v.params);
                all_ls &= cl.is_ls();
                all_nls &= cl.is_nls();
                cl.to_string()
            }
            PdsOutcome::Failed(_) => {
                all_ls = false;
                all_nls = false;
                "NOT_PDS".to_string()
            }
        };
        class_types.push(ty);
    }
    let uniform_type = if all_ls {
        Some("LS".to_string())
    } else if all_nls {
        Some("NLS".to_string())
    } else {
        None
    };
    Ok(AmorphicReport {
        amorphic: all_pass,
        fusions,
        class_types,
        uniform_type,
        fusion_sums_consistent: sums_consistent,
    })
}

/// Fused p'[I][J][K] must equal sum over i in I, j in J of p[i][j][k],
/// for any representative k of K.
fn fusion_sums_match(
    base: &IntersectionNumbers,
    fused: &IntersectionNumbers,
    partition: &[Vec<usize>],
) -> bool {
    // fused index 0 is the identity class; block t is fused index t+1
    let block_of = |fi: usize| -> Vec<usize> {
        if fi == 0 {
            vec![0]
        } else {
            partition[fi - 1].clone()
        }
    };
    for fi in 0..=fused.m {
        for fj in 0..=fused.m {
            for fk in 0..=fused.m {
                let expected = fused.get(fi, fj, fk);
                let (bi, bj) = (block_of(fi), block_of(fj));
                for &k in &block_of(fk) {
                    let mut sum = 0u64;
                    for &i in &bi {
                        for &j in &bj {
                            sum += base.get(i, j, k);
                        }
                    }
                    if sum != expected {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// A bijection of the point set is a scheme automorphism iff it maps
/// every class onto itself.
pub fn is_scheme_automorphism(phi: &EndoMap, s: &SchemePartition) -> bool {
    if phi.context().order() != s.size || !phi.is_automorphism() {
        return false;
    }
    s.classes
        .iter()
        .all(|c| c.iter().all(|x| c.contains(phi.apply(x))))
}
