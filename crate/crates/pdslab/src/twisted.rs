//! The twisted 2-groups on (F4 x F4)^n and their subgroups.
//!
//! A context fixes `n >= 1` blocks and one twist bit per block. Block
//! addition is `(x,y) + (x',y') = (x + x', y + y' + eps*(xx')^2)`; the
//! untwisted block is elementary abelian of order 16, the twisted one is
//! homocyclic of exponent 4. Elements are indexed by the base-16 word
//! whose digit for block i is `4*code(x_i) + code(y_i)`, block 1 most
//! significant, which makes membership sets and map tables dense arrays.

use crate::bitset::IndexSet;
use crate::gf4::{GF4, MUL, SQR};
use crate::group_table::{abelian_type_of, AbelianType, TwistedTable};
use crate::{Error, Result, MAX_BLOCKS};

/// `TWIST[x][x'] = (x*x')^2` on codes; the correction term of the law.
const TWIST: [[u8; 4]; 4] = {
    let mut t = [[0u8; 4]; 4];
    let mut x = 0;
    while x < 4 {
        let mut y = 0;
        while y < 4 {
            t[x][y] = SQR[MUL[x][y] as usize];
            y += 1;
        }
        x += 1;
    }
    t
};

/// Block count and twist bits of a group G_e.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupContext {
    twists: Vec<u8>,
    /// Bit offsets of the y-nibble part for each twisted block.
    twisted_shifts: Vec<u32>,
}

impl GroupContext {
    pub fn new(twists: &[u8]) -> Result<GroupContext> {
        if twists.is_empty() || twists.len() > MAX_BLOCKS {
            return Err(Error::BadBlockCount(twists.len()));
        }
        if twists.iter().any(|&t| t > 1) {
            return Err(Error::InvalidLiteral(format!("{twists:?}")));
        }
        let n = twists.len();
        let twisted_shifts = twists
            .iter()
            .enumerate()
            .filter(|(_, &t)| t == 1)
            .map(|(i, _)| (4 * (n - 1 - i)) as u32)
            .collect();
        Ok(GroupContext {
            twists: twists.to_vec(),
            twisted_shifts,
        })
    }

    /// Parses a twist-bit string such as "01".
    pub fn parse(s: &str) -> Result<GroupContext> {
        let twists = s
            .chars()
            .map(|c| match c {
                '0' => Ok(0u8),
                '1' => Ok(1u8),
                _ => Err(Error::InvalidLiteral(s.to_string())),
            })
            .collect::<Result<Vec<_>>>()?;
        GroupContext::new(&twists)
    }

    pub fn block_count(&self) -> usize {
        self.twists.len()
    }

    pub fn twists(&self) -> &[u8] {
        &self.twists
    }

    pub fn twist_weight(&self) -> usize {
        self.twists.iter().filter(|&&t| t == 1).count()
    }

    /// Group order 16^n.
    pub fn order(&self) -> usize {
        1usize << (4 * self.twists.len())
    }

    #[inline]
    fn digit_shift(&self, block: usize) -> u32 {
        (4 * (self.twists.len() - 1 - block)) as u32
    }

    /// Twisted addition on element indices.
    #[inline]
    pub fn add_idx(&self, u: usize, v: usize) -> usize {
        let mut out = u ^ v;
        for &sh in &self.twisted_shifts {
            let xu = (u >> (sh + 2)) & 3;
            let xv = (v >> (sh + 2)) & 3;
            out ^= (TWIST[xu][xv] as usize) << sh;
        }
        out
    }

    /// Twisted negation on element indices: blockwise (x, y + eps*x).
    #[inline]
    pub fn neg_idx(&self, u: usize) -> usize {
        let mut out = u;
        for &sh in &self.twisted_shifts {
            out ^= ((u >> (sh + 2)) & 3) << sh;
        }
        out
    }

    #[inline]
    pub fn sub_idx(&self, u: usize, v: usize) -> usize {
        self.add_idx(u, self.neg_idx(v))
    }

    /// 2g, always computed as g + g.
    #[inline]
    pub fn double_idx(&self, u: usize) -> usize {
        self.add_idx(u, u)
    }

    pub fn element(&self, index: usize) -> Result<TwistedElement> {
        if index >= self.order() {
            return Err(Error::IndexOutOfRange {
                index,
                size: self.order(),
            });
        }
        let blocks = (0..self.block_count())
            .map(|i| {
                let d = (index >> self.digit_shift(i)) & 0xF;
                (GF4::new((d >> 2) as u8), GF4::new((d & 3) as u8))
            })
            .collect();
        Ok(TwistedElement { blocks })
    }

    pub fn index_of(&self, el: &TwistedElement) -> Result<usize> {
        if el.blocks.len() != self.block_count() {
            return Err(Error::DimensionMismatch {
                expected: self.block_count(),
                got: el.blocks.len(),
            });
        }
        let mut idx = 0usize;
        for &(x, y) in &el.blocks {
            idx = (idx << 4) | ((x.code() as usize) << 2) | y.code() as usize;
        }
        Ok(idx)
    }

    pub fn add(&self, u: &TwistedElement, v: &TwistedElement) -> Result<TwistedElement> {
        let (ui, vi) = (self.index_of(u)?, self.index_of(v)?);
        self.element(self.add_idx(ui, vi))
    }

    pub fn neg(&self, u: &TwistedElement) -> Result<TwistedElement> {
        let ui = self.index_of(u)?;
        self.element(self.neg_idx(ui))
    }

    /// Parses an element literal of 2n characters over {0,1,w,W}.
    pub fn parse_element(&self, s: &str) -> Result<usize> {
        let chars: Vec<char> = s.chars().collect();
        if chars.len() != 2 * self.block_count() {
            return Err(Error::InvalidLiteral(s.to_string()));
        }
        let mut idx = 0usize;
        for pair in chars.chunks(2) {
            let x = GF4::from_char(pair[0])?;
            let y = GF4::from_char(pair[1])?;
            idx = (idx << 4) | ((x.code() as usize) << 2) | y.code() as usize;
        }
        Ok(idx)
    }

    pub fn format_element(&self, index: usize) -> String {
        let n = self.block_count();
        let mut s = String::with_capacity(2 * n);
        for i in 0..n {
            let d = (index >> self.digit_shift(i)) & 0xF;
            s.push(GF4::new((d >> 2) as u8).to_char());
            s.push(GF4::new((d & 3) as u8).to_char());
        }
        s
    }

    /// Frobenius-quotient coordinates: the image of an element in
    /// G_e / Phi(G_e) written in the fixed basis ordered by block then
    /// coordinate (x0, x1, then y0, y1 for untwisted blocks), least
    /// significant bit first.
    pub fn frattini_coords(&self, index: usize) -> u32 {
        let mut c = 0u32;
        let mut bit = 0;
        for (i, &t) in self.twists.iter().enumerate() {
            let d = (index >> self.digit_shift(i)) & 0xF;
            let x = (d >> 2) as u32;
            let y = (d & 3) as u32;
            c |= (x & 1) << bit;
            c |= ((x >> 1) & 1) << (bit + 1);
            bit += 2;
            if t == 0 {
                c |= (y & 1) << bit;
                c |= ((y >> 1) & 1) << (bit + 1);
                bit += 2;
            }
        }
        c
    }

    /// Rank of G_e / Phi(G_e): sum of 4 - 2*eps_i over blocks.
    pub fn frattini_quotient_rank(&self) -> u32 {
        self.twists.iter().map(|&t| 4 - 2 * (t as u32)).sum()
    }

    /// All index-2 subgroups, as kernels of the 2^r - 1 nonzero linear
    /// functionals on G_e / Phi(G_e), in increasing functional order.
    pub fn index2_subgroups(&self) -> Vec<Subgroup> {
        let r = self.frattini_quotient_rank();
        (1u32..(1u32 << r))
            .map(|m| self.index2_kernel(m))
            .collect()
    }

    /// Kernel of the functional with coefficient mask `m`.
    pub fn index2_kernel(&self, m: u32) -> Subgroup {
        let mut members = IndexSet::new(self.order());
        for g in 0..self.order() {
            if (self.frattini_coords(g) & m).count_ones() % 2 == 0 {
                members.insert(g);
            }
        }
        Subgroup::from_members_unchecked(self.clone(), members)
    }

    /// Frattini subgroup of the whole group: closure of all doubles.
    pub fn frattini(&self) -> Subgroup {
        let mut dbl = IndexSet::new(self.order());
        for g in 0..self.order() {
            dbl.insert(self.double_idx(g));
        }
        Subgroup::closure_from_set(self.clone(), &dbl)
    }
}

/// An element of G_e in block form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwistedElement {
    pub blocks: Vec<(GF4, GF4)>,
}

impl TwistedElement {
    pub fn zero(n: usize) -> TwistedElement {
        TwistedElement {
            blocks: vec![(GF4::ZERO, GF4::ZERO); n],
        }
    }

    pub fn literal(&self) -> String {
        let mut s = String::with_capacity(2 * self.blocks.len());
        for &(x, y) in &self.blocks {
            s.push(x.to_char());
            s.push(y.to_char());
        }
        s
    }
}

impl std::fmt::Display for TwistedElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.literal())
    }
}

/// A subgroup of G_e held as a dense membership set plus generators.
#[derive(Debug, Clone)]
pub struct Subgroup {
    ctx: GroupContext,
    members: IndexSet,
    gens: Vec<usize>,
}

impl PartialEq for Subgroup {
    fn eq(&self, other: &Self) -> bool {
        self.ctx == other.ctx && self.members == other.members
    }
}
impl Eq for Subgroup {}

impl Subgroup {
    /// Subgroup generated by the given element indices.
    pub fn closure(ctx: GroupContext, gens: &[usize]) -> Subgroup {
        for &g in gens {
            debug_assert!(g < ctx.order());
        }
        let members = crate::group_table::closure(&TwistedTable(&ctx), gens);
        let gens = gens
            .iter()
            .copied()
            .filter(|&g| g != 0)
            .collect::<Vec<_>>();
        Subgroup { ctx, members, gens }
    }

    /// Closure of an arbitrary seed set (its members become candidate
    /// generators in ascending index order).
    pub fn closure_from_set(ctx: GroupContext, seed: &IndexSet) -> Subgroup {
        let gens: Vec<usize> = seed.iter().collect();
        Subgroup::closure(ctx, &gens)
    }

    /// Validates that `members` is closed and contains zero.
    pub fn from_members(ctx: GroupContext, members: IndexSet) -> Result<Subgroup> {
        if !members.contains(0) {
            return Err(Error::NotASubgroup { witness: 0 });
        }
        let regen = Subgroup::closure_from_set(ctx.clone(), &members);
        if regen.members != members {
            let witness = regen
                .members
                .iter()
                .find(|&g| !members.contains(g))
                .unwrap_or(0);
            return Err(Error::NotASubgroup { witness });
        }
        Ok(regen)
    }

    /// Wraps a membership set known to be a subgroup by construction.
    pub(crate) fn from_members_unchecked(ctx: GroupContext, members: IndexSet) -> Subgroup {
        let gens = extract_generators(&ctx, &members);
        Subgroup { ctx, members, gens }
    }

    pub fn trivial(ctx: GroupContext) -> Subgroup {
        Subgroup::closure(ctx, &[])
    }

    pub fn full(ctx: GroupContext) -> Subgroup {
        let order = ctx.order();
        Subgroup {
            ctx,
            members: IndexSet::full(order),
            gens: Vec::new(), // not tracked for the full group
        }
    }

    pub fn context(&self) -> &GroupContext {
        &self.ctx
    }

    pub fn size(&self) -> usize {
        self.members.count()
    }

    pub fn contains(&self, idx: usize) -> bool {
        self.members.contains(idx)
    }

    pub fn members(&self) -> &IndexSet {
        &self.members
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter()
    }

    pub fn generators(&self) -> &[usize] {
        &self.gens
    }

    /// A small generating set extracted greedily (recomputed fresh).
    pub fn small_generators(&self) -> Vec<usize> {
        extract_generators(&self.ctx, &self.members)
    }

    pub fn is_subset_of(&self, other: &Subgroup) -> bool {
        self.members.is_subset(&other.members)
    }

    /// Join with another subgroup of the same context.
    pub fn join(&self, other: &Subgroup) -> Subgroup {
        let mut gens = self.small_generators();
        gens.extend(other.small_generators());
        Subgroup::closure(self.ctx.clone(), &gens)
    }

    /// Frattini subgroup: closure of {2g : g in S}.
    pub fn frattini(&self) -> Subgroup {
        let mut dbl = IndexSet::new(self.ctx.order());
        for g in self.members.iter() {
            dbl.insert(self.ctx.double_idx(g));
        }
        Subgroup::closure_from_set(self.ctx.clone(), &dbl)
    }

    /// Invariant-factor type, via order counting.
    pub fn abelian_type(&self) -> AbelianType {
        let table = TwistedTable(&self.ctx);
        abelian_type_of(&table, &self.members)
    }

    /// Index-2 subgroups of this subgroup, enumerated through linear
    /// functionals on S / Phi(S) with a greedily chosen basis.
    pub fn maximal_subgroups(&self) -> Vec<Subgroup> {
        let (coords, rank) = self.quotient_coords();
        (1u32..(1u32 << rank))
            .map(|m| self.maximal_kernel(&coords, m))
            .collect()
    }

    /// Coordinates of every member in S / Phi(S) plus the quotient rank.
    /// Entry is u32::MAX for non-members.
    pub fn quotient_coords(&self) -> (Vec<u32>, u32) {
        let order = self.ctx.order();
        let mut coords = vec![u32::MAX; order];
        let phi = self.frattini();
        let mut assigned: Vec<usize> = phi.members.iter().collect();
        for &g in &assigned {
            coords[g] = 0;
        }
        let mut rank = 0u32;
        for g in self.members.iter() {
            if coords[g] != u32::MAX {
                continue;
            }
            let bit = 1u32 << rank;
            rank += 1;
            let snapshot_len = assigned.len();
            for i in 0..snapshot_len {
                let y = assigned[i];
                let z = self.ctx.add_idx(y, g);
                debug_assert_eq!(coords[z], u32::MAX);
                coords[z] = coords[y] ^ bit;
                assigned.push(z);
            }
        }
        debug_assert_eq!(assigned.len(), self.size());
        (coords, rank)
    }

    pub fn maximal_kernel(&self, coords: &[u32], m: u32) -> Subgroup {
        let mut members = IndexSet::new(self.ctx.order());
        for g in self.members.iter() {
            if (coords[g] & m).count_ones() % 2 == 0 {
                members.insert(g);
            }
        }
        Subgroup::from_members_unchecked(self.ctx.clone(), members)
    }
}

/// Greedy small generating set for a closed membership set.
fn extract_generators(ctx: &GroupContext, members: &IndexSet) -> Vec<usize> {
    crate::group_table::subgroup_generators(&TwistedTable(ctx), members)
}
