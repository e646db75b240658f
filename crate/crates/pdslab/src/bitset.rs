//! Dense bit set over element indices.
//!
//! Every brute-force loop in this crate tests membership against one of
//! these; a group of order 65536 costs 8 KiB.

#[derive(Clone, PartialEq, Eq)]
pub struct IndexSet {
    words: Vec<u64>,
    len: usize,
    count: usize,
}

impl IndexSet {
    pub fn new(len: usize) -> Self {
        IndexSet {
            words: vec![0; len.div_ceil(64)],
            len,
            count: 0,
        }
    }

    pub fn full(len: usize) -> Self {
        let mut s = IndexSet::new(len);
        for w in &mut s.words {
            *w = !0;
        }
        if len % 64 != 0 {
            let last = s.words.len() - 1;
            s.words[last] = (1u64 << (len % 64)) - 1;
        }
        s.count = len;
        s
    }

    pub fn from_indices(len: usize, indices: &[usize]) -> Self {
        let mut s = IndexSet::new(len);
        for &i in indices {
            s.insert(i);
        }
        s
    }

    /// Universe size, not the population count.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    /// Number of members.
    pub fn count(&self) -> usize {
        self.count
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.words[i >> 6] & (1u64 << (i & 63)) != 0
    }

    /// Returns true if `i` was newly inserted.
    #[inline]
    pub fn insert(&mut self, i: usize) -> bool {
        debug_assert!(i < self.len);
        let w = &mut self.words[i >> 6];
        let bit = 1u64 << (i & 63);
        if *w & bit != 0 {
            return false;
        }
        *w |= bit;
        self.count += 1;
        true
    }

    pub fn remove(&mut self, i: usize) -> bool {
        let w = &mut self.words[i >> 6];
        let bit = 1u64 << (i & 63);
        if *w & bit == 0 {
            return false;
        }
        *w &= !bit;
        self.count -= 1;
        true
    }

    pub fn first(&self) -> Option<usize> {
        self.iter().next()
    }

    pub fn iter(&self) -> Iter<'_> {
        Iter {
            set: self,
            word_idx: 0,
            current: self.words.first().copied().unwrap_or(0),
        }
    }

    pub fn is_subset(&self, other: &IndexSet) -> bool {
        assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }

    pub fn union_with(&mut self, other: &IndexSet) {
        assert_eq!(self.len, other.len);
        let mut count = 0;
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
            count += a.count_ones() as usize;
        }
        self.count = count;
    }

    pub fn intersection_count(&self, other: &IndexSet) -> usize {
        assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }
}

pub struct Iter<'a> {
    set: &'a IndexSet,
    word_idx: usize,
    current: u64,
}

impl Iterator for Iter<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        while self.current == 0 {
            self.word_idx += 1;
            if self.word_idx >= self.set.words.len() {
                return None;
            }
            self.current = self.set.words[self.word_idx];
        }
        let bit = self.current.trailing_zeros() as usize;
        self.current &= self.current - 1;
        Some((self.word_idx << 6) | bit)
    }
}

impl std::fmt::Debug for IndexSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "IndexSet({}/{}; ", self.count, self.len)?;
        let mut shown = 0;
        for i in self.iter() {
            if shown > 0 {
                write!(f, ",")?;
            }
            if shown == 16 {
                write!(f, "..")?;
                break;
            }
            write!(f, "{i}")?;
            shown += 1;
        }
        write!(f, ")")
    }
}
