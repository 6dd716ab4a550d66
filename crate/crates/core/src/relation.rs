//! Finite sets of fixed-arity tuples over a carrier.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::hash::BuildHasher;

use hashbrown::{DefaultHashBuilder, HashTable};

use crate::algebra::Element;
use crate::error::{Error, Result};

/// Carrier powers up to this many points get a dense membership bitset.
pub const DENSE_LIMIT: u64 = 1 << 25;

#[derive(Clone)]
enum Index {
    Dense(Vec<u64>),
    Hashed {
        table: HashTable<u32>,
        state: DefaultHashBuilder,
    },
}

/// A set of `arity`-tuples over `{0, .., m - 1}` kept in insertion order.
///
/// Tuples are stored back to back in one buffer; membership goes through a
/// bitset over `A^arity` when that is small, and a hash table otherwise.
#[derive(Clone)]
pub struct TupleRelation {
    m: usize,
    arity: usize,
    data: Vec<Element>,
    index: Index,
}

impl TupleRelation {
    pub fn new(m: usize, arity: usize) -> Result<Self> {
        if arity == 0 {
            return Err(Error::OutOfBounds(String::from("relations need arity at least 1")));
        }
        if m == 0 || m > crate::algebra::MAX_CARRIER {
            return Err(Error::OutOfBounds(format!("carrier size {}", m)));
        }
        let points = (m as u64).checked_pow(arity as u32).filter(|&p| p <= DENSE_LIMIT);
        let index = match points {
            Some(p) => Index::Dense(vec![0; (p as usize).div_ceil(64)]),
            None => Index::Hashed {
                table: HashTable::new(),
                state: DefaultHashBuilder::default(),
            },
        };
        Ok(TupleRelation {
            m,
            arity,
            data: Vec::new(),
            index,
        })
    }

    pub fn from_tuples<T: AsRef<[Element]>>(
        m: usize,
        arity: usize,
        tuples: impl IntoIterator<Item = T>,
    ) -> Result<Self> {
        let mut r = TupleRelation::new(m, arity)?;
        for t in tuples {
            r.check(t.as_ref())?;
            r.insert(t.as_ref());
        }
        Ok(r)
    }

    /// All of `A^arity` in lexicographic order.
    pub fn full(m: usize, arity: usize) -> Result<Self> {
        let mut r = TupleRelation::new(m, arity)?;
        let mut t = vec![0 as Element; arity];
        loop {
            r.insert(&t);
            if !odometer(&mut t, m) {
                return Ok(r);
            }
        }
    }

    pub fn carrier_size(&self) -> usize {
        self.m
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.arity
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.index, Index::Dense(_))
    }

    /// The `i`-th tuple in insertion order.
    #[inline]
    pub fn get(&self, i: usize) -> &[Element] {
        &self.data[i * self.arity..(i + 1) * self.arity]
    }

    pub fn iter(&self) -> core::slice::ChunksExact<'_, Element> {
        self.data.chunks_exact(self.arity)
    }

    /// The tuples back to back.
    pub fn as_flat(&self) -> &[Element] {
        &self.data
    }

    fn check(&self, t: &[Element]) -> Result<()> {
        if t.len() != self.arity {
            return Err(Error::OutOfBounds(format!(
                "tuple of length {} in a relation of arity {}",
                t.len(),
                self.arity
            )));
        }
        if let Some(&a) = t.iter().find(|&&a| a as usize >= self.m) {
            return Err(Error::OutOfBounds(format!("element {} in a carrier of {}", a, self.m)));
        }
        Ok(())
    }

    #[inline]
    fn rank(&self, t: &[Element]) -> usize {
        t.iter().fold(0usize, |acc, &a| acc * self.m + a as usize)
    }

    /// Membership test; tuples of the wrong length are never members.
    #[inline]
    pub fn contains(&self, t: &[Element]) -> bool {
        if t.len() != self.arity {
            return false;
        }
        match &self.index {
            Index::Dense(bits) => {
                if t.iter().any(|&a| a as usize >= self.m) {
                    return false;
                }
                let r = self.rank(t);
                bits[r >> 6] & (1 << (r & 63)) != 0
            }
            Index::Hashed { table, state } => {
                let h = state.hash_one(t);
                let (data, arity) = (&self.data, self.arity);
                table
                    .find(h, |&i| &data[i as usize * arity..(i as usize + 1) * arity] == t)
                    .is_some()
            }
        }
    }

    /// Adds `t`; returns `false` if it was already present.
    ///
    /// Panics if `t` has the wrong length or entries outside the carrier.
    #[inline]
    pub fn insert(&mut self, t: &[Element]) -> bool {
        assert_eq!(t.len(), self.arity, "tuple length does not match the arity");
        let next = self.len() as u32;
        match &mut self.index {
            Index::Dense(bits) => {
                assert!(t.iter().all(|&a| (a as usize) < self.m), "element outside the carrier");
                let r = t.iter().fold(0usize, |acc, &a| acc * self.m + a as usize);
                let (w, b) = (r >> 6, 1u64 << (r & 63));
                if bits[w] & b != 0 {
                    return false;
                }
                bits[w] |= b;
            }
            Index::Hashed { table, state } => {
                assert!(t.iter().all(|&a| (a as usize) < self.m), "element outside the carrier");
                let h = state.hash_one(t);
                let (data, arity) = (&self.data, self.arity);
                let slot = |i: u32| &data[i as usize * arity..(i as usize + 1) * arity];
                if table.find(h, |&i| slot(i) == t).is_some() {
                    return false;
                }
                table.insert_unique(h, next, |&i| state.hash_one(slot(i)));
            }
        }
        self.data.extend_from_slice(t);
        true
    }

    pub fn is_subset_of(&self, other: &TupleRelation) -> bool {
        self.arity == other.arity && self.m == other.m && self.iter().all(|t| other.contains(t))
    }

    /// Tuples in lexicographic order, for reproducible output.
    pub fn sorted_tuples(&self) -> Vec<Vec<Element>> {
        let mut v: Vec<Vec<Element>> = self.iter().map(|t| t.to_vec()).collect();
        v.sort_unstable();
        v
    }

    /// Switches to hashed membership when the bitset would dwarf the tuples.
    pub fn compact(&mut self) {
        if let Index::Dense(bits) = &self.index {
            if bits.len() > self.data.len().max(64) {
                self.rehash();
            }
        }
    }

    pub(crate) fn rehash(&mut self) {
        let mut table = HashTable::with_capacity(self.len());
        let state = DefaultHashBuilder::default();
        let (data, arity) = (&self.data, self.arity);
        let slot = |i: u32| &data[i as usize * arity..(i as usize + 1) * arity];
        for i in 0..self.len() as u32 {
            table.insert_unique(state.hash_one(slot(i)), i, |&j| state.hash_one(slot(j)));
        }
        self.index = Index::Hashed { table, state };
    }
}

/// Advances `t` to the next tuple of `A^len` in lexicographic order; returns
/// `false` after the last one.
pub fn odometer(t: &mut [Element], m: usize) -> bool {
    for slot in t.iter_mut().rev() {
        if (*slot as usize) + 1 < m {
            *slot += 1;
            return true;
        }
        *slot = 0;
    }
    false
}

impl PartialEq for TupleRelation {
    /// Set equality, independent of insertion order and index kind.
    fn eq(&self, other: &Self) -> bool {
        self.m == other.m && self.len() == other.len() && self.is_subset_of(other)
    }
}

impl Eq for TupleRelation {}

impl fmt::Debug for TupleRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = f.debug_set();
        for t in self.iter().take(16) {
            s.entry(&t);
        }
        if self.len() > 16 {
            s.entry(&format_args!("... {} tuples", self.len()));
        }
        s.finish()
    }
}
