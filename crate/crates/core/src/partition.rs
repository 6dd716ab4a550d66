//! Partitions of a finite carrier, congruences, and binary relations.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::ops::Deref;
use core::str::FromStr;

use crate::algebra::{Element, FiniteAlgebra};
use crate::error::{Error, Result};

/// Disjoint-set forest with path halving and union by size.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(len: usize) -> Self {
        UnionFind {
            parent: (0..len).collect(),
            size: vec![1; len],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns `true` if the two classes were distinct.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (big, small) = if self.size[ra] >= self.size[rb] {
            (ra, rb)
        } else {
            (rb, ra)
        };
        self.parent[small] = big;
        self.size[big] += self.size[small];
        true
    }

    pub fn to_partition(&mut self) -> Partition {
        let labels: Vec<usize> = (0..self.parent.len()).map(|x| self.find(x)).collect();
        Partition::canonicalize(&labels)
    }
}

/// A partition of `{0, .., m - 1}` in canonical form: block identifiers are
/// consecutive integers in order of first occurrence.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Partition {
    blocks: Vec<Element>,
    count: usize,
}

impl Partition {
    /// Canonicalizes an arbitrary labelling of the elements.
    pub fn canonicalize<T: PartialEq + Copy>(labels: &[T]) -> Partition {
        let mut seen: Vec<T> = Vec::new();
        let blocks = labels
            .iter()
            .map(|l| match seen.iter().position(|s| s == l) {
                Some(i) => i as Element,
                None => {
                    seen.push(*l);
                    (seen.len() - 1) as Element
                }
            })
            .collect();
        Partition {
            blocks,
            count: seen.len(),
        }
    }

    /// Accepts an already canonical block array and rejects anything else.
    pub fn from_canonical(blocks: Vec<Element>) -> Result<Partition> {
        let p = Partition::canonicalize(&blocks);
        if p.blocks != blocks {
            return Err(Error::Parse {
                position: 0,
                message: String::from("block array is not in canonical form"),
            });
        }
        Ok(p)
    }

    /// Builds a partition from explicit blocks; every element must occur exactly once.
    pub fn from_block_lists(m: usize, lists: &[Vec<Element>]) -> Result<Partition> {
        let mut labels = vec![usize::MAX; m];
        for (b, list) in lists.iter().enumerate() {
            for &x in list {
                let x = x as usize;
                if x >= m {
                    return Err(Error::OutOfBounds(format!("element {} in a carrier of {}", x, m)));
                }
                if labels[x] != usize::MAX {
                    return Err(Error::Parse {
                        position: 0,
                        message: format!("element {} occurs in two blocks", x),
                    });
                }
                labels[x] = b;
            }
        }
        if let Some(x) = labels.iter().position(|&l| l == usize::MAX) {
            return Err(Error::Parse {
                position: 0,
                message: format!("element {} is not covered by any block", x),
            });
        }
        Ok(Partition::canonicalize(&labels))
    }

    pub fn equality(m: usize) -> Partition {
        Partition {
            blocks: (0..m).map(|x| x as Element).collect(),
            count: m,
        }
    }

    pub fn full(m: usize) -> Partition {
        Partition {
            blocks: vec![0; m],
            count: if m == 0 { 0 } else { 1 },
        }
    }

    pub fn size(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_count(&self) -> usize {
        self.count
    }

    pub fn blocks(&self) -> &[Element] {
        &self.blocks
    }

    #[inline]
    pub fn block_of(&self, a: Element) -> Element {
        self.blocks[a as usize]
    }

    #[inline]
    pub fn related(&self, a: Element, b: Element) -> bool {
        self.blocks[a as usize] == self.blocks[b as usize]
    }

    pub fn is_equality(&self) -> bool {
        self.count == self.blocks.len()
    }

    pub fn is_full(&self) -> bool {
        self.count <= 1
    }

    /// Smallest element of every block, indexed by block.
    pub fn representatives(&self) -> Vec<Element> {
        let mut reps = vec![0; self.count];
        let mut seen = 0;
        for (x, &b) in self.blocks.iter().enumerate() {
            if b as usize == seen {
                reps[seen] = x as Element;
                seen += 1;
            }
        }
        reps
    }

    pub fn block_lists(&self) -> Vec<Vec<Element>> {
        let mut lists = vec![Vec::new(); self.count];
        for (x, &b) in self.blocks.iter().enumerate() {
            lists[b as usize].push(x as Element);
        }
        lists
    }

    /// All related pairs `(a, b)`, including the diagonal, in lexicographic order.
    pub fn pairs(&self) -> impl Iterator<Item = (Element, Element)> + '_ {
        let m = self.blocks.len();
        (0..m).flat_map(move |a| {
            (0..m)
                .filter(move |&b| self.blocks[a] == self.blocks[b])
                .map(move |b| (a as Element, b as Element))
        })
    }

    /// Pairs `(x, rep(x))` with `x` not its own block representative; they
    /// generate the partition as an equivalence relation.
    pub fn spanning_pairs(&self) -> Vec<(Element, Element)> {
        let reps = self.representatives();
        (0..self.blocks.len())
            .filter_map(|x| {
                let r = reps[self.blocks[x] as usize];
                (r as usize != x).then_some((x as Element, r))
            })
            .collect()
    }

    pub fn meet(&self, other: &Partition) -> Result<Partition> {
        self.check_same(other)?;
        let labels: Vec<(Element, Element)> = self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(&a, &b)| (a, b))
            .collect();
        Ok(Partition::canonicalize(&labels))
    }

    /// Join as equivalence relations.
    pub fn join(&self, other: &Partition) -> Result<Partition> {
        self.check_same(other)?;
        let mut uf = UnionFind::new(self.size());
        for (x, r) in self.spanning_pairs().into_iter().chain(other.spanning_pairs()) {
            uf.union(x as usize, r as usize);
        }
        Ok(uf.to_partition())
    }

    /// `self ⊆ other` as sets of pairs.
    pub fn le(&self, other: &Partition) -> bool {
        if self.size() != other.size() {
            return false;
        }
        let reps = self.representatives();
        self.blocks
            .iter()
            .enumerate()
            .all(|(x, &b)| other.blocks[x] == other.blocks[reps[b as usize] as usize])
    }

    fn check_same(&self, other: &Partition) -> Result<()> {
        if self.size() != other.size() {
            return Err(Error::CarrierMismatch {
                left: self.size(),
                right: other.size(),
            });
        }
        Ok(())
    }

    /// Canonical lattice order: more blocks first, then lexicographic block array.
    pub fn canonical_cmp(&self, other: &Partition) -> Ordering {
        other
            .count
            .cmp(&self.count)
            .then_with(|| self.blocks.cmp(&other.blocks))
    }
}

impl fmt::Display for Partition {
    /// Block notation, e.g. `0,2|1,3`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, block) in self.block_lists().iter().enumerate() {
            if i > 0 {
                f.write_str("|")?;
            }
            for (j, x) in block.iter().enumerate() {
                if j > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{}", x)?;
            }
        }
        Ok(())
    }
}

impl FromStr for Partition {
    type Err = Error;

    /// Parses block notation; the carrier size is the number of listed elements.
    fn from_str(s: &str) -> Result<Partition> {
        let mut lists = Vec::new();
        let mut total = 0;
        for block in s.trim().split('|') {
            let mut list = Vec::new();
            for tok in block.split(',') {
                let tok = tok.trim();
                let v: u32 = tok.parse().map_err(|_| Error::Parse {
                    position: 0,
                    message: format!("`{}` is not an element", tok),
                })?;
                if v as usize >= crate::algebra::MAX_CARRIER {
                    return Err(Error::OutOfBounds(format!("element {}", v)));
                }
                list.push(v as Element);
            }
            total += list.len();
            lists.push(list);
        }
        Partition::from_block_lists(total, &lists)
    }
}

/// A congruence: a partition compatible with every basic operation.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Congruence(Partition);

impl Deref for Congruence {
    type Target = Partition;
    fn deref(&self) -> &Partition {
        &self.0
    }
}

impl fmt::Display for Congruence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl Congruence {
    /// Checks compatibility of `p` with the operations of `alg`.
    pub fn new(alg: &FiniteAlgebra, p: Partition) -> Result<Congruence> {
        if p.size() != alg.size() {
            return Err(Error::CarrierMismatch {
                left: alg.size(),
                right: p.size(),
            });
        }
        if !is_congruence(alg, &p) {
            return Err(Error::NotACongruence(format!("{}", p)));
        }
        Ok(Congruence(p))
    }

    pub fn equality(m: usize) -> Congruence {
        Congruence(Partition::equality(m))
    }

    pub fn full(m: usize) -> Congruence {
        Congruence(Partition::full(m))
    }

    pub(crate) fn from_partition_unchecked(p: Partition) -> Congruence {
        Congruence(p)
    }

    pub fn partition(&self) -> &Partition {
        &self.0
    }

    pub fn into_partition(self) -> Partition {
        self.0
    }

    pub fn meet(&self, other: &Congruence) -> Result<Congruence> {
        Ok(Congruence(self.0.meet(&other.0)?))
    }

    /// Join of two congruences of the same algebra; the equivalence join of
    /// congruences is again a congruence.
    pub fn join(&self, other: &Congruence) -> Result<Congruence> {
        Ok(Congruence(self.0.join(&other.0)?))
    }

    /// `self / eta` as a congruence of the quotient by `eta`; requires `eta <= self`.
    pub fn quotient_by(&self, eta: &Congruence) -> Result<Congruence> {
        if !eta.le(self) {
            return Err(Error::NotACongruence(format!(
                "{} is not above the quotient congruence {}",
                self, eta
            )));
        }
        let labels: Vec<Element> = eta
            .representatives()
            .iter()
            .map(|&r| self.block_of(r))
            .collect();
        Ok(Congruence(Partition::canonicalize(&labels)))
    }

    /// Preimage under the natural map `A -> A/eta` of a quotient partition.
    pub fn lift(quotient: &Partition, eta: &Congruence) -> Congruence {
        let labels: Vec<Element> = eta
            .blocks()
            .iter()
            .map(|&b| quotient.block_of(b))
            .collect();
        Congruence(Partition::canonicalize(&labels))
    }
}

/// `true` iff `p` is compatible with every operation of `alg`.
///
/// It suffices to check the unary transports of the spanning pairs
/// `(x, rep(x))`: every translation maps a chain of such pairs to a chain.
pub fn is_congruence(alg: &FiniteAlgebra, p: &Partition) -> bool {
    if p.size() != alg.size() {
        return false;
    }
    let pairs = p.spanning_pairs();
    let mut ok = true;
    for_each_transport(alg, &pairs, |u, v| {
        if !p.related(u, v) {
            ok = false;
        }
        ok
    });
    ok
}

/// Calls `f(f(..a..), f(..b..))` for every pair, basic operation, argument
/// position and filling of the other positions; stops when `f` returns false.
pub(crate) fn for_each_transport(
    alg: &FiniteAlgebra,
    pairs: &[(Element, Element)],
    mut f: impl FnMut(Element, Element) -> bool,
) {
    let m = alg.size();
    for &(a, b) in pairs {
        if a == b {
            continue;
        }
        for op in alg.operations() {
            if !transports_of(op, m, a, b, &mut f) {
                return;
            }
        }
    }
}

fn transports_of(
    op: &crate::algebra::OperationTable,
    m: usize,
    a: Element,
    b: Element,
    f: &mut impl FnMut(Element, Element) -> bool,
) -> bool {
    let k = op.arity();
    if k == 0 {
        return true;
    }
    let table = op.table();
    let fills = m.pow(k as u32 - 1);
    for pos in 0..k {
        let stride = m.pow((k - 1 - pos) as u32);
        for fill in 0..fills {
            // split the filling around position `pos`
            let high = fill / stride;
            let low = fill % stride;
            let base = high * stride * m + low;
            let u = table[base + a as usize * stride];
            let v = table[base + b as usize * stride];
            if u != v && !f(u, v) {
                return false;
            }
        }
    }
    true
}

/// The congruence generated by `pairs`.
///
/// Union-find closure: every merged pair is pushed to a worklist and all its
/// unary transports are merged in turn, until no new merges occur.
pub fn cg(alg: &FiniteAlgebra, pairs: &[(Element, Element)]) -> Result<Congruence> {
    let m = alg.size();
    let mut uf = UnionFind::new(m);
    let mut queue = Vec::new();
    for &(a, b) in pairs {
        if a as usize >= m || b as usize >= m {
            return Err(Error::OutOfBounds(format!("pair ({}, {}) in a carrier of {}", a, b, m)));
        }
        if uf.union(a as usize, b as usize) {
            queue.push((a, b));
        }
    }
    while let Some(pair) = queue.pop() {
        for_each_transport(alg, &[pair], |u, v| {
            if uf.union(u as usize, v as usize) {
                queue.push((u, v));
            }
            true
        });
    }
    Ok(Congruence(uf.to_partition()))
}

/// Meet of two congruences: the intersection of the equivalence relations.
pub fn meet(c1: &Congruence, c2: &Congruence) -> Result<Congruence> {
    c1.meet(c2)
}

/// Join of two congruences of `alg`: the congruence generated by the union of
/// their pair sets.
pub fn join(alg: &FiniteAlgebra, c1: &Congruence, c2: &Congruence) -> Result<Congruence> {
    if c1.size() != c2.size() || c1.size() != alg.size() {
        return Err(Error::CarrierMismatch {
            left: c1.size(),
            right: c2.size(),
        });
    }
    let mut pairs = c1.spanning_pairs();
    pairs.extend(c2.spanning_pairs());
    cg(alg, &pairs)
}

/// A binary relation on `{0, .., m - 1}` stored as a bit matrix.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PairSet {
    m: usize,
    bits: Vec<bool>,
}

impl PairSet {
    pub fn empty(m: usize) -> PairSet {
        PairSet {
            m,
            bits: vec![false; m * m],
        }
    }

    pub fn from_pairs(m: usize, pairs: impl IntoIterator<Item = (Element, Element)>) -> PairSet {
        let mut s = PairSet::empty(m);
        for (a, b) in pairs {
            s.insert(a, b);
        }
        s
    }

    pub fn size(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn insert(&mut self, a: Element, b: Element) {
        self.bits[a as usize * self.m + b as usize] = true;
    }

    #[inline]
    pub fn contains(&self, a: Element, b: Element) -> bool {
        self.bits[a as usize * self.m + b as usize]
    }

    pub fn len(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Element, Element)> + '_ {
        let m = self.m;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| ((i / m) as Element, (i % m) as Element))
    }

    pub fn is_subset(&self, other: &PairSet) -> bool {
        self.m == other.m && self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }

    pub fn is_reflexive(&self) -> bool {
        (0..self.m).all(|a| self.bits[a * self.m + a])
    }

    pub fn is_symmetric(&self) -> bool {
        self.iter().all(|(a, b)| self.contains(b, a))
    }

    pub fn is_transitive(&self) -> bool {
        let m = self.m;
        for a in 0..m {
            for b in 0..m {
                if !self.bits[a * m + b] {
                    continue;
                }
                for c in 0..m {
                    if self.bits[b * m + c] && !self.bits[a * m + c] {
                        return false;
                    }
                }
            }
        }
        true
    }

    pub fn is_equivalence(&self) -> bool {
        self.is_reflexive() && self.is_symmetric() && self.is_transitive()
    }

    /// The partition of an equivalence relation.
    pub fn to_partition(&self) -> Result<Partition> {
        if !self.is_equivalence() {
            return Err(Error::NotACongruence(String::from(
                "relation is not an equivalence",
            )));
        }
        let labels: Vec<usize> = (0..self.m)
            .map(|a| (0..self.m).position(|b| self.contains(a as Element, b as Element)).unwrap())
            .collect();
        Ok(Partition::canonicalize(&labels))
    }

    pub fn from_partition(p: &Partition) -> PairSet {
        PairSet::from_pairs(p.size(), p.pairs())
    }
}
