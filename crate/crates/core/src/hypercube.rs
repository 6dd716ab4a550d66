//! Tuples indexed by the vertices of a hypercube.
//!
//! A `2^n`-tuple has its coordinate `k` at the vertex whose `i`-th binary
//! digit (counting from the right, starting at 0) is `bit(k, i)`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::hash::Hash;

use hashbrown::HashMap;

use crate::algebra::Element;
use crate::error::{Error, Result};
use crate::partition::PairSet;
use crate::relation::TupleRelation;

/// The `i`-th binary digit of `k`.
#[inline]
pub fn bit(k: usize, i: usize) -> usize {
    (k >> i) & 1
}

/// Bitwise sum modulo 2.
#[inline]
pub fn xor(k: usize, l: usize) -> usize {
    k ^ l
}

/// Bitwise product.
#[inline]
pub fn band(k: usize, l: usize) -> usize {
    k & l
}

/// Largest supported dimension; `2^n` coordinates must stay addressable.
pub const MAX_DIMENSION: usize = 16;

fn check_dimension(n: usize) -> Result<()> {
    if n > MAX_DIMENSION {
        return Err(Error::OutOfBounds(format!("dimension {} above {}", n, MAX_DIMENSION)));
    }
    Ok(())
}

fn check_direction(i: usize, n: usize) -> Result<()> {
    check_dimension(n)?;
    if i >= n {
        return Err(Error::OutOfBounds(format!("direction {} in dimension {}", i, n)));
    }
    Ok(())
}

/// A map `e: {0..source} -> {0..target}`; reindexing a `target`-tuple `a`
/// by `e` gives the `source`-tuple `(a[e(0)], .., a[e(source - 1)])`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexMap {
    target: usize,
    map: Vec<usize>,
}

impl IndexMap {
    pub fn new(target: usize, map: Vec<usize>) -> Result<IndexMap> {
        if let Some(&j) = map.iter().find(|&&j| j >= target) {
            return Err(Error::OutOfBounds(format!("index {} into arity {}", j, target)));
        }
        Ok(IndexMap { target, map })
    }

    pub fn identity(n: usize) -> IndexMap {
        IndexMap {
            target: n,
            map: (0..n).collect(),
        }
    }

    /// `k -> bit(k, i)` from `2^n` to `2`; reindexing a pair `(a, b)` by it
    /// gives the generator tuple in direction `i`.
    pub fn digit(i: usize, n: usize) -> Result<IndexMap> {
        check_direction(i, n)?;
        Ok(IndexMap {
            target: 2,
            map: (0..1usize << n).map(|k| bit(k, i)).collect(),
        })
    }

    /// `k -> k xor 2^i` on `2^n`.
    pub fn flip(i: usize, n: usize) -> Result<IndexMap> {
        check_direction(i, n)?;
        Ok(IndexMap {
            target: 1 << n,
            map: (0..1usize << n).map(|k| xor(k, 1 << i)).collect(),
        })
    }

    pub fn source(&self) -> usize {
        self.map.len()
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn apply(&self, t: &[Element]) -> Vec<Element> {
        self.map.iter().map(|&j| t[j]).collect()
    }
}

/// `{ a^e | a in R }`.
pub fn reindex(r: &TupleRelation, e: &IndexMap) -> Result<TupleRelation> {
    if e.target != r.arity() {
        return Err(Error::OutOfBounds(format!(
            "index map into arity {} applied to a relation of arity {}",
            e.target,
            r.arity()
        )));
    }
    TupleRelation::from_tuples(r.carrier_size(), e.source(), r.iter().map(|t| e.apply(t)))
}

/// The tuple with `a` at every vertex whose `i`-th digit is 0 and `b` elsewhere.
pub fn generator_tuple(i: usize, n: usize, a: Element, b: Element) -> Result<Vec<Element>> {
    check_direction(i, n)?;
    Ok((0..1usize << n).map(|k| if bit(k, i) == 0 { a } else { b }).collect())
}

/// A relation of arity `2^dim`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CubeRelation {
    dim: usize,
    relation: TupleRelation,
}

impl CubeRelation {
    pub fn new(dim: usize, relation: TupleRelation) -> Result<CubeRelation> {
        check_dimension(dim)?;
        if relation.arity() != 1 << dim {
            return Err(Error::OutOfBounds(format!(
                "relation of arity {} is not a cube of dimension {}",
                relation.arity(),
                dim
            )));
        }
        Ok(CubeRelation { dim, relation })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn relation(&self) -> &TupleRelation {
        &self.relation
    }

    pub fn into_relation(self) -> TupleRelation {
        self.relation
    }

    pub fn len(&self) -> usize {
        self.relation.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relation.is_empty()
    }

    pub fn contains(&self, t: &[Element]) -> bool {
        self.relation.contains(t)
    }
}

/// Coordinates `k` with `bit(k, i) == d`, increasing.
pub fn face_coordinates(i: usize, n: usize, d: usize) -> Vec<usize> {
    (0..1usize << n).filter(|&k| bit(k, i) == d).collect()
}

/// Restriction of every tuple to the face `bit(k, i) == d`.
pub fn face_projection(r: &CubeRelation, i: usize, d: usize) -> Result<CubeRelation> {
    check_direction(i, r.dim)?;
    if d > 1 {
        return Err(Error::OutOfBounds(format!("face side {} is not 0 or 1", d)));
    }
    let e = IndexMap::new(1 << r.dim, face_coordinates(i, r.dim, d))?;
    CubeRelation::new(r.dim - 1, reindex(&r.relation, &e)?)
}

/// The relation mirrored across direction `i`.
pub fn flip(r: &CubeRelation, i: usize) -> Result<CubeRelation> {
    let e = IndexMap::flip(i, r.dim)?;
    CubeRelation::new(r.dim, reindex(&r.relation, &e)?)
}

/// Pairs `(c_i, d_i)` over all `c, d` in `R` that agree off coordinate `i`.
pub fn forks(r: &TupleRelation, i: usize) -> Result<PairSet> {
    if i >= r.arity() {
        return Err(Error::OutOfBounds(format!("coordinate {} of arity {}", i, r.arity())));
    }
    let m = r.carrier_size();
    let fits = (m as u128).checked_pow(r.arity() as u32 - 1).is_some();
    let masks = if fits {
        column_masks(r, i, |t| {
            t.iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .fold(0u128, |acc, (_, &a)| acc * m as u128 + a as u128)
        })
    } else {
        column_masks(r, i, |t| {
            let mut key = t.to_vec();
            key.remove(i);
            key
        })
    };
    let mut out = PairSet::empty(m);
    for t in r.iter() {
        out.insert(t[i], t[i]);
    }
    for mask in masks {
        let members: Vec<Element> = (0..m).filter(|&a| mask[a >> 6] >> (a & 63) & 1 == 1).map(|a| a as Element).collect();
        for &a in &members {
            for &b in &members {
                out.insert(a, b);
            }
        }
    }
    Ok(out)
}

/// Distinct sets of at least two values seen at coordinate `i` within groups
/// of tuples sharing a key.
fn column_masks<K: Hash + Eq>(r: &TupleRelation, i: usize, key: impl Fn(&[Element]) -> K) -> Vec<[u64; 4]> {
    let mut groups: HashMap<K, [u64; 4]> = HashMap::new();
    for t in r.iter() {
        let a = t[i] as usize;
        groups.entry(key(t)).or_insert([0; 4])[a >> 6] |= 1 << (a & 63);
    }
    let mut masks: Vec<[u64; 4]> = groups.into_values().filter(|m| m.iter().map(|w| w.count_ones()).sum::<u32>() > 1).collect();
    masks.sort_unstable();
    masks.dedup();
    masks
}

/// `{ (face_0(a), face_1(a)) | a in R }` for direction `i`, each pair stored
/// as the concatenated `2^n`-tuple `face_0(a) ++ face_1(a)`.
pub fn paired_faces(r: &CubeRelation, i: usize) -> Result<TupleRelation> {
    check_direction(i, r.dim)?;
    let mut coords = face_coordinates(i, r.dim, 0);
    coords.extend(face_coordinates(i, r.dim, 1));
    reindex(&r.relation, &IndexMap::new(1 << r.dim, coords)?)
}

/// Puts a pair of faces back into cube order.
pub fn join_faces(i: usize, n: usize, lower: &[Element], upper: &[Element]) -> Result<Vec<Element>> {
    check_direction(i, n)?;
    let half = 1usize << (n - 1);
    if lower.len() != half || upper.len() != half {
        return Err(Error::OutOfBounds(format!("faces must have length {}", half)));
    }
    let mut out = vec![0; 1 << n];
    let (mut lo, mut hi) = (0, 0);
    for (k, slot) in out.iter_mut().enumerate() {
        if bit(k, i) == 0 {
            *slot = lower[lo];
            lo += 1;
        } else {
            *slot = upper[hi];
            hi += 1;
        }
    }
    Ok(out)
}
