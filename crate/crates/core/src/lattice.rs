//! The congruence lattice of a finite algebra.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec::Vec;

use crate::algebra::{Element, FiniteAlgebra};
use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::partition::{cg, Congruence, Partition};

/// All congruences of an algebra in canonical order (more blocks first, then
/// lexicographic block array), with meet and join tables over indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CongruenceLattice {
    congruences: Vec<Congruence>,
    positions: BTreeMap<Vec<Element>, usize>,
    meet: Vec<usize>,
    join: Vec<usize>,
}

impl CongruenceLattice {
    pub fn len(&self) -> usize {
        self.congruences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.congruences.is_empty()
    }

    pub fn congruences(&self) -> &[Congruence] {
        &self.congruences
    }

    pub fn get(&self, index: usize) -> Result<&Congruence> {
        self.congruences.get(index).ok_or_else(|| {
            Error::OutOfBounds(format!(
                "congruence index {} (lattice has {})",
                index,
                self.congruences.len()
            ))
        })
    }

    pub fn index_of(&self, c: &Partition) -> Option<usize> {
        self.positions.get(c.blocks()).copied()
    }

    /// Index of the equality congruence.
    pub fn bottom(&self) -> usize {
        0
    }

    /// Index of the full congruence.
    pub fn top(&self) -> usize {
        self.congruences.len() - 1
    }

    pub fn meet(&self, i: usize, j: usize) -> usize {
        self.meet[i * self.len() + j]
    }

    pub fn join(&self, i: usize, j: usize) -> usize {
        self.join[i * self.len() + j]
    }

    pub fn le(&self, i: usize, j: usize) -> bool {
        self.meet(i, j) == i
    }

    pub fn meet_all(&self, indices: &[usize]) -> usize {
        indices.iter().fold(self.top(), |acc, &i| self.meet(acc, i))
    }

    pub fn join_all(&self, indices: &[usize]) -> usize {
        indices.iter().fold(self.bottom(), |acc, &i| self.join(acc, i))
    }
}

/// Enumerates `Con(alg)`: all principal congruences `Cg(a, b)`, closed under join.
///
/// The equivalence join of two congruences is again a congruence, so joins
/// after the principal step are plain partition joins.
pub fn con_lattice(alg: &FiniteAlgebra, limits: &Limits) -> Result<CongruenceLattice> {
    let m = alg.size();
    if m > limits.max_lattice_carrier {
        return Err(Error::ResourceLimit {
            what: "congruence lattice carrier",
            reached: m as u64,
            limit: limits.max_lattice_carrier as u64,
        });
    }
    let mut found: Vec<Congruence> = Vec::new();
    let mut seen: BTreeSet<Vec<Element>> = BTreeSet::new();
    let mut push = |c: Congruence, found: &mut Vec<Congruence>| {
        if seen.insert(c.blocks().to_vec()) {
            found.push(c);
        }
    };
    push(Congruence::equality(m), &mut found);
    for a in 0..m {
        for b in a + 1..m {
            push(cg(alg, &[(a as Element, b as Element)])?, &mut found);
        }
    }
    let principal = found.len();
    // every congruence of a finite algebra is a finite join of principal ones
    let mut i = 1;
    while i < found.len() {
        for j in 1..principal {
            let joined = found[i].join(&found[j])?;
            push(joined, &mut found);
        }
        i += 1;
    }
    found.sort_by(|x, y| x.canonical_cmp(y));

    let positions: BTreeMap<Vec<Element>, usize> = found
        .iter()
        .enumerate()
        .map(|(i, c)| (c.blocks().to_vec(), i))
        .collect();
    let position = |c: &Partition| -> Result<usize> {
        positions
            .get(c.blocks())
            .copied()
            .ok_or_else(|| Error::NotACongruence(format!("{} missing from the lattice", c)))
    };
    let n = found.len();
    let mut meet = alloc::vec![0; n * n];
    let mut joins = alloc::vec![0; n * n];
    for i in 0..n {
        for j in i..n {
            let mt = position(&found[i].partition().meet(found[j].partition())?)?;
            let jn = position(&found[i].partition().join(found[j].partition())?)?;
            meet[i * n + j] = mt;
            meet[j * n + i] = mt;
            joins[i * n + j] = jn;
            joins[j * n + i] = jn;
        }
    }
    Ok(CongruenceLattice {
        congruences: found,
        positions,
        meet,
        join: joins,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::OperationTable;
    use crate::partition::is_congruence;
    use alloc::vec;

    fn cyclic_add(n: usize) -> FiniteAlgebra {
        FiniteAlgebra::new(
            "Zn",
            n,
            vec![OperationTable::from_fn("+", 2, n, |a| ((a[0] as usize + a[1] as usize) % n) as Element)],
        )
        .unwrap()
    }

    #[test]
    fn z4_has_three_congruences() {
        let l = con_lattice(&cyclic_add(4), &Limits::default()).unwrap();
        assert_eq!(l.len(), 3);
        assert!(l.get(0).unwrap().is_equality());
        assert_eq!(l.get(1).unwrap().blocks(), &[0, 1, 0, 1]);
        assert!(l.get(2).unwrap().is_full());
        assert!(l.get(3).is_err());
    }

    #[test]
    fn klein_group_has_five() {
        // Z2 x Z2 with coordinatewise addition, elements encoded as 2 bits
        let a = FiniteAlgebra::new("V4", 4, vec![OperationTable::from_fn("+", 2, 4, |a| a[0] ^ a[1])]).unwrap();
        let l = con_lattice(&a, &Limits::default()).unwrap();
        assert_eq!(l.len(), 5);
        // the two factor kernels join to the top
        let k1 = l.index_of(&"0,1|2,3".parse().unwrap()).unwrap();
        let k2 = l.index_of(&"0,2|1,3".parse().unwrap()).unwrap();
        assert_eq!(l.join(k1, k2), l.top());
        assert_eq!(l.meet(k1, k2), l.bottom());
    }

    #[test]
    fn simple_majority_algebra_has_two() {
        let maj = OperationTable::from_fn("maj", 3, 2, |a| {
            if a[0] == a[1] || a[0] == a[2] { a[0] } else { a[1] }
        });
        let a = FiniteAlgebra::new(
            "M2",
            2,
            vec![maj, OperationTable::constant("c0", 0), OperationTable::constant("c1", 1)],
        )
        .unwrap();
        assert_eq!(con_lattice(&a, &Limits::default()).unwrap().len(), 2);
    }

    #[test]
    fn refuses_large_carriers() {
        let limits = Limits {
            max_lattice_carrier: 3,
            ..Limits::default()
        };
        assert!(con_lattice(&cyclic_add(4), &limits).unwrap_err().is_resource_limit());
    }

    #[test]
    fn tables_match_recomputation() {
        let l = con_lattice(&cyclic_add(6), &Limits::default()).unwrap();
        for i in 0..l.len() {
            assert!(is_congruence(&cyclic_add(6), l.get(i).unwrap()));
            for j in 0..l.len() {
                let (x, y) = (l.get(i).unwrap(), l.get(j).unwrap());
                assert_eq!(l.get(l.meet(i, j)).unwrap(), &x.meet(y).unwrap());
                assert_eq!(l.get(l.join(i, j)).unwrap(), &x.join(y).unwrap());
            }
        }
    }
}
