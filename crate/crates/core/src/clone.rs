//! Polymorphisms of Δ at bounded arity and the largest clone keeping the
//! higher commutators.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::algebra::{Element, FiniteAlgebra, OperationTable};
use crate::commutator::CommutatorEngine;
use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::malcev::MalcevTerm;
use crate::partition::{is_congruence, Congruence, Partition};
use crate::relation::{odometer, TupleRelation};

/// Operation tables of arity `1..=arity_bound` preserving a relation, in
/// order of arity and then lexicographic order of the table.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PolymorphismSet {
    pub fingerprint: String,
    pub arity_bound: usize,
    pub tables: Vec<OperationTable>,
}

impl PolymorphismSet {
    pub fn len(&self) -> usize {
        self.tables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tables.is_empty()
    }

    /// Membership by arity and table, ignoring the symbol.
    pub fn contains(&self, op: &OperationTable) -> bool {
        self.tables.iter().any(|t| t.arity() == op.arity() && t.table() == op.table())
    }

    pub fn of_arity(&self, k: usize) -> impl Iterator<Item = &OperationTable> {
        self.tables.iter().filter(move |t| t.arity() == k)
    }
}

/// Hex digest of the carrier size, arity and sorted tuples of `r`.
pub fn relation_fingerprint(r: &TupleRelation) -> String {
    let mut hasher = Sha256::new();
    hasher.update((r.carrier_size() as u32).to_le_bytes());
    hasher.update((r.arity() as u32).to_le_bytes());
    for t in r.sorted_tuples() {
        hasher.update(&t);
    }
    hex::encode(&hasher.finalize()[..8])
}

/// `true` iff applying `op` coordinatewise to any `k` tuples of `r` gives a
/// tuple of `r`.
pub fn preserves(op: &OperationTable, r: &TupleRelation) -> bool {
    preserves_table(op.table(), op.arity(), r)
}

fn preserves_table(table: &[Element], k: usize, r: &TupleRelation) -> bool {
    let m = r.carrier_size();
    let arity = r.arity();
    if k == 0 {
        return r.contains(&vec![table[0]; arity]);
    }
    if r.is_empty() {
        return true;
    }
    let rows = r.len();
    let mut pick = vec![0usize; k];
    let mut out = vec![0 as Element; arity];
    loop {
        for (c, slot) in out.iter_mut().enumerate() {
            let idx = pick.iter().fold(0usize, |acc, &p| acc * m + r.get(p)[c] as usize);
            *slot = table[idx];
        }
        if !r.contains(&out) {
            return false;
        }
        // advance the choice of rows
        let mut j = k;
        loop {
            if j == 0 {
                return true;
            }
            j -= 1;
            pick[j] += 1;
            if pick[j] < rows {
                break;
            }
            pick[j] = 0;
        }
    }
}

/// Walks all tables of arity `1..=b` over `m` elements, keeping those for
/// which `keep` holds.
fn enumerate_tables(
    m: usize,
    b: usize,
    limits: &Limits,
    mut keep: impl FnMut(&[Element], usize) -> bool,
) -> Result<Vec<OperationTable>> {
    let mut found = Vec::new();
    for k in 1..=b {
        let entries = (m as u64).checked_pow(k as u32).filter(|&e| e <= 64);
        let count = entries.and_then(|e| (m as u64).checked_pow(e as u32));
        match count {
            Some(c) if c <= limits.table_budget => {}
            _ => {
                return Err(Error::ResourceLimit {
                    what: "polymorphism tables",
                    reached: count.unwrap_or(u64::MAX),
                    limit: limits.table_budget,
                })
            }
        }
        let mut table = vec![0 as Element; entries.expect("checked above") as usize];
        let mut index = 0;
        loop {
            if keep(&table, k) {
                found.push(OperationTable::new(format!("f{}_{}", k, index), k, table.clone()));
                index += 1;
            }
            if !odometer(&mut table, m) {
                break;
            }
        }
    }
    Ok(found)
}

/// `Pol(r)` restricted to arities `1..=b`.
pub fn polymorphisms(r: &TupleRelation, b: usize, limits: &Limits) -> Result<PolymorphismSet> {
    let tables = enumerate_tables(r.carrier_size(), b, limits, |t, k| preserves_table(t, k, r))?;
    Ok(PolymorphismSet {
        fingerprint: relation_fingerprint(r),
        arity_bound: b,
        tables,
    })
}

/// The commutator of the congruences picked by `subset` in two algebras.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SubsetCommutator {
    pub subset: Vec<usize>,
    pub original: Partition,
    pub expanded: Partition,
}

/// The effect of adding one operation `g` to the algebra.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Expansion {
    pub table: OperationTable,
    pub delta_size: usize,
    pub expanded_delta_size: usize,
    /// Δ of the expansion strictly contains the original Δ.
    pub delta_grew: bool,
    pub commutators: Vec<SubsetCommutator>,
    /// Subsets whose commutator differs between the two algebras.
    pub changed: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LargestCloneReport {
    pub arity_bound: usize,
    pub delta_size: usize,
    pub polymorphisms: PolymorphismSet,
    /// Basic operations of arity at most the bound that are not in the set,
    /// and constants outside Δ.
    pub basic_missing: Vec<String>,
    /// Δ computed in the algebra expanded by every polymorphism.
    pub expanded_delta_size: usize,
    pub delta_preserved: bool,
    pub commutators: Vec<SubsetCommutator>,
    pub commutators_preserved: bool,
    pub samples_requested: usize,
    pub sample_attempts: u64,
    pub samples: Vec<Expansion>,
}

impl LargestCloneReport {
    pub fn basic_in_pol(&self) -> bool {
        self.basic_missing.is_empty()
    }

    /// Every sampled non-polymorphism enlarged Δ and changed a commutator.
    pub fn maximality_holds(&self) -> bool {
        self.samples.iter().all(|s| s.delta_grew && !s.changed.is_empty())
    }

    pub fn passed(&self) -> bool {
        self.basic_in_pol() && self.delta_preserved && self.commutators_preserved && self.maximality_holds()
    }
}

/// Nonempty subsets of `0..n` as increasing index lists, by bitmask.
fn subsets(n: usize) -> Vec<Vec<usize>> {
    (1..1usize << n)
        .map(|mask| (0..n).filter(|&i| mask >> i & 1 == 1).collect())
        .collect()
}

fn compare_commutators(
    a: &CommutatorEngine<'_>,
    b: &CommutatorEngine<'_>,
    congs: &[Congruence],
) -> Result<Vec<SubsetCommutator>> {
    subsets(congs.len())
        .into_iter()
        .map(|subset| {
            let picked: Vec<Congruence> = subset.iter().map(|&i| congs[i].clone()).collect();
            Ok(SubsetCommutator {
                original: a.commutator_forks(&picked)?.into_partition(),
                expanded: b.commutator_forks(&picked)?.into_partition(),
                subset,
            })
        })
        .collect()
}

/// Adds `g` to `alg` and recomputes Δ and every subset commutator with the
/// same Mal'cev term.
pub fn expansion_effect(
    alg: &FiniteAlgebra,
    congs: &[Congruence],
    g: &OperationTable,
    limits: &Limits,
) -> Result<Expansion> {
    let base = CommutatorEngine::new(alg, limits.clone());
    let q = base.require_malcev()?.clone();
    expand_with(&base, &q, congs, g)
}

fn expand_with(
    base: &CommutatorEngine<'_>,
    q: &MalcevTerm,
    congs: &[Congruence],
    g: &OperationTable,
) -> Result<Expansion> {
    let alg = base.algebra();
    let symbol = fresh_symbol(alg, "g");
    let expanded = alg.expanded(vec![g.renamed(symbol)])?;
    let engine = CommutatorEngine::with_malcev(&expanded, q, base.limits().clone())?;
    let delta = base.delta(congs)?;
    let grown = engine.delta(congs)?;
    let commutators = compare_commutators(base, &engine, congs)?;
    let changed = commutators
        .iter()
        .filter(|c| c.original != c.expanded)
        .map(|c| c.subset.clone())
        .collect();
    Ok(Expansion {
        table: g.clone(),
        delta_size: delta.len(),
        expanded_delta_size: grown.len(),
        delta_grew: delta.is_subset_of(&grown) && grown.len() > delta.len(),
        commutators,
        changed,
    })
}

fn fresh_symbol(alg: &FiniteAlgebra, stem: &str) -> String {
    (0..)
        .map(|i| format!("{}{}", stem, i))
        .find(|s| alg.op_index(s).is_none())
        .expect("some symbol is free")
}

/// Checks that `Pol(Δ)` up to arity `b` contains the basic operations,
/// leaves Δ and all subset commutators unchanged when added to the algebra,
/// and that `samples` random operations preserving the congruences but not
/// Δ each enlarge Δ and change some commutator.
///
/// The result speaks only about arities up to `b`.
pub fn check_largest_clone(
    alg: &FiniteAlgebra,
    congs: &[Congruence],
    b: usize,
    samples: usize,
    limits: &Limits,
) -> Result<LargestCloneReport> {
    let base = CommutatorEngine::new(alg, limits.clone());
    let q = base.require_malcev()?.clone();
    let delta = base.delta(congs)?;
    let pol = polymorphisms(&delta, b, limits)?;

    let mut basic_missing = Vec::new();
    for op in alg.operations() {
        let ok = match op.arity() {
            0 => preserves(op, &delta),
            k if k <= b => pol.contains(op),
            _ => true,
        };
        if !ok {
            basic_missing.push(String::from(op.symbol()));
        }
    }

    let extra: Vec<OperationTable> = pol
        .tables
        .iter()
        .map(|t| t.renamed(fresh_symbol(alg, &format!("pol_{}_", t.symbol()))))
        .collect();
    let big = alg.expanded(extra)?;
    let big_engine = CommutatorEngine::with_malcev(&big, &q, limits.clone())?;
    let big_delta = big_engine.delta(congs)?;
    let commutators = compare_commutators(&base, &big_engine, congs)?;
    let commutators_preserved = commutators.iter().all(|c| c.original == c.expanded);

    let m = alg.size();
    let mut rng = ChaCha8Rng::seed_from_u64(limits.seed);
    let mut found = Vec::new();
    let mut attempts = 0u64;
    let cap = (samples as u64).saturating_mul(10_000);
    while found.len() < samples && attempts < cap && b > 0 {
        attempts += 1;
        let k = rng.gen_range(1..=b);
        let len = m.pow(k as u32);
        let table: Vec<Element> = (0..len).map(|_| rng.gen_range(0..m) as Element).collect();
        let g = OperationTable::new("g", k, table);
        if preserves(&g, &delta) {
            continue;
        }
        let lone = FiniteAlgebra::with_arity_bound("g", m, vec![g.clone()], k.max(1))?;
        if !congs.iter().all(|c| is_congruence(&lone, c)) {
            continue;
        }
        found.push(expand_with(&base, &q, congs, &g)?);
    }

    Ok(LargestCloneReport {
        arity_bound: b,
        delta_size: delta.len(),
        polymorphisms: pol,
        basic_missing,
        expanded_delta_size: big_delta.len(),
        delta_preserved: *big_delta == *delta,
        commutators,
        commutators_preserved,
        samples_requested: samples,
        sample_attempts: attempts,
        samples: found,
    })
}

/// Operations of arity `1..=b` preserving `Δ(α)` for every tuple `α` of
/// congruences of length at most `n_max`.
///
/// Fails with a verification error if the table of the Mal'cev term is
/// missing while `b >= 3`.
pub fn largest_commutator_preserving_clone(
    alg: &FiniteAlgebra,
    n_max: usize,
    b: usize,
    limits: &Limits,
) -> Result<PolymorphismSet> {
    let engine = CommutatorEngine::new(alg, limits.clone());
    let q = engine.require_malcev()?.clone();
    let lattice = engine.lattice()?;
    let mut deltas = Vec::new();
    for n in 1..=n_max {
        let mut t = vec![0 as Element; n];
        loop {
            let congs: Vec<Congruence> = t
                .iter()
                .map(|&i| lattice.get(i as usize).cloned())
                .collect::<Result<_>>()?;
            deltas.push(engine.delta(&congs)?);
            if !odometer(&mut t, lattice.len()) {
                break;
            }
        }
    }
    // small relations first: they reject most tables fastest
    deltas.sort_by_key(|d| (d.len(), d.arity()));
    let tables = enumerate_tables(alg.size(), b, limits, |t, k| deltas.iter().all(|d| preserves_table(t, k, d)))?;
    let mut hasher = Sha256::new();
    for d in &deltas {
        hasher.update(relation_fingerprint(d).as_bytes());
    }
    let set = PolymorphismSet {
        fingerprint: hex::encode(&hasher.finalize()[..8]),
        arity_bound: b,
        tables,
    };
    if b >= 3 {
        let table = q.compiled().tabulate(alg, "q");
        if !set.contains(&table) {
            return Err(Error::VerificationFailed(String::from(
                "the Mal'cev operation is missing from the intersection",
            )));
        }
    }
    Ok(set)
}
