//! Δ relations and higher commutators.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::rc::Rc;
use alloc::string::String;
use alloc::vec::Vec;
use core::cell::{Cell, OnceCell, RefCell};

use crate::algebra::{Element, FiniteAlgebra};
use crate::closure::{sg_power_with, ClosurePlan};
use crate::error::{Error, Result};
use crate::hypercube::{face_coordinates, forks, generator_tuple, CubeRelation};
use crate::lattice::{con_lattice, CongruenceLattice};
use crate::limits::Limits;
use crate::malcev::{cube_term, find_malcev_term, MalcevTerm};
use crate::partition::{cg, is_congruence, Congruence, Partition};
use crate::relation::TupleRelation;
use crate::term::CompiledTerm;

/// Cached Δ relations are dropped once they hold this many entries in total.
const DELTA_CACHE_ENTRIES: usize = 1 << 26;

/// Which definition a commutator is computed from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Method {
    /// Forks of Δ at the last vertex; needs a Mal'cev term.
    Forks,
    /// Least fixpoint of the term condition over Δ; works for any algebra.
    TermCondition,
}

/// Counters describing the work an engine has done.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EngineStats {
    pub delta_closures: u64,
    pub delta_cache_hits: u64,
    pub largest_delta: u64,
    pub termcond_rounds: u64,
}

/// One level of the supernilpotence search: `[1, .., 1]` with `arguments` entries.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Level {
    pub arguments: usize,
    pub zero: bool,
    pub method: LevelMethod,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum LevelMethod {
    /// A nonzero nested binary commutator below the level settled it.
    LowerBound,
    /// The commutator was computed outright from Δ.
    Forks,
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Supernilpotence {
    /// Smallest `k` with `[1, .., 1] = 0` for `k + 1` arguments.
    pub degree: Option<usize>,
    pub k_max: usize,
    pub levels: Vec<Level>,
}

/// Computes Δ relations and commutators of one algebra, memoizing both.
///
/// Caches are keyed by the ordered list of congruences. The engine is meant
/// for a single thread; clone the algebra into separate engines to work in
/// parallel.
pub struct CommutatorEngine<'a> {
    alg: &'a FiniteAlgebra,
    plan: ClosurePlan,
    limits: Limits,
    malcev: OnceCell<Option<MalcevTerm>>,
    lattice: OnceCell<CongruenceLattice>,
    deltas: RefCell<BTreeMap<Vec<Element>, Rc<TupleRelation>>>,
    cached_entries: Cell<usize>,
    commutators: RefCell<BTreeMap<(Method, Vec<Element>), Congruence>>,
    cube_terms: RefCell<BTreeMap<usize, Rc<CompiledTerm>>>,
    stats: RefCell<EngineStats>,
}

impl<'a> CommutatorEngine<'a> {
    pub fn new(alg: &'a FiniteAlgebra, limits: Limits) -> Self {
        CommutatorEngine {
            alg,
            plan: ClosurePlan::for_algebra(alg),
            limits,
            malcev: OnceCell::new(),
            lattice: OnceCell::new(),
            deltas: RefCell::new(BTreeMap::new()),
            cached_entries: Cell::new(0),
            commutators: RefCell::new(BTreeMap::new()),
            cube_terms: RefCell::new(BTreeMap::new()),
            stats: RefCell::new(EngineStats::default()),
        }
    }

    /// An engine using `q`, which is re-verified against `alg`.
    pub fn with_malcev(alg: &'a FiniteAlgebra, q: &MalcevTerm, limits: Limits) -> Result<Self> {
        let q = MalcevTerm::verify(alg, q.term().clone())?;
        let engine = CommutatorEngine::new(alg, limits);
        let _ = engine.malcev.set(Some(q));
        Ok(engine)
    }

    pub fn algebra(&self) -> &'a FiniteAlgebra {
        self.alg
    }

    pub fn limits(&self) -> &Limits {
        &self.limits
    }

    pub fn stats(&self) -> EngineStats {
        self.stats.borrow().clone()
    }

    /// The Mal'cev term, searched for on first use.
    pub fn malcev_term(&self) -> Result<Option<&MalcevTerm>> {
        if self.malcev.get().is_none() {
            let found = find_malcev_term(self.alg, &self.limits)?.term;
            let _ = self.malcev.set(found);
        }
        Ok(self.malcev.get().and_then(Option::as_ref))
    }

    pub fn require_malcev(&self) -> Result<&MalcevTerm> {
        self.malcev_term()?.ok_or(Error::NoMalcevTerm)
    }

    pub fn lattice(&self) -> Result<&CongruenceLattice> {
        if self.lattice.get().is_none() {
            let l = con_lattice(self.alg, &self.limits)?;
            let _ = self.lattice.set(l);
        }
        Ok(self.lattice.get().expect("initialized above"))
    }

    fn check(&self, congs: &[Congruence]) -> Result<()> {
        let m = self.alg.size();
        for c in congs {
            if c.size() != m {
                return Err(Error::CarrierMismatch { left: m, right: c.size() });
            }
            if !is_congruence(self.alg, c) {
                return Err(Error::NotACongruence(format!("{}", c)));
            }
        }
        let cap = self.limits.dimension_cap(m);
        if congs.len() > cap {
            return Err(Error::ResourceLimit {
                what: "hypercube dimension",
                reached: congs.len() as u64,
                limit: cap as u64,
            });
        }
        Ok(())
    }

    fn key(congs: &[Congruence]) -> Vec<Element> {
        let mut key = Vec::with_capacity(1 + congs.iter().map(|c| c.size()).sum::<usize>());
        key.push(congs.len() as Element);
        for c in congs {
            key.extend_from_slice(c.blocks());
        }
        key
    }

    /// `Δ(α₀, .., α_{n−1})`, the subpower of `A^(2^n)` generated by the
    /// tuples `c_i(a, b)` with `a α_i b`.
    pub fn delta(&self, congs: &[Congruence]) -> Result<Rc<TupleRelation>> {
        self.check(congs)?;
        let key = Self::key(congs);
        if let Some(d) = self.deltas.borrow().get(&key) {
            self.stats.borrow_mut().delta_cache_hits += 1;
            return Ok(Rc::clone(d));
        }
        let n = congs.len();
        let m = self.alg.size();
        let rel = if n == 0 {
            TupleRelation::full(m, 1)?
        } else {
            let mut gens = Vec::new();
            for (i, c) in congs.iter().enumerate() {
                for (a, b) in c.pairs() {
                    gens.push(generator_tuple(i, n, a, b)?);
                }
            }
            sg_power_with(self.alg, &self.plan, 1 << n, &gens, self.limits.max_tuples)?
        };
        let rel = Rc::new(rel);
        {
            let mut stats = self.stats.borrow_mut();
            stats.delta_closures += 1;
            stats.largest_delta = stats.largest_delta.max(rel.len() as u64);
        }
        let entries = rel.as_flat().len();
        let mut cache = self.deltas.borrow_mut();
        if self.cached_entries.get() + entries > DELTA_CACHE_ENTRIES {
            cache.clear();
            self.cached_entries.set(0);
        }
        self.cached_entries.set(self.cached_entries.get() + entries);
        cache.insert(key, Rc::clone(&rel));
        Ok(rel)
    }

    pub fn delta_cube(&self, congs: &[Congruence]) -> Result<CubeRelation> {
        CubeRelation::new(congs.len(), (*self.delta(congs)?).clone())
    }

    pub fn commutator(&self, congs: &[Congruence], method: Method) -> Result<Congruence> {
        match method {
            Method::Forks => self.commutator_forks(congs),
            Method::TermCondition => self.commutator_termcond(congs),
        }
    }

    fn cached(&self, method: Method, congs: &[Congruence]) -> Option<Congruence> {
        self.commutators.borrow().get(&(method, Self::key(congs))).cloned()
    }

    fn remember(&self, method: Method, congs: &[Congruence], c: &Congruence) {
        self.commutators.borrow_mut().insert((method, Self::key(congs)), c.clone());
    }

    /// `[α₀, .., α_{n−1}]` as the forks of Δ at vertex `2^n − 1`.
    pub fn commutator_forks(&self, congs: &[Congruence]) -> Result<Congruence> {
        nonempty(congs)?;
        self.require_malcev()?;
        if let Some(c) = self.cached(Method::Forks, congs) {
            return Ok(c);
        }
        let d = self.delta(congs)?;
        let pairs = forks(&d, d.arity() - 1)?;
        if !pairs.is_equivalence() {
            return Err(Error::VerificationFailed(format!(
                "forks of Δ are not transitive for {}",
                list(congs)
            )));
        }
        let p = pairs.to_partition()?;
        if !is_congruence(self.alg, &p) {
            return Err(Error::VerificationFailed(format!(
                "forks of Δ are not compatible for {}",
                list(congs)
            )));
        }
        let c = Congruence::from_partition_unchecked(p);
        self.remember(Method::Forks, congs, &c);
        Ok(c)
    }

    /// `[α₀, .., α_{n−1}]` as the least `γ` modulo which `α₀, .., α_{n−2}`
    /// centralize `α_{n−1}`.
    pub fn commutator_termcond(&self, congs: &[Congruence]) -> Result<Congruence> {
        nonempty(congs)?;
        if let Some(c) = self.cached(Method::TermCondition, congs) {
            return Ok(c);
        }
        let d = self.delta(congs)?;
        let mut gamma = Congruence::equality(self.alg.size());
        let mut found = Vec::new();
        loop {
            self.stats.borrow_mut().termcond_rounds += 1;
            found.clear();
            violations(&d, &gamma, |a, b| {
                found.push((a, b));
                true
            });
            if found.is_empty() {
                break;
            }
            found.sort_unstable();
            found.dedup();
            found.extend(gamma.spanning_pairs());
            gamma = cg(self.alg, &found)?;
        }
        self.remember(Method::TermCondition, congs, &gamma);
        Ok(gamma)
    }

    /// Whether `centralizers` centralize `target` modulo `gamma`.
    pub fn centralizes(&self, centralizers: &[Congruence], target: &Congruence, gamma: &Congruence) -> Result<bool> {
        let mut congs = centralizers.to_vec();
        congs.push(target.clone());
        self.check(core::slice::from_ref(gamma))?;
        let d = self.delta(&congs)?;
        let mut ok = true;
        violations(&d, gamma, |_, _| {
            ok = false;
            false
        });
        Ok(ok)
    }

    /// The compiled strong `n`-cube term built from the Mal'cev term.
    pub fn cube_term(&self, n: usize) -> Result<Rc<CompiledTerm>> {
        if let Some(t) = self.cube_terms.borrow().get(&n) {
            return Ok(Rc::clone(t));
        }
        let q = self.require_malcev()?;
        let t = Rc::new(CompiledTerm::compile(self.alg, &cube_term(n, q.term())?, (1 << n) - 1)?);
        self.cube_terms.borrow_mut().insert(n, Rc::clone(&t));
        Ok(t)
    }

    /// Decides `t ∈ Δ(α₀, .., α_{n−1})` from the lower faces and the value of
    /// the strong cube term, without building Δ itself.
    pub fn delta_membership(&self, t: &[Element], congs: &[Congruence]) -> Result<bool> {
        let n = congs.len();
        if t.len() != 1 << n {
            return Err(Error::OutOfBounds(format!(
                "tuple of length {} for {} congruences",
                t.len(),
                n
            )));
        }
        if t.iter().any(|&a| a as usize >= self.alg.size()) {
            return Err(Error::OutOfBounds(format!("tuple {:?} leaves the carrier", t)));
        }
        self.check(congs)?;
        self.member(t, congs)
    }

    fn member(&self, t: &[Element], congs: &[Congruence]) -> Result<bool> {
        let n = congs.len();
        if n == 0 {
            return Ok(true);
        }
        for j in 0..n {
            let face: Vec<Element> = face_coordinates(j, n, 0).iter().map(|&k| t[k]).collect();
            let rest: Vec<Congruence> = without(congs, j);
            if !self.member(&face, &rest)? {
                return Ok(false);
            }
        }
        let q = self.cube_term(n)?;
        let last = t.len() - 1;
        let value = q.eval(self.alg, &t[..last]);
        Ok(self.commutator_forks(congs)?.related(value, t[last]))
    }

    /// Finds the smallest `k ≤ k_max` with `[1, .., 1] = 0` on `k + 1` arguments.
    ///
    /// The nested binary commutators `L_2 = [1, 1]`, `L_{j+1} = [L_j, 1]`
    /// lie below `[1, .., 1]` with `j` arguments, so a nonzero `L_j` settles
    /// a level without building a `2^j`-ary Δ.
    pub fn supernilpotence_degree(&self, k_max: usize) -> Result<Supernilpotence> {
        if k_max == 0 {
            return Err(Error::OutOfBounds(String::from("k_max must be at least 1")));
        }
        self.require_malcev()?;
        let m = self.alg.size();
        let one = Congruence::full(m);
        let mut levels = Vec::new();
        let mut lower = one.clone();
        for n in 2..=k_max + 1 {
            lower = self.commutator_forks(&[lower, one.clone()])?;
            if !lower.is_equality() {
                levels.push(Level { arguments: n, zero: false, method: LevelMethod::LowerBound });
                continue;
            }
            let ones = alloc::vec![one.clone(); n];
            let zero = self.commutator_forks(&ones)?.is_equality();
            levels.push(Level { arguments: n, zero, method: LevelMethod::Forks });
            if zero {
                return Ok(Supernilpotence { degree: Some(n - 1), k_max, levels });
            }
        }
        Ok(Supernilpotence { degree: None, k_max, levels })
    }

    /// Compares `Δ(α₀, .., α_{n−2}, ⋁ρ_i)` with the subpower generated by the
    /// union of the `Δ(α₀, .., α_{n−2}, ρ_i)`.
    pub fn delta_join_check(&self, prefix: &[Congruence], rhos: &[Congruence]) -> Result<bool> {
        if rhos.is_empty() {
            return Err(Error::OutOfBounds(String::from("need at least one congruence to join")));
        }
        let mut joined = rhos[0].clone();
        for r in &rhos[1..] {
            joined = crate::partition::join(self.alg, &joined, r)?;
        }
        let mut congs = prefix.to_vec();
        congs.push(joined);
        let whole = self.delta(&congs)?;
        let mut union: Vec<Vec<Element>> = Vec::new();
        for r in rhos {
            *congs.last_mut().expect("nonempty") = r.clone();
            union.extend(self.delta(&congs)?.iter().map(<[Element]>::to_vec));
        }
        let generated = sg_power_with(self.alg, &self.plan, whole.arity(), &union, self.limits.max_tuples)?;
        Ok(generated == *whole)
    }
}

fn nonempty(congs: &[Congruence]) -> Result<()> {
    if congs.is_empty() {
        return Err(Error::OutOfBounds(String::from("commutators need at least one congruence")));
    }
    Ok(())
}

fn without(congs: &[Congruence], j: usize) -> Vec<Congruence> {
    congs
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != j)
        .map(|(_, c)| c.clone())
        .collect()
}

fn list(congs: &[Congruence]) -> String {
    let parts: Vec<String> = congs.iter().map(|c| format!("{}", c)).collect();
    format!("[{}]", parts.join(", "))
}

/// Reports `(a_{h−1}, a_{2h−1})` for every tuple of `d` whose first `h − 1`
/// coordinates match the next `h` modulo `gamma` but whose last ones do not;
/// stops when `found` returns false.
fn violations(d: &TupleRelation, gamma: &Partition, mut found: impl FnMut(Element, Element) -> bool) {
    let h = d.arity() / 2;
    if h == 0 {
        return;
    }
    for t in d.iter() {
        let (a, b) = t.split_at(h);
        if !gamma.related(a[h - 1], b[h - 1]) && (0..h - 1).all(|i| gamma.related(a[i], b[i])) && !found(a[h - 1], b[h - 1]) {
            return;
        }
    }
}

/// `Δ(α₀, .., α_{n−1})` as a cube relation.
pub fn delta(alg: &FiniteAlgebra, congs: &[Congruence], limits: &Limits) -> Result<CubeRelation> {
    CommutatorEngine::new(alg, limits.clone()).delta_cube(congs)
}

pub fn commutator_forks(alg: &FiniteAlgebra, congs: &[Congruence], limits: &Limits) -> Result<Congruence> {
    CommutatorEngine::new(alg, limits.clone()).commutator_forks(congs)
}

pub fn commutator_termcond(alg: &FiniteAlgebra, congs: &[Congruence], limits: &Limits) -> Result<Congruence> {
    CommutatorEngine::new(alg, limits.clone()).commutator_termcond(congs)
}

pub fn centralizes(
    alg: &FiniteAlgebra,
    centralizers: &[Congruence],
    target: &Congruence,
    gamma: &Congruence,
    limits: &Limits,
) -> Result<bool> {
    CommutatorEngine::new(alg, limits.clone()).centralizes(centralizers, target, gamma)
}

pub fn delta_membership(alg: &FiniteAlgebra, t: &[Element], congs: &[Congruence], limits: &Limits) -> Result<bool> {
    CommutatorEngine::new(alg, limits.clone()).delta_membership(t, congs)
}

pub fn supernilpotence_degree(alg: &FiniteAlgebra, k_max: usize, limits: &Limits) -> Result<Supernilpotence> {
    CommutatorEngine::new(alg, limits.clone()).supernilpotence_degree(k_max)
}

pub fn delta_join_check(
    alg: &FiniteAlgebra,
    prefix: &[Congruence],
    rhos: &[Congruence],
    limits: &Limits,
) -> Result<bool> {
    CommutatorEngine::new(alg, limits.clone()).delta_join_check(prefix, rhos)
}
