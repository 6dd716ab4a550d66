//! The laws HC1 to HC8 checked over every tuple of congruences.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::FiniteAlgebra;
use crate::commutator::{CommutatorEngine, Method};
use crate::error::{Error, Result};
use crate::lattice::CongruenceLattice;
use crate::limits::Limits;
use crate::partition::Congruence;

/// Laws whose failure was recorded with at most this many witnesses.
const MAX_WITNESSES: usize = 8;

pub const LAWS: [&str; 8] = ["HC1", "HC2", "HC3", "HC4", "HC5", "HC6", "HC7", "HC8"];

/// A failing instance of a law. Congruences are lattice indices.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Counterexample {
    pub congs: Vec<usize>,
    /// The law's extra parameter: β for HC2, σ for HC4, γ for HC5, η for
    /// HC6, the second ρ for HC7, the split point for HC8.
    pub with: Vec<usize>,
    pub lhs: usize,
    pub rhs: usize,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LawResult {
    pub law: String,
    /// `false` when the law needs a Mal'cev term the algebra lacks.
    pub applicable: bool,
    pub instances: u64,
    pub failures: u64,
    pub counterexamples: Vec<Counterexample>,
}

impl LawResult {
    fn new(law: &str, applicable: bool) -> LawResult {
        LawResult {
            law: String::from(law),
            applicable,
            instances: 0,
            failures: 0,
            counterexamples: Vec::new(),
        }
    }

    fn record(&mut self, ok: bool, witness: impl FnOnce() -> Counterexample) {
        self.instances += 1;
        if !ok {
            self.failures += 1;
            if self.counterexamples.len() < MAX_WITNESSES {
                self.counterexamples.push(witness());
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// The commutator of one congruence tuple, all as lattice indices.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CommutatorValue {
    pub congs: Vec<usize>,
    pub value: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HcReport {
    pub n_max: usize,
    pub method: Method,
    pub lattice_size: usize,
    pub tuples: usize,
    /// `false` when the tuples were sampled because there were too many.
    pub exhaustive: bool,
    pub laws: Vec<LawResult>,
    pub commutators: Vec<CommutatorValue>,
}

impl HcReport {
    /// Every applicable law held on every instance.
    pub fn passed(&self) -> bool {
        self.laws.iter().all(LawResult::passed)
    }

    pub fn law(&self, name: &str) -> Option<&LawResult> {
        self.laws.iter().find(|l| l.law == name)
    }

    pub fn value(&self, congs: &[usize]) -> Option<usize> {
        self.commutators.iter().find(|c| c.congs == congs).map(|c| c.value)
    }
}

/// Runs the suite with forks when a Mal'cev term exists and with the term
/// condition otherwise; HC4 to HC8 are only checked in the first case.
pub fn hc_suite(alg: &FiniteAlgebra, n_max: usize, limits: &Limits) -> Result<HcReport> {
    let engine = CommutatorEngine::new(alg, limits.clone());
    let method = match engine.malcev_term()? {
        Some(_) => Method::Forks,
        None => Method::TermCondition,
    };
    run(&engine, n_max, method)
}

/// Runs the suite with an explicit method for every commutator.
pub fn hc_suite_with(engine: &CommutatorEngine<'_>, n_max: usize, method: Method) -> Result<HcReport> {
    run(engine, n_max, method)
}

/// Tuples of lattice indices of length `1..=n_max`, lexicographic within
/// each length; a seeded sample of them when the total exceeds `budget`.
fn congruence_tuples(len: usize, n_max: usize, budget: usize, seed: u64) -> (Vec<Vec<usize>>, bool) {
    let total: u128 = (1..=n_max).map(|n| (len as u128).pow(n as u32)).sum();
    if total <= budget as u128 {
        let mut out = Vec::new();
        for n in 1..=n_max {
            let mut t = vec![0usize; n];
            loop {
                out.push(t.clone());
                if !advance(&mut t, len) {
                    break;
                }
            }
        }
        return (out, true);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<Vec<usize>> = (0..budget)
        .map(|_| {
            let n = rng.gen_range(1..=n_max);
            (0..n).map(|_| rng.gen_range(0..len)).collect()
        })
        .collect();
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out.dedup();
    (out, false)
}

fn advance(t: &mut [usize], len: usize) -> bool {
    for slot in t.iter_mut().rev() {
        if *slot + 1 < len {
            *slot += 1;
            return true;
        }
        *slot = 0;
    }
    false
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..n {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out.sort();
    out
}

struct Suite<'e, 'a> {
    engine: &'e CommutatorEngine<'a>,
    lattice: &'e CongruenceLattice,
    method: Method,
}

impl Suite<'_, '_> {
    fn congs(&self, idx: &[usize]) -> Result<Vec<Congruence>> {
        idx.iter().map(|&i| self.lattice.get(i).cloned()).collect()
    }

    fn index(&self, c: &Congruence) -> Result<usize> {
        self.lattice
            .index_of(c)
            .ok_or_else(|| Error::VerificationFailed(alloc::format!("{} is not in the congruence lattice", c)))
    }

    fn commutator(&self, idx: &[usize]) -> Result<usize> {
        let c = self.engine.commutator(&self.congs(idx)?, self.method)?;
        self.index(&c)
    }
}

fn witness(congs: &[usize], with: Vec<usize>, lhs: usize, rhs: usize, note: &str) -> Counterexample {
    Counterexample {
        congs: congs.to_vec(),
        with,
        lhs,
        rhs,
        note: String::from(note),
    }
}

fn run(engine: &CommutatorEngine<'_>, n_max: usize, method: Method) -> Result<HcReport> {
    if n_max == 0 {
        return Err(Error::OutOfBounds(String::from("the suite needs n_max at least 1")));
    }
    let alg = engine.algebra();
    let limits = engine.limits();
    let lattice = engine.lattice()?;
    let malcev = engine.malcev_term()?.cloned();
    let has_malcev = malcev.is_some();
    let s = Suite { engine, lattice, method };
    let len = lattice.len();
    let (tuples, exhaustive) = congruence_tuples(len, n_max, limits.hc_tuple_budget, limits.seed);
    let mut laws: Vec<LawResult> = LAWS
        .iter()
        .enumerate()
        .map(|(k, name)| LawResult::new(name, k < 3 || has_malcev))
        .collect();
    let mut commutators = Vec::with_capacity(tuples.len());

    for t in &tuples {
        commutators.push(CommutatorValue {
            congs: t.clone(),
            value: s.commutator(t)?,
        });
    }
    let value_of = |t: &[usize]| -> Result<usize> {
        match commutators.binary_search_by(|c: &CommutatorValue| {
            c.congs.len().cmp(&t.len()).then_with(|| c.congs.as_slice().cmp(t))
        }) {
            Ok(i) => Ok(commutators[i].value),
            Err(_) => s.commutator(t),
        }
    };

    for t in &tuples {
        let n = t.len();
        let c = value_of(t)?;
        // HC1: below the meet
        let meet = lattice.meet_all(t);
        laws[0].record(lattice.le(c, meet), || witness(t, vec![], c, meet, "commutator is not below the meet"));
        // HC2: monotone in every argument
        let mut beta = t.clone();
        loop {
            if beta != *t {
                let d = value_of(&beta)?;
                laws[1].record(lattice.le(c, d), || witness(t, beta.clone(), c, d, "not monotone"));
            }
            if !advance_above(lattice, t, &mut beta) {
                break;
            }
        }
        // HC3: dropping the first argument
        if n >= 2 {
            let d = value_of(&t[1..])?;
            laws[2].record(lattice.le(c, d), || witness(t, vec![], c, d, "dropping the first argument lowers it"));
        }
        if !has_malcev {
            continue;
        }
        // HC4: symmetric
        for sigma in permutations(n) {
            let permuted: Vec<usize> = sigma.iter().map(|&i| t[i]).collect();
            let d = value_of(&permuted)?;
            laws[3].record(c == d, || witness(t, sigma.clone(), c, d, "not symmetric"));
        }
        // HC5: centralizing modulo γ exactly when the commutator is below γ
        let congs = s.congs(t)?;
        for g in 0..len {
            let gamma = lattice.get(g)?;
            let cent = engine.centralizes(&congs[..n - 1], &congs[n - 1], gamma)?;
            let below = lattice.le(c, g);
            laws[4].record(cent == below, || {
                witness(t, vec![g], cent as usize, below as usize, "centralizing disagrees with the commutator")
            });
        }
        // HC7: additive in the last argument
        for r in 0..len {
            let mut other = t.clone();
            other[n - 1] = r;
            let d = value_of(&other)?;
            other[n - 1] = lattice.join(t[n - 1], r);
            let e = value_of(&other)?;
            let joined = lattice.join(c, d);
            laws[6].record(joined == e, || witness(t, vec![r], joined, e, "not additive in the last argument"));
        }
        // HC8: nesting an initial segment
        for i in 1..n {
            let inner = value_of(&t[..i])?;
            let mut nested = vec![inner];
            nested.extend_from_slice(&t[i..]);
            let d = value_of(&nested)?;
            laws[7].record(lattice.le(d, c), || witness(t, vec![i], d, c, "nested commutator is above"));
        }
    }

    // HC6: commutators pass to quotients by any η below all arguments
    if let Some(q) = &malcev {
        for eta_index in 0..len {
            let eta = lattice.get(eta_index)?;
            let quotient = alg.quotient(eta)?;
            let qe = CommutatorEngine::with_malcev(&quotient, q, limits.clone())?;
            for t in &tuples {
                if !t.iter().all(|&a| lattice.le(eta_index, a)) {
                    continue;
                }
                let congs: Vec<Congruence> = s
                    .congs(t)?
                    .iter()
                    .map(|a| a.quotient_by(eta))
                    .collect::<Result<_>>()?;
                let up = qe.commutator(&congs, method)?;
                let lhs = s.index(&Congruence::lift(&up, eta))?;
                let rhs = lattice.join(value_of(t)?, eta_index);
                laws[5].record(lhs == rhs, || witness(t, vec![eta_index], lhs, rhs, "quotient commutator differs"));
            }
        }
    }

    Ok(HcReport {
        n_max,
        method,
        lattice_size: len,
        tuples: tuples.len(),
        exhaustive,
        laws,
        commutators,
    })
}

/// Steps `beta` through the tuples lying componentwise above `base`.
fn advance_above(lattice: &CongruenceLattice, base: &[usize], beta: &mut [usize]) -> bool {
    for k in (0..beta.len()).rev() {
        if let Some(next) = (beta[k] + 1..lattice.len()).find(|&b| lattice.le(base[k], b)) {
            beta[k] = next;
            return true;
        }
        beta[k] = base[k];
    }
    false
}
