//! Mal'cev terms and strong cube terms.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{Element, FiniteAlgebra};
use crate::closure::{close, term_of, CloseOptions, ClosurePlan};
use crate::error::{Error, Result};
use crate::hypercube::xor;
use crate::limits::Limits;
use crate::term::{CompiledTerm, Term};

/// A ternary term checked to satisfy `q(x, y, y) = x` and `q(x, x, y) = y`
/// on the whole carrier of the algebra it was verified against.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MalcevTerm {
    term: Term,
    compiled: CompiledTerm,
}

impl MalcevTerm {
    pub fn verify(alg: &FiniteAlgebra, term: Term) -> Result<MalcevTerm> {
        let compiled = CompiledTerm::compile(alg, &term, 3)?;
        let m = alg.size() as Element;
        let mut stack = Vec::new();
        for x in 0..m {
            for y in 0..m {
                let v = compiled.eval_with(alg, &[x, y, y], &mut stack);
                if v != x {
                    return Err(Error::VerificationFailed(format!(
                        "q({x}, {y}, {y}) = {v}, expected {x}"
                    )));
                }
                let v = compiled.eval_with(alg, &[x, x, y], &mut stack);
                if v != y {
                    return Err(Error::VerificationFailed(format!(
                        "q({x}, {x}, {y}) = {v}, expected {y}"
                    )));
                }
            }
        }
        Ok(MalcevTerm { term, compiled })
    }

    pub fn term(&self) -> &Term {
        &self.term
    }

    pub fn compiled(&self) -> &CompiledTerm {
        &self.compiled
    }

    pub fn eval(&self, alg: &FiniteAlgebra, x: Element, y: Element, z: Element) -> Element {
        self.compiled.eval(alg, &[x, y, z])
    }
}

/// Outcome of a Mal'cev term search.
#[derive(Clone, Debug)]
pub struct MalcevSearch {
    pub term: Option<MalcevTerm>,
    /// Number of column tuples generated before stopping.
    pub explored: usize,
    /// Number of columns `(a, b, b)` and `(a, a, b)` tracked.
    pub columns: usize,
}

/// Searches the clone of `alg` for a Mal'cev operation.
///
/// The three projections are restricted to the columns `(a, b, b)` and
/// `(a, a, b)` and closed under the basic operations; a Mal'cev term exists
/// exactly when the tuple picking `a` on the first kind of column and `b` on
/// the second is generated, and the recorded derivation of that tuple is the
/// term. A `None` answer is therefore definitive.
pub fn find_malcev_term(alg: &FiniteAlgebra, limits: &Limits) -> Result<MalcevSearch> {
    let m = alg.size() as Element;
    let mut columns: Vec<[Element; 3]> = Vec::new();
    for a in 0..m {
        for b in 0..m {
            columns.push([a, b, b]);
        }
    }
    let split = columns.len();
    for a in 0..m {
        for b in 0..m {
            if a != b {
                columns.push([a, a, b]);
            }
        }
    }
    let seeds: Vec<Vec<Element>> = (0..3).map(|j| columns.iter().map(|c| c[j]).collect()).collect();
    let target: Vec<Element> = columns
        .iter()
        .enumerate()
        .map(|(k, c)| if k < split { c[0] } else { c[2] })
        .collect();
    let plan = ClosurePlan::for_algebra(alg);
    let options = CloseOptions {
        max_tuples: limits.max_tuples,
        target: Some(&target),
        provenance: true,
    };
    let run = close(alg, &plan, columns.len(), &seeds, options)?;
    let term = match run.hit {
        Some(i) => {
            let t = term_of(alg, &run.origins, i, &Term::Var);
            Some(MalcevTerm::verify(alg, t)?)
        }
        None => None,
    };
    Ok(MalcevSearch {
        term,
        explored: run.relation.len(),
        columns: columns.len(),
    })
}

/// A `(2^n - 1)`-ary term meant to satisfy the strong `n`-cube identities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CubeTermWitness {
    pub n: usize,
    pub term: Term,
    pub verified: bool,
}

/// How a cube term was checked.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CubeCheck {
    pub passed: bool,
    /// True when every assignment was tried, false when sampled.
    pub exhaustive: bool,
    /// Assignments evaluated per identity.
    pub assignments: u64,
    pub counterexample: Option<CubeCounterexample>,
}

/// An argument tuple on which a cube identity fails.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CubeCounterexample {
    pub direction: usize,
    pub arguments: Vec<Element>,
    pub value: Element,
    pub expected: Element,
}

/// The literal recursion `q_2(x0, x1, x2) = q(x1, x0, x2)`,
/// `q_{k+1} = q_2(q_k(first half), middle variable, q_k(second half))`.
pub fn cube_term(n: usize, q: &Term) -> Result<Term> {
    if n == 0 {
        return Err(Error::OutOfBounds(format!("cube terms start at dimension 1, got {}", n)));
    }
    if n > 12 {
        return Err(Error::OutOfBounds(format!("cube term dimension {} is too large", n)));
    }
    if n == 1 {
        return Ok(Term::Var(0));
    }
    let q2 = q.substitute(&[Term::Var(1), Term::Var(0), Term::Var(2)])?;
    let mut qk = q2.clone();
    for k in 2..n {
        let half = 1usize << k;
        let low: Vec<Term> = (0..half - 1).map(Term::Var).collect();
        let high: Vec<Term> = (half..2 * half - 1).map(Term::Var).collect();
        qk = q2.substitute(&[qk.substitute(&low)?, Term::Var(half - 1), qk.substitute(&high)?])?;
    }
    Ok(qk)
}

/// Builds `q_n` from a verified Mal'cev term and checks its identities.
pub fn strong_cube_term(
    alg: &FiniteAlgebra,
    n: usize,
    q: &MalcevTerm,
    limits: &Limits,
) -> Result<(CubeTermWitness, CubeCheck)> {
    let term = cube_term(n, q.term())?;
    let mut witness = CubeTermWitness { n, term, verified: false };
    let check = verify_strong_cube(alg, &witness, limits)?;
    if !check.passed {
        let c = check.counterexample.as_ref().expect("failed checks carry a witness");
        return Err(Error::VerificationFailed(format!(
            "cube term of dimension {} fails direction {} at {:?}: got {}, expected {}",
            n, c.direction, c.arguments, c.value, c.expected
        )));
    }
    witness.verified = true;
    Ok((witness, check))
}

/// Checks, for every direction `i < n`, that `q_n` returns the value of the
/// missing last vertex whenever vertices differing only in digit `i` agree.
pub fn verify_strong_cube(alg: &FiniteAlgebra, witness: &CubeTermWitness, limits: &Limits) -> Result<CubeCheck> {
    let n = witness.n;
    if n == 0 || n > 12 {
        return Err(Error::OutOfBounds(format!("cube dimension {}", n)));
    }
    let arity = (1usize << n) - 1;
    let compiled = CompiledTerm::compile(alg, &witness.term, arity)?;
    let m = alg.size();
    let free = 1usize << (n - 1);
    let space = (m as u64).checked_pow(free as u32);
    let exhaustive = space.is_some_and(|s| s <= limits.exhaustive_verify_budget);
    let assignments = if exhaustive { space.unwrap() } else { limits.verify_samples as u64 };
    let mut stack = Vec::new();
    let mut args = vec![0 as Element; arity + 1];
    let mut values = vec![0 as Element; free];
    for i in 0..n {
        // vertices k with digit i clear represent their pair {k, k ^ 2^i}
        let reps: Vec<usize> = (0..=arity).filter(|&k| (k >> i) & 1 == 0).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(limits.seed ^ ((n as u64) << 32) ^ i as u64);
        values.iter_mut().for_each(|v| *v = 0);
        for step in 0..assignments {
            if !exhaustive {
                values.iter_mut().for_each(|v| *v = rng.gen_range(0..m) as Element);
            } else if step > 0 {
                crate::relation::odometer(&mut values, m);
            }
            for (p, &k) in reps.iter().enumerate() {
                args[k] = values[p];
                args[xor(k, 1 << i)] = values[p];
            }
            let value = compiled.eval_with(alg, &args[..arity], &mut stack);
            if value != args[arity] {
                return Ok(CubeCheck {
                    passed: false,
                    exhaustive,
                    assignments,
                    counterexample: Some(CubeCounterexample {
                        direction: i,
                        arguments: args[..arity].to_vec(),
                        value,
                        expected: args[arity],
                    }),
                });
            }
        }
    }
    Ok(CubeCheck {
        passed: true,
        exhaustive,
        assignments,
        counterexample: None,
    })
}

/// `q(x, y, z) = q_n(y, .., y, x, z)`, a Mal'cev term recovered from a
/// strong cube term.
pub fn malcev_from_cube(witness: &CubeTermWitness) -> Result<Term> {
    let arity = (1usize << witness.n) - 1;
    if arity < 2 {
        return Err(Error::OutOfBounds(String::from("need a cube term of dimension at least 2")));
    }
    let mut args = vec![Term::Var(1); arity];
    args[arity - 2] = Term::Var(0);
    args[arity - 1] = Term::Var(2);
    witness.term.substitute(&args)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::eval_term;
    use crate::zoo;

    fn limits() -> Limits {
        Limits::default()
    }

    #[test]
    fn finds_terms_in_groups() {
        for alg in [zoo::cyclic(2).unwrap(), zoo::sym3(), zoo::quaternion8(), zoo::ring_z(6).unwrap(), zoo::affine_z(5).unwrap()] {
            let search = find_malcev_term(&alg, &limits()).unwrap();
            assert!(search.term.is_some(), "{}", alg.name());
        }
    }

    #[test]
    fn z2_term_is_the_sum() {
        let z2 = crate::algebra::FiniteAlgebra::new("Z2", 2, vec![crate::algebra::OperationTable::new("+", 2, vec![0, 1, 1, 0])]).unwrap();
        let q = find_malcev_term(&z2, &limits()).unwrap().term.unwrap();
        for x in 0..2 {
            for y in 0..2 {
                for z in 0..2 {
                    assert_eq!(q.eval(&z2, x, y, z), x ^ y ^ z);
                }
            }
        }
    }

    #[test]
    fn sym3_term_is_the_group_difference() {
        let s3 = zoo::sym3();
        let q = find_malcev_term(&s3, &limits()).unwrap().term.unwrap();
        let mul = |a, b| s3.operation(0).apply(6, &[a, b]);
        let inv = |a| s3.operation(1).apply(6, &[a]);
        for x in 0..6 {
            for y in 0..6 {
                for z in 0..6 {
                    assert_eq!(q.eval(&s3, x, y, z), mul(mul(x, inv(y)), z));
                }
            }
        }
    }

    #[test]
    fn no_term_without_operations() {
        for alg in [zoo::set(2).unwrap(), zoo::semilattice3()] {
            let search = find_malcev_term(&alg, &limits()).unwrap();
            assert!(search.term.is_none());
            assert!(search.explored >= 3);
        }
    }

    #[test]
    fn rejects_bad_malcev_terms() {
        let z3 = zoo::cyclic(3).unwrap();
        let t: Term = "(+ x0 x2)".parse().unwrap();
        assert!(matches!(MalcevTerm::verify(&z3, t), Err(Error::VerificationFailed(_))));
    }

    #[test]
    fn cube_identities_for_small_dimensions() {
        let z2 = zoo::cyclic(2).unwrap();
        let q = find_malcev_term(&z2, &limits()).unwrap().term.unwrap();
        let (w2, check) = strong_cube_term(&z2, 2, &q, &limits()).unwrap();
        assert!(check.passed && check.exhaustive && w2.verified);
        let (w3, _) = strong_cube_term(&z2, 3, &q, &limits()).unwrap();
        assert_eq!(w3.term.variable_bound(), 7);
        assert_eq!(eval_term(&z2, &w3.term, &[0, 1, 1, 0, 0, 1, 1]).unwrap(), 0);
        // q3(x,y,z,w,x,y,z) = w, q3(x,y,x,y,z,w,z) = w, q3(x,x,y,y,z,z,w) = w
        let s3 = zoo::sym3();
        let q = find_malcev_term(&s3, &limits()).unwrap().term.unwrap();
        let (w3, _) = strong_cube_term(&s3, 3, &q, &limits()).unwrap();
        for (x, y, z, w) in [(1, 2, 3, 4), (5, 0, 2, 3), (4, 4, 1, 2)] {
            assert_eq!(eval_term(&s3, &w3.term, &[x, y, z, w, x, y, z]).unwrap(), w);
            assert_eq!(eval_term(&s3, &w3.term, &[x, y, x, y, z, w, z]).unwrap(), w);
            assert_eq!(eval_term(&s3, &w3.term, &[x, x, y, y, z, z, w]).unwrap(), w);
        }
    }

    #[test]
    fn swapped_arguments_fail_with_a_witness() {
        let z3 = zoo::cyclic(3).unwrap();
        let q = find_malcev_term(&z3, &limits()).unwrap().term.unwrap();
        let (w3, _) = strong_cube_term(&z3, 3, &q, &limits()).unwrap();
        let mut args: Vec<Term> = (0..7).map(Term::Var).collect();
        args.swap(0, 1);
        let bad = CubeTermWitness {
            n: 3,
            term: w3.term.substitute(&args).unwrap(),
            verified: false,
        };
        let check = verify_strong_cube(&z3, &bad, &limits()).unwrap();
        assert!(!check.passed);
        let c = check.counterexample.unwrap();
        assert_eq!(eval_term(&z3, &bad.term, &c.arguments).unwrap(), c.value);
        assert_ne!(c.value, c.expected);
    }

    #[test]
    fn sampling_kicks_in_above_the_budget() {
        let q8 = zoo::quaternion8();
        let q = find_malcev_term(&q8, &limits()).unwrap().term.unwrap();
        let small = Limits {
            exhaustive_verify_budget: 100,
            verify_samples: 500,
            ..limits()
        };
        let (_, check) = strong_cube_term(&q8, 3, &q, &small).unwrap();
        assert!(check.passed && !check.exhaustive);
        assert_eq!(check.assignments, 500);
    }

    #[test]
    fn cube_terms_give_back_malcev_terms() {
        let d4 = zoo::dihedral4();
        let q = find_malcev_term(&d4, &limits()).unwrap().term.unwrap();
        for n in 2..=4 {
            let (w, _) = strong_cube_term(&d4, n, &q, &limits()).unwrap();
            MalcevTerm::verify(&d4, malcev_from_cube(&w).unwrap()).unwrap();
        }
    }
}
