use std::process::ExitCode;
use std::time::Instant;

use hicomm::commutator::CommutatorEngine;
use hicomm::hypercube::forks;
use hicomm::malcev::{find_malcev_term, strong_cube_term};
use hicomm::relation::odometer;
use hicomm::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = std::result::Result<String, String>;

fn malcev_zoo() -> Vec<FiniteAlgebra> {
    let mut names: Vec<String> = (2..=8).map(|n| format!("cyclic({n})")).collect();
    names.extend(["klein4", "dihedral4", "quaternion8", "sym3"].map(String::from));
    names.extend((2..=6).map(|n| format!("ring_z({n})")));
    names.iter().map(|n| zoo::zoo(n).unwrap()).collect()
}

fn lattice(alg: &FiniteAlgebra) -> CongruenceLattice {
    con_lattice(alg, &Limits::default()).unwrap()
}

/// Tuples of lattice indices of length `1..=n_max`; all of them when there
/// are at most `cap`, otherwise `cap` seeded draws.
fn index_tuples(len: usize, n_max: usize, cap: usize) -> (Vec<Vec<usize>>, bool) {
    let total: usize = (1..=n_max).map(|n| len.pow(n as u32)).sum();
    if total <= cap {
        let mut out = Vec::new();
        for n in 1..=n_max {
            let mut t = vec![0u8; n];
            loop {
                out.push(t.iter().map(|&i| i as usize).collect());
                if !odometer(&mut t, len) {
                    break;
                }
            }
        }
        return (out, true);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(len as u64);
    let out = (0..cap)
        .map(|_| {
            let n = rng.gen_range(1..=n_max);
            (0..n).map(|_| rng.gen_range(0..len)).collect()
        })
        .collect();
    (out, false)
}

fn pick(l: &CongruenceLattice, t: &[usize]) -> Vec<Congruence> {
    t.iter().map(|&i| l.get(i).unwrap().clone()).collect()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn forks_match_term_condition() -> Outcome {
    let mut checked = 0;
    for alg in malcev_zoo() {
        let e = CommutatorEngine::new(&alg, Limits::default());
        ensure(e.malcev_term().unwrap().is_some(), || format!("{} has no Mal'cev term", alg.name()))?;
        let l = lattice(&alg);
        let (tuples, _) = index_tuples(l.len(), 3, usize::MAX);
        for t in tuples {
            let congs = pick(&l, &t);
            let f = e.commutator_forks(&congs).map_err(|x| x.to_string())?;
            let g = e.commutator_termcond(&congs).map_err(|x| x.to_string())?;
            ensure(f == g, || format!("{} {:?}: forks {} vs term condition {}", alg.name(), t, f, g))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} congruence tuples on 16 algebras"))
}

fn four_conditions_agree() -> Outcome {
    let mut checked = 0;
    for alg in malcev_zoo().into_iter().filter(|a| a.size() <= 4) {
        let m = alg.size();
        let e = CommutatorEngine::new(&alg, Limits::default());
        let l = lattice(&alg);
        let (tuples, _) = index_tuples(l.len(), 3, usize::MAX);
        for t in tuples {
            let congs = pick(&l, &t);
            let n = congs.len();
            let d = e.delta(&congs).unwrap();
            let h = 1usize << (n - 1);
            let early = forks(&d, h - 1).unwrap();
            let late = forks(&d, 2 * h - 1).unwrap();
            let gamma = e.commutator_termcond(&congs).unwrap();
            for a in 0..m as Element {
                for b in 0..m as Element {
                    let mut corner = vec![a; 2 * h];
                    corner[2 * h - 1] = b;
                    let prefixed = {
                        let mut c = vec![0 as Element; h - 1];
                        let mut found = false;
                        loop {
                            let mut u = c.clone();
                            u.push(a);
                            u.extend_from_slice(&c);
                            u.push(b);
                            if d.contains(&u) {
                                found = true;
                                break;
                            }
                            if !odometer(&mut c, m) {
                                break;
                            }
                        }
                        found
                    };
                    let answers = [
                        early.contains(a, b),
                        late.contains(a, b),
                        d.contains(&corner),
                        prefixed,
                        gamma.related(a, b),
                    ];
                    ensure(answers.iter().all(|&x| x == answers[0]), || {
                        format!("{} {:?} pair ({a}, {b}): {:?}", alg.name(), t, answers)
                    })?;
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("{checked} pairs, forks at both vertices 2^(n-1)-1 and 2^n-1"))
}

fn forks_agree_at_every_vertex() -> Outcome {
    let (mut exhaustive, mut sampled, mut checked) = (0, 0, 0);
    for name in zoo::all_names() {
        let alg = zoo::zoo(&name).unwrap();
        let e = CommutatorEngine::new(&alg, Limits::default());
        let l = lattice(&alg);
        let (tuples, all) = index_tuples(l.len(), 3, 400);
        if all {
            exhaustive += 1;
        } else {
            sampled += 1;
        }
        for t in tuples {
            let d = e.delta(&pick(&l, &t)).unwrap();
            let first = forks(&d, 0).unwrap();
            for i in 1..d.arity() {
                ensure(forks(&d, i).unwrap() == first, || format!("{name} {:?}: forks at 0 and {i} differ", t))?;
            }
            checked += 1;
        }
    }
    Ok(format!(
        "{checked} relations; all tuples on {exhaustive} algebras, 400 seeded tuples on {sampled} with large lattices"
    ))
}

fn cube_identities() -> Outcome {
    let limits = Limits::default();
    let (mut exhaustive, mut sampled) = (0, 0);
    for alg in malcev_zoo() {
        let q = find_malcev_term(&alg, &limits).unwrap().term.unwrap();
        for n in 2..=4 {
            let (w, check) = strong_cube_term(&alg, n, &q, &limits).map_err(|x| format!("{}: {x}", alg.name()))?;
            ensure(check.passed && w.verified, || format!("{} n={n} failed", alg.name()))?;
            if check.exhaustive {
                exhaustive += 1;
            } else {
                ensure(check.assignments == 100_000, || "wrong sample count".into())?;
                sampled += 1;
            }
            if n == 3 {
                // the three displayed identities, evaluated directly
                let mut rng = ChaCha8Rng::seed_from_u64(3);
                let m = alg.size() as Element;
                for _ in 0..200 {
                    let [x, y, z, v] = [(); 4].map(|_| rng.gen_range(0..m));
                    for args in [[x, y, z, v, x, y, z], [x, y, x, y, z, v, z], [x, x, y, y, z, z, v]] {
                        ensure(eval_term(&alg, &w.term, &args).unwrap() == v, || {
                            format!("{}: q3{:?} != {v}", alg.name(), args)
                        })?;
                    }
                }
            }
        }
    }
    Ok(format!("{exhaustive} exhaustive and {sampled} sampled (10^5 each) verifications, zero failures"))
}

fn hc_laws() -> Outcome {
    let mut instances = 0;
    for alg in malcev_zoo() {
        let r = hc_suite(&alg, 3, &Limits::default()).map_err(|x| x.to_string())?;
        ensure(r.method == Method::Forks && r.exhaustive, || format!("{}: wrong mode", alg.name()))?;
        for law in &r.laws {
            ensure(law.applicable && law.instances > 0 && law.passed(), || {
                format!("{} {}: {:?}", alg.name(), law.law, law.counterexamples)
            })?;
            instances += law.instances;
        }
    }
    let s = hc_suite(&zoo::semilattice3(), 3, &Limits::default()).map_err(|x| x.to_string())?;
    ensure(s.method == Method::TermCondition, || "control used forks".into())?;
    for law in &s.laws[..3] {
        ensure(law.instances > 0 && law.passed(), || format!("semilattice3 {}: {:?}", law.law, law.counterexamples))?;
    }
    Ok(format!("{instances} law instances on 16 algebras; HC1-HC3 on semilattice3 by term condition"))
}

struct Group {
    m: usize,
    mul: Vec<Vec<usize>>,
    inv: Vec<usize>,
    e: usize,
}

impl Group {
    fn of(alg: &FiniteAlgebra) -> Group {
        let m = alg.size();
        let mul = (0..m)
            .map(|x| (0..m).map(|y| alg.operation(0).apply(m, &[x as u8, y as u8]) as usize).collect())
            .collect::<Vec<Vec<usize>>>();
        let e = (0..m).find(|&e| (0..m).all(|x| mul[e][x] == x)).unwrap();
        let inv = (0..m).map(|x| (0..m).find(|&y| mul[x][y] == e).unwrap()).collect();
        Group { m, mul, inv, e }
    }

    fn subgroup(&self, gens: &[usize]) -> Vec<bool> {
        let mut inside = vec![false; self.m];
        inside[self.e] = true;
        let mut stack = vec![self.e];
        while let Some(x) = stack.pop() {
            for &g in gens {
                let y = self.mul[x][g];
                if !inside[y] {
                    inside[y] = true;
                    stack.push(y);
                }
            }
        }
        inside
    }

    /// `[H, G]` for a subgroup given by membership.
    fn commutator_with_all(&self, h: &[bool]) -> Vec<bool> {
        let mut gens = Vec::new();
        for x in (0..self.m).filter(|&x| h[x]) {
            for y in 0..self.m {
                gens.push(self.mul[self.mul[self.inv[x]][self.inv[y]]][self.mul[x][y]]);
            }
        }
        self.subgroup(&gens)
    }

    fn cosets(&self, h: &[bool]) -> Partition {
        let labels: Vec<usize> = (0..self.m)
            .map(|x| (0..self.m).find(|&y| h[self.mul[self.inv[y]][x]]).unwrap())
            .collect();
        Partition::canonicalize(&labels)
    }

    fn nilpotency_class(&self, cap: usize) -> Option<usize> {
        let mut h = vec![true; self.m];
        for c in 0..=cap {
            if h.iter().filter(|&&x| x).count() == 1 {
                return Some(c);
            }
            h = self.commutator_with_all(&h);
        }
        None
    }
}

fn golden_values() -> Outcome {
    let limits = Limits::default();
    for p in [2, 3, 5, 7] {
        let z = zoo::cyclic(p).unwrap();
        let one = Congruence::full(p);
        ensure(commutator_forks(&z, &[one.clone(), one], &limits).unwrap().is_equality(), || {
            format!("[1,1] != 0 on cyclic({p})")
        })?;
    }
    let s3 = zoo::sym3();
    let g = Group::of(&s3);
    let derived = g.commutator_with_all(&vec![true; 6]);
    let one = Congruence::full(6);
    let c = commutator_forks(&s3, &[one.clone(), one.clone()], &limits).unwrap();
    ensure(c.partition() == &g.cosets(&derived), || format!("sym3 [1,1] = {c}"))?;
    ensure(c.block_count() == 2, || "A3 has index 2".into())?;
    for alg in [zoo::dihedral4(), zoo::quaternion8()] {
        let class = Group::of(&alg).nilpotency_class(5);
        ensure(class == Some(2), || format!("{} oracle class {:?}", alg.name(), class))?;
        let d = supernilpotence_degree(&alg, 3, &limits).unwrap();
        ensure(d.degree == class, || format!("{} degree {:?}", alg.name(), d.degree))?;
    }
    ensure(g.nilpotency_class(5).is_none(), || "sym3 oracle says nilpotent".into())?;
    let d = supernilpotence_degree(&s3, 3, &limits).unwrap();
    ensure(d.degree.is_none() && d.levels.len() == 3, || format!("sym3 {:?}", d))?;
    let triple = commutator_forks(&s3, &[one.clone(), one.clone(), one], &limits).unwrap();
    ensure(triple == c, || format!("sym3 [1,1,1] = {triple}"))?;
    Ok("cyclic primes abelian; sym3 [1,1] = A3 cosets = [1,1,1]; dihedral4 and quaternion8 degree 2; sym3 none up to 3".into())
}

fn even_weight_delta() -> Outcome {
    let z2 = zoo::cyclic(2).unwrap();
    let one = Congruence::full(2);
    let d = delta(&z2, &[one.clone(), one], &Limits::default()).unwrap();
    let mut parity = Vec::new();
    for bits in 0u8..16 {
        if bits.count_ones() % 2 == 0 {
            parity.push((0..4).map(|k| (bits >> (3 - k)) & 1).collect::<Vec<u8>>());
        }
    }
    ensure(d.relation().sorted_tuples() == parity, || format!("{:?}", d.relation()))?;
    Ok("exactly the 8 even-weight tuples".into())
}

fn membership_by_cube_term() -> Outcome {
    let limits = Limits::default();
    let mut checked = 0u64;
    let mut names = Vec::new();
    for name in zoo::all_names() {
        let alg = zoo::zoo(&name).unwrap();
        if alg.size() > 3 || find_malcev_term(&alg, &limits).unwrap().term.is_none() {
            continue;
        }
        names.push(name.clone());
        let e = CommutatorEngine::new(&alg, limits.clone());
        let l = lattice(&alg);
        let (tuples, _) = index_tuples(l.len(), 3, usize::MAX);
        for t in tuples {
            let congs = pick(&l, &t);
            let d = e.delta(&congs).unwrap();
            let mut u = vec![0 as Element; 1 << congs.len()];
            loop {
                let direct = d.contains(&u);
                let derived = e.delta_membership(&u, &congs).unwrap();
                ensure(direct == derived, || format!("{name} {:?} tuple {:?}: {direct} vs {derived}", t, u))?;
                checked += 1;
                if !odometer(&mut u, alg.size()) {
                    break;
                }
            }
        }
    }
    Ok(format!("{checked} tuples on {}", names.join(", ")))
}

fn largest_clone() -> Outcome {
    let limits = Limits::default();
    let mut lines = Vec::new();
    for (alg, b) in [(zoo::cyclic(2).unwrap(), 3), (zoo::cyclic(3).unwrap(), 2)] {
        let m = alg.size();
        let congs = vec![Congruence::full(m); 2];
        let r = check_largest_clone(&alg, &congs, b, 20, &limits).map_err(|x| x.to_string())?;
        ensure(r.basic_in_pol(), || format!("{}: basic ops missing {:?}", alg.name(), r.basic_missing))?;
        ensure(r.delta_preserved && r.commutators_preserved, || format!("{}: expansion changed Δ", alg.name()))?;
        ensure(r.samples.len() >= 20, || format!("{}: only {} samples", alg.name(), r.samples.len()))?;
        ensure(r.maximality_holds(), || format!("{}: a sample kept every commutator", alg.name()))?;
        // the affine operation x - y + z preserves Δ; it must be listed
        let affine = OperationTable::from_fn("p", 3, m, |a| ((a[0] as usize + m - a[1] as usize + a[2] as usize) % m) as u8);
        if b >= 3 {
            ensure(r.polymorphisms.contains(&affine), || "x - y + z missing".into())?;
        }
        lines.push(format!("{} b={b}: {} polymorphisms, 20 samples", alg.name(), r.polymorphisms.len()));
    }
    Ok(lines.join("; "))
}

fn join_of_deltas() -> Outcome {
    let limits = Limits::default();
    let mut checked = 0;
    for alg in [zoo::klein4(), zoo::cyclic(4).unwrap()] {
        let e = CommutatorEngine::new(&alg, limits.clone());
        let l = lattice(&alg);
        for n in 2..=3 {
            let mut prefix = vec![0u8; n - 1];
            loop {
                let head = pick(&l, &prefix.iter().map(|&i| i as usize).collect::<Vec<_>>());
                for r1 in 0..l.len() {
                    for r2 in 0..l.len() {
                        let rhos = pick(&l, &[r1, r2]);
                        let ok = e.delta_join_check(&head, &rhos).map_err(|x| x.to_string())?;
                        ensure(ok, || format!("{} prefix {:?} rho {r1} {r2}", alg.name(), prefix))?;
                        checked += 1;
                    }
                }
                if !odometer(&mut prefix, l.len()) {
                    break;
                }
            }
        }
    }
    Ok(format!("{checked} joins on klein4 and cyclic(4)"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("forks and term condition agree", forks_match_term_condition),
        ("four descriptions of the commutator agree", four_conditions_agree),
        ("forks of Δ agree at every vertex", forks_agree_at_every_vertex),
        ("strong cube identities for n = 2, 3, 4", cube_identities),
        ("HC1-HC8", hc_laws),
        ("golden values", golden_values),
        ("Δ of Z2 is the even-weight code", even_weight_delta),
        ("membership through the cube term", membership_by_cube_term),
        ("largest commutator-preserving clone", largest_clone),
        ("join of Δ relations", join_of_deltas),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name} ({detail}) [{secs:.2}s]", k + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why} [{secs:.2}s]", k + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} passed in {:.1}s",
        criteria.len() - failed,
        criteria.len(),
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
