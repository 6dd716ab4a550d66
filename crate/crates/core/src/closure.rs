//! Subpower generation: closing sets of tuples under the coordinatewise
//! action of the basic operations.
//!
//! Three strategies are chosen from the operation tables alone:
//!
//! * if some binary operation is a group (or some ternary operation is
//!   `x * y^-1 * z` for a group), subpowers are subgroups of a power of that
//!   group and are enumerated coset by coset; operations that distribute over
//!   the group product only need to be applied to the generators, and the
//!   group inverse is skipped entirely;
//! * a single associative binary operation (plus constants) is closed by
//!   right multiplication with the generators;
//! * anything else runs a semi-naive fixpoint over all argument tuples.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::algebra::{Element, FiniteAlgebra};
use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::relation::TupleRelation;
use crate::term::Term;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Product {
    /// `x * y` for a group operation.
    Binary(usize),
    /// `p(x, id, y)` for `p = x * y^-1 * z`; the first tuple of the relation
    /// serves as `id`.
    Ternary(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Kind {
    Group {
        product: Product,
        multilinear: Vec<usize>,
        scans: Vec<usize>,
        skipped: Vec<usize>,
    },
    Semigroup(usize),
    Generic(Vec<usize>),
}

/// Closure strategy for one algebra, derived once from its tables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosurePlan {
    kind: Kind,
    constants: Vec<usize>,
}

/// How a tuple entered a closure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Origin {
    /// The `k`-th seed tuple.
    Seed(usize),
    /// Operation `op` applied to earlier tuples (none for a constant).
    Op { op: usize, args: Vec<u32> },
}

/// Result of a closure run.
#[derive(Clone, Debug)]
pub struct Closure {
    pub relation: TupleRelation,
    /// Filled when provenance was requested, one entry per tuple.
    pub origins: Vec<Origin>,
    /// Index of the target tuple if the run stopped on it.
    pub hit: Option<usize>,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct CloseOptions<'t> {
    pub max_tuples: usize,
    pub target: Option<&'t [Element]>,
    pub provenance: bool,
}

impl ClosurePlan {
    pub fn for_algebra(alg: &FiniteAlgebra) -> ClosurePlan {
        let m = alg.size();
        let ops = alg.operations();
        let constants: Vec<usize> = (0..ops.len()).filter(|&i| ops[i].arity() == 0).collect();
        let active: Vec<usize> = (0..ops.len()).filter(|&i| ops[i].arity() > 0).collect();

        let binary = active
            .iter()
            .copied()
            .find_map(|i| group_of(m, ops[i].table(), ops[i].arity()).map(|g| (i, g)));
        if let Some((g, group)) = binary {
            let mut multilinear = Vec::new();
            let mut scans = Vec::new();
            let mut skipped = Vec::new();
            for &i in active.iter().filter(|&&i| i != g) {
                let op = &ops[i];
                if op.arity() == 1 && op.table() == &group.inverse[..] {
                    skipped.push(i);
                } else if distributes(m, op.table(), op.arity(), ops[g].table()) {
                    multilinear.push(i);
                } else {
                    scans.push(i);
                }
            }
            return ClosurePlan {
                kind: Kind::Group {
                    product: Product::Binary(g),
                    multilinear,
                    scans,
                    skipped,
                },
                constants,
            };
        }
        if let Some(&p) = active
            .iter()
            .find(|&&i| ops[i].arity() == 3 && is_group_difference(m, ops[i].table()))
        {
            return ClosurePlan {
                kind: Kind::Group {
                    product: Product::Ternary(p),
                    multilinear: Vec::new(),
                    scans: active.iter().copied().filter(|&i| i != p).collect(),
                    skipped: Vec::new(),
                },
                constants,
            };
        }
        if let [op] = active[..] {
            if ops[op].arity() == 2 && is_associative(m, ops[op].table()) {
                return ClosurePlan {
                    kind: Kind::Semigroup(op),
                    constants,
                };
            }
        }
        ClosurePlan {
            kind: Kind::Generic(active),
            constants,
        }
    }

    /// Short label of the strategy, reported in statistics.
    pub fn strategy(&self) -> &'static str {
        match self.kind {
            Kind::Group {
                product: Product::Binary(_),
                ..
            } => "group",
            Kind::Group {
                product: Product::Ternary(_),
                ..
            } => "affine",
            Kind::Semigroup(_) => "semigroup",
            Kind::Generic(_) => "generic",
        }
    }
}

struct GroupTable {
    inverse: Vec<Element>,
}

fn group_of(m: usize, t: &[Element], arity: usize) -> Option<GroupTable> {
    if arity != 2 {
        return None;
    }
    let e = (0..m).find(|&e| (0..m).all(|x| t[e * m + x] as usize == x && t[x * m + e] as usize == x))?;
    if !is_associative(m, t) {
        return None;
    }
    let inverse = (0..m)
        .map(|x| (0..m).find(|&y| t[x * m + y] as usize == e).map(|y| y as Element))
        .collect::<Option<Vec<_>>>()?;
    Some(GroupTable { inverse })
}

fn is_associative(m: usize, t: &[Element]) -> bool {
    (0..m).all(|x| {
        (0..m).all(|y| {
            let xy = t[x * m + y] as usize;
            (0..m).all(|z| t[xy * m + z] == t[x * m + t[y * m + z] as usize])
        })
    })
}

/// `p(x, y, z) = x * y^-1 * z` for the group `x * z = p(x, 0, z)`.
fn is_group_difference(m: usize, p: &[Element]) -> bool {
    let at = |x: usize, y: usize, z: usize| p[(x * m + y) * m + z] as usize;
    if !(0..m).all(|x| at(x, 0, 0) == x && at(0, 0, x) == x) {
        return false;
    }
    let mul: Vec<Element> = (0..m * m).map(|i| p[(i / m * m) * m + i % m]).collect();
    let Some(g) = group_of(m, &mul, 2) else {
        return false;
    };
    (0..m).all(|x| {
        (0..m).all(|y| {
            let xy = mul[x * m + g.inverse[y] as usize] as usize;
            (0..m).all(|z| at(x, y, z) == mul[xy * m + z] as usize)
        })
    })
}

/// Every argument position of `f` is an endomorphism of the group `mul`.
fn distributes(m: usize, f: &[Element], arity: usize, mul: &[Element]) -> bool {
    let work = (m as u64).saturating_pow(arity as u32 + 1).saturating_mul(arity as u64);
    if work > 1 << 24 {
        return false;
    }
    let strides: Vec<usize> = (0..arity).map(|j| m.pow((arity - 1 - j) as u32)).collect();
    (0..arity).all(|j| {
        let s = strides[j];
        (0..f.len()).filter(|idx| (idx / s) % m == 0).all(|base| {
            (0..m).all(|x| {
                (0..m).all(|y| {
                    let xy = mul[x * m + y] as usize;
                    f[base + xy * s] == mul[f[base + x * s] as usize * m + f[base + y * s] as usize]
                })
            })
        })
    })
}

enum Halt {
    Target,
    Limit,
}

type Step<T = ()> = core::result::Result<T, Halt>;

struct Run<'a> {
    alg: &'a FiniteAlgebra,
    m: usize,
    r: usize,
    rel: TupleRelation,
    origins: Vec<Origin>,
    provenance: bool,
    target: Option<&'a [Element]>,
    hit: Option<usize>,
    max: usize,
    buf: Vec<Element>,
}

impl Run<'_> {
    /// Inserts `self.buf`; `Ok(true)` if it was new.
    #[inline]
    fn push(&mut self, origin: impl FnOnce() -> Origin) -> Step<bool> {
        if self.rel.len() >= self.max {
            return if self.rel.contains(&self.buf) {
                Ok(false)
            } else {
                Err(Halt::Limit)
            };
        }
        if !self.rel.insert(&self.buf) {
            return Ok(false);
        }
        if self.provenance {
            self.origins.push(origin());
        }
        if self.target == Some(&self.buf[..]) {
            self.hit = Some(self.rel.len() - 1);
            return Err(Halt::Target);
        }
        Ok(true)
    }

    fn last(&self) -> usize {
        self.rel.len() - 1
    }

    /// `buf = op(rel[args[0]], .., rel[args[k-1]])` coordinatewise.
    fn apply(&mut self, op: usize, args: &[usize]) {
        let table = self.alg.operation(op).table();
        let m = self.m;
        for c in 0..self.r {
            let mut idx = 0usize;
            for &a in args {
                idx = idx * m + self.rel.get(a)[c] as usize;
            }
            self.buf[c] = table[idx];
        }
    }

    fn op_origin(op: usize, args: &[usize]) -> Origin {
        Origin::Op {
            op,
            args: args.iter().map(|&a| a as u32).collect(),
        }
    }
}

struct GroupRun {
    product: Product,
    identity: usize,
    gens: Vec<usize>,
}

impl GroupRun {
    fn star(&self, run: &mut Run<'_>, a: usize, b: usize) {
        let m = run.m;
        match self.product {
            Product::Binary(op) => {
                let t = run.alg.operation(op).table();
                let (x, y) = (run.rel.get(a), run.rel.get(b));
                for c in 0..run.r {
                    run.buf[c] = t[x[c] as usize * m + y[c] as usize];
                }
            }
            Product::Ternary(op) => {
                let t = run.alg.operation(op).table();
                let (x, e, y) = (run.rel.get(a), run.rel.get(self.identity), run.rel.get(b));
                for c in 0..run.r {
                    run.buf[c] = t[(x[c] as usize * m + e[c] as usize) * m + y[c] as usize];
                }
            }
        }
    }

    fn star_origin(&self, a: usize, b: usize) -> Origin {
        match self.product {
            Product::Binary(op) => Run::op_origin(op, &[a, b]),
            Product::Ternary(op) => Run::op_origin(op, &[a, self.identity, b]),
        }
    }

    fn push_star(&self, run: &mut Run<'_>, a: usize, b: usize) -> Step<bool> {
        self.star(run, a, b);
        run.push(|| self.star_origin(a, b))
    }

    /// Enlarges the current subgroup by `seed` (Dimino's coset enumeration).
    fn add(&mut self, run: &mut Run<'_>, seed: &[Element], origin: Origin) -> Step {
        run.buf.copy_from_slice(seed);
        if run.rel.contains(seed) {
            return Ok(());
        }
        if self.gens.is_empty() {
            run.push(|| origin)?;
            let g = run.last();
            let mut cur = g;
            while self.push_star(run, cur, g)? {
                cur = run.last();
            }
            self.identity = match self.product {
                Product::Ternary(_) => g,
                // the powers of g end with the identity tuple
                Product::Binary(_) => {
                    let mut id = g;
                    for i in g..run.rel.len() {
                        self.star(run, i, i);
                        if run.buf[..] == *run.rel.get(i) {
                            id = i;
                        }
                    }
                    id
                }
            };
            self.gens.push(g);
            return Ok(());
        }
        let order = run.rel.len();
        run.push(|| origin)?;
        let s = run.last();
        self.coset(run, order, s)?;
        self.gens.push(s);
        let mut reps = vec![s];
        let mut next = 0;
        while next < reps.len() {
            let rep = reps[next];
            for gi in 0..self.gens.len() {
                let t = self.gens[gi];
                if self.push_star(run, rep, t)? {
                    let x = run.last();
                    self.coset(run, order, x)?;
                    reps.push(x);
                }
            }
            next += 1;
        }
        Ok(())
    }

    /// Appends `h * x` for every `h` of the subgroup `rel[..order]` other than
    /// the identity (which gives `x` itself, already present).
    fn coset(&self, run: &mut Run<'_>, order: usize, x: usize) -> Step {
        for h in 0..order {
            if h != self.identity {
                self.push_star(run, h, x)?;
            }
        }
        Ok(())
    }
}

/// Calls `f` on every `k`-tuple of indices below `hi` that uses at least one
/// index in `lo..hi`; stops early when `f` fails.
fn for_each_fresh<E>(
    k: usize,
    lo: usize,
    hi: usize,
    mut f: impl FnMut(&[usize]) -> core::result::Result<(), E>,
) -> core::result::Result<(), E> {
    if lo >= hi {
        return Ok(());
    }
    let mut idx = vec![0usize; k];
    for fresh in 0..k {
        // positions before `fresh` range over old indices, `fresh` over new
        // ones, later positions over everything
        let bound = |p: usize| if p < fresh { (0, lo) } else if p == fresh { (lo, hi) } else { (0, hi) };
        if fresh > 0 && lo == 0 {
            continue;
        }
        for (p, slot) in idx.iter_mut().enumerate() {
            *slot = bound(p).0;
        }
        'outer: loop {
            f(&idx)?;
            for p in (0..k).rev() {
                idx[p] += 1;
                if idx[p] < bound(p).1 {
                    continue 'outer;
                }
                idx[p] = bound(p).0;
            }
            break;
        }
    }
    Ok(())
}

/// Closes `seeds` (plus the constant tuples) under the operations of `alg`
/// acting coordinatewise on `A^r`.
pub fn close<S: AsRef<[Element]>>(
    alg: &FiniteAlgebra,
    plan: &ClosurePlan,
    r: usize,
    seeds: &[S],
    options: CloseOptions<'_>,
) -> Result<Closure> {
    let m = alg.size();
    for s in seeds {
        let s = s.as_ref();
        if s.len() != r || s.iter().any(|&a| a as usize >= m) {
            return Err(Error::OutOfBounds(format!(
                "generator {:?} is not a {}-tuple over a carrier of {}",
                s, r, m
            )));
        }
    }
    let mut run = Run {
        alg,
        m,
        r,
        rel: TupleRelation::new(m, r)?,
        origins: Vec::new(),
        provenance: options.provenance,
        target: options.target.filter(|t| t.len() == r),
        hit: None,
        max: options.max_tuples,
        buf: vec![0; r],
    };
    let mut start: VecDeque<(Vec<Element>, Origin)> = seeds
        .iter()
        .enumerate()
        .map(|(k, s)| (s.as_ref().to_vec(), Origin::Seed(k)))
        .collect();
    for &c in &plan.constants {
        let v = alg.operation(c).table()[0];
        start.push_back((vec![v; r], Origin::Op { op: c, args: Vec::new() }));
    }
    let outcome = match &plan.kind {
        Kind::Group {
            product,
            multilinear,
            scans,
            ..
        } => close_group(&mut run, *product, multilinear, scans, start),
        Kind::Semigroup(op) => close_semigroup(&mut run, *op, start),
        Kind::Generic(ops) => close_generic(&mut run, ops, start),
    };
    match outcome {
        Ok(()) | Err(Halt::Target) => Ok(Closure {
            relation: run.rel,
            origins: run.origins,
            hit: run.hit,
        }),
        Err(Halt::Limit) => Err(Error::ResourceLimit {
            what: "subpower closure",
            reached: run.rel.len() as u64,
            limit: run.max as u64,
        }),
    }
}

fn seed_all(run: &mut Run<'_>, start: VecDeque<(Vec<Element>, Origin)>) -> Step {
    for (t, o) in start {
        run.buf.copy_from_slice(&t);
        run.push(|| o)?;
    }
    Ok(())
}

fn close_generic(run: &mut Run<'_>, ops: &[usize], start: VecDeque<(Vec<Element>, Origin)>) -> Step {
    seed_all(run, start)?;
    let mut lo = 0;
    loop {
        let hi = run.rel.len();
        if lo == hi {
            return Ok(());
        }
        for &op in ops {
            let k = run.alg.operation(op).arity();
            for_each_fresh(k, lo, hi, |args| {
                run.apply(op, args);
                run.push(|| Run::op_origin(op, args)).map(|_| ())
            })?;
        }
        lo = hi;
    }
}

fn close_semigroup(run: &mut Run<'_>, op: usize, start: VecDeque<(Vec<Element>, Origin)>) -> Step {
    seed_all(run, start)?;
    let gens = run.rel.len();
    let mut i = 0;
    while i < run.rel.len() {
        for g in 0..gens {
            run.apply(op, &[i, g]);
            run.push(|| Run::op_origin(op, &[i, g]))?;
        }
        i += 1;
    }
    Ok(())
}

fn close_group(
    run: &mut Run<'_>,
    product: Product,
    multilinear: &[usize],
    scans: &[usize],
    mut pending: VecDeque<(Vec<Element>, Origin)>,
) -> Step {
    let mut group = GroupRun {
        product,
        identity: 0,
        gens: Vec::new(),
    };
    let mut checked = vec![0usize; multilinear.len()];
    let mut scanned = vec![0usize; scans.len()];
    loop {
        while let Some((t, o)) = pending.pop_front() {
            group.add(run, &t, o)?;
        }
        for (slot, &op) in multilinear.iter().enumerate() {
            let k = run.alg.operation(op).arity();
            let gens = group.gens.clone();
            for_each_fresh(k, checked[slot], gens.len(), |pos| {
                let args: Vec<usize> = pos.iter().map(|&p| gens[p]).collect();
                run.apply(op, &args);
                if !run.rel.contains(&run.buf) {
                    pending.push_back((run.buf.clone(), Run::op_origin(op, &args)));
                }
                Ok::<(), Halt>(())
            })?;
            checked[slot] = gens.len();
        }
        for (slot, &op) in scans.iter().enumerate() {
            let k = run.alg.operation(op).arity();
            let hi = run.rel.len();
            for_each_fresh(k, scanned[slot], hi, |args| {
                run.apply(op, args);
                if !run.rel.contains(&run.buf) {
                    pending.push_back((run.buf.clone(), Run::op_origin(op, args)));
                }
                Ok::<(), Halt>(())
            })?;
            scanned[slot] = hi;
        }
        if pending.is_empty() {
            return Ok(());
        }
    }
}

/// `Sg` of `generators` in the `r`-th power of `alg`.
pub fn sg_power<S: AsRef<[Element]>>(
    alg: &FiniteAlgebra,
    r: usize,
    generators: &[S],
    limits: &Limits,
) -> Result<TupleRelation> {
    let plan = ClosurePlan::for_algebra(alg);
    sg_power_with(alg, &plan, r, generators, limits.max_tuples)
}

pub fn sg_power_with<S: AsRef<[Element]>>(
    alg: &FiniteAlgebra,
    plan: &ClosurePlan,
    r: usize,
    generators: &[S],
    max_tuples: usize,
) -> Result<TupleRelation> {
    let options = CloseOptions {
        max_tuples,
        ..CloseOptions::default()
    };
    Ok(close(alg, plan, r, generators, options)?.relation)
}

/// Rebuilds the term that produced tuple `index`, mapping seed `k` to `seed(k)`.
pub fn term_of(alg: &FiniteAlgebra, origins: &[Origin], index: usize, seed: &dyn Fn(usize) -> Term) -> Term {
    let mut memo: Vec<Option<Term>> = vec![None; index + 1];
    build(alg, origins, index, seed, &mut memo)
}

fn build(
    alg: &FiniteAlgebra,
    origins: &[Origin],
    index: usize,
    seed: &dyn Fn(usize) -> Term,
    memo: &mut Vec<Option<Term>>,
) -> Term {
    if let Some(t) = &memo[index] {
        return t.clone();
    }
    let t = match &origins[index] {
        Origin::Seed(k) => seed(*k),
        Origin::Op { op, args } => Term::Apply(
            alg.operation(*op).symbol().into(),
            args.iter()
                .map(|&a| build(alg, origins, a as usize, seed, memo))
                .collect(),
        ),
    };
    memo[index] = Some(t.clone());
    t
}
