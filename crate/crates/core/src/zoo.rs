//! Built-in example algebras.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::algebra::{Element, FiniteAlgebra, OperationTable};
use crate::error::{Error, Result};

/// `Z_n` as a group: `+`, unary `-` and the constant `0`.
pub fn cyclic(n: usize) -> Result<FiniteAlgebra> {
    check_range("cyclic", n, 1, 8)?;
    FiniteAlgebra::new(format!("cyclic({})", n), n, additive(n))
}

fn additive(n: usize) -> Vec<OperationTable> {
    vec![
        OperationTable::from_fn("+", 2, n, |a| ((a[0] as usize + a[1] as usize) % n) as Element),
        OperationTable::from_fn("-", 1, n, |a| ((n - a[0] as usize) % n) as Element),
        OperationTable::constant("0", 0),
    ]
}

/// `Z_2 x Z_2` with elements encoded as two bits.
pub fn klein4() -> FiniteAlgebra {
    let ops = vec![
        OperationTable::from_fn("+", 2, 4, |a| a[0] ^ a[1]),
        OperationTable::from_fn("-", 1, 4, |a| a[0]),
        OperationTable::constant("0", 0),
    ];
    FiniteAlgebra::new("klein4", 4, ops).expect("valid tables")
}

fn group(name: &str, n: usize, mul: impl Fn(usize, usize) -> usize) -> FiniteAlgebra {
    let e = (0..n).find(|&e| (0..n).all(|x| mul(e, x) == x)).expect("group has an identity");
    let mul_table = OperationTable::from_fn("mul", 2, n, |a| mul(a[0] as usize, a[1] as usize) as Element);
    let inv = OperationTable::from_fn("inv", 1, n, |a| {
        (0..n).find(|&y| mul(a[0] as usize, y) == e).expect("group has inverses") as Element
    });
    FiniteAlgebra::new(name, n, vec![mul_table, inv, OperationTable::constant("e", e as Element)])
        .expect("valid tables")
}

/// The dihedral group of order 8; `r^i s^j` is encoded as `i + 4j`.
pub fn dihedral4() -> FiniteAlgebra {
    group("dihedral4", 8, |x, y| {
        let (i, j, k, l) = (x % 4, x / 4, y % 4, y / 4);
        // s r^k = r^-k s
        let rot = if j == 0 { i + k } else { i + 4 - k };
        rot % 4 + 4 * ((j + l) % 2)
    })
}

/// The quaternion group; `±u` for `u` in `1, i, j, k` is encoded as `u + 4s`
/// with `s = 1` for the negative sign.
pub fn quaternion8() -> FiniteAlgebra {
    // unit products as (sign, unit)
    const UNITS: [[(usize, usize); 4]; 4] = [
        [(0, 0), (0, 1), (0, 2), (0, 3)],
        [(0, 1), (1, 0), (0, 3), (1, 2)],
        [(0, 2), (1, 3), (1, 0), (0, 1)],
        [(0, 3), (0, 2), (1, 1), (1, 0)],
    ];
    group("quaternion8", 8, |x, y| {
        let (s, u) = UNITS[x % 4][y % 4];
        u + 4 * ((s + x / 4 + y / 4) % 2)
    })
}

/// Permutations of `{0, 1, 2}` in lexicographic order (the identity is 0),
/// multiplied by composition `(p q)(x) = p(q(x))`.
pub fn sym3() -> FiniteAlgebra {
    let perms: Vec<[usize; 3]> = permutations3();
    group("sym3", 6, |x, y| {
        let (p, q) = (perms[x], perms[y]);
        let pq = [p[q[0]], p[q[1]], p[q[2]]];
        perms.iter().position(|r| *r == pq).expect("closed under composition")
    })
}

fn permutations3() -> Vec<[usize; 3]> {
    vec![[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]]
}

/// The ring `Z_n` with `+`, unary `-`, `*` and the constants `0` and `1`.
pub fn ring_z(n: usize) -> Result<FiniteAlgebra> {
    check_range("ring_z", n, 1, 6)?;
    let mut ops = additive(n);
    ops.insert(2, OperationTable::from_fn("*", 2, n, |a| ((a[0] as usize * a[1] as usize) % n) as Element));
    ops.push(OperationTable::constant("1", (1 % n) as Element));
    FiniteAlgebra::new(format!("ring_z({})", n), n, ops)
}

/// `Z_n` reduced to its affine structure, the single ternary `p = x - y + z`.
pub fn affine_z(n: usize) -> Result<FiniteAlgebra> {
    check_range("affine_z", n, 1, 8)?;
    let p = OperationTable::from_fn("p", 3, n, |a| {
        ((a[0] as usize + n - a[1] as usize + a[2] as usize) % n) as Element
    });
    FiniteAlgebra::new(format!("affine_z({})", n), n, vec![p])
}

/// The meet semilattice on `{0, 1, 2}` with `0` below the incomparable `1`, `2`.
pub fn semilattice3() -> FiniteAlgebra {
    let meet = OperationTable::from_fn("meet", 2, 3, |a| if a[0] == a[1] { a[0] } else { 0 });
    FiniteAlgebra::new("semilattice3", 3, vec![meet]).expect("valid tables")
}

/// A bare set with no operations.
pub fn set(n: usize) -> Result<FiniteAlgebra> {
    check_range("set", n, 1, 8)?;
    FiniteAlgebra::new(format!("set({})", n), n, Vec::new())
}

fn check_range(family: &str, n: usize, lo: usize, hi: usize) -> Result<()> {
    if n < lo || n > hi {
        return Err(Error::InvalidAlgebra(format!(
            "{}({}) is outside the supported range {}..={}",
            family, n, lo, hi
        )));
    }
    Ok(())
}

/// Looks up an algebra by name, e.g. `sym3`, `cyclic(4)` or `ring_z(6)`.
pub fn zoo(name: &str) -> Result<FiniteAlgebra> {
    let name = name.trim();
    let unknown = || Error::InvalidAlgebra(format!("unknown zoo algebra `{}`", name));
    match name {
        "klein4" => return Ok(klein4()),
        "dihedral4" => return Ok(dihedral4()),
        "quaternion8" => return Ok(quaternion8()),
        "sym3" => return Ok(sym3()),
        "semilattice3" => return Ok(semilattice3()),
        _ => {}
    }
    let (family, rest) = name.split_once('(').ok_or_else(unknown)?;
    let n: usize = rest
        .strip_suffix(')')
        .and_then(|d| d.trim().parse().ok())
        .ok_or_else(unknown)?;
    match family.trim() {
        "cyclic" => cyclic(n),
        "ring_z" => ring_z(n),
        "affine_z" => affine_z(n),
        "set" => set(n),
        _ => Err(unknown()),
    }
}

/// Names of the built-in algebras known to have a Mal'cev term.
pub fn malcev_names() -> Vec<String> {
    let mut names: Vec<String> = (2..=8).map(|n| format!("cyclic({})", n)).collect();
    names.extend(["klein4", "dihedral4", "quaternion8", "sym3"].map(String::from));
    names.extend((2..=6).map(|n| format!("ring_z({})", n)));
    names
}

/// Every family member accepted by [`zoo`], for listings.
pub fn all_names() -> Vec<String> {
    let mut names = malcev_names();
    names.extend((1..=8).map(|n| format!("affine_z({})", n)));
    names.push(String::from("semilattice3"));
    names.extend((1..=8).map(|n| format!("set({})", n)));
    names
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::con_lattice;
    use crate::limits::Limits;

    fn is_group(alg: &FiniteAlgebra) -> bool {
        let m = alg.size();
        let mul = alg.operation(0);
        let e = alg.operation(2).table()[0];
        (0..m as Element).all(|x| {
            mul.apply(m, &[e, x]) == x
                && mul.apply(m, &[x, alg.operation(1).apply(m, &[x])]) == e
                && (0..m as Element).all(|y| {
                    (0..m as Element).all(|z| {
                        let l = mul.apply(m, &[mul.apply(m, &[x, y]), z]);
                        l == mul.apply(m, &[x, mul.apply(m, &[y, z])])
                    })
                })
        })
    }

    fn center_size(alg: &FiniteAlgebra) -> usize {
        let m = alg.size();
        let mul = alg.operation(0);
        (0..m as Element)
            .filter(|&x| (0..m as Element).all(|y| mul.apply(m, &[x, y]) == mul.apply(m, &[y, x])))
            .count()
    }

    #[test]
    fn groups_are_groups() {
        for alg in [dihedral4(), quaternion8(), sym3(), cyclic(6).unwrap(), klein4()] {
            assert!(is_group(&alg), "{}", alg.name());
        }
        assert_eq!(center_size(&dihedral4()), 2);
        assert_eq!(center_size(&quaternion8()), 2);
        assert_eq!(center_size(&sym3()), 1);
        // Q8 has a unique involution, D4 has five
        let involutions = |a: &FiniteAlgebra| {
            (1..8u8).filter(|&x| a.operation(0).apply(8, &[x, x]) == 0).count()
        };
        assert_eq!(involutions(&quaternion8()), 1);
        assert_eq!(involutions(&dihedral4()), 5);
    }

    #[test]
    fn lookups() {
        assert_eq!(zoo("cyclic(4)").unwrap(), cyclic(4).unwrap());
        assert_eq!(zoo("sym3").unwrap().size(), 6);
        assert_eq!(zoo(" ring_z( 6 ) ").unwrap().operations().len(), 5);
        assert!(zoo("cyclic(9)").is_err());
        assert!(zoo("octonions").is_err());
        assert!(zoo("cyclic(x)").is_err());
        for name in all_names() {
            assert!(zoo(&name).is_ok(), "{}", name);
        }
    }

    #[test]
    fn sym3_lattice() {
        let l = con_lattice(&sym3(), &Limits::default()).unwrap();
        assert_eq!(l.len(), 3);
        // the middle congruence collapses the alternating group
        let mid = l.get(1).unwrap();
        assert_eq!(mid.block_count(), 2);
        assert!(mid.related(0, 3) && mid.related(0, 4) && !mid.related(0, 1));
    }

    #[test]
    fn ring_congruences_are_ideals() {
        assert_eq!(con_lattice(&ring_z(6).unwrap(), &Limits::default()).unwrap().len(), 4);
        assert_eq!(con_lattice(&dihedral4(), &Limits::default()).unwrap().len(), 6);
        assert_eq!(con_lattice(&quaternion8(), &Limits::default()).unwrap().len(), 6);
        assert_eq!(con_lattice(&semilattice3(), &Limits::default()).unwrap().len(), 4);
    }
}
