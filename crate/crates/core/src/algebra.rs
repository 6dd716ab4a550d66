//! Finite algebras given by explicit operation tables.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::partition::Congruence;

/// Carrier elements are the integers `0..m` with `m <= 256`.
pub type Element = u8;

/// Largest supported carrier.
pub const MAX_CARRIER: usize = 256;

/// A basic operation of a finite algebra.
///
/// `table` is indexed by the lexicographic rank of the argument tuple, the
/// leftmost argument being most significant.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OperationTable {
    symbol: String,
    arity: usize,
    table: Vec<Element>,
}

impl OperationTable {
    pub fn new(symbol: impl Into<String>, arity: usize, table: Vec<Element>) -> Self {
        OperationTable {
            symbol: symbol.into(),
            arity,
            table,
        }
    }

    /// Tabulates `f` over all argument tuples of the given arity.
    pub fn from_fn(
        symbol: impl Into<String>,
        arity: usize,
        m: usize,
        mut f: impl FnMut(&[Element]) -> Element,
    ) -> Self {
        let len = m.pow(arity as u32);
        let mut table = Vec::with_capacity(len);
        let mut args = alloc::vec![0 as Element; arity];
        for _ in 0..len {
            table.push(f(&args));
            // odometer, rightmost argument fastest
            for slot in args.iter_mut().rev() {
                *slot += 1;
                if (*slot as usize) < m {
                    break;
                }
                *slot = 0;
            }
        }
        OperationTable::new(symbol, arity, table)
    }

    pub fn constant(symbol: impl Into<String>, value: Element) -> Self {
        OperationTable::new(symbol, 0, alloc::vec![value])
    }

    pub fn symbol(&self) -> &str {
        &self.symbol
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn table(&self) -> &[Element] {
        &self.table
    }

    /// Value at `args`; `m` is the carrier size the table was built for.
    #[inline]
    pub fn apply(&self, m: usize, args: &[Element]) -> Element {
        let mut idx = 0usize;
        for &a in args {
            idx = idx * m + a as usize;
        }
        self.table[idx]
    }

    /// The same table under another symbol.
    pub fn renamed(&self, symbol: impl Into<String>) -> Self {
        OperationTable::new(symbol, self.arity, self.table.clone())
    }
}

/// A finite algebra on `{0, .., size - 1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteAlgebra {
    name: String,
    size: usize,
    operations: Vec<OperationTable>,
}

impl FiniteAlgebra {
    /// Validates the tables, rejecting operations of arity above 4.
    pub fn new(name: impl Into<String>, size: usize, operations: Vec<OperationTable>) -> Result<Self> {
        Self::with_arity_bound(name, size, operations, 4)
    }

    pub fn with_arity_bound(
        name: impl Into<String>,
        size: usize,
        operations: Vec<OperationTable>,
        max_arity: usize,
    ) -> Result<Self> {
        if size == 0 || size > MAX_CARRIER {
            return Err(Error::InvalidAlgebra(format!(
                "carrier size must be in 1..={}, got {}",
                MAX_CARRIER, size
            )));
        }
        for (i, op) in operations.iter().enumerate() {
            if op.symbol.is_empty()
                || op
                    .symbol
                    .chars()
                    .any(|c| c.is_whitespace() || c == '(' || c == ')')
            {
                return Err(Error::InvalidAlgebra(format!(
                    "operation {} has an invalid symbol `{}`",
                    i, op.symbol
                )));
            }
            if operations[..i].iter().any(|o| o.symbol == op.symbol) {
                return Err(Error::InvalidAlgebra(format!(
                    "duplicate operation symbol `{}`",
                    op.symbol
                )));
            }
            if op.arity > max_arity {
                return Err(Error::InvalidAlgebra(format!(
                    "operation `{}` has arity {} above the bound {}",
                    op.symbol, op.arity, max_arity
                )));
            }
            let expected = size
                .checked_pow(op.arity as u32)
                .ok_or_else(|| Error::InvalidAlgebra(format!("table of `{}` too large", op.symbol)))?;
            if op.table.len() != expected {
                return Err(Error::InvalidAlgebra(format!(
                    "operation `{}` of arity {} needs {} entries, found {}",
                    op.symbol,
                    op.arity,
                    expected,
                    op.table.len()
                )));
            }
            if let Some(pos) = op.table.iter().position(|&v| v as usize >= size) {
                return Err(Error::InvalidAlgebra(format!(
                    "operation `{}` has entry {} at position {} outside the carrier",
                    op.symbol, op.table[pos], pos
                )));
            }
        }
        Ok(FiniteAlgebra {
            name: name.into(),
            size,
            operations,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn operations(&self) -> &[OperationTable] {
        &self.operations
    }

    pub fn operation(&self, index: usize) -> &OperationTable {
        &self.operations[index]
    }

    pub fn op_index(&self, symbol: &str) -> Option<usize> {
        self.operations.iter().position(|o| o.symbol == symbol)
    }

    pub fn max_arity(&self) -> usize {
        self.operations.iter().map(|o| o.arity).max().unwrap_or(0)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Adds every element `a` as a nullary operation `c{a}`, turning the term
    /// clone into the polynomial clone.
    pub fn with_constants(&self) -> Result<Self> {
        let extra = (0..self.size)
            .map(|a| OperationTable::constant(format!("c{}", a), a as Element))
            .collect();
        self.expanded(extra)
    }

    /// The algebra with `extra` appended to its basic operations.
    pub fn expanded(&self, extra: Vec<OperationTable>) -> Result<Self> {
        let mut ops = self.operations.clone();
        ops.extend(extra);
        let bound = ops.iter().map(|o| o.arity).max().unwrap_or(0).max(4);
        FiniteAlgebra::with_arity_bound(self.name.clone(), self.size, ops, bound)
    }

    /// The quotient algebra on the blocks of `eta`, block `j` being the j-th
    /// block in canonical order.
    pub fn quotient(&self, eta: &Congruence) -> Result<Self> {
        if eta.size() != self.size {
            return Err(Error::CarrierMismatch {
                left: self.size,
                right: eta.size(),
            });
        }
        let k = eta.block_count();
        let reps = eta.representatives();
        let ops = self
            .operations
            .iter()
            .map(|op| {
                let mut args = Vec::with_capacity(op.arity);
                OperationTable::from_fn(op.symbol.clone(), op.arity, k, |blocks| {
                    args.clear();
                    args.extend(blocks.iter().map(|&b| reps[b as usize]));
                    eta.block_of(op.apply(self.size, &args))
                })
            })
            .collect();
        let bound = self.max_arity().max(4);
        FiniteAlgebra::with_arity_bound(format!("{}/eta", self.name), k, ops, bound)
    }

    /// Hex digest of the canonical serialization (size, symbols, arities, tables).
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update((self.size as u32).to_le_bytes());
        for op in &self.operations {
            hasher.update((op.symbol.len() as u32).to_le_bytes());
            hasher.update(op.symbol.as_bytes());
            hasher.update((op.arity as u32).to_le_bytes());
            hasher.update(&op.table);
        }
        let digest = hasher.finalize();
        hex::encode(&digest[..8])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn z2() -> FiniteAlgebra {
        FiniteAlgebra::new("Z2", 2, vec![OperationTable::new("+", 2, vec![0, 1, 1, 0])]).unwrap()
    }

    #[test]
    fn apply_uses_leftmost_most_significant() {
        let sub = OperationTable::from_fn("-", 2, 3, |a| ((3 + a[0] - a[1]) % 3) as Element);
        assert_eq!(sub.apply(3, &[2, 0]), 2);
        assert_eq!(sub.apply(3, &[0, 2]), 1);
        assert_eq!(sub.table()[2 * 3], 2);
    }

    #[test]
    fn rejects_bad_tables() {
        let short = FiniteAlgebra::new("bad", 2, vec![OperationTable::new("+", 2, vec![0, 1, 1])]);
        assert!(matches!(short, Err(Error::InvalidAlgebra(_))));
        let big = FiniteAlgebra::new("bad", 2, vec![OperationTable::new("+", 2, vec![0, 1, 2, 0])]);
        assert!(big.is_err());
        let dup = FiniteAlgebra::new(
            "bad",
            2,
            vec![OperationTable::constant("c", 0), OperationTable::constant("c", 1)],
        );
        assert!(dup.is_err());
        let wide = FiniteAlgebra::new("bad", 2, vec![OperationTable::from_fn("w", 5, 2, |_| 0)]);
        assert!(wide.is_err());
    }

    #[test]
    fn constants_are_appended() {
        let a = z2().with_constants().unwrap();
        assert_eq!(a.operations().len(), 3);
        assert_eq!(a.operation(2).symbol(), "c1");
        assert_eq!(a.operation(2).table(), &[1]);
    }

    #[test]
    fn fingerprint_ignores_name() {
        assert_eq!(z2().fingerprint(), z2().with_name("other").fingerprint());
        assert_ne!(z2().fingerprint(), z2().with_constants().unwrap().fingerprint());
    }
}
