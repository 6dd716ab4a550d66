//! The JSON algebra file and algebra argument resolution.

use std::path::Path;

use hicomm::malcev::MalcevTerm;
use hicomm::{zoo, Element, FiniteAlgebra, OperationTable, Term};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperationEntry {
    pub symbol: String,
    pub arity: usize,
    /// Row-major over argument tuples, leftmost argument most significant.
    pub table: Vec<Element>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraFile {
    pub name: String,
    pub size: usize,
    pub operations: Vec<OperationEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub malcev_term: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub with_constants: Option<bool>,
}

/// An algebra together with the Mal'cev term its file supplied, if any.
pub struct Loaded {
    pub algebra: FiniteAlgebra,
    pub malcev: Option<MalcevTerm>,
}

impl AlgebraFile {
    pub fn from_algebra(alg: &FiniteAlgebra) -> AlgebraFile {
        AlgebraFile {
            name: alg.name().to_string(),
            size: alg.size(),
            operations: alg
                .operations()
                .iter()
                .map(|op| OperationEntry {
                    symbol: op.symbol().to_string(),
                    arity: op.arity(),
                    table: op.table().to_vec(),
                })
                .collect(),
            malcev_term: None,
            with_constants: None,
        }
    }

    pub fn parse(text: &str) -> Result<AlgebraFile, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Usage(format!("algebra file: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("algebra files always serialize")
    }

    /// Builds and validates the algebra; a supplied Mal'cev term must verify.
    pub fn load(&self, max_arity: usize) -> Result<Loaded, CliError> {
        let mut ops = Vec::with_capacity(self.operations.len());
        for (i, op) in self.operations.iter().enumerate() {
            let expected = self.size.checked_pow(op.arity as u32).unwrap_or(usize::MAX);
            if op.table.len() != expected {
                return Err(CliError::Usage(format!(
                    "algebra file: operations[{i}] (`{}`): table has {} entries, arity {} over {} elements needs {expected}",
                    op.symbol,
                    op.table.len(),
                    op.arity,
                    self.size
                )));
            }
            ops.push(OperationTable::new(op.symbol.clone(), op.arity, op.table.clone()));
        }
        let mut algebra = FiniteAlgebra::with_arity_bound(self.name.clone(), self.size, ops, max_arity)
            .map_err(|e| CliError::Usage(format!("algebra file: {e}")))?;
        if self.with_constants == Some(true) {
            algebra = algebra.with_constants()?;
        }
        let malcev = match &self.malcev_term {
            None => None,
            Some(text) => {
                let term: Term = text
                    .parse()
                    .map_err(|e| CliError::Usage(format!("algebra file: malcev_term: {e}")))?;
                Some(MalcevTerm::verify(&algebra, term).map_err(|e| {
                    CliError::Usage(format!("algebra file: malcev_term `{text}` does not verify: {e}"))
                })?)
            }
        };
        Ok(Loaded { algebra, malcev })
    }
}

/// Resolves `zoo:NAME` or a path to an algebra file.
pub fn resolve(spec: &str, with_constants: bool, max_arity: usize) -> Result<Loaded, CliError> {
    let mut loaded = match spec.strip_prefix("zoo:") {
        Some(name) => Loaded {
            algebra: zoo::zoo(name).map_err(|e| CliError::Usage(e.to_string()))?,
            malcev: None,
        },
        None => {
            let text = std::fs::read_to_string(Path::new(spec))
                .map_err(|e| CliError::Usage(format!("cannot read `{spec}`: {e}")))?;
            AlgebraFile::parse(&text)?.load(max_arity)?
        }
    };
    if with_constants {
        // a Mal'cev term of the reduct stays one of the expansion
        let expanded = loaded.algebra.with_constants()?;
        loaded.malcev = match loaded.malcev {
            Some(q) => Some(MalcevTerm::verify(&expanded, q.term().clone())?),
            None => None,
        };
        loaded.algebra = expanded;
    }
    Ok(loaded)
}

#[cfg(test)]
mod tests {
    use super::*;

    const Z2: &str = r#"{"name":"z2","size":2,"operations":[{"symbol":"+","arity":2,"table":[0,1,1,0]}]}"#;

    #[test]
    fn parses_z2() {
        let loaded = AlgebraFile::parse(Z2).unwrap().load(4).unwrap();
        assert_eq!(loaded.algebra.size(), 2);
        assert_eq!(loaded.algebra.operation(0).apply(2, &[1, 1]), 0);
        assert!(loaded.malcev.is_none());
    }

    #[test]
    fn accepts_a_valid_malcev_term() {
        let mut file = AlgebraFile::parse(Z2).unwrap();
        file.malcev_term = Some("(+ x0 (+ x1 x2))".into());
        let loaded = file.load(4).unwrap();
        let q = loaded.malcev.unwrap();
        for x in 0..2 {
            for y in 0..2 {
                assert_eq!(q.eval(&loaded.algebra, x, y, y), x);
                assert_eq!(q.eval(&loaded.algebra, x, x, y), y);
            }
        }
    }

    #[test]
    fn rejects_a_false_malcev_term() {
        let mut file = AlgebraFile::parse(Z2).unwrap();
        file.malcev_term = Some("(+ x0 x1)".into());
        assert!(matches!(file.load(4), Err(CliError::Usage(_))));
    }

    #[test]
    fn rejects_short_tables() {
        let bad = r#"{"name":"bad","size":2,"operations":[{"symbol":"+","arity":2,"table":[0,1,1]}]}"#;
        let err = AlgebraFile::parse(bad).unwrap().load(4).err().unwrap();
        let CliError::Usage(msg) = err else { panic!() };
        assert!(msg.contains("operations[0]"), "{msg}");
    }

    #[test]
    fn constants_are_appended() {
        let mut file = AlgebraFile::parse(Z2).unwrap();
        file.with_constants = Some(true);
        let alg = file.load(4).unwrap().algebra;
        assert_eq!(alg.operations().len(), 3);
        assert_eq!(alg.operation(2).symbol(), "c1");
    }

    #[test]
    fn round_trip_is_identity() {
        for name in zoo::all_names() {
            let alg = zoo::zoo(&name).unwrap();
            let file = AlgebraFile::from_algebra(&alg);
            let again = AlgebraFile::parse(&file.to_json()).unwrap();
            assert_eq!(again, file);
            let rebuilt = again.load(4).unwrap().algebra;
            assert_eq!(rebuilt.fingerprint(), alg.fingerprint());
            assert_eq!(AlgebraFile::from_algebra(&rebuilt), file);
        }
    }
}
