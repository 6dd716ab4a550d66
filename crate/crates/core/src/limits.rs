/// Resource bounds shared by every closure and enumeration.
///
/// The defaults keep computations at desk scale; all of them can be raised
/// explicitly by the caller.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Limits {
    /// Maximum number of tuples a single subpower closure may reach.
    pub max_tuples: usize,
    /// Maximum arity of a basic operation in an input algebra.
    pub max_op_arity: usize,
    /// Largest carrier for which the congruence lattice is enumerated.
    pub max_lattice_carrier: usize,
    /// Largest hypercube dimension for Δ. `None` selects the size-dependent default.
    pub max_dimension: Option<usize>,
    /// Cube identities are checked exhaustively while `m^(2^(n-1))` stays below this.
    pub exhaustive_verify_budget: u64,
    /// Random assignments per identity when exhaustive checking is too expensive.
    pub verify_samples: usize,
    /// Maximum number of operation tables of one arity enumerated for polymorphisms.
    pub table_budget: u64,
    /// Congruence tuples evaluated exhaustively by the HC suite before it samples.
    pub hc_tuple_budget: usize,
    /// Seed for every randomized step (sampling, maximality probes).
    pub seed: u64,
}

pub const DEFAULT_MAX_TUPLES: usize = 5_000_000;

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_tuples: DEFAULT_MAX_TUPLES,
            max_op_arity: 4,
            max_lattice_carrier: 12,
            max_dimension: None,
            exhaustive_verify_budget: 1 << 20,
            verify_samples: 100_000,
            table_budget: 20_000,
            hc_tuple_budget: 5_000,
            seed: 0x5eed_c0de,
        }
    }
}

impl Limits {
    /// Dimension cap for Δ over a carrier of `m` elements.
    pub fn dimension_cap(&self, m: usize) -> usize {
        match self.max_dimension {
            Some(d) => d,
            None if m <= 3 => 4,
            None => 3,
        }
    }
}
