//! Higher commutators of congruences on finite algebras.
//!
//! The crate computes the relations `Δ(α₀, …, α_{n−1})` generated by
//! hypercube tuples, extracts higher commutators from their forks, checks the
//! result against the term-condition definition, and verifies the structural
//! laws of higher commutators on concrete algebras. It also builds Mal'cev and
//! strong cube terms and explores polymorphism clones of `Δ` at bounded arity.
//!
//! Everything here is `no_std` with `alloc`; file formats and the command
//! line live in a separate crate.

#![no_std]

extern crate alloc;

pub mod algebra;
pub mod clone;
pub mod closure;
pub mod commutator;
pub mod error;
pub mod hc;
pub mod hypercube;
pub mod lattice;
pub mod limits;
pub mod malcev;
pub mod partition;
pub mod relation;
pub mod term;
pub mod zoo;

pub use algebra::{Element, FiniteAlgebra, OperationTable};
pub use clone::{check_largest_clone, largest_commutator_preserving_clone, polymorphisms, PolymorphismSet};
pub use closure::{sg_power, ClosurePlan};
pub use commutator::{
    centralizes, commutator_forks, commutator_termcond, delta, delta_join_check, delta_membership,
    supernilpotence_degree, CommutatorEngine, Method,
};
pub use error::{Error, Result};
pub use hc::{hc_suite, HcReport};
pub use hypercube::{face_projection, flip, forks, generator_tuple, reindex, CubeRelation, IndexMap};
pub use lattice::{con_lattice, CongruenceLattice};
pub use limits::Limits;
pub use malcev::{find_malcev_term, strong_cube_term, verify_strong_cube, CubeTermWitness, MalcevTerm};
pub use partition::{cg, is_congruence, join, meet, Congruence, PairSet, Partition};
pub use relation::TupleRelation;
pub use term::{eval_term, CompiledTerm, Term};
