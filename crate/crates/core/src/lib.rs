//! Algebraic model management.
//!
//! Schemas and instances are equational theories; an instance means its
//! term model. Schema mappings induce the data migrations Δ, Σ and Π, and
//! the matcher proposes mappings from names alone. The [`dsl`] module
//! reads `.catq` programs and [`cli`] drives everything from the shell.

pub mod cli;
pub mod dsl;
pub mod error;
pub mod matcher;
pub mod migrate;
pub mod schema;
pub mod term;

pub use error::{Error, Result};
pub use matcher::{match_mapping, match_span, similarity, MatchResult, SimilarityConfig};
pub use migrate::{
    coproduct, counit_pi, counit_sigma, delta, enumerate_morphisms, enumerate_paths,
    instances_isomorphic, invert_mapping, pi, sigma, transpose, unit_pi, unit_sigma, Adjunction,
    Direction, InstanceMorphism, InversionBounds, MigrationResult, PathCaps,
};
pub use schema::{
    apply_mapping_term, compose_mappings, mappings_equal, validate_instance, validate_mapping,
    validate_schema, validate_typeside, InstancePresentation, Mapping, Schema, Typeside,
};
pub use term::{
    build_term_model, canonical_label, check_consistency, decide_equal, Collision, Literal,
    SaturationLimits, Term, TermModel,
};
