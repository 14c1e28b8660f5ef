//! The data-migration functors Δ, Σ and Π, their adjunctions, instance
//! morphisms, coproducts and mapping inversion.

pub mod adjunction;
pub mod coproduct;
pub mod delta;
pub mod invert;
pub mod morphism;
pub mod paths;
pub mod pi;
pub mod sigma;

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use indexmap::IndexMap;

use crate::schema::{InstancePresentation, Mapping};
use crate::term::{ClassId, Collision, Term, TermModel};

pub use adjunction::{
    counit_pi, counit_sigma, delta_morphism, pi_morphism, sigma_morphism, transpose, unit_pi,
    unit_sigma, Adjunction, Direction,
};
pub use coproduct::coproduct;
pub use delta::delta;
pub use invert::{invert_mapping, InversionBounds};
pub use morphism::{count_morphisms, enumerate_morphisms, instances_isomorphic, InstanceMorphism};
pub use paths::{enumerate_paths, PathCaps, PathSet};
pub use pi::{pi, pi_with};
pub use sigma::sigma;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MigrationKind {
    Delta,
    Sigma,
    Pi,
}

impl fmt::Display for MigrationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MigrationKind::Delta => "delta",
            MigrationKind::Sigma => "sigma",
            MigrationKind::Pi => "pi",
        })
    }
}

/// The output of a migration together with the presentation it was
/// computed from.
#[derive(Debug, Clone)]
pub struct MigrationResult {
    pub kind: MigrationKind,
    pub mapping: Mapping,
    /// Name of the input instance.
    pub input: String,
    pub presentation: Arc<InstancePresentation>,
    pub output: Arc<TermModel>,
    /// Set when the output proves two distinct literals equal.
    pub collision: Option<Collision>,
    pub(crate) origin: Origin,
}

impl MigrationResult {
    pub fn is_consistent(&self) -> bool {
        self.collision.is_none()
    }
}

#[derive(Debug, Clone, Default)]
pub(crate) enum Origin {
    #[default]
    None,
    Delta(DeltaOrigin),
    Pi(PiOrigin),
}

/// Where the rows of `Δ_F(J)` come from.
#[derive(Debug, Clone, Default)]
pub(crate) struct DeltaOrigin {
    /// Output generator -> (source entity, class of `J` at its image).
    pub rows: IndexMap<String, (String, ClassId)>,
    pub index: HashMap<(String, ClassId), String>,
    /// Type classes of `J` reached by some attribute -> a term naming them.
    pub types: HashMap<ClassId, Term>,
}

/// The comma objects and families behind the rows of `Π_F(I)`.
#[derive(Debug, Clone, Default)]
pub(crate) struct PiOrigin {
    /// Per target entity: `(source entity, path)` comma objects.
    pub comma: IndexMap<String, Vec<(String, Term)>>,
    /// Output generator -> (target entity, family).
    pub rows: IndexMap<String, (String, Vec<ClassId>)>,
    pub index: HashMap<(String, Vec<ClassId>), String>,
    /// Type generators of the output, by the input class they stand for.
    pub nulls: HashMap<ClassId, String>,
}

impl MigrationResult {
    pub(crate) fn delta_origin(&self) -> Option<&DeltaOrigin> {
        match &self.origin {
            Origin::Delta(d) => Some(d),
            _ => None,
        }
    }

    pub(crate) fn pi_origin(&self) -> Option<&PiOrigin> {
        match &self.origin {
            Origin::Pi(p) => Some(p),
            _ => None,
        }
    }
}

/// Picks a generator name not in `taken`, starting from `base`.
pub(crate) fn fresh_name(base: &str, taken: &dyn Fn(&str) -> bool) -> String {
    if !taken(base) {
        return base.to_string();
    }
    (2..)
        .map(|k| format!("{base}_{k}"))
        .find(|n| !taken(n))
        .expect("unbounded supply of names")
}

#[cfg(test)]
pub(crate) mod fixtures {
    //! The fk-free variants of the running schemas and their instance.

    use super::*;
    use crate::schema::fixtures::*;
    use crate::schema::Schema;
    use crate::term::{build_term_model, SaturationLimits};

    pub fn schema_s0() -> Arc<Schema> {
        Arc::new(
            Schema::builder("S0", ty())
                .entity("N1")
                .entity("N2")
                .attribute("name", "N1", "String")
                .attribute("salary", "N1", "Int")
                .attribute("age", "N2", "Int")
                .build(),
        )
    }

    pub fn mapping_f0() -> Mapping {
        Mapping::new("F0", schema_s0(), schema_t())
            .with_entity("N1", "N")
            .with_entity("N2", "N")
            .with_path("name", &["name"])
            .with_path("salary", &["salary"])
            .with_path("age", &["age"])
    }

    /// Three N1 rows and three N2 rows, unlinked.
    pub fn instance_i0() -> InstancePresentation {
        let mut eqs = Vec::new();
        for (g, name, salary) in [("1", "Alice", 100), ("2", "Bob", 250), ("3", "Sue", 300)] {
            eqs.push(eq(att("name", g), s(name)));
            eqs.push(eq(att("salary", g), n(salary)));
        }
        for (g, age) in [("4", 20), ("5", 20), ("6", 30)] {
            eqs.push(eq(att("age", g), n(age)));
        }
        InstancePresentation::from_parts(
            "I0",
            schema_s0(),
            &[
                ("1", "N1"),
                ("2", "N1"),
                ("3", "N1"),
                ("4", "N2"),
                ("5", "N2"),
                ("6", "N2"),
            ],
            eqs,
        )
    }

    /// The single joined table over T.
    pub fn instance_j() -> InstancePresentation {
        let mut eqs = Vec::new();
        for (g, name, salary, age) in [
            ("a", "Alice", 100, 20),
            ("b", "Bob", 250, 20),
            ("c", "Sue", 300, 30),
        ] {
            eqs.push(eq(att("name", g), s(name)));
            eqs.push(eq(att("salary", g), n(salary)));
            eqs.push(eq(att("age", g), n(age)));
        }
        InstancePresentation::from_parts(
            "J",
            schema_t(),
            &[("a", "N"), ("b", "N"), ("c", "N")],
            eqs,
        )
    }

    pub fn model(inst: InstancePresentation) -> Arc<TermModel> {
        Arc::new(build_term_model(Arc::new(inst), SaturationLimits::default()).unwrap())
    }
}
