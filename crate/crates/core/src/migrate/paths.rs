//! Paths through a schema: chains of foreign keys, optionally ending in one
//! attribute, deduplicated modulo the schema's constraints.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::schema::{Probe, Schema};
use crate::term::{SaturationLimits, SortKind, Term, Var};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathCaps {
    /// Longest path, in symbol applications.
    pub max_depth: usize,
    /// Distinct terms explored by the breadth-first search.
    pub max_terms: usize,
}

impl Default for PathCaps {
    fn default() -> Self {
        PathCaps {
            max_depth: 16,
            max_terms: 10_000,
        }
    }
}

impl PathCaps {
    pub fn new(max_depth: usize, max_terms: usize) -> Result<Self> {
        if max_terms == 0 {
            return Err(Error::Invalid("path caps must be positive".into()));
        }
        Ok(PathCaps {
            max_depth,
            max_terms,
        })
    }
}

/// Pairwise inequivalent paths from an entity to a sort.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathSet {
    pub from: String,
    pub to: String,
    pub var: Var,
    pub paths: Vec<Term>,
    pub truncated: bool,
}

impl PathSet {
    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    /// Symbols of each path in application order.
    pub fn symbols(&self, i: usize) -> Vec<&str> {
        self.paths[i]
            .as_chain()
            .map(|(_, syms)| syms)
            .unwrap_or_default()
    }
}

/// Breadth-first enumeration of the paths `from -> to`.
///
/// Paths are ordered by length, then by outermost symbol name, then by the
/// order of the path they extend. A path provably equal to an earlier one
/// is dropped and not extended.
pub fn enumerate_paths(
    schema: &Arc<Schema>,
    from: &str,
    to: &str,
    caps: PathCaps,
) -> Result<PathSet> {
    enumerate_paths_with(schema, from, to, caps, SaturationLimits::default())
}

pub fn enumerate_paths_with(
    schema: &Arc<Schema>,
    from: &str,
    to: &str,
    caps: PathCaps,
    limits: SaturationLimits,
) -> Result<PathSet> {
    let probe = Probe::new(schema, from, limits)?;
    enumerate_paths_in(schema, &probe, from, to, caps)
}

pub(crate) fn enumerate_paths_in(
    schema: &Arc<Schema>,
    probe: &Probe,
    from: &str,
    to: &str,
    caps: PathCaps,
) -> Result<PathSet> {
    let ix = schema.index();
    let to_kind = ix
        .sort_index
        .get(to)
        .map(|&s| ix.sorts[s].kind)
        .ok_or_else(|| Error::UnknownSort(to.to_string()))?;
    let var = Var::new("v", from);
    let mut fks: Vec<_> = schema.foreign_keys.iter().collect();
    fks.sort_by(|a, b| a.name.cmp(&b.name));
    let mut atts: Vec<_> = schema.attributes.iter().filter(|a| a.out == to).collect();
    atts.sort_by(|a, b| a.name.cmp(&b.name));

    let mut out = PathSet {
        from: from.to_string(),
        to: to.to_string(),
        var: var.clone(),
        paths: Vec::new(),
        truncated: false,
    };
    // (term, sort) of every distinct entity-sorted path seen so far
    let mut seen: Vec<(Term, String)> = Vec::new();
    let mut explored = 0usize;
    let mut level = vec![(Term::Var(var.clone()), from.to_string())];
    let mut depth = 0;

    let admit = |t: Term, sort: &str, seen: &mut Vec<(Term, String)>| -> Result<bool> {
        for (s, sort_s) in seen.iter() {
            if sort_s == sort && probe.equal(s, &t)? == Some(true) {
                return Ok(false);
            }
        }
        seen.push((t, sort.to_string()));
        Ok(true)
    };

    'bfs: while !level.is_empty() {
        let mut next = Vec::new();
        for (t, sort) in &level {
            if explored == caps.max_terms {
                out.truncated = true;
                break 'bfs;
            }
            if !admit(t.clone(), sort, &mut seen)? {
                continue;
            }
            explored += 1;
            if to_kind == SortKind::Entity && sort == to {
                out.paths.push(t.clone());
            }
            if depth < caps.max_depth {
                next.push((t.clone(), sort.clone()));
            } else if fks.iter().any(|f| f.domain() == Some(sort)) {
                out.truncated = true;
            }
        }
        if to_kind == SortKind::Type {
            // attribute endings of this level, in path order
            let mut ends: Vec<(usize, usize, Term)> = Vec::new();
            for (rank, (t, sort)) in level.iter().enumerate() {
                if !seen.iter().any(|(s, _)| s == t) {
                    continue;
                }
                for (ai, a) in atts.iter().enumerate() {
                    if a.domain() != Some(sort.as_str()) {
                        continue;
                    }
                    if depth < caps.max_depth {
                        ends.push((ai, rank, Term::app(a.name.clone(), t.clone())));
                    } else {
                        out.truncated = true;
                    }
                }
            }
            ends.sort_by_key(|(ai, rank, _)| (*ai, *rank));
            'ends: for (_, _, t) in ends {
                for p in &out.paths {
                    if probe.equal(p, &t)? == Some(true) {
                        continue 'ends;
                    }
                }
                out.paths.push(t);
            }
        }
        let mut children = Vec::new();
        for (rank, (t, sort)) in next.iter().enumerate() {
            for (fi, f) in fks.iter().enumerate() {
                if f.domain() == Some(sort.as_str()) {
                    children.push((
                        fi,
                        rank,
                        Term::app(f.name.clone(), t.clone()),
                        f.out.clone(),
                    ));
                }
            }
        }
        children.sort_by_key(|(fi, rank, _, _)| (*fi, *rank));
        level = children.into_iter().map(|(_, _, t, s)| (t, s)).collect();
        depth += 1;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::fixtures::*;
    use crate::term::Equation;

    fn cyclic() -> Arc<Schema> {
        Arc::new(
            Schema::builder("C", ty())
                .entity("A")
                .entity("B")
                .foreign_key("f", "A", "B")
                .foreign_key("g", "B", "A")
                .build(),
        )
    }

    fn names(ps: &PathSet) -> Vec<String> {
        ps.paths.iter().map(Term::to_string).collect()
    }

    #[test]
    fn single_foreign_key() {
        let ps = enumerate_paths(&schema_s(), "N1", "N2", PathCaps::default()).unwrap();
        assert_eq!(names(&ps), ["f(v)"]);
        assert!(!ps.truncated);
    }

    #[test]
    fn identity_path_included() {
        let ps = enumerate_paths(&schema_s(), "N1", "N1", PathCaps::default()).unwrap();
        assert_eq!(names(&ps), ["v"]);
    }

    #[test]
    fn cyclic_schema_truncates() {
        let ps = enumerate_paths(&cyclic(), "A", "A", PathCaps::new(100, 4).unwrap()).unwrap();
        assert_eq!(names(&ps), ["v", "g(f(v))"]);
        assert!(ps.truncated);
    }

    #[test]
    fn constraint_collapses_cycle() {
        let v = Var::new("x", "A");
        let mut sch = (*cyclic()).clone();
        sch.constraints.push(Equation::forall(
            v.clone(),
            Term::app("g", Term::app("f", Term::Var(v.clone()))),
            Term::Var(v),
        ));
        let sch = Arc::new(Schema::new(
            sch.name,
            sch.typeside,
            sch.entities,
            sch.foreign_keys,
            sch.attributes,
            sch.constraints,
        ));
        let ps = enumerate_paths(&sch, "A", "A", PathCaps::default()).unwrap();
        assert_eq!(names(&ps), ["v"]);
        assert!(!ps.truncated);
    }

    #[test]
    fn paths_to_types() {
        let ps = enumerate_paths(&schema_s(), "N1", "Int", PathCaps::default()).unwrap();
        assert_eq!(names(&ps), ["salary(v)", "age(f(v))"]);
        let ps = enumerate_paths(&schema_s(), "N2", "String", PathCaps::default()).unwrap();
        assert!(ps.is_empty());
    }
}
