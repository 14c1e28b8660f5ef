//! Name-based schema matching: a candidate mapping, or a span of
//! projections out of an apex of similar pairs.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::migrate::{enumerate_paths, fresh_name, PathCaps};
use crate::schema::{validate_mapping, Mapping, Schema};
use crate::term::{FunctionSymbol, SymbolFlavor};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityConfig {
    /// Strict lower bound on similarity for apex pairs.
    pub cutoff: f64,
    pub case_sensitive: bool,
}

impl Default for SimilarityConfig {
    fn default() -> Self {
        SimilarityConfig {
            cutoff: 0.5,
            case_sensitive: false,
        }
    }
}

impl SimilarityConfig {
    pub fn new(cutoff: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&cutoff) {
            return Err(Error::Invalid(format!("cutoff {cutoff} is outside [0, 1]")));
        }
        Ok(SimilarityConfig {
            cutoff,
            ..Default::default()
        })
    }

    pub fn similarity(&self, a: &str, b: &str) -> f64 {
        if self.case_sensitive {
            similarity(a, b)
        } else {
            similarity(&a.to_lowercase(), &b.to_lowercase())
        }
    }
}

/// Normalized Levenshtein similarity, `1 - d(a, b) / max(|a|, |b|)`.
pub fn similarity(a: &str, b: &str) -> f64 {
    strsim::normalized_levenshtein(a, b)
}

/// One decision of the matcher and its similarity score, if it came from a
/// direct name comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub from: String,
    pub to: String,
    pub score: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct CandidateMapping {
    pub mapping: Mapping,
    pub scores: Vec<Assignment>,
    pub validated: bool,
    pub validation_error: Option<Error>,
}

#[derive(Debug, Clone)]
pub struct Span {
    pub apex: Arc<Schema>,
    /// Projection onto the first schema.
    pub left: Mapping,
    /// Projection onto the second schema.
    pub right: Mapping,
    pub scores: Vec<Assignment>,
}

impl Span {
    pub fn is_empty(&self) -> bool {
        self.apex.entities.is_empty()
    }
}

#[derive(Debug, Clone)]
pub enum MatchResult {
    Candidate(CandidateMapping),
    Span(Span),
}

fn check_typesides(s: &Schema, t: &Schema) -> Result<()> {
    if s.typeside != t.typeside {
        return Err(Error::SchemaMismatch(format!(
            "`{}` and `{}` have different typesides",
            s.name, t.name
        )));
    }
    Ok(())
}

/// Each entity goes to its most similar target entity, each symbol to its
/// most similar target symbol with the right ends, or else to a shortest
/// path between them.
pub fn match_mapping(
    s: &Arc<Schema>,
    t: &Arc<Schema>,
    cfg: &SimilarityConfig,
) -> Result<MatchResult> {
    check_typesides(s, t)?;
    let mut m = Mapping::new(
        format!("match_{}_{}", s.name, t.name),
        Arc::clone(s),
        Arc::clone(t),
    );
    let mut scores = Vec::new();
    for e in &s.entities {
        let mut best: Option<(&String, f64)> = None;
        for te in &t.entities {
            let score = cfg.similarity(e, te);
            if best.is_none_or(|(_, b)| score > b) {
                best = Some((te, score));
            }
        }
        let Some((te, score)) = best else {
            return Err(Error::Invalid(format!(
                "`{}` has no entities to match `{e}` with",
                t.name
            )));
        };
        m = m.with_entity(e, te);
        scores.push(Assignment {
            from: e.clone(),
            to: te.clone(),
            score: Some(score),
        });
    }
    for sym in s.unary_symbols() {
        let from = m.entity(sym.domain().unwrap_or_default())?.to_string();
        let to = m.sort(&sym.out)?;
        let mut xs: Vec<&FunctionSymbol> = t
            .unary_symbols()
            .filter(|g| g.domain() == Some(from.as_str()) && g.out == to)
            .collect();
        xs.sort_by(|a, b| a.name.cmp(&b.name));
        let mut best: Option<(&FunctionSymbol, f64)> = None;
        for g in xs {
            let score = cfg.similarity(&sym.name, &g.name);
            if best.is_none_or(|(_, b)| score > b) {
                best = Some((g, score));
            }
        }
        if let Some((g, score)) = best {
            m = m.with_path(&sym.name, &[g.name.as_str()]);
            scores.push(Assignment {
                from: sym.name.clone(),
                to: g.name.clone(),
                score: Some(score),
            });
            continue;
        }
        let paths = enumerate_paths(t, &from, &to, PathCaps::default())?;
        let Some(p) = paths.paths.first() else {
            return Err(Error::NoPathForSymbol(sym.name.clone()));
        };
        m = m.with_term(&sym.name, p.clone());
        let shown = m.image(&sym.name)?.body.to_string();
        scores.push(Assignment {
            from: sym.name.clone(),
            to: shown,
            score: None,
        });
    }
    let validation_error = validate_mapping(&m).err();
    Ok(MatchResult::Candidate(CandidateMapping {
        mapping: m,
        scores,
        validated: validation_error.is_none(),
        validation_error,
    }))
}

/// The apex has an entity for each pair of entities more similar than the
/// cutoff, and a symbol for each similar pair of symbols between such
/// pairs. Both legs are projections.
pub fn match_span(s: &Arc<Schema>, t: &Arc<Schema>, cfg: &SimilarityConfig) -> Result<MatchResult> {
    check_typesides(s, t)?;
    let mut names: Vec<String> = Vec::new();
    let mut pairs: Vec<(String, &str, &str)> = Vec::new();
    let mut scores = Vec::new();
    let taken =
        |names: &Vec<String>, n: &str| names.iter().any(|x| x == n) || s.typeside.has_type(n);
    for e in &s.entities {
        for te in &t.entities {
            let score = cfg.similarity(e, te);
            if score > cfg.cutoff {
                let name = fresh_name(&format!("{e}_{te}"), &|n| taken(&names, n));
                names.push(name.clone());
                pairs.push((name.clone(), e, te));
                scores.push(Assignment {
                    from: e.clone(),
                    to: te.clone(),
                    score: Some(score),
                });
            }
        }
    }
    let pair_of = |a: &str, b: &str| {
        pairs
            .iter()
            .find(|(_, x, y)| *x == a && *y == b)
            .map(|(n, _, _)| n.clone())
    };
    let mut fks = Vec::new();
    let mut atts = Vec::new();
    let mut sym_pairs: Vec<(String, &str, &str)> = Vec::new();
    for f in s.unary_symbols() {
        for g in t.unary_symbols() {
            if f.flavor != g.flavor || cfg.similarity(&f.name, &g.name) <= cfg.cutoff {
                continue;
            }
            let (Some(dom), Some(gdom)) = (f.domain(), g.domain()) else {
                continue;
            };
            let Some(apex_dom) = pair_of(dom, gdom) else {
                continue;
            };
            let out = match f.flavor {
                SymbolFlavor::ForeignKey => match pair_of(&f.out, &g.out) {
                    Some(o) => o,
                    None => continue,
                },
                _ if f.out == g.out => f.out.clone(),
                _ => continue,
            };
            let name = fresh_name(&format!("{}_{}", f.name, g.name), &|n| taken(&names, n));
            names.push(name.clone());
            let sym = FunctionSymbol::unary(name.clone(), apex_dom, out, f.flavor);
            if f.flavor == SymbolFlavor::ForeignKey {
                fks.push(sym);
            } else {
                atts.push(sym);
            }
            sym_pairs.push((name, &f.name, &g.name));
        }
    }
    let apex = Arc::new(Schema::new(
        format!("span_{}_{}", s.name, t.name),
        Arc::clone(&s.typeside),
        pairs.iter().map(|(n, _, _)| n.clone()).collect(),
        fks,
        atts,
        Vec::new(),
    ));
    let mut left = Mapping::new(
        format!("{}_{}", apex.name, s.name),
        Arc::clone(&apex),
        Arc::clone(s),
    );
    let mut right = Mapping::new(
        format!("{}_{}", apex.name, t.name),
        Arc::clone(&apex),
        Arc::clone(t),
    );
    for (n, a, b) in &pairs {
        left = left.with_entity(n, a);
        right = right.with_entity(n, b);
    }
    for (n, a, b) in &sym_pairs {
        left = left.with_path(n, &[a]);
        right = right.with_path(n, &[b]);
    }
    Ok(MatchResult::Span(Span {
        apex,
        left,
        right,
        scores,
    }))
}

impl MatchResult {
    pub fn candidate(&self) -> Option<&CandidateMapping> {
        match self {
            MatchResult::Candidate(c) => Some(c),
            MatchResult::Span(_) => None,
        }
    }

    pub fn span(&self) -> Option<&Span> {
        match self {
            MatchResult::Span(s) => Some(s),
            MatchResult::Candidate(_) => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::migrate::fixtures::schema_s0;
    use crate::schema::fixtures::*;
    use crate::schema::mapping::fixtures::mapping_f;
    use crate::schema::{mappings_equal, validate_mapping};

    #[test]
    fn similarity_values() {
        assert_eq!(similarity("N1", "N1"), 1.0);
        assert_eq!(similarity("N1", "N"), 0.5);
        assert_eq!(similarity("name", "age"), 0.5);
        assert_eq!(similarity("", ""), 1.0);
        assert_eq!(similarity("ab", "cd"), 0.0);
    }

    #[test]
    fn case_folding() {
        let cfg = SimilarityConfig::default();
        assert_eq!(cfg.similarity("Name", "name"), 1.0);
        let strict = SimilarityConfig {
            case_sensitive: true,
            ..cfg
        };
        assert_eq!(strict.similarity("Name", "name"), 0.75);
    }

    #[test]
    fn cutoff_is_checked() {
        assert!(SimilarityConfig::new(1.5).is_err());
        assert!(SimilarityConfig::new(-0.1).is_err());
    }

    #[test]
    fn running_example_matches() {
        let r = match_mapping(&schema_s(), &schema_t(), &SimilarityConfig::default()).unwrap();
        let c = r.candidate().unwrap();
        assert!(c.validated);
        assert!(mappings_equal(&c.mapping, &mapping_f()).unwrap());
        assert_eq!(c.mapping.image("f").unwrap().as_path(), Some(vec![]));
        assert_eq!(
            c.mapping.image("salary").unwrap().as_path(),
            Some(vec!["salary"])
        );
    }

    #[test]
    fn self_match_is_identity() {
        let s = schema_s();
        let r = match_mapping(&s, &s, &SimilarityConfig::default()).unwrap();
        assert!(mappings_equal(&r.candidate().unwrap().mapping, &Mapping::identity(&s)).unwrap());
    }

    #[test]
    fn empty_x_gives_identity_path() {
        let s = Arc::new(
            Schema::builder("S", ty())
                .entity("A")
                .entity("B")
                .foreign_key("f", "A", "B")
                .build(),
        );
        let t = Arc::new(Schema::builder("T", ty()).entity("E").build());
        let r = match_mapping(&s, &t, &SimilarityConfig::default()).unwrap();
        let c = r.candidate().unwrap();
        assert_eq!(c.mapping.image("f").unwrap().as_path(), Some(vec![]));
        assert!(c.validated);
    }

    #[test]
    fn missing_path_is_reported() {
        let s = Arc::new(
            Schema::builder("S", ty())
                .entity("A")
                .attribute("a", "A", "Int")
                .build(),
        );
        let t = Arc::new(Schema::builder("T", ty()).entity("E").build());
        let err = match_mapping(&s, &t, &SimilarityConfig::default()).unwrap_err();
        assert!(matches!(err, Error::NoPathForSymbol(ref n) if n == "a"));
    }

    #[test]
    fn span_of_running_example() {
        let r = match_span(
            &schema_s(),
            &schema_t(),
            &SimilarityConfig::new(0.4).unwrap(),
        )
        .unwrap();
        let sp = r.span().unwrap();
        assert_eq!(sp.apex.entities, ["N1_N", "N2_N"]);
        let atts: Vec<_> = sp.apex.attributes.iter().map(|a| a.name.as_str()).collect();
        for want in ["name_name", "salary_salary", "age_age"] {
            assert!(atts.contains(&want), "{want}");
        }
        validate_mapping(&sp.left).unwrap();
        validate_mapping(&sp.right).unwrap();
    }

    #[test]
    fn span_of_schema_with_itself() {
        let s = schema_s0();
        let r = match_span(&s, &s, &SimilarityConfig::new(0.99).unwrap()).unwrap();
        let sp = r.span().unwrap();
        assert_eq!(sp.apex.entities.len(), 2);
        assert_eq!(sp.apex.attributes.len(), 3);
        assert!(sp
            .left
            .entity_map
            .iter()
            .all(|(a, b)| a == &format!("{b}_{b}")));
    }

    #[test]
    fn full_cutoff_gives_empty_apex() {
        let r = match_span(
            &schema_s(),
            &schema_t(),
            &SimilarityConfig::new(1.0).unwrap(),
        )
        .unwrap();
        assert!(r.span().unwrap().is_empty());
    }
}
