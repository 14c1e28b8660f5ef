//! Bounded search for inverse mappings.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::migrate::paths::{enumerate_paths_in, PathCaps};
use crate::schema::mapping::compose_unchecked;
use crate::schema::{
    apply_mapping_term, mappings_equal_with, validate_mapping_with, Mapping, Probe,
};
use crate::term::{SaturationLimits, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InversionBounds {
    /// Longest path considered as the image of a symbol.
    pub depth: usize,
    /// Most candidate mappings tried before giving up.
    pub candidate_cap: usize,
    pub limits: SaturationLimits,
}

impl Default for InversionBounds {
    fn default() -> Self {
        InversionBounds {
            depth: 3,
            candidate_cap: 1_000_000,
            limits: SaturationLimits::default(),
        }
    }
}

/// Searches for `G : T -> S` with `G ∘ F = id_S` and `F ∘ G = id_T`.
///
/// Entity assignments are tried in lexicographic order over the entities of
/// `S`, then each symbol of `T` over its paths up to `bounds.depth`.
/// `Ok(None)` means the whole bounded space was searched. If the space was
/// cut short by a cap and nothing was found the result is `ResourceLimit`.
pub fn invert_mapping(f: &Mapping, bounds: InversionBounds) -> Result<Option<Mapping>> {
    let (s, t) = (&f.source, &f.target);
    if s.typeside != t.typeside {
        return Ok(None);
    }
    let caps = PathCaps::new(bounds.depth, 10_000)?;
    let mut truncated = false;
    let mut tried = 0usize;
    let mut assignment = vec![0usize; t.entities.len()];
    if s.entities.is_empty() && !t.entities.is_empty() {
        return Ok(None);
    }
    let t_probes = t
        .entities
        .iter()
        .map(|e| Probe::new(t, e, bounds.limits))
        .collect::<Result<Vec<_>>>()?;
    let id_s = Mapping::identity(s);
    let id_t = Mapping::identity(t);
    loop {
        let g_ent: Vec<&str> = assignment.iter().map(|&k| s.entities[k].as_str()).collect();
        if entities_invert(f, &g_ent)? {
            let mut base = Mapping::new(format!("{}_inv", f.name), Arc::clone(t), Arc::clone(s));
            for (te, se) in t.entities.iter().zip(&g_ent) {
                base = base.with_entity(te, se);
            }
            let mut choices: Vec<(String, Vec<Term>)> = Vec::new();
            for sym in t.unary_symbols() {
                let dom = sym.domain().unwrap_or_default();
                let from = base.entity(dom)?.to_string();
                let to = base.sort(&sym.out)?;
                let s_probe = Probe::new(s, &from, bounds.limits)?;
                let paths = enumerate_paths_in(s, &s_probe, &from, &to, caps)?;
                truncated |= paths.truncated;
                let probe = &t_probes[t.entities.iter().position(|e| e == dom).unwrap_or(0)];
                let want = Term::app(sym.name.clone(), Term::var("v", dom));
                let mut ok = Vec::new();
                for p in paths.paths {
                    let image = apply_mapping_term(f, &p)?;
                    if probe.equal(&image, &want)? != Some(false) {
                        ok.push(p);
                    }
                }
                choices.push((sym.name.clone(), ok));
            }
            if let Some(g) = search(
                f,
                &base,
                &choices,
                &id_s,
                &id_t,
                bounds,
                &mut tried,
                &mut truncated,
            )? {
                return Ok(Some(g));
            }
        }
        if !next_assignment(&mut assignment, s.entities.len()) {
            break;
        }
    }
    if truncated {
        return Err(Error::ResourceLimit(format!(
            "inversion of `{}` was cut short before finding an inverse",
            f.name
        )));
    }
    Ok(None)
}

fn entities_invert(f: &Mapping, g_ent: &[&str]) -> Result<bool> {
    let (s, t) = (&f.source, &f.target);
    let g = |te: &str| t.entities.iter().position(|e| e == te).map(|k| g_ent[k]);
    for e in &s.entities {
        if g(f.entity(e)?) != Some(e.as_str()) {
            return Ok(false);
        }
    }
    for (k, te) in t.entities.iter().enumerate() {
        if f.entity(g_ent[k])? != te {
            return Ok(false);
        }
    }
    Ok(true)
}

fn next_assignment(a: &mut [usize], base: usize) -> bool {
    for d in a.iter_mut().rev() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

#[allow(clippy::too_many_arguments)]
fn search(
    f: &Mapping,
    base: &Mapping,
    choices: &[(String, Vec<Term>)],
    id_s: &Mapping,
    id_t: &Mapping,
    bounds: InversionBounds,
    tried: &mut usize,
    truncated: &mut bool,
) -> Result<Option<Mapping>> {
    if choices.iter().any(|(_, c)| c.is_empty()) {
        return Ok(None);
    }
    let mut pick = vec![0usize; choices.len()];
    loop {
        if *tried >= bounds.candidate_cap {
            *truncated = true;
            return Ok(None);
        }
        *tried += 1;
        let mut g = base.clone();
        for ((sym, cands), &k) in choices.iter().zip(&pick) {
            g = g.with_term(sym, cands[k].clone());
        }
        if validate_mapping_with(&g, bounds.limits).is_ok()
            && mappings_equal_with(&compose_unchecked(f, &g)?, id_s, bounds.limits)?
            && mappings_equal_with(&compose_unchecked(&g, f)?, id_t, bounds.limits)?
        {
            return Ok(Some(g));
        }
        let mut advanced = false;
        for (d, (_, cands)) in pick.iter_mut().zip(choices).rev() {
            *d += 1;
            if *d < cands.len() {
                advanced = true;
                break;
            }
            *d = 0;
        }
        if !advanced {
            return Ok(None);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::fixtures::*;
    use crate::schema::mapping::fixtures::mapping_f;
    use crate::schema::{mappings_equal, Schema};

    fn renamed() -> Arc<Schema> {
        Arc::new(
            Schema::builder("S2", ty())
                .entity("M1")
                .entity("M2")
                .foreign_key("f", "M1", "M2")
                .attribute("name", "M1", "String")
                .attribute("salary", "M1", "Int")
                .attribute("age", "M2", "Int")
                .build(),
        )
    }

    fn renaming() -> Mapping {
        Mapping::new("R", schema_s(), renamed())
            .with_entity("N1", "M1")
            .with_entity("N2", "M2")
            .with_path("f", &["f"])
            .with_path("name", &["name"])
            .with_path("salary", &["salary"])
            .with_path("age", &["age"])
    }

    #[test]
    fn identity_inverts_to_identity() {
        let id = Mapping::identity(&schema_s());
        let g = invert_mapping(&id, InversionBounds::default())
            .unwrap()
            .unwrap();
        assert!(mappings_equal(&g, &id).unwrap());
    }

    #[test]
    fn renaming_inverts() {
        let r = renaming();
        let g = invert_mapping(&r, InversionBounds::default())
            .unwrap()
            .unwrap();
        assert_eq!(g.entity("M1").unwrap(), "N1");
        assert_eq!(g.entity("M2").unwrap(), "N2");
        assert_eq!(g.image("f").unwrap().as_path(), Some(vec!["f"]));
    }

    #[test]
    fn collapsing_mapping_has_no_inverse() {
        assert_eq!(
            invert_mapping(&mapping_f(), InversionBounds::default()).unwrap(),
            None
        );
    }
}
