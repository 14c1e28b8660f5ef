//! Π_F: the right adjoint of Δ_F, computed as families over comma objects.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::migrate::paths::{enumerate_paths_in, PathCaps};
use crate::migrate::{fresh_name, MigrationKind, MigrationResult, Origin, PiOrigin};
use crate::schema::{InstancePresentation, Mapping, Probe};
use crate::term::{
    bind, build_term_model, substitute, ClassId, Equation, FunctionSymbol, SaturationLimits,
    SymbolFlavor, Term, TermModel, Value,
};

pub fn pi(f: &Mapping, i: &Arc<TermModel>, limits: SaturationLimits) -> Result<MigrationResult> {
    pi_with(f, i, limits, PathCaps::default())
}

/// A comma object `(s, p)` of a target entity `t`: a source entity and a
/// path `p : t -> F(s)`.
struct Comma {
    entity: String,
    path: Term,
    value: Value,
}

/// Per target entity: comma objects, naturality constraints and the
/// grouping of type-valued composites.
struct Index {
    comma: Vec<Comma>,
    /// `(k, q, k2)`: `q(x_k) = x_k2`.
    natural: Vec<(usize, usize, usize)>,
    /// Composites `F(a) ∘ p_k` grouped by their class in the target.
    groups: Vec<Group>,
}

struct Group {
    key: Value,
    members: Vec<(usize, usize)>,
    required: Option<Value>,
}

/// Computes Π_F(I) over the comma objects `(s, p)` of each target entity.
///
/// A row at `t` is a family choosing one row of `I` at every `(s, p)`,
/// natural for every foreign key of the source. Attributes of the source
/// whose composites `F(a) ∘ p` coincide in the target must agree on a
/// family; a target attribute provably equal to such a composite takes its
/// value, otherwise it is left as a labeled null.
pub fn pi_with(
    f: &Mapping,
    i: &Arc<TermModel>,
    limits: SaturationLimits,
    caps: PathCaps,
) -> Result<MigrationResult> {
    if i.schema().as_ref() != f.source.as_ref() {
        return Err(Error::SchemaMismatch(format!(
            "`{}` is not an instance of `{}`",
            i.name(),
            f.source.name
        )));
    }
    if let Some(c) = i.collision() {
        return Err(Error::Invalid(format!(
            "`{}` is inconsistent: {c}",
            i.name()
        )));
    }
    let target = Arc::clone(&f.target);
    let src = &f.source;
    let six = src.index();

    let mut probes = HashMap::new();
    let mut indexes = HashMap::new();
    for t in &target.entities {
        let probe = Probe::new(&target, t, limits)?;
        if !probe.is_complete() {
            return Err(Error::ResourceLimit(format!(
                "paths out of `{t}` do not stay finite"
            )));
        }
        let mut comma = Vec::new();
        for s in &src.entities {
            let ps = enumerate_paths_in(&target, &probe, t, f.entity(s)?, caps)?;
            if ps.truncated {
                return Err(Error::ResourceLimit(format!(
                    "too many paths from `{t}` to `{}`",
                    f.entity(s)?
                )));
            }
            for p in ps.paths {
                let value = probe.value(&p)?;
                comma.push(Comma {
                    entity: s.clone(),
                    path: p,
                    value,
                });
            }
        }
        let mut natural = Vec::new();
        let mut groups: Vec<Group> = Vec::new();
        for (k, c) in comma.iter().enumerate() {
            let s_ix = six.sort_index[&c.entity];
            for &q in &six.by_domain[s_ix] {
                let sym = &six.unary[q];
                let composite = f.image(&sym.name)?.apply(c.path.clone())?;
                let v = probe.value(&composite)?;
                if sym.flavor == SymbolFlavor::ForeignKey {
                    let k2 = comma
                        .iter()
                        .position(|d| d.entity == sym.out && d.value == v)
                        .ok_or_else(|| {
                            Error::Invalid(format!("no comma object for `{composite}`"))
                        })?;
                    natural.push((k, q, k2));
                } else {
                    match groups.iter_mut().find(|g| g.key == v) {
                        Some(g) => g.members.push((k, q)),
                        None => {
                            let model = probe.model().expect("complete probe");
                            let required = match &v {
                                Value::Lit(l) => Some(i.literal_value(l)),
                                Value::Class(z) => match model.literal(*z) {
                                    Some(l) => Some(i.literal_value(l)),
                                    None => model
                                        .constants
                                        .iter()
                                        .find(|(_, c)| **c == *z)
                                        .map(|(k, _)| {
                                            i.constant_class(k)
                                                .map(Value::Class)
                                                .ok_or_else(|| Error::UnknownSymbol(k.clone()))
                                        })
                                        .transpose()?,
                                },
                            };
                            groups.push(Group {
                                key: v,
                                members: vec![(k, q)],
                                required,
                            });
                        }
                    }
                }
            }
        }
        probes.insert(t.clone(), probe);
        indexes.insert(
            t.clone(),
            Index {
                comma,
                natural,
                groups,
            },
        );
    }

    // Families, per target entity.
    let mut origin = PiOrigin::default();
    let mut families: Vec<(String, Vec<Vec<ClassId>>)> = Vec::new();
    for t in &target.entities {
        let ix = &indexes[t];
        let fams = enumerate_families(i, ix, limits.max_classes_per_sort, t)?;
        origin.comma.insert(
            t.clone(),
            ix.comma
                .iter()
                .map(|c| (c.entity.clone(), c.path.clone()))
                .collect(),
        );
        families.push((t.clone(), fams));
    }
    let taken = |n: &str| target.symbol_is_declared(n);
    let mut generators: Vec<FunctionSymbol> = Vec::new();
    for (t, fams) in &families {
        for (k, fam) in fams.iter().enumerate() {
            let name = fresh_name(&format!("{t}_{}", k + 1), &|n| {
                taken(n) || origin.rows.contains_key(n)
            });
            origin.rows.insert(name.clone(), (t.clone(), fam.clone()));
            origin.index.insert((t.clone(), fam.clone()), name.clone());
            generators.push(FunctionSymbol::constant(
                name,
                t.clone(),
                SymbolFlavor::Generator,
            ));
        }
    }

    let tix = target.index();
    let mut equations = Vec::new();
    let mut null_gens: Vec<FunctionSymbol> = Vec::new();
    let v = Term::var("v", "");
    for (t, fams) in &families {
        let ix = &indexes[t];
        let probe = &probes[t];
        let t_ix = tix.sort_index[t];
        for &g in &tix.by_domain[t_ix] {
            let sym = &tix.unary[g];
            let lhs_of = |fam: &Vec<ClassId>| {
                Term::app(
                    sym.name.clone(),
                    Term::constant(origin.index[&(t.clone(), fam.clone())].clone()),
                )
            };
            if sym.flavor == SymbolFlavor::ForeignKey {
                let t2 = &sym.out;
                let ix2 = &indexes[t2];
                // component k2 of the restriction is component k of the family
                let mut restrict = Vec::with_capacity(ix2.comma.len());
                for c2 in &ix2.comma {
                    let along = substitute(
                        &c2.path,
                        &bind(
                            c2.path
                                .vars()
                                .first()
                                .map(|v| v.name.clone())
                                .unwrap_or_default(),
                            Term::app(sym.name.clone(), v.clone()),
                        ),
                    )?;
                    let val = probe.value(&along)?;
                    let k = ix
                        .comma
                        .iter()
                        .position(|c| c.entity == c2.entity && c.value == val)
                        .ok_or_else(|| Error::Invalid(format!("no comma object for `{along}`")))?;
                    restrict.push(k);
                }
                for fam in fams {
                    let image: Vec<ClassId> = restrict.iter().map(|&k| fam[k]).collect();
                    let rhs = origin.index.get(&(t2.clone(), image)).ok_or_else(|| {
                        Error::Invalid(format!("restriction along `{}` is not a family", sym.name))
                    })?;
                    equations.push(Equation::ground(lhs_of(fam), Term::constant(rhs.clone())));
                }
            } else {
                let key = probe.value(&Term::app(sym.name.clone(), v.clone()))?;
                let Some(group) = ix.groups.iter().find(|gr| gr.key == key) else {
                    continue;
                };
                let (k, q) = group.members[0];
                for fam in fams {
                    let value = Value::Class(i.apply_index(q, fam[k]));
                    let rhs = match value {
                        Value::Lit(l) => Term::lit(l),
                        Value::Class(z) => {
                            if let Some(l) = i.literal(z) {
                                Term::lit(l.clone())
                            } else if let Some((kname, _)) =
                                i.constants.iter().find(|(_, c)| **c == z)
                            {
                                Term::constant(kname.clone())
                            } else {
                                let name = match origin.nulls.get(&z) {
                                    Some(n) => n.clone(),
                                    None => {
                                        let n = fresh_name(&i.display(z), &|n| {
                                            taken(n)
                                                || origin.rows.contains_key(n)
                                                || null_gens.iter().any(|g| g.name == n)
                                        });
                                        origin.nulls.insert(z, n.clone());
                                        null_gens.push(FunctionSymbol::constant(
                                            n.clone(),
                                            i.sort_of(z),
                                            SymbolFlavor::Generator,
                                        ));
                                        n
                                    }
                                };
                                Term::constant(name)
                            }
                        }
                    };
                    equations.push(Equation::ground(lhs_of(fam), rhs));
                }
            }
        }
    }
    generators.extend(null_gens);
    let pres = Arc::new(InstancePresentation::new(
        format!("pi_{}_{}", f.name, i.name()),
        Arc::clone(&target),
        generators,
        equations,
    ));
    let output = Arc::new(build_term_model(Arc::clone(&pres), limits)?);
    Ok(MigrationResult {
        kind: MigrationKind::Pi,
        mapping: f.clone(),
        input: i.name().to_string(),
        collision: output.collision(),
        presentation: pres,
        output,
        origin: Origin::Pi(origin),
    })
}

/// All admissible families, the last comma object varying slowest.
fn enumerate_families(i: &TermModel, ix: &Index, cap: usize, t: &str) -> Result<Vec<Vec<ClassId>>> {
    let n = ix.comma.len();
    let domains: Vec<&[ClassId]> = ix.comma.iter().map(|c| i.carrier(&c.entity)).collect();
    // checks that become decidable once component k is assigned (k..n are)
    let mut natural_at: Vec<Vec<(usize, usize, usize)>> = vec![Vec::new(); n];
    for &(k, q, k2) in &ix.natural {
        natural_at[k.min(k2)].push((k, q, k2));
    }
    let mut group_at: Vec<Vec<(usize, usize, usize)>> = vec![Vec::new(); n];
    for (gi, g) in ix.groups.iter().enumerate() {
        for (mi, &(k, _)) in g.members.iter().enumerate() {
            group_at[k].push((gi, mi, 0));
        }
    }
    let mut out = Vec::new();
    let mut fam: Vec<Option<ClassId>> = vec![None; n];

    fn ok_at(
        i: &TermModel,
        ix: &Index,
        k: usize,
        fam: &[Option<ClassId>],
        natural_at: &[Vec<(usize, usize, usize)>],
        group_at: &[Vec<(usize, usize, usize)>],
    ) -> bool {
        for &(a, q, b) in &natural_at[k] {
            match (fam[a], fam[b]) {
                (Some(x), Some(y)) if i.apply_index(q, x) == y => {}
                _ => return false,
            }
        }
        for &(gi, mi, _) in &group_at[k] {
            let g = &ix.groups[gi];
            let (kk, q) = g.members[mi];
            let v = Value::Class(i.apply_index(q, fam[kk].expect("assigned")));
            if let Some(r) = &g.required {
                if *r != v {
                    return false;
                }
            }
            for &(k2, q2) in &g.members {
                if let Some(x2) = fam[k2] {
                    if k2 >= k && Value::Class(i.apply_index(q2, x2)) != v {
                        return false;
                    }
                }
            }
        }
        true
    }

    #[allow(clippy::too_many_arguments)]
    fn go(
        i: &TermModel,
        ix: &Index,
        k: usize,
        domains: &[&[ClassId]],
        fam: &mut Vec<Option<ClassId>>,
        natural_at: &[Vec<(usize, usize, usize)>],
        group_at: &[Vec<(usize, usize, usize)>],
        out: &mut Vec<Vec<ClassId>>,
        cap: usize,
    ) -> bool {
        if k == 0 {
            if out.len() == cap {
                return false;
            }
            out.push(fam.iter().map(|x| x.expect("assigned")).collect());
            return true;
        }
        let k = k - 1;
        for &x in domains[k] {
            fam[k] = Some(x);
            if ok_at(i, ix, k, fam, natural_at, group_at)
                && !go(i, ix, k, domains, fam, natural_at, group_at, out, cap)
            {
                return false;
            }
        }
        fam[k] = None;
        true
    }

    if !go(
        i,
        ix,
        n,
        &domains,
        &mut fam,
        &natural_at,
        &group_at,
        &mut out,
        cap,
    ) {
        return Err(Error::ResourceLimit(format!(
            "more than {cap} rows at `{t}`"
        )));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::migrate::fixtures::*;
    use crate::migrate::morphism::instances_isomorphic;
    use crate::schema::fixtures::*;
    use crate::schema::mapping::fixtures::mapping_f;
    use crate::schema::Schema;

    #[test]
    fn pi_without_foreign_keys_is_a_product() {
        let r = pi(
            &mapping_f0(),
            &model(instance_i0()),
            SaturationLimits::default(),
        )
        .unwrap();
        let m = &r.output;
        let rows: Vec<(String, String)> = m
            .carrier("N")
            .iter()
            .map(|&x| {
                (
                    m.display(m.apply("name", x).unwrap()),
                    m.display(m.apply("age", x).unwrap()),
                )
            })
            .collect();
        let expected: Vec<(String, String)> = [
            ("Alice", "20"),
            ("Bob", "20"),
            ("Sue", "20"),
            ("Alice", "20"),
            ("Bob", "20"),
            ("Sue", "20"),
            ("Alice", "30"),
            ("Bob", "30"),
            ("Sue", "30"),
        ]
        .iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect();
        assert_eq!(rows, expected);
    }

    #[test]
    fn pi_with_foreign_key_is_a_join() {
        let r = pi(
            &mapping_f(),
            &model(instance_i()),
            SaturationLimits::default(),
        )
        .unwrap();
        assert!(instances_isomorphic(&r.output, &model(instance_j()))
            .unwrap()
            .is_some());
    }

    #[test]
    fn pi_along_identity() {
        let i = model(instance_i());
        let r = pi(
            &Mapping::identity(&schema_s()),
            &i,
            SaturationLimits::default(),
        )
        .unwrap();
        assert!(instances_isomorphic(&r.output, &i).unwrap().is_some());
    }

    #[test]
    fn unmatched_target_attribute_is_null() {
        let t = Arc::new(
            Schema::builder("T2", ty())
                .entity("N")
                .attribute("name", "N", "String")
                .attribute("salary", "N", "Int")
                .attribute("age", "N", "Int")
                .attribute("zip", "N", "Int")
                .build(),
        );
        let f = Mapping::new("F", schema_s(), t)
            .with_entity("N1", "N")
            .with_entity("N2", "N")
            .with_path("f", &[])
            .with_path("name", &["name"])
            .with_path("salary", &["salary"])
            .with_path("age", &["age"]);
        let r = pi(&f, &model(instance_i()), SaturationLimits::default()).unwrap();
        let m = &r.output;
        assert_eq!(m.carrier("N").len(), 3);
        let zip = m.apply("zip", m.carrier("N")[0]).unwrap();
        assert_eq!(m.display(zip), "zip(1)");
    }

    #[test]
    fn target_entity_outside_the_image_is_terminal() {
        let t = Arc::new(
            Schema::builder("T3", ty())
                .entity("N")
                .entity("Extra")
                .attribute("name", "N", "String")
                .attribute("salary", "N", "Int")
                .attribute("age", "N", "Int")
                .build(),
        );
        let f = Mapping::new("F", schema_s(), t)
            .with_entity("N1", "N")
            .with_entity("N2", "N")
            .with_path("f", &[])
            .with_path("name", &["name"])
            .with_path("salary", &["salary"])
            .with_path("age", &["age"]);
        let r = pi(&f, &model(instance_i()), SaturationLimits::default()).unwrap();
        assert_eq!(r.output.carrier("Extra").len(), 1);
    }
}
