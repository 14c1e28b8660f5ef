//! Δ_F: restriction of a target instance along a mapping.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::migrate::{fresh_name, DeltaOrigin, MigrationKind, MigrationResult, Origin};
use crate::schema::{InstancePresentation, Mapping};
use crate::term::{
    build_term_model, Equation, SaturationLimits, SymbolFlavor, Term, TermModel, Value,
};

/// Δ_F(J): one row at `e` for every row of `J` at `F(e)`, with each symbol
/// `q` read as the term `F(q)` in `J`.
pub fn delta(f: &Mapping, j: &Arc<TermModel>, limits: SaturationLimits) -> Result<MigrationResult> {
    if j.schema().as_ref() != f.target.as_ref() {
        return Err(Error::SchemaMismatch(format!(
            "`{}` is not an instance of `{}`",
            j.name(),
            f.target.name
        )));
    }
    if let Some(c) = j.collision() {
        return Err(Error::Invalid(format!(
            "`{}` is inconsistent: {c}",
            j.name()
        )));
    }
    let source = Arc::clone(&f.source);
    let taken = |n: &str| source.symbol_is_declared(n);
    let mut origin = DeltaOrigin::default();
    let mut generators = Vec::new();
    for e in &source.entities {
        for &y in j.carrier(f.entity(e)?) {
            let name = fresh_name(&format!("{e}_{}", j.label(y)), &|n| {
                taken(n) || origin.rows.contains_key(n)
            });
            origin.rows.insert(name.clone(), (e.clone(), y));
            origin.index.insert((e.clone(), y), name.clone());
            generators.push((name, e.clone()));
        }
    }

    let mut equations = Vec::new();
    for (name, (e, y)) in &origin.rows {
        let me = Term::constant(name.clone());
        for sym in source.unary_symbols().filter(|s| s.domain() == Some(e)) {
            let img = f.image(&sym.name)?;
            let value = j.eval_with(&img.body, Some(&Value::Class(*y)))?;
            let lhs = Term::app(sym.name.clone(), me.clone());
            let rhs = match (sym.flavor, value) {
                (SymbolFlavor::ForeignKey, Value::Class(z)) => {
                    Term::constant(origin.index[&(sym.out.clone(), z)].clone())
                }
                (_, Value::Lit(l)) => Term::lit(l),
                (_, Value::Class(z)) => {
                    if let Some(l) = j.literal(z) {
                        Term::lit(l.clone())
                    } else if let Some(k) = j
                        .schema()
                        .typeside
                        .constants
                        .iter()
                        .find(|k| j.constant_class(&k.name) == Some(z))
                    {
                        Term::constant(k.name.clone())
                    } else if let Some(t) = origin.types.get(&z) {
                        t.clone()
                    } else {
                        origin.types.insert(z, lhs);
                        continue;
                    }
                }
            };
            equations.push(Equation::ground(lhs, rhs));
        }
    }
    let gens: Vec<(&str, &str)> = generators
        .iter()
        .map(|(g, e)| (g.as_str(), e.as_str()))
        .collect();
    let pres = Arc::new(InstancePresentation::from_parts(
        format!("delta_{}_{}", f.name, j.name()),
        Arc::clone(&source),
        &gens,
        equations,
    ));
    let output = Arc::new(build_term_model(Arc::clone(&pres), limits)?);
    Ok(MigrationResult {
        kind: MigrationKind::Delta,
        mapping: f.clone(),
        input: j.name().to_string(),
        collision: output.collision(),
        presentation: pres,
        output,
        origin: Origin::Delta(origin),
    })
}

impl crate::schema::Schema {
    pub(crate) fn symbol_is_declared(&self, name: &str) -> bool {
        use crate::term::Signature;
        self.symbol(name).is_some() || self.sort_kind(name).is_some()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::migrate::fixtures::*;
    use crate::migrate::morphism::instances_isomorphic;
    use crate::schema::fixtures::*;
    use crate::schema::mapping::fixtures::mapping_f;
    use crate::schema::Mapping;
    use crate::term::Literal;

    #[test]
    fn delta_of_joined_table() {
        let j = model(instance_j());
        let d = delta(&mapping_f(), &j, SaturationLimits::default()).unwrap();
        let m = &d.output;
        assert_eq!(m.carrier("N1").len(), 3);
        assert_eq!(m.carrier("N2").len(), 3);
        for &x in m.carrier("N1") {
            let y = m.apply("f", x).unwrap();
            let age = m.apply("age", y).unwrap();
            assert!(m.literal(age).is_some());
        }
        let left = model(instance_i());
        assert!(instances_isomorphic(&d.output, &left).unwrap().is_some());
    }

    #[test]
    fn delta_without_foreign_keys() {
        let j = model(instance_j());
        let d = delta(&mapping_f0(), &j, SaturationLimits::default()).unwrap();
        let m = &d.output;
        let names: Vec<_> = m
            .carrier("N1")
            .iter()
            .map(|&x| m.display(m.apply("name", x).unwrap()))
            .collect();
        assert_eq!(names, ["Alice", "Bob", "Sue"]);
        let ages: Vec<_> = m
            .carrier("N2")
            .iter()
            .map(|&x| m.literal(m.apply("age", x).unwrap()).cloned())
            .collect();
        assert_eq!(
            ages,
            [
                Some(Literal::int(20)),
                Some(Literal::int(20)),
                Some(Literal::int(30))
            ]
        );
    }

    #[test]
    fn delta_along_identity() {
        let i = model(instance_i());
        let d = delta(
            &Mapping::identity(&schema_s()),
            &i,
            SaturationLimits::default(),
        )
        .unwrap();
        assert!(instances_isomorphic(&d.output, &i).unwrap().is_some());
    }

    #[test]
    fn shared_nulls_stay_shared() {
        let j = model(InstancePresentation::from_parts(
            "J",
            schema_t(),
            &[("a", "N")],
            vec![],
        ));
        let d = delta(&mapping_f(), &j, SaturationLimits::default()).unwrap();
        let m = &d.output;
        let x = m.carrier("N1")[0];
        let y = m.apply("f", x).unwrap();
        assert!(m.literal(m.apply("age", y).unwrap()).is_none());
        assert_eq!(m.carrier("Int").len(), 2);
    }
}
