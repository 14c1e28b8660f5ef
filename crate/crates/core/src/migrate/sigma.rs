//! Σ_F: pushing an instance forward along a mapping.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::migrate::{MigrationKind, MigrationResult, Origin};
use crate::schema::{apply_mapping_term, validate_instance, InstancePresentation, Mapping};
use crate::term::{build_term_model, Equation, FunctionSymbol, SaturationLimits, SymbolFlavor};

/// Translates the presentation of `I` along `F`: generators keep their
/// names and move to the image of their entity, equations are translated
/// term by term. The result is the term model of the translation.
pub fn sigma(
    f: &Mapping,
    i: &Arc<InstancePresentation>,
    limits: SaturationLimits,
) -> Result<MigrationResult> {
    if i.schema.as_ref() != f.source.as_ref() {
        return Err(Error::SchemaMismatch(format!(
            "`{}` is not an instance of `{}`",
            i.name, f.source.name
        )));
    }
    validate_instance(i)?;
    let pres = Arc::new(translate(f, i)?);
    let output = Arc::new(build_term_model(Arc::clone(&pres), limits)?);
    Ok(MigrationResult {
        kind: MigrationKind::Sigma,
        mapping: f.clone(),
        input: i.name.clone(),
        collision: output.collision(),
        presentation: pres,
        output,
        origin: Origin::None,
    })
}

pub(crate) fn translate(f: &Mapping, i: &InstancePresentation) -> Result<InstancePresentation> {
    let generators = i
        .generators
        .iter()
        .map(|g| {
            Ok(FunctionSymbol::constant(
                g.name.clone(),
                f.sort(&g.out)?,
                SymbolFlavor::Generator,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let equations = i
        .equations
        .iter()
        .map(|e| {
            Ok(Equation::ground(
                apply_mapping_term(f, &e.lhs)?,
                apply_mapping_term(f, &e.rhs)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(InstancePresentation::new(
        format!("sigma_{}_{}", f.name, i.name),
        Arc::clone(&f.target),
        generators,
        equations,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::migrate::fixtures::*;
    use crate::migrate::morphism::instances_isomorphic;
    use crate::schema::fixtures::*;
    use crate::schema::mapping::fixtures::mapping_f;
    use crate::term::Literal;

    #[test]
    fn sigma_merges_along_foreign_key() {
        let r = sigma(
            &mapping_f(),
            &Arc::new(instance_i()),
            SaturationLimits::default(),
        )
        .unwrap();
        assert!(r.is_consistent());
        assert!(instances_isomorphic(&r.output, &model(instance_j()))
            .unwrap()
            .is_some());
    }

    #[test]
    fn sigma_without_foreign_keys_makes_nulls() {
        let r = sigma(
            &mapping_f0(),
            &Arc::new(instance_i0()),
            SaturationLimits::default(),
        )
        .unwrap();
        let m = &r.output;
        assert_eq!(m.carrier("N").len(), 6);
        for col in ["name", "salary", "age"] {
            let nulls = m
                .carrier("N")
                .iter()
                .filter(|&&x| m.literal(m.apply(col, x).unwrap()).is_none())
                .count();
            assert_eq!(nulls, 3, "{col}");
        }
        let first = m.carrier("N")[0];
        assert_eq!(m.display(m.apply("age", first).unwrap()), "age(1)");
        let fourth = m.carrier("N")[3];
        assert_eq!(m.display(m.apply("name", fourth).unwrap()), "name(4)");
        assert_eq!(
            m.literal(m.apply("age", fourth).unwrap()),
            Some(&Literal::int(20))
        );
    }

    #[test]
    fn sigma_along_identity() {
        let i = Arc::new(instance_i());
        let r = sigma(
            &Mapping::identity(&schema_s()),
            &i,
            SaturationLimits::default(),
        )
        .unwrap();
        assert!(instances_isomorphic(&r.output, &model(instance_i()))
            .unwrap()
            .is_some());
    }

    #[test]
    fn sigma_reports_collisions() {
        // Two rows that F merges but that disagree on age.
        let inst = InstancePresentation::from_parts(
            "K",
            schema_s(),
            &[("1", "N1")],
            vec![
                eq(Term::app("age", att("f", "1")), n(20)),
                eq(att("salary", "1"), n(30)),
            ],
        );
        let f = mapping_f().with_path("age", &["salary"]);
        let r = sigma(&f, &Arc::new(inst), SaturationLimits::default()).unwrap();
        assert!(!r.is_consistent());
    }

    use crate::term::Term;
}
