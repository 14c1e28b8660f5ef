//! Units, counits and transposes of Σ_F ⊣ Δ_F ⊣ Π_F, and the action of the
//! three functors on morphisms.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::migrate::{delta, pi, sigma, InstanceMorphism, MigrationResult};
use crate::schema::{apply_mapping_term, Mapping};
use crate::term::{ClassId, SaturationLimits, Term, TermModel, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Adjunction {
    SigmaDelta,
    DeltaPi,
}

/// `Down` turns a morphism out of the left adjoint into one into the right
/// adjoint; `Up` goes back.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Down,
    Up,
}

fn class_of_generator(m: &TermModel, name: &str) -> Result<Value> {
    m.generator_class(name)
        .map(Value::Class)
        .ok_or_else(|| Error::UnknownSymbol(name.to_string()))
}

/// Σ_F(h) for `h : I -> I'`.
pub fn sigma_morphism(
    f: &Mapping,
    h: &InstanceMorphism,
    limits: SaturationLimits,
) -> Result<InstanceMorphism> {
    let a = sigma(f, h.source().presentation(), limits)?;
    let b = sigma(f, h.target().presentation(), limits)?;
    let src = h.source();
    let tgt = h.target();
    InstanceMorphism::from_generators(&a.output, &b.output, |g| {
        let c = src
            .generator_class(g)
            .ok_or_else(|| Error::UnknownSymbol(g.to_string()))?;
        match h.image(c) {
            Value::Lit(l) => Ok(Some(Value::Lit(l.clone()))),
            Value::Class(d) => {
                let t = apply_mapping_term(f, tgt.canonical_term(*d))?;
                Ok(Some(b.output.eval(&t)?))
            }
        }
    })
}

/// Δ_F(h) for `h : J -> J'`.
pub fn delta_morphism(
    f: &Mapping,
    h: &InstanceMorphism,
    limits: SaturationLimits,
) -> Result<InstanceMorphism> {
    let a = delta(f, h.source(), limits)?;
    let b = delta(f, h.target(), limits)?;
    delta_morphism_between(&a, &b, h)
}

fn delta_morphism_between(
    a: &MigrationResult,
    b: &MigrationResult,
    h: &InstanceMorphism,
) -> Result<InstanceMorphism> {
    let (ao, bo) = (delta_origin(a)?, delta_origin(b)?);
    InstanceMorphism::from_generators(&a.output, &b.output, |g| {
        let Some((e, y)) = ao.rows.get(g) else {
            return Ok(None);
        };
        let name = &bo.index[&(e.clone(), h.entity_image(*y))];
        class_of_generator(&b.output, name).map(Some)
    })
}

/// Π_F(h) for `h : I -> I'`.
pub fn pi_morphism(
    f: &Mapping,
    h: &InstanceMorphism,
    limits: SaturationLimits,
) -> Result<InstanceMorphism> {
    let a = pi(f, h.source(), limits)?;
    let b = pi(f, h.target(), limits)?;
    let (ao, bo) = (pi_origin(&a)?, pi_origin(&b)?);
    let tgt = h.target();
    let null_of: HashMap<&str, ClassId> = ao.nulls.iter().map(|(z, n)| (n.as_str(), *z)).collect();
    InstanceMorphism::from_generators(&a.output, &b.output, |g| {
        if let Some((t, fam)) = ao.rows.get(g) {
            let image: Vec<ClassId> = fam.iter().map(|&x| h.entity_image(x)).collect();
            let name = bo
                .index
                .get(&(t.clone(), image))
                .ok_or_else(|| Error::Invalid("image of a family is not a family".into()))?;
            return class_of_generator(&b.output, name).map(Some);
        }
        let Some(&z) = null_of.get(g) else {
            return Ok(None);
        };
        Ok(match h.image(z) {
            Value::Lit(l) => Some(b.output.literal_value(l)),
            Value::Class(z2) => {
                if let Some(l) = tgt.literal(*z2) {
                    Some(b.output.literal_value(l))
                } else if let Some(n) = bo.nulls.get(z2) {
                    Some(class_of_generator(&b.output, n)?)
                } else {
                    None
                }
            }
        })
    })
}

fn delta_origin(r: &MigrationResult) -> Result<&crate::migrate::DeltaOrigin> {
    r.delta_origin()
        .ok_or_else(|| Error::Invalid("not the result of a delta migration".into()))
}

fn pi_origin(r: &MigrationResult) -> Result<&crate::migrate::PiOrigin> {
    r.pi_origin()
        .ok_or_else(|| Error::Invalid("not the result of a pi migration".into()))
}

/// The unit `I -> Δ_F(Σ_F(I))`: each row goes to the row its translation
/// denotes.
pub fn unit_sigma(
    f: &Mapping,
    i: &Arc<TermModel>,
    limits: SaturationLimits,
) -> Result<InstanceMorphism> {
    let s = sigma(f, i.presentation(), limits)?;
    let d = delta(f, &s.output, limits)?;
    let dorig = delta_origin(&d)?;
    InstanceMorphism::from_generators(i, &d.output, |g| {
        let c = i
            .generator_class(g)
            .ok_or_else(|| Error::UnknownSymbol(g.to_string()))?;
        let y = s
            .output
            .generator_class(g)
            .ok_or_else(|| Error::UnknownSymbol(g.to_string()))?;
        if i.is_entity_class(c) {
            let name = &dorig.index[&(i.sort_of(c).to_string(), y)];
            class_of_generator(&d.output, name).map(Some)
        } else {
            match dorig.types.get(&y) {
                Some(t) => Ok(Some(d.output.eval(t)?)),
                None => Ok(s.output.literal(y).map(|l| d.output.literal_value(l))),
            }
        }
    })
}

/// The counit `Σ_F(Δ_F(J)) -> J`: each row goes back to the row of `J` it
/// was restricted from.
pub fn counit_sigma(
    f: &Mapping,
    j: &Arc<TermModel>,
    limits: SaturationLimits,
) -> Result<InstanceMorphism> {
    let d = delta(f, j, limits)?;
    let s = sigma(f, &d.presentation, limits)?;
    let dorig = delta_origin(&d)?;
    InstanceMorphism::from_generators(&s.output, j, |g| {
        Ok(dorig.rows.get(g).map(|(_, y)| Value::Class(*y)))
    })
}

/// The unit `J -> Π_F(Δ_F(J))`: a row goes to the family of its images
/// along every comma path.
pub fn unit_pi(
    f: &Mapping,
    j: &Arc<TermModel>,
    limits: SaturationLimits,
) -> Result<InstanceMorphism> {
    let d = delta(f, j, limits)?;
    let p = pi(f, &d.output, limits)?;
    let dorig = delta_origin(&d)?;
    let porig = pi_origin(&p)?;
    InstanceMorphism::from_generators(j, &p.output, |g| {
        let y = j
            .generator_class(g)
            .ok_or_else(|| Error::UnknownSymbol(g.to_string()))?;
        if !j.is_entity_class(y) {
            return Ok(None);
        }
        let t = j.sort_of(y).to_string();
        let mut fam = Vec::new();
        for (s, path) in &porig.comma[&t] {
            let z = j
                .eval_with(path, Some(&Value::Class(y)))?
                .class()
                .ok_or_else(|| Error::Invalid("path into an entity gave a literal".into()))?;
            let row = &dorig.index[&(s.clone(), z)];
            fam.push(
                d.output
                    .generator_class(row)
                    .ok_or_else(|| Error::UnknownSymbol(row.clone()))?,
            );
        }
        let name = porig
            .index
            .get(&(t, fam))
            .ok_or_else(|| Error::Invalid("unit does not land on a family".into()))?;
        class_of_generator(&p.output, name).map(Some)
    })
}

/// The counit `Δ_F(Π_F(I)) -> I`: a family at `F(s)` goes to its component
/// at `(s, identity)`.
pub fn counit_pi(
    f: &Mapping,
    i: &Arc<TermModel>,
    limits: SaturationLimits,
) -> Result<InstanceMorphism> {
    let p = pi(f, i, limits)?;
    let d = delta(f, &p.output, limits)?;
    let dorig = delta_origin(&d)?;
    let porig = pi_origin(&p)?;
    InstanceMorphism::from_generators(&d.output, i, |g| {
        let Some((s, y)) = dorig.rows.get(g) else {
            return Ok(None);
        };
        let fam_name = match p.output.canonical_term(*y) {
            Term::App(n, args) if args.is_empty() => n,
            other => {
                return Err(Error::Invalid(format!("row `{other}` is not a family")));
            }
        };
        let (t, fam) = &porig.rows[fam_name];
        let k = porig.comma[t]
            .iter()
            .position(|(e, path)| e == s && matches!(path, Term::Var(_)))
            .ok_or_else(|| Error::Invalid(format!("no identity comma object for `{s}`")))?;
        Ok(Some(Value::Class(fam[k])))
    })
}

/// The transpose of `h` across the adjunction.
///
/// `hidden` is the instance not visible from `h`: `I` when `h : Σ_F I -> J`
/// or `h : J -> Π_F I`, and `J` when `h : I -> Δ_F J` or `h : Δ_F J -> I`.
pub fn transpose(
    f: &Mapping,
    adjunction: Adjunction,
    direction: Direction,
    h: &InstanceMorphism,
    hidden: &Arc<TermModel>,
    limits: SaturationLimits,
) -> Result<InstanceMorphism> {
    match (adjunction, direction) {
        (Adjunction::SigmaDelta, Direction::Down) => {
            unit_sigma(f, hidden, limits)?.then(&delta_morphism(f, h, limits)?)
        }
        (Adjunction::SigmaDelta, Direction::Up) => {
            sigma_morphism(f, h, limits)?.then(&counit_sigma(f, hidden, limits)?)
        }
        (Adjunction::DeltaPi, Direction::Down) => {
            unit_pi(f, hidden, limits)?.then(&pi_morphism(f, h, limits)?)
        }
        (Adjunction::DeltaPi, Direction::Up) => {
            delta_morphism(f, h, limits)?.then(&counit_pi(f, hidden, limits)?)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::migrate::fixtures::*;
    use crate::migrate::morphism::enumerate_morphisms;
    use crate::schema::fixtures::*;
    use crate::schema::mapping::fixtures::mapping_f;

    const L: SaturationLimits = SaturationLimits {
        max_classes_per_sort: 10_000,
        max_rounds: 1_000,
    };

    #[test]
    fn units_on_running_example() {
        let i = model(instance_i());
        let u = unit_sigma(&mapping_f(), &i, L).unwrap();
        assert!(u.is_entity_bijection());
        let j = model(instance_j());
        let c = counit_sigma(&mapping_f(), &j, L).unwrap();
        assert!(c.is_entity_bijection());
        let c = counit_pi(&mapping_f(), &i, L).unwrap();
        assert_eq!(c.source().carrier("N1").len(), 3);
        let u = unit_pi(&mapping_f(), &j, L).unwrap();
        assert!(u.is_entity_bijection());
    }

    #[test]
    fn unit_is_injective_without_foreign_keys() {
        let i = model(instance_i0());
        let u = unit_sigma(&mapping_f0(), &i, L).unwrap();
        let mut images: Vec<_> = i.entity_classes().map(|c| u.entity_image(c)).collect();
        images.sort();
        images.dedup();
        assert_eq!(images.len(), 6);
        assert_eq!(u.target().carrier("N1").len(), 6);
    }

    #[test]
    fn identity_transposes_to_unit() {
        let f = mapping_f();
        let i = model(instance_i());
        let s = sigma(&f, i.presentation(), L).unwrap();
        let id = InstanceMorphism::identity(&s.output);
        let t = transpose(&f, Adjunction::SigmaDelta, Direction::Down, &id, &i, L).unwrap();
        assert_eq!(t, unit_sigma(&f, &i, L).unwrap());
    }

    #[test]
    fn transpose_round_trips() {
        let f = mapping_f0();
        let i = model(instance_i0());
        let j = model(instance_j());
        let s = sigma(&f, i.presentation(), L).unwrap();
        let d = delta(&f, &j, L).unwrap();
        let left = enumerate_morphisms(&s.output, &j, 1000).unwrap();
        let right = enumerate_morphisms(&i, &d.output, 1000).unwrap();
        assert_eq!(left.len(), right.len());
        for h in &left {
            let down = transpose(&f, Adjunction::SigmaDelta, Direction::Down, h, &i, L).unwrap();
            assert!(right.contains(&down));
            let up = transpose(&f, Adjunction::SigmaDelta, Direction::Up, &down, &j, L).unwrap();
            assert_eq!(&up, h);
        }
    }

    #[test]
    fn counit_with_null_attributes_commutes() {
        let j = model(crate::schema::InstancePresentation::from_parts(
            "J",
            schema_t(),
            &[("a", "N")],
            vec![eq(att("name", "a"), s("x"))],
        ));
        let c = counit_sigma(&mapping_f(), &j, L).unwrap();
        assert!(c.is_entity_bijection());
    }

    #[test]
    fn triangle_identities() {
        for (f, i, j) in [
            (mapping_f(), model(instance_i()), model(instance_j())),
            (mapping_f0(), model(instance_i0()), model(instance_j())),
        ] {
            let si = sigma(&f, i.presentation(), L).unwrap().output;
            let t1 = sigma_morphism(&f, &unit_sigma(&f, &i, L).unwrap(), L)
                .unwrap()
                .then(&counit_sigma(&f, &si, L).unwrap())
                .unwrap();
            assert!(t1.is_identity());
            let dj = delta(&f, &j, L).unwrap().output;
            let t2 = unit_sigma(&f, &dj, L)
                .unwrap()
                .then(&delta_morphism(&f, &counit_sigma(&f, &j, L).unwrap(), L).unwrap())
                .unwrap();
            assert!(t2.is_identity());
            let pi_i = pi(&f, &i, L).unwrap().output;
            let t3 = unit_pi(&f, &pi_i, L)
                .unwrap()
                .then(&pi_morphism(&f, &counit_pi(&f, &i, L).unwrap(), L).unwrap())
                .unwrap();
            assert!(t3.is_identity());
            let t4 = delta_morphism(&f, &unit_pi(&f, &j, L).unwrap(), L)
                .unwrap()
                .then(&counit_pi(&f, &dj, L).unwrap())
                .unwrap();
            assert!(t4.is_identity());
        }
    }

    #[test]
    fn delta_pi_transpose_round_trips() {
        let f = mapping_f0();
        let i = model(instance_i0());
        let j = model(instance_j());
        let d = delta(&f, &j, L).unwrap();
        let p = pi(&f, &i, L).unwrap();
        let left = enumerate_morphisms(&d.output, &i, 1000).unwrap();
        let right = enumerate_morphisms(&j, &p.output, 1000).unwrap();
        assert_eq!(left.len(), right.len());
        for h in &left {
            let down = transpose(&f, Adjunction::DeltaPi, Direction::Down, h, &j, L).unwrap();
            assert!(right.contains(&down));
            let up = transpose(&f, Adjunction::DeltaPi, Direction::Up, &down, &i, L).unwrap();
            assert_eq!(&up, h);
        }
    }
}
