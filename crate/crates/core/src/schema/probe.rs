//! Equality of open terms over a schema.
//!
//! A term `t` with one free variable of entity sort `e` is read in the
//! one-generator instance on `e`. Two such terms are provably equal in the
//! schema exactly when they denote the same class there.

use std::cell::RefCell;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::schema::{InstancePresentation, Schema};
use crate::term::{build_term_model, Engine, SaturationLimits, Term, TermModel, Value};

/// Name of the probe generator. Not a valid identifier in the surface syntax.
pub const PROBE_GENERATOR: &str = "$v";

#[derive(Debug)]
pub enum Probe {
    /// The one-generator term model is finite.
    Complete(TermModel),
    /// Saturation stopped at the limit; only positive answers are reliable.
    Partial(PartialProbe),
}

/// The state of an unfinished saturation.
#[derive(Debug)]
pub struct PartialProbe(RefCell<Engine>);

impl Probe {
    pub fn new(schema: &Arc<Schema>, entity: &str, limits: SaturationLimits) -> Result<Probe> {
        if !schema.is_entity(entity) {
            return Err(Error::UnknownSort(entity.to_string()));
        }
        let inst = Arc::new(InstancePresentation::from_parts(
            format!("probe_{entity}"),
            Arc::clone(schema),
            &[(PROBE_GENERATOR, entity)],
            Vec::new(),
        ));
        match build_term_model(Arc::clone(&inst), limits) {
            Ok(m) => Ok(Probe::Complete(m)),
            Err(e) if e.is_resource_limit() => {
                let mut engine = Engine::new(
                    Arc::clone(schema),
                    vec![(PROBE_GENERATOR.to_string(), entity.to_string())],
                    limits,
                )?;
                // Keep whatever was derived before the limit was hit.
                match engine.saturate(&[]) {
                    Ok(()) => {}
                    Err(e) if e.is_resource_limit() => {}
                    Err(e) => return Err(e),
                }
                Ok(Probe::Partial(PartialProbe(RefCell::new(engine))))
            }
            Err(e) => Err(e),
        }
    }

    pub fn model(&self) -> Option<&TermModel> {
        match self {
            Probe::Complete(m) => Some(m),
            Probe::Partial(_) => None,
        }
    }

    pub fn is_complete(&self) -> bool {
        matches!(self, Probe::Complete(_))
    }

    /// Whether `a = b` holds for every value of the free variable.
    /// `None` means the partial probe could not decide.
    pub fn equal(&self, a: &Term, b: &Term) -> Result<Option<bool>> {
        let (a, b) = (close(a), close(b));
        match self {
            Probe::Complete(m) => {
                let (va, vb) = (m.eval(&a)?, m.eval(&b)?);
                Ok(Some(va == vb))
            }
            Probe::Partial(engine) => {
                let mut engine = engine.0.borrow_mut();
                let x = engine.add_term(&a, None)?;
                let y = engine.add_term(&b, None)?;
                engine.rebuild()?;
                if engine.find(x) == engine.find(y) {
                    Ok(Some(true))
                } else {
                    Ok(None)
                }
            }
        }
    }

    /// The class of `t` in a complete probe.
    pub fn value(&self, t: &Term) -> Result<Value> {
        match self {
            Probe::Complete(m) => m.eval(&close(t)),
            Probe::Partial(_) => Err(Error::ResourceLimit(
                "the schema's one-generator model is infinite".into(),
            )),
        }
    }
}

/// Replaces every variable by the probe generator.
pub(crate) fn close(t: &Term) -> Term {
    match t {
        Term::Var(_) => Term::constant(PROBE_GENERATOR),
        Term::Lit(_) => t.clone(),
        Term::App(name, args) => Term::App(name.clone(), args.iter().map(close).collect()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::fixtures::*;
    use crate::term::{Equation, Var};

    #[test]
    fn probe_on_running_schema() {
        let p = Probe::new(&schema_s(), "N1", SaturationLimits::default()).unwrap();
        assert!(p.is_complete());
        let v = Term::var("x", "N1");
        let a = Term::app("age", Term::app("f", v.clone()));
        assert_eq!(p.equal(&a, &a.clone()).unwrap(), Some(true));
        assert_eq!(p.equal(&a, &Term::app("salary", v)).unwrap(), Some(false));
    }

    #[test]
    fn partial_probe_answers_positively() {
        let v = Var::new("v", "A");
        let sch = Arc::new(
            Schema::builder("C", ty())
                .entity("A")
                .foreign_key("f", "A", "A")
                .foreign_key("g", "A", "A")
                .constraint(Equation::forall(
                    v.clone(),
                    Term::app("g", Term::Var(v.clone())),
                    Term::Var(v.clone()),
                ))
                .build(),
        );
        let p = Probe::new(&sch, "A", SaturationLimits::new(30, 1000).unwrap()).unwrap();
        assert!(!p.is_complete());
        let x = Term::Var(v);
        let fx = Term::app("f", x.clone());
        assert_eq!(
            p.equal(&Term::app("g", fx.clone()), &fx).unwrap(),
            Some(true)
        );
        assert_eq!(p.equal(&fx, &x).unwrap(), None);
    }
}
