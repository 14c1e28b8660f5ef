//! Instance morphisms: enumeration, construction from generator images,
//! and isomorphism search.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::term::model::Determiner;
use crate::term::{ClassId, Literal, SortKind, Term, TermModel, Value};

/// A homomorphism of term models over the same schema, given by the image
/// of every class of the source.
#[derive(Debug, Clone)]
pub struct InstanceMorphism {
    source: Arc<TermModel>,
    target: Arc<TermModel>,
    images: Vec<Value>,
}

impl PartialEq for InstanceMorphism {
    fn eq(&self, other: &Self) -> bool {
        self.images == other.images
            && same_model(&self.source, &other.source)
            && same_model(&self.target, &other.target)
    }
}

impl Eq for InstanceMorphism {}

pub(crate) fn same_model(a: &Arc<TermModel>, b: &Arc<TermModel>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

impl InstanceMorphism {
    pub fn source(&self) -> &Arc<TermModel> {
        &self.source
    }

    pub fn target(&self) -> &Arc<TermModel> {
        &self.target
    }

    pub fn images(&self) -> &[Value] {
        &self.images
    }

    pub fn image(&self, c: ClassId) -> &Value {
        &self.images[c.index()]
    }

    /// Image of an entity class.
    pub fn entity_image(&self, c: ClassId) -> ClassId {
        self.images[c.index()]
            .class()
            .expect("entity classes map to classes")
    }

    /// Image of a value of the source, literals included.
    pub fn apply(&self, v: &Value) -> Value {
        match v {
            Value::Class(c) => self.images[c.index()].clone(),
            Value::Lit(l) => self.target.literal_value(l),
        }
    }

    pub fn identity(m: &Arc<TermModel>) -> InstanceMorphism {
        InstanceMorphism {
            source: Arc::clone(m),
            target: Arc::clone(m),
            images: (0..m.class_count())
                .map(|i| Value::Class(ClassId(i as u32)))
                .collect(),
        }
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &InstanceMorphism) -> Result<InstanceMorphism> {
        if !same_model(&self.target, &next.source) {
            return Err(Error::SchemaMismatch("morphisms are not composable".into()));
        }
        Ok(InstanceMorphism {
            source: Arc::clone(&self.source),
            target: Arc::clone(&next.target),
            images: self.images.iter().map(|v| next.apply(v)).collect(),
        })
    }

    pub fn is_identity(&self) -> bool {
        same_model(&self.source, &self.target)
            && self
                .images
                .iter()
                .enumerate()
                .all(|(i, v)| *v == Value::Class(ClassId(i as u32)))
    }

    /// Injective and surjective on every entity carrier.
    pub fn is_entity_bijection(&self) -> bool {
        let schema = self.source.schema();
        schema.entities.iter().all(|e| {
            let src = self.source.carrier(e);
            let tgt = self.target.carrier(e);
            let mut hit = vec![false; tgt.len()];
            for &c in src {
                let pos = self.target.label(self.entity_image(c)) - 1;
                if hit[pos] {
                    return false;
                }
                hit[pos] = true;
            }
            src.len() == tgt.len()
        })
    }

    /// Builds the morphism sending each generator to `image(name)`, and
    /// checks that it is well defined and commutes with every operation.
    ///
    /// `image` may return `None` for generators whose class is determined
    /// by other data (literals, constants, attribute values).
    pub fn from_generators(
        source: &Arc<TermModel>,
        target: &Arc<TermModel>,
        image: impl Fn(&str) -> Result<Option<Value>>,
    ) -> Result<InstanceMorphism> {
        let plan = Plan::new(source, target, true)?;
        let mut images: Vec<Option<Value>> = vec![None; source.class_count()];
        plan.fill(0, &mut images)?;
        for (i, &c) in plan.choices.iter().enumerate() {
            let name = generator_of(source, c)
                .ok_or_else(|| Error::Invalid(format!("class {c} has no generator")))?;
            let v = image(name)?
                .ok_or_else(|| Error::Invalid(format!("no image given for generator `{name}`")))?;
            images[c.index()] = Some(target.normalize(&v));
            plan.fill(i + 1, &mut images)?;
        }
        for i in 0..=plan.choices.len() {
            if !plan.checks_pass(i, &images) {
                return Err(Error::Invalid(
                    "generator images do not define a morphism".into(),
                ));
            }
        }
        for (name, c) in source.generators() {
            if let Some(v) = image(name)? {
                if images[c.index()].as_ref() != Some(&target.normalize(&v)) {
                    return Err(Error::Invalid(format!(
                        "generator `{name}` has inconsistent images"
                    )));
                }
            }
        }
        Ok(InstanceMorphism {
            source: Arc::clone(source),
            target: Arc::clone(target),
            images: images
                .into_iter()
                .map(|v| v.expect("all classes filled"))
                .collect(),
        })
    }
}

fn generator_of(m: &TermModel, c: ClassId) -> Option<&str> {
    match m.canonical_term(c) {
        Term::App(name, args) if args.is_empty() => Some(name.as_str()),
        _ => None,
    }
}

#[derive(Debug, Clone)]
enum Step {
    Choice,
    Fixed(Value),
    Apply(usize, ClassId),
}

#[derive(Debug, Clone, Copy)]
enum Check {
    /// `image(sym(x)) == sym(image(x))`
    Op { x: ClassId, sym: usize, y: ClassId },
    /// `image(c) == value`
    Fixed { c: ClassId, value: usize },
}

/// How each class's image follows from the images of the choice classes
/// (generator classes), and which commutation checks become decidable
/// after each choice.
struct Plan<'a> {
    target: &'a TermModel,
    steps: Vec<Step>,
    choices: Vec<ClassId>,
    /// Classes to fill after choice `i - 1`; group 0 needs no choice.
    members: Vec<Vec<ClassId>>,
    checks: Vec<Vec<Check>>,
    fixed_values: Vec<Value>,
}

impl<'a> Plan<'a> {
    fn new(source: &TermModel, target: &'a TermModel, free_types: bool) -> Result<Plan<'a>> {
        if source.schema() != target.schema() {
            return Err(Error::SchemaMismatch(format!(
                "`{}` and `{}` are on different schemas",
                source.name(),
                target.name()
            )));
        }
        let n = source.class_count();
        let mut steps = Vec::with_capacity(n);
        for i in 0..n {
            let c = ClassId(i as u32);
            let step = if let Some((s, x)) = source.via(c) {
                Step::Apply(s, x)
            } else if let Some(l) = source.literal(c) {
                Step::Fixed(target.literal_value(l))
            } else if source.is_entity_class(c) {
                Step::Choice
            } else {
                match source.determiner(c) {
                    Determiner::Literal(l) => Step::Fixed(target.literal_value(l)),
                    Determiner::Constant(k) => Step::Fixed(constant_value(target, k)?),
                    Determiner::Attribute(s, x) => Step::Apply(*s, *x),
                    Determiner::Free if free_types => Step::Choice,
                    Determiner::Free => {
                        return Err(Error::ResourceLimit(format!(
                            "`{}` has an unconstrained value `{}`; its hom-sets are infinite",
                            source.name(),
                            source.display(c)
                        )))
                    }
                }
            };
            steps.push(step);
        }
        // entity classes by depth, then type classes
        let mut order: Vec<ClassId> = (0..n).map(|i| ClassId(i as u32)).collect();
        order.sort_by_key(|&c| {
            (
                !source.is_entity_class(c),
                source.canonical_term(c).depth(),
                c,
            )
        });
        let choices: Vec<ClassId> = order
            .iter()
            .copied()
            .filter(|c| matches!(steps[c.index()], Step::Choice))
            .collect();
        let mut group = vec![0usize; n];
        for (i, &c) in choices.iter().enumerate() {
            group[c.index()] = i + 1;
        }
        for &c in &order {
            if let Step::Apply(_, x) = steps[c.index()] {
                group[c.index()] = group[x.index()];
            }
        }
        let mut members = vec![Vec::new(); choices.len() + 1];
        for &c in &order {
            if !matches!(steps[c.index()], Step::Choice) {
                members[group[c.index()]].push(c);
            }
        }

        let mut checks = vec![Vec::new(); choices.len() + 1];
        let mut fixed_values = Vec::new();
        let ix = source.schema().index();
        for x in source.entity_classes() {
            for &sym in &ix.by_domain[source.sort_index_of(x)] {
                let y = source.apply_index(sym, x);
                if let Step::Apply(s, arg) = steps[y.index()] {
                    if s == sym && arg == x {
                        continue;
                    }
                }
                let g = group[x.index()].max(group[y.index()]);
                checks[g].push(Check::Op { x, sym, y });
            }
        }
        for i in 0..n {
            let c = ClassId(i as u32);
            let mut required: Vec<Value> = source
                .literals(c)
                .iter()
                .map(|l| target.literal_value(l))
                .collect();
            for (k, kc) in &source.constants {
                if *kc == c {
                    required.push(constant_value(target, k)?);
                }
            }
            for v in required {
                if let Step::Fixed(f) = &steps[i] {
                    if *f == v {
                        continue;
                    }
                }
                checks[group[i]].push(Check::Fixed {
                    c,
                    value: fixed_values.len(),
                });
                fixed_values.push(v);
            }
        }
        Ok(Plan {
            target,
            steps,
            choices,
            members,
            checks,
            fixed_values,
        })
    }

    /// Computes the images of group `g` from already assigned classes.
    fn fill(&self, g: usize, images: &mut [Option<Value>]) -> Result<()> {
        for &c in &self.members[g] {
            let v = match &self.steps[c.index()] {
                Step::Fixed(v) => v.clone(),
                Step::Apply(s, x) => match &images[x.index()] {
                    Some(Value::Class(xc)) => Value::Class(self.target.apply_index(*s, *xc)),
                    _ => return Err(Error::Invalid("image of an entity is not a class".into())),
                },
                Step::Choice => continue,
            };
            images[c.index()] = Some(v);
        }
        Ok(())
    }

    fn checks_pass(&self, g: usize, images: &[Option<Value>]) -> bool {
        self.checks[g].iter().all(|check| match *check {
            Check::Op { x, sym, y } => match (&images[x.index()], &images[y.index()]) {
                (Some(Value::Class(xc)), Some(yv)) => {
                    *yv == Value::Class(self.target.apply_index(sym, *xc))
                }
                _ => false,
            },
            Check::Fixed { c, value } => {
                images[c.index()].as_ref() == Some(&self.fixed_values[value])
            }
        })
    }
}

fn constant_value(target: &TermModel, k: &str) -> Result<Value> {
    target
        .constant_class(k)
        .map(Value::Class)
        .ok_or_else(|| Error::UnknownSymbol(k.to_string()))
}

/// Per-class invariants that every isomorphism preserves.
fn signature(m: &TermModel, c: ClassId) -> (usize, Vec<Option<Literal>>, Vec<usize>) {
    let ix = m.schema().index();
    let sort = m.sort_index_of(c);
    let lits = ix.by_domain[sort]
        .iter()
        .map(|&s| {
            let y = m.apply_index(s, c);
            if m.is_entity_class(y) {
                None
            } else {
                m.literal(y).cloned()
            }
        })
        .collect();
    let indegree = (0..ix.unary.len())
        .filter(|&s| {
            ix.sort_index
                .get(&ix.unary[s].out)
                .map(|&o| ix.sorts[o].kind)
                == Some(SortKind::Entity)
        })
        .map(|s| {
            let dom = ix.unary[s]
                .domain()
                .and_then(|d| ix.sort_index.get(d))
                .copied();
            dom.map(|d| {
                m.carriers[d]
                    .iter()
                    .filter(|&&x| m.apply_index(s, x) == c)
                    .count()
            })
            .unwrap_or(0)
        })
        .collect();
    (sort, lits, indegree)
}

struct Search<'a> {
    plan: Plan<'a>,
    source: &'a TermModel,
    target: &'a TermModel,
    injective: bool,
    candidates: Vec<Vec<ClassId>>,
}

impl Search<'_> {
    /// Depth-first search; `visit` returns `false` to stop.
    fn run(&self, visit: &mut dyn FnMut(Vec<Value>) -> Result<bool>) -> Result<()> {
        let mut images: Vec<Option<Value>> = vec![None; self.source.class_count()];
        self.plan.fill(0, &mut images)?;
        if !self.plan.checks_pass(0, &images) {
            return Ok(());
        }
        let mut used = vec![false; self.target.class_count()];
        self.descend(0, &mut images, &mut used, visit)?;
        Ok(())
    }

    fn descend(
        &self,
        i: usize,
        images: &mut Vec<Option<Value>>,
        used: &mut Vec<bool>,
        visit: &mut dyn FnMut(Vec<Value>) -> Result<bool>,
    ) -> Result<bool> {
        if i == self.plan.choices.len() {
            let full = images.iter().map(|v| v.clone().expect("filled")).collect();
            return visit(full);
        }
        let c = self.plan.choices[i];
        for &cand in &self.candidates[i] {
            if self.injective && used[cand.index()] {
                continue;
            }
            images[c.index()] = Some(Value::Class(cand));
            self.plan.fill(i + 1, images)?;
            let mut marked = Vec::new();
            let mut ok = self.plan.checks_pass(i + 1, images);
            if ok && self.injective {
                for &m in std::iter::once(&c).chain(&self.plan.members[i + 1]) {
                    if !self.source.is_entity_class(m) {
                        continue;
                    }
                    let t = images[m.index()]
                        .as_ref()
                        .and_then(Value::class)
                        .expect("entity image");
                    if used[t.index()] {
                        ok = false;
                        break;
                    }
                    used[t.index()] = true;
                    marked.push(t);
                }
            }
            if ok && !self.descend(i + 1, images, used, visit)? {
                return Ok(false);
            }
            for t in marked {
                used[t.index()] = false;
            }
        }
        for &m in &self.plan.members[i + 1] {
            images[m.index()] = None;
        }
        images[c.index()] = None;
        Ok(true)
    }
}

fn search<'a>(a: &'a TermModel, b: &'a TermModel, injective: bool) -> Result<Search<'a>> {
    let plan = Plan::new(a, b, false)?;
    let candidates = plan
        .choices
        .iter()
        .map(|&c| {
            let all = b.carrier(a.sort_of(c));
            if injective {
                let sig = signature(a, c);
                all.iter()
                    .copied()
                    .filter(|&d| signature(b, d) == sig)
                    .collect()
            } else {
                all.to_vec()
            }
        })
        .collect();
    Ok(Search {
        plan,
        source: a,
        target: b,
        injective,
        candidates,
    })
}

/// Every morphism `a -> b`, in a deterministic order.
pub fn enumerate_morphisms(
    a: &Arc<TermModel>,
    b: &Arc<TermModel>,
    cap: usize,
) -> Result<Vec<InstanceMorphism>> {
    let s = search(a, b, false)?;
    let mut out = Vec::new();
    let mut overflow = false;
    s.run(&mut |images| {
        if out.len() == cap {
            overflow = true;
            return Ok(false);
        }
        out.push(InstanceMorphism {
            source: Arc::clone(a),
            target: Arc::clone(b),
            images,
        });
        Ok(true)
    })?;
    if overflow {
        return Err(Error::ResourceLimit(format!(
            "more than {cap} morphisms from `{}` to `{}`",
            a.name(),
            b.name()
        )));
    }
    Ok(out)
}

/// Number of morphisms `a -> b`.
pub fn count_morphisms(a: &Arc<TermModel>, b: &Arc<TermModel>, cap: usize) -> Result<usize> {
    enumerate_morphisms(a, b, cap).map(|v| v.len())
}

/// An isomorphism `a -> b`, if one exists.
pub fn instances_isomorphic(
    a: &Arc<TermModel>,
    b: &Arc<TermModel>,
) -> Result<Option<InstanceMorphism>> {
    if a.schema() != b.schema() {
        return Err(Error::SchemaMismatch(format!(
            "`{}` and `{}` are on different schemas",
            a.name(),
            b.name()
        )));
    }
    for e in &a.schema().entities {
        if a.carrier(e).len() != b.carrier(e).len() {
            return Ok(None);
        }
    }
    let s = search(a, b, true)?;
    let mut found = None;
    s.run(&mut |images| {
        let h = InstanceMorphism {
            source: Arc::clone(a),
            target: Arc::clone(b),
            images,
        };
        if inverse(&h)?.is_some() {
            found = Some(h);
            return Ok(false);
        }
        Ok(true)
    })?;
    Ok(found)
}

/// The inverse of an entity-bijective morphism, if it is a morphism.
pub fn inverse(h: &InstanceMorphism) -> Result<Option<InstanceMorphism>> {
    if !h.is_entity_bijection() {
        return Ok(None);
    }
    let (a, b) = (h.source(), h.target());
    let back: HashMap<ClassId, ClassId> =
        a.entity_classes().map(|c| (h.entity_image(c), c)).collect();
    let by_gen: HashMap<&str, ClassId> = b.generators().collect();
    let g = InstanceMorphism::from_generators(b, a, |name| {
        let c = by_gen[name];
        Ok(if b.is_entity_class(c) {
            Some(Value::Class(back[&c]))
        } else {
            None
        })
    });
    match g {
        Ok(g) => Ok(Some(g)),
        Err(e) if e.is_resource_limit() => Err(e),
        Err(_) => Ok(None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::fixtures::*;
    use crate::schema::InstancePresentation;
    use crate::term::{build_term_model, SaturationLimits};

    fn model(inst: InstancePresentation) -> Arc<TermModel> {
        Arc::new(build_term_model(Arc::new(inst), SaturationLimits::default()).unwrap())
    }

    #[test]
    fn identity_is_an_endomorphism() {
        let i = model(instance_i());
        let homs = enumerate_morphisms(&i, &i, 100).unwrap();
        assert!(homs.iter().any(InstanceMorphism::is_identity));
        assert_eq!(homs.len(), 1);
    }

    #[test]
    fn from_empty_is_unique() {
        let e = model(InstancePresentation::empty("E", schema_s()));
        let i = model(instance_i());
        assert_eq!(count_morphisms(&e, &i, 10).unwrap(), 1);
        assert_eq!(count_morphisms(&i, &e, 10).unwrap(), 0);
    }

    #[test]
    fn free_generator_picks_a_row() {
        let free = model(InstancePresentation::from_parts(
            "G",
            schema_s(),
            &[("g", "N2")],
            vec![],
        ));
        let i = model(instance_i());
        assert_eq!(count_morphisms(&free, &i, 10).unwrap(), 3);
    }

    #[test]
    fn permuted_labels_are_isomorphic() {
        let i = model(instance_i());
        let mut p = instance_i();
        p.generators.reverse();
        let p = model(InstancePresentation::new(
            "P",
            p.schema,
            p.generators,
            p.equations,
        ));
        let h = instances_isomorphic(&i, &p).unwrap().expect("iso");
        let g = inverse(&h).unwrap().unwrap();
        assert!(h.then(&g).unwrap().is_identity());
        let e = model(InstancePresentation::empty("E", schema_s()));
        assert!(instances_isomorphic(&i, &e).unwrap().is_none());
    }

    #[test]
    fn nulls_can_be_filled_but_not_back() {
        let null = model(InstancePresentation::from_parts(
            "G",
            schema_s(),
            &[("g", "N2")],
            vec![],
        ));
        let filled = model(InstancePresentation::from_parts(
            "H",
            schema_s(),
            &[("h", "N2")],
            vec![eq(att("age", "h"), n(5))],
        ));
        assert_eq!(count_morphisms(&null, &filled, 10).unwrap(), 1);
        assert_eq!(count_morphisms(&filled, &null, 10).unwrap(), 0);
        assert!(instances_isomorphic(&null, &filled).unwrap().is_none());
    }

    #[test]
    fn cap_is_enforced() {
        let free = model(InstancePresentation::from_parts(
            "G",
            schema_s(),
            &[("a", "N2"), ("b", "N2")],
            vec![],
        ));
        let i = model(instance_i());
        assert_eq!(count_morphisms(&free, &i, 9).unwrap(), 9);
        assert!(count_morphisms(&free, &i, 8)
            .unwrap_err()
            .is_resource_limit());
    }

    #[test]
    fn free_type_generator_is_unbounded() {
        let inst = InstancePresentation::from_parts("T", schema_s(), &[("x", "Int")], vec![]);
        let m = model(inst);
        assert!(count_morphisms(&m, &m, 10).unwrap_err().is_resource_limit());
    }
}
