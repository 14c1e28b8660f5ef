//! Term models (initial algebras) of instance presentations.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use indexmap::IndexMap;

use super::egraph::{Engine, Node, NodeId};
use crate::error::{Error, Result};
use crate::schema::{validate_instance, InstancePresentation, Schema};
use crate::term::{Literal, SortKind, Term};

/// Guards against presentations whose term model is infinite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SaturationLimits {
    pub max_classes_per_sort: usize,
    pub max_rounds: usize,
}

impl Default for SaturationLimits {
    fn default() -> Self {
        SaturationLimits {
            max_classes_per_sort: 10_000,
            max_rounds: 1_000,
        }
    }
}

impl SaturationLimits {
    pub fn new(max_classes_per_sort: usize, max_rounds: usize) -> Result<Self> {
        if max_classes_per_sort == 0 || max_rounds == 0 {
            return Err(Error::Invalid(
                "saturation limits must be strictly positive".into(),
            ));
        }
        Ok(SaturationLimits {
            max_classes_per_sort,
            max_rounds,
        })
    }
}

/// Index of a congruence class in a [`TermModel`].
///
/// Entity classes come first (grouped by entity in declaration order), then
/// type classes (grouped by type).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClassId(pub u32);

impl ClassId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// The denotation of a ground term: a class of the model, or a literal the
/// model never mentions (its own singleton class in the infinite carrier).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Class(ClassId),
    Lit(Literal),
}

impl Value {
    pub fn class(&self) -> Option<ClassId> {
        match self {
            Value::Class(c) => Some(*c),
            Value::Lit(_) => None,
        }
    }
}

/// Two distinct literals proven equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Collision(pub Literal, pub Literal);

impl fmt::Display for Collision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Collision({},{})", self.0, self.1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct ClassInfo {
    pub sort: usize,
    pub canonical: Term,
    pub literals: Vec<Literal>,
    /// 1-based position within the carrier of `sort`.
    pub label: usize,
    /// `(symbol, argument)` when the canonical term is an application.
    pub via: Option<(usize, ClassId)>,
}

/// How the image of a type class under a morphism is forced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Determiner {
    Literal(Literal),
    Constant(String),
    /// The class contains `attribute(entity class)`.
    Attribute(usize, ClassId),
    /// Only type-sorted generators: any image is allowed.
    Free,
}

/// The term model of an instance: per-sort carriers of congruence classes
/// with operation tables. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermModel {
    pub(crate) schema: Arc<Schema>,
    pub(crate) presentation: Arc<InstancePresentation>,
    pub(crate) classes: Vec<ClassInfo>,
    /// Carriers by schema sort index.
    pub(crate) carriers: Vec<Vec<ClassId>>,
    /// Tables by unary symbol index, aligned with the domain carrier.
    pub(crate) tables: Vec<Vec<ClassId>>,
    pub(crate) generators: IndexMap<String, ClassId>,
    pub(crate) constants: IndexMap<String, ClassId>,
    pub(crate) literal_index: HashMap<Literal, ClassId>,
    pub(crate) determiners: Vec<Determiner>,
}

impl TermModel {
    /// The same model under another instance name.
    pub(crate) fn with_name(&self, name: &str) -> TermModel {
        let mut pres = (*self.presentation).clone();
        pres.name = name.to_string();
        TermModel {
            presentation: Arc::new(pres),
            ..self.clone()
        }
    }

    pub fn schema(&self) -> &Arc<Schema> {
        &self.schema
    }

    pub fn presentation(&self) -> &Arc<InstancePresentation> {
        &self.presentation
    }

    pub fn name(&self) -> &str {
        &self.presentation.name
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    fn sort_index(&self, sort: &str) -> Result<usize> {
        self.schema
            .index()
            .sort_index
            .get(sort)
            .copied()
            .ok_or_else(|| Error::UnknownSort(sort.to_string()))
    }

    /// The carrier of `sort`. Type carriers list only the classes the model
    /// mentions; unmentioned literals are implicit.
    pub fn carrier(&self, sort: &str) -> &[ClassId] {
        self.sort_index(sort)
            .map(|s| self.carriers[s].as_slice())
            .unwrap_or(&[])
    }

    pub fn entity_classes(&self) -> impl Iterator<Item = ClassId> + '_ {
        self.classes
            .iter()
            .enumerate()
            .filter(|(_, c)| self.schema.index().sorts[c.sort].kind == SortKind::Entity)
            .map(|(i, _)| ClassId(i as u32))
    }

    pub fn type_classes(&self) -> impl Iterator<Item = ClassId> + '_ {
        self.classes
            .iter()
            .enumerate()
            .filter(|(_, c)| self.schema.index().sorts[c.sort].kind == SortKind::Type)
            .map(|(i, _)| ClassId(i as u32))
    }

    pub fn sort_of(&self, c: ClassId) -> &str {
        &self.schema.index().sorts[self.classes[c.index()].sort].name
    }

    pub(crate) fn sort_index_of(&self, c: ClassId) -> usize {
        self.classes[c.index()].sort
    }

    pub fn is_entity_class(&self, c: ClassId) -> bool {
        self.schema.index().sorts[self.classes[c.index()].sort].kind == SortKind::Entity
    }

    pub fn canonical_term(&self, c: ClassId) -> &Term {
        &self.classes[c.index()].canonical
    }

    pub fn literals(&self, c: ClassId) -> &[Literal] {
        &self.classes[c.index()].literals
    }

    pub fn literal(&self, c: ClassId) -> Option<&Literal> {
        self.classes[c.index()].literals.first()
    }

    /// Per-carrier 1-based label.
    pub fn label(&self, c: ClassId) -> usize {
        self.classes[c.index()].label
    }

    /// The class with label `label` in the carrier of `sort`.
    pub fn class_by_label(&self, sort: &str, label: usize) -> Option<ClassId> {
        label
            .checked_sub(1)
            .and_then(|i| self.carrier(sort).get(i).copied())
    }

    pub fn generator_class(&self, name: &str) -> Option<ClassId> {
        self.generators.get(name).copied()
    }

    pub fn generators(&self) -> impl Iterator<Item = (&str, ClassId)> {
        self.generators.iter().map(|(n, c)| (n.as_str(), *c))
    }

    pub fn constant_class(&self, name: &str) -> Option<ClassId> {
        self.constants.get(name).copied()
    }

    pub(crate) fn via(&self, c: ClassId) -> Option<(usize, ClassId)> {
        self.classes[c.index()].via
    }

    pub(crate) fn determiner(&self, c: ClassId) -> &Determiner {
        &self.determiners[c.index()]
    }

    /// The value of `lit` in this model.
    pub fn literal_value(&self, lit: &Literal) -> Value {
        match self.literal_index.get(lit) {
            Some(&c) => Value::Class(c),
            None => Value::Lit(lit.clone()),
        }
    }

    /// Normalises a value that may come from another model.
    pub fn normalize(&self, v: &Value) -> Value {
        match v {
            Value::Lit(l) => self.literal_value(l),
            other => other.clone(),
        }
    }

    pub(crate) fn symbol_index(&self, symbol: &str) -> Result<usize> {
        self.schema
            .index()
            .unary_index
            .get(symbol)
            .copied()
            .ok_or_else(|| Error::UnknownSymbol(symbol.to_string()))
    }

    pub(crate) fn apply_index(&self, sym: usize, c: ClassId) -> ClassId {
        let pos = self.classes[c.index()].label - 1;
        self.tables[sym][pos]
    }

    /// The class of `symbol(c)` for a foreign key or attribute.
    pub fn apply(&self, symbol: &str, c: ClassId) -> Result<ClassId> {
        let s = self.symbol_index(symbol)?;
        let dom = self.schema.index().unary[s].domain().unwrap_or_default();
        if self.sort_of(c) != dom {
            return Err(Error::sort_mismatch(
                format!("argument of `{symbol}`"),
                dom,
                self.sort_of(c).to_string(),
            ));
        }
        Ok(self.apply_index(s, c))
    }

    /// Evaluates a ground term over this model's presentation.
    pub fn eval(&self, t: &Term) -> Result<Value> {
        self.eval_with(t, None)
    }

    /// Evaluates a term whose only variable (if any) denotes `var`.
    pub fn eval_with(&self, t: &Term, var: Option<&Value>) -> Result<Value> {
        match t {
            Term::Var(v) => var
                .cloned()
                .ok_or_else(|| Error::UnboundVariable(v.name.clone())),
            Term::Lit(l) => Ok(self.literal_value(l)),
            Term::App(name, args) => match args.as_slice() {
                [] => self
                    .generators
                    .get(name)
                    .or_else(|| self.constants.get(name))
                    .map(|&c| Value::Class(c))
                    .ok_or_else(|| Error::UnknownSymbol(name.clone())),
                [arg] => match self.eval_with(arg, var)? {
                    Value::Class(c) => Ok(Value::Class(self.apply(name, c)?)),
                    Value::Lit(l) => Err(Error::sort_mismatch(
                        format!("argument of `{name}`"),
                        "an entity",
                        l.sort_name(),
                    )),
                },
                _ => Err(Error::UnknownSymbol(name.clone())),
            },
        }
    }

    /// Whether some class contains two distinct literals.
    pub fn is_consistent(&self) -> bool {
        self.collision().is_none()
    }

    pub fn collision(&self) -> Option<Collision> {
        self.type_classes().find_map(|c| match self.literals(c) {
            [a, b, ..] => Some(Collision(a.clone(), b.clone())),
            _ => None,
        })
    }

    /// Display string of a class: entity classes show their label, type
    /// classes their literal, else their canonical term with entity
    /// subterms replaced by labels (a labeled null such as `age(1)`).
    pub fn display(&self, c: ClassId) -> String {
        if self.is_entity_class(c) {
            return self.label(c).to_string();
        }
        if let Some(l) = self.literal(c) {
            return l.to_string();
        }
        match self.canonical_term(c) {
            Term::App(name, args) if args.len() == 1 => match self.eval(&args[0]) {
                Ok(Value::Class(e)) => format!("{name}({})", self.display(e)),
                _ => self.canonical_term(c).to_string(),
            },
            other => other.to_string(),
        }
    }

    pub fn display_value(&self, v: &Value) -> String {
        match v {
            Value::Class(c) => self.display(*c),
            Value::Lit(l) => l.to_string(),
        }
    }
}

/// Builds the term model of `inst`.
pub fn build_term_model(
    inst: Arc<InstancePresentation>,
    limits: SaturationLimits,
) -> Result<TermModel> {
    validate_instance(&inst)?;
    let engine = saturate_presentation(&inst, limits)?;
    Ok(freeze(&engine, inst))
}

pub(crate) fn saturate_presentation(
    inst: &InstancePresentation,
    limits: SaturationLimits,
) -> Result<Engine> {
    let gens = inst
        .generators
        .iter()
        .map(|g| (g.name.clone(), g.out.clone()))
        .collect();
    let mut engine = Engine::new(Arc::clone(&inst.schema), gens, limits)?;
    let eqs: Vec<(Term, Term)> = inst
        .equations
        .iter()
        .map(|e| (e.lhs.clone(), e.rhs.clone()))
        .collect();
    engine.saturate(&eqs)?;
    Ok(engine)
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum HeadKey {
    Gen(usize),
    Const(String),
    Lit(Literal),
}

/// Converts a saturated engine into a [`TermModel`].
///
/// Canonical terms are minimal under (depth, outermost symbol name, then
/// the argument's order), with generators ordered by declaration, then
/// constants, then literals. Classes are found level by level: a class's
/// canonical term at depth d+1 is `s(t)` where `t` is canonical at depth d.
pub(crate) fn freeze(engine: &Engine, presentation: Arc<InstancePresentation>) -> TermModel {
    let schema = Arc::clone(&engine.schema);
    let ix = schema.index();
    let roots = engine.roots();

    // Level 0: leaves.
    let mut best_leaf: HashMap<NodeId, HeadKey> = HashMap::new();
    let mut apps_by_child: HashMap<NodeId, Vec<(usize, NodeId)>> = HashMap::new();
    let mut literals: HashMap<NodeId, Vec<Literal>> = HashMap::new();
    for (id, node) in engine.nodes.iter().enumerate() {
        let root = engine.find(id);
        let key = match node {
            Node::Gen(g) => HeadKey::Gen(*g),
            Node::Const(c) => HeadKey::Const(schema.typeside.constants[*c].name.clone()),
            Node::Lit(l) => {
                literals.entry(root).or_default().push(l.clone());
                HeadKey::Lit(l.clone())
            }
            Node::App(s, child) => {
                apps_by_child
                    .entry(engine.find(*child))
                    .or_default()
                    .push((*s, root));
                continue;
            }
        };
        match best_leaf.get(&root) {
            Some(k) if *k <= key => {}
            _ => {
                best_leaf.insert(root, key);
            }
        }
    }

    // order: root -> (level, rank within level); canonical: root -> Term
    let mut order: HashMap<NodeId, (usize, usize)> = HashMap::new();
    let mut canonical: HashMap<NodeId, Term> = HashMap::new();
    let mut via: HashMap<NodeId, (usize, NodeId)> = HashMap::new();
    let mut level: Vec<NodeId> = best_leaf.keys().copied().collect();
    level.sort_by(|a, b| best_leaf[a].cmp(&best_leaf[b]));
    for (rank, &r) in level.iter().enumerate() {
        order.insert(r, (0, rank));
        let term = match &best_leaf[&r] {
            HeadKey::Gen(g) => Term::constant(engine.generators[*g].0.clone()),
            HeadKey::Const(c) => Term::constant(c.clone()),
            HeadKey::Lit(l) => Term::lit(l.clone()),
        };
        canonical.insert(r, term);
    }
    let mut depth = 0;
    while !level.is_empty() {
        depth += 1;
        // candidate key: (symbol name, rank of child)
        let mut cand: HashMap<NodeId, (&str, usize, usize, NodeId)> = HashMap::new();
        for &child in &level {
            let child_rank = order[&child].1;
            for &(s, parent) in apps_by_child.get(&child).into_iter().flatten() {
                if order.contains_key(&parent) {
                    continue;
                }
                let key = (ix.unary[s].name.as_str(), child_rank, s, child);
                match cand.get(&parent) {
                    Some(k) if (k.0, k.1) <= (key.0, key.1) => {}
                    _ => {
                        cand.insert(parent, key);
                    }
                }
            }
        }
        let mut next: Vec<NodeId> = cand.keys().copied().collect();
        next.sort_by(|a, b| (cand[a].0, cand[a].1).cmp(&(cand[b].0, cand[b].1)));
        for (rank, &r) in next.iter().enumerate() {
            let (name, _, s, child) = cand[&r];
            order.insert(r, (depth, rank));
            via.insert(r, (s, child));
            let term = Term::app(name, canonical[&child].clone());
            canonical.insert(r, term);
        }
        level = next;
    }

    // Carriers by sort, in canonical order.
    let mut by_sort: Vec<Vec<NodeId>> = vec![Vec::new(); ix.sorts.len()];
    for &r in &roots {
        by_sort[engine.node_sort[r]].push(r);
    }
    for members in &mut by_sort {
        members.sort_by_key(|r| order[r]);
    }
    let mut class_of_root: HashMap<NodeId, ClassId> = HashMap::new();
    let mut classes = Vec::with_capacity(roots.len());
    let mut carriers = vec![Vec::new(); ix.sorts.len()];
    let sort_order = (0..ix.sorts.len())
        .filter(|&s| ix.sorts[s].kind == SortKind::Entity)
        .chain((0..ix.sorts.len()).filter(|&s| ix.sorts[s].kind == SortKind::Type));
    for s in sort_order {
        for (pos, &r) in by_sort[s].iter().enumerate() {
            let id = ClassId(classes.len() as u32);
            class_of_root.insert(r, id);
            carriers[s].push(id);
            let mut lits = literals.remove(&r).unwrap_or_default();
            lits.sort();
            lits.dedup();
            classes.push(ClassInfo {
                sort: s,
                canonical: canonical[&r].clone(),
                literals: lits,
                label: pos + 1,
                via: None,
            });
        }
    }
    for (r, (s, child)) in &via {
        classes[class_of_root[r].index()].via = Some((*s, class_of_root[child]));
    }

    let tables: Vec<Vec<ClassId>> = ix
        .unary
        .iter()
        .enumerate()
        .map(|(s, sym)| {
            let dom = sym.domain().and_then(|d| ix.sort_index.get(d)).copied();
            dom.map(|d| {
                by_sort[d]
                    .iter()
                    .map(|&r| {
                        let node = engine
                            .lookup(&Node::App(s, r))
                            .expect("saturated model is closed under unary symbols");
                        class_of_root[&engine.find(node)]
                    })
                    .collect()
            })
            .unwrap_or_default()
        })
        .collect();

    let mut generators = IndexMap::new();
    for (g, (name, _)) in engine.generators.iter().enumerate() {
        if let Some(n) = engine.lookup(&Node::Gen(g)) {
            generators.insert(name.clone(), class_of_root[&n]);
        }
    }
    let mut constants = IndexMap::new();
    for (i, c) in schema.typeside.constants.iter().enumerate() {
        if let Some(n) = engine.lookup(&Node::Const(i)) {
            constants.insert(c.name.clone(), class_of_root[&n]);
        }
    }
    let mut literal_index = HashMap::new();
    for (id, info) in classes.iter().enumerate() {
        for l in &info.literals {
            literal_index.insert(l.clone(), ClassId(id as u32));
        }
    }

    let mut model = TermModel {
        schema: Arc::clone(&schema),
        presentation,
        classes,
        carriers,
        tables,
        generators,
        constants,
        literal_index,
        determiners: Vec::new(),
    };
    model.determiners = compute_determiners(&model);
    model
}

fn compute_determiners(m: &TermModel) -> Vec<Determiner> {
    let ix = m.schema.index();
    let mut by_att: BTreeMap<ClassId, (usize, ClassId)> = BTreeMap::new();
    for (s, sym) in ix.unary.iter().enumerate() {
        let Some(&dom) = sym.domain().and_then(|d| ix.sort_index.get(d)) else {
            continue;
        };
        if ix.sort_index.get(&sym.out).map(|&o| ix.sorts[o].kind) != Some(SortKind::Type) {
            continue;
        }
        for (pos, &x) in m.carriers[dom].iter().enumerate() {
            by_att.entry(m.tables[s][pos]).or_insert((s, x));
        }
    }
    let const_of: HashMap<ClassId, &String> = m.constants.iter().map(|(n, c)| (*c, n)).collect();
    (0..m.classes.len())
        .map(|i| {
            let c = ClassId(i as u32);
            if m.is_entity_class(c) {
                return Determiner::Free;
            }
            if let Some(l) = m.literal(c) {
                Determiner::Literal(l.clone())
            } else if let Some(name) = const_of.get(&c) {
                Determiner::Constant((*name).clone())
            } else if let Some(&(s, x)) = by_att.get(&c) {
                Determiner::Attribute(s, x)
            } else {
                Determiner::Free
            }
        })
        .collect()
}

/// Whether the instance proves `t1 = t2`.
pub fn decide_equal(m: &TermModel, t1: &Term, t2: &Term) -> Result<bool> {
    let a = m.eval(t1)?;
    let b = m.eval(t2)?;
    let (sa, sb) = (value_sort(m, &a), value_sort(m, &b));
    if sa != sb {
        return Err(Error::sort_mismatch("decide_equal", sa, sb));
    }
    Ok(a == b)
}

fn value_sort(m: &TermModel, v: &Value) -> String {
    match v {
        Value::Class(c) => m.sort_of(*c).to_string(),
        Value::Lit(l) => l.sort_name().to_string(),
    }
}

pub fn canonical_label(m: &TermModel, c: ClassId) -> String {
    m.display(c)
}

pub fn check_consistency(m: &TermModel) -> std::result::Result<(), Collision> {
    match m.collision() {
        None => Ok(()),
        Some(c) => Err(c),
    }
}
