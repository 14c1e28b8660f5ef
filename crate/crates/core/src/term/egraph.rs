//! Union-find over ground terms with congruence closure, plus the
//! saturation loop that turns a presentation into a term model.
//!
//! Nodes are hash-consed: a generator, a typeside constant, a literal, or a
//! unary symbol applied to a class. Classes are union-find roots; the root
//! of a class is always its smallest node id.

use std::collections::hash_map::Entry;
use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::schema::Schema;
use crate::term::{Literal, SaturationLimits, SortKind, Term};

pub(crate) type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) enum Node {
    Gen(usize),
    Const(usize),
    Lit(Literal),
    App(usize, NodeId),
}

#[derive(Debug, Clone)]
pub(crate) struct Engine {
    pub(crate) schema: Arc<Schema>,
    /// Generator names and sort indices, in declaration order.
    pub(crate) generators: Vec<(String, usize)>,
    gen_index: HashMap<String, usize>,
    pub(crate) nodes: Vec<Node>,
    pub(crate) node_sort: Vec<usize>,
    parent: Vec<NodeId>,
    memo: HashMap<Node, NodeId>,
    unions: usize,
    limits: SaturationLimits,
}

impl Engine {
    pub(crate) fn new(
        schema: Arc<Schema>,
        generators: Vec<(String, String)>,
        limits: SaturationLimits,
    ) -> Result<Self> {
        let ix = schema.index();
        let mut gens = Vec::with_capacity(generators.len());
        let mut gen_index = HashMap::new();
        for (name, sort) in generators {
            let s = *ix
                .sort_index
                .get(&sort)
                .ok_or_else(|| Error::UnknownSort(sort.clone()))?;
            gen_index.insert(name.clone(), gens.len());
            gens.push((name, s));
        }
        Ok(Engine {
            schema,
            generators: gens,
            gen_index,
            nodes: Vec::new(),
            node_sort: Vec::new(),
            parent: Vec::new(),
            memo: HashMap::new(),
            unions: 0,
            limits,
        })
    }

    pub(crate) fn find(&self, mut id: NodeId) -> NodeId {
        while self.parent[id] != id {
            id = self.parent[id];
        }
        id
    }

    fn find_mut(&mut self, id: NodeId) -> NodeId {
        let root = self.find(id);
        let mut cur = id;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    pub(crate) fn canonical(&self, node: &Node) -> Node {
        match node {
            Node::App(s, c) => Node::App(*s, self.find(*c)),
            other => other.clone(),
        }
    }

    pub(crate) fn lookup(&self, node: &Node) -> Option<NodeId> {
        self.memo
            .get(&self.canonical(node))
            .map(|&id| self.find(id))
    }

    fn sort_of_node(&self, node: &Node) -> Result<usize> {
        let ix = self.schema.index();
        Ok(match node {
            Node::Gen(g) => self.generators[*g].1,
            Node::Const(c) => {
                let name = &self.schema.typeside.constants[*c].out;
                *ix.sort_index
                    .get(name)
                    .ok_or_else(|| Error::UnknownSort(name.clone()))?
            }
            Node::Lit(l) => *ix
                .sort_index
                .get(l.sort_name())
                .filter(|&&s| ix.sorts[s].kind == SortKind::Type)
                .ok_or_else(|| Error::UnknownSort(l.sort_name().to_string()))?,
            Node::App(s, _) => {
                let out = &ix.unary[*s].out;
                *ix.sort_index
                    .get(out)
                    .ok_or_else(|| Error::UnknownSort(out.clone()))?
            }
        })
    }

    /// Adds a node (if absent) and returns its class.
    pub(crate) fn add(&mut self, node: Node) -> Result<NodeId> {
        let node = self.canonical(&node);
        if let Some(&id) = self.memo.get(&node) {
            return Ok(self.find_mut(id));
        }
        let sort = self.sort_of_node(&node)?;
        let id = self.nodes.len();
        self.nodes.push(node.clone());
        self.node_sort.push(sort);
        self.parent.push(id);
        self.memo.insert(node, id);
        Ok(id)
    }

    /// Adds a ground term, or an open term whose single variable denotes `var`.
    pub(crate) fn add_term(&mut self, term: &Term, var: Option<NodeId>) -> Result<NodeId> {
        match term {
            Term::Var(v) => var.ok_or_else(|| Error::UnboundVariable(v.name.clone())),
            Term::Lit(l) => self.add(Node::Lit(l.clone())),
            Term::App(name, args) => match args.as_slice() {
                [] => {
                    if let Some(&g) = self.gen_index.get(name) {
                        self.add(Node::Gen(g))
                    } else if let Some(c) = self
                        .schema
                        .typeside
                        .constants
                        .iter()
                        .position(|c| &c.name == name)
                    {
                        self.add(Node::Const(c))
                    } else {
                        Err(Error::UnknownSymbol(name.clone()))
                    }
                }
                [arg] => {
                    let s = *self
                        .schema
                        .index()
                        .unary_index
                        .get(name)
                        .ok_or_else(|| Error::UnknownSymbol(name.clone()))?;
                    let c = self.add_term(arg, var)?;
                    self.add(Node::App(s, c))
                }
                _ => Err(Error::UnknownSymbol(name.clone())),
            },
        }
    }

    pub(crate) fn union(&mut self, a: NodeId, b: NodeId) -> Result<bool> {
        let (ra, rb) = (self.find_mut(a), self.find_mut(b));
        if ra == rb {
            return Ok(false);
        }
        if self.node_sort[ra] != self.node_sort[rb] {
            let sorts = &self.schema.index().sorts;
            return Err(Error::sort_mismatch(
                "equation",
                sorts[self.node_sort[ra]].name.clone(),
                sorts[self.node_sort[rb]].name.clone(),
            ));
        }
        let (root, child) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[child] = root;
        self.unions += 1;
        Ok(true)
    }

    /// Restores the congruence invariant: equal children imply equal parents.
    pub(crate) fn rebuild(&mut self) -> Result<()> {
        loop {
            let mut changed = false;
            let mut memo: HashMap<Node, NodeId> = HashMap::with_capacity(self.nodes.len());
            for id in 0..self.nodes.len() {
                let canon = self.canonical(&self.nodes[id]);
                match memo.entry(canon) {
                    Entry::Occupied(o) => {
                        let other = *o.get();
                        changed |= self.union(other, id)?;
                    }
                    Entry::Vacant(v) => {
                        v.insert(id);
                    }
                }
            }
            if !changed {
                self.memo = memo;
                return Ok(());
            }
        }
    }

    pub(crate) fn roots(&self) -> Vec<NodeId> {
        (0..self.nodes.len())
            .filter(|&i| self.parent[i] == i)
            .collect()
    }

    fn check_limits(&self, round: usize) -> Result<()> {
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for r in self.roots() {
            *counts.entry(self.node_sort[r]).or_default() += 1;
        }
        for (sort, count) in counts {
            if count > self.limits.max_classes_per_sort {
                return Err(Error::ResourceLimit(format!(
                    "sort `{}` exceeded {} classes after {round} round(s); the term model may be infinite",
                    self.schema.index().sorts[sort].name,
                    self.limits.max_classes_per_sort
                )));
            }
        }
        Ok(())
    }

    /// Runs the saturation loop to a fixpoint.
    ///
    /// Each round closes every entity class under its foreign keys and
    /// attributes, instantiates every schema constraint at every entity
    /// class, and re-closes congruence. `equations` are asserted once up
    /// front, together with the typeside's ground equations.
    pub(crate) fn saturate(&mut self, equations: &[(Term, Term)]) -> Result<()> {
        for g in 0..self.generators.len() {
            self.add(Node::Gen(g))?;
        }
        for c in 0..self.schema.typeside.constants.len() {
            self.add(Node::Const(c))?;
        }
        let schema = Arc::clone(&self.schema);
        let ts_eqs = schema.typeside.equations.iter().map(|e| (&e.lhs, &e.rhs));
        for (l, r) in ts_eqs.chain(equations.iter().map(|(l, r)| (l, r))) {
            let a = self.add_term(l, None)?;
            let b = self.add_term(r, None)?;
            self.union(a, b)?;
        }
        self.rebuild()?;
        self.check_limits(0)?;

        let ix = schema.index();
        let constraints: Vec<_> = schema
            .constraints
            .iter()
            .filter_map(|eq| {
                let v = eq.vars.first()?;
                Some((ix.sort_index.get(&v.sort).copied()?, eq))
            })
            .collect();

        let mut round = 0;
        loop {
            round += 1;
            if round > self.limits.max_rounds {
                return Err(Error::ResourceLimit(format!(
                    "saturation did not converge within {} rounds",
                    self.limits.max_rounds
                )));
            }
            let nodes_before = self.nodes.len();
            let unions_before = self.unions;

            let entity_roots: Vec<NodeId> = self
                .roots()
                .into_iter()
                .filter(|&r| ix.sorts[self.node_sort[r]].kind == SortKind::Entity)
                .collect();
            for &r in &entity_roots {
                let sort = self.node_sort[r];
                for &s in &ix.by_domain[sort] {
                    self.add(Node::App(s, r))?;
                }
            }
            for &(sort, eq) in &constraints {
                for &r in &entity_roots {
                    if self.node_sort[r] != sort {
                        continue;
                    }
                    let a = self.add_term(&eq.lhs, Some(r))?;
                    let b = self.add_term(&eq.rhs, Some(r))?;
                    self.union(a, b)?;
                }
            }
            self.rebuild()?;
            self.check_limits(round)?;
            if self.nodes.len() == nodes_before && self.unions == unions_before {
                return Ok(());
            }
        }
    }
}
