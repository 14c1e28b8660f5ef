//! Typesides, schemas and instance presentations, plus their validators.
//!
//! Schema mappings live in [`mapping`]; the one-generator probe models used
//! to decide equality of open terms live in [`probe`].

pub mod mapping;
pub mod probe;

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::term::{
    Equation, FunctionSymbol, Signature, Sort, SortKind, SymbolFlavor, INT_TYPE, STRING_TYPE,
};

pub use mapping::{
    apply_mapping_term, compose_mappings, mappings_equal, mappings_equal_with, validate_mapping,
    validate_mapping_with, Mapping, SymbolImage,
};
pub use probe::Probe;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    Int,
    String,
}

/// The theory of value types shared by every schema built on it.
///
/// Only 0-ary constants and ground equations are supported; the types
/// `Int` and `String` carry built-in literals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Typeside {
    pub name: String,
    pub types: Vec<String>,
    pub constants: Vec<FunctionSymbol>,
    pub equations: Vec<Equation>,
}

impl Typeside {
    pub fn new(name: impl Into<String>) -> Self {
        Typeside {
            name: name.into(),
            types: Vec::new(),
            constants: Vec::new(),
            equations: Vec::new(),
        }
    }

    /// `Int` and `String`, no constants, no equations.
    pub fn builtin(name: impl Into<String>) -> Self {
        Typeside {
            types: vec![STRING_TYPE.to_string(), INT_TYPE.to_string()],
            ..Typeside::new(name)
        }
    }

    pub fn with_type(mut self, ty: impl Into<String>) -> Self {
        self.types.push(ty.into());
        self
    }

    pub fn with_constant(mut self, name: impl Into<String>, ty: impl Into<String>) -> Self {
        self.constants.push(FunctionSymbol::constant(
            name,
            ty,
            SymbolFlavor::TypesideConstant,
        ));
        self
    }

    pub fn builtin_of(&self, ty: &str) -> Option<Builtin> {
        if !self.types.iter().any(|t| t == ty) {
            return None;
        }
        match ty {
            INT_TYPE => Some(Builtin::Int),
            STRING_TYPE => Some(Builtin::String),
            _ => None,
        }
    }

    pub fn has_type(&self, ty: &str) -> bool {
        self.types.iter().any(|t| t == ty)
    }
}

impl Signature for Typeside {
    fn sort_kind(&self, sort: &str) -> Option<SortKind> {
        self.has_type(sort).then_some(SortKind::Type)
    }

    fn symbol(&self, name: &str) -> Option<&FunctionSymbol> {
        self.constants.iter().find(|c| c.name == name)
    }
}

pub fn validate_typeside(ts: &Typeside) -> Result<()> {
    for eq in &ts.equations {
        if !eq.is_ground() {
            return Err(Error::NonGroundTypesideEquation(eq.to_string()));
        }
    }
    let mut seen = HashSet::new();
    for name in ts.types.iter().chain(ts.constants.iter().map(|c| &c.name)) {
        if !seen.insert(name.as_str()) {
            return Err(Error::DuplicateName(name.clone()));
        }
    }
    for c in &ts.constants {
        if !c.args.is_empty() {
            return Err(Error::Invalid(format!(
                "typeside symbol `{}` must be a constant",
                c.name
            )));
        }
        if !ts.has_type(&c.out) {
            return Err(Error::UnknownSort(c.out.clone()));
        }
    }
    for eq in &ts.equations {
        eq.check(ts)?;
    }
    Ok(())
}

/// Sort and symbol numbering shared by the saturation engine and term models.
///
/// Sorts are the schema's entities followed by the typeside's types; unary
/// symbols are the foreign keys followed by the attributes.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub(crate) struct SchemaIndex {
    pub sorts: Vec<Sort>,
    pub sort_index: HashMap<String, usize>,
    pub unary: Vec<FunctionSymbol>,
    pub unary_index: HashMap<String, usize>,
    /// Unary symbols by index of their domain sort.
    pub by_domain: Vec<Vec<usize>>,
    pub symbols: HashMap<String, FunctionSymbol>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    pub name: String,
    pub typeside: Arc<Typeside>,
    pub entities: Vec<String>,
    pub foreign_keys: Vec<FunctionSymbol>,
    pub attributes: Vec<FunctionSymbol>,
    pub constraints: Vec<Equation>,
    index: SchemaIndex,
}

impl Schema {
    pub fn new(
        name: impl Into<String>,
        typeside: Arc<Typeside>,
        entities: Vec<String>,
        foreign_keys: Vec<FunctionSymbol>,
        attributes: Vec<FunctionSymbol>,
        constraints: Vec<Equation>,
    ) -> Self {
        let mut schema = Schema {
            name: name.into(),
            typeside,
            entities,
            foreign_keys,
            attributes,
            constraints,
            index: SchemaIndex::default(),
        };
        schema.index = schema.build_index();
        schema
    }

    /// Builder-style constructor for tests and programmatic use.
    pub fn builder(name: impl Into<String>, typeside: Arc<Typeside>) -> SchemaBuilder {
        SchemaBuilder {
            name: name.into(),
            typeside,
            entities: Vec::new(),
            foreign_keys: Vec::new(),
            attributes: Vec::new(),
            constraints: Vec::new(),
        }
    }

    fn build_index(&self) -> SchemaIndex {
        let mut ix = SchemaIndex::default();
        for e in &self.entities {
            ix.sort_index.entry(e.clone()).or_insert(ix.sorts.len());
            ix.sorts.push(Sort::entity(e.clone()));
        }
        for t in &self.typeside.types {
            ix.sort_index.entry(t.clone()).or_insert(ix.sorts.len());
            ix.sorts.push(Sort::ty(t.clone()));
        }
        ix.by_domain = vec![Vec::new(); ix.sorts.len()];
        for sym in self.foreign_keys.iter().chain(&self.attributes) {
            let i = ix.unary.len();
            ix.unary_index.entry(sym.name.clone()).or_insert(i);
            ix.unary.push(sym.clone());
            if let Some(&d) = sym.domain().and_then(|d| ix.sort_index.get(d)) {
                ix.by_domain[d].push(i);
            }
        }
        for sym in self
            .typeside
            .constants
            .iter()
            .chain(&self.foreign_keys)
            .chain(&self.attributes)
        {
            ix.symbols
                .entry(sym.name.clone())
                .or_insert_with(|| sym.clone());
        }
        ix
    }

    pub(crate) fn index(&self) -> &SchemaIndex {
        &self.index
    }

    pub fn is_entity(&self, name: &str) -> bool {
        self.entities.iter().any(|e| e == name)
    }

    pub fn foreign_key(&self, name: &str) -> Option<&FunctionSymbol> {
        self.foreign_keys.iter().find(|f| f.name == name)
    }

    pub fn attribute(&self, name: &str) -> Option<&FunctionSymbol> {
        self.attributes.iter().find(|f| f.name == name)
    }

    /// Foreign keys and attributes in declaration order.
    pub fn unary_symbols(&self) -> impl Iterator<Item = &FunctionSymbol> {
        self.foreign_keys.iter().chain(&self.attributes)
    }

    /// Symbols whose domain is `entity`: attributes first, then foreign keys.
    /// This is the column order used when rendering tables.
    pub fn columns_of<'a>(&'a self, entity: &'a str) -> impl Iterator<Item = &'a FunctionSymbol> {
        self.attributes
            .iter()
            .chain(&self.foreign_keys)
            .filter(move |s| s.domain() == Some(entity))
    }
}

impl Signature for Schema {
    fn sort_kind(&self, sort: &str) -> Option<SortKind> {
        self.index
            .sort_index
            .get(sort)
            .map(|&i| self.index.sorts[i].kind)
    }

    fn symbol(&self, name: &str) -> Option<&FunctionSymbol> {
        self.index.symbols.get(name)
    }
}

pub struct SchemaBuilder {
    name: String,
    typeside: Arc<Typeside>,
    entities: Vec<String>,
    foreign_keys: Vec<FunctionSymbol>,
    attributes: Vec<FunctionSymbol>,
    constraints: Vec<Equation>,
}

impl SchemaBuilder {
    pub fn entity(mut self, name: &str) -> Self {
        self.entities.push(name.to_string());
        self
    }

    pub fn foreign_key(mut self, name: &str, from: &str, to: &str) -> Self {
        self.foreign_keys.push(FunctionSymbol::unary(
            name,
            from,
            to,
            SymbolFlavor::ForeignKey,
        ));
        self
    }

    pub fn attribute(mut self, name: &str, from: &str, ty: &str) -> Self {
        self.attributes.push(FunctionSymbol::unary(
            name,
            from,
            ty,
            SymbolFlavor::Attribute,
        ));
        self
    }

    pub fn constraint(mut self, eq: Equation) -> Self {
        self.constraints.push(eq);
        self
    }

    pub fn build(self) -> Schema {
        Schema::new(
            self.name,
            self.typeside,
            self.entities,
            self.foreign_keys,
            self.attributes,
            self.constraints,
        )
    }
}

pub fn validate_schema(s: &Schema) -> Result<()> {
    validate_typeside(&s.typeside)?;
    let mut seen = HashSet::new();
    let names = s
        .typeside
        .types
        .iter()
        .chain(s.typeside.constants.iter().map(|c| &c.name))
        .chain(&s.entities)
        .chain(s.unary_symbols().map(|f| &f.name));
    for name in names {
        if !seen.insert(name.as_str()) {
            return Err(Error::DuplicateName(name.clone()));
        }
    }
    for sym in s.unary_symbols() {
        let [dom] = sym.args.as_slice() else {
            return Err(Error::Invalid(format!("`{}` must be unary", sym.name)));
        };
        let dom_kind = s
            .sort_kind(dom)
            .ok_or_else(|| Error::UnknownSort(dom.clone()))?;
        let out_kind = s
            .sort_kind(&sym.out)
            .ok_or_else(|| Error::UnknownSort(sym.out.clone()))?;
        if dom_kind == SortKind::Type {
            if out_kind == SortKind::Entity {
                return Err(Error::TypeToEntityFunction(sym.name.clone()));
            }
            return Err(Error::Invalid(format!(
                "`{}` must have an entity as its domain",
                sym.name
            )));
        }
        let expected = match sym.flavor {
            SymbolFlavor::ForeignKey => SortKind::Entity,
            SymbolFlavor::Attribute => SortKind::Type,
            _ => {
                return Err(Error::Invalid(format!(
                    "`{}` is neither a foreign key nor an attribute",
                    sym.name
                )))
            }
        };
        if out_kind != expected {
            return Err(Error::sort_mismatch(
                format!("codomain of `{}`", sym.name),
                match expected {
                    SortKind::Entity => "an entity",
                    SortKind::Type => "a type",
                },
                sym.out.clone(),
            ));
        }
    }
    for eq in &s.constraints {
        match eq.vars.as_slice() {
            [v] if s.sort_kind(&v.sort) == Some(SortKind::Entity) => {}
            [v] if s.sort_kind(&v.sort).is_none() => {
                return Err(Error::UnknownSort(v.sort.clone()))
            }
            _ => {
                return Err(Error::BadConstraintShape(format!(
                    "`{eq}` must quantify exactly one entity-sorted variable"
                )))
            }
        }
        eq.check(s)?;
    }
    Ok(())
}

/// A schema extended with 0-ary generators and ground equations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstancePresentation {
    pub name: String,
    pub schema: Arc<Schema>,
    pub generators: Vec<FunctionSymbol>,
    pub equations: Vec<Equation>,
    generator_index: HashMap<String, usize>,
}

impl InstancePresentation {
    pub fn new(
        name: impl Into<String>,
        schema: Arc<Schema>,
        generators: Vec<FunctionSymbol>,
        equations: Vec<Equation>,
    ) -> Self {
        let mut generator_index = HashMap::new();
        for (i, g) in generators.iter().enumerate() {
            generator_index.entry(g.name.clone()).or_insert(i);
        }
        InstancePresentation {
            name: name.into(),
            schema,
            generators,
            equations,
            generator_index,
        }
    }

    pub fn empty(name: impl Into<String>, schema: Arc<Schema>) -> Self {
        InstancePresentation::new(name, schema, Vec::new(), Vec::new())
    }

    /// Convenience constructor from `(generator, sort)` pairs.
    pub fn from_parts(
        name: impl Into<String>,
        schema: Arc<Schema>,
        generators: &[(&str, &str)],
        equations: Vec<Equation>,
    ) -> Self {
        let gens = generators
            .iter()
            .map(|(g, s)| FunctionSymbol::constant(*g, *s, SymbolFlavor::Generator))
            .collect();
        InstancePresentation::new(name, schema, gens, equations)
    }

    pub fn generator(&self, name: &str) -> Option<&FunctionSymbol> {
        self.generator_index.get(name).map(|&i| &self.generators[i])
    }

    pub fn generator_rank(&self, name: &str) -> Option<usize> {
        self.generator_index.get(name).copied()
    }
}

impl Signature for InstancePresentation {
    fn sort_kind(&self, sort: &str) -> Option<SortKind> {
        self.schema.sort_kind(sort)
    }

    fn symbol(&self, name: &str) -> Option<&FunctionSymbol> {
        self.generator(name).or_else(|| self.schema.symbol(name))
    }
}

pub fn validate_instance(i: &InstancePresentation) -> Result<()> {
    let mut seen = HashSet::new();
    for g in &i.generators {
        if !seen.insert(g.name.as_str()) || i.schema.symbol(&g.name).is_some() {
            return Err(Error::DuplicateName(g.name.clone()));
        }
        if !g.args.is_empty() {
            return Err(Error::Invalid(format!(
                "generator `{}` must be 0-ary",
                g.name
            )));
        }
        if i.schema.sort_kind(&g.out).is_none() {
            return Err(Error::UnknownSort(g.out.clone()));
        }
    }
    for eq in &i.equations {
        if !eq.is_ground() {
            return Err(Error::NonGroundEquation(eq.to_string()));
        }
        eq.check(i)?;
    }
    Ok(())
}

#[cfg(test)]
pub(crate) mod fixtures {
    //! The running example: typeside `Ty`, schemas `S` and `T`, instance `I`.

    use super::*;
    use crate::term::{Literal, Term};

    pub fn ty() -> Arc<Typeside> {
        Arc::new(Typeside::builtin("Ty"))
    }

    pub fn schema_s() -> Arc<Schema> {
        Arc::new(
            Schema::builder("S", ty())
                .entity("N1")
                .entity("N2")
                .foreign_key("f", "N1", "N2")
                .attribute("name", "N1", "String")
                .attribute("salary", "N1", "Int")
                .attribute("age", "N2", "Int")
                .build(),
        )
    }

    pub fn schema_t() -> Arc<Schema> {
        Arc::new(
            Schema::builder("T", ty())
                .entity("N")
                .attribute("name", "N", "String")
                .attribute("salary", "N", "Int")
                .attribute("age", "N", "Int")
                .build(),
        )
    }

    pub fn eq(lhs: Term, rhs: Term) -> Equation {
        Equation::ground(lhs, rhs)
    }

    pub fn att(a: &str, g: &str) -> Term {
        Term::app(a, Term::constant(g))
    }

    pub fn s(v: &str) -> Term {
        Term::lit(Literal::str(v))
    }

    pub fn n(v: i64) -> Term {
        Term::lit(Literal::int(v))
    }

    pub fn instance_i() -> InstancePresentation {
        let rows = [
            ("1", "Alice", 100, 20),
            ("2", "Bob", 250, 20),
            ("3", "Sue", 300, 30),
        ];
        let mut eqs = Vec::new();
        for (g, name, salary, age) in rows {
            eqs.push(eq(att("name", g), s(name)));
            eqs.push(eq(att("salary", g), n(salary)));
            eqs.push(eq(Term::app("age", att("f", g)), n(age)));
        }
        InstancePresentation::from_parts(
            "I",
            schema_s(),
            &[("1", "N1"), ("2", "N1"), ("3", "N1")],
            eqs,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::term::{Term, Var};

    #[test]
    fn builtin_typeside_is_valid() {
        assert_eq!(validate_typeside(&Typeside::builtin("Ty")), Ok(()));
        assert_eq!(validate_typeside(&Typeside::new("Empty")), Ok(()));
    }

    #[test]
    fn typeside_equation_must_be_ground() {
        let mut ts = Typeside::builtin("Ty");
        ts.equations.push(Equation::forall(
            Var::new("x", "Int"),
            Term::app("g", Term::var("x", "Int")),
            Term::var("x", "Int"),
        ));
        assert!(matches!(
            validate_typeside(&ts),
            Err(Error::NonGroundTypesideEquation(_))
        ));
    }

    #[test]
    fn typeside_duplicates() {
        let ts = Typeside::builtin("Ty").with_constant("Int", "Int");
        assert_eq!(
            validate_typeside(&ts),
            Err(Error::DuplicateName("Int".into()))
        );
    }

    #[test]
    fn running_example_schemas_are_valid() {
        assert_eq!(validate_schema(&schema_s()), Ok(()));
        assert_eq!(validate_schema(&schema_t()), Ok(()));
    }

    #[test]
    fn single_variable_constraint_accepted() {
        let v = Var::new("v", "N1");
        let s = Schema::builder("S", ty())
            .entity("N1")
            .entity("N2")
            .foreign_key("f", "N1", "N2")
            .attribute("salary", "N1", "Int")
            .attribute("age", "N2", "Int")
            .constraint(Equation::forall(
                v.clone(),
                Term::app("age", Term::app("f", Term::Var(v.clone()))),
                Term::app("salary", Term::Var(v)),
            ))
            .build();
        assert_eq!(validate_schema(&s), Ok(()));
    }

    #[test]
    fn two_variable_constraint_rejected() {
        let v = Var::new("v", "N1");
        let w = Var::new("w", "N1");
        let s = Schema::builder("S", ty())
            .entity("N1")
            .attribute("salary", "N1", "Int")
            .constraint(Equation {
                vars: vec![v.clone(), w.clone()],
                lhs: Term::app("salary", Term::Var(v)),
                rhs: Term::app("salary", Term::Var(w)),
            })
            .build();
        assert!(matches!(
            validate_schema(&s),
            Err(Error::BadConstraintShape(_))
        ));
    }

    #[test]
    fn type_to_entity_rejected() {
        let s = Schema::builder("S", ty())
            .entity("N1")
            .foreign_key("bad", "Int", "N1")
            .build();
        assert_eq!(
            validate_schema(&s),
            Err(Error::TypeToEntityFunction("bad".into()))
        );
        let s = Schema::builder("S", ty())
            .entity("N1")
            .attribute("a", "N1", "Nope")
            .build();
        assert_eq!(validate_schema(&s), Err(Error::UnknownSort("Nope".into())));
    }

    #[test]
    fn instance_validation() {
        assert_eq!(validate_instance(&instance_i()), Ok(()));
        assert_eq!(
            validate_instance(&InstancePresentation::empty("E", schema_s())),
            Ok(())
        );
        let bad = InstancePresentation::from_parts(
            "B",
            schema_s(),
            &[("1", "N1")],
            vec![eq(att("name", "4"), s("Alice"))],
        );
        assert_eq!(
            validate_instance(&bad),
            Err(Error::UnknownSymbol("4".into()))
        );
        let bad = InstancePresentation::from_parts(
            "B",
            schema_s(),
            &[("1", "N1")],
            vec![eq(att("age", "1"), n(3))],
        );
        assert!(matches!(
            validate_instance(&bad),
            Err(Error::SortMismatch { .. })
        ));
    }
}
