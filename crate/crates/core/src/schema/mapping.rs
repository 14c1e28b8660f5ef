//! Schema mappings: entities to entities, foreign keys to paths, attributes
//! to terms of the target schema.

use std::fmt;
use std::sync::Arc;

use indexmap::IndexMap;

use crate::error::{Error, Result};
use crate::schema::probe::Probe;
use crate::schema::Schema;
use crate::term::{bind, substitute, SaturationLimits, SortKind, SymbolFlavor, Term, Var};

/// The image of a unary symbol: `lambda var. body`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SymbolImage {
    pub var: Var,
    pub body: Term,
}

impl SymbolImage {
    pub fn new(var: Var, body: Term) -> Self {
        SymbolImage { var, body }
    }

    /// `lambda var. s_k(...s_1(var))`.
    pub fn path<'a>(var: Var, symbols: impl IntoIterator<Item = &'a str>) -> Self {
        let body = Term::Var(var.clone()).apply_path(symbols);
        SymbolImage { var, body }
    }

    /// The symbols of the body in application order, if it is a path over
    /// the bound variable.
    pub fn as_path(&self) -> Option<Vec<&str>> {
        match self.body.as_chain()? {
            (Term::Var(v), syms) if *v == self.var => Some(syms),
            _ => None,
        }
    }

    /// Applies the image to `arg`.
    pub fn apply(&self, arg: Term) -> Result<Term> {
        substitute(&self.body, &bind(self.var.name.clone(), arg))
    }
}

impl fmt::Display for SymbolImage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "lambda {}:{}. {}",
            self.var.name, self.var.sort, self.body
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mapping {
    pub name: String,
    pub source: Arc<Schema>,
    pub target: Arc<Schema>,
    pub entity_map: IndexMap<String, String>,
    pub symbol_map: IndexMap<String, SymbolImage>,
}

impl Mapping {
    pub fn new(name: impl Into<String>, source: Arc<Schema>, target: Arc<Schema>) -> Self {
        Mapping {
            name: name.into(),
            source,
            target,
            entity_map: IndexMap::new(),
            symbol_map: IndexMap::new(),
        }
    }

    pub fn identity(schema: &Arc<Schema>) -> Self {
        let mut m = Mapping::new(
            format!("id_{}", schema.name),
            Arc::clone(schema),
            Arc::clone(schema),
        );
        for e in &schema.entities {
            m.entity_map.insert(e.clone(), e.clone());
        }
        for sym in schema.unary_symbols() {
            let var = Var::new("x", sym.domain().unwrap_or_default());
            m.symbol_map.insert(
                sym.name.clone(),
                SymbolImage::path(var, [sym.name.as_str()]),
            );
        }
        m
    }

    pub fn with_entity(mut self, from: &str, to: &str) -> Self {
        self.entity_map.insert(from.to_string(), to.to_string());
        self
    }

    /// Maps `symbol` to the path `symbols` (application order) in the target.
    /// The source domain must already be mapped.
    pub fn with_path(mut self, symbol: &str, symbols: &[&str]) -> Self {
        let var = self.image_var(symbol);
        self.symbol_map.insert(
            symbol.to_string(),
            SymbolImage::path(var, symbols.iter().copied()),
        );
        self
    }

    /// Maps `symbol` to `body`, where `Term::Var` occurrences denote the argument.
    pub fn with_term(mut self, symbol: &str, body: Term) -> Self {
        let var = self.image_var(symbol);
        let body = rebind(&body, &var);
        self.symbol_map
            .insert(symbol.to_string(), SymbolImage::new(var, body));
        self
    }

    fn image_var(&self, symbol: &str) -> Var {
        let dom = self
            .source
            .symbol_domain(symbol)
            .and_then(|d| self.entity_map.get(d))
            .cloned()
            .unwrap_or_default();
        Var::new("x", dom)
    }

    pub fn entity(&self, e: &str) -> Result<&str> {
        self.entity_map
            .get(e)
            .map(String::as_str)
            .ok_or_else(|| Error::UnknownSort(e.to_string()))
    }

    /// The image of a source sort: entities through the map, types unchanged.
    pub fn sort(&self, s: &str) -> Result<String> {
        match self.source_sort_kind(s) {
            Some(SortKind::Entity) => self.entity(s).map(str::to_string),
            Some(SortKind::Type) => Ok(s.to_string()),
            None => Err(Error::UnknownSort(s.to_string())),
        }
    }

    fn source_sort_kind(&self, s: &str) -> Option<SortKind> {
        use crate::term::Signature;
        self.source.sort_kind(s)
    }

    pub fn image(&self, symbol: &str) -> Result<&SymbolImage> {
        self.symbol_map
            .get(symbol)
            .ok_or_else(|| Error::NoPathForSymbol(symbol.to_string()))
    }
}

impl Schema {
    fn symbol_domain(&self, symbol: &str) -> Option<&str> {
        self.unary_symbols()
            .find(|s| s.name == symbol)
            .and_then(|s| s.domain())
    }
}

fn rebind(t: &Term, var: &Var) -> Term {
    match t {
        Term::Var(_) => Term::Var(var.clone()),
        Term::Lit(_) => t.clone(),
        Term::App(n, args) => Term::App(n.clone(), args.iter().map(|a| rebind(a, var)).collect()),
    }
}

/// Translates a source term (variables, generators, constants, literals
/// and unary symbols) along `f`.
pub fn apply_mapping_term(f: &Mapping, t: &Term) -> Result<Term> {
    match t {
        Term::Var(v) => Ok(Term::Var(Var::new(v.name.clone(), f.sort(&v.sort)?))),
        Term::Lit(_) => Ok(t.clone()),
        Term::App(name, args) => match args.as_slice() {
            [] => Ok(t.clone()),
            [arg] => {
                let arg = apply_mapping_term(f, arg)?;
                f.image(name)?.apply(arg)
            }
            _ => Err(Error::UnknownSymbol(name.clone())),
        },
    }
}

/// Checks that `f` is a well-formed mapping and preserves every constraint
/// of its source.
pub fn validate_mapping(f: &Mapping) -> Result<()> {
    validate_mapping_with(f, SaturationLimits::default())
}

pub fn validate_mapping_with(f: &Mapping, limits: SaturationLimits) -> Result<()> {
    if f.source.typeside != f.target.typeside {
        return Err(Error::SchemaMismatch(format!(
            "`{}` and `{}` have different typesides",
            f.source.name, f.target.name
        )));
    }
    for (from, to) in &f.entity_map {
        if !f.source.is_entity(from) {
            return Err(Error::UnknownSort(from.clone()));
        }
        if !f.target.is_entity(to) {
            return Err(Error::UnknownSort(to.clone()));
        }
    }
    for e in &f.source.entities {
        f.entity(e)?;
    }
    for name in f.symbol_map.keys() {
        if f.source.symbol_domain(name).is_none() {
            return Err(Error::UnknownSymbol(name.clone()));
        }
    }
    for sym in f.source.unary_symbols() {
        let img = f.image(&sym.name)?;
        let dom = f.sort(sym.domain().unwrap_or_default())?;
        if img.var.sort != dom {
            return Err(Error::sort_mismatch(
                format!("bound variable of the image of `{}`", sym.name),
                dom,
                img.var.sort.clone(),
            ));
        }
        for v in img.body.vars() {
            if *v != img.var {
                return Err(Error::UnboundVariable(v.name.clone()));
            }
        }
        let expected = f.sort(&sym.out)?;
        let found = img.body.sort_in(f.target.as_ref())?;
        if found != expected {
            return Err(Error::sort_mismatch(
                format!("image of `{}`", sym.name),
                expected,
                found,
            ));
        }
        if sym.flavor == SymbolFlavor::ForeignKey && img.as_path().is_none() {
            return Err(Error::Invalid(format!(
                "image of foreign key `{}` must be a path",
                sym.name
            )));
        }
    }
    let mut probes: IndexMap<String, Probe> = IndexMap::new();
    for eq in &f.source.constraints {
        let Some(v) = eq.vars.first() else {
            continue;
        };
        let e = f.entity(&v.sort)?.to_string();
        if !probes.contains_key(&e) {
            probes.insert(e.clone(), Probe::new(&f.target, &e, limits)?);
        }
        let l = apply_mapping_term(f, &eq.lhs)?;
        let r = apply_mapping_term(f, &eq.rhs)?;
        match probes[&e].equal(&l, &r)? {
            Some(true) => {}
            Some(false) => return Err(Error::EqualityNotPreserved(eq.to_string())),
            None => {
                return Err(Error::ResourceLimit(format!(
                    "could not decide whether `{eq}` is preserved"
                )))
            }
        }
    }
    Ok(())
}

/// `g ∘ f`: first `f`, then `g`. The result is validated.
pub fn compose_mappings(f: &Mapping, g: &Mapping) -> Result<Mapping> {
    let h = compose_unchecked(f, g)?;
    validate_mapping(&h)?;
    Ok(h)
}

pub(crate) fn compose_unchecked(f: &Mapping, g: &Mapping) -> Result<Mapping> {
    if f.target.as_ref() != g.source.as_ref() {
        return Err(Error::SchemaMismatch(format!(
            "cannot compose `{}` (into `{}`) with `{}` (from `{}`)",
            f.name, f.target.name, g.name, g.source.name
        )));
    }
    let mut h = Mapping::new(
        format!("{}_{}", g.name, f.name),
        Arc::clone(&f.source),
        Arc::clone(&g.target),
    );
    for (from, mid) in &f.entity_map {
        h.entity_map
            .insert(from.clone(), g.entity(mid)?.to_string());
    }
    for (sym, img) in &f.symbol_map {
        let var = Var::new(img.var.name.clone(), g.entity(&img.var.sort)?);
        let body = apply_mapping_term(g, &img.body)?;
        h.symbol_map
            .insert(sym.clone(), SymbolImage::new(var, body));
    }
    Ok(h)
}

/// Whether `f` and `g` agree on entities and send every symbol to provably
/// equal terms of the common target.
pub fn mappings_equal(f: &Mapping, g: &Mapping) -> Result<bool> {
    mappings_equal_with(f, g, SaturationLimits::default())
}

pub fn mappings_equal_with(f: &Mapping, g: &Mapping, limits: SaturationLimits) -> Result<bool> {
    if f.source.as_ref() != g.source.as_ref() || f.target.as_ref() != g.target.as_ref() {
        return Ok(false);
    }
    for e in &f.source.entities {
        if f.entity(e)? != g.entity(e)? {
            return Ok(false);
        }
    }
    let mut probes: IndexMap<String, Probe> = IndexMap::new();
    for sym in f.source.unary_symbols() {
        let dom = f.entity(sym.domain().unwrap_or_default())?.to_string();
        let arg = Term::var("x", dom.clone());
        let a = f.image(&sym.name)?.apply(arg.clone())?;
        let b = g.image(&sym.name)?.apply(arg)?;
        if a == b {
            continue;
        }
        if !probes.contains_key(&dom) {
            probes.insert(dom.clone(), Probe::new(&f.target, &dom, limits)?);
        }
        match probes[&dom].equal(&a, &b)? {
            Some(true) => {}
            Some(false) => return Ok(false),
            None => {
                return Err(Error::ResourceLimit(format!(
                    "could not decide equality of the images of `{}`",
                    sym.name
                )))
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;
    use crate::schema::fixtures::*;

    /// N1 and N2 both to N; `f` to the identity path.
    pub fn mapping_f() -> Mapping {
        Mapping::new("F", schema_s(), schema_t())
            .with_entity("N1", "N")
            .with_entity("N2", "N")
            .with_path("f", &[])
            .with_path("name", &["name"])
            .with_path("salary", &["salary"])
            .with_path("age", &["age"])
    }
}
