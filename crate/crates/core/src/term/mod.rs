//! Terms, equations and the saturation engine that computes term models.
//!
//! Every theory in this crate (typeside, schema, instance) has function
//! symbols of arity zero or one, so every term is a chain of unary
//! applications over a variable, a 0-ary symbol, or a literal.

mod egraph;
pub mod model;

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;

use crate::error::{Error, Result};

pub use model::{
    build_term_model, canonical_label, check_consistency, decide_equal, ClassId, Collision,
    SaturationLimits, TermModel, Value,
};

pub(crate) use egraph::Engine;

/// Name of the built-in integer type.
pub const INT_TYPE: &str = "Int";
/// Name of the built-in string type.
pub const STRING_TYPE: &str = "String";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SortKind {
    Type,
    Entity,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Sort {
    pub name: String,
    pub kind: SortKind,
}

impl Sort {
    pub fn entity(name: impl Into<String>) -> Self {
        Sort {
            name: name.into(),
            kind: SortKind::Entity,
        }
    }

    pub fn ty(name: impl Into<String>) -> Self {
        Sort {
            name: name.into(),
            kind: SortKind::Type,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SymbolFlavor {
    Generator,
    Attribute,
    ForeignKey,
    TypesideConstant,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FunctionSymbol {
    pub name: String,
    pub args: Vec<String>,
    pub out: String,
    pub flavor: SymbolFlavor,
}

impl FunctionSymbol {
    pub fn unary(
        name: impl Into<String>,
        arg: impl Into<String>,
        out: impl Into<String>,
        flavor: SymbolFlavor,
    ) -> Self {
        FunctionSymbol {
            name: name.into(),
            args: vec![arg.into()],
            out: out.into(),
            flavor,
        }
    }

    pub fn constant(name: impl Into<String>, out: impl Into<String>, flavor: SymbolFlavor) -> Self {
        FunctionSymbol {
            name: name.into(),
            args: Vec::new(),
            out: out.into(),
            flavor,
        }
    }

    /// Domain sort of a unary symbol.
    pub fn domain(&self) -> Option<&str> {
        self.args.first().map(String::as_str)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var {
    pub name: String,
    pub sort: String,
}

impl Var {
    pub fn new(name: impl Into<String>, sort: impl Into<String>) -> Self {
        Var {
            name: name.into(),
            sort: sort.into(),
        }
    }
}

/// A value of a built-in type. Distinct literals are distinct constants.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Literal {
    Int(BigInt),
    Str(String),
}

impl Literal {
    pub fn int(value: i64) -> Self {
        Literal::Int(BigInt::from(value))
    }

    pub fn str(value: impl Into<String>) -> Self {
        Literal::Str(value.into())
    }

    /// Parses `text` as a literal of the built-in type `ty`.
    ///
    /// `Int` accepts optionally-signed decimal integers of any length;
    /// `String` accepts anything. Other types have no literals.
    pub fn parse_for(ty: &str, text: &str) -> Option<Literal> {
        match ty {
            INT_TYPE => parse_int(text).map(Literal::Int),
            STRING_TYPE => Some(Literal::Str(text.to_string())),
            _ => None,
        }
    }

    pub fn sort_name(&self) -> &'static str {
        match self {
            Literal::Int(_) => INT_TYPE,
            Literal::Str(_) => STRING_TYPE,
        }
    }
}

fn parse_int(text: &str) -> Option<BigInt> {
    let digits = text.strip_prefix(['-', '+']).unwrap_or(text);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    text.parse().ok()
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Int(n) => write!(f, "{n}"),
            Literal::Str(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(Var),
    Lit(Literal),
    App(String, Vec<Term>),
}

impl Term {
    pub fn var(name: impl Into<String>, sort: impl Into<String>) -> Self {
        Term::Var(Var::new(name, sort))
    }

    /// A 0-ary symbol: generator or typeside constant.
    pub fn constant(name: impl Into<String>) -> Self {
        Term::App(name.into(), Vec::new())
    }

    pub fn app(symbol: impl Into<String>, arg: Term) -> Self {
        Term::App(symbol.into(), vec![arg])
    }

    pub fn lit(lit: Literal) -> Self {
        Term::Lit(lit)
    }

    /// Applies the unary symbols in `symbols` to `self`, innermost first.
    pub fn apply_path<'a>(self, symbols: impl IntoIterator<Item = &'a str>) -> Term {
        symbols
            .into_iter()
            .fold(self, |acc, sym| Term::app(sym, acc))
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Lit(_) => true,
            Term::App(_, args) => args.iter().all(Term::is_ground),
        }
    }

    pub fn vars(&self) -> Vec<&Var> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars<'a>(&'a self, out: &mut Vec<&'a Var>) {
        match self {
            Term::Var(v) => {
                if !out.contains(&v) {
                    out.push(v)
                }
            }
            Term::Lit(_) => {}
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) | Term::Lit(_) => 0,
            Term::App(_, args) => args.iter().map(|a| a.depth() + 1).max().unwrap_or(0),
        }
    }

    /// Splits a chain `s_k(...s_1(head))` into its head and the symbols
    /// `[s_1, ..., s_k]` in application order.
    pub fn as_chain(&self) -> Option<(&Term, Vec<&str>)> {
        let mut symbols = Vec::new();
        let mut cur = self;
        loop {
            match cur {
                Term::App(sym, args) if args.len() == 1 => {
                    symbols.push(sym.as_str());
                    cur = &args[0];
                }
                Term::App(_, args) if !args.is_empty() => return None,
                _ => break,
            }
        }
        symbols.reverse();
        Some((cur, symbols))
    }

    /// The sort of `self` in `sig`, checking well-sortedness on the way.
    pub fn sort_in(&self, sig: &dyn Signature) -> Result<String> {
        match self {
            Term::Var(v) => {
                if sig.sort_kind(&v.sort).is_none() {
                    return Err(Error::UnknownSort(v.sort.clone()));
                }
                Ok(v.sort.clone())
            }
            Term::Lit(l) => {
                let sort = l.sort_name();
                if sig.sort_kind(sort) != Some(SortKind::Type) {
                    return Err(Error::UnknownSort(sort.to_string()));
                }
                Ok(sort.to_string())
            }
            Term::App(name, args) => {
                let sym = sig
                    .symbol(name)
                    .ok_or_else(|| Error::UnknownSymbol(name.clone()))?;
                if sym.args.len() != args.len() {
                    return Err(Error::Invalid(format!(
                        "`{name}` expects {} argument(s), got {}",
                        sym.args.len(),
                        args.len()
                    )));
                }
                for (expected, arg) in sym.args.iter().zip(args) {
                    let found = arg.sort_in(sig)?;
                    if &found != expected {
                        return Err(Error::sort_mismatch(
                            format!("argument of `{name}`"),
                            expected.clone(),
                            found,
                        ));
                    }
                }
                Ok(sym.out.clone())
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(&v.name),
            Term::Lit(l) => write!(f, "{l}"),
            Term::App(name, args) => {
                f.write_str(name)?;
                if !args.is_empty() {
                    f.write_str("(")?;
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            f.write_str(", ")?;
                        }
                        write!(f, "{a}")?;
                    }
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }
}

/// `forall vars. lhs = rhs`; instance equations have no variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Equation {
    pub vars: Vec<Var>,
    pub lhs: Term,
    pub rhs: Term,
}

impl Equation {
    pub fn ground(lhs: Term, rhs: Term) -> Self {
        Equation {
            vars: Vec::new(),
            lhs,
            rhs,
        }
    }

    pub fn forall(var: Var, lhs: Term, rhs: Term) -> Self {
        Equation {
            vars: vec![var],
            lhs,
            rhs,
        }
    }

    pub fn is_ground(&self) -> bool {
        self.vars.is_empty() && self.lhs.is_ground() && self.rhs.is_ground()
    }

    /// Checks both sides against `sig` (with the bound variables in scope)
    /// and returns their common sort.
    pub fn check(&self, sig: &dyn Signature) -> Result<String> {
        for v in self.lhs.vars().into_iter().chain(self.rhs.vars()) {
            if !self.vars.contains(v) {
                return Err(Error::UnboundVariable(v.name.clone()));
            }
        }
        let l = self.lhs.sort_in(sig)?;
        let r = self.rhs.sort_in(sig)?;
        if l != r {
            return Err(Error::sort_mismatch(format!("equation `{self}`"), l, r));
        }
        Ok(l)
    }
}

impl fmt::Display for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.vars.is_empty() {
            f.write_str("forall ")?;
            for (i, v) in self.vars.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{}:{}", v.name, v.sort)?;
            }
            f.write_str(". ")?;
        }
        write!(f, "{} = {}", self.lhs, self.rhs)
    }
}

/// Symbol and sort lookup for sort checking.
pub trait Signature {
    fn sort_kind(&self, sort: &str) -> Option<SortKind>;
    fn symbol(&self, name: &str) -> Option<&FunctionSymbol>;
}

pub type Binding = BTreeMap<String, Term>;

/// Replaces every variable of `term` by its binding.
pub fn substitute(term: &Term, binding: &Binding) -> Result<Term> {
    match term {
        Term::Var(v) => binding
            .get(&v.name)
            .cloned()
            .ok_or_else(|| Error::UnboundVariable(v.name.clone())),
        Term::Lit(_) => Ok(term.clone()),
        Term::App(name, args) => Ok(Term::App(
            name.clone(),
            args.iter()
                .map(|a| substitute(a, binding))
                .collect::<Result<_>>()?,
        )),
    }
}

/// Like [`substitute`], but first checks that each bound value has the
/// sort of the variable it replaces.
pub fn substitute_checked(term: &Term, binding: &Binding, sig: &dyn Signature) -> Result<Term> {
    for v in term.vars() {
        let value = binding
            .get(&v.name)
            .ok_or_else(|| Error::UnboundVariable(v.name.clone()))?;
        let found = value.sort_in(sig)?;
        if found != v.sort {
            return Err(Error::sort_mismatch(
                format!("binding of `{}`", v.name),
                v.sort.clone(),
                found,
            ));
        }
    }
    substitute(term, binding)
}

/// Shorthand for a single-variable binding.
pub fn bind(name: impl Into<String>, value: Term) -> Binding {
    let mut b = Binding::new();
    b.insert(name.into(), value);
    b
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn substitute_attribute_path() {
        let t = Term::app("age", Term::app("f", Term::var("v", "N1")));
        let out = substitute(&t, &bind("v", Term::constant("1"))).unwrap();
        assert_eq!(out.to_string(), "age(f(1))");
        assert!(out.is_ground());
    }

    #[test]
    fn substitute_bare_variable() {
        let out = substitute(&Term::var("v", "N1"), &bind("v", Term::constant("g"))).unwrap();
        assert_eq!(out, Term::constant("g"));
    }

    #[test]
    fn substitute_structural() {
        let t = Term::app("name", Term::var("v", "N1"));
        let g = Term::app("f", Term::constant("2"));
        assert_eq!(
            substitute(&t, &bind("v", g)).unwrap().to_string(),
            "name(f(2))"
        );
    }

    #[test]
    fn substitute_unbound() {
        let t = Term::app("name", Term::var("w", "N1"));
        assert_eq!(
            substitute(&t, &bind("v", Term::constant("1"))),
            Err(Error::UnboundVariable("w".into()))
        );
    }

    #[test]
    fn int_literals() {
        assert_eq!(Literal::parse_for("Int", "-12"), Some(Literal::int(-12)));
        assert_eq!(Literal::parse_for("Int", "+7"), Some(Literal::int(7)));
        assert_eq!(Literal::parse_for("Int", "12a"), None);
        assert_eq!(Literal::parse_for("Int", "-"), None);
        let big = "123456789012345678901234567890";
        assert_eq!(Literal::parse_for("Int", big).unwrap().to_string(), big);
        assert_eq!(
            Literal::parse_for("String", "12a"),
            Some(Literal::str("12a"))
        );
        assert_eq!(Literal::parse_for("Color", "red"), None);
    }

    #[test]
    fn chains() {
        let t = Term::app("age", Term::app("f", Term::constant("1")));
        let (head, syms) = t.as_chain().unwrap();
        assert_eq!(head, &Term::constant("1"));
        assert_eq!(syms, vec!["f", "age"]);
        assert_eq!(t.depth(), 2);
        assert_eq!(Term::constant("1").apply_path(["f", "age"]), t);
    }
}
