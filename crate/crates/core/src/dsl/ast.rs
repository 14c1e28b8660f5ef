//! Syntax trees for `.catq` programs.

use std::fmt;
use std::sync::Arc;

/// A region of a source file. Line and column are 1-based; `start..end` is
/// the byte range.
///
/// Spans compare equal to each other, so equality of syntax trees is
/// structural.
#[derive(Debug, Clone, Default)]
pub struct SourceSpan {
    pub file: Arc<str>,
    pub start: usize,
    pub end: usize,
    pub line: usize,
    pub column: usize,
    pub end_line: usize,
    pub end_column: usize,
}

impl PartialEq for SourceSpan {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl SourceSpan {
    /// The smallest span covering `self` and `other`.
    pub fn to(&self, other: &SourceSpan) -> SourceSpan {
        SourceSpan {
            file: Arc::clone(&self.file),
            start: self.start,
            end: other.end,
            line: self.line,
            column: self.column,
            end_line: other.end_line,
            end_column: other.end_column,
        }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let file = if self.file.is_empty() {
            "<input>"
        } else {
            &self.file
        };
        write!(f, "{file}:{}:{}", self.line, self.column)
    }
}

/// A name with its position. Numeric tokens such as the generator `1` are
/// names too.
#[derive(Debug, Clone, PartialEq)]
pub struct Ident {
    pub text: String,
    pub span: SourceSpan,
}

impl Ident {
    pub fn new(text: impl Into<String>, span: SourceSpan) -> Self {
        Ident {
            text: text.into(),
            span,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Program {
    pub items: Vec<Item>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Item {
    Decl(Decl),
    Directive(Directive),
    /// What the parser skipped while recovering from a syntax error.
    Error(SourceSpan),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeclKind {
    Typeside,
    Schema,
    Instance,
    Mapping,
}

impl DeclKind {
    pub fn keyword(self) -> &'static str {
        match self {
            DeclKind::Typeside => "typeside",
            DeclKind::Schema => "schema",
            DeclKind::Instance => "instance",
            DeclKind::Mapping => "mapping",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decl {
    pub kind: DeclKind,
    pub name: Ident,
    pub expr: Expr,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Operation {
    Sigma,
    Delta,
    Pi,
    Coproduct,
    Compose,
    Identity,
}

impl Operation {
    pub fn keyword(self) -> &'static str {
        match self {
            Operation::Sigma => "sigma",
            Operation::Delta => "delta",
            Operation::Pi => "pi",
            Operation::Coproduct => "coproduct",
            Operation::Compose => "compose",
            Operation::Identity => "identity",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Operation::Identity => 1,
            _ => 2,
        }
    }

    pub fn from_keyword(word: &str) -> Option<Operation> {
        Some(match word {
            "sigma" => Operation::Sigma,
            "delta" => Operation::Delta,
            "pi" => Operation::Pi,
            "coproduct" => Operation::Coproduct,
            "compose" => Operation::Compose,
            "identity" => Operation::Identity,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    /// `literal [: A [-> B]] { ... }`
    Literal {
        over: Vec<Ident>,
        block: Block,
        span: SourceSpan,
    },
    Apply {
        op: Operation,
        args: Vec<Ident>,
        span: SourceSpan,
    },
}

impl Expr {
    pub fn span(&self) -> &SourceSpan {
        match self {
            Expr::Literal { span, .. } | Expr::Apply { span, .. } => span,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Block {
    pub sections: Vec<Section>,
}

/// `a b c : sort` or `f g : from -> to`.
#[derive(Debug, Clone, PartialEq)]
pub struct Signature {
    pub names: Vec<Ident>,
    pub from: Ident,
    pub to: Option<Ident>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TermAst {
    /// An identifier or number; resolved during elaboration.
    Bare(Ident),
    /// A quoted string literal.
    Str(String, SourceSpan),
    App(Ident, Vec<TermAst>, SourceSpan),
}

impl TermAst {
    pub fn span(&self) -> &SourceSpan {
        match self {
            TermAst::Bare(i) => &i.span,
            TermAst::Str(_, s) | TermAst::App(_, _, s) => s,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquationAst {
    /// `forall v:s.` or `forall v.`
    pub binder: Option<(Ident, Option<Ident>)>,
    pub lhs: TermAst,
    pub rhs: TermAst,
    pub span: SourceSpan,
}

/// A symbol image: `lambda v:s. body`, `lambda v. body`, or a bare body
/// whose free identifier is the variable.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaAst {
    pub binder: Option<(Ident, Option<Ident>)>,
    pub body: TermAst,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SectionKind {
    Types,
    Constants,
    Entities,
    ForeignKeys,
    Attributes,
    Generators,
    Equations,
}

impl SectionKind {
    pub fn keyword(self) -> &'static str {
        match self {
            SectionKind::Types => "types",
            SectionKind::Constants => "constants",
            SectionKind::Entities => "entities",
            SectionKind::ForeignKeys => "foreign_keys",
            SectionKind::Attributes => "attributes",
            SectionKind::Generators => "generators",
            SectionKind::Equations => "equations",
        }
    }

    pub fn from_keyword(word: &str) -> Option<SectionKind> {
        Some(match word {
            "types" => SectionKind::Types,
            "constants" => SectionKind::Constants,
            "entities" => SectionKind::Entities,
            "foreign_keys" => SectionKind::ForeignKeys,
            "attributes" => SectionKind::Attributes,
            "generators" => SectionKind::Generators,
            "equations" => SectionKind::Equations,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Section {
    Names(SectionKind, Vec<Ident>),
    Signatures(SectionKind, Vec<Signature>),
    Equations(Vec<EquationAst>),
    /// `entities` of a mapping.
    EntityMap(Vec<(Ident, Ident)>),
    /// `foreign_keys` or `attributes` of a mapping.
    SymbolMap(SectionKind, Vec<(Ident, LambdaAst)>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Directive {
    Check(Ident),
    Match {
        source: Ident,
        target: Ident,
        span: bool,
        cutoff: Option<String>,
    },
    Invert {
        mapping: Ident,
        depth: Option<String>,
    },
}
