//! The `.catq` language: parsing, elaboration into validated objects, and
//! table rendering of term models.

pub mod ast;
pub mod elaborate;
pub mod lexer;
pub mod parser;
pub mod printer;
pub mod render;

use std::fmt;

pub use ast::{Program, SourceSpan};
pub use elaborate::{elaborate, ElabOptions, Environment, Instance, Object, Outcome};
pub use parser::parse;
pub use printer::print_program;
pub use render::{render_model, Format};

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagnosticKind {
    Syntax,
    NameResolution,
    Validation,
    ResourceLimit,
}

impl fmt::Display for DiagnosticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DiagnosticKind::Syntax => "syntax error",
            DiagnosticKind::NameResolution => "name resolution error",
            DiagnosticKind::Validation => "error",
            DiagnosticKind::ResourceLimit => "resource limit",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub message: String,
    pub span: SourceSpan,
    /// For syntax errors, what would have been accepted.
    pub expected: Vec<String>,
}

impl Diagnostic {
    pub fn syntax(span: SourceSpan, message: impl Into<String>, expected: Vec<String>) -> Self {
        Diagnostic {
            kind: DiagnosticKind::Syntax,
            message: message.into(),
            span,
            expected,
        }
    }

    pub fn name(span: SourceSpan, message: impl Into<String>) -> Self {
        Diagnostic {
            kind: DiagnosticKind::NameResolution,
            message: message.into(),
            span,
            expected: Vec::new(),
        }
    }

    pub fn from_error(span: SourceSpan, err: &Error) -> Self {
        Diagnostic {
            kind: if err.is_resource_limit() {
                DiagnosticKind::ResourceLimit
            } else {
                DiagnosticKind::Validation
            },
            message: match err {
                Error::ResourceLimit(m) => m.clone(),
                e => e.to_string(),
            },
            span,
            expected: Vec::new(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}: {}", self.span, self.kind, self.message)?;
        if !self.expected.is_empty() {
            write!(f, " (expected {})", self.expected.join(" or "))?;
        }
        Ok(())
    }
}

/// Parses and elaborates `src` in one step.
pub fn load(src: &str, file: &str, opts: &ElabOptions) -> (Environment, Vec<Diagnostic>) {
    let (program, mut diags) = parse(src, file);
    let (env, more) = elaborate(&program, opts);
    diags.extend(more);
    (env, diags)
}
