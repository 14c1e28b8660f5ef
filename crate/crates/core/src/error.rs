use thiserror::Error;

/// Errors raised by validation, saturation, and migration.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),

    #[error("sort mismatch in {context}: expected `{expected}`, found `{found}`")]
    SortMismatch {
        context: String,
        expected: String,
        found: String,
    },

    #[error("unknown sort `{0}`")]
    UnknownSort(String),

    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),

    #[error("duplicate name `{0}`")]
    DuplicateName(String),

    #[error("typeside equation `{0}` is not ground")]
    NonGroundTypesideEquation(String),

    #[error("instance equation `{0}` is not ground")]
    NonGroundEquation(String),

    #[error("bad constraint shape: {0}")]
    BadConstraintShape(String),

    #[error("function `{0}` goes from a type to an entity")]
    TypeToEntityFunction(String),

    #[error("mapping does not preserve constraint `{0}`")]
    EqualityNotPreserved(String),

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("resource limit: {0}")]
    ResourceLimit(String),

    #[error("no path for symbol `{0}`")]
    NoPathForSymbol(String),

    #[error("{0}")]
    Invalid(String),
}

impl Error {
    pub fn sort_mismatch(
        context: impl Into<String>,
        expected: impl Into<String>,
        found: impl Into<String>,
    ) -> Self {
        Error::SortMismatch {
            context: context.into(),
            expected: expected.into(),
            found: found.into(),
        }
    }

    pub fn is_resource_limit(&self) -> bool {
        matches!(self, Error::ResourceLimit(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
