use thiserror::Error;

use super::ast::Span;

/// Errors raised while turning source text into a [`Program`](super::ast::Program).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at {span}: expected {}, found {found}", expected.join(" or "))]
    Syntax {
        span: Span,
        expected: Vec<String>,
        found: String,
    },
    #[error("unsupported construct at {span}: {construct}")]
    UnsupportedConstruct { span: Span, construct: String },
    #[error("arity error at {span}: {api} expects {expected}, got {found}")]
    Arity {
        span: Span,
        api: String,
        expected: String,
        found: String,
    },
}

impl ParseError {
    pub(crate) fn syntax<I, S>(span: Span, expected: I, found: impl Into<String>) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        ParseError::Syntax {
            span,
            expected: expected.into_iter().map(Into::into).collect(),
            found: found.into(),
        }
    }

    pub(crate) fn unsupported(span: Span, construct: impl Into<String>) -> Self {
        ParseError::UnsupportedConstruct {
            span,
            construct: construct.into(),
        }
    }

    pub fn span(&self) -> Span {
        match self {
            ParseError::Syntax { span, .. }
            | ParseError::UnsupportedConstruct { span, .. }
            | ParseError::Arity { span, .. } => *span,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum YawError {
    #[error("yaw must be finite, got {0}")]
    NonFinite(f64),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MutateError {
    #[error("program has no fly_to or set_yaw call to mutate")]
    NoMutableSites,
    #[error("no candidate mutation changes the executed trajectory")]
    NoEffectiveMutation,
}
