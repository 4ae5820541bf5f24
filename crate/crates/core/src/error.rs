use std::fmt;

use serde::{Deserialize, Serialize};

/// 1-based position in a source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SourceSpan {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

fn at(span: &Option<SourceSpan>) -> String {
    match span {
        Some(span) => format!("{span}: "),
        None => String::new(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("{}probabilities sum to {total}, expected 1", at(.span))]
    SumNotOne {
        total: String,
        span: Option<SourceSpan>,
    },
    #[error("{}negative probability {value}", at(.span))]
    NegativeProb {
        value: String,
        span: Option<SourceSpan>,
    },
    #[error("{}distribution has no entries", at(.span))]
    EmptyDist { span: Option<SourceSpan> },
    #[error("{}state `{state}` has two different `{action}`-transitions", at(.span))]
    DuplicateTransition {
        state: String,
        action: String,
        span: Option<SourceSpan>,
    },
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("{}`{name}` is reserved and cannot have transitions", at(.span))]
    ReservedState {
        name: String,
        span: Option<SourceSpan>,
    },
    #[error("{span}: {message}")]
    Syntax { span: SourceSpan, message: String },
    #[error("{}probability {value} is outside [0, 1]", at(.span))]
    ProbOutOfRange {
        value: String,
        span: Option<SourceSpan>,
    },
    #[error("{}numeric literal `{literal}` is too large", at(.span))]
    NumberTooLarge {
        literal: String,
        span: Option<SourceSpan>,
    },
    #[error("brute-force oracle supports at most {max} states, got {got}")]
    TooManyStates { max: usize, got: usize },
}

impl Error {
    pub(crate) fn syntax(span: SourceSpan, message: impl Into<String>) -> Self {
        Error::Syntax {
            span,
            message: message.into(),
        }
    }

    /// Attach a position to errors raised before the location was known.
    pub(crate) fn located(self, where_: SourceSpan) -> Self {
        let fill = |span: Option<SourceSpan>| span.or(Some(where_));
        match self {
            Error::SumNotOne { total, span } => Error::SumNotOne {
                total,
                span: fill(span),
            },
            Error::NegativeProb { value, span } => Error::NegativeProb {
                value,
                span: fill(span),
            },
            Error::EmptyDist { span } => Error::EmptyDist { span: fill(span) },
            Error::DuplicateTransition {
                state,
                action,
                span,
            } => Error::DuplicateTransition {
                state,
                action,
                span: fill(span),
            },
            Error::ReservedState { name, span } => Error::ReservedState {
                name,
                span: fill(span),
            },
            Error::ProbOutOfRange { value, span } => Error::ProbOutOfRange {
                value,
                span: fill(span),
            },
            Error::NumberTooLarge { literal, span } => Error::NumberTooLarge {
                literal,
                span: fill(span),
            },
            other => other,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
