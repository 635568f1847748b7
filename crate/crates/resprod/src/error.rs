use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {path} at line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("unsupported corpus file format: {path} (expected .csv, .jsonl or .ndjson)")]
    UnsupportedFormat { path: PathBuf },

    #[error("corpus validation failed with {} issue(s): {}", .0.len(), format_issues(.0))]
    Validation(Vec<ValidationIssue>),

    #[error("empty researcher set{}", .filter.as_deref().map(|u| format!(" for university {u}")).unwrap_or_default())]
    EmptyResearcherSet { filter: Option<String> },

    #[error("empty score table")]
    EmptyScoreTable,

    #[error("top_fraction must lie strictly between 0 and 1, got {0}")]
    InvalidTopFraction(f64),

    #[error("no researchers match the requested filter")]
    EmptyFilterResult,

    #[error("missing salary for rank {0}")]
    MissingRank(String),

    #[error("non-positive yearly cost {cost} for rank {rank}")]
    NonPositiveCost { rank: String, cost: f64 },

    #[error("unknown university: {0}")]
    UnknownUniversity(String),

    #[error("rescale override for {uda} names source {source_university} with no faculty in that area")]
    EmptyRescaleSource { uda: String, source_university: String },

    #[error("rescale ratio for {uda} is undefined: {reason}")]
    UndefinedRescaleRatio { uda: String, reason: String },

    #[error("sizing plan is empty")]
    EmptyPlan,

    #[error("infeasible synthesis config: {0}")]
    InfeasibleConfig(String),

    #[error("invalid config file {path}: {message}")]
    ConfigParse { path: PathBuf, message: String },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Exit status the CLI maps this error to (1 validation, 2 I/O).
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Io { .. } => 2,
            _ => 1,
        }
    }
}

/// A single referential-integrity or schema violation found while
/// assembling a corpus. Load collects every issue instead of stopping
/// at the first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValidationIssue {
    DuplicateResearcherId(String),
    DuplicatePublicationId(String),
    DanglingSds { researcher: String, sds: String },
    DanglingAuthor { publication: String, researcher: String },
    AuthorCountBelowResidents { publication: String, n_authors: u32, residents: usize },
    ZeroAuthors { publication: String },
    NoSubjectCategories { publication: String },
    YearOutsideWindow { publication: String, year: i32 },
    EmptyWindow { first: i32, last: i32 },
}

impl std::fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ValidationIssue::DuplicateResearcherId(id) => {
                write!(f, "duplicate researcher id {id}")
            }
            ValidationIssue::DuplicatePublicationId(id) => {
                write!(f, "duplicate publication id {id}")
            }
            ValidationIssue::DanglingSds { researcher, sds } => {
                write!(f, "researcher {researcher} references unknown SDS {sds}")
            }
            ValidationIssue::DanglingAuthor { publication, researcher } => {
                write!(f, "publication {publication} references unknown researcher {researcher}")
            }
            ValidationIssue::AuthorCountBelowResidents { publication, n_authors, residents } => {
                write!(
                    f,
                    "publication {publication} lists {residents} corpus authors but only {n_authors} total authors"
                )
            }
            ValidationIssue::ZeroAuthors { publication } => {
                write!(f, "publication {publication} has zero authors")
            }
            ValidationIssue::NoSubjectCategories { publication } => {
                write!(f, "publication {publication} has no subject categories")
            }
            ValidationIssue::YearOutsideWindow { publication, year } => {
                write!(f, "publication {publication} year {year} lies outside the window")
            }
            ValidationIssue::EmptyWindow { first, last } => {
                write!(f, "window {first}..={last} is empty")
            }
        }
    }
}

fn format_issues(issues: &[ValidationIssue]) -> String {
    let mut out = String::new();
    for (i, issue) in issues.iter().take(5).enumerate() {
        if i > 0 {
            out.push_str("; ");
        }
        out.push_str(&issue.to_string());
    }
    if issues.len() > 5 {
        out.push_str("; ...");
    }
    out
}
