//! Field-normalized research productivity analytics.
//!
//! The crate measures the research productivity of individual faculty
//! members (citations standardized against cited-only national medians and
//! fractioned over co-authors), ranks them in percentiles within field and
//! academic rank, aggregates to cost-weighted field, discipline and
//! university productivity, and simulates budding an elite spin-off
//! university staffed with the top performers drawn from parent
//! institutions. A seeded synthesizer produces corpora with realistic
//! skew so the whole pipeline can run without proprietary data.

pub mod aggregate;
pub mod corpus;
mod error;
pub mod normalize;
pub mod pipeline;
pub mod report;
pub mod score;
pub mod spinoff;
pub mod synth;

pub use error::{Error, Result, ValidationIssue};

pub use aggregate::{CostTable, MeanMode, RankingRow};
pub use corpus::{
    AcademicRank, Corpus, CorpusPaths, Publication, PublicationId, RankLevel, Researcher,
    ResearcherId, SdsCode, SubjectCategory, Taxonomy, UdaCode,
};
pub use normalize::MedianTable;
pub use pipeline::{run_score, run_spinoff, ParentMode, ScoreArtifacts, SpinoffArtifacts, SpinoffParams};
pub use score::{ScoreEntry, ScoreTable};
pub use spinoff::{RescaleBasis, RescaleRule, SelectionResult, SizingPlan};
pub use synth::SynthConfig;
