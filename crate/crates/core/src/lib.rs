//! Field-normalized citation indicators for countries, and how they change
//! when every publication of one country is removed from the citation
//! graph.
//!
//! A [`CorpusSnapshot`] is built once from publication and edge files;
//! [`World`] computes the indicator stack over it, and [`WorldPair`] pairs
//! the actual world with the one lacking an excluded country.

pub mod cohort;
pub mod corpus;
pub mod counterfactual;
pub mod csr;
pub mod diagnostics;
pub mod extrapolation;
pub mod indicators;
pub mod synthgen;
pub mod world;

pub use cohort::{compute_cohorts, count_obtained, CohortError, CohortStats, CohortTable, ObtainedCitations};
pub use corpus::{
    build_snapshot, CitationEdge, CohortKey, CorpusConfig, CorpusError, CorpusSnapshot, DocType, PublicationRecord,
    SnapshotBuilder,
};
pub use counterfactual::{delta_report, mean_effect, DeltaReport, EffectIndicator, MeanEffect, WorldPair};
pub use extrapolation::{fit_trend, predict_crossing, Crossing, NoCrossing, TrendFit};
pub use indicators::{CountryYearIndicators, IndicatorTable, NcsScore};
pub use synthgen::{generate, preset, ScenarioConfig, SynthError, SyntheticCorpus};
pub use world::World;
