//! The full indicator stack computed over one snapshot.

use crate::cohort::{compute_cohorts, count_obtained, CohortTable, ObtainedCitations};
use crate::corpus::CorpusSnapshot;
use crate::indicators::{country_indicators, publication_scores, top_fractions, IndicatorTable, NcsScore};

#[derive(Debug, Clone)]
pub struct World {
    pub snapshot: CorpusSnapshot,
    pub obtained: ObtainedCitations,
    pub cohorts: CohortTable,
    /// Per publication; `None` outside the cited side.
    pub scores: Vec<Option<NcsScore>>,
    pub top_fractions: Vec<f64>,
    pub indicators: IndicatorTable,
}

impl World {
    pub fn compute(snapshot: CorpusSnapshot) -> Self {
        let obtained = count_obtained(&snapshot);
        let cohorts = compute_cohorts(&snapshot, &obtained);
        let scores = publication_scores(&snapshot, &obtained, &cohorts);
        let top_fractions = top_fractions(&snapshot, &obtained, &cohorts);
        let indicators = country_indicators(&snapshot, &obtained, &scores, &top_fractions);
        Self {
            snapshot,
            obtained,
            cohorts,
            scores,
            top_fractions,
            indicators,
        }
    }
}
