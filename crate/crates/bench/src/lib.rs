//! Shared fixtures for the pipeline benchmarks.

use contrafact_core::corpus::{CorpusConfig, CorpusSnapshot};
use contrafact_core::synthgen::{generate, preset};

/// The serialized form of a generated corpus.
pub struct Fixture {
    pub config: CorpusConfig,
    pub publications: String,
    pub edges: String,
}

impl Fixture {
    /// The `rising_X` preset with every country's yearly count scaled by
    /// `scale`.
    pub fn rising(scale: f64) -> Self {
        let mut scenario = preset("rising_X").expect("built-in preset");
        for country in &mut scenario.countries {
            country.base_count = (country.base_count as f64 * scale).round() as u32;
        }
        let corpus = generate(&scenario).expect("preset generates");
        let mut publications = Vec::new();
        let mut edges = Vec::new();
        corpus.write_publications(&mut publications).expect("in-memory write");
        corpus.write_edges(&mut edges).expect("in-memory write");
        Self {
            config: corpus.config,
            publications: String::from_utf8(publications).expect("utf-8"),
            edges: String::from_utf8(edges).expect("utf-8"),
        }
    }

    pub fn snapshot(&self) -> CorpusSnapshot {
        let records = contrafact_core::corpus::parse_publications(&self.publications).expect("valid records");
        let builder = contrafact_core::SnapshotBuilder::new(records, self.config).expect("valid config");
        let pairs = builder.resolve_edge_text(&self.edges).expect("resolved edges");
        builder.build(pairs).expect("valid snapshot")
    }
}
