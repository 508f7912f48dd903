//! Deterministic synthetic corpora.
//!
//! Generation runs in two phases. The first draws every publication's
//! metadata, the second draws its references from publications of the same
//! or earlier years. Each publication owns an independent ChaCha stream
//! keyed by `(seed, phase, publication index)`, so the output is identical
//! however the work is split across threads.
//!
//! Publication ids are `P` followed by an eight-digit index, assigned in
//! (year, country order, draw) order. Lexicographic id order is therefore
//! generation order.

use std::collections::BTreeMap;
use std::io::{self, Write};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Gamma;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{CorpusConfig, CorpusError, CorpusSnapshot, DocType, PublicationRecord, SnapshotBuilder};

const META_SALT: u64 = 0x6d65_7461_6461_7461;
const REFS_SALT: u64 = 0x7265_6665_7265_6e63;
const MAX_ATTEMPTS: usize = 32;
const MAX_PUBLICATIONS: u64 = 100_000_000;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid scenario: {0}")]
    InvalidConfig(String),
    #[error("unknown preset {0:?} (known: closed_world, rising_X, isolated_X, empty_X)")]
    UnknownPreset(String),
    #[error("closed-world scenario infeasible: publication {id} could only place {placed} of {wanted} references")]
    Infeasible { id: String, placed: u32, wanted: u32 },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, SynthError>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefLength {
    pub mean: f64,
    /// Coefficient of variation of a gamma draw; 0 gives the mean itself
    /// with stochastic rounding.
    #[serde(default)]
    pub dispersion: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DocTypeMix {
    pub article: f64,
    pub review: f64,
    pub proceedings_paper: f64,
    pub other: f64,
}

impl Default for DocTypeMix {
    fn default() -> Self {
        Self {
            article: 1.0,
            review: 0.0,
            proceedings_paper: 0.0,
            other: 0.0,
        }
    }
}

impl DocTypeMix {
    fn weights(&self) -> [f64; 4] {
        [self.article, self.review, self.proceedings_paper, self.other]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountrySpec {
    pub code: String,
    /// Publications in the first year.
    pub base_count: u32,
    /// Yearly multiplicative growth; counts are rounded to the nearest
    /// integer.
    #[serde(default = "one")]
    pub growth: f64,
    /// Exact counts that replace the growth curve for the listed years.
    #[serde(default)]
    pub counts_by_year: BTreeMap<i32, u32>,
    /// Weights over categories; empty means uniform.
    #[serde(default)]
    pub category_mix: Vec<f64>,
    pub ref_length: RefLength,
    /// Weights over cited-age offsets `0, 1, 2, ...` years.
    pub recency: Vec<f64>,
    /// Probability that a reference targets the own country.
    pub self_cite_rate: f64,
    #[serde(default)]
    pub self_cite_by_year: BTreeMap<i32, f64>,
    #[serde(default)]
    pub doc_type_mix: DocTypeMix,
}

fn one() -> f64 {
    1.0
}

fn default_window() -> u32 {
    3
}

fn default_top_share() -> f64 {
    0.10
}

fn default_field_focus() -> f64 {
    0.8
}

fn default_categories_per_pub() -> Vec<f64> {
    vec![1.0]
}

impl CountrySpec {
    pub fn count(&self, first_year: i32, year: i32) -> u32 {
        match self.counts_by_year.get(&year) {
            Some(&n) => n,
            None => (self.base_count as f64 * self.growth.powi(year - first_year)).round() as u32,
        }
    }

    pub fn self_cite_rate(&self, year: i32) -> f64 {
        self.self_cite_by_year
            .get(&year)
            .copied()
            .unwrap_or(self.self_cite_rate)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub first_year: i32,
    pub last_year: i32,
    #[serde(default = "default_window")]
    pub window_length: u32,
    #[serde(default = "default_top_share")]
    pub top_share: f64,
    /// Number of categories, named `C00`, `C01`, ...
    pub categories: u32,
    /// Weights over the number of categories per publication (1, 2, ...).
    #[serde(default = "default_categories_per_pub")]
    pub categories_per_pub: Vec<f64>,
    pub countries: Vec<CountrySpec>,
    /// Row-stochastic; row `i` weights the countries cited by country `i`.
    /// Only off-diagonal entries are used for non-self references; a row
    /// without off-diagonal mass cites only its own country.
    pub targeting: Vec<Vec<f64>>,
    /// Probability that a reference stays in one of the citing
    /// publication's categories; otherwise the category follows the target
    /// country's mix.
    #[serde(default = "default_field_focus")]
    pub field_focus: f64,
    /// Probability that a publication lists a second, uniformly drawn
    /// country.
    #[serde(default)]
    pub collaboration_rate: f64,
    /// Probability that a reference is drawn at all; the rest only count
    /// toward `refs_total`.
    #[serde(default = "one")]
    pub resolved_share: f64,
    /// Every reference must be placed; failure is an error instead of an
    /// unresolved reference.
    #[serde(default)]
    pub closed_world: bool,
    pub seed: u64,
}

fn invalid(message: impl Into<String>) -> SynthError {
    SynthError::InvalidConfig(message.into())
}

fn check_weights(what: &str, weights: &[f64]) -> Result<()> {
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(invalid(format!("{what}: weights must be finite and non-negative")));
    }
    if weights.iter().sum::<f64>() <= 0.0 {
        return Err(invalid(format!("{what}: weights must have positive sum")));
    }
    Ok(())
}

fn check_probability(what: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(format!("{what} = {p} is not a probability")));
    }
    Ok(())
}

impl ScenarioConfig {
    pub fn years(&self) -> std::ops::RangeInclusive<i32> {
        self.first_year..=self.last_year
    }

    pub fn corpus_config(&self) -> CorpusConfig {
        CorpusConfig {
            window_length: self.window_length,
            top_share: self.top_share,
            y_min: self.first_year,
            y_max: self.last_year,
            citation_cutoff_year: self.last_year,
        }
    }

    pub fn category_name(c: u32) -> String {
        format!("C{c:02}")
    }

    pub fn total_publications(&self) -> u64 {
        self.countries
            .iter()
            .flat_map(|c| self.years().map(move |y| c.count(self.first_year, y) as u64))
            .sum()
    }

    pub fn validate(&self) -> Result<()> {
        self.corpus_config().validate().map_err(|e| invalid(e.to_string()))?;
        if self.categories == 0 {
            return Err(invalid("at least one category is required"));
        }
        check_weights("categories_per_pub", &self.categories_per_pub)?;
        check_probability("field_focus", self.field_focus)?;
        check_probability("collaboration_rate", self.collaboration_rate)?;
        check_probability("resolved_share", self.resolved_share)?;
        let n = self.countries.len();
        if n == 0 {
            return Err(invalid("at least one country is required"));
        }
        for (i, c) in self.countries.iter().enumerate() {
            let ctx = |field: &str| format!("country {}: {field}", c.code);
            if c.code.len() != 3 || !c.code.bytes().all(|b| b.is_ascii_uppercase()) {
                return Err(invalid(format!(
                    "country code {:?} is not three uppercase letters",
                    c.code
                )));
            }
            if self.countries[..i].iter().any(|o| o.code == c.code) {
                return Err(invalid(format!("duplicate country {}", c.code)));
            }
            if !c.growth.is_finite() || c.growth <= 0.0 {
                return Err(invalid(ctx("growth must be positive")));
            }
            if !c.category_mix.is_empty() {
                if c.category_mix.len() != self.categories as usize {
                    return Err(invalid(ctx("category_mix length differs from category count")));
                }
                check_weights(&ctx("category_mix"), &c.category_mix)?;
            }
            if !c.ref_length.mean.is_finite() || c.ref_length.mean < 0.0 {
                return Err(invalid(ctx("ref_length.mean must be non-negative")));
            }
            if !c.ref_length.dispersion.is_finite() || c.ref_length.dispersion < 0.0 {
                return Err(invalid(ctx("ref_length.dispersion must be non-negative")));
            }
            check_weights(&ctx("recency"), &c.recency)?;
            check_probability(&ctx("self_cite_rate"), c.self_cite_rate)?;
            for &p in c.self_cite_by_year.values() {
                check_probability(&ctx("self_cite_by_year"), p)?;
            }
            check_weights(&ctx("doc_type_mix"), &c.doc_type_mix.weights())?;
        }
        if self.targeting.len() != n || self.targeting.iter().any(|row| row.len() != n) {
            return Err(invalid(format!("targeting must be {n} x {n}")));
        }
        for (row, c) in self.targeting.iter().zip(&self.countries) {
            if row.iter().any(|w| !w.is_finite() || *w < 0.0) {
                return Err(invalid(format!("targeting row {} has a negative entry", c.code)));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(invalid(format!("targeting row {} sums to {sum}", c.code)));
            }
        }
        if self.total_publications() >= MAX_PUBLICATIONS {
            return Err(invalid("too many publications"));
        }
        Ok(())
    }
}

/// A generated corpus. Edge endpoints index `publications`.
#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub config: CorpusConfig,
    pub publications: Vec<PublicationRecord>,
    /// Sorted by citing, then cited index.
    pub edges: Vec<(u32, u32)>,
}

impl SyntheticCorpus {
    pub fn write_publications<W: Write>(&self, out: W) -> io::Result<()> {
        crate::corpus::write_publications(out, &self.publications)
    }

    pub fn write_edges<W: Write>(&self, out: W) -> io::Result<()> {
        let pubs = &self.publications;
        crate::corpus::write_edges(
            out,
            self.edges
                .iter()
                .map(|&(a, b)| (pubs[a as usize].id.as_str(), pubs[b as usize].id.as_str())),
        )
    }

    pub fn into_snapshot(self) -> std::result::Result<CorpusSnapshot, CorpusError> {
        // Ids sort in index order, so indices survive the builder's sort.
        SnapshotBuilder::new(self.publications, self.config)?.build(self.edges)
    }
}

struct Meta {
    year: i32,
    country: u16,
    doc_type: DocType,
    categories: Vec<u32>,
    partner: Option<u16>,
    refs_total: u32,
}

fn stream(seed: u64, salt: u64, entity: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ salt);
    rng.set_stream(entity);
    rng
}

fn stochastic_round(rng: &mut ChaCha8Rng, x: f64) -> u32 {
    let floor = x.floor();
    let up = rng.random::<f64>() < x - floor;
    floor as u32 + up as u32
}

struct Samplers {
    category_mix: Vec<WeightedIndex<f64>>,
    recency: Vec<WeightedIndex<f64>>,
    doc_types: Vec<WeightedIndex<f64>>,
    gamma: Vec<Option<Gamma<f64>>>,
    /// `None` when the row has no off-diagonal mass.
    others: Vec<Option<WeightedIndex<f64>>>,
    categories_per_pub: WeightedIndex<f64>,
}

impl Samplers {
    fn new(config: &ScenarioConfig) -> Self {
        let uniform = vec![1.0; config.categories as usize];
        let mut s = Self {
            category_mix: Vec::new(),
            recency: Vec::new(),
            doc_types: Vec::new(),
            gamma: Vec::new(),
            others: Vec::new(),
            categories_per_pub: WeightedIndex::new(&config.categories_per_pub).expect("validated"),
        };
        for (i, c) in config.countries.iter().enumerate() {
            let mix = if c.category_mix.is_empty() {
                &uniform
            } else {
                &c.category_mix
            };
            s.category_mix.push(WeightedIndex::new(mix).expect("validated"));
            s.recency.push(WeightedIndex::new(&c.recency).expect("validated"));
            s.doc_types
                .push(WeightedIndex::new(c.doc_type_mix.weights()).expect("validated"));
            let RefLength { mean, dispersion } = c.ref_length;
            s.gamma.push((dispersion > 0.0 && mean > 0.0).then(|| {
                let shape = 1.0 / (dispersion * dispersion);
                Gamma::new(shape, mean / shape).expect("positive parameters")
            }));
            let off: Vec<f64> = config.targeting[i]
                .iter()
                .enumerate()
                .map(|(j, &w)| if j == i { 0.0 } else { w })
                .collect();
            s.others.push(WeightedIndex::new(&off).ok());
        }
        s
    }
}

/// Publications of `(country, year, category)`, indexed densely.
struct Pools {
    first_year: i32,
    years: usize,
    categories: usize,
    pools: Vec<Vec<u32>>,
}

impl Pools {
    fn slot(&self, country: u16, year: i32, category: u32) -> usize {
        (country as usize * self.years + (year - self.first_year) as usize) * self.categories + category as usize
    }

    fn build(config: &ScenarioConfig, metas: &[Meta]) -> Self {
        let years = (config.last_year - config.first_year + 1) as usize;
        let categories = config.categories as usize;
        let mut pools = Self {
            first_year: config.first_year,
            years,
            categories,
            pools: vec![Vec::new(); config.countries.len() * years * categories],
        };
        for (idx, m) in metas.iter().enumerate() {
            for country in std::iter::once(m.country).chain(m.partner) {
                for &cat in &m.categories {
                    let slot = pools.slot(country, m.year, cat);
                    pools.pools[slot].push(idx as u32);
                }
            }
        }
        pools
    }

    fn get(&self, country: u16, year: i32, category: u32) -> &[u32] {
        &self.pools[self.slot(country, year, category)]
    }
}

fn draw_meta(config: &ScenarioConfig, samplers: &Samplers, idx: u64, year: i32, country: u16) -> Meta {
    let mut rng = stream(config.seed, META_SALT, idx);
    let c = country as usize;
    let spec = &config.countries[c];
    let doc_type = DocType::ALL[samplers.doc_types[c].sample(&mut rng)];
    let k = (samplers.categories_per_pub.sample(&mut rng) + 1).min(config.categories as usize);
    let mut categories = Vec::with_capacity(k);
    let mut tries = 0;
    while categories.len() < k && tries < 8 * k {
        let cat = samplers.category_mix[c].sample(&mut rng) as u32;
        if !categories.contains(&cat) {
            categories.push(cat);
        }
        tries += 1;
    }
    categories.sort_unstable();
    let n = config.countries.len();
    let partner = (n > 1 && rng.random::<f64>() < config.collaboration_rate).then(|| {
        let j = rng.random_range(0..n - 1);
        (if j >= c { j + 1 } else { j }) as u16
    });
    let length = match &samplers.gamma[c] {
        Some(g) => g.sample(&mut rng),
        None => spec.ref_length.mean,
    };
    Meta {
        year,
        country,
        doc_type,
        categories,
        partner,
        refs_total: stochastic_round(&mut rng, length),
    }
}

fn draw_references(
    config: &ScenarioConfig,
    samplers: &Samplers,
    pools: &Pools,
    metas: &[Meta],
    idx: u32,
) -> (Vec<u32>, u32) {
    let mut rng = stream(config.seed, REFS_SALT, idx as u64);
    let m = &metas[idx as usize];
    let c = m.country as usize;
    let self_rate = config.countries[c].self_cite_rate(m.year);
    let mut targets: Vec<u32> = Vec::with_capacity(m.refs_total as usize);
    let mut wanted = 0;
    for _ in 0..m.refs_total {
        if config.resolved_share < 1.0 && rng.random::<f64>() >= config.resolved_share {
            continue;
        }
        wanted += 1;
        for _ in 0..MAX_ATTEMPTS {
            let target_country = match &samplers.others[c] {
                Some(others) if rng.random::<f64>() >= self_rate => others.sample(&mut rng) as u16,
                _ => m.country,
            };
            let offset = samplers.recency[c].sample(&mut rng) as i32;
            let year = m.year - offset;
            if year < config.first_year {
                continue;
            }
            let category = if rng.random::<f64>() < config.field_focus {
                m.categories[rng.random_range(0..m.categories.len())]
            } else {
                samplers.category_mix[target_country as usize].sample(&mut rng) as u32
            };
            let pool = pools.get(target_country, year, category);
            if pool.is_empty() {
                continue;
            }
            let q = pool[rng.random_range(0..pool.len())];
            if q != idx && !targets.contains(&q) {
                targets.push(q);
                break;
            }
        }
    }
    targets.sort_unstable();
    (targets, wanted)
}

fn publication_id(idx: usize) -> String {
    format!("P{idx:08}")
}

/// Generates the corpus described by `config`.
pub fn generate(config: &ScenarioConfig) -> Result<SyntheticCorpus> {
    config.validate()?;
    let samplers = Samplers::new(config);
    let mut slots = Vec::new();
    for year in config.years() {
        for (c, spec) in config.countries.iter().enumerate() {
            for _ in 0..spec.count(config.first_year, year) {
                slots.push((year, c as u16));
            }
        }
    }
    let metas: Vec<Meta> = slots
        .par_iter()
        .enumerate()
        .map(|(idx, &(year, c))| draw_meta(config, &samplers, idx as u64, year, c))
        .collect();
    let pools = Pools::build(config, &metas);
    let references: Vec<(Vec<u32>, u32)> = (0..metas.len() as u32)
        .into_par_iter()
        .map(|idx| draw_references(config, &samplers, &pools, &metas, idx))
        .collect();
    if config.closed_world {
        if let Some((idx, (targets, wanted))) = references
            .iter()
            .enumerate()
            .find(|(_, (t, wanted))| t.len() as u32 != *wanted)
        {
            return Err(SynthError::Infeasible {
                id: publication_id(idx),
                placed: targets.len() as u32,
                wanted: *wanted,
            });
        }
    }
    let edges: Vec<(u32, u32)> = references
        .iter()
        .enumerate()
        .flat_map(|(i, (targets, _))| targets.iter().map(move |&q| (i as u32, q)))
        .collect();
    let publications = metas
        .into_par_iter()
        .enumerate()
        .map(|(idx, m)| {
            let mut countries = vec![config.countries[m.country as usize].code.clone()];
            if let Some(p) = m.partner {
                countries.push(config.countries[p as usize].code.clone());
            }
            countries.sort();
            PublicationRecord {
                id: publication_id(idx),
                year: m.year,
                doc_type: m.doc_type,
                categories: m.categories.iter().map(|&c| ScenarioConfig::category_name(c)).collect(),
                countries,
                refs_total: m.refs_total,
            }
        })
        .collect();
    Ok(SyntheticCorpus {
        config: config.corpus_config(),
        publications,
        edges,
    })
}

pub const PRESETS: [&str; 4] = ["closed_world", "rising_X", "isolated_X", "empty_X"];

fn country(code: &str, base_count: u32, growth: f64, mean: f64, recency: &[f64], self_cite_rate: f64) -> CountrySpec {
    CountrySpec {
        code: code.into(),
        base_count,
        growth,
        counts_by_year: BTreeMap::new(),
        category_mix: Vec::new(),
        ref_length: RefLength { mean, dispersion: 0.3 },
        recency: recency.to_vec(),
        self_cite_rate,
        self_cite_by_year: BTreeMap::new(),
        doc_type_mix: DocTypeMix::default(),
    }
}

/// A single cohort in which every reference is resolved and counted.
fn closed_world() -> ScenarioConfig {
    let codes = [("AAA", 200), ("BBB", 150), ("CCC", 100)];
    ScenarioConfig {
        first_year: 2010,
        last_year: 2010,
        window_length: 3,
        top_share: 0.10,
        categories: 1,
        categories_per_pub: vec![1.0],
        countries: codes
            .iter()
            .map(|&(code, n)| country(code, n, 1.0, 12.0, &[1.0], 0.4))
            .collect(),
        targeting: vec![vec![0.0, 0.5, 0.5], vec![0.5, 0.0, 0.5], vec![0.5, 0.5, 0.0]],
        field_focus: 1.0,
        collaboration_rate: 0.0,
        resolved_share: 1.0,
        closed_world: true,
        seed: 1,
    }
}

/// Three established countries and a fast-growing country X with longer,
/// more recent reference lists that cites mainly A and B.
fn rising_x() -> ScenarioConfig {
    let flat = [1.0, 1.0, 1.0, 1.0, 1.0, 1.0];
    let recent = [6.0, 3.0, 1.0, 0.5, 0.25];
    let mut x = country("XXX", 60, 1.35, 30.0, &recent, 0.15);
    x.doc_type_mix = DocTypeMix {
        article: 0.9,
        review: 0.0,
        proceedings_paper: 0.1,
        other: 0.0,
    };
    ScenarioConfig {
        first_year: 2000,
        last_year: 2014,
        window_length: 3,
        top_share: 0.10,
        categories: 4,
        categories_per_pub: vec![0.8, 0.2],
        countries: vec![
            country("AAA", 400, 1.02, 20.0, &flat, 0.3),
            country("BBB", 300, 1.02, 20.0, &flat, 0.3),
            country("CCC", 350, 1.02, 20.0, &flat, 0.3),
            x,
        ],
        targeting: vec![
            vec![0.0, 0.45, 0.45, 0.10],
            vec![0.45, 0.0, 0.45, 0.10],
            vec![0.45, 0.45, 0.0, 0.10],
            vec![0.5, 0.5, 0.0, 0.0],
        ],
        field_focus: 0.8,
        collaboration_rate: 0.0,
        resolved_share: 0.9,
        closed_world: false,
        seed: 7,
    }
}

/// X publishes in a category of its own and cites only itself; nobody
/// cites X.
fn isolated_x() -> ScenarioConfig {
    let mut s = rising_x();
    s.categories = 5;
    for c in &mut s.countries {
        c.category_mix = if c.code == "XXX" {
            vec![0.0, 0.0, 0.0, 0.0, 1.0]
        } else {
            vec![1.0, 1.0, 1.0, 1.0, 0.0]
        };
        if c.code == "XXX" {
            c.self_cite_rate = 1.0;
        }
    }
    s.targeting = vec![
        vec![0.0, 0.5, 0.5, 0.0],
        vec![0.5, 0.0, 0.5, 0.0],
        vec![0.5, 0.5, 0.0, 0.0],
        vec![0.0, 0.0, 0.0, 1.0],
    ];
    s.field_focus = 1.0;
    s
}

/// X is listed but never publishes.
fn empty_x() -> ScenarioConfig {
    let mut s = rising_x();
    let x = s.countries.iter_mut().find(|c| c.code == "XXX").expect("preset has X");
    x.base_count = 0;
    s
}

pub fn preset(name: &str) -> Result<ScenarioConfig> {
    match name {
        "closed_world" => Ok(closed_world()),
        "rising_X" => Ok(rising_x()),
        "isolated_X" => Ok(isolated_x()),
        "empty_X" => Ok(empty_x()),
        _ => Err(SynthError::UnknownPreset(name.to_owned())),
    }
}

/// A small random scenario exercising collaboration, multi-category
/// publications, non-countable document types and unresolved references.
/// The total publication count never exceeds `max_pubs`.
pub fn random_scenario(seed: u64, max_pubs: u32) -> ScenarioConfig {
    const CODES: [&str; 6] = ["AAA", "BBB", "CCC", "DDD", "EEE", "FFF"];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(2..=5usize);
    let years = rng.random_range(1..=4i32);
    let categories = rng.random_range(1..=4u32);
    let per_year = (max_pubs as usize / (n * years as usize)).max(1) as u32;
    let countries = CODES[..n]
        .iter()
        .map(|&code| {
            let weights = |rng: &mut ChaCha8Rng, len: usize| -> Vec<f64> {
                let mut w: Vec<f64> = (0..len).map(|_| rng.random_range(0.0..1.0)).collect();
                w[0] += 0.1;
                w
            };
            let counts_by_year = (0..years).map(|y| (2010 + y, rng.random_range(0..=per_year))).collect();
            let recency_len = rng.random_range(1..=4);
            CountrySpec {
                code: code.into(),
                base_count: 0,
                growth: 1.0,
                counts_by_year,
                category_mix: weights(&mut rng, categories as usize),
                ref_length: RefLength {
                    mean: rng.random_range(0.0..15.0),
                    dispersion: if rng.random_bool(0.3) {
                        0.0
                    } else {
                        rng.random_range(0.1..1.0)
                    },
                },
                recency: weights(&mut rng, recency_len),
                self_cite_rate: rng.random_range(0.0..0.6),
                self_cite_by_year: BTreeMap::new(),
                doc_type_mix: DocTypeMix {
                    article: 1.0,
                    review: rng.random_range(0.0..0.3),
                    proceedings_paper: rng.random_range(0.0..0.3),
                    other: rng.random_range(0.0..0.2),
                },
            }
        })
        .collect();
    let targeting = (0..n)
        .map(|_| {
            let row: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
            let sum: f64 = row.iter().sum();
            row.into_iter().map(|w| w / sum).collect()
        })
        .collect();
    ScenarioConfig {
        first_year: 2010,
        last_year: 2010 + years - 1,
        window_length: rng.random_range(1..=3),
        top_share: 0.10,
        categories,
        categories_per_pub: vec![1.0, rng.random_range(0.0..0.5), rng.random_range(0.0..0.2)],
        countries,
        targeting,
        field_focus: rng.random_range(0.5..1.0),
        collaboration_rate: rng.random_range(0.0..0.3),
        resolved_share: rng.random_range(0.7..=1.0),
        closed_world: false,
        seed: rng.random(),
    }
}
