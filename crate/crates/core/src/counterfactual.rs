//! Counterfactual exclusion of one country and the actual-minus-
//! counterfactual deltas.
//!
//! Every publication listing the excluded country is removed from both the
//! cited and the citing side, citations are recounted, and expected counts
//! and thresholds are recomputed from scratch. A co-authored publication
//! listing the excluded country disappears for its other countries as well.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;

use crate::corpus::{CorpusSnapshot, CountryId, PubId};
use crate::indicators::effective_expected_count;
use crate::world::World;

/// Snapshot without any publication listing `country`, plus the original
/// id of each survivor. An unknown country yields an equivalent snapshot.
pub fn exclude_with_survivors(snapshot: &CorpusSnapshot, country: &str) -> (CorpusSnapshot, Vec<PubId>) {
    let keep: Vec<bool> = match snapshot.country_id(country) {
        Some(c) => (0..snapshot.len() as PubId)
            .map(|p| !snapshot.lists_country(p, c))
            .collect(),
        None => vec![true; snapshot.len()],
    };
    snapshot.retain(&keep)
}

pub fn exclude_country(snapshot: &CorpusSnapshot, country: &str) -> CorpusSnapshot {
    exclude_with_survivors(snapshot, country).0
}

/// Actual and counterfactual worlds side by side. Both snapshots share
/// category and country tables, so interned ids join directly.
#[derive(Debug, Clone)]
pub struct WorldPair {
    pub actual: World,
    pub counterfactual: World,
    pub excluded: String,
    survivors: Vec<PubId>,
}

impl WorldPair {
    pub fn build(snapshot: CorpusSnapshot, excluded: &str) -> Self {
        let (cf, survivors) = exclude_with_survivors(&snapshot, excluded);
        let (actual, counterfactual) = rayon::join(|| World::compute(snapshot), || World::compute(cf));
        Self {
            actual,
            counterfactual,
            excluded: excluded.to_owned(),
            survivors,
        }
    }

    /// Id in the actual world of a counterfactual publication.
    #[inline]
    pub fn actual_id(&self, cf: PubId) -> PubId {
        self.survivors[cf as usize]
    }

    pub fn survivors(&self) -> &[PubId] {
        &self.survivors
    }

    fn country(&self, code: &str) -> Option<CountryId> {
        if code == self.excluded {
            return None;
        }
        self.actual.snapshot.country_id(code)
    }

    /// Cited-side counterfactual publications of a country-year.
    fn cf_publications(&self, c: CountryId, year: i32) -> impl Iterator<Item = PubId> + '_ {
        let s = &self.counterfactual.snapshot;
        s.country_publications(c)
            .iter()
            .copied()
            .filter(move |&p| s.is_cited_side(p) && s.year(p) == year)
    }

    /// `OC_actual - OC_counterfactual` of a surviving publication.
    pub fn obtained_gain(&self, cf: PubId) -> u32 {
        let actual = self.actual.obtained.get(self.actual_id(cf));
        let counter = self.counterfactual.obtained.get(cf);
        debug_assert!(counter <= actual);
        actual - counter
    }

    /// `NC_cf / NC_act` for one surviving publication, when `OC_act > 0` and
    /// the score is defined in both worlds.
    pub fn publication_ratio(&self, cf: PubId) -> Option<f64> {
        let p = self.actual_id(cf);
        if self.actual.obtained.get(p) == 0 {
            return None;
        }
        let act = self.actual.scores[p as usize].filter(|s| s.defined)?;
        let counter = self.counterfactual.scores[cf as usize].filter(|s| s.defined)?;
        Some(counter.ncs / act.ncs)
    }

    /// The two factors of the ratio of ratios for one surviving publication:
    /// `OC_cf / OC_act` and `EC_cf / EC_act`.
    pub fn ratio_factors(&self, cf: PubId) -> Option<(f64, f64)> {
        let p = self.actual_id(cf);
        let oc_act = self.actual.obtained.get(p);
        if oc_act == 0 {
            return None;
        }
        let ec_act = effective_expected_count(&self.actual.snapshot, p, &self.actual.cohorts)?;
        let ec_cf = effective_expected_count(&self.counterfactual.snapshot, cf, &self.counterfactual.cohorts)?;
        let oc_cf = self.counterfactual.obtained.get(cf);
        Some((oc_cf as f64 / oc_act as f64, ec_cf / ec_act))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Indicator {
    Mncs,
    PpTop10,
}

/// `Impact_actual - Impact_counterfactual`; `None` if the country-year is
/// absent (or the indicator undefined) in either world.
pub fn delta_impact(pair: &WorldPair, country: &str, year: i32, indicator: Indicator) -> Option<f64> {
    let c = pair.country(country)?;
    let act = pair.actual.indicators.get(c, year)?;
    let cf = pair.counterfactual.indicators.get(c, year)?;
    match indicator {
        Indicator::Mncs => Some(act.mncs? - cf.mncs?),
        Indicator::PpTop10 => Some(act.pp_top10 - cf.pp_top10),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedCountDeltas {
    /// `(category, EC_actual - EC_counterfactual)`, by category code.
    pub per_category: Vec<(String, f64)>,
    pub mean: Option<f64>,
    /// Cohorts present in only one world.
    pub omitted: usize,
}

pub fn delta_expected_counts(pair: &WorldPair, year: i32) -> ExpectedCountDeltas {
    let act = &pair.actual;
    let cf = &pair.counterfactual;
    let mut per_category = Vec::new();
    let mut omitted = 0;
    for (h, key) in act.snapshot.cohorts().iter().enumerate() {
        if key.year != year {
            continue;
        }
        match cf.cohorts.lookup(&cf.snapshot, key.year, key.category) {
            Some(counter) => per_category.push((
                act.snapshot.category_name(key.category).to_owned(),
                act.cohorts.get(h as u32).expected_count - counter.expected_count,
            )),
            None => omitted += 1,
        }
    }
    let mean =
        (!per_category.is_empty()).then(|| per_category.iter().map(|d| d.1).sum::<f64>() / per_category.len() as f64);
    ExpectedCountDeltas {
        per_category,
        mean,
        omitted,
    }
}

/// Country-year accumulation over surviving cited-side publications.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SurvivorSummary {
    pub publications: u32,
    pub gain_sum: u64,
    pub ratio_sum: f64,
    pub eligible: u32,
    pub skipped: u32,
}

impl SurvivorSummary {
    fn collect(pair: &WorldPair, pubs: impl Iterator<Item = PubId>) -> Self {
        let mut s = Self::default();
        for p in pubs {
            s.publications += 1;
            s.gain_sum += pair.obtained_gain(p) as u64;
            match pair.publication_ratio(p) {
                Some(r) => {
                    s.ratio_sum += r;
                    s.eligible += 1;
                }
                None => s.skipped += 1,
            }
        }
        s
    }

    pub fn delta_oc(&self) -> Option<f64> {
        (self.publications > 0).then(|| self.gain_sum as f64 / self.publications as f64)
    }

    pub fn ratio_of_ratios(&self) -> Option<f64> {
        (self.eligible > 0).then(|| self.ratio_sum / self.eligible as f64)
    }
}

/// Mean over the country-year's surviving cited-side publications of
/// `OC_actual - OC_counterfactual`.
pub fn delta_obtained(pair: &WorldPair, country: &str, year: i32) -> Option<f64> {
    let c = pair.country(country)?;
    SurvivorSummary::collect(pair, pair.cf_publications(c, year)).delta_oc()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioOfRatios {
    pub mean: Option<f64>,
    pub eligible: u32,
    pub skipped: u32,
}

/// Country-year mean of `NC_cf / NC_act` over eligible publications
/// (`OC_act > 0`, score defined in both worlds); others are counted as
/// skipped.
pub fn ratio_of_ratios(pair: &WorldPair, country: &str, year: i32) -> RatioOfRatios {
    let summary = match pair.country(country) {
        Some(c) => SurvivorSummary::collect(pair, pair.cf_publications(c, year)),
        None => SurvivorSummary::default(),
    };
    RatioOfRatios {
        mean: summary.ratio_of_ratios(),
        eligible: summary.eligible,
        skipped: summary.skipped,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanEffect {
    pub mean: f64,
    /// `1.96 * sd / sqrt(n)` with the sample standard deviation; `None`
    /// for fewer than two values.
    pub ci_halfwidth: Option<f64>,
    pub n: usize,
}

pub fn mean_effect(values: &[f64]) -> Option<MeanEffect> {
    let n = values.len();
    if n == 0 {
        return None;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let ci_halfwidth = (n >= 2).then(|| {
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        1.96 * (var / n as f64).sqrt()
    });
    Some(MeanEffect { mean, ci_halfwidth, n })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountryDelta {
    pub country: String,
    pub year: i32,
    pub delta_mncs: Option<f64>,
    pub delta_pptop10: f64,
    pub delta_oc: f64,
    pub ratio_of_ratios: Option<f64>,
    pub eligible_count: u32,
    pub skipped_count: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CategoryDelta {
    pub category: String,
    pub year: i32,
    pub delta_ec: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EffectIndicator {
    Mncs,
    PpTop10,
    ObtainedCitations,
    RatioOfRatios,
}

impl EffectIndicator {
    pub const ALL: [EffectIndicator; 4] = [
        EffectIndicator::Mncs,
        EffectIndicator::PpTop10,
        EffectIndicator::ObtainedCitations,
        EffectIndicator::RatioOfRatios,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EffectIndicator::Mncs => "delta_mncs",
            EffectIndicator::PpTop10 => "delta_pptop10",
            EffectIndicator::ObtainedCitations => "delta_oc",
            EffectIndicator::RatioOfRatios => "ratio_of_ratios",
        }
    }

    fn value(self, row: &CountryDelta) -> Option<f64> {
        match self {
            EffectIndicator::Mncs => row.delta_mncs,
            EffectIndicator::PpTop10 => Some(row.delta_pptop10),
            EffectIndicator::ObtainedCitations => Some(row.delta_oc),
            EffectIndicator::RatioOfRatios => row.ratio_of_ratios,
        }
    }
}

impl fmt::Display for EffectIndicator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeanEffectRow {
    pub year: i32,
    pub indicator: EffectIndicator,
    pub effect: MeanEffect,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DeltaReport {
    /// Country-years present in both worlds, by country code then year.
    pub countries: Vec<CountryDelta>,
    /// By year then category code.
    pub categories: Vec<CategoryDelta>,
    pub omitted_cohorts: usize,
    /// By year then indicator.
    pub mean_effects: Vec<MeanEffectRow>,
}

impl DeltaReport {
    pub fn country(&self, code: &str, year: i32) -> Option<&CountryDelta> {
        self.countries.iter().find(|r| r.country == code && r.year == year)
    }

    /// Cross-country mean series of one indicator, keyed by year.
    pub fn mean_series(&self, indicator: EffectIndicator) -> BTreeMap<i32, f64> {
        self.mean_effects
            .iter()
            .filter(|r| r.indicator == indicator)
            .map(|r| (r.year, r.effect.mean))
            .collect()
    }
}

pub fn delta_report(pair: &WorldPair) -> DeltaReport {
    let act = &pair.actual;
    let cf = &pair.counterfactual;
    let n_countries = act.snapshot.country_names().len() as CountryId;

    let countries: Vec<CountryDelta> = (0..n_countries)
        .into_par_iter()
        .filter(|&c| act.snapshot.country_name(c) != pair.excluded)
        .map(|c| {
            let mut by_year: BTreeMap<i32, Vec<PubId>> = BTreeMap::new();
            for &p in cf.snapshot.country_publications(c) {
                if cf.snapshot.is_cited_side(p) {
                    by_year.entry(cf.snapshot.year(p)).or_default().push(p);
                }
            }
            by_year
                .into_iter()
                .filter_map(|(year, pubs)| {
                    let a = act.indicators.get(c, year)?;
                    let f = cf.indicators.get(c, year)?;
                    let summary = SurvivorSummary::collect(pair, pubs.into_iter());
                    Some(CountryDelta {
                        country: act.snapshot.country_name(c).to_owned(),
                        year,
                        delta_mncs: a.mncs.zip(f.mncs).map(|(x, y)| x - y),
                        delta_pptop10: a.pp_top10 - f.pp_top10,
                        delta_oc: summary.delta_oc().expect("country-year has survivors"),
                        ratio_of_ratios: summary.ratio_of_ratios(),
                        eligible_count: summary.eligible,
                        skipped_count: summary.skipped,
                    })
                })
                .collect::<Vec<_>>()
        })
        .flatten()
        .collect();

    let mut categories = Vec::new();
    let mut omitted_cohorts = 0;
    for year in act.snapshot.years() {
        let deltas = delta_expected_counts(pair, year);
        omitted_cohorts += deltas.omitted;
        categories.extend(
            deltas
                .per_category
                .into_iter()
                .map(|(category, delta_ec)| CategoryDelta {
                    category,
                    year,
                    delta_ec,
                }),
        );
    }

    let mut mean_effects = Vec::new();
    for year in act.snapshot.years() {
        for indicator in EffectIndicator::ALL {
            let values: Vec<f64> = countries
                .iter()
                .filter(|r| r.year == year)
                .filter_map(|r| indicator.value(r))
                .collect();
            if let Some(effect) = mean_effect(&values) {
                mean_effects.push(MeanEffectRow {
                    year,
                    indicator,
                    effect,
                });
            }
        }
    }

    DeltaReport {
        countries,
        categories,
        omitted_cohorts,
        mean_effects,
    }
}
