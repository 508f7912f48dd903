//! Explanatory statistics for the counterfactual mechanism: reference-list
//! behavior, cited-age profiles, citations from non-standard document
//! types, national self-citation shares and the additional-citations
//! profile of recipient countries.
//!
//! Reference-length diagnostics look at articles and reviews only, the same
//! population that forms the normalization cohorts. Self-citation shares and
//! cited-age profiles use resolved references of every citing document.

use std::collections::BTreeMap;

use crate::cohort::{membership_weight, CohortTable};
use crate::corpus::{CorpusSnapshot, CountryId, PubId};
use crate::counterfactual::WorldPair;
use crate::indicators::effective_expected_count;

/// Quantile levels reported for self-citation shares, in percent.
pub const QUANTILE_LEVELS: [u32; 5] = [10, 25, 50, 75, 90];
pub const HISTOGRAM_BINS: usize = 20;

/// Nearest-rank quantile of an ascending slice: the value at rank
/// `ceil(percent / 100 * n)`.
pub fn nearest_rank(sorted: &[f64], percent: u32) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let n = sorted.len();
    let rank = ((percent as usize * n).div_ceil(100)).max(1);
    Some(sorted[rank.min(n) - 1])
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelfCitationDistribution {
    pub country: String,
    pub year: i32,
    /// Per-publication shares, ascending.
    pub shares: Vec<f64>,
    /// At [`QUANTILE_LEVELS`]; empty when there are no shares.
    pub quantiles: Vec<f64>,
    /// Counts over [`HISTOGRAM_BINS`] equal-width bins on `[0, 1]`; the last
    /// bin is closed.
    pub histogram: Vec<u32>,
}

fn country_pubs<'a>(snapshot: &'a CorpusSnapshot, country: &str) -> &'a [PubId] {
    match snapshot.country_id(country) {
        Some(c) => snapshot.country_publications(c),
        None => &[],
    }
}

/// Share of each citing publication's resolved references that point to a
/// publication listing the same country.
pub fn self_citation_shares(snapshot: &CorpusSnapshot, country: &str, year: i32) -> SelfCitationDistribution {
    let mut shares = Vec::new();
    if let Some(c) = snapshot.country_id(country) {
        for &p in snapshot.country_publications(c) {
            let refs = snapshot.references(p);
            if snapshot.year(p) != year || refs.is_empty() {
                continue;
            }
            let own = refs.iter().filter(|&&q| snapshot.lists_country(q, c)).count();
            shares.push(own as f64 / refs.len() as f64);
        }
    }
    shares.sort_by(f64::total_cmp);
    let quantiles = QUANTILE_LEVELS
        .iter()
        .filter_map(|&q| nearest_rank(&shares, q))
        .collect();
    let mut histogram = vec![0u32; HISTOGRAM_BINS];
    for &s in &shares {
        let bin = ((s * HISTOGRAM_BINS as f64) as usize).min(HISTOGRAM_BINS - 1);
        histogram[bin] += 1;
    }
    SelfCitationDistribution {
        country: country.to_owned(),
        year,
        shares,
        quantiles,
        histogram,
    }
}

/// Reference-list length of a publication: `refs_total`, or with
/// `windowed` the resolved references to articles/reviews at most
/// `window_length - 1` years older than the citing publication.
pub fn reference_length(snapshot: &CorpusSnapshot, p: PubId, windowed: bool) -> u32 {
    if !windowed {
        return snapshot.refs_total(p);
    }
    let year = snapshot.year(p);
    let oldest = year - snapshot.config().window_length as i32 + 1;
    snapshot
        .references(p)
        .iter()
        .filter(|&&q| snapshot.is_cited_side(q) && (oldest..=year).contains(&snapshot.year(q)))
        .count() as u32
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizedRefLength {
    pub value: Option<f64>,
    pub used: u32,
    /// Publications without a positive baseline.
    pub skipped: u32,
}

/// Mean over the country's articles/reviews of the year of `L_j / B_j`,
/// where `B_j` averages, over `j`'s categories, the mean length among
/// articles/reviews of the same year and category not listing the country.
pub fn normalized_ref_length(
    snapshot: &CorpusSnapshot,
    country: &str,
    year: i32,
    windowed: bool,
) -> NormalizedRefLength {
    let mut out = NormalizedRefLength {
        value: None,
        used: 0,
        skipped: 0,
    };
    let Some(c) = snapshot.country_id(country) else {
        return out;
    };
    let baseline = |category| -> Option<f64> {
        let h = snapshot.cohort_of(year, category)?;
        let (sum, n) = snapshot
            .cohort_members(h)
            .iter()
            .filter(|&&q| !snapshot.lists_country(q, c))
            .fold((0u64, 0u32), |(s, n), &q| {
                (s + reference_length(snapshot, q, windowed) as u64, n + 1)
            });
        (n > 0).then(|| sum as f64 / n as f64)
    };
    let mut cache: BTreeMap<u32, Option<f64>> = BTreeMap::new();
    let mut total = 0.0;
    for &p in snapshot.country_publications(c) {
        if snapshot.year(p) != year || !snapshot.is_cited_side(p) {
            continue;
        }
        let bases: Vec<f64> = snapshot
            .categories(p)
            .iter()
            .filter_map(|&cat| *cache.entry(cat).or_insert_with(|| baseline(cat)))
            .collect();
        let b = if bases.is_empty() {
            0.0
        } else {
            bases.iter().sum::<f64>() / bases.len() as f64
        };
        if b > 0.0 {
            total += reference_length(snapshot, p, windowed) as f64 / b;
            out.used += 1;
        } else {
            out.skipped += 1;
        }
    }
    out.value = (out.used > 0).then(|| total / out.used as f64);
    out
}

/// Share of resolved references by cited publication year, for citing
/// publications of `citing_year` that list the country (or, with
/// `complement`, that do not).
pub fn cited_age_distribution(
    snapshot: &CorpusSnapshot,
    country: &str,
    citing_year: i32,
    complement: bool,
) -> BTreeMap<i32, f64> {
    let c = snapshot.country_id(country);
    let member = |p: PubId| c.is_some_and(|c| snapshot.lists_country(p, c));
    let mut counts: BTreeMap<i32, u64> = BTreeMap::new();
    let mut total = 0u64;
    let citing: Box<dyn Iterator<Item = PubId>> = if complement {
        Box::new((0..snapshot.len() as PubId).filter(|&p| !member(p)))
    } else {
        Box::new(country_pubs(snapshot, country).iter().copied())
    };
    for p in citing {
        if snapshot.year(p) != citing_year {
            continue;
        }
        for &q in snapshot.references(p) {
            *counts.entry(snapshot.year(q)).or_default() += 1;
            total += 1;
        }
    }
    counts.into_iter().map(|(y, n)| (y, n as f64 / total as f64)).collect()
}

/// Countable in-window citations received by articles/reviews of `year`
/// from publications that list the country and are neither articles nor
/// reviews.
pub fn nonstandard_citing_counts(snapshot: &CorpusSnapshot, country: &str, year: i32) -> u64 {
    let config = snapshot.config();
    let mut n = 0u64;
    for &p in country_pubs(snapshot, country) {
        if snapshot.is_cited_side(p) {
            continue;
        }
        let citing_year = snapshot.year(p);
        if citing_year < year || citing_year > config.window_end(year) {
            continue;
        }
        n += snapshot
            .references(p)
            .iter()
            .filter(|&&q| snapshot.is_cited_side(q) && snapshot.year(q) == year)
            .count() as u64;
    }
    n
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdditionalCitationsProfile {
    pub country: String,
    pub year: i32,
    /// Surviving articles/reviews of the country-year.
    pub publications: u32,
    /// Of those, cited at least once (countably, in window) by the excluded
    /// country.
    pub cited_count: u32,
    pub cited_share: f64,
    /// Mean of `ΔOC_j / EC_cf,j` over cited publications.
    pub avg_additional_normalized: Option<f64>,
    /// Cited publications without a positive counterfactual expected count.
    pub skipped: u32,
    pub counterfactual_mncs: Option<f64>,
}

pub fn additional_citations_profile(pair: &WorldPair, country: &str, year: i32) -> AdditionalCitationsProfile {
    let cf = &pair.counterfactual;
    let mut profile = AdditionalCitationsProfile {
        country: country.to_owned(),
        year,
        publications: 0,
        cited_count: 0,
        cited_share: 0.0,
        avg_additional_normalized: None,
        skipped: 0,
        counterfactual_mncs: None,
    };
    let Some(c) = cf.snapshot.country_id(country).filter(|_| country != pair.excluded) else {
        return profile;
    };
    let mut sum = 0.0;
    let mut used = 0u32;
    for &p in cf.snapshot.country_publications(c) {
        if cf.snapshot.year(p) != year || !cf.snapshot.is_cited_side(p) {
            continue;
        }
        profile.publications += 1;
        let gain = pair.obtained_gain(p);
        if gain == 0 {
            continue;
        }
        profile.cited_count += 1;
        match effective_expected_count(&cf.snapshot, p, &cf.cohorts) {
            Some(ec) => {
                sum += gain as f64 / ec;
                used += 1;
            }
            None => profile.skipped += 1,
        }
    }
    if profile.publications > 0 {
        profile.cited_share = profile.cited_count as f64 / profile.publications as f64;
    }
    profile.avg_additional_normalized = (used > 0).then(|| sum / used as f64);
    profile.counterfactual_mncs = cf.indicators.get(c, year).and_then(|r| r.mncs);
    profile
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScatterPoint {
    pub category: String,
    /// Weighted like the expected count (`1/k` per category).
    pub mean_ref_length: f64,
    pub expected_count: f64,
}

/// One point per cohort of the year: mean `refs_total` against expected
/// citation count.
pub fn reflen_vs_ec_scatter(snapshot: &CorpusSnapshot, cohorts: &CohortTable, year: i32) -> Vec<ScatterPoint> {
    snapshot
        .cohorts()
        .iter()
        .enumerate()
        .filter(|(_, key)| key.year == year)
        .map(|(h, key)| {
            let stats = cohorts.get(h as u32);
            let mass: f64 = snapshot
                .cohort_members(h as u32)
                .iter()
                .map(|&p| membership_weight(snapshot, p) * snapshot.refs_total(p) as f64)
                .sum();
            ScatterPoint {
                category: snapshot.category_name(key.category).to_owned(),
                mean_ref_length: mass / stats.weight,
                expected_count: stats.expected_count,
            }
        })
        .collect()
}

/// Pearson correlation of the two scatter columns; `None` with fewer than
/// two points or a constant column.
pub fn pearson(points: &[ScatterPoint]) -> Option<f64> {
    let n = points.len();
    if n < 2 {
        return None;
    }
    let mx = points.iter().map(|p| p.mean_ref_length).sum::<f64>() / n as f64;
    let my = points.iter().map(|p| p.expected_count).sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for p in points {
        let dx = p.mean_ref_length - mx;
        let dy = p.expected_count - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    (sxx > 0.0 && syy > 0.0).then(|| sxy / (sxx * syy).sqrt())
}

/// Countries appearing in a snapshot, excluding one code.
pub fn other_countries<'a>(
    snapshot: &'a CorpusSnapshot,
    excluded: &'a str,
) -> impl Iterator<Item = (CountryId, &'a str)> + 'a {
    snapshot
        .country_names()
        .iter()
        .enumerate()
        .filter(move |(_, name)| name.as_str() != excluded)
        .map(|(i, name)| (i as CountryId, name.as_str()))
}
