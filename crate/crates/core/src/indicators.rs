//! Publication-level normalized citation scores and their national
//! aggregation (MNCS, PP(top10)), under whole counting.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

use crate::cohort::{membership_weight, CohortTable, ObtainedCitations};
use crate::corpus::{CorpusSnapshot, CountryId, PubId};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NcsScore {
    pub ncs: f64,
    /// False iff every cohort of the publication has a zero expected count.
    pub defined: bool,
}

/// Mean of `OC / EC_h` over the publication's cohorts with `EC_h > 0`.
pub fn ncs(snapshot: &CorpusSnapshot, p: PubId, oc: &ObtainedCitations, cohorts: &CohortTable) -> NcsScore {
    let count = oc.get(p) as f64;
    let mut sum = 0.0;
    let mut used = 0u32;
    for h in snapshot.publication_cohorts(p) {
        let ec = cohorts.get(h).expected_count;
        if ec > 0.0 {
            sum += count / ec;
            used += 1;
        }
    }
    if used == 0 {
        NcsScore {
            ncs: 0.0,
            defined: false,
        }
    } else {
        NcsScore {
            ncs: sum / used as f64,
            defined: true,
        }
    }
}

/// The single expected count that reproduces [`ncs`] as `OC / EC`: the
/// harmonic mean of the publication's positive cohort expected counts.
pub fn effective_expected_count(snapshot: &CorpusSnapshot, p: PubId, cohorts: &CohortTable) -> Option<f64> {
    let mut inverse = 0.0;
    let mut used = 0u32;
    for h in snapshot.publication_cohorts(p) {
        let ec = cohorts.get(h).expected_count;
        if ec > 0.0 {
            inverse += 1.0 / ec;
            used += 1;
        }
    }
    (used > 0).then(|| used as f64 / inverse)
}

/// Scores for every cited-side publication; `None` elsewhere.
pub fn publication_scores(
    snapshot: &CorpusSnapshot,
    oc: &ObtainedCitations,
    cohorts: &CohortTable,
) -> Vec<Option<NcsScore>> {
    (0..snapshot.len() as PubId)
        .into_par_iter()
        .map(|p| snapshot.is_cited_side(p).then(|| ncs(snapshot, p, oc, cohorts)))
        .collect()
}

/// Category-weighted top-share membership per publication (zero outside
/// the cited side).
pub fn top_fractions(snapshot: &CorpusSnapshot, oc: &ObtainedCitations, cohorts: &CohortTable) -> Vec<f64> {
    (0..snapshot.len() as PubId)
        .into_par_iter()
        .map(|p| {
            let w = membership_weight(snapshot, p);
            let count = oc.get(p);
            snapshot
                .publication_cohorts(p)
                .map(|h| w * cohorts.get(h).top_fraction(count))
                .sum()
        })
        .collect()
}

fn cited_side_of(snapshot: &CorpusSnapshot, country: &str, year: i32) -> Vec<PubId> {
    let Some(c) = snapshot.country_id(country) else {
        return Vec::new();
    };
    snapshot
        .country_publications(c)
        .iter()
        .copied()
        .filter(|&p| snapshot.is_cited_side(p) && snapshot.year(p) == year)
        .collect()
}

/// Mean NCS over the country-year's defined scores; `None` when there are
/// none.
pub fn mncs(country: &str, year: i32, snapshot: &CorpusSnapshot, scores: &[Option<NcsScore>]) -> Option<f64> {
    let defined: Vec<f64> = cited_side_of(snapshot, country, year)
        .into_iter()
        .filter_map(|p| scores[p as usize].filter(|s| s.defined).map(|s| s.ncs))
        .collect();
    (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64)
}

/// Mean top fraction over the country-year's cited-side publications.
pub fn pp_top10(country: &str, year: i32, snapshot: &CorpusSnapshot, fractions: &[f64]) -> Option<f64> {
    let pubs = cited_side_of(snapshot, country, year);
    (!pubs.is_empty()).then(|| pubs.iter().map(|&p| fractions[p as usize]).sum::<f64>() / pubs.len() as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountryYearIndicators {
    pub country: String,
    pub year: i32,
    /// Cited-side publications listing the country (whole counting).
    pub pub_count: u32,
    pub mncs: Option<f64>,
    pub pp_top10: f64,
    pub mean_oc: f64,
    pub undefined_count: u32,
}

#[derive(Default)]
struct Accumulator {
    pubs: u32,
    defined: u32,
    ncs: f64,
    top: f64,
    oc: u64,
}

/// Indicators for every country-year with at least one cited-side
/// publication, ordered by country code then year.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IndicatorTable {
    rows: Vec<CountryYearIndicators>,
    index: HashMap<(CountryId, i32), usize>,
}

impl IndicatorTable {
    pub fn rows(&self) -> &[CountryYearIndicators] {
        &self.rows
    }

    pub fn get(&self, country: CountryId, year: i32) -> Option<&CountryYearIndicators> {
        self.index.get(&(country, year)).map(|&i| &self.rows[i])
    }
}

pub fn country_indicators(
    snapshot: &CorpusSnapshot,
    oc: &ObtainedCitations,
    scores: &[Option<NcsScore>],
    fractions: &[f64],
) -> IndicatorTable {
    let per_country: Vec<Vec<(CountryId, CountryYearIndicators)>> = (0..snapshot.country_names().len() as CountryId)
        .into_par_iter()
        .map(|c| {
            let mut years: BTreeMap<i32, Accumulator> = BTreeMap::new();
            for &p in snapshot.country_publications(c) {
                let Some(score) = scores[p as usize] else {
                    continue;
                };
                let acc = years.entry(snapshot.year(p)).or_default();
                acc.pubs += 1;
                acc.oc += oc.get(p) as u64;
                acc.top += fractions[p as usize];
                if score.defined {
                    acc.defined += 1;
                    acc.ncs += score.ncs;
                }
            }
            years
                .into_iter()
                .map(|(year, acc)| {
                    let n = acc.pubs as f64;
                    (
                        c,
                        CountryYearIndicators {
                            country: snapshot.country_name(c).to_owned(),
                            year,
                            pub_count: acc.pubs,
                            mncs: (acc.defined > 0).then(|| acc.ncs / acc.defined as f64),
                            pp_top10: acc.top / n,
                            mean_oc: acc.oc as f64 / n,
                            undefined_count: acc.pubs - acc.defined,
                        },
                    )
                })
                .collect()
        })
        .collect();
    let mut table = IndicatorTable::default();
    for (c, row) in per_country.into_iter().flatten() {
        table.index.insert((c, row.year), table.rows.len());
        table.rows.push(row);
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cohort::{compute_cohorts, count_obtained};
    use crate::corpus::{build_snapshot, CitationEdge, CorpusConfig, DocType, PublicationRecord};

    fn article(id: &str, cats: &[&str], countries: &[&str], refs: u32) -> PublicationRecord {
        PublicationRecord {
            id: id.into(),
            year: 2010,
            doc_type: DocType::Article,
            categories: cats.iter().map(|s| s.to_string()).collect(),
            countries: countries.iter().map(|s| s.to_string()).collect(),
            refs_total: refs,
        }
    }

    /// Builds a corpus whose citing side is proceedings papers so that the
    /// requested obtained counts can be dialed in directly.
    fn corpus(targets: &[(&str, &[&str], &[&str], u32)]) -> CorpusSnapshot {
        let mut pubs = Vec::new();
        let mut edges = Vec::new();
        let max = targets.iter().map(|t| t.3).max().unwrap_or(0);
        for i in 0..max {
            pubs.push(PublicationRecord {
                doc_type: DocType::ProceedingsPaper,
                ..article(&format!("z{i:03}"), &["CZ"], &[], targets.len() as u32)
            });
        }
        for (id, cats, countries, count) in targets {
            pubs.push(article(id, cats, countries, 0));
            for i in 0..*count {
                edges.push(CitationEdge::new(format!("z{i:03}"), *id));
            }
        }
        build_snapshot(pubs, &edges, CorpusConfig::new(2010, 2010)).unwrap()
    }

    #[test]
    fn direct_ratio_and_weighted_categories() {
        // C1: {a: 3, b: 3} -> EC 3; C2: {a: 3, c: 1, d: 0, e: 0} with a
        // weighted 1/2 -> EC = (1.5 + 1) / 3.5.
        let s = corpus(&[
            ("a", &["C1", "C2"], &["AAA"], 3),
            ("b", &["C1"], &["AAA"], 3),
            ("c", &["C2"], &["BBB"], 1),
            ("d", &["C2"], &["BBB"], 0),
        ]);
        let oc = count_obtained(&s);
        let cohorts = compute_cohorts(&s, &oc);
        let c1 = cohorts.lookup(&s, 2010, s.category_id("C1").unwrap()).unwrap();
        let c2 = cohorts.lookup(&s, 2010, s.category_id("C2").unwrap()).unwrap();
        assert!((c1.expected_count - 3.0 * 1.5 / 1.5).abs() < 1e-12);
        let a = s.find("a").unwrap();
        let score = ncs(&s, a, &oc, &cohorts);
        let expected = 0.5 * (3.0 / c1.expected_count) + 0.5 * (3.0 / c2.expected_count);
        assert!((score.ncs - expected).abs() < 1e-12);
        let eff = effective_expected_count(&s, a, &cohorts).unwrap();
        assert!((3.0 / eff - score.ncs).abs() < 1e-12);
    }

    #[test]
    fn hand_weighted_example() {
        // OC = 3 with EC 3 and EC 1 -> (1/2)(1) + (1/2)(3) = 2.
        let s = corpus(&[
            ("p", &["C1", "C2"], &["AAA"], 3),
            ("q", &["C1"], &["AAA"], 3),
            ("r", &["C2"], &["AAA"], 0),
        ]);
        let oc = count_obtained(&s);
        let cohorts = compute_cohorts(&s, &oc);
        // C1 = {p: 3 (w .5), q: 3} -> 3; C2 = {p: 3 (w .5), r: 0} -> 1.
        assert_eq!(ncs(&s, s.find("p").unwrap(), &oc, &cohorts).ncs, 2.0);
    }

    #[test]
    fn single_category_direct_ratio() {
        let s = corpus(&[("a", &["C"], &["AAA"], 4), ("b", &["C"], &["AAA"], 0)]);
        let oc = count_obtained(&s);
        let cohorts = compute_cohorts(&s, &oc);
        assert_eq!(ncs(&s, s.find("a").unwrap(), &oc, &cohorts).ncs, 2.0);
    }

    #[test]
    fn all_zero_cohort_is_undefined() {
        let s = corpus(&[("a", &["C"], &["AAA"], 0), ("b", &["C"], &["AAA"], 0)]);
        let oc = count_obtained(&s);
        let cohorts = compute_cohorts(&s, &oc);
        let scores = publication_scores(&s, &oc, &cohorts);
        assert!(!scores[s.find("a").unwrap() as usize].unwrap().defined);
        let fractions = top_fractions(&s, &oc, &cohorts);
        let table = country_indicators(&s, &oc, &scores, &fractions);
        let row = &table.rows()[0];
        assert_eq!(row.undefined_count, 2);
        assert_eq!(row.mncs, None);
        assert!((row.pp_top10 - 0.1).abs() < 1e-15);
        assert_eq!(mncs("AAA", 2010, &s, &scores), None);
    }

    #[test]
    fn whole_counting_and_absent_marker() {
        let s = corpus(&[
            ("a", &["C"], &["AAA", "BBB"], 3),
            ("b", &["C"], &["AAA"], 1),
            ("c", &["C"], &["CCC"], 0),
        ]);
        let oc = count_obtained(&s);
        let cohorts = compute_cohorts(&s, &oc);
        let scores = publication_scores(&s, &oc, &cohorts);
        let fractions = top_fractions(&s, &oc, &cohorts);
        // EC = 4/3.
        assert!((mncs("AAA", 2010, &s, &scores).unwrap() - 0.5 * (3.0 + 1.0) * 0.75).abs() < 1e-12);
        assert!((mncs("BBB", 2010, &s, &scores).unwrap() - 3.0 * 0.75).abs() < 1e-12);
        assert_eq!(mncs("DDD", 2010, &s, &scores), None);
        assert_eq!(mncs("AAA", 2011, &s, &scores), None);
        assert_eq!(pp_top10("CCC", 2010, &s, &fractions), Some(0.0));
        // World PP(top10) over one cohort is exactly the top share.
        let world: f64 = (0..s.len() as PubId)
            .filter(|&p| s.is_cited_side(p))
            .map(|p| fractions[p as usize])
            .sum::<f64>()
            / 3.0;
        assert!((world - 0.1).abs() < 1e-12);
        let table = country_indicators(&s, &oc, &scores, &fractions);
        let codes: Vec<_> = table.rows().iter().map(|r| r.country.as_str()).collect();
        assert_eq!(codes, vec!["AAA", "BBB", "CCC"]);
        let a = table.get(s.country_id("AAA").unwrap(), 2010).unwrap();
        assert_eq!(a.pub_count, 2);
        assert_eq!(a.mean_oc, 2.0);
    }

    #[test]
    fn two_term_mean() {
        // Scores 0.5 and 1.5: EC = 2 with counts 1 and 3 (plus a 2 to fix EC).
        let s = corpus(&[
            ("a", &["C"], &["AAA"], 1),
            ("b", &["C"], &["AAA"], 3),
            ("c", &["C"], &["BBB"], 2),
        ]);
        let oc = count_obtained(&s);
        let cohorts = compute_cohorts(&s, &oc);
        let scores = publication_scores(&s, &oc, &cohorts);
        assert_eq!(mncs("AAA", 2010, &s, &scores), Some(1.0));
    }
}
