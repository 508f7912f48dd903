//! Brute-force reference implementation of the indicator pipeline.
//!
//! Works on string ids and plain maps, recomputes everything by scanning
//! the full record and edge lists, and shares no code with the library
//! beyond the input record types.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use contrafact_core::counterfactual::EffectIndicator;
use contrafact_core::{CorpusConfig, DocType, PublicationRecord, WorldPair};

/// `(pub_count, mncs, pp_top10, mean_oc, undefined)`.
pub type IndicatorRow = (u32, Option<f64>, f64, f64, u32);
/// `(delta_mncs, delta_pp, delta_oc, ratio, eligible)`.
pub type CountryDeltaRow = (Option<f64>, f64, f64, Option<f64>, u32);

pub struct Oracle {
    pub oc: BTreeMap<String, u32>,
    /// `(year, category) -> (W, EC, threshold, tie fraction)`.
    pub cohorts: BTreeMap<(i32, String), (f64, f64, u32, f64)>,
    /// Cited-side publications only; `None` when undefined.
    pub ncs: BTreeMap<String, Option<f64>>,
    pub top: BTreeMap<String, f64>,
    /// `(country, year) -> (pub_count, mncs, pp_top10, mean_oc, undefined)`.
    pub indicators: BTreeMap<(String, i32), IndicatorRow>,
    records: BTreeMap<String, PublicationRecord>,
}

fn cited_side(doc: DocType) -> bool {
    matches!(doc, DocType::Article | DocType::Review)
}

fn distinct(values: &[String]) -> BTreeSet<String> {
    values.iter().cloned().collect()
}

impl Oracle {
    pub fn compute(records: &[PublicationRecord], edges: &[(String, String)], config: &CorpusConfig) -> Self {
        let records: BTreeMap<String, PublicationRecord> = records.iter().map(|r| (r.id.clone(), r.clone())).collect();
        let edges: BTreeSet<(String, String)> = edges.iter().cloned().collect();

        let mut oc = BTreeMap::new();
        for (id, r) in &records {
            let end = (r.year + config.window_length as i32 - 1).min(config.citation_cutoff_year);
            let n = if cited_side(r.doc_type) {
                edges
                    .iter()
                    .filter(|(citing, cited)| {
                        let y = records[citing].year;
                        cited == id && y >= r.year && y <= end
                    })
                    .count() as u32
            } else {
                0
            };
            oc.insert(id.clone(), n);
        }

        let weight = |r: &PublicationRecord| 1.0 / distinct(&r.categories).len() as f64;
        let mut members: BTreeMap<(i32, String), Vec<&PublicationRecord>> = BTreeMap::new();
        for r in records.values().filter(|r| cited_side(r.doc_type)) {
            for c in distinct(&r.categories) {
                members.entry((r.year, c)).or_default().push(r);
            }
        }
        let mut cohorts = BTreeMap::new();
        for (key, list) in &members {
            let w_total: f64 = list.iter().map(|r| weight(r)).sum();
            let ec = list.iter().map(|r| weight(r) * oc[&r.id] as f64).sum::<f64>() / w_total;
            let target = config.top_share * w_total;
            let slack = 1e-12 * w_total.max(1.0);
            let max = list.iter().map(|r| oc[&r.id]).max().unwrap_or(0);
            let mass = |pred: &dyn Fn(u32) -> bool| -> f64 {
                list.iter().filter(|r| pred(oc[&r.id])).map(|r| weight(r)).sum()
            };
            let t = (0..=max)
                .find(|&c| mass(&|x| x > c) <= target + slack)
                .expect("nothing lies above the maximum");
            let above = mass(&|x| x > t);
            let at = mass(&|x| x == t);
            let r = if at > 0.0 {
                ((target - above) / at).clamp(0.0, 1.0)
            } else {
                0.0
            };
            cohorts.insert(key.clone(), (w_total, ec, t, r));
        }

        let mut ncs = BTreeMap::new();
        let mut top = BTreeMap::new();
        for r in records.values().filter(|r| cited_side(r.doc_type)) {
            let count = oc[&r.id];
            let cats = distinct(&r.categories);
            let ratios: Vec<f64> = cats
                .iter()
                .map(|c| cohorts[&(r.year, c.clone())].1)
                .filter(|&ec| ec > 0.0)
                .map(|ec| count as f64 / ec)
                .collect();
            let score = (!ratios.is_empty()).then(|| ratios.iter().sum::<f64>() / ratios.len() as f64);
            ncs.insert(r.id.clone(), score);
            let f: f64 = cats
                .iter()
                .map(|c| {
                    let (_, _, t, tie) = cohorts[&(r.year, c.clone())];
                    let share = if count > t {
                        1.0
                    } else if count == t {
                        tie
                    } else {
                        0.0
                    };
                    weight(r) * share
                })
                .sum();
            top.insert(r.id.clone(), f);
        }

        let mut indicators = BTreeMap::new();
        let country_years: BTreeSet<(String, i32)> = records
            .values()
            .filter(|r| cited_side(r.doc_type))
            .flat_map(|r| distinct(&r.countries).into_iter().map(move |c| (c, r.year)))
            .collect();
        for (country, year) in country_years {
            let pubs: Vec<&PublicationRecord> = records
                .values()
                .filter(|r| cited_side(r.doc_type) && r.year == year && r.countries.contains(&country))
                .collect();
            let n = pubs.len() as f64;
            let defined: Vec<f64> = pubs.iter().filter_map(|r| ncs[&r.id]).collect();
            let mncs = (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64);
            let pp = pubs.iter().map(|r| top[&r.id]).sum::<f64>() / n;
            let mean_oc = pubs.iter().map(|r| oc[&r.id] as f64).sum::<f64>() / n;
            let undefined = (pubs.len() - defined.len()) as u32;
            indicators.insert((country, year), (pubs.len() as u32, mncs, pp, mean_oc, undefined));
        }

        Self {
            oc,
            cohorts,
            ncs,
            top,
            indicators,
            records,
        }
    }
}

pub struct OracleDeltas {
    /// `(country, year) -> (delta_mncs, delta_pp, delta_oc, ratio, eligible)`.
    pub countries: BTreeMap<(String, i32), CountryDeltaRow>,
    pub categories: BTreeMap<(i32, String), f64>,
    /// `(year, indicator name) -> (mean, halfwidth, n)`.
    pub mean_effects: BTreeMap<(i32, &'static str), (f64, Option<f64>, usize)>,
}

impl OracleDeltas {
    pub fn compute(
        records: &[PublicationRecord],
        edges: &[(String, String)],
        config: &CorpusConfig,
        excluded: &str,
    ) -> (Oracle, Oracle, Self) {
        let kept: Vec<PublicationRecord> = records
            .iter()
            .filter(|r| !r.countries.iter().any(|c| c == excluded))
            .cloned()
            .collect();
        let ids: BTreeSet<&str> = kept.iter().map(|r| r.id.as_str()).collect();
        let kept_edges: Vec<(String, String)> = edges
            .iter()
            .filter(|(a, b)| ids.contains(a.as_str()) && ids.contains(b.as_str()))
            .cloned()
            .collect();
        let act = Oracle::compute(records, edges, config);
        let cf = Oracle::compute(&kept, &kept_edges, config);

        let mut countries = BTreeMap::new();
        for ((country, year), f) in &cf.indicators {
            if country == excluded {
                continue;
            }
            let a = &act.indicators[&(country.clone(), *year)];
            let survivors: Vec<&PublicationRecord> = cf
                .records
                .values()
                .filter(|r| cited_side(r.doc_type) && r.year == *year && r.countries.contains(country))
                .collect();
            let gains: f64 = survivors
                .iter()
                .map(|r| act.oc[&r.id] as f64 - cf.oc[&r.id] as f64)
                .sum();
            let ratios: Vec<f64> = survivors
                .iter()
                .filter(|r| act.oc[&r.id] > 0)
                .filter_map(|r| Some(cf.ncs[&r.id]? / act.ncs[&r.id]?))
                .collect();
            let ratio = (!ratios.is_empty()).then(|| ratios.iter().sum::<f64>() / ratios.len() as f64);
            let dm = match (a.1, f.1) {
                (Some(x), Some(y)) => Some(x - y),
                _ => None,
            };
            countries.insert(
                (country.clone(), *year),
                (
                    dm,
                    a.2 - f.2,
                    gains / survivors.len() as f64,
                    ratio,
                    ratios.len() as u32,
                ),
            );
        }

        let categories = act
            .cohorts
            .iter()
            .filter_map(|(key, a)| cf.cohorts.get(key).map(|f| (key.clone(), a.1 - f.1)))
            .collect();

        let mut mean_effects = BTreeMap::new();
        let years: BTreeSet<i32> = act.records.values().map(|r| r.year).collect();
        for year in years {
            for indicator in EffectIndicator::ALL {
                let values: Vec<f64> = countries
                    .iter()
                    .filter(|((_, y), _)| *y == year)
                    .filter_map(|(_, v)| match indicator {
                        EffectIndicator::Mncs => v.0,
                        EffectIndicator::PpTop10 => Some(v.1),
                        EffectIndicator::ObtainedCitations => Some(v.2),
                        EffectIndicator::RatioOfRatios => v.3,
                    })
                    .collect();
                if values.is_empty() {
                    continue;
                }
                let n = values.len() as f64;
                let mean = values.iter().sum::<f64>() / n;
                let half = (values.len() > 1).then(|| {
                    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
                    1.96 * var.sqrt() / n.sqrt()
                });
                mean_effects.insert((year, indicator.as_str()), (mean, half, values.len()));
            }
        }
        (
            act,
            cf,
            Self {
                countries,
                categories,
                mean_effects,
            },
        )
    }
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

fn close_opt(a: Option<f64>, b: Option<f64>, tol: f64) -> bool {
    match (a, b) {
        (Some(x), Some(y)) => close(x, y, tol),
        (None, None) => true,
        _ => false,
    }
}

fn check(ok: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what())
    }
}

/// Compares one world of the library against the oracle.
pub fn check_world(world: &contrafact_core::World, oracle: &Oracle, tol: f64) -> Result<(), String> {
    let s = &world.snapshot;
    check(s.len() == oracle.oc.len(), || "publication count".into())?;
    for p in 0..s.len() as u32 {
        let id = s.id(p);
        check(world.obtained.get(p) == oracle.oc[id], || {
            format!("OC of {id}: {} vs {}", world.obtained.get(p), oracle.oc[id])
        })?;
        if let Some(score) = world.scores[p as usize] {
            let lib = score.defined.then_some(score.ncs);
            check(close_opt(lib, oracle.ncs[id], tol), || {
                format!("NCS of {id}: {lib:?} vs {:?}", oracle.ncs[id])
            })?;
            check(close(world.top_fractions[p as usize], oracle.top[id], tol), || {
                format!("top fraction of {id}")
            })?;
        } else {
            check(!oracle.ncs.contains_key(id), || format!("{id} should be cited-side"))?;
        }
    }
    check(s.cohorts().len() == oracle.cohorts.len(), || "cohort count".into())?;
    for (h, key) in s.cohorts().iter().enumerate() {
        let stats = world.cohorts.get(h as u32);
        let name = s.category_name(key.category).to_owned();
        let Some(&(w, ec, t, r)) = oracle.cohorts.get(&(key.year, name.clone())) else {
            return Err(format!("unexpected cohort ({}, {name})", key.year));
        };
        check(
            close(stats.weight, w, tol)
                && close(stats.expected_count, ec, tol)
                && stats.top_threshold == t
                && close(stats.tie_fraction, r, tol),
            || format!("cohort ({}, {name}): {stats:?} vs ({w}, {ec}, {t}, {r})", key.year),
        )?;
    }
    let rows = world.indicators.rows();
    check(rows.len() == oracle.indicators.len(), || "indicator row count".into())?;
    for row in rows {
        let Some(&(n, mncs, pp, mean_oc, undefined)) = oracle.indicators.get(&(row.country.clone(), row.year)) else {
            return Err(format!("unexpected row {} {}", row.country, row.year));
        };
        check(
            row.pub_count == n
                && close_opt(row.mncs, mncs, tol)
                && close(row.pp_top10, pp, tol)
                && close(row.mean_oc, mean_oc, tol)
                && row.undefined_count == undefined,
            || format!("indicators {} {}: {row:?}", row.country, row.year),
        )?;
    }
    Ok(())
}

/// Compares a full world pair and its delta report against the oracle.
pub fn check_pair(
    pair: &WorldPair,
    records: &[PublicationRecord],
    edges: &[(String, String)],
    tol: f64,
) -> Result<(), String> {
    let config = pair.actual.snapshot.config();
    let (act, cf, deltas) = OracleDeltas::compute(records, edges, config, &pair.excluded);
    check_world(&pair.actual, &act, tol).map_err(|e| format!("actual: {e}"))?;
    check_world(&pair.counterfactual, &cf, tol).map_err(|e| format!("counterfactual: {e}"))?;
    let report = contrafact_core::delta_report(pair);
    check(report.countries.len() == deltas.countries.len(), || {
        format!(
            "country delta rows: {} vs {}",
            report.countries.len(),
            deltas.countries.len()
        )
    })?;
    for row in &report.countries {
        let Some(&(dm, dp, doc, ratio, eligible)) = deltas.countries.get(&(row.country.clone(), row.year)) else {
            return Err(format!("unexpected delta row {} {}", row.country, row.year));
        };
        check(
            close_opt(row.delta_mncs, dm, tol)
                && close(row.delta_pptop10, dp, tol)
                && close(row.delta_oc, doc, tol)
                && close_opt(row.ratio_of_ratios, ratio, tol)
                && row.eligible_count == eligible,
            || {
                format!(
                    "delta {} {}: {row:?} vs {:?}",
                    row.country,
                    row.year,
                    (dm, dp, doc, ratio, eligible)
                )
            },
        )?;
    }
    check(report.categories.len() == deltas.categories.len(), || {
        "category delta rows".into()
    })?;
    for row in &report.categories {
        let expected = deltas.categories[&(row.year, row.category.clone())];
        check(close(row.delta_ec, expected, tol), || {
            format!("delta EC {} {}", row.category, row.year)
        })?;
    }
    check(report.mean_effects.len() == deltas.mean_effects.len(), || {
        "mean effect rows".into()
    })?;
    for row in &report.mean_effects {
        let (mean, half, n) = deltas.mean_effects[&(row.year, row.indicator.as_str())];
        check(
            close(row.effect.mean, mean, tol) && close_opt(row.effect.ci_halfwidth, half, tol) && row.effect.n == n,
            || format!("mean effect {} {}", row.year, row.indicator),
        )?;
    }
    Ok(())
}

/// Records and string edges of a generated corpus.
pub fn materialize(corpus: &contrafact_core::SyntheticCorpus) -> (Vec<PublicationRecord>, Vec<(String, String)>) {
    let pubs = corpus.publications.clone();
    let edges = corpus
        .edges
        .iter()
        .map(|&(a, b)| (pubs[a as usize].id.clone(), pubs[b as usize].id.clone()))
        .collect();
    (pubs, edges)
}
