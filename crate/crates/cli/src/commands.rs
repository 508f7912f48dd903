use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use contrafact_core::corpus::{parse_publications, CorpusConfig, CorpusSnapshot, SnapshotBuilder};
use contrafact_core::counterfactual::EffectIndicator;
use contrafact_core::diagnostics::{
    additional_citations_profile, cited_age_distribution, nonstandard_citing_counts, normalized_ref_length, pearson,
    reflen_vs_ec_scatter, self_citation_shares, HISTOGRAM_BINS, QUANTILE_LEVELS,
};
use contrafact_core::synthgen::{self, ScenarioConfig, PRESETS};
use contrafact_core::{delta_report, fit_trend, predict_crossing, Crossing, World, WorldPair};
use serde::Serialize;

use crate::args::{
    ComputeArgs, CounterfactualArgs, DiagnoseArgs, Diagnostic, InputArgs, PresetsArgs, Selection, SynthArgs,
    ValidateArgs,
};
use crate::error::{CliError, Result};
use crate::output::{format_float, format_opt, round_float, sha256_hex, FileDigest, OutputDir, RunManifest};

/// A validated corpus with the digests of the files it came from.
pub struct Loaded {
    pub snapshot: CorpusSnapshot,
    pub inputs: Vec<FileDigest>,
    pub config_sha256: String,
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| CliError::io(path, e))
}

fn utf8(path: &Path, bytes: Vec<u8>) -> Result<String> {
    String::from_utf8(bytes).map_err(|_| CliError::Encoding { path: path.to_owned() })
}

pub fn load(input: &InputArgs) -> Result<Loaded> {
    let config_bytes = read(&input.config)?;
    let config = CorpusConfig::from_reader(&config_bytes[..]).map_err(|e| CliError::corpus(&input.config, e))?;
    let mut inputs = vec![FileDigest::of(&input.config, &config_bytes)];

    let pubs = read(&input.pubs)?;
    inputs.push(FileDigest::of(&input.pubs, &pubs));
    let pubs = utf8(&input.pubs, pubs)?;
    let records = parse_publications(&pubs).map_err(|e| CliError::corpus(&input.pubs, e))?;
    drop(pubs);
    let builder = SnapshotBuilder::new(records, config).map_err(|e| CliError::corpus(&input.pubs, e))?;

    let edges = read(&input.edges)?;
    inputs.push(FileDigest::of(&input.edges, &edges));
    let edges = utf8(&input.edges, edges)?;
    let pairs = builder
        .resolve_edge_text(&edges)
        .map_err(|e| CliError::corpus(&input.edges, e))?;
    drop(edges);
    let snapshot = builder.build(pairs).map_err(|e| CliError::corpus(&input.pubs, e))?;
    Ok(Loaded {
        snapshot,
        inputs,
        config_sha256: sha256_hex(config.to_json().as_bytes()),
    })
}

/// Resolved `--country` and year-range filters.
pub struct Filter {
    countries: BTreeSet<String>,
    years: std::ops::RangeInclusive<i32>,
}

impl Filter {
    /// Selects everything.
    pub fn all() -> Self {
        Self {
            countries: BTreeSet::new(),
            years: i32::MIN..=i32::MAX,
        }
    }

    pub fn new(selection: &Selection, config: &CorpusConfig) -> Result<Self> {
        let from = selection.year_from.unwrap_or(config.y_min);
        let to = selection.year_to.unwrap_or(config.y_max);
        if from > to {
            return Err(CliError::Usage(format!("--year-from {from} is after --year-to {to}")));
        }
        Ok(Self {
            countries: selection.country.iter().cloned().collect(),
            years: from..=to,
        })
    }

    fn country(&self, code: &str) -> bool {
        self.countries.is_empty() || self.countries.contains(code)
    }

    fn year(&self, year: i32) -> bool {
        self.years.contains(&year)
    }

    /// Selected countries present in the snapshot, or all of them.
    fn country_list(&self, snapshot: &CorpusSnapshot) -> Vec<String> {
        if self.countries.is_empty() {
            snapshot.country_names().to_vec()
        } else {
            self.countries.iter().cloned().collect()
        }
    }

    fn year_list(&self, snapshot: &CorpusSnapshot) -> Vec<i32> {
        snapshot.years().filter(|&y| self.year(y)).collect()
    }
}

pub fn validate(args: &ValidateArgs) -> Result<String> {
    let loaded = load(&args.input)?;
    let s = &loaded.snapshot;
    let config = s.config();
    let summary = format!(
        "ok: {} publications, {} edges, {} cohorts, years {}-{}",
        s.len(),
        s.edge_count(),
        s.cohorts().len(),
        config.y_min,
        config.y_max
    );
    if let Some(dir) = &args.out {
        let mut out = OutputDir::create(dir)?;
        RunManifest::new("validate", loaded.inputs, Some(loaded.config_sha256)).finish(&mut out)?;
    }
    Ok(summary)
}

/// Writes `cohorts.csv` and `indicators.csv` for one world.
pub fn write_compute(out: &mut OutputDir, world: &World, filter: &Filter) -> Result<()> {
    let s = &world.snapshot;
    out.csv(
        "cohorts.csv",
        &[
            "year",
            "category",
            "members",
            "weight",
            "expected_count",
            "top_threshold",
            "tie_fraction",
        ],
        s.cohorts()
            .iter()
            .enumerate()
            .filter(|(_, k)| filter.year(k.year))
            .map(|(h, k)| {
                let c = world.cohorts.get(h as u32);
                vec![
                    k.year.to_string(),
                    s.category_name(k.category).to_owned(),
                    c.members.to_string(),
                    format_float(c.weight),
                    format_float(c.expected_count),
                    c.top_threshold.to_string(),
                    format_float(c.tie_fraction),
                ]
            }),
    )?;
    out.csv(
        "indicators.csv",
        &[
            "country",
            "year",
            "pub_count",
            "mncs",
            "pp_top10",
            "mean_oc",
            "undefined_count",
        ],
        world
            .indicators
            .rows()
            .iter()
            .filter(|r| filter.country(&r.country) && filter.year(r.year))
            .map(|r| {
                vec![
                    r.country.clone(),
                    r.year.to_string(),
                    r.pub_count.to_string(),
                    format_opt(r.mncs),
                    format_float(r.pp_top10),
                    format_float(r.mean_oc),
                    r.undefined_count.to_string(),
                ]
            }),
    )
}

pub fn compute(args: &ComputeArgs) -> Result<String> {
    let loaded = load(&args.input)?;
    let filter = Filter::new(&args.selection, loaded.snapshot.config())?;
    let world = World::compute(loaded.snapshot);
    let mut out = OutputDir::create(&args.out)?;
    write_compute(&mut out, &world, &filter)?;
    RunManifest::new("compute", loaded.inputs, Some(loaded.config_sha256)).finish(&mut out)?;
    Ok(format!("wrote {}", args.out.display()))
}

/// Contents of `trend.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendReport {
    pub indicator: &'static str,
    pub level: f64,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub r2: Option<f64>,
    pub n: usize,
    pub predicted_crossing_year: Option<f64>,
    /// `insufficient_data`, `flat`, `already_crossed` or `diverging` when no
    /// crossing is predicted.
    pub reason: Option<&'static str>,
}

pub fn trend_report(series: &std::collections::BTreeMap<i32, f64>, level: f64) -> TrendReport {
    let mut report = TrendReport {
        indicator: EffectIndicator::RatioOfRatios.as_str(),
        level,
        slope: None,
        intercept: None,
        r2: None,
        n: series.len(),
        predicted_crossing_year: None,
        reason: Some("insufficient_data"),
    };
    if let Ok(fit) = fit_trend(series) {
        report.slope = Some(round_float(fit.slope));
        report.intercept = Some(round_float(fit.intercept));
        report.r2 = Some(round_float(fit.r2));
        match predict_crossing(&fit, level) {
            Crossing::Year(y) => {
                report.predicted_crossing_year = Some(round_float(y));
                report.reason = None;
            }
            Crossing::None(why) => report.reason = Some(why.as_str()),
        }
    }
    report
}

pub fn counterfactual(args: &CounterfactualArgs) -> Result<String> {
    let loaded = load(&args.input)?;
    let filter = Filter::new(&args.selection, loaded.snapshot.config())?;
    let pair = WorldPair::build(loaded.snapshot, &args.exclude);
    let report = delta_report(&pair);
    let mut out = OutputDir::create(&args.out)?;
    out.csv(
        "deltas_country.csv",
        &[
            "country",
            "year",
            "delta_mncs",
            "delta_pptop10",
            "delta_oc",
            "ratio_of_ratios",
            "eligible_count",
            "skipped_count",
        ],
        report
            .countries
            .iter()
            .filter(|r| filter.country(&r.country) && filter.year(r.year))
            .map(|r| {
                vec![
                    r.country.clone(),
                    r.year.to_string(),
                    format_opt(r.delta_mncs),
                    format_float(r.delta_pptop10),
                    format_float(r.delta_oc),
                    format_opt(r.ratio_of_ratios),
                    r.eligible_count.to_string(),
                    r.skipped_count.to_string(),
                ]
            }),
    )?;
    out.csv(
        "deltas_category.csv",
        &["category", "year", "delta_ec"],
        report
            .categories
            .iter()
            .filter(|r| filter.year(r.year))
            .map(|r| vec![r.category.clone(), r.year.to_string(), format_float(r.delta_ec)]),
    )?;
    out.csv(
        "mean_effect.csv",
        &["year", "indicator", "mean", "ci_halfwidth", "n"],
        report.mean_effects.iter().filter(|r| filter.year(r.year)).map(|r| {
            vec![
                r.year.to_string(),
                r.indicator.as_str().to_owned(),
                format_float(r.effect.mean),
                format_opt(r.effect.ci_halfwidth),
                r.effect.n.to_string(),
            ]
        }),
    )?;
    let series = report
        .mean_series(EffectIndicator::RatioOfRatios)
        .into_iter()
        .filter(|(y, _)| filter.year(*y))
        .collect();
    out.json("trend.json", &trend_report(&series, 1.0))?;
    RunManifest::new("counterfactual", loaded.inputs, Some(loaded.config_sha256)).finish(&mut out)?;
    Ok(format!("wrote {}", args.out.display()))
}

const ALL_DIAGNOSTICS: [Diagnostic; 6] = [
    Diagnostic::SelfCitation,
    Diagnostic::RefLength,
    Diagnostic::CitedAge,
    Diagnostic::Nonstandard,
    Diagnostic::AdditionalCitations,
    Diagnostic::ReflenEc,
];

pub fn diagnose(args: &DiagnoseArgs) -> Result<String> {
    let which: BTreeSet<Diagnostic> = if args.which.is_empty() {
        ALL_DIAGNOSTICS
            .iter()
            .copied()
            .filter(|d| *d != Diagnostic::AdditionalCitations || args.exclude.is_some())
            .collect()
    } else {
        args.which.iter().copied().collect()
    };
    if which.contains(&Diagnostic::AdditionalCitations) && args.exclude.is_none() {
        return Err(CliError::Usage("additional_citations needs --exclude".into()));
    }
    let loaded = load(&args.input)?;
    let filter = Filter::new(&args.selection, loaded.snapshot.config())?;
    let s = &loaded.snapshot;
    let countries = filter.country_list(s);
    let years = filter.year_list(s);
    let mut out = OutputDir::create(&args.out)?;

    let grid = || {
        countries
            .iter()
            .flat_map(|c| years.iter().map(move |&y| (c.as_str(), y)))
    };

    if which.contains(&Diagnostic::SelfCitation) {
        let dists: Vec<_> = grid().map(|(c, y)| self_citation_shares(s, c, y)).collect();
        let mut header = vec!["country".to_owned(), "year".to_owned(), "publications".to_owned()];
        header.extend(QUANTILE_LEVELS.iter().map(|q| format!("q{q:02}")));
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        out.csv(
            "self_citation.csv",
            &header,
            dists.iter().map(|d| {
                let mut row = vec![d.country.clone(), d.year.to_string(), d.shares.len().to_string()];
                row.extend((0..QUANTILE_LEVELS.len()).map(|i| format_opt(d.quantiles.get(i).copied())));
                row
            }),
        )?;
        out.csv(
            "self_citation_hist.csv",
            &["country", "year", "bin_low", "bin_high", "count"],
            dists.iter().flat_map(|d| {
                d.histogram.iter().enumerate().map(|(b, n)| {
                    vec![
                        d.country.clone(),
                        d.year.to_string(),
                        format_float(b as f64 / HISTOGRAM_BINS as f64),
                        format_float((b + 1) as f64 / HISTOGRAM_BINS as f64),
                        n.to_string(),
                    ]
                })
            }),
        )?;
    }

    if which.contains(&Diagnostic::RefLength) {
        out.csv(
            "ref_length.csv",
            &["country", "year", "measure", "normalized_ref_length", "used", "skipped"],
            grid().flat_map(|(c, y)| {
                [(false, "refs_total"), (true, "windowed")].map(|(windowed, measure)| {
                    let r = normalized_ref_length(s, c, y, windowed);
                    vec![
                        c.to_owned(),
                        y.to_string(),
                        measure.to_owned(),
                        format_opt(r.value),
                        r.used.to_string(),
                        r.skipped.to_string(),
                    ]
                })
            }),
        )?;
    }

    if which.contains(&Diagnostic::CitedAge) {
        out.csv(
            "cited_age.csv",
            &["country", "citing_year", "group", "cited_year", "share"],
            grid().flat_map(|(c, y)| {
                [(false, "country"), (true, "rest")]
                    .into_iter()
                    .flat_map(move |(complement, group)| {
                        cited_age_distribution(s, c, y, complement)
                            .into_iter()
                            .map(move |(cited, share)| {
                                vec![
                                    c.to_owned(),
                                    y.to_string(),
                                    group.to_owned(),
                                    cited.to_string(),
                                    format_float(share),
                                ]
                            })
                    })
            }),
        )?;
    }

    if which.contains(&Diagnostic::Nonstandard) {
        out.csv(
            "nonstandard.csv",
            &["country", "year", "citations"],
            grid().map(|(c, y)| {
                vec![
                    c.to_owned(),
                    y.to_string(),
                    nonstandard_citing_counts(s, c, y).to_string(),
                ]
            }),
        )?;
    }

    let need_world = which.contains(&Diagnostic::ReflenEc) || which.contains(&Diagnostic::AdditionalCitations);
    if need_world {
        let snapshot = loaded.snapshot.clone();
        if which.contains(&Diagnostic::ReflenEc) {
            let world = World::compute(snapshot.clone());
            let scatters: Vec<_> = years
                .iter()
                .map(|&y| (y, reflen_vs_ec_scatter(&world.snapshot, &world.cohorts, y)))
                .collect();
            out.csv(
                "reflen_ec.csv",
                &["year", "category", "mean_ref_length", "expected_count"],
                scatters.iter().flat_map(|(y, points)| {
                    points.iter().map(move |p| {
                        vec![
                            y.to_string(),
                            p.category.clone(),
                            format_float(p.mean_ref_length),
                            format_float(p.expected_count),
                        ]
                    })
                }),
            )?;
            out.csv(
                "reflen_ec_correlation.csv",
                &["year", "points", "pearson"],
                scatters
                    .iter()
                    .map(|(y, points)| vec![y.to_string(), points.len().to_string(), format_opt(pearson(points))]),
            )?;
        }
        if let (true, Some(excluded)) = (which.contains(&Diagnostic::AdditionalCitations), &args.exclude) {
            let pair = WorldPair::build(snapshot, excluded);
            let recipients: Vec<&String> = countries.iter().filter(|c| *c != excluded).collect();
            out.csv(
                "additional_citations.csv",
                &[
                    "excluded",
                    "country",
                    "year",
                    "publications",
                    "cited_count",
                    "cited_share",
                    "avg_additional_normalized",
                    "skipped",
                    "counterfactual_mncs",
                ],
                recipients.iter().flat_map(|c| {
                    years.iter().map(|&y| {
                        let p = additional_citations_profile(&pair, c, y);
                        vec![
                            excluded.clone(),
                            p.country,
                            y.to_string(),
                            p.publications.to_string(),
                            p.cited_count.to_string(),
                            format_float(p.cited_share),
                            format_opt(p.avg_additional_normalized),
                            p.skipped.to_string(),
                            format_opt(p.counterfactual_mncs),
                        ]
                    })
                }),
            )?;
        }
    }

    RunManifest::new("diagnose", loaded.inputs, Some(loaded.config_sha256)).finish(&mut out)?;
    Ok(format!("wrote {}", args.out.display()))
}

pub fn synth(args: &SynthArgs) -> Result<String> {
    let (mut scenario, inputs) = match (&args.preset, &args.scenario) {
        (Some(name), _) => (synthgen::preset(name)?, Vec::new()),
        (None, Some(path)) => {
            let bytes = read(path)?;
            let scenario: ScenarioConfig = serde_json::from_slice(&bytes)
                .map_err(|e| CliError::Synth(synthgen::SynthError::InvalidConfig(e.to_string())))?;
            (scenario, vec![FileDigest::of(path, &bytes)])
        }
        (None, None) => return Err(CliError::Usage("one of --preset or --config is required".into())),
    };
    if let Some(seed) = args.seed {
        scenario.seed = seed;
    }
    let corpus = synthgen::generate(&scenario)?;
    let mut out = OutputDir::create(&args.out)?;
    out.stream("publications.jsonl", |w| corpus.write_publications(w))?;
    out.stream("edges.tsv", |w| corpus.write_edges(w))?;
    let config_json = corpus.config.to_json();
    out.stream("config.json", |w| writeln!(w, "{config_json}"))?;
    out.json("scenario.json", &scenario)?;
    let summary = format!(
        "wrote {} publications and {} edges to {}",
        corpus.publications.len(),
        corpus.edges.len(),
        args.out.display()
    );
    RunManifest::new("synth", inputs, Some(sha256_hex(config_json.as_bytes()))).finish(&mut out)?;
    Ok(summary)
}

pub fn presets(args: &PresetsArgs) -> Result<String> {
    match &args.name {
        Some(name) => {
            let scenario = synthgen::preset(name)?;
            Ok(serde_json::to_string_pretty(&scenario).expect("serializable"))
        }
        None => Ok(PRESETS.join("\n")),
    }
}
