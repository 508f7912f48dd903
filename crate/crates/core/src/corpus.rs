//! Corpus data model.
//!
//! Publications arrive as JSONL records and citation links as a two-column
//! TSV. Both are validated and frozen into a [`CorpusSnapshot`]: an immutable,
//! id-sorted, densely indexed view that every downstream computation reads.
//!
//! Role filters are applied here. Only articles and reviews are *cited side*
//! (they receive countable citations and belong to normalization cohorts);
//! every document type may cite. An edge whose cited endpoint is not on the
//! cited side is kept in the edge store but never counted.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::io::{self, Read, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::csr::Csr;

/// Dense publication index inside one snapshot (position in id order).
pub type PubId = u32;
/// Interned subject-category index.
pub type CategoryId = u32;
/// Interned country-code index.
pub type CountryId = u32;
/// Index into [`CorpusSnapshot::cohorts`].
pub type CohortId = u32;

const NO_COHORT: u32 = u32::MAX;
/// Byte size of the slices handed to parallel line parsers.
const PARSE_CHUNK_BYTES: usize = 1 << 20;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: malformed JSON: {message}")]
    MalformedJson { line: usize, message: String },
    #[error("line {line}: missing required field `{field}`")]
    MissingField { line: usize, field: &'static str },
    #[error("line {line}: invalid `{field}`: {message}")]
    InvalidField {
        line: usize,
        field: &'static str,
        message: String,
    },
    #[error("line {line}: negative reference count {value}")]
    NegativeRefCount { line: usize, value: i64 },
    #[error("line {line}: empty category set")]
    EmptyCategories { line: usize },
    #[error("duplicate publication id `{id}` at lines {first} and {second}")]
    DuplicateId { id: String, first: usize, second: usize },
    #[error("line {line}: expected 2 tab-separated columns, found {found}")]
    ColumnCount { line: usize, found: usize },
    #[error("line {line}: empty publication id")]
    EmptyId { line: usize },
    #[error(
        "{count} edge(s) reference unknown publication ids (first at line {first_line}: {first_edge}): {}",
        .unknown_ids.join(", ")
    )]
    DanglingEndpoints {
        unknown_ids: Vec<String>,
        count: usize,
        first_line: usize,
        first_edge: String,
    },
    #[error("line {line}: document self-citation `{id}`")]
    SelfCitation { line: usize, id: String },
    #[error("publication `{id}`: year {year} outside configured range [{y_min}, {y_max}]")]
    YearOutOfRange {
        id: String,
        year: i32,
        y_min: i32,
        y_max: i32,
    },
    #[error("publication `{id}`: {resolved} resolved references exceed refs_total {refs_total}")]
    ResolvedExceedsTotal {
        id: String,
        resolved: usize,
        refs_total: u32,
    },
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl CorpusError {
    pub fn is_io(&self) -> bool {
        matches!(self, CorpusError::Io(_))
    }
}

pub type Result<T, E = CorpusError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DocType {
    Article,
    Review,
    ProceedingsPaper,
    Other,
}

impl DocType {
    pub const ALL: [DocType; 4] = [
        DocType::Article,
        DocType::Review,
        DocType::ProceedingsPaper,
        DocType::Other,
    ];

    /// Articles and reviews are the only citable document types.
    #[inline]
    pub fn is_cited_side(self) -> bool {
        matches!(self, DocType::Article | DocType::Review)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DocType::Article => "article",
            DocType::Review => "review",
            DocType::ProceedingsPaper => "proceedings_paper",
            DocType::Other => "other",
        }
    }
}

impl fmt::Display for DocType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DocType {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        DocType::ALL
            .into_iter()
            .find(|d| d.as_str() == s)
            .ok_or_else(|| format!("unknown document type `{s}`"))
    }
}

/// One indexed document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PublicationRecord {
    pub id: String,
    pub year: i32,
    pub doc_type: DocType,
    pub categories: Vec<String>,
    /// ISO-3166 alpha-3 codes of every affiliation country listed.
    pub countries: Vec<String>,
    /// All references, including those to items outside the corpus.
    pub refs_total: u32,
}

impl PublicationRecord {
    /// Category and country lists are sets: sorted, without duplicates.
    pub fn normalized(mut self) -> Self {
        self.categories.sort_unstable();
        self.categories.dedup();
        self.countries.sort_unstable();
        self.countries.dedup();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CitationEdge {
    pub citing_id: String,
    pub cited_id: String,
}

impl CitationEdge {
    pub fn new(citing: impl Into<String>, cited: impl Into<String>) -> Self {
        Self {
            citing_id: citing.into(),
            cited_id: cited.into(),
        }
    }
}

fn default_window_length() -> u32 {
    3
}

fn default_top_share() -> f64 {
    0.10
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorpusConfig {
    /// Citation window in years; the publication year counts as year one.
    #[serde(default = "default_window_length")]
    pub window_length: u32,
    #[serde(default = "default_top_share")]
    pub top_share: f64,
    pub y_min: i32,
    pub y_max: i32,
    /// Last year from which citations are counted.
    pub citation_cutoff_year: i32,
}

impl CorpusConfig {
    /// Three-year window, top 10%, citations counted up to `y_max`.
    pub fn new(y_min: i32, y_max: i32) -> Self {
        Self {
            window_length: default_window_length(),
            top_share: default_top_share(),
            y_min,
            y_max,
            citation_cutoff_year: y_max,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.window_length < 1 {
            return Err(CorpusError::InvalidConfig("window_length must be at least 1".into()));
        }
        if !(self.top_share > 0.0 && self.top_share < 1.0) {
            return Err(CorpusError::InvalidConfig(format!(
                "top_share must lie in (0, 1), got {}",
                self.top_share
            )));
        }
        if self.y_min > self.y_max || self.y_max > self.citation_cutoff_year {
            return Err(CorpusError::InvalidConfig(format!(
                "need y_min <= y_max <= citation_cutoff_year, got {} / {} / {}",
                self.y_min, self.y_max, self.citation_cutoff_year
            )));
        }
        Ok(())
    }

    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let config: CorpusConfig =
            serde_json::from_reader(reader).map_err(|e| CorpusError::InvalidConfig(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// Last citing year that still counts toward a publication from `year`.
    #[inline]
    pub fn window_end(&self, year: i32) -> i32 {
        (year + self.window_length as i32 - 1).min(self.citation_cutoff_year)
    }
}

#[derive(Deserialize)]
struct RawRecord {
    id: Option<String>,
    year: Option<i64>,
    doc_type: Option<String>,
    categories: Option<Vec<String>>,
    countries: Option<Vec<String>>,
    refs_total: Option<i64>,
}

fn is_country_code(code: &str) -> bool {
    code.len() == 3 && code.bytes().all(|b| b.is_ascii_uppercase())
}

fn parse_record(line: usize, text: &str) -> Result<PublicationRecord> {
    let raw: RawRecord = serde_json::from_str(text).map_err(|e| CorpusError::MalformedJson {
        line,
        message: e.to_string(),
    })?;
    let missing = |field| CorpusError::MissingField { line, field };
    let invalid = |field, message: String| CorpusError::InvalidField { line, field, message };

    let id = raw.id.ok_or_else(|| missing("id"))?;
    if id.is_empty() {
        return Err(CorpusError::EmptyId { line });
    }
    let year = raw.year.ok_or_else(|| missing("year"))?;
    let year = i32::try_from(year).map_err(|_| invalid("year", format!("{year} out of range")))?;
    let doc_type = raw
        .doc_type
        .ok_or_else(|| missing("doc_type"))?
        .parse::<DocType>()
        .map_err(|e| invalid("doc_type", e))?;
    let categories = raw.categories.ok_or_else(|| missing("categories"))?;
    if categories.is_empty() {
        return Err(CorpusError::EmptyCategories { line });
    }
    if categories.iter().any(String::is_empty) {
        return Err(invalid("categories", "empty category identifier".into()));
    }
    let countries = raw.countries.ok_or_else(|| missing("countries"))?;
    if let Some(bad) = countries.iter().find(|c| !is_country_code(c)) {
        return Err(invalid("countries", format!("`{bad}` is not an alpha-3 country code")));
    }
    let refs_total = raw.refs_total.ok_or_else(|| missing("refs_total"))?;
    if refs_total < 0 {
        return Err(CorpusError::NegativeRefCount {
            line,
            value: refs_total,
        });
    }
    let refs_total =
        u32::try_from(refs_total).map_err(|_| invalid("refs_total", format!("{refs_total} out of range")))?;

    Ok(PublicationRecord {
        id,
        year,
        doc_type,
        categories,
        countries,
        refs_total,
    }
    .normalized())
}

/// Split `text` at line boundaries into roughly equal slices, each paired
/// with the 1-based number of its first line.
fn line_chunks(text: &str) -> Vec<(usize, &str)> {
    let bytes = text.as_bytes();
    let mut chunks = Vec::new();
    let mut start = 0usize;
    let mut line = 1usize;
    while start < bytes.len() {
        let mut end = (start + PARSE_CHUNK_BYTES).min(bytes.len());
        while end < bytes.len() && bytes[end - 1] != b'\n' {
            end += 1;
        }
        let chunk = &text[start..end];
        chunks.push((line, chunk));
        line += chunk.bytes().filter(|&b| b == b'\n').count();
        start = end;
    }
    chunks
}

/// Numbered non-blank lines of a chunk, with any trailing `\r` removed.
fn numbered_lines(first_line: usize, chunk: &str) -> impl Iterator<Item = (usize, &str)> {
    chunk
        .split_terminator('\n')
        .enumerate()
        .map(move |(i, l)| (first_line + i, l.strip_suffix('\r').unwrap_or(l)))
        .filter(|(_, l)| !l.trim().is_empty())
}

fn check_unique_ids<'a>(ids: impl Iterator<Item = (usize, &'a str)>) -> Result<()> {
    let mut seen: HashMap<&str, usize> = HashMap::new();
    for (line, id) in ids {
        if let Some(&first) = seen.get(id) {
            return Err(CorpusError::DuplicateId {
                id: id.to_owned(),
                first,
                second: line,
            });
        }
        seen.insert(id, line);
    }
    Ok(())
}

/// Parse a publications JSONL stream. Blank lines are skipped; the first
/// error (in line order) is returned.
pub fn load_publications<R: Read>(mut reader: R) -> Result<Vec<PublicationRecord>> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    parse_publications(&text)
}

pub fn parse_publications(text: &str) -> Result<Vec<PublicationRecord>> {
    let parsed: Vec<Result<Vec<(usize, PublicationRecord)>>> = line_chunks(text)
        .into_par_iter()
        .map(|(first, chunk)| {
            numbered_lines(first, chunk)
                .map(|(n, l)| parse_record(n, l).map(|r| (n, r)))
                .collect()
        })
        .collect();
    let mut numbered = Vec::new();
    for chunk in parsed {
        numbered.extend(chunk?);
    }
    check_unique_ids(numbered.iter().map(|(n, r)| (*n, r.id.as_str())))?;
    Ok(numbered.into_iter().map(|(_, r)| r).collect())
}

fn split_edge(line: usize, text: &str) -> Result<(&str, &str)> {
    let mut cols = text.split('\t');
    let (Some(citing), Some(cited), None) = (cols.next(), cols.next(), cols.next()) else {
        return Err(CorpusError::ColumnCount {
            line,
            found: text.split('\t').count(),
        });
    };
    if citing.is_empty() || cited.is_empty() {
        return Err(CorpusError::EmptyId { line });
    }
    Ok((citing, cited))
}

/// Parse a citation TSV stream (`citing_id<TAB>cited_id`, no header).
/// Duplicates are kept here and collapsed when the snapshot is built.
pub fn load_edges<R: Read>(mut reader: R) -> Result<Vec<CitationEdge>> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    parse_edges(&text)
}

pub fn parse_edges(text: &str) -> Result<Vec<CitationEdge>> {
    let parsed: Vec<Result<Vec<CitationEdge>>> = line_chunks(text)
        .into_par_iter()
        .map(|(first, chunk)| {
            numbered_lines(first, chunk)
                .map(|(n, l)| split_edge(n, l).map(|(a, b)| CitationEdge::new(a, b)))
                .collect()
        })
        .collect();
    let mut edges = Vec::new();
    for chunk in parsed {
        edges.extend(chunk?);
    }
    Ok(edges)
}

pub fn write_publications<'a, W, I>(mut out: W, records: I) -> io::Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a PublicationRecord>,
{
    for record in records {
        serde_json::to_writer(&mut out, record)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn write_edges<'a, W, I>(mut out: W, edges: I) -> io::Result<()>
where
    W: Write,
    I: IntoIterator<Item = (&'a str, &'a str)>,
{
    for (citing, cited) in edges {
        out.write_all(citing.as_bytes())?;
        out.write_all(b"\t")?;
        out.write_all(cited.as_bytes())?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Validated publications waiting for their edges. Edge ids are resolved
/// against it, then [`SnapshotBuilder::build`] freezes the snapshot.
pub struct SnapshotBuilder {
    config: CorpusConfig,
    records: Vec<PublicationRecord>,
    index: HashMap<Box<str>, PubId>,
}

#[derive(Default)]
struct EdgeChunk {
    pairs: Vec<(PubId, PubId)>,
    parse_error: Option<CorpusError>,
    dangling: Vec<(usize, String, String)>,
    self_citation: Option<(usize, String)>,
}

impl SnapshotBuilder {
    /// `records` positions (1-based) stand in for line numbers in errors.
    pub fn new(records: Vec<PublicationRecord>, config: CorpusConfig) -> Result<Self> {
        config.validate()?;
        check_unique_ids(records.iter().enumerate().map(|(i, r)| (i + 1, r.id.as_str())))?;
        if let Some(r) = records.iter().find(|r| r.year < config.y_min || r.year > config.y_max) {
            return Err(CorpusError::YearOutOfRange {
                id: r.id.clone(),
                year: r.year,
                y_min: config.y_min,
                y_max: config.y_max,
            });
        }
        let mut records: Vec<PublicationRecord> = records.into_iter().map(PublicationRecord::normalized).collect();
        records.par_sort_unstable_by(|a, b| a.id.cmp(&b.id));
        let index = records
            .iter()
            .enumerate()
            .map(|(i, r)| (r.id.clone().into_boxed_str(), i as PubId))
            .collect();
        Ok(Self { config, records, index })
    }

    pub fn lookup(&self, id: &str) -> Option<PubId> {
        self.index.get(id).copied()
    }

    fn resolve_chunk<'a>(&self, lines: impl Iterator<Item = (usize, &'a str)>) -> EdgeChunk {
        let mut out = EdgeChunk::default();
        for (line, text) in lines {
            let (citing, cited) = match split_edge(line, text) {
                Ok(pair) => pair,
                Err(e) => {
                    out.parse_error = Some(e);
                    return out;
                }
            };
            self.resolve_one(line, citing, cited, &mut out);
        }
        out
    }

    fn resolve_one(&self, line: usize, citing: &str, cited: &str, out: &mut EdgeChunk) {
        match (self.lookup(citing), self.lookup(cited)) {
            (Some(a), Some(b)) => {
                if a == b {
                    out.self_citation.get_or_insert_with(|| (line, citing.to_owned()));
                } else {
                    out.pairs.push((a, b));
                }
            }
            (a, b) => {
                let mut unknown = |id: &str| out.dangling.push((line, id.to_owned(), format!("{citing}\t{cited}")));
                if a.is_none() {
                    unknown(citing);
                }
                if b.is_none() {
                    unknown(cited);
                }
            }
        }
    }

    fn merge_chunks(chunks: Vec<EdgeChunk>) -> Result<Vec<(PubId, PubId)>> {
        if let Some(err) = chunks.iter().position(|c| c.parse_error.is_some()) {
            let mut chunks = chunks;
            return Err(chunks.swap_remove(err).parse_error.unwrap());
        }
        let dangling: Vec<&(usize, String, String)> = chunks.iter().flat_map(|c| c.dangling.iter()).collect();
        if let Some(first) = dangling.first() {
            let unknown: BTreeSet<&str> = dangling.iter().map(|d| d.1.as_str()).collect();
            let lines: BTreeSet<usize> = dangling.iter().map(|d| d.0).collect();
            return Err(CorpusError::DanglingEndpoints {
                unknown_ids: unknown.into_iter().map(str::to_owned).collect(),
                count: lines.len(),
                first_line: first.0,
                first_edge: first.2.replace('\t', " -> "),
            });
        }
        if let Some((line, id)) = chunks.iter().find_map(|c| c.self_citation.clone()) {
            return Err(CorpusError::SelfCitation { line, id });
        }
        let mut pairs = Vec::with_capacity(chunks.iter().map(|c| c.pairs.len()).sum());
        for c in chunks {
            pairs.extend(c.pairs);
        }
        Ok(pairs)
    }

    /// Resolve already-parsed edges; positions (1-based) act as line numbers.
    pub fn resolve_edges(&self, edges: &[CitationEdge]) -> Result<Vec<(PubId, PubId)>> {
        let mut chunk = EdgeChunk::default();
        for (i, e) in edges.iter().enumerate() {
            if e.citing_id.is_empty() || e.cited_id.is_empty() {
                return Err(CorpusError::EmptyId { line: i + 1 });
            }
            self.resolve_one(i + 1, &e.citing_id, &e.cited_id, &mut chunk);
        }
        Self::merge_chunks(vec![chunk])
    }

    /// Parse and resolve an edge TSV in one pass without materializing
    /// string pairs.
    pub fn resolve_edge_text(&self, text: &str) -> Result<Vec<(PubId, PubId)>> {
        let chunks: Vec<EdgeChunk> = line_chunks(text)
            .into_par_iter()
            .map(|(first, chunk)| self.resolve_chunk(numbered_lines(first, chunk)))
            .collect();
        Self::merge_chunks(chunks)
    }

    pub fn resolve_edge_reader<R: Read>(&self, mut reader: R) -> Result<Vec<(PubId, PubId)>> {
        let mut text = String::new();
        reader.read_to_string(&mut text)?;
        self.resolve_edge_text(&text)
    }

    /// Collapse duplicate edges, build every index and check the
    /// reference-count invariant.
    pub fn build(self, mut pairs: Vec<(PubId, PubId)>) -> Result<CorpusSnapshot> {
        let SnapshotBuilder { config, records, .. } = self;
        pairs.par_sort_unstable();
        pairs.dedup();
        let n = records.len();
        let references = Csr::from_pairs(n, &pairs);
        if let Some(p) = (0..n as PubId).find(|&p| references.degree(p) > records[p as usize].refs_total as usize) {
            let r = &records[p as usize];
            return Err(CorpusError::ResolvedExceedsTotal {
                id: r.id.clone(),
                resolved: references.degree(p),
                refs_total: r.refs_total,
            });
        }
        let swapped: Vec<(PubId, PubId)> = pairs.iter().map(|&(a, b)| (b, a)).collect();
        drop(pairs);
        let citations = Csr::from_pairs(n, &swapped);
        drop(swapped);

        let category_names: Vec<String> = records
            .iter()
            .flat_map(|r| r.categories.iter())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .cloned()
            .collect();
        let country_names: Vec<String> = records
            .iter()
            .flat_map(|r| r.countries.iter())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .cloned()
            .collect();
        let category_index: HashMap<&str, CategoryId> = category_names
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i as CategoryId))
            .collect();
        let country_index: HashMap<&str, CountryId> = country_names
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i as CountryId))
            .collect();
        let pub_categories = Csr::from_rows(
            records
                .iter()
                .map(|r| r.categories.iter().map(|c| category_index[c.as_str()])),
        );
        let pub_countries = Csr::from_rows(
            records
                .iter()
                .map(|r| r.countries.iter().map(|c| country_index[c.as_str()])),
        );

        let mut ids = Vec::with_capacity(n);
        let mut years = Vec::with_capacity(n);
        let mut doc_types = Vec::with_capacity(n);
        let mut refs_total = Vec::with_capacity(n);
        for r in records {
            ids.push(r.id);
            years.push(r.year);
            doc_types.push(r.doc_type);
            refs_total.push(r.refs_total);
        }

        Ok(CorpusSnapshot::assemble(
            config,
            Columns {
                ids,
                years,
                doc_types,
                refs_total,
                pub_categories,
                pub_countries,
            },
            category_names,
            country_names,
            references,
            citations,
        ))
    }
}

/// Validate records and edges together and freeze them into a snapshot.
pub fn build_snapshot(
    publications: Vec<PublicationRecord>,
    edges: &[CitationEdge],
    config: CorpusConfig,
) -> Result<CorpusSnapshot> {
    let builder = SnapshotBuilder::new(publications, config)?;
    let pairs = builder.resolve_edges(edges)?;
    builder.build(pairs)
}

/// Per-publication columns, all indexed by [`PubId`].
#[derive(Debug, Clone)]
struct Columns {
    ids: Vec<String>,
    years: Vec<i32>,
    doc_types: Vec<DocType>,
    refs_total: Vec<u32>,
    pub_categories: Csr,
    pub_countries: Csr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CohortKey {
    pub year: i32,
    pub category: CategoryId,
}

/// Immutable validated corpus with all derived indexes.
#[derive(Debug, Clone)]
pub struct CorpusSnapshot {
    config: CorpusConfig,
    cols: Columns,
    category_names: Vec<String>,
    country_names: Vec<String>,
    /// citing -> cited, ascending.
    references: Csr,
    /// cited -> citing, ascending.
    citations: Csr,
    cohorts: Vec<CohortKey>,
    /// Cited-side members of each cohort, ascending.
    cohort_members: Csr,
    /// `(year - y_min) * categories + category` -> cohort or `NO_COHORT`.
    cohort_lookup: Vec<u32>,
    /// Every publication listing each country, ascending.
    country_pubs: Csr,
}

struct HashWriter<'a>(&'a mut Sha256);

impl Write for HashWriter<'_> {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        self.0.update(buf);
        Ok(buf.len())
    }

    fn flush(&mut self) -> io::Result<()> {
        Ok(())
    }
}

impl CorpusSnapshot {
    fn assemble(
        config: CorpusConfig,
        cols: Columns,
        category_names: Vec<String>,
        country_names: Vec<String>,
        references: Csr,
        citations: Csr,
    ) -> Self {
        let n = cols.ids.len();
        let n_cat = category_names.len();
        let span = (config.y_max - config.y_min + 1) as usize;

        let mut codes: Vec<(u32, PubId)> = Vec::new();
        for p in 0..n as PubId {
            if !cols.doc_types[p as usize].is_cited_side() {
                continue;
            }
            let base = (cols.years[p as usize] - config.y_min) as usize * n_cat;
            for &c in cols.pub_categories.row(p) {
                codes.push(((base + c as usize) as u32, p));
            }
        }
        let by_code = Csr::from_pairs(span * n_cat, &codes);
        drop(codes);
        let mut cohort_lookup = vec![NO_COHORT; span * n_cat];
        let mut cohorts = Vec::new();
        let mut rows = Vec::new();
        for code in 0..(span * n_cat) as u32 {
            let members = by_code.row(code);
            if members.is_empty() {
                continue;
            }
            cohort_lookup[code as usize] = cohorts.len() as u32;
            cohorts.push(CohortKey {
                year: config.y_min + (code as usize / n_cat) as i32,
                category: (code as usize % n_cat) as CategoryId,
            });
            rows.push(members.to_vec());
        }
        let cohort_members = Csr::from_rows(rows);

        let country_pairs: Vec<(CountryId, PubId)> = cols.pub_countries.pairs().map(|(p, c)| (c, p)).collect();
        let country_pubs = Csr::from_pairs(country_names.len(), &country_pairs);

        Self {
            config,
            cols,
            category_names,
            country_names,
            references,
            citations,
            cohorts,
            cohort_members,
            cohort_lookup,
            country_pubs,
        }
    }

    pub fn config(&self) -> &CorpusConfig {
        &self.config
    }

    pub fn len(&self) -> usize {
        self.cols.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cols.ids.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.references.len()
    }

    #[inline]
    pub fn id(&self, p: PubId) -> &str {
        &self.cols.ids[p as usize]
    }

    #[inline]
    pub fn year(&self, p: PubId) -> i32 {
        self.cols.years[p as usize]
    }

    #[inline]
    pub fn doc_type(&self, p: PubId) -> DocType {
        self.cols.doc_types[p as usize]
    }

    #[inline]
    pub fn is_cited_side(&self, p: PubId) -> bool {
        self.doc_type(p).is_cited_side()
    }

    #[inline]
    pub fn refs_total(&self, p: PubId) -> u32 {
        self.cols.refs_total[p as usize]
    }

    #[inline]
    pub fn categories(&self, p: PubId) -> &[CategoryId] {
        self.cols.pub_categories.row(p)
    }

    #[inline]
    pub fn countries(&self, p: PubId) -> &[CountryId] {
        self.cols.pub_countries.row(p)
    }

    #[inline]
    pub fn lists_country(&self, p: PubId, country: CountryId) -> bool {
        self.countries(p).binary_search(&country).is_ok()
    }

    /// Resolved references of `p`, ascending.
    #[inline]
    pub fn references(&self, p: PubId) -> &[PubId] {
        self.references.row(p)
    }

    /// Publications citing `p`, ascending.
    #[inline]
    pub fn citations(&self, p: PubId) -> &[PubId] {
        self.citations.row(p)
    }

    /// An edge counts toward obtained citations only if its cited endpoint
    /// is an article or review.
    #[inline]
    pub fn is_countable(&self, _citing: PubId, cited: PubId) -> bool {
        self.is_cited_side(cited)
    }

    pub fn edges(&self) -> impl Iterator<Item = (PubId, PubId)> + '_ {
        self.references.pairs()
    }

    pub fn find(&self, id: &str) -> Option<PubId> {
        self.cols
            .ids
            .binary_search_by(|probe| probe.as_str().cmp(id))
            .ok()
            .map(|i| i as PubId)
    }

    pub fn category_names(&self) -> &[String] {
        &self.category_names
    }

    pub fn country_names(&self) -> &[String] {
        &self.country_names
    }

    pub fn category_name(&self, c: CategoryId) -> &str {
        &self.category_names[c as usize]
    }

    pub fn country_name(&self, c: CountryId) -> &str {
        &self.country_names[c as usize]
    }

    pub fn category_id(&self, name: &str) -> Option<CategoryId> {
        self.category_names
            .binary_search_by(|probe| probe.as_str().cmp(name))
            .ok()
            .map(|i| i as CategoryId)
    }

    pub fn country_id(&self, code: &str) -> Option<CountryId> {
        self.country_names
            .binary_search_by(|probe| probe.as_str().cmp(code))
            .ok()
            .map(|i| i as CountryId)
    }

    /// Every publication (all document types) listing `country`.
    pub fn country_publications(&self, country: CountryId) -> &[PubId] {
        self.country_pubs.row(country)
    }

    /// Normalization cells, sorted by year then category.
    pub fn cohorts(&self) -> &[CohortKey] {
        &self.cohorts
    }

    pub fn cohort_members(&self, h: CohortId) -> &[PubId] {
        self.cohort_members.row(h)
    }

    pub fn cohort_of(&self, year: i32, category: CategoryId) -> Option<CohortId> {
        if year < self.config.y_min || year > self.config.y_max {
            return None;
        }
        let code = (year - self.config.y_min) as usize * self.category_names.len() + category as usize;
        self.cohort_lookup.get(code).copied().filter(|&h| h != NO_COHORT)
    }

    /// Cohorts of a cited-side publication, one per category.
    pub fn publication_cohorts(&self, p: PubId) -> impl Iterator<Item = CohortId> + '_ {
        let year = self.year(p);
        let cited = self.is_cited_side(p);
        self.categories(p)
            .iter()
            .filter(move |_| cited)
            .map(move |&c| self.cohort_of(year, c).expect("cited-side publication has cohorts"))
    }

    pub fn years(&self) -> impl Iterator<Item = i32> {
        self.config.y_min..=self.config.y_max
    }

    pub fn record(&self, p: PubId) -> PublicationRecord {
        PublicationRecord {
            id: self.id(p).to_owned(),
            year: self.year(p),
            doc_type: self.doc_type(p),
            categories: self
                .categories(p)
                .iter()
                .map(|&c| self.category_name(c).to_owned())
                .collect(),
            countries: self
                .countries(p)
                .iter()
                .map(|&c| self.country_name(c).to_owned())
                .collect(),
            refs_total: self.refs_total(p),
        }
    }

    pub fn records(&self) -> Vec<PublicationRecord> {
        (0..self.len() as PubId).map(|p| self.record(p)).collect()
    }

    pub fn write_publications<W: Write>(&self, out: W) -> io::Result<()> {
        let mut out = io::BufWriter::new(out);
        for p in 0..self.len() as PubId {
            serde_json::to_writer(&mut out, &self.record(p))?;
            out.write_all(b"\n")?;
        }
        out.flush()
    }

    pub fn write_edges<W: Write>(&self, out: W) -> io::Result<()> {
        let mut out = io::BufWriter::new(out);
        write_edges(&mut out, self.edges().map(|(a, b)| (self.id(a), self.id(b))))?;
        out.flush()
    }

    /// SHA-256 over the canonical serialization: config, id-sorted records,
    /// sorted de-duplicated edges.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        {
            let mut w = HashWriter(&mut hasher);
            w.write_all(self.config.to_json().as_bytes()).unwrap();
            w.write_all(b"\n").unwrap();
            self.write_publications(&mut w).unwrap();
            w.write_all(b"--\n").unwrap();
            self.write_edges(&mut w).unwrap();
        }
        hex::encode(hasher.finalize())
    }

    /// Sub-snapshot of the publications with `keep[p]`, with every edge
    /// touching a dropped publication removed. Category and country tables
    /// are shared with `self`, so interned ids stay comparable. Returns the
    /// new snapshot and, for each surviving publication, its id in `self`.
    pub fn retain(&self, keep: &[bool]) -> (CorpusSnapshot, Vec<PubId>) {
        assert_eq!(keep.len(), self.len());
        let survivors: Vec<PubId> = (0..self.len() as PubId).filter(|&p| keep[p as usize]).collect();
        let mut remap = vec![u32::MAX; self.len()];
        for (new, &old) in survivors.iter().enumerate() {
            remap[old as usize] = new as u32;
        }
        let rows_of = |csr: &Csr| {
            Csr::from_rows(survivors.iter().map(|&p| {
                csr.row(p)
                    .iter()
                    .filter(|&&q| keep[q as usize])
                    .map(|&q| remap[q as usize])
                    .collect::<Vec<_>>()
            }))
        };
        let references = rows_of(&self.references);
        let citations = rows_of(&self.citations);
        let pick = |csr: &Csr| Csr::from_rows(survivors.iter().map(|&p| csr.row(p).to_vec()));
        let cols = Columns {
            ids: survivors.iter().map(|&p| self.cols.ids[p as usize].clone()).collect(),
            years: survivors.iter().map(|&p| self.year(p)).collect(),
            doc_types: survivors.iter().map(|&p| self.doc_type(p)).collect(),
            refs_total: survivors.iter().map(|&p| self.refs_total(p)).collect(),
            pub_categories: pick(&self.cols.pub_categories),
            pub_countries: pick(&self.cols.pub_countries),
        };
        let snapshot = CorpusSnapshot::assemble(
            self.config,
            cols,
            self.category_names.clone(),
            self.country_names.clone(),
            references,
            citations,
        );
        (snapshot, survivors)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(id: &str, year: i32, doc: DocType, cats: &[&str], countries: &[&str], refs: u32) -> PublicationRecord {
        PublicationRecord {
            id: id.into(),
            year,
            doc_type: doc,
            categories: cats.iter().map(|s| s.to_string()).collect(),
            countries: countries.iter().map(|s| s.to_string()).collect(),
            refs_total: refs,
        }
    }

    #[test]
    fn minimal_record_parses() {
        let text =
            r#"{"id":"p1","year":2010,"doc_type":"article","categories":["C1"],"countries":["CHN"],"refs_total":30}"#;
        let recs = parse_publications(text).unwrap();
        assert_eq!(recs, vec![rec("p1", 2010, DocType::Article, &["C1"], &["CHN"], 30)]);
    }

    #[test]
    fn negative_refs_reported_at_line() {
        let text = "{\"id\":\"a\",\"year\":2010,\"doc_type\":\"article\",\"categories\":[\"C\"],\"countries\":[],\"refs_total\":1}\n\
                    {\"id\":\"b\",\"year\":2010,\"doc_type\":\"article\",\"categories\":[\"C\"],\"countries\":[],\"refs_total\":-1}\n";
        match parse_publications(text) {
            Err(CorpusError::NegativeRefCount { line: 2, value: -1 }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn record_errors() {
        let cases = [
            ("{not json", "malformed JSON"),
            (
                r#"{"year":2010,"doc_type":"article","categories":["C"],"countries":[],"refs_total":1}"#,
                "missing required field `id`",
            ),
            (
                r#"{"id":"a","year":2010,"doc_type":"article","categories":[],"countries":[],"refs_total":1}"#,
                "empty category set",
            ),
            (
                r#"{"id":"a","year":2010,"doc_type":"letter","categories":["C"],"countries":[],"refs_total":1}"#,
                "unknown document type",
            ),
            (
                r#"{"id":"a","year":2010,"doc_type":"article","categories":["C"],"countries":["de"],"refs_total":1}"#,
                "alpha-3",
            ),
        ];
        for (text, needle) in cases {
            let err = parse_publications(text).unwrap_err().to_string();
            assert!(err.starts_with("line 1:"), "{err}");
            assert!(err.contains(needle), "{err} lacks {needle}");
        }
    }

    #[test]
    fn edge_lines() {
        let edges = parse_edges("a\tb\n\nc\td\n").unwrap();
        assert_eq!(edges, vec![CitationEdge::new("a", "b"), CitationEdge::new("c", "d")]);
        assert!(matches!(
            parse_edges("a\tb\tc\n"),
            Err(CorpusError::ColumnCount { line: 1, found: 3 })
        ));
        assert!(matches!(
            parse_edges("a\tb\nx\n"),
            Err(CorpusError::ColumnCount { line: 2, found: 1 })
        ));
        assert!(matches!(parse_edges("\tb\n"), Err(CorpusError::EmptyId { line: 1 })));
    }

    #[test]
    fn self_citation_rejected_at_build() {
        let pubs = vec![rec("a", 2010, DocType::Article, &["C"], &[], 1)];
        let err = build_snapshot(pubs, &[CitationEdge::new("a", "a")], CorpusConfig::new(2010, 2010)).unwrap_err();
        assert!(matches!(err, CorpusError::SelfCitation { line: 1, .. }), "{err}");
    }

    #[test]
    fn dangling_endpoint_is_named() {
        let pubs = vec![
            rec("a", 2010, DocType::Article, &["C"], &[], 1),
            rec("b", 2010, DocType::Article, &["C"], &[], 1),
        ];
        let edges = [CitationEdge::new("a", "b"), CitationEdge::new("b", "zz")];
        let err = build_snapshot(pubs, &edges, CorpusConfig::new(2010, 2010)).unwrap_err();
        match &err {
            CorpusError::DanglingEndpoints {
                unknown_ids,
                first_line,
                ..
            } => {
                assert_eq!(unknown_ids, &vec!["zz".to_string()]);
                assert_eq!(*first_line, 2);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(err.to_string().contains("b -> zz"));
    }

    #[test]
    fn build_errors() {
        let config = CorpusConfig::new(2010, 2012);
        let dup = vec![
            rec("a", 2010, DocType::Article, &["C"], &[], 0),
            rec("a", 2011, DocType::Article, &["C"], &[], 0),
        ];
        assert!(matches!(
            build_snapshot(dup, &[], config),
            Err(CorpusError::DuplicateId {
                first: 1,
                second: 2,
                ..
            })
        ));
        let out_of_range = vec![rec("a", 2013, DocType::Article, &["C"], &[], 0)];
        assert!(matches!(
            build_snapshot(out_of_range, &[], config),
            Err(CorpusError::YearOutOfRange { .. })
        ));
        let short = vec![
            rec("a", 2010, DocType::Article, &["C"], &[], 0),
            rec("b", 2010, DocType::Article, &["C"], &[], 0),
        ];
        assert!(matches!(
            build_snapshot(short, &[CitationEdge::new("a", "b")], config),
            Err(CorpusError::ResolvedExceedsTotal {
                resolved: 1,
                refs_total: 0,
                ..
            })
        ));
    }

    #[test]
    fn config_validation() {
        let mut c = CorpusConfig::new(2010, 2012);
        assert!(c.validate().is_ok());
        c.top_share = 1.0;
        assert!(c.validate().is_err());
        c = CorpusConfig::new(2010, 2012);
        c.citation_cutoff_year = 2011;
        assert!(c.validate().is_err());
        c = CorpusConfig::new(2010, 2012);
        c.window_length = 0;
        assert!(c.validate().is_err());
        let parsed =
            CorpusConfig::from_reader(r#"{"y_min":2000,"y_max":2014,"citation_cutoff_year":2016}"#.as_bytes()).unwrap();
        assert_eq!(parsed.window_length, 3);
        assert_eq!(parsed.top_share, 0.10);
        assert_eq!(parsed.window_end(2014), 2016);
        assert_eq!(parsed.window_end(2010), 2012);
    }

    #[test]
    fn cited_side_and_countability() {
        let pubs = vec![
            rec("art", 2010, DocType::Article, &["C1"], &["DEU"], 1),
            rec("proc", 2010, DocType::ProceedingsPaper, &["C1"], &["DEU"], 1),
        ];
        let edges = [CitationEdge::new("proc", "art"), CitationEdge::new("art", "proc")];
        let s = build_snapshot(pubs, &edges, CorpusConfig::new(2010, 2010)).unwrap();
        let art = s.find("art").unwrap();
        let proc_ = s.find("proc").unwrap();
        assert_eq!(s.edge_count(), 2);
        assert!(s.is_countable(proc_, art));
        assert!(!s.is_countable(art, proc_));
        assert_eq!(s.cohorts().len(), 1);
        assert_eq!(s.cohort_members(0), &[art]);
    }

    #[test]
    fn duplicate_edges_collapse_and_three_articles_form_cited_side() {
        let pubs = vec![
            rec("a", 2010, DocType::Article, &["C"], &[], 2),
            rec("b", 2010, DocType::Article, &["C"], &[], 2),
            rec("c", 2010, DocType::Article, &["C"], &[], 2),
        ];
        let edges = [
            CitationEdge::new("a", "b"),
            CitationEdge::new("a", "b"),
            CitationEdge::new("c", "b"),
        ];
        let s = build_snapshot(pubs, &edges, CorpusConfig::new(2010, 2010)).unwrap();
        assert_eq!(s.edge_count(), 2);
        let b = s.find("b").unwrap();
        assert_eq!(s.citations(b).len(), 2);
        assert_eq!((0..3).filter(|&p| s.is_cited_side(p)).count(), 3);
    }

    #[test]
    fn retain_drops_touching_edges_and_keeps_tables() {
        let pubs = vec![
            rec("a", 2010, DocType::Article, &["C"], &["AAA"], 2),
            rec("b", 2010, DocType::Article, &["C"], &["XXX"], 2),
            rec("c", 2010, DocType::Article, &["D"], &["AAA"], 2),
        ];
        let edges = [
            CitationEdge::new("a", "b"),
            CitationEdge::new("c", "a"),
            CitationEdge::new("b", "c"),
        ];
        let s = build_snapshot(pubs, &edges, CorpusConfig::new(2010, 2010)).unwrap();
        let keep: Vec<bool> = (0..3).map(|p| s.id(p) != "b").collect();
        let (t, survivors) = s.retain(&keep);
        assert_eq!(survivors, vec![0, 2]);
        assert_eq!(t.len(), 2);
        assert_eq!(
            t.edges().map(|(x, y)| (t.id(x), t.id(y))).collect::<Vec<_>>(),
            vec![("c", "a")]
        );
        assert_eq!(t.country_names(), s.country_names());
        assert_eq!(t.refs_total(0), 2);
    }
}
