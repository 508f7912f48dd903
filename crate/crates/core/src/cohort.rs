//! Obtained citations under the citation window, and per-(year, category)
//! cohort statistics: fractional weight, expected citation count and the
//! top-share threshold with its tie fraction.
//!
//! A publication in `k` categories enters each of its cohorts with weight
//! `1/k`. With that weighting the fractionally weighted mean of `OC / EC` in
//! every cohort is exactly one, and the tie rule below makes the weighted
//! top mass of every cohort exactly `top_share * W`.

use std::cmp::Reverse;

use rayon::prelude::*;
use thiserror::Error;

use crate::corpus::{CategoryId, CohortId, CorpusSnapshot, PubId};

/// Obtained citations per publication, indexed by [`PubId`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObtainedCitations {
    counts: Vec<u32>,
}

impl ObtainedCitations {
    pub fn from_counts(counts: Vec<u32>) -> Self {
        Self { counts }
    }

    #[inline]
    pub fn get(&self, p: PubId) -> u32 {
        self.counts[p as usize]
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.counts
    }
}

/// Count distinct countable citations inside each publication's window.
/// Publications outside the cited side get zero.
pub fn count_obtained(snapshot: &CorpusSnapshot) -> ObtainedCitations {
    let config = snapshot.config();
    let counts = (0..snapshot.len() as PubId)
        .into_par_iter()
        .map(|p| {
            if !snapshot.is_cited_side(p) {
                return 0;
            }
            let start = snapshot.year(p);
            let end = config.window_end(start);
            snapshot
                .citations(p)
                .iter()
                .filter(|&&q| (start..=end).contains(&snapshot.year(q)))
                .count() as u32
        })
        .collect();
    ObtainedCitations { counts }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CohortStats {
    pub year: i32,
    pub category: CategoryId,
    /// Sum of `1/k` over cited-side members.
    pub weight: f64,
    pub expected_count: f64,
    /// Smallest count `t` whose strictly-above mass fits in the top share.
    pub top_threshold: u32,
    /// Share of the top slot granted to every member with exactly `t`.
    pub tie_fraction: f64,
    pub members: u32,
}

impl CohortStats {
    /// Top-share membership of a count in this cohort: 1 above the
    /// threshold, the tie fraction on it, 0 below.
    #[inline]
    pub fn top_fraction(&self, oc: u32) -> f64 {
        use std::cmp::Ordering::*;
        match oc.cmp(&self.top_threshold) {
            Greater => 1.0,
            Equal => self.tie_fraction,
            Less => 0.0,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CohortError {
    #[error("publication `{id}` is not a member of cohort ({year}, {category})")]
    NotAMember { id: String, year: i32, category: String },
}

/// Statistics for every non-empty cohort, aligned with
/// [`CorpusSnapshot::cohorts`].
#[derive(Debug, Clone, PartialEq)]
pub struct CohortTable {
    stats: Vec<CohortStats>,
}

impl CohortTable {
    pub fn get(&self, h: CohortId) -> &CohortStats {
        &self.stats[h as usize]
    }

    pub fn iter(&self) -> impl Iterator<Item = &CohortStats> {
        self.stats.iter()
    }

    pub fn len(&self) -> usize {
        self.stats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stats.is_empty()
    }

    pub fn lookup(&self, snapshot: &CorpusSnapshot, year: i32, category: CategoryId) -> Option<&CohortStats> {
        snapshot.cohort_of(year, category).map(|h| self.get(h))
    }

    /// Checked variant of [`CohortStats::top_fraction`] for one member.
    pub fn top_fraction(
        &self,
        snapshot: &CorpusSnapshot,
        oc: &ObtainedCitations,
        p: PubId,
        h: CohortId,
    ) -> Result<f64, CohortError> {
        if snapshot.cohort_members(h).binary_search(&p).is_err() {
            let key = snapshot.cohorts()[h as usize];
            return Err(CohortError::NotAMember {
                id: snapshot.id(p).to_owned(),
                year: key.year,
                category: snapshot.category_name(key.category).to_owned(),
            });
        }
        Ok(self.get(h).top_fraction(oc.get(p)))
    }
}

#[inline]
pub(crate) fn membership_weight(snapshot: &CorpusSnapshot, p: PubId) -> f64 {
    1.0 / snapshot.categories(p).len() as f64
}

/// Threshold and tie fraction for `(count, weight)` members of a cohort
/// with total weight `total`.
pub fn top_threshold(members: &mut [(u32, f64)], total: f64, top_share: f64) -> (u32, f64) {
    let target = top_share * total;
    let slack = 1e-12 * total.max(1.0);
    members.sort_by_key(|&(c, _)| Reverse(c));
    let mut above = 0.0;
    let mut i = 0;
    while i < members.len() {
        let count = members[i].0;
        let mut tied = 0.0;
        while i < members.len() && members[i].0 == count {
            tied += members[i].1;
            i += 1;
        }
        if above + tied > target + slack {
            let tie = ((target - above) / tied).clamp(0.0, 1.0);
            return (count, tie);
        }
        above += tied;
    }
    // Only reachable for a degenerate near-zero cohort weight.
    (members.last().map_or(0, |m| m.0), 1.0)
}

pub fn compute_cohorts(snapshot: &CorpusSnapshot, oc: &ObtainedCitations) -> CohortTable {
    let top_share = snapshot.config().top_share;
    let stats = snapshot
        .cohorts()
        .par_iter()
        .enumerate()
        .map(|(h, key)| {
            let members = snapshot.cohort_members(h as CohortId);
            let mut weighted: Vec<(u32, f64)> = members
                .iter()
                .map(|&p| (oc.get(p), membership_weight(snapshot, p)))
                .collect();
            let weight: f64 = weighted.iter().map(|m| m.1).sum();
            let mass: f64 = weighted.iter().map(|&(c, w)| w * c as f64).sum();
            let (top_threshold, tie_fraction) = top_threshold(&mut weighted, weight, top_share);
            CohortStats {
                year: key.year,
                category: key.category,
                weight,
                expected_count: mass / weight,
                top_threshold,
                tie_fraction,
                members: members.len() as u32,
            }
        })
        .collect();
    CohortTable { stats }
}
