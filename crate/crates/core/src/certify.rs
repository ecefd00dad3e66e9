//! Verdicts combining the parity criteria with the analytic oracles.
//!
//! Every verdict carries the ordered list of rules that fired.  The rule
//! deciding the status comes first; later entries are corroboration.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{point_search, tunnell_counts, Curve, RationalPoint, TunnellCounts};
use crate::arith::{factor_squarefree, squarefree_sieve};
use crate::classgroup::{GenusEntry, GenusTable, MAX_ABS_DISCRIMINANT};
use crate::error::{Error, Result};
use crate::parity::{
    single_genus_classify, rank_zero_parity, rank_one_sums, Convention, GenusConclusion, SingleGenusTrigger,
};

/// Largest `n` whose discriminant stays inside the class group range.
pub const MAX_SUPPORTED_N: u64 = (MAX_ABS_DISCRIMINANT / 4) as u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    NonCongruent,
    Congruent,
    ConjecturallyCongruent,
    Unknown,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::NonCongruent => "non_congruent",
            Status::Congruent => "congruent",
            Status::ConjecturallyCongruent => "conjecturally_congruent",
            Status::Unknown => "unknown",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Status::NonCongruent, Status::Congruent, Status::ConjecturallyCongruent, Status::Unknown]
            .into_iter()
            .find(|st| st.as_str() == s)
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Rule {
    /// The root number +1 decomposition sum is odd, so `L(E_n, 1) != 0`.
    RankZeroParityOdd(Convention),
    /// One of the root number -1 sums is odd (`which` is 1 or 2).
    RankOneSumOdd { which: u8, convention: Convention },
    SingleGenus(SingleGenusTrigger),
    TunnellNonvanishing,
    TunnellEquality,
    PointFound,
}

impl Rule {
    pub fn id(&self) -> String {
        let tag = |c: &Convention| match c {
            Convention::MultisetOnce => String::new(),
            Convention::LabeledSlots => "@labeled".to_string(),
        };
        match self {
            Rule::RankZeroParityOdd(c) => format!("thm1.1:parity_odd{}", tag(c)),
            Rule::RankOneSumOdd { which, convention } => format!("thm1.2:s{which}_odd{}", tag(convention)),
            Rule::SingleGenus(t) => t.rule_id(),
            Rule::TunnellNonvanishing => "tunnell:nonvanishing".into(),
            Rule::TunnellEquality => "tunnell:equality".into(),
            Rule::PointFound => "point:found".into(),
        }
    }

    fn certifies_congruent(&self) -> bool {
        matches!(self, Rule::RankOneSumOdd { .. } | Rule::PointFound)
            || matches!(self, Rule::SingleGenus(t) if t.conclusion == GenusConclusion::Congruent)
    }

    fn proves_non_congruent(&self) -> bool {
        matches!(self, Rule::RankZeroParityOdd(_) | Rule::TunnellNonvanishing)
            || matches!(self, Rule::SingleGenus(t) if t.conclusion == GenusConclusion::NonCongruent)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassifyOptions {
    pub convention: Convention,
    /// Bound for the naive point search; 0 disables it.
    pub point_bound: u64,
    /// Compute `g(n)` and `h2(n)` exactly through the class group.
    pub exact_genus: bool,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions { convention: Convention::MultisetOnce, point_bound: 1000, exact_genus: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub n: u64,
    pub status: Status,
    pub provenance: Vec<Rule>,
    pub point: Option<RationalPoint>,
    /// Free-leader sum for every `n`; two-slot sum only for root number -1.
    pub s1: u8,
    pub s2: Option<u8>,
    pub tunnell: TunnellCounts,
    pub genus: Option<GenusEntry>,
}

impl Verdict {
    pub fn rule_ids(&self) -> Vec<String> {
        self.provenance.iter().map(Rule::id).collect()
    }

    /// Status/provenance consistency; violations are programming errors.
    pub fn is_consistent(&self) -> bool {
        let has_point = self.provenance.contains(&Rule::PointFound);
        match self.status {
            Status::Congruent => self.provenance.iter().any(Rule::certifies_congruent),
            Status::NonCongruent => !has_point && self.provenance.iter().any(Rule::proves_non_congruent),
            Status::ConjecturallyCongruent => self.provenance.contains(&Rule::TunnellEquality) && !has_point,
            Status::Unknown => !has_point,
        }
    }
}

fn search(n: u64, options: &ClassifyOptions) -> Result<Option<RationalPoint>> {
    if options.point_bound == 0 {
        return Ok(None);
    }
    point_search(n, Curve::E, options.point_bound)
}

pub fn classify(n: u64, options: &ClassifyOptions, table: &GenusTable) -> Result<Verdict> {
    let profile = factor_squarefree(n)?;
    if n > MAX_SUPPORTED_N {
        return Err(Error::OutOfSupportedRange(n));
    }
    let tunnell = tunnell_counts(n)?;
    let single_genus = single_genus_classify(n, table)?;
    let genus = if options.exact_genus { Some(table.entry(n)?) } else { None };
    let mut provenance = Vec::new();
    if let Some(t) = single_genus {
        provenance.push(Rule::SingleGenus(t));
    }
    let mut point = None;
    let status;
    let s1;
    let mut s2 = None;

    if matches!(profile.residue8, 1 | 2 | 3) {
        s1 = rank_zero_parity(n, table, options.convention)?;
        if s1 == 1 {
            provenance.push(Rule::RankZeroParityOdd(options.convention));
        }
        if tunnell.nonvanishing() {
            provenance.push(Rule::TunnellNonvanishing);
        }
        if !provenance.is_empty() {
            status = Status::NonCongruent;
        } else {
            provenance.push(Rule::TunnellEquality);
            point = search(n, options)?;
            status = if point.is_some() {
                provenance.push(Rule::PointFound);
                Status::Congruent
            } else {
                Status::ConjecturallyCongruent
            };
        }
    } else {
        let sums = rank_one_sums(n, table, options.convention)?;
        s1 = sums.s1;
        s2 = Some(sums.s2);
        if profile.residue8 != 6 && sums.s1 == 1 {
            provenance.push(Rule::RankOneSumOdd { which: 1, convention: options.convention });
        }
        if sums.s2 == 1 {
            provenance.push(Rule::RankOneSumOdd { which: 2, convention: options.convention });
        }
        if !provenance.is_empty() {
            status = Status::Congruent;
        } else {
            point = search(n, options)?;
            status = if point.is_some() {
                provenance.push(Rule::PointFound);
                Status::Congruent
            } else {
                Status::Unknown
            };
        }
    }

    let verdict = Verdict { n, status, provenance, point, s1, s2, tunnell, genus };
    debug_assert!(verdict.is_consistent(), "{verdict:?}");
    Ok(verdict)
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScanItem {
    Verdict(Box<Verdict>),
    Skip { n: u64, reason: String },
}

impl ScanItem {
    pub fn n(&self) -> u64 {
        match self {
            ScanItem::Verdict(v) => v.n,
            ScanItem::Skip { n, .. } => *n,
        }
    }
}

fn check_range(lo: u64, hi: u64) -> Result<()> {
    if lo > hi {
        return Err(Error::InvalidInput(format!("empty range [{lo}, {hi}]")));
    }
    if hi > MAX_SUPPORTED_N {
        return Err(Error::OutOfSupportedRange(hi));
    }
    Ok(())
}

/// Classifies every `n` in `[lo, hi]` with the current rayon pool; output is
/// ordered by `n` whatever the scheduling.
pub fn scan(lo: u64, hi: u64, options: &ClassifyOptions, table: &GenusTable) -> Result<Vec<ScanItem>> {
    check_range(lo, hi)?;
    let sieve = squarefree_sieve(hi);
    (lo..=hi)
        .into_par_iter()
        .map(|n| {
            if !sieve[n as usize] {
                return Ok(ScanItem::Skip { n, reason: "not squarefree".into() });
            }
            classify(n, options, table).map(|v| ScanItem::Verdict(Box::new(v)))
        })
        .collect()
}

/// [`scan`] on a dedicated pool of `jobs` workers.
pub fn scan_with_jobs(
    lo: u64,
    hi: u64,
    options: &ClassifyOptions,
    table: &GenusTable,
    jobs: usize,
) -> Result<Vec<ScanItem>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    pool.install(|| scan(lo, hi, options, table))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ClassStats {
    pub residue: u8,
    pub squarefree: u64,
    pub non_congruent: u64,
    pub congruent: u64,
    pub conjecturally_congruent: u64,
    pub unknown: u64,
    /// How often each rule appeared in a provenance list.
    pub rules: BTreeMap<String, u64>,
    /// Share certified in the direction the root number predicts:
    /// non-congruent for 1, 2, 3 and congruent for 5, 6, 7.
    pub certified_fraction: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub limit: u64,
    pub classes: Vec<ClassStats>,
}

impl DensityReport {
    pub fn class(&self, residue: u8) -> Option<&ClassStats> {
        self.classes.iter().find(|c| c.residue == residue)
    }
}

pub fn density_report(
    limit: u64,
    residue_class: Option<u8>,
    options: &ClassifyOptions,
    table: &GenusTable,
) -> Result<DensityReport> {
    if let Some(r) = residue_class {
        if !matches!(r, 1 | 2 | 3 | 5 | 6 | 7) {
            return Err(Error::InvalidInput(format!("residue class {r} mod 8 has no square-free members")));
        }
    }
    if limit == 0 {
        return Ok(DensityReport { limit, classes: Vec::new() });
    }
    check_range(1, limit)?;
    let sieve = squarefree_sieve(limit);
    let wanted = |n: u64| sieve[n as usize] && residue_class.map_or(true, |r| n % 8 == r as u64);
    let verdicts: Vec<Verdict> = (1..=limit)
        .into_par_iter()
        .filter(|&n| wanted(n))
        .map(|n| classify(n, options, table))
        .collect::<Result<_>>()?;
    let mut classes: BTreeMap<u8, ClassStats> = BTreeMap::new();
    for v in &verdicts {
        let residue = (v.n % 8) as u8;
        let stats = classes.entry(residue).or_insert_with(|| ClassStats { residue, ..Default::default() });
        stats.squarefree += 1;
        match v.status {
            Status::NonCongruent => stats.non_congruent += 1,
            Status::Congruent => stats.congruent += 1,
            Status::ConjecturallyCongruent => stats.conjecturally_congruent += 1,
            Status::Unknown => stats.unknown += 1,
        }
        for id in v.rule_ids() {
            *stats.rules.entry(id).or_default() += 1;
        }
    }
    for stats in classes.values_mut() {
        let certified = if stats.residue < 4 { stats.non_congruent } else { stats.congruent };
        stats.certified_fraction = certified as f64 / stats.squarefree as f64;
    }
    Ok(DensityReport { limit, classes: classes.into_values().collect() })
}
