//! Comparing revisions: test alignment, per-metric ANOVA and Tukey HSD, and
//! scoring rU_api significance as a proxy for energy and power significance.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::apimetric::ruapi;
use crate::energy::{aggregate_samples, Aggregation, TestEnergyRecord};
use crate::stats::{self, AnovaResult, StatsError};
use crate::trace::MethodId;

/// Analysis outcome of one test execution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecutionRecord {
    pub revision: String,
    pub test_name: MethodId,
    pub sample_index: u32,
    pub energy_mj: f64,
    pub avg_power_mw: f64,
    pub duration_ms: f64,
    pub uapi: u64,
    pub api_interactions: u64,
    pub ruapi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RevisionDataset {
    pub revision: String,
    records: Vec<ExecutionRecord>,
}

#[derive(Debug, Error)]
pub enum EvolutionError {
    #[error("need at least 2 revisions, got {0}")]
    TooFewRevisions(usize),
    #[error("revision `{0}` appears more than once")]
    DuplicateRevision(String),
    #[error("revision `{revision}` has duplicate record for {test} sample {sample}")]
    DuplicateRecord {
        revision: String,
        test: MethodId,
        sample: u32,
    },
    #[error("record for revision `{found}` placed in dataset `{expected}`")]
    ForeignRecord { expected: String, found: String },
    #[error("no test is present in every revision")]
    EmptyIntersection,
    #[error("revision `{0}` has no records")]
    EmptyRevision(String),
    #[error("revisions are not aligned: `{0}` has a different test set")]
    NotAligned(String),
    #[error("top-k selection needs k >= 1")]
    InvalidK,
    #[error("reference revision `{0}` not found")]
    UnknownReference(String),
    #[error("proxy and target cover different revision pairs")]
    MismatchedPairs,
    #[error("significance level {0} is outside (0, 1)")]
    InvalidAlpha(f64),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Energy(#[from] crate::energy::EnergyError),
}

impl RevisionDataset {
    pub fn new(
        revision: impl Into<String>,
        mut records: Vec<ExecutionRecord>,
    ) -> Result<Self, EvolutionError> {
        let revision = revision.into();
        records.sort_by(|a, b| {
            (&a.test_name, a.sample_index).cmp(&(&b.test_name, b.sample_index))
        });
        for r in &records {
            if r.revision != revision {
                return Err(EvolutionError::ForeignRecord {
                    expected: revision,
                    found: r.revision.clone(),
                });
            }
        }
        if let Some(w) = records
            .windows(2)
            .find(|w| w[0].test_name == w[1].test_name && w[0].sample_index == w[1].sample_index)
        {
            return Err(EvolutionError::DuplicateRecord {
                revision,
                test: w[0].test_name.clone(),
                sample: w[0].sample_index,
            });
        }
        Ok(Self { revision, records })
    }

    /// Records ordered by (test, sample).
    pub fn records(&self) -> &[ExecutionRecord] {
        &self.records
    }

    pub fn records_mut(&mut self) -> &mut [ExecutionRecord] {
        &mut self.records
    }

    pub fn test_names(&self) -> BTreeSet<MethodId> {
        self.records.iter().map(|r| r.test_name.clone()).collect()
    }

    pub fn restricted_to(&self, tests: &BTreeSet<MethodId>) -> Self {
        Self {
            revision: self.revision.clone(),
            records: self
                .records
                .iter()
                .filter(|r| tests.contains(&r.test_name))
                .cloned()
                .collect(),
        }
    }

    /// Records grouped per test, in test-name order.
    pub fn by_test(&self) -> BTreeMap<&MethodId, Vec<&ExecutionRecord>> {
        let mut out: BTreeMap<&MethodId, Vec<&ExecutionRecord>> = BTreeMap::new();
        for r in &self.records {
            out.entry(&r.test_name).or_default().push(r);
        }
        out
    }
}

/// Orders dotted version labels component-wise; numeric components compare
/// numerically, anything else lexicographically.
pub fn compare_revision_labels(a: &str, b: &str) -> Ordering {
    let split = |s: &str| -> Vec<String> {
        s.split(['.', '-', '_']).map(str::to_owned).collect()
    };
    let (pa, pb) = (split(a), split(b));
    for (x, y) in pa.iter().zip(&pb) {
        let ord = match (x.parse::<u64>(), y.parse::<u64>()) {
            (Ok(nx), Ok(ny)) => nx.cmp(&ny),
            (Ok(_), Err(_)) => Ordering::Less,
            (Err(_), Ok(_)) => Ordering::Greater,
            (Err(_), Err(_)) => x.cmp(y),
        };
        if ord != Ordering::Equal {
            return ord;
        }
    }
    pa.len().cmp(&pb.len()).then_with(|| a.cmp(b))
}

pub fn sort_revisions(revisions: &mut [RevisionDataset]) -> Result<(), EvolutionError> {
    revisions.sort_by(|a, b| compare_revision_labels(&a.revision, &b.revision));
    if let Some(w) = revisions.windows(2).find(|w| w[0].revision == w[1].revision) {
        return Err(EvolutionError::DuplicateRevision(w[0].revision.clone()));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Alignment {
    pub tests: BTreeSet<MethodId>,
    /// Tests dropped from each revision because some other revision lacks them.
    pub excluded: BTreeMap<String, Vec<MethodId>>,
}

pub fn align_tests(revisions: &[RevisionDataset]) -> Result<Alignment, EvolutionError> {
    if revisions.len() < 2 {
        return Err(EvolutionError::TooFewRevisions(revisions.len()));
    }
    let sets: Vec<BTreeSet<MethodId>> = revisions.iter().map(|r| r.test_names()).collect();
    let mut tests = sets[0].clone();
    for s in &sets[1..] {
        tests.retain(|t| s.contains(t));
    }
    if tests.is_empty() {
        return Err(EvolutionError::EmptyIntersection);
    }
    let excluded = revisions
        .iter()
        .zip(&sets)
        .filter_map(|(r, s)| {
            let dropped: Vec<MethodId> = s.difference(&tests).cloned().collect();
            (!dropped.is_empty()).then(|| (r.revision.clone(), dropped))
        })
        .collect();
    Ok(Alignment { tests, excluded })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopTests {
    pub tests: BTreeSet<MethodId>,
    /// Fewer than `k` tests were available; all of them were returned.
    pub truncated: bool,
}

/// The `k` tests with the highest mean energy; ties go to the smaller name.
pub fn select_top_energy_tests(
    revision: &RevisionDataset,
    k: usize,
) -> Result<TopTests, EvolutionError> {
    if k == 0 {
        return Err(EvolutionError::InvalidK);
    }
    let mut means: Vec<(&MethodId, f64)> = revision
        .by_test()
        .into_iter()
        .map(|(t, rs)| (t, rs.iter().map(|r| r.energy_mj).sum::<f64>() / rs.len() as f64))
        .collect();
    means.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let truncated = k > means.len();
    Ok(TopTests {
        tests: means.into_iter().take(k).map(|(t, _)| t.clone()).collect(),
        truncated,
    })
}

/// Population `N` used to normalize U_api into rU_api.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuapiScope {
    /// All API interactions of the aligned tests across every revision,
    /// each (revision, test) counted once (mean over its samples, rounded).
    #[default]
    Study,
    /// API interactions of one revision's aligned tests in the same sample run.
    Revision,
}

pub fn assign_ruapi(revisions: &mut [RevisionDataset], scope: RuapiScope) {
    match scope {
        RuapiScope::Study => {
            let n: u64 = revisions
                .iter()
                .flat_map(|rev| {
                    rev.by_test()
                        .into_values()
                        .map(|rs| {
                            let total: u64 = rs.iter().map(|r| r.api_interactions).sum();
                            (total as f64 / rs.len() as f64).round() as u64
                        })
                        .collect::<Vec<_>>()
                })
                .sum();
            for rev in revisions.iter_mut() {
                for r in rev.records_mut() {
                    r.ruapi = ruapi(r.uapi, n).value;
                }
            }
        }
        RuapiScope::Revision => {
            for rev in revisions.iter_mut() {
                let mut per_sample: BTreeMap<u32, u64> = BTreeMap::new();
                for r in rev.records() {
                    *per_sample.entry(r.sample_index).or_insert(0) += r.api_interactions;
                }
                for r in rev.records_mut() {
                    r.ruapi = ruapi(r.uapi, per_sample[&r.sample_index]).value;
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservationUnit {
    /// Every (test, sample) execution is one observation.
    #[default]
    PerSample,
    /// Samples are first aggregated per test.
    PerTestMean,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Energy,
    Power,
    Ruapi,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Energy, Metric::Power, Metric::Ruapi];

    pub fn value(self, r: &ExecutionRecord) -> f64 {
        match self {
            Metric::Energy => r.energy_mj,
            Metric::Power => r.avg_power_mw,
            Metric::Ruapi => r.ruapi,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Metric::Energy => "energy",
            Metric::Power => "power",
            Metric::Ruapi => "ruapi",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSignificance {
    pub revision_a: String,
    pub revision_b: String,
    pub mean_diff: f64,
    pub q: Option<f64>,
    pub p_adj: f64,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricAnalysis {
    pub metric: Metric,
    pub observations_per_revision: Vec<usize>,
    pub anova: Option<AnovaResult>,
    pub pairs: Vec<PairSignificance>,
    /// Set when the statistics could not be computed.
    pub error: Option<String>,
}

impl MetricAnalysis {
    pub fn is_degenerate(&self) -> bool {
        self.error.is_some() || self.anova.as_ref().is_some_and(|a| a.degeneracy.is_some())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub true_negatives: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.true_positives + self.false_positives + self.false_negatives + self.true_negatives
    }
}

/// Agreement of proxy significance with target significance; the positive
/// class is "significant change".
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProxyScore {
    pub confusion: Confusion,
    pub accuracy: f64,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    /// Absent when there are no positives in either input.
    pub f1: Option<f64>,
}

pub fn proxy_eval(
    proxy: &[PairSignificance],
    target: &[PairSignificance],
) -> Result<ProxyScore, EvolutionError> {
    let key = |p: &PairSignificance| (p.revision_a.clone(), p.revision_b.clone());
    let target_by_pair: BTreeMap<_, bool> = target.iter().map(|p| (key(p), p.significant)).collect();
    if target_by_pair.len() != target.len() || proxy.len() != target.len() {
        return Err(EvolutionError::MismatchedPairs);
    }
    let mut c = Confusion {
        true_positives: 0,
        false_positives: 0,
        false_negatives: 0,
        true_negatives: 0,
    };
    for p in proxy {
        let truth = *target_by_pair
            .get(&key(p))
            .ok_or(EvolutionError::MismatchedPairs)?;
        match (p.significant, truth) {
            (true, true) => c.true_positives += 1,
            (true, false) => c.false_positives += 1,
            (false, true) => c.false_negatives += 1,
            (false, false) => c.true_negatives += 1,
        }
    }
    Ok(score(c))
}

fn score(c: Confusion) -> ProxyScore {
    let ratio = |num: usize, den: usize| (den > 0).then(|| num as f64 / den as f64);
    let total = c.total();
    ProxyScore {
        confusion: c,
        accuracy: ratio(c.true_positives + c.true_negatives, total).unwrap_or(1.0),
        precision: ratio(c.true_positives, c.true_positives + c.false_positives),
        recall: ratio(c.true_positives, c.true_positives + c.false_negatives),
        f1: ratio(
            2 * c.true_positives,
            2 * c.true_positives + c.false_positives + c.false_negatives,
        ),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RevisionSummary {
    pub revision: String,
    pub mean_energy_mj: f64,
    pub mean_power_mw: f64,
    pub sum_ruapi: f64,
}

/// Per-test sample aggregation, in test-name order.
pub fn test_records(
    revision: &RevisionDataset,
    aggregation: Aggregation,
) -> Result<Vec<(TestEnergyRecord, f64)>, EvolutionError> {
    revision
        .by_test()
        .into_iter()
        .map(|(test, rs)| {
            let samples: Vec<TestEnergyRecord> = rs
                .iter()
                .map(|r| TestEnergyRecord {
                    test_name: test.clone(),
                    revision: revision.revision.clone(),
                    energy_mj: r.energy_mj,
                    avg_power_mw: r.avg_power_mw,
                    duration_ms: r.duration_ms,
                    n_samples_averaged: 1,
                })
                .collect();
            let ruapi_values: Vec<f64> = rs.iter().map(|r| r.ruapi).collect();
            Ok((
                aggregate_samples(&samples, aggregation)?,
                aggregation.apply(&ruapi_values),
            ))
        })
        .collect()
}

pub fn revision_summaries(
    revisions: &[RevisionDataset],
    aggregation: Aggregation,
) -> Result<Vec<RevisionSummary>, EvolutionError> {
    let mut out = Vec::with_capacity(revisions.len());
    for rev in revisions {
        let tests = test_records(rev, aggregation)?;
        if tests.is_empty() {
            return Err(EvolutionError::EmptyRevision(rev.revision.clone()));
        }
        let n = tests.len() as f64;
        out.push(RevisionSummary {
            revision: rev.revision.clone(),
            mean_energy_mj: tests.iter().map(|(t, _)| t.energy_mj).sum::<f64>() / n,
            mean_power_mw: tests.iter().map(|(t, _)| t.avg_power_mw).sum::<f64>() / n,
            sum_ruapi: tests.iter().map(|(_, r)| r).sum(),
        });
    }
    out.sort_by(|a, b| compare_revision_labels(&a.revision, &b.revision));
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CompareOptions {
    pub observation_unit: ObservationUnit,
    pub aggregation: Aggregation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub revisions: Vec<String>,
    pub aligned_tests: Vec<MethodId>,
    pub excluded_tests: BTreeMap<String, Vec<MethodId>>,
    pub alpha: f64,
    pub observation_unit: ObservationUnit,
    pub execution_records: usize,
    pub energy: MetricAnalysis,
    pub power: MetricAnalysis,
    pub ruapi: MetricAnalysis,
    pub proxy_vs_energy: Option<ProxyScore>,
    pub proxy_vs_power: Option<ProxyScore>,
    pub summaries: Vec<RevisionSummary>,
}

impl ComparisonReport {
    pub fn metric(&self, metric: Metric) -> &MetricAnalysis {
        match metric {
            Metric::Energy => &self.energy,
            Metric::Power => &self.power,
            Metric::Ruapi => &self.ruapi,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        Metric::ALL.iter().any(|m| self.metric(*m).is_degenerate())
    }
}

fn observations(
    rev: &RevisionDataset,
    metric: Metric,
    options: &CompareOptions,
) -> Vec<f64> {
    match options.observation_unit {
        ObservationUnit::PerSample => rev.records().iter().map(|r| metric.value(r)).collect(),
        ObservationUnit::PerTestMean => rev
            .by_test()
            .into_values()
            .map(|rs| {
                let v: Vec<f64> = rs.iter().map(|r| metric.value(r)).collect();
                options.aggregation.apply(&v)
            })
            .collect(),
    }
}

fn analyze_metric(
    revisions: &[RevisionDataset],
    metric: Metric,
    alpha: f64,
    options: &CompareOptions,
) -> MetricAnalysis {
    let groups: Vec<Vec<f64>> = revisions
        .iter()
        .map(|r| observations(r, metric, options))
        .collect();
    let observations_per_revision = groups.iter().map(Vec::len).collect();
    let outcome = stats::anova(&groups).and_then(|table| {
        let pairs = stats::tukey_hsd_from_anova(&table, alpha)?;
        Ok((table, pairs))
    });
    match outcome {
        Ok((table, pairs)) => MetricAnalysis {
            metric,
            observations_per_revision,
            anova: Some(table),
            pairs: pairs
                .into_iter()
                .map(|p| PairSignificance {
                    revision_a: revisions[p.group_a].revision.clone(),
                    revision_b: revisions[p.group_b].revision.clone(),
                    mean_diff: p.mean_diff,
                    q: p.q,
                    p_adj: p.p_adj,
                    significant: p.significant,
                })
                .collect(),
            error: None,
        },
        Err(e) => MetricAnalysis {
            metric,
            observations_per_revision,
            anova: None,
            pairs: Vec::new(),
            error: Some(e.to_string()),
        },
    }
}

/// Runs the three per-metric analyses over aligned revisions.
///
/// Statistical failures of a single metric are recorded in the report
/// rather than returned as errors.
pub fn compare(
    revisions: &[RevisionDataset],
    alpha: f64,
    options: &CompareOptions,
) -> Result<ComparisonReport, EvolutionError> {
    if revisions.len() < 2 {
        return Err(EvolutionError::TooFewRevisions(revisions.len()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(EvolutionError::InvalidAlpha(alpha));
    }
    let mut revisions = revisions.to_vec();
    sort_revisions(&mut revisions)?;
    let tests = revisions[0].test_names();
    if let Some(r) = revisions.iter().find(|r| r.test_names() != tests) {
        return Err(EvolutionError::NotAligned(r.revision.clone()));
    }
    if tests.is_empty() {
        return Err(EvolutionError::EmptyIntersection);
    }

    let [energy, power, ruapi] =
        Metric::ALL.map(|m| analyze_metric(&revisions, m, alpha, options));
    let proxy = |target: &MetricAnalysis| {
        (ruapi.error.is_none() && target.error.is_none())
            .then(|| proxy_eval(&ruapi.pairs, &target.pairs).ok())
            .flatten()
    };
    Ok(ComparisonReport {
        revisions: revisions.iter().map(|r| r.revision.clone()).collect(),
        aligned_tests: tests.into_iter().collect(),
        excluded_tests: BTreeMap::new(),
        alpha,
        observation_unit: options.observation_unit,
        execution_records: revisions.iter().map(|r| r.records().len()).sum(),
        proxy_vs_energy: proxy(&energy),
        proxy_vs_power: proxy(&power),
        summaries: revision_summaries(&revisions, options.aggregation)?,
        energy,
        power,
        ruapi,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolveOptions {
    pub alpha: f64,
    pub compare: CompareOptions,
    pub ruapi_scope: RuapiScope,
    pub top_k_tests: Option<usize>,
    /// Revision the top-k tests are picked from; defaults to the newest.
    pub reference_revision: Option<String>,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            compare: CompareOptions::default(),
            ruapi_scope: RuapiScope::default(),
            top_k_tests: None,
            reference_revision: None,
        }
    }
}

/// Full revision comparison: optional top-k curation, alignment,
/// rU_api normalization and [`compare`].
pub fn evolve(
    mut revisions: Vec<RevisionDataset>,
    options: &EvolveOptions,
) -> Result<ComparisonReport, EvolutionError> {
    if revisions.len() < 2 {
        return Err(EvolutionError::TooFewRevisions(revisions.len()));
    }
    sort_revisions(&mut revisions)?;
    if let Some(r) = revisions.iter().find(|r| r.records().is_empty()) {
        return Err(EvolutionError::EmptyRevision(r.revision.clone()));
    }
    if let Some(k) = options.top_k_tests {
        let reference = match &options.reference_revision {
            Some(label) => revisions
                .iter()
                .find(|r| &r.revision == label)
                .ok_or_else(|| EvolutionError::UnknownReference(label.clone()))?,
            None => revisions.last().expect("at least 2 revisions"),
        };
        let top = select_top_energy_tests(reference, k)?;
        revisions = revisions.iter().map(|r| r.restricted_to(&top.tests)).collect();
    }
    let alignment = align_tests(&revisions)?;
    let mut aligned: Vec<RevisionDataset> = revisions
        .iter()
        .map(|r| r.restricted_to(&alignment.tests))
        .collect();
    assign_ruapi(&mut aligned, options.ruapi_scope);
    let mut report = compare(&aligned, options.alpha, &options.compare)?;
    report.excluded_tests = alignment.excluded;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mid(s: &str) -> MethodId {
        s.parse().unwrap()
    }

    fn record(rev: &str, test: &str, sample: u32, energy: f64) -> ExecutionRecord {
        ExecutionRecord {
            revision: rev.into(),
            test_name: mid(test),
            sample_index: sample,
            energy_mj: energy,
            avg_power_mw: energy * 2.0,
            duration_ms: 500.0,
            uapi: 4,
            api_interactions: 2,
            ruapi: 0.0,
        }
    }

    fn dataset(rev: &str, tests: &[&str]) -> RevisionDataset {
        RevisionDataset::new(
            rev,
            tests.iter().map(|t| record(rev, t, 0, 1.0)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn duplicate_keys_rejected() {
        let r = RevisionDataset::new(
            "1.0",
            vec![record("1.0", "p.T::a", 0, 1.0), record("1.0", "p.T::a", 0, 2.0)],
        );
        assert!(matches!(r, Err(EvolutionError::DuplicateRecord { .. })));
        let r = RevisionDataset::new("1.0", vec![record("2.0", "p.T::a", 0, 1.0)]);
        assert!(matches!(r, Err(EvolutionError::ForeignRecord { .. })));
    }

    #[test]
    fn alignment_is_intersection() {
        let a = dataset("1.0", &["p.T::a", "p.T::b", "p.T::c"]);
        let b = dataset("1.1", &["p.T::b", "p.T::c", "p.T::d"]);
        let al = align_tests(&[a.clone(), b]).unwrap();
        assert_eq!(al.tests, [mid("p.T::b"), mid("p.T::c")].into());
        assert_eq!(al.excluded["1.0"], vec![mid("p.T::a")]);
        assert_eq!(al.excluded["1.1"], vec![mid("p.T::d")]);

        let same = align_tests(&[a.clone(), a.clone()]).unwrap();
        assert_eq!(same.tests, a.test_names());
        assert!(same.excluded.is_empty());

        let c = dataset("2.0", &["p.T::x"]);
        assert!(matches!(
            align_tests(&[a.clone(), c]),
            Err(EvolutionError::EmptyIntersection)
        ));
        assert!(matches!(
            align_tests(&[a]),
            Err(EvolutionError::TooFewRevisions(1))
        ));
    }

    #[test]
    fn top_energy_selection() {
        let rev = RevisionDataset::new(
            "1.0",
            vec![record("1.0", "p.T::a", 0, 5.0), record("1.0", "p.T::b", 0, 3.0)],
        )
        .unwrap();
        let top = select_top_energy_tests(&rev, 1).unwrap();
        assert_eq!(top.tests, [mid("p.T::a")].into());
        assert!(!top.truncated);

        let tie = RevisionDataset::new(
            "1.0",
            vec![record("1.0", "p.T::b", 0, 5.0), record("1.0", "p.T::a", 0, 5.0)],
        )
        .unwrap();
        assert_eq!(select_top_energy_tests(&tie, 1).unwrap().tests, [mid("p.T::a")].into());

        let all = select_top_energy_tests(&rev, 10).unwrap();
        assert_eq!(all.tests.len(), 2);
        assert!(all.truncated);
        assert!(matches!(
            select_top_energy_tests(&rev, 0),
            Err(EvolutionError::InvalidK)
        ));
    }

    #[test]
    fn version_ordering() {
        let mut labels = vec!["2.2", "1.10", "1.9", "2.2.4", "1.3", "2.10.1", "2.8"];
        labels.sort_by(|a, b| compare_revision_labels(a, b));
        assert_eq!(labels, vec!["1.3", "1.9", "1.10", "2.2", "2.2.4", "2.8", "2.10.1"]);
    }

    #[test]
    fn proxy_score_arithmetic() {
        let pair = |i: usize, s: bool| PairSignificance {
            revision_a: format!("r{i}"),
            revision_b: "z".into(),
            mean_diff: 0.0,
            q: Some(0.0),
            p_adj: 1.0,
            significant: s,
        };
        let proxy: Vec<_> = [true, true, true, true, false]
            .iter()
            .enumerate()
            .map(|(i, s)| pair(i, *s))
            .collect();
        let target: Vec<_> = [true, true, true, false, false]
            .iter()
            .enumerate()
            .map(|(i, s)| pair(i, *s))
            .collect();
        let s = proxy_eval(&proxy, &target).unwrap();
        assert_eq!(
            s.confusion,
            Confusion {
                true_positives: 3,
                false_positives: 1,
                false_negatives: 0,
                true_negatives: 1
            }
        );
        assert!((s.accuracy - 0.8).abs() < 1e-15);
        assert_eq!(s.precision, Some(0.75));
        assert_eq!(s.recall, Some(1.0));
        assert!((s.f1.unwrap() - 6.0 / 7.0).abs() < 1e-15);

        let same = proxy_eval(&target, &target).unwrap();
        assert_eq!(same.accuracy, 1.0);

        let negatives: Vec<_> = (0..3).map(|i| pair(i, false)).collect();
        let s = proxy_eval(&negatives, &negatives).unwrap();
        assert_eq!((s.accuracy, s.f1), (1.0, None));

        assert!(matches!(
            proxy_eval(&proxy[..4], &target),
            Err(EvolutionError::MismatchedPairs)
        ));
    }

    #[test]
    fn summaries() {
        let mut rev = RevisionDataset::new(
            "1.0",
            vec![record("1.0", "p.T::a", 0, 1.0), record("1.0", "p.T::b", 0, 3.0)],
        )
        .unwrap();
        rev.records_mut()[0].ruapi = 0.2;
        rev.records_mut()[1].ruapi = 0.3;
        let s = revision_summaries(&[rev], Aggregation::Mean).unwrap();
        assert_eq!(s[0].mean_energy_mj, 2.0);
        assert!((s[0].sum_ruapi - 0.5).abs() < 1e-15);
        assert_eq!(s[0].mean_power_mw, 4.0);
    }

    #[test]
    fn ruapi_scopes() {
        let mk = |rev: &str, apis: u64| {
            let mut r = record(rev, "p.T::a", 0, 1.0);
            r.uapi = 2 * apis;
            r.api_interactions = apis;
            r
        };
        let mut revs = vec![
            RevisionDataset::new("1.0", vec![mk("1.0", 2)]).unwrap(),
            RevisionDataset::new("2.0", vec![mk("2.0", 4)]).unwrap(),
        ];
        assign_ruapi(&mut revs, RuapiScope::Study);
        assert!((revs[0].records()[0].ruapi - 4.0 / 7.0).abs() < 1e-15);
        assert!((revs[1].records()[0].ruapi - 8.0 / 7.0).abs() < 1e-15);
        assign_ruapi(&mut revs, RuapiScope::Revision);
        assert!((revs[0].records()[0].ruapi - 4.0 / 3.0).abs() < 1e-15);
        assert!((revs[1].records()[0].ruapi - 8.0 / 5.0).abs() < 1e-15);
    }

    #[test]
    fn identical_revisions_are_all_negative() {
        let recs = |rev: &str| {
            (0..4)
                .flat_map(|t| {
                    (0..3).map(move |s| {
                        let mut r = record(rev, &format!("p.T::t{t}"), s, 1.0 + t as f64 + 0.1 * s as f64);
                        r.uapi = 3 + t as u64;
                        r
                    })
                })
                .collect::<Vec<_>>()
        };
        let revs = vec![
            RevisionDataset::new("1.0", recs("1.0")).unwrap(),
            RevisionDataset::new("1.1", recs("1.1")).unwrap(),
        ];
        let report = evolve(revs, &EvolveOptions::default()).unwrap();
        for m in Metric::ALL {
            assert!(report.metric(m).pairs.iter().all(|p| !p.significant));
        }
        let proxy = report.proxy_vs_energy.unwrap();
        assert_eq!(proxy.accuracy, 1.0);
        assert_eq!(proxy.confusion.true_negatives, 1);
    }
}
