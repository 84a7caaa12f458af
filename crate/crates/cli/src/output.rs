//! Output files. Everything is plain text: JSON, JSON lines and CSV.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use apienergy_core::evolution::{ComparisonReport, Metric, ProxyScore, RevisionSummary};
use serde::Serialize;

use crate::CliError;

pub const TESTS_FILE: &str = "tests.jsonl";
pub const METHODS_FILE: &str = "methods.jsonl";
pub const REPORT_FILE: &str = "report.json";
pub const PAIRWISE_FILE: &str = "pairwise.csv";
pub const PROXY_FILE: &str = "proxy.csv";
pub const REVISIONS_FILE: &str = "revisions.csv";
pub const SUMMARY_FILE: &str = "summary.txt";

pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::io(&path, e))
}

pub fn json_lines<T: Serialize>(items: impl IntoIterator<Item = T>) -> String {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(&item).expect("records serialize"));
        out.push('\n');
    }
    out
}

pub fn report_json(report: &ComparisonReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn revisions_csv(summaries: &[RevisionSummary]) -> String {
    let mut out = String::from("revision,mean_energy_mj,mean_power_mw,sum_ruapi\n");
    for s in summaries {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            s.revision, s.mean_energy_mj, s.mean_power_mw, s.sum_ruapi
        );
    }
    out
}

/// One row per (metric, revision pair); an empty `q` means unbounded.
pub fn pairwise_csv(report: &ComparisonReport) -> String {
    let mut out = String::from("metric,revision_a,revision_b,mean_diff,q,p_adj,significant\n");
    for m in Metric::ALL {
        for p in &report.metric(m).pairs {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                m.name(),
                p.revision_a,
                p.revision_b,
                p.mean_diff,
                opt(p.q),
                p.p_adj,
                p.significant
            );
        }
    }
    out
}

pub fn proxy_csv(report: &ComparisonReport) -> String {
    let mut out = String::from(
        "target,true_positives,false_positives,false_negatives,true_negatives,accuracy,precision,recall,f1\n",
    );
    for (target, score) in [
        ("energy", &report.proxy_vs_energy),
        ("power", &report.proxy_vs_power),
    ] {
        if let Some(s) = score {
            let c = s.confusion;
            let _ = writeln!(
                out,
                "{target},{},{},{},{},{},{},{},{}",
                c.true_positives,
                c.false_positives,
                c.false_negatives,
                c.true_negatives,
                s.accuracy,
                opt(s.precision),
                opt(s.recall),
                opt(s.f1)
            );
        }
    }
    out
}

fn summary_table(out: &mut String, summaries: &[RevisionSummary]) {
    let width = summaries
        .iter()
        .map(|s| s.revision.len())
        .max()
        .unwrap_or(0)
        .max("revision".len());
    let _ = writeln!(
        out,
        "{:<width$}  {:>16}  {:>14}  {:>12}",
        "revision", "mean_energy_mj", "mean_power_mw", "sum_ruapi"
    );
    for s in summaries {
        let _ = writeln!(
            out,
            "{:<width$}  {:>16.6}  {:>14.3}  {:>12.6}",
            s.revision, s.mean_energy_mj, s.mean_power_mw, s.sum_ruapi
        );
    }
}

fn proxy_line(out: &mut String, target: &str, score: &Option<ProxyScore>) {
    match score {
        Some(s) => {
            let c = s.confusion;
            let f1 = s.f1.map_or("undefined".to_owned(), |f| format!("{f:.3}"));
            let _ = writeln!(
                out,
                "rU_api as proxy for {target}: accuracy {:.3}, F1 {f1} (TP {}, FP {}, FN {}, TN {})",
                s.accuracy, c.true_positives, c.false_positives, c.false_negatives, c.true_negatives
            );
        }
        None => {
            let _ = writeln!(out, "rU_api as proxy for {target}: not available");
        }
    }
}

pub fn comparison_summary(report: &ComparisonReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} revisions, {} aligned tests, {} executions, alpha {}",
        report.revisions.len(),
        report.aligned_tests.len(),
        report.execution_records,
        report.alpha
    );
    for (rev, tests) in &report.excluded_tests {
        let _ = writeln!(out, "excluded from {rev}: {} tests", tests.len());
    }
    out.push('\n');
    summary_table(&mut out, &report.summaries);
    out.push('\n');
    for m in Metric::ALL {
        let a = report.metric(m);
        let sig = a.pairs.iter().filter(|p| p.significant).count();
        match (&a.anova, &a.error) {
            (Some(t), _) => {
                let f = t.f.map_or("undefined".to_owned(), |f| format!("{f:.4}"));
                let degenerate = t
                    .degeneracy
                    .map(|d| format!(" [degenerate: {d:?}]"))
                    .unwrap_or_default();
                let _ = writeln!(
                    out,
                    "{:<7} F({}, {}) = {f}, p = {:.4e}; {sig}/{} pairs significant{degenerate}",
                    m.name(),
                    t.df_between,
                    t.df_within,
                    t.p,
                    a.pairs.len()
                );
            }
            (None, e) => {
                let _ = writeln!(
                    out,
                    "{:<7} not computed: {}",
                    m.name(),
                    e.as_deref().unwrap_or("unknown")
                );
            }
        }
    }
    out.push('\n');
    proxy_line(&mut out, "energy", &report.proxy_vs_energy);
    proxy_line(&mut out, "power", &report.proxy_vs_power);
    out
}

/// Summary for analysis output without a comparison.
pub fn single_revision_summary(summaries: &[RevisionSummary], executions: usize) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} revision(s), {executions} executions; no comparisons (needs evolve output)\n",
        summaries.len()
    );
    summary_table(&mut out, summaries);
    out
}
