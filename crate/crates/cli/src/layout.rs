//! Revision directories on disk.
//!
//! ```text
//! <root>/<revision>/traces/<test_name>.<sample_index>.trace
//! <root>/<revision>/power/<test_name>.<sample_index>.power
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use apienergy_core::apimetric::ApiClassifier;
use apienergy_core::config::AnalysisConfig;
use apienergy_core::energy::parse_power;
use apienergy_core::evolution::{compare_revision_labels, RevisionDataset};
use apienergy_core::pipeline::{analyze_execution, AnalysisError, ExecutionAnalysis};
use apienergy_core::trace::{parse_trace, MethodId};
use rayon::prelude::*;

use crate::{CliError, ExitStatus};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecutionFiles {
    pub test: MethodId,
    pub sample: u32,
    pub trace: PathBuf,
    pub power: PathBuf,
}

/// Splits `<test_name>.<sample_index>.<ext>`.
pub fn parse_file_name(name: &str, ext: &str) -> Option<(MethodId, u32)> {
    let stem = name.strip_suffix(ext)?.strip_suffix('.')?;
    let (test, sample) = stem.rsplit_once('.')?;
    if sample.is_empty() || !sample.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    Some((test.parse().ok()?, sample.parse().ok()?))
}

fn list_files(dir: &Path, ext: &str) -> Result<BTreeMap<(MethodId, u32), PathBuf>, CliError> {
    let entries = fs::read_dir(dir)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", dir.display())))?;
    let mut out = BTreeMap::new();
    for entry in entries {
        let entry =
            entry.map_err(|e| CliError::usage(format!("cannot read {}: {e}", dir.display())))?;
        if !entry.file_type().is_ok_and(|t| t.is_file()) {
            continue;
        }
        let name = entry.file_name().to_string_lossy().into_owned();
        if name.starts_with('.') {
            continue;
        }
        let key = parse_file_name(&name, ext).ok_or_else(|| {
            CliError::usage(format!(
                "{}: expected <test_name>.<sample_index>.{ext}",
                entry.path().display()
            ))
        })?;
        out.insert(key, entry.path());
    }
    Ok(out)
}

/// Pairs every trace with its power stream.
pub fn discover_executions(revision_dir: &Path) -> Result<Vec<ExecutionFiles>, CliError> {
    let traces_dir = revision_dir.join("traces");
    let power_dir = revision_dir.join("power");
    for d in [&traces_dir, &power_dir] {
        if !d.is_dir() {
            return Err(CliError::usage(format!("missing directory {}", d.display())));
        }
    }
    let traces = list_files(&traces_dir, "trace")?;
    let mut power = list_files(&power_dir, "power")?;
    if traces.is_empty() {
        return Err(CliError::usage(format!(
            "{} contains no trace files",
            traces_dir.display()
        )));
    }
    let mut out = Vec::with_capacity(traces.len());
    for ((test, sample), trace) in traces {
        let Some(power_path) = power.remove(&(test.clone(), sample)) else {
            return Err(CliError::usage(format!(
                "test {test} sample {sample}: no power file in {}",
                power_dir.display()
            )));
        };
        out.push(ExecutionFiles {
            test,
            sample,
            trace,
            power: power_path,
        });
    }
    if let Some(((test, sample), _)) = power.into_iter().next() {
        return Err(CliError::usage(format!(
            "test {test} sample {sample}: no trace file in {}",
            traces_dir.display()
        )));
    }
    Ok(out)
}

/// Subdirectories holding a `traces/` directory, in version order.
pub fn discover_revisions(root: &Path) -> Result<Vec<(String, PathBuf)>, CliError> {
    let entries = fs::read_dir(root)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", root.display())))?;
    let mut out = Vec::new();
    for entry in entries {
        let entry =
            entry.map_err(|e| CliError::usage(format!("cannot read {}: {e}", root.display())))?;
        let path = entry.path();
        if path.join("traces").is_dir() {
            out.push((entry.file_name().to_string_lossy().into_owned(), path));
        }
    }
    out.sort_by(|a, b| compare_revision_labels(&a.0, &b.0));
    Ok(out)
}

pub fn revision_label(dir: &Path) -> Result<String, CliError> {
    let canonical = dir
        .canonicalize()
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", dir.display())))?;
    canonical
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .ok_or_else(|| CliError::usage(format!("{} has no directory name", dir.display())))
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))
}

pub fn analyze_files(
    revision: &str,
    files: &ExecutionFiles,
    classifier: &ApiClassifier,
    config: &AnalysisConfig,
) -> Result<ExecutionAnalysis, CliError> {
    let trace = parse_trace(&read(&files.trace)?)
        .map_err(|e| CliError::parse(format!("{}: {e}", files.trace.display())))?;
    let power = parse_power(&read(&files.power)?)
        .map_err(|e| CliError::parse(format!("{}: {e}", files.power.display())))?;
    for (path, test, sample) in [
        (&files.trace, &trace.test_name, trace.sample_index),
        (&files.power, &power.test_name, power.sample_index),
    ] {
        if *test != files.test || sample != files.sample {
            return Err(CliError::parse(format!(
                "{}: header names {test} sample {sample}, file name does not",
                path.display()
            )));
        }
    }
    analyze_execution(
        revision,
        &trace,
        &power,
        classifier,
        config.offset_for(&files.test),
    )
    .map_err(|e| {
        let status = match e {
            AnalysisError::Trace(_) => ExitStatus::Parse,
            AnalysisError::Energy(_) | AnalysisError::Mismatch { .. } => ExitStatus::Attribution,
        };
        CliError::new(
            status,
            format!("{} / {}: {e}", files.trace.display(), files.power.display()),
        )
    })
}

/// Analyzes every execution of a revision in parallel; results come back
/// in (test, sample) order. The first failure in that order is reported.
pub fn analyze_revision(
    revision: &str,
    dir: &Path,
    config: &AnalysisConfig,
) -> Result<Vec<ExecutionAnalysis>, CliError> {
    let files = discover_executions(dir)?;
    let results: Vec<Result<ExecutionAnalysis, CliError>> = files
        .par_iter()
        .map(|f| analyze_files(revision, f, &config.api_rules, config))
        .collect();
    results.into_iter().collect()
}

pub fn load_revision(
    revision: &str,
    dir: &Path,
    config: &AnalysisConfig,
) -> Result<RevisionDataset, CliError> {
    let records = analyze_revision(revision, dir, config)?
        .into_iter()
        .map(|a| a.record)
        .collect();
    RevisionDataset::new(revision, records).map_err(|e| CliError::usage(e.to_string()))
}
