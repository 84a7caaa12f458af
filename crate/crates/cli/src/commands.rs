use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use apienergy_core::config::AnalysisConfig;
use apienergy_core::evolution::{
    assign_ruapi, evolve as run_evolve, revision_summaries, ComparisonReport, EvolutionError,
    ExecutionRecord, RevisionDataset,
};
use apienergy_core::synth::{generate, SynthError, SynthSpec};

use crate::layout::{analyze_revision, discover_revisions, load_revision, revision_label};
use crate::output::{self, write_file};
use crate::{Cli, CliError, ExitStatus};

/// Global flags merged with the config file.
#[derive(Debug, Clone)]
pub struct Settings {
    pub config: AnalysisConfig,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
}

impl Settings {
    pub fn resolve(cli: &Cli) -> Result<Self, CliError> {
        let mut config = match &cli.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| {
                    CliError::usage(format!("cannot read config {}: {e}", path.display()))
                })?;
                AnalysisConfig::from_toml_str(&text)
                    .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?
            }
            None => AnalysisConfig::default(),
        };
        if let Some(alpha) = cli.alpha {
            config.alpha = alpha;
            config
                .validate()
                .map_err(|e| CliError::usage(format!("--alpha: {e}")))?;
        }
        if cli.jobs == Some(0) {
            return Err(CliError::usage("--jobs must be at least 1"));
        }
        Ok(Self {
            config,
            jobs: cli.jobs,
            out: cli.out.clone(),
        })
    }

    fn out_dir(&self, default: PathBuf) -> PathBuf {
        self.out.clone().unwrap_or(default)
    }

    fn in_pool<T: Send>(&self, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = self.jobs {
            builder = builder.num_threads(n);
        }
        let pool = builder
            .build()
            .map_err(|e| CliError::new(ExitStatus::Io, format!("cannot start workers: {e}")))?;
        Ok(pool.install(f))
    }
}

pub fn analyze(dir: &Path, settings: &Settings) -> Result<ExitStatus, CliError> {
    let label = revision_label(dir)?;
    let analyses = settings.in_pool(|| analyze_revision(&label, dir, &settings.config))??;
    let method_count: usize = analyses.iter().map(|a| a.methods.len()).sum();
    let mut methods = Vec::with_capacity(method_count);
    let mut records = Vec::with_capacity(analyses.len());
    for a in analyses {
        methods.extend(a.methods);
        records.push(a.record);
    }
    let dataset =
        RevisionDataset::new(label.as_str(), records).map_err(|e| CliError::usage(e.to_string()))?;
    let mut datasets = [dataset];
    assign_ruapi(&mut datasets, settings.config.ruapi_scope);

    let out = settings.out_dir(dir.join("analysis"));
    write_file(&out, output::TESTS_FILE, &output::json_lines(datasets[0].records()))?;
    write_file(&out, output::METHODS_FILE, &output::json_lines(&methods))?;
    println!(
        "{label}: {} executions, {method_count} method records -> {}",
        datasets[0].records().len(),
        out.display()
    );
    Ok(ExitStatus::Success)
}

fn evolution_error(e: EvolutionError) -> CliError {
    match e {
        EvolutionError::Energy(_) => CliError::new(ExitStatus::Attribution, e.to_string()),
        _ => CliError::usage(e.to_string()),
    }
}

pub fn evolve(root: &Path, settings: &Settings) -> Result<ExitStatus, CliError> {
    let revisions = discover_revisions(root)?;
    if revisions.len() < 2 {
        return Err(CliError::usage(format!(
            "{} needs at least 2 revision directories with traces/, found {}",
            root.display(),
            revisions.len()
        )));
    }
    let datasets = settings.in_pool(|| {
        revisions
            .iter()
            .map(|(label, dir)| load_revision(label, dir, &settings.config))
            .collect::<Result<Vec<_>, _>>()
    })??;
    let report = run_evolve(datasets, &settings.config.evolve_options()).map_err(evolution_error)?;

    let out = settings.out_dir(root.join("evolution"));
    write_file(&out, output::REPORT_FILE, &output::report_json(&report))?;
    write_file(&out, output::PAIRWISE_FILE, &output::pairwise_csv(&report))?;
    write_file(&out, output::PROXY_FILE, &output::proxy_csv(&report))?;
    write_file(&out, output::REVISIONS_FILE, &output::revisions_csv(&report.summaries))?;
    let summary = output::comparison_summary(&report);
    write_file(&out, output::SUMMARY_FILE, &summary)?;
    print!("{summary}");

    if report.is_degenerate() {
        eprintln!("warning: degenerate statistics, see {}", out.join(output::SUMMARY_FILE).display());
        return Ok(ExitStatus::Degenerate);
    }
    Ok(ExitStatus::Success)
}

pub fn synth(spec_path: &Path, out: &Path) -> Result<ExitStatus, CliError> {
    let text = fs::read_to_string(spec_path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", spec_path.display())))?;
    let spec = SynthSpec::from_toml_str(&text)
        .map_err(|e| CliError::usage(format!("{}: {e}", spec_path.display())))?;
    let truth = generate(&spec, out).map_err(|e| match e {
        SynthError::Io { .. } => CliError::new(ExitStatus::Io, e.to_string()),
        _ => CliError::usage(e.to_string()),
    })?;
    println!(
        "{} revisions, {} files -> {}",
        truth.revisions.len(),
        truth.files.len(),
        out.display()
    );
    Ok(ExitStatus::Success)
}

fn read_existing(path: &Path) -> Result<Option<String>, CliError> {
    match fs::read_to_string(path) {
        Ok(s) => Ok(Some(s)),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(CliError::parse(format!("{}: {e}", path.display()))),
    }
}

pub fn report(dir: &Path, settings: &Settings) -> Result<ExitStatus, CliError> {
    let out = settings.out_dir(dir.to_owned());
    let report_path = dir.join(output::REPORT_FILE);
    if let Some(text) = read_existing(&report_path)? {
        let report: ComparisonReport = serde_json::from_str(&text)
            .map_err(|e| CliError::parse(format!("{}: {e}", report_path.display())))?;
        write_file(&out, output::REVISIONS_FILE, &output::revisions_csv(&report.summaries))?;
        let summary = output::comparison_summary(&report);
        write_file(&out, output::SUMMARY_FILE, &summary)?;
        print!("{summary}");
        return Ok(ExitStatus::Success);
    }

    let tests_path = dir.join(output::TESTS_FILE);
    let Some(text) = read_existing(&tests_path)? else {
        return Err(CliError::usage(format!(
            "{} has neither {} nor {}",
            dir.display(),
            output::REPORT_FILE,
            output::TESTS_FILE
        )));
    };
    let mut by_revision: BTreeMap<String, Vec<ExecutionRecord>> = BTreeMap::new();
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let record: ExecutionRecord = serde_json::from_str(line).map_err(|e| {
            CliError::parse(format!("{}:{}: {e}", tests_path.display(), i + 1))
        })?;
        by_revision.entry(record.revision.clone()).or_default().push(record);
    }
    let executions = by_revision.values().map(Vec::len).sum();
    let datasets = by_revision
        .into_iter()
        .map(|(label, records)| RevisionDataset::new(label, records))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::parse(format!("{}: {e}", tests_path.display())))?;
    if datasets.is_empty() {
        return Err(CliError::parse(format!("{}: no records", tests_path.display())));
    }
    let summaries = revision_summaries(&datasets, settings.config.aggregation)
        .map_err(|e| CliError::parse(format!("{}: {e}", tests_path.display())))?;
    write_file(&out, output::REVISIONS_FILE, &output::revisions_csv(&summaries))?;
    let summary = output::single_revision_summary(&summaries, executions);
    write_file(&out, output::SUMMARY_FILE, &summary)?;
    print!("{summary}");
    Ok(ExitStatus::Success)
}
