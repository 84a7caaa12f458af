//! Deterministic synthetic fixtures: per revision, trace and power files for
//! every (test, sample) plus a ground-truth manifest.
//!
//! Randomness comes from ChaCha8 seeded with `seed_from_u64(seed)`. Call
//! trees of test `t` use stream `t`; noise of revision `r`, test `t`,
//! sample `s` uses stream `2^63 | r << 40 | t << 20 | s`.
//!
//! Each test has one base call tree shared by all revisions and samples. A
//! revision's `api_call_multiplier` repeats (or drops) API call sites
//! round-robin so that the tree carries `round(T * multiplier)` API calls,
//! `T` being the base count. Repeats follow their original call
//! back-to-back. All event times are multiples of the sample spacing, and
//! power is `base + api_cost` at grid points inside `[start, end)` of an
//! API call, so the trapezoid integral of a noise-free stream equals the
//! construction energy exactly.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::apimetric::{uapi, ApiClassifier};
use crate::callgraph::build_call_trees;
use crate::energy::{parse_power, write_power, PowerProfile, PowerSample};
use crate::evolution::compare_revision_labels;
use crate::trace::{parse_trace, write_trace, MethodId, TestTrace, TraceError, TraceEvent};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const MANIFEST_FORMAT: &str = "apienergy-synth-manifest v1";
const THREAD: u64 = 1;
const MAX_INDEX: usize = 1 << 20;

const API_POOL: &[(&str, &str, &str)] = &[
    ("java.util", "ArrayList", "add"),
    ("java.util", "HashMap", "put"),
    ("java.util", "LinkedHashMap", "get"),
    ("java.lang", "StringBuilder", "append"),
    ("java.io", "File", "exists"),
    ("android.os", "Parcel", "writeInt"),
    ("android.util", "Log", "d"),
    ("android.content", "Intent", "putExtra"),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RevisionSpec {
    pub label: String,
    pub api_call_multiplier: f64,
    pub base_power_mw: f64,
    pub api_cost_mw: f64,
    pub noise_stddev_mw: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestShape {
    pub count: usize,
    pub max_depth: usize,
    #[serde(default = "one")]
    pub min_branching: usize,
    pub max_branching: usize,
    /// Probability that a generated call is an API call.
    pub api_density: f64,
    /// Work time before each child call and before each frame exits.
    pub step_us: u64,
    /// Duration of one API call; may be 0.
    pub api_call_us: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    pub seed: u64,
    pub samples_per_test: u32,
    /// Must divide 1 000 000 so samples fall on whole microseconds.
    pub rate_hz: u32,
    pub tests: TestShape,
    pub revisions: Vec<RevisionSpec>,
}

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid synth spec: {0}")]
    Invalid(String),
    #[error("invalid synth spec: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("manifest: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Trace(#[from] TraceError),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> SynthError + '_ {
    move |source| SynthError::Io {
        path: path.to_owned(),
        source,
    }
}

fn one() -> usize {
    1
}

fn valid_label(label: &str) -> bool {
    !label.is_empty()
        && label != "."
        && label != ".."
        && label
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '.' | '-' | '_'))
}

impl SynthSpec {
    pub fn from_toml_str(text: &str) -> Result<Self, SynthError> {
        let spec: Self = toml::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("spec serializes")
    }

    /// Sample spacing in µs.
    pub fn dt_us(&self) -> u64 {
        1_000_000 / u64::from(self.rate_hz)
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::Invalid(m));
        if self.samples_per_test == 0 || self.samples_per_test as usize >= MAX_INDEX {
            return bad(format!("samples_per_test must be in 1..{MAX_INDEX}"));
        }
        if self.rate_hz == 0 || 1_000_000 % self.rate_hz != 0 {
            return bad(format!("rate_hz {} must divide 1000000", self.rate_hz));
        }
        let t = &self.tests;
        if t.count == 0 || t.count >= MAX_INDEX {
            return bad(format!("tests.count must be in 1..{MAX_INDEX}"));
        }
        if t.max_depth == 0 || t.min_branching == 0 || t.max_branching < t.min_branching {
            return bad(
                "tests need max_depth >= 1 and 1 <= min_branching <= max_branching".into(),
            );
        }
        if !(0.0..=1.0).contains(&t.api_density) {
            return bad(format!("tests.api_density {} outside [0, 1]", t.api_density));
        }
        let dt = self.dt_us();
        if t.step_us == 0 || t.step_us % dt != 0 {
            return bad(format!("tests.step_us must be a positive multiple of {dt}"));
        }
        if t.api_call_us % dt != 0 {
            return bad(format!("tests.api_call_us must be a multiple of {dt}"));
        }
        if self.revisions.is_empty() || self.revisions.len() >= 1 << 23 {
            return bad("at least one revision is required".into());
        }
        let mut labels = BTreeSet::new();
        for r in &self.revisions {
            if !valid_label(&r.label) {
                return bad(format!("revision label `{}` is not a plain name", r.label));
            }
            if !labels.insert(r.label.as_str()) {
                return bad(format!("duplicate revision label `{}`", r.label));
            }
            if !(r.api_call_multiplier.is_finite() && r.api_call_multiplier > 0.0) {
                return bad(format!("revision `{}`: api_call_multiplier must be > 0", r.label));
            }
            for (name, v) in [
                ("base_power_mw", r.base_power_mw),
                ("api_cost_mw", r.api_cost_mw),
                ("noise_stddev_mw", r.noise_stddev_mw),
            ] {
                if !(v.is_finite() && v >= 0.0) {
                    return bad(format!("revision `{}`: {name} must be >= 0", r.label));
                }
            }
        }
        Ok(())
    }

    pub fn test_name(&self, index: usize) -> MethodId {
        let width = self.tests.count.to_string().len().max(2);
        MethodId::new("synth.suite", format!("Case{index:0width$}Test"), "run")
            .expect("valid generated name")
    }
}

/// Classifier matching the API methods the generator emits.
pub fn classifier() -> ApiClassifier {
    ApiClassifier::android_platform()
}

#[derive(Debug, Clone)]
enum Shape {
    Internal(MethodId, Vec<Shape>),
    Api(MethodId),
}

fn random_api(rng: &mut ChaCha8Rng) -> Shape {
    let (p, c, m) = API_POOL[rng.random_range(0..API_POOL.len())];
    Shape::Api(MethodId::new(p, c, m).expect("valid pool entry"))
}

fn random_internal(rng: &mut ChaCha8Rng) -> MethodId {
    let module = rng.random_range(0..8);
    let op = rng.random_range(0..4);
    MethodId::new("synth.lib", format!("Module{module}"), format!("op{op}"))
        .expect("valid generated name")
}

fn grow(rng: &mut ChaCha8Rng, shape: &TestShape, depth: usize) -> Vec<Shape> {
    let n = rng.random_range(shape.min_branching..=shape.max_branching);
    (0..n)
        .map(|_| {
            if rng.random_bool(shape.api_density) {
                random_api(rng)
            } else if depth + 1 < shape.max_depth {
                let method = random_internal(rng);
                Shape::Internal(method, grow(rng, shape, depth + 1))
            } else {
                Shape::Internal(random_internal(rng), Vec::new())
            }
        })
        .collect()
}

fn count_api(shape: &Shape) -> u64 {
    match shape {
        Shape::Api(_) => 1,
        Shape::Internal(_, children) => children.iter().map(count_api).sum(),
    }
}

fn base_tree(spec: &SynthSpec, index: usize) -> Shape {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(index as u64);
    let mut children = if spec.tests.max_depth > 1 {
        grow(&mut rng, &spec.tests, 1)
    } else {
        Vec::new()
    };
    if children.iter().map(count_api).sum::<u64>() == 0 {
        children.push(random_api(&mut rng));
    }
    Shape::Internal(spec.test_name(index), children)
}

/// Number of API calls per base call site for a target total.
fn repetitions(base: u64, multiplier: f64) -> (u64, Vec<u64>) {
    let target = ((base as f64 * multiplier).round() as u64).max(1);
    let reps = (0..base)
        .map(|k| target / base + u64::from(k < target % base))
        .collect();
    (target, reps)
}

/// Event timeline of one (revision, test) pair.
#[derive(Debug, Clone)]
struct Layout {
    events: Vec<TraceEvent>,
    api_windows: Vec<(u64, u64)>,
    duration_us: u64,
    api_time_us: u64,
    node_count: usize,
    api_interactions: u64,
}

struct LayoutBuilder<'a> {
    shape: &'a TestShape,
    reps: &'a [u64],
    site: usize,
    t_us: u64,
    out: Layout,
}

impl LayoutBuilder<'_> {
    fn enter(&mut self, m: &MethodId) {
        self.out
            .events
            .push(TraceEvent::enter(m.clone(), THREAD, self.t_us * 1000));
        self.out.node_count += 1;
    }

    fn exit(&mut self, m: &MethodId) {
        self.out
            .events
            .push(TraceEvent::exit(m.clone(), THREAD, self.t_us * 1000));
    }

    fn emit(&mut self, node: &Shape) {
        match node {
            Shape::Api(m) => {
                let reps = self.reps[self.site];
                self.site += 1;
                if reps == 0 {
                    return;
                }
                self.t_us += self.shape.step_us;
                for _ in 0..reps {
                    let start = self.t_us;
                    self.enter(m);
                    self.t_us += self.shape.api_call_us;
                    self.exit(m);
                    self.out.api_interactions += 1;
                    if self.t_us > start {
                        self.out.api_windows.push((start, self.t_us));
                        self.out.api_time_us += self.t_us - start;
                    }
                }
            }
            Shape::Internal(m, children) => {
                self.t_us += self.shape.step_us;
                self.frame(m, children);
            }
        }
    }

    fn frame(&mut self, m: &MethodId, children: &[Shape]) {
        self.enter(m);
        for c in children {
            self.emit(c);
        }
        self.t_us += self.shape.step_us;
        self.exit(m);
    }
}

fn layout(tree: &Shape, shape: &TestShape, multiplier: f64) -> Layout {
    let (_, reps) = repetitions(count_api(tree), multiplier);
    let mut b = LayoutBuilder {
        shape,
        reps: &reps,
        site: 0,
        t_us: 0,
        out: Layout {
            events: Vec::new(),
            api_windows: Vec::new(),
            duration_us: 0,
            api_time_us: 0,
            node_count: 0,
            api_interactions: 0,
        },
    };
    match tree {
        Shape::Internal(m, children) => b.frame(m, children),
        Shape::Api(_) => b.emit(tree),
    }
    let mut out = b.out;
    out.duration_us = b.t_us;
    out
}

fn power_profile(
    spec: &SynthSpec,
    rev_index: usize,
    rev: &RevisionSpec,
    test_index: usize,
    test_name: &MethodId,
    sample: u32,
    lay: &Layout,
) -> PowerProfile {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(
        (1 << 63) | ((rev_index as u64) << 40) | ((test_index as u64) << 20) | u64::from(sample),
    );
    let noise = (rev.noise_stddev_mw > 0.0)
        .then(|| Normal::new(0.0, rev.noise_stddev_mw).expect("finite positive sigma"));
    let dt = spec.dt_us();
    let mut window = lay.api_windows.iter().peekable();
    let samples = (0..=lay.duration_us / dt)
        .map(|k| {
            let t = k * dt;
            while window.peek().is_some_and(|w| w.1 <= t) {
                window.next();
            }
            let active = window.peek().is_some_and(|w| w.0 <= t);
            let mut p = rev.base_power_mw + if active { rev.api_cost_mw } else { 0.0 };
            if let Some(n) = &noise {
                p += n.sample(&mut rng);
            }
            PowerSample {
                t_us: t as f64,
                power_mw: (p.max(0.0) * 1000.0).round() / 1000.0,
            }
        })
        .collect();
    PowerProfile {
        test_name: test_name.clone(),
        sample_index: sample,
        nominal_rate_hz: f64::from(spec.rate_hz),
        samples,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestTruth {
    pub api_interactions: u64,
    pub node_count: usize,
    pub duration_us: u64,
    pub api_time_us: u64,
    /// Noise-free energy of one execution.
    pub expected_energy_mj: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RevisionTruth {
    pub label: String,
    pub api_call_multiplier: f64,
    pub total_api_interactions: u64,
    pub tests: BTreeMap<String, TestTruth>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairTruth {
    pub revision_a: String,
    pub revision_b: String,
    /// Some test has a different number of API calls.
    pub api_change: bool,
    /// Some test has a different noise-free energy.
    pub energy_change: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FileKind {
    Trace,
    Power,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    /// Relative to the fixture root, `/`-separated.
    pub path: String,
    pub kind: FileKind,
    pub revision: String,
    pub test: String,
    pub sample: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub format: String,
    pub spec: SynthSpec,
    /// In version order.
    pub revisions: Vec<RevisionTruth>,
    /// Every unordered pair, earlier revision first.
    pub pairs: Vec<PairTruth>,
    pub files: Vec<FileEntry>,
}

impl GroundTruth {
    pub fn revision(&self, label: &str) -> Option<&RevisionTruth> {
        self.revisions.iter().find(|r| r.label == label)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn load(path: &Path) -> Result<Self, SynthError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// One generated execution.
#[derive(Debug, Clone)]
pub struct SynthExecution<'a> {
    pub revision: &'a str,
    pub trace: TestTrace,
    pub power: PowerProfile,
}

pub fn trace_file_name(test: &MethodId, sample: u32) -> String {
    format!("{test}.{sample}.trace")
}

pub fn power_file_name(test: &MethodId, sample: u32) -> String {
    format!("{test}.{sample}.power")
}

/// Generates every execution in (revision, test, sample) order and builds
/// the ground truth without touching the filesystem.
pub fn generate_with<E>(
    spec: &SynthSpec,
    mut sink: impl FnMut(SynthExecution<'_>) -> Result<(), E>,
) -> Result<GroundTruth, E>
where
    E: From<SynthError>,
{
    spec.validate()?;
    let trees: Vec<Shape> = (0..spec.tests.count).map(|i| base_tree(spec, i)).collect();
    let mut revisions = Vec::with_capacity(spec.revisions.len());
    let mut files = Vec::new();
    for (r, rev) in spec.revisions.iter().enumerate() {
        let mut tests = BTreeMap::new();
        for (t, tree) in trees.iter().enumerate() {
            let name = spec.test_name(t);
            let lay = layout(tree, &spec.tests, rev.api_call_multiplier);
            tests.insert(
                name.to_string(),
                TestTruth {
                    api_interactions: lay.api_interactions,
                    node_count: lay.node_count,
                    duration_us: lay.duration_us,
                    api_time_us: lay.api_time_us,
                    expected_energy_mj: (rev.base_power_mw * lay.duration_us as f64
                        + rev.api_cost_mw * lay.api_time_us as f64)
                        * 1e-6,
                },
            );
            for s in 0..spec.samples_per_test {
                let trace = TestTrace {
                    test_name: name.clone(),
                    sample_index: s,
                    events: lay.events.clone(),
                };
                let power = power_profile(spec, r, rev, t, &name, s, &lay);
                for (kind, file) in [
                    (FileKind::Trace, format!("traces/{}", trace_file_name(&name, s))),
                    (FileKind::Power, format!("power/{}", power_file_name(&name, s))),
                ] {
                    files.push(FileEntry {
                        path: format!("{}/{file}", rev.label),
                        kind,
                        revision: rev.label.clone(),
                        test: name.to_string(),
                        sample: s,
                    });
                }
                sink(SynthExecution {
                    revision: &rev.label,
                    trace,
                    power,
                })?;
            }
        }
        revisions.push(RevisionTruth {
            label: rev.label.clone(),
            api_call_multiplier: rev.api_call_multiplier,
            total_api_interactions: tests.values().map(|t| t.api_interactions).sum(),
            tests,
        });
    }
    revisions.sort_by(|a, b| compare_revision_labels(&a.label, &b.label));

    let mut pairs = Vec::new();
    for (i, a) in revisions.iter().enumerate() {
        for b in &revisions[i + 1..] {
            let differs = |f: fn(&TestTruth) -> f64| {
                a.tests.iter().any(|(name, ta)| {
                    let (x, y) = (f(ta), f(&b.tests[name]));
                    (x - y).abs() > 1e-9 * x.abs().max(y.abs())
                })
            };
            pairs.push(PairTruth {
                revision_a: a.label.clone(),
                revision_b: b.label.clone(),
                api_change: differs(|t| t.api_interactions as f64),
                energy_change: differs(|t| t.expected_energy_mj),
            });
        }
    }
    Ok(GroundTruth {
        format: MANIFEST_FORMAT.to_owned(),
        spec: spec.clone(),
        revisions,
        pairs,
        files,
    })
}

/// Writes the fixture below `out` and returns its manifest, which is also
/// stored as `out/manifest.json`.
pub fn generate(spec: &SynthSpec, out: &Path) -> Result<GroundTruth, SynthError> {
    spec.validate()?;
    for rev in &spec.revisions {
        for sub in ["traces", "power"] {
            let dir = out.join(&rev.label).join(sub);
            fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        }
    }
    let truth = generate_with(spec, |ex: SynthExecution<'_>| -> Result<(), SynthError> {
        let dir = out.join(ex.revision);
        let trace_path = dir
            .join("traces")
            .join(trace_file_name(&ex.trace.test_name, ex.trace.sample_index));
        fs::write(&trace_path, write_trace(&ex.trace)?).map_err(io_err(&trace_path))?;
        let power_path = dir
            .join("power")
            .join(power_file_name(&ex.power.test_name, ex.power.sample_index));
        fs::write(&power_path, write_power(&ex.power)).map_err(io_err(&power_path))?;
        Ok(())
    })?;
    let manifest = out.join(MANIFEST_FILE);
    fs::write(&manifest, truth.to_json()).map_err(io_err(&manifest))?;
    Ok(truth)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureViolation {
    pub path: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct VerifyReport {
    pub files_checked: usize,
    pub violations: Vec<FixtureViolation>,
}

impl VerifyReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, path: &str, message: impl Into<String>) {
        self.violations.push(FixtureViolation {
            path: path.to_owned(),
            message: message.into(),
        });
    }
}

fn check_trace(entry: &FileEntry, bytes: &[u8], truth: &TestTruth, report: &mut VerifyReport) {
    let trace = match parse_trace(bytes) {
        Ok(t) => t,
        Err(e) => return report.push(&entry.path, e.to_string()),
    };
    if trace.test_name.to_string() != entry.test || trace.sample_index != entry.sample {
        return report.push(&entry.path, "header does not match file name");
    }
    let tree = match build_call_trees(&trace) {
        Ok(t) => t,
        Err(e) => return report.push(&entry.path, e.to_string()),
    };
    let profile = uapi(&tree, &classifier());
    if profile.total_api_interactions != truth.api_interactions {
        report.push(
            &entry.path,
            format!(
                "{} API interactions, manifest says {}",
                profile.total_api_interactions, truth.api_interactions
            ),
        );
    }
    if tree.len() != truth.node_count {
        report.push(
            &entry.path,
            format!("{} call nodes, manifest says {}", tree.len(), truth.node_count),
        );
    }
}

fn check_power(
    entry: &FileEntry,
    bytes: &[u8],
    truth: &TestTruth,
    dt_us: u64,
    report: &mut VerifyReport,
) {
    let power = match parse_power(bytes) {
        Ok(p) => p,
        Err(e) => return report.push(&entry.path, e.to_string()),
    };
    if power.test_name.to_string() != entry.test || power.sample_index != entry.sample {
        return report.push(&entry.path, "header does not match file name");
    }
    let expected = truth.duration_us / dt_us + 1;
    if power.samples.len() as u64 != expected {
        report.push(
            &entry.path,
            format!("{} samples, expected {expected}", power.samples.len()),
        );
    }
}

fn listed_dir_files(dir: &Path) -> Vec<String> {
    let Ok(read) = fs::read_dir(dir) else {
        return Vec::new();
    };
    let mut names: Vec<String> = read
        .filter_map(Result::ok)
        .filter(|e| e.file_type().is_ok_and(|t| t.is_file()))
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    names
}

/// Re-reads every file of a generated fixture and checks it against the
/// manifest.
pub fn verify_fixture(dir: &Path, manifest: &GroundTruth) -> VerifyReport {
    let mut report = VerifyReport::default();
    let dt_us = manifest.spec.dt_us();
    for rev in &manifest.revisions {
        let sum: u64 = rev.tests.values().map(|t| t.api_interactions).sum();
        if sum != rev.total_api_interactions {
            report.push(
                &rev.label,
                format!(
                    "manifest total {} differs from per-test sum {sum}",
                    rev.total_api_interactions
                ),
            );
        }
    }
    let listed: BTreeSet<&str> = manifest.files.iter().map(|f| f.path.as_str()).collect();
    for entry in &manifest.files {
        let truth = match manifest
            .revision(&entry.revision)
            .and_then(|r| r.tests.get(&entry.test))
        {
            Some(t) => t,
            None => {
                report.push(&entry.path, "no ground truth for this file");
                continue;
            }
        };
        let bytes = match fs::read(dir.join(&entry.path)) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                report.push(&entry.path, "missing file");
                continue;
            }
            Err(e) => {
                report.push(&entry.path, e.to_string());
                continue;
            }
        };
        report.files_checked += 1;
        match entry.kind {
            FileKind::Trace => check_trace(entry, &bytes, truth, &mut report),
            FileKind::Power => check_power(entry, &bytes, truth, dt_us, &mut report),
        }
    }
    for rev in &manifest.revisions {
        for sub in ["traces", "power"] {
            for name in listed_dir_files(&dir.join(&rev.label).join(sub)) {
                let path = format!("{}/{sub}/{name}", rev.label);
                if !listed.contains(path.as_str()) {
                    report.push(&path, "file not listed in manifest");
                }
            }
        }
    }
    report
}
