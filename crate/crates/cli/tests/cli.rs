use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use apienergy_core::synth::{GroundTruth, MANIFEST_FILE};

fn apienergy(args: &[&str]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_apienergy"));
    for var in ["CONFIG", "ALPHA", "JOBS", "OUT"] {
        cmd.env_remove(format!("APIENERGY_{var}"));
    }
    cmd.args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn spec(revisions: &[(&str, f64)], tests: usize, samples: u32, noise: f64) -> String {
    let mut s = format!(
        "seed = 7\nsamples_per_test = {samples}\nrate_hz = 10000\n\n[tests]\ncount = {tests}\n\
         max_depth = 3\nmin_branching = 2\nmax_branching = 2\napi_density = 0.4\nstep_us = 100\napi_call_us = 200\n"
    );
    for (label, mult) in revisions {
        s += &format!(
            "\n[[revisions]]\nlabel = \"{label}\"\napi_call_multiplier = {mult}\nbase_power_mw = 400.0\n\
             api_cost_mw = 1000.0\nnoise_stddev_mw = {noise}\n"
        );
    }
    s
}

/// Writes a spec into `dir` and synthesizes a fixture under `dir/fixture`.
fn fixture(dir: &Path, spec_text: &str) -> (PathBuf, GroundTruth) {
    let spec_path = dir.join("spec.toml");
    fs::write(&spec_path, spec_text).unwrap();
    let root = dir.join("fixture");
    let out = apienergy(&["synth", p(&spec_path), p(&root)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let truth = GroundTruth::load(&root.join(MANIFEST_FILE)).unwrap();
    (root, truth)
}

fn count_files(dir: &Path) -> usize {
    fs::read_dir(dir).map_or(0, |d| d.count())
}

fn line_count(path: &Path) -> usize {
    fs::read_to_string(path).unwrap().lines().count()
}

#[test]
fn synth_writes_one_trace_and_power_file_per_execution() {
    let tmp = tempfile::tempdir().unwrap();
    let (root, truth) = fixture(tmp.path(), &spec(&[("1.0", 1.0), ("1.1", 2.0)], 3, 2, 5.0));
    let mut traces = 0;
    let mut power = 0;
    for rev in ["1.0", "1.1"] {
        traces += count_files(&root.join(rev).join("traces"));
        power += count_files(&root.join(rev).join("power"));
    }
    assert_eq!((traces, power), (12, 12));
    assert_eq!(truth.files.len(), 24);
}

#[test]
fn invalid_spec_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let spec_path = tmp.path().join("bad.toml");
    fs::write(&spec_path, spec(&[("1.0", 0.0)], 1, 1, 0.0)).unwrap();
    let out = apienergy(&["synth", p(&spec_path), p(&tmp.path().join("o"))]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));

    fs::write(&spec_path, "seed = \"x\"").unwrap();
    assert_eq!(code(&apienergy(&["synth", p(&spec_path), p(&tmp.path().join("o"))])), 2);
    assert_eq!(code(&apienergy(&["synth", p(&tmp.path().join("none.toml")), "o"])), 2);
}

#[test]
fn analyze_record_counts_match_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let (root, truth) = fixture(tmp.path(), &spec(&[("1.0", 1.0), ("1.1", 1.5)], 4, 3, 5.0));
    for rev in &truth.revisions {
        let dir = root.join(&rev.label);
        let out = apienergy(&["analyze", p(&dir), "--jobs", "2"]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        let samples = truth.spec.samples_per_test as usize;
        let nodes: usize = rev.tests.values().map(|t| t.node_count).sum();
        assert_eq!(line_count(&dir.join("analysis/tests.jsonl")), rev.tests.len() * samples);
        assert_eq!(line_count(&dir.join("analysis/methods.jsonl")), nodes * samples);
    }
}

#[test]
fn layout_errors_exit_2_and_name_the_test() {
    let tmp = tempfile::tempdir().unwrap();
    let empty = tmp.path().join("empty");
    fs::create_dir_all(empty.join("traces")).unwrap();
    fs::create_dir_all(empty.join("power")).unwrap();
    assert_eq!(code(&apienergy(&["analyze", p(&empty)])), 2);
    assert_eq!(code(&apienergy(&["analyze", p(&tmp.path().join("missing"))])), 2);

    let (root, truth) = fixture(tmp.path(), &spec(&[("1.0", 1.0)], 2, 1, 0.0));
    let power = truth.files.iter().find(|f| f.path.ends_with(".power")).unwrap();
    fs::remove_file(root.join(&power.path)).unwrap();
    let out = apienergy(&["analyze", p(&root.join("1.0"))]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains(&power.test), "{}", stderr(&out));
}

#[test]
fn parse_and_attribution_errors_have_their_own_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let (root, truth) = fixture(tmp.path(), &spec(&[("1.0", 1.0)], 1, 1, 0.0));
    let dir = root.join("1.0");
    let trace = root.join(&truth.files.iter().find(|f| f.path.ends_with(".trace")).unwrap().path);
    let power = root.join(&truth.files.iter().find(|f| f.path.ends_with(".power")).unwrap().path);
    let original_trace = fs::read_to_string(&trace).unwrap();
    let original_power = fs::read_to_string(&power).unwrap();

    fs::write(&trace, format!("{original_trace}garbage line\n")).unwrap();
    let out = apienergy(&["analyze", p(&dir)]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
    assert!(stderr(&out).contains("line"), "{}", stderr(&out));
    fs::write(&trace, &original_trace).unwrap();

    let lines: Vec<&str> = original_power.lines().collect();
    fs::write(&power, lines[..lines.len() / 2].join("\n") + "\n").unwrap();
    let out = apienergy(&["analyze", p(&dir)]);
    assert_eq!(code(&out), 4, "{}", stderr(&out));
}

#[test]
fn bad_global_flags_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let (root, _) = fixture(tmp.path(), &spec(&[("1.0", 1.0)], 1, 1, 0.0));
    let dir = root.join("1.0");
    assert_eq!(code(&apienergy(&["analyze", p(&dir), "--alpha", "1.5"])), 2);
    assert_eq!(code(&apienergy(&["analyze", p(&dir), "--jobs", "0"])), 2);
    let config = tmp.path().join("bad.toml");
    fs::write(&config, "alpha = 0.05\nunknown = 1\n").unwrap();
    assert_eq!(code(&apienergy(&["analyze", p(&dir), "--config", p(&config)])), 2);

    let out = Command::new(env!("CARGO_BIN_EXE_apienergy"))
        .args(["analyze", p(&dir)])
        .env("APIENERGY_ALPHA", "0")
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn evolve_needs_two_revisions() {
    let tmp = tempfile::tempdir().unwrap();
    let (root, _) = fixture(tmp.path(), &spec(&[("1.0", 1.0)], 1, 2, 1.0));
    assert_eq!(code(&apienergy(&["evolve", p(&root)])), 2);
}

#[test]
fn duplicated_revision_is_never_significant() {
    let tmp = tempfile::tempdir().unwrap();
    let (root, _) = fixture(tmp.path(), &spec(&[("1.0", 1.0)], 3, 4, 10.0));
    for copy in ["1.0.1", "1.0.2"] {
        for sub in ["traces", "power"] {
            let (from, to) = (root.join("1.0").join(sub), root.join(copy).join(sub));
            fs::create_dir_all(&to).unwrap();
            for entry in fs::read_dir(&from).unwrap() {
                let entry = entry.unwrap();
                fs::copy(entry.path(), to.join(entry.file_name())).unwrap();
            }
        }
    }
    let out = apienergy(&["evolve", p(&root)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let pairwise = fs::read_to_string(root.join("evolution/pairwise.csv")).unwrap();
    let mut header = pairwise.lines().next().unwrap().split(',');
    let sig = header.position(|c| c == "significant").unwrap();
    let rows: Vec<&str> = pairwise.lines().skip(1).collect();
    assert_eq!(rows.len(), 9);
    for row in rows {
        assert_eq!(row.split(',').nth(sig), Some("false"), "{row}");
    }
}

#[test]
fn constant_data_is_reported_as_degenerate() {
    let tmp = tempfile::tempdir().unwrap();
    let (root, _) = fixture(tmp.path(), &spec(&[("1.0", 1.0), ("1.1", 1.0)], 1, 2, 0.0));
    let out = apienergy(&["evolve", p(&root)]);
    assert_eq!(code(&out), 5, "{}", stderr(&out));
    for file in ["report.json", "pairwise.csv", "proxy.csv", "revisions.csv", "summary.txt"] {
        assert!(root.join("evolution").join(file).is_file(), "{file}");
    }
}

#[test]
fn evolve_and_report_are_idempotent() {
    let tmp = tempfile::tempdir().unwrap();
    let (root, _) = fixture(tmp.path(), &spec(&[("1.0", 1.0), ("1.1", 1.5), ("1.2", 1.0)], 3, 3, 10.0));
    let evo = root.join("evolution");
    let snapshot = || {
        let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(&evo)
            .unwrap()
            .map(|e| {
                let e = e.unwrap();
                (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
            })
            .collect();
        files.sort();
        files
    };
    assert_eq!(code(&apienergy(&["evolve", p(&root)])), 0);
    let first = snapshot();
    assert_eq!(code(&apienergy(&["evolve", p(&root), "--jobs", "1"])), 0);
    assert_eq!(first, snapshot());

    let summary = fs::read(evo.join("summary.txt")).unwrap();
    let rows = fs::read(evo.join("revisions.csv")).unwrap();
    assert_eq!(code(&apienergy(&["report", p(&evo)])), 0);
    assert_eq!(summary, fs::read(evo.join("summary.txt")).unwrap());
    assert_eq!(rows, fs::read(evo.join("revisions.csv")).unwrap());
    let csv = String::from_utf8(rows).unwrap();
    assert_eq!(csv.lines().next(), Some("revision,mean_energy_mj,mean_power_mw,sum_ruapi"));
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn single_revision_report_has_one_row() {
    let tmp = tempfile::tempdir().unwrap();
    let (root, _) = fixture(tmp.path(), &spec(&[("3.1", 1.0)], 2, 2, 1.0));
    let out_dir = tmp.path().join("single");
    assert_eq!(code(&apienergy(&["analyze", p(&root.join("3.1")), "--out", p(&out_dir)])), 0);
    assert_eq!(code(&apienergy(&["report", p(&out_dir)])), 0);
    let csv = fs::read_to_string(out_dir.join("revisions.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.lines().nth(1).unwrap().starts_with("3.1,"));
    let summary = fs::read_to_string(out_dir.join("summary.txt")).unwrap();
    assert!(summary.contains("no comparisons"));
}

#[test]
fn report_input_errors() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(code(&apienergy(&["report", p(tmp.path())])), 2);
    fs::write(tmp.path().join("report.json"), "{\"revisions\": [").unwrap();
    assert_eq!(code(&apienergy(&["report", p(tmp.path())])), 3);
    fs::remove_file(tmp.path().join("report.json")).unwrap();
    fs::write(tmp.path().join("tests.jsonl"), "not json\n").unwrap();
    assert_eq!(code(&apienergy(&["report", p(tmp.path())])), 3);
}
