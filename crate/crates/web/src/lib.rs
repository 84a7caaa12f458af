//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Each exported function takes plain strings or numbers and returns a JSON
//! string; errors come back as a JS string. The `*_json` functions are the
//! same operations for native callers.

use apienergy_core::apimetric::{uapi, ApiClassifier, NodeRole};
use apienergy_core::callgraph::build_call_trees;
use apienergy_core::evolution::{evolve, EvolveOptions, ExecutionRecord, Metric, RevisionDataset};
use apienergy_core::pipeline::analyze_execution;
use apienergy_core::stats::{f_upper_tail, ptukey};
use apienergy_core::synth::{self, SynthError, SynthSpec};
use apienergy_core::trace::parse_trace;
use serde::Serialize;
use serde_json::{json, Value};
use std::collections::BTreeMap;
use wasm_bindgen::prelude::*;

/// Fixture the simulator starts from.
pub const DEFAULT_SPEC: &str = include_str!("../../../data/positive_control.toml");

/// Largest number of executions the simulator will run in one call.
pub const MAX_EXECUTIONS: u64 = 5_000;

pub const SAMPLE_TRACE: &str = "\
#trace v1;app.CheckoutTest::testPay;0
E;1;0;app;Checkout;pay
E;1;1000;app;Cart;total
E;1;1500;java.util;ArrayList;size
X;1;1800;java.util;ArrayList;size
X;1;2500;app;Cart;total
E;1;3000;app;Log;info
X;1;3500;app;Log;info
E;1;4000;android.net;Uri;parse
E;1;4200;android.net;Uri;normalize
X;1;4400;android.net;Uri;normalize
X;1;5000;android.net;Uri;parse
X;1;6000;app;Checkout;pay
";

#[derive(Serialize)]
struct NodeView {
    method: String,
    depth: usize,
    start_ns: u64,
    duration_ns: u64,
    uapi: u64,
    role: NodeRole,
}

pub fn uapi_json(trace_text: &str) -> Result<Value, String> {
    let trace = parse_trace(trace_text.as_bytes()).map_err(|e| e.to_string())?;
    let tree = build_call_trees(&trace).map_err(|e| e.to_string())?;
    let profile = uapi(&tree, &ApiClassifier::android_platform());
    let nodes: Vec<NodeView> = tree
        .ids()
        .map(|id| {
            let n = tree.node(id);
            NodeView {
                method: n.method.to_string(),
                depth: n.depth,
                start_ns: n.t_start_ns,
                duration_ns: n.duration_ns,
                uapi: profile.node_values[id.0],
                role: profile.node_roles[id.0],
            }
        })
        .collect();
    Ok(json!({
        "test": trace.test_name.to_string(),
        "root_uapi": profile.root_uapi,
        "api_interactions": profile.total_api_interactions,
        "api_distribution": profile.api_distribution,
        "nodes": nodes,
    }))
}

pub fn distributions_json(k: u32, df: f64, q_max: f64, points: u32) -> Result<Value, String> {
    if points < 2 || q_max.is_nan() || q_max <= 0.0 {
        return Err("need at least 2 points and q_max > 0".into());
    }
    let curve = (0..points)
        .map(|i| {
            let q = q_max * f64::from(i) / f64::from(points - 1);
            ptukey(q, k, df).map(|p| [q, p]).map_err(|e| e.to_string())
        })
        .collect::<Result<Vec<_>, _>>()?;
    let df_between = f64::from(k - 1);
    let f_tail = (0..points)
        .map(|i| {
            let f = q_max * f64::from(i) / f64::from(points - 1);
            let df_within = if df.is_finite() { df } else { 1e9 };
            f_upper_tail(f, df_between, df_within).map(|p| [f, p]).map_err(|e| e.to_string())
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(json!({ "k": k, "df": df, "ptukey": curve, "f_upper_tail": f_tail }))
}

#[derive(Debug)]
struct SimError(String);

impl From<SynthError> for SimError {
    fn from(e: SynthError) -> Self {
        SimError(e.to_string())
    }
}

pub fn simulate_json(spec_toml: &str, alpha: f64) -> Result<Value, String> {
    let spec = SynthSpec::from_toml_str(spec_toml).map_err(|e| e.to_string())?;
    let executions =
        spec.tests.count as u64 * u64::from(spec.samples_per_test) * spec.revisions.len() as u64;
    if executions > MAX_EXECUTIONS {
        return Err(format!("{executions} executions requested, the demo runs at most {MAX_EXECUTIONS}"));
    }
    let classifier = synth::classifier();
    let mut records: BTreeMap<String, Vec<ExecutionRecord>> = BTreeMap::new();
    let truth = synth::generate_with(&spec, |ex| {
        let analysis = analyze_execution(ex.revision, &ex.trace, &ex.power, &classifier, 0.0)
            .map_err(|e| SimError(e.to_string()))?;
        records.entry(ex.revision.to_owned()).or_default().push(analysis.record);
        Ok::<(), SimError>(())
    })
    .map_err(|e| e.0)?;
    let datasets = records
        .into_iter()
        .map(|(label, recs)| RevisionDataset::new(label, recs))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let options = EvolveOptions { alpha, ..EvolveOptions::default() };
    let report = evolve(datasets, &options).map_err(|e| e.to_string())?;

    let metrics: BTreeMap<&str, Value> = Metric::ALL
        .iter()
        .map(|&m| {
            let a = report.metric(m);
            let anova = a.anova.as_ref().map(|t| json!({ "f": t.f, "p": t.p }));
            (m.name(), json!({ "anova": anova, "pairs": a.pairs, "error": a.error }))
        })
        .collect();
    Ok(json!({
        "revisions": report.summaries,
        "executions": report.execution_records,
        "metrics": metrics,
        "proxy_vs_energy": report.proxy_vs_energy,
        "proxy_vs_power": report.proxy_vs_power,
        "truth": truth.pairs,
    }))
}

fn to_js(result: Result<Value, String>) -> Result<String, JsValue> {
    result.map(|v| v.to_string()).map_err(|e| JsValue::from_str(&e))
}

/// Per-node API utilization of a trace pasted in the trace text format.
#[wasm_bindgen]
pub fn analyze_trace(trace_text: &str) -> Result<String, JsValue> {
    to_js(uapi_json(trace_text))
}

/// CDF of the studentized range and the matching F upper tail on
/// `points` evenly spaced values in `[0, q_max]`.
#[wasm_bindgen]
pub fn distribution_curves(k: u32, df: f64, q_max: f64, points: u32) -> Result<String, JsValue> {
    to_js(distributions_json(k, df, q_max, points))
}

/// Generates a synthetic study in memory and compares its revisions.
#[wasm_bindgen]
pub fn simulate(spec_toml: &str, alpha: f64) -> Result<String, JsValue> {
    to_js(simulate_json(spec_toml, alpha))
}

#[wasm_bindgen]
pub fn default_spec() -> String {
    DEFAULT_SPEC.to_owned()
}

#[wasm_bindgen]
pub fn sample_trace() -> String {
    SAMPLE_TRACE.to_owned()
}
