//! Per-execution analysis: call tree, U_api profile and energy attribution
//! of one (trace, power) pair.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::apimetric::{uapi, ApiClassifier, NodeRole};
use crate::callgraph::{build_call_trees, method_intervals};
use crate::energy::{attribute_with_offset, execution_energy, EnergyError, PowerProfile};
use crate::evolution::ExecutionRecord;
use crate::trace::{MethodId, TestTrace, TraceError};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error(transparent)]
    Energy(#[from] EnergyError),
    #[error("trace is {trace_test} sample {trace_sample} but power stream is {power_test} sample {power_sample}")]
    Mismatch {
        trace_test: MethodId,
        trace_sample: u32,
        power_test: MethodId,
        power_sample: u32,
    },
}

/// One method occurrence (call-tree node) of an execution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodRecord {
    pub revision: String,
    pub test_name: MethodId,
    pub sample_index: u32,
    pub node: usize,
    pub parent: Option<usize>,
    pub method: MethodId,
    pub thread: u64,
    pub depth: usize,
    pub t_start_ns: u64,
    pub duration_ns: u64,
    pub energy_mj_inclusive: f64,
    pub energy_mj_exclusive: f64,
    pub avg_power_mw: f64,
    pub uapi: u64,
    pub role: NodeRole,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecutionAnalysis {
    /// `ruapi` is left at 0; it needs the population total (see
    /// [`crate::evolution::assign_ruapi`]).
    pub record: ExecutionRecord,
    pub methods: Vec<MethodRecord>,
}

pub fn analyze_execution(
    revision: &str,
    trace: &TestTrace,
    power: &PowerProfile,
    classifier: &ApiClassifier,
    offset_us: f64,
) -> Result<ExecutionAnalysis, AnalysisError> {
    if trace.test_name != power.test_name || trace.sample_index != power.sample_index {
        return Err(AnalysisError::Mismatch {
            trace_test: trace.test_name.clone(),
            trace_sample: trace.sample_index,
            power_test: power.test_name.clone(),
            power_sample: power.sample_index,
        });
    }
    let tree = build_call_trees(trace)?;
    let profile = uapi(&tree, classifier);
    let whole = execution_energy(&tree, power, offset_us)?;
    let intervals = method_intervals(&tree);
    let attributed = if intervals.is_empty() {
        Vec::new()
    } else {
        attribute_with_offset(&intervals, power, offset_us)?
    };

    let methods = intervals
        .iter()
        .zip(attributed)
        .map(|(iv, e)| MethodRecord {
            revision: revision.to_owned(),
            test_name: trace.test_name.clone(),
            sample_index: trace.sample_index,
            node: iv.node.0,
            parent: iv.parent.map(|p| p.0),
            method: iv.method.clone(),
            thread: iv.thread,
            depth: iv.depth,
            t_start_ns: iv.t_start_ns,
            duration_ns: iv.duration_ns,
            energy_mj_inclusive: e.energy_mj_inclusive,
            energy_mj_exclusive: e.energy_mj_exclusive,
            avg_power_mw: e.avg_power_mw,
            uapi: profile.value(iv.node),
            role: profile.node_roles[iv.node.0],
        })
        .collect();

    Ok(ExecutionAnalysis {
        record: ExecutionRecord {
            revision: revision.to_owned(),
            test_name: trace.test_name.clone(),
            sample_index: trace.sample_index,
            energy_mj: whole.energy_mj,
            avg_power_mw: whole.avg_power_mw,
            duration_ms: whole.duration_ms,
            uapi: profile.root_uapi,
            api_interactions: profile.total_api_interactions,
            ruapi: 0.0,
        },
        methods,
    })
}
