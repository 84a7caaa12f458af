//! Mining API interactions from call traces of library revisions, attributing
//! measured energy to methods, and testing whether the relative API
//! utilization (rU_api) tracks significant energy and power changes.
//!
//! The usual flow: [`trace::parse_trace`] and [`energy::parse_power`] per
//! test execution, [`pipeline::analyze_execution`] to get an
//! [`evolution::ExecutionRecord`], then [`evolution::evolve`] over the
//! revisions. [`synth`] produces fixtures with known ground truth.

pub mod apimetric;
pub mod callgraph;
pub mod config;
pub mod energy;
pub mod evolution;
pub mod pipeline;
pub mod stats;
pub mod synth;
pub mod trace;
