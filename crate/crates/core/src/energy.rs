//! Power streams, energy integration and attribution to call intervals.
//!
//! Units: power in mW, power-stream time in µs, trace time in ns. Energy
//! in mJ, i.e. mW·s. Both clocks count from test start; an optional
//! per-test offset shifts the power clock (`power_t = trace_t + offset`).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::callgraph::{CallTree, MethodInterval, NodeId};
use crate::trace::{MethodId, MethodIdError, TRACE_FORMAT_VERSION};

pub const POWER_HEADER_PREFIX: &str = "#power ";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerSample {
    pub t_us: f64,
    pub power_mw: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerProfile {
    pub test_name: MethodId,
    pub sample_index: u32,
    pub nominal_rate_hz: f64,
    pub samples: Vec<PowerSample>,
}

#[derive(Debug, Error)]
pub enum EnergyError {
    #[error("power stream is not valid UTF-8 (byte {0})")]
    Utf8(usize),
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line 1: unsupported power format version `{0}`")]
    UnknownVersion(String),
    #[error("line {line}: timestamp {t_us} µs does not increase past {previous_us} µs")]
    NonIncreasing {
        line: usize,
        previous_us: f64,
        t_us: f64,
    },
    #[error("line {line}: negative power {power_mw} mW")]
    NegativePower { line: usize, power_mw: f64 },
    #[error("integration needs at least 2 samples, profile has {0}")]
    TooFewSamples(usize),
    #[error("window [{a_us}, {b_us}] µs outside sampled range [{first_us}, {last_us}] µs")]
    OutOfRange {
        a_us: f64,
        b_us: f64,
        first_us: f64,
        last_us: f64,
    },
    #[error("window start {a_us} µs is after its end {b_us} µs")]
    InvertedWindow { a_us: f64, b_us: f64 },
    #[error("{0}")]
    Invalid(String),
}

fn malformed(line: usize, message: impl Into<String>) -> EnergyError {
    EnergyError::Malformed {
        line,
        message: message.into(),
    }
}

fn parse_decimal(field: &str) -> Option<f64> {
    // `f64::from_str` also takes `inf`/`nan`; only plain decimals are valid here.
    if field.is_empty()
        || !field
            .bytes()
            .all(|b| b.is_ascii_digit() || matches!(b, b'.' | b'-' | b'+' | b'e' | b'E'))
    {
        return None;
    }
    field.parse::<f64>().ok().filter(|v| v.is_finite())
}

pub fn parse_power(bytes: &[u8]) -> Result<PowerProfile, EnergyError> {
    let text = std::str::from_utf8(bytes).map_err(|e| EnergyError::Utf8(e.valid_up_to()))?;
    let body = text.strip_suffix('\n').unwrap_or(text);
    let mut lines = body.split('\n').enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().unwrap_or((1, ""));
    let rest = header
        .strip_prefix(POWER_HEADER_PREFIX)
        .ok_or_else(|| malformed(1, "expected header `#power v1;...`"))?;
    let fields: Vec<&str> = rest.split(';').collect();
    if fields[0] != TRACE_FORMAT_VERSION {
        return Err(EnergyError::UnknownVersion(fields[0].to_owned()));
    }
    if fields.len() != 4 {
        return Err(malformed(
            1,
            "header needs exactly version;test_name;sample_index;nominal_rate_hz",
        ));
    }
    let test_name: MethodId = fields[1]
        .parse()
        .map_err(|e: MethodIdError| malformed(1, format!("test name: {e}")))?;
    let sample_index = crate::trace::parse_u64(fields[2])
        .and_then(|v| u32::try_from(v).ok())
        .ok_or_else(|| malformed(1, format!("invalid sample index `{}`", fields[2])))?;
    let nominal_rate_hz = parse_decimal(fields[3])
        .filter(|r| *r > 0.0)
        .ok_or_else(|| malformed(1, format!("invalid sampling rate `{}`", fields[3])))?;

    let mut samples: Vec<PowerSample> = Vec::new();
    for (line, text) in lines {
        if text.starts_with('#') {
            continue;
        }
        let (t, p) = text
            .split_once(';')
            .ok_or_else(|| malformed(line, "expected `<t_us>;<power_mw>`"))?;
        let t_us =
            parse_decimal(t).ok_or_else(|| malformed(line, format!("invalid timestamp `{t}`")))?;
        let power_mw =
            parse_decimal(p).ok_or_else(|| malformed(line, format!("invalid power `{p}`")))?;
        if power_mw < 0.0 {
            return Err(EnergyError::NegativePower { line, power_mw });
        }
        if let Some(prev) = samples.last() {
            if t_us <= prev.t_us {
                return Err(EnergyError::NonIncreasing {
                    line,
                    previous_us: prev.t_us,
                    t_us,
                });
            }
        }
        samples.push(PowerSample { t_us, power_mw });
    }
    Ok(PowerProfile {
        test_name,
        sample_index,
        nominal_rate_hz,
        samples,
    })
}

pub fn write_power(profile: &PowerProfile) -> String {
    let mut out = String::with_capacity(64 + profile.samples.len() * 16);
    out.push_str(&format!(
        "{POWER_HEADER_PREFIX}{TRACE_FORMAT_VERSION};{};{};{}\n",
        profile.test_name, profile.sample_index, profile.nominal_rate_hz
    ));
    for s in &profile.samples {
        out.push_str(&format!("{};{}\n", s.t_us, s.power_mw));
    }
    out
}

impl PowerProfile {
    fn check_window(&self, a_us: f64, b_us: f64) -> Result<(), EnergyError> {
        if self.samples.len() < 2 {
            return Err(EnergyError::TooFewSamples(self.samples.len()));
        }
        if a_us > b_us {
            return Err(EnergyError::InvertedWindow { a_us, b_us });
        }
        let first_us = self.samples[0].t_us;
        let last_us = self.samples[self.samples.len() - 1].t_us;
        if a_us < first_us || b_us > last_us || a_us.is_nan() || b_us.is_nan() {
            return Err(EnergyError::OutOfRange {
                a_us,
                b_us,
                first_us,
                last_us,
            });
        }
        Ok(())
    }

    /// Index `i` of the segment `[t_i, t_{i+1}]` holding `t_us`.
    fn segment(&self, t_us: f64) -> usize {
        let i = self.samples.partition_point(|s| s.t_us <= t_us);
        i.saturating_sub(1).min(self.samples.len() - 2)
    }

    fn interpolate(&self, i: usize, t_us: f64) -> f64 {
        let (s0, s1) = (self.samples[i], self.samples[i + 1]);
        let w = (t_us - s0.t_us) / (s1.t_us - s0.t_us);
        s0.power_mw + w * (s1.power_mw - s0.power_mw)
    }

    /// Trapezoidal energy over `[a_us, b_us]` in mJ, interpolating power
    /// linearly at the window edges.
    pub fn integrate(&self, a_us: f64, b_us: f64) -> Result<f64, EnergyError> {
        self.check_window(a_us, b_us)?;
        if a_us == b_us {
            return Ok(0.0);
        }
        let first = self.segment(a_us);
        let last = self.segment(b_us);
        let mut total = 0.0;
        for i in first..=last {
            let lo = a_us.max(self.samples[i].t_us);
            let hi = b_us.min(self.samples[i + 1].t_us);
            if hi > lo {
                total += (hi - lo) * (self.interpolate(i, lo) + self.interpolate(i, hi)) * 0.5;
            }
        }
        Ok(total * 1e-6)
    }

    pub fn duration_us(&self) -> f64 {
        match (self.samples.first(), self.samples.last()) {
            (Some(a), Some(b)) => b.t_us - a.t_us,
            _ => 0.0,
        }
    }
}

/// Running integral of a profile; answers window queries in O(log n).
#[derive(Debug, Clone)]
pub struct CumulativeEnergy<'a> {
    profile: &'a PowerProfile,
    /// `cumulative[i]` = energy from the first sample to sample `i`, mW·µs.
    cumulative: Vec<f64>,
}

impl<'a> CumulativeEnergy<'a> {
    pub fn new(profile: &'a PowerProfile) -> Result<Self, EnergyError> {
        if profile.samples.len() < 2 {
            return Err(EnergyError::TooFewSamples(profile.samples.len()));
        }
        let mut cumulative = Vec::with_capacity(profile.samples.len());
        let mut acc = 0.0;
        cumulative.push(0.0);
        for w in profile.samples.windows(2) {
            acc += (w[1].t_us - w[0].t_us) * (w[0].power_mw + w[1].power_mw) * 0.5;
            cumulative.push(acc);
        }
        Ok(Self {
            profile,
            cumulative,
        })
    }

    fn at(&self, t_us: f64) -> f64 {
        let i = self.profile.segment(t_us);
        let s0 = self.profile.samples[i];
        let p = self.profile.interpolate(i, t_us);
        self.cumulative[i] + (t_us - s0.t_us) * (s0.power_mw + p) * 0.5
    }

    pub fn integrate(&self, a_us: f64, b_us: f64) -> Result<f64, EnergyError> {
        self.profile.check_window(a_us, b_us)?;
        if a_us == b_us {
            return Ok(0.0);
        }
        Ok((self.at(b_us) - self.at(a_us)).max(0.0) * 1e-6)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodEnergyRecord {
    pub node: NodeId,
    pub method: MethodId,
    pub thread: u64,
    pub t_start_ns: u64,
    pub duration_ns: u64,
    pub energy_mj_inclusive: f64,
    pub energy_mj_exclusive: f64,
    pub avg_power_mw: f64,
}

fn ns_to_us(ns: u64) -> f64 {
    ns as f64 / 1000.0
}

/// Average power in mW for `energy_mj` spent over `duration_ns`; 0 for an
/// empty interval.
pub fn average_power_mw(energy_mj: f64, duration_ns: u64) -> f64 {
    if duration_ns == 0 {
        0.0
    } else {
        energy_mj / (duration_ns as f64 * 1e-9)
    }
}

pub fn attribute(
    intervals: &[MethodInterval],
    profile: &PowerProfile,
) -> Result<Vec<MethodEnergyRecord>, EnergyError> {
    attribute_with_offset(intervals, profile, 0.0)
}

/// Inclusive energy is the integral over each interval's own window.
/// Exclusive energy subtracts the inclusive energy of direct children,
/// floored at zero.
pub fn attribute_with_offset(
    intervals: &[MethodInterval],
    profile: &PowerProfile,
    offset_us: f64,
) -> Result<Vec<MethodEnergyRecord>, EnergyError> {
    let cumulative = CumulativeEnergy::new(profile)?;
    let mut records = Vec::with_capacity(intervals.len());
    for iv in intervals {
        let inclusive = if iv.duration_ns == 0 {
            0.0
        } else {
            let a = ns_to_us(iv.t_start_ns) + offset_us;
            let b = ns_to_us(iv.t_start_ns + iv.duration_ns) + offset_us;
            cumulative.integrate(a, b)?
        };
        records.push(MethodEnergyRecord {
            node: iv.node,
            method: iv.method.clone(),
            thread: iv.thread,
            t_start_ns: iv.t_start_ns,
            duration_ns: iv.duration_ns,
            energy_mj_inclusive: inclusive,
            energy_mj_exclusive: inclusive,
            avg_power_mw: average_power_mw(inclusive, iv.duration_ns),
        });
    }

    let position: std::collections::HashMap<NodeId, usize> = intervals
        .iter()
        .enumerate()
        .map(|(i, iv)| (iv.node, i))
        .collect();
    for (i, iv) in intervals.iter().enumerate() {
        let Some(parent) = iv.parent else { continue };
        let Some(&p) = position.get(&parent) else {
            return Err(EnergyError::Invalid(format!(
                "interval of {} refers to missing parent node {}",
                iv.method, parent.0
            )));
        };
        let child = records[i].energy_mj_inclusive;
        records[p].energy_mj_exclusive -= child;
    }
    for r in &mut records {
        r.energy_mj_exclusive = r.energy_mj_exclusive.max(0.0);
    }
    Ok(records)
}

/// Energy, average power and duration of a whole execution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExecutionEnergy {
    pub energy_mj: f64,
    pub avg_power_mw: f64,
    pub duration_ms: f64,
}

/// Integrates the power stream over the span of the tree's root frames.
pub fn execution_energy(
    tree: &CallTree,
    profile: &PowerProfile,
    offset_us: f64,
) -> Result<ExecutionEnergy, EnergyError> {
    let Some((start, end)) = tree.span_ns() else {
        return Ok(ExecutionEnergy {
            energy_mj: 0.0,
            avg_power_mw: 0.0,
            duration_ms: 0.0,
        });
    };
    let energy_mj = if end == start {
        0.0
    } else {
        profile.integrate(ns_to_us(start) + offset_us, ns_to_us(end) + offset_us)?
    };
    Ok(ExecutionEnergy {
        energy_mj,
        avg_power_mw: average_power_mw(energy_mj, end - start),
        duration_ms: (end - start) as f64 * 1e-6,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    #[default]
    Mean,
    Median,
}

impl Aggregation {
    pub fn apply(self, values: &[f64]) -> f64 {
        match self {
            Aggregation::Mean => values.iter().sum::<f64>() / values.len() as f64,
            Aggregation::Median => {
                let mut v = values.to_vec();
                v.sort_by(f64::total_cmp);
                let mid = v.len() / 2;
                if v.len() % 2 == 0 {
                    (v[mid - 1] + v[mid]) / 2.0
                } else {
                    v[mid]
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestEnergyRecord {
    pub test_name: MethodId,
    pub revision: String,
    pub energy_mj: f64,
    pub avg_power_mw: f64,
    pub duration_ms: f64,
    pub n_samples_averaged: usize,
}

pub fn aggregate_samples(
    records: &[TestEnergyRecord],
    aggregation: Aggregation,
) -> Result<TestEnergyRecord, EnergyError> {
    let first = records
        .first()
        .ok_or_else(|| EnergyError::Invalid("no sample records to aggregate".into()))?;
    if let Some(other) = records
        .iter()
        .find(|r| r.test_name != first.test_name || r.revision != first.revision)
    {
        return Err(EnergyError::Invalid(format!(
            "cannot aggregate {} @ {} with {} @ {}",
            first.test_name, first.revision, other.test_name, other.revision
        )));
    }
    let pick = |f: fn(&TestEnergyRecord) -> f64| {
        let values: Vec<f64> = records.iter().map(f).collect();
        aggregation.apply(&values)
    };
    Ok(TestEnergyRecord {
        test_name: first.test_name.clone(),
        revision: first.revision.clone(),
        energy_mj: pick(|r| r.energy_mj),
        avg_power_mw: pick(|r| r.avg_power_mw),
        duration_ms: pick(|r| r.duration_ms),
        n_samples_averaged: records.iter().map(|r| r.n_samples_averaged.max(1)).sum(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::callgraph::{build_call_trees, method_intervals};
    use crate::trace::{TestTrace, TraceEvent};

    fn mid(s: &str) -> MethodId {
        s.parse().unwrap()
    }

    fn profile(samples: Vec<(f64, f64)>) -> PowerProfile {
        PowerProfile {
            test_name: mid("p.T::t"),
            sample_index: 0,
            nominal_rate_hz: 20_000.0,
            samples: samples
                .into_iter()
                .map(|(t_us, power_mw)| PowerSample { t_us, power_mw })
                .collect(),
        }
    }

    fn constant(mw: f64, until_us: u32) -> PowerProfile {
        profile((0..=until_us / 50).map(|i| (i as f64 * 50.0, mw)).collect())
    }

    #[test]
    fn parses_power_file() {
        let p = parse_power(b"#power v1;p.T::t;2;20000\n0;100.0\n# gap\n50;100.0\n").unwrap();
        assert_eq!(p.samples.len(), 2);
        assert_eq!(p.sample_index, 2);
        assert_eq!(p.samples[1], PowerSample { t_us: 50.0, power_mw: 100.0 });
        let empty = parse_power(b"#power v1;p.T::t;0;20000\n").unwrap();
        assert!(empty.samples.is_empty());
        assert!(matches!(
            empty.integrate(0.0, 1.0),
            Err(EnergyError::TooFewSamples(0))
        ));
    }

    #[test]
    fn rejects_bad_power_files() {
        assert!(matches!(
            parse_power(b"#power v1;p.T::t;0;20000\n0;1\n0;2\n"),
            Err(EnergyError::NonIncreasing { line: 3, .. })
        ));
        assert!(matches!(
            parse_power(b"#power v1;p.T::t;0;20000\n0;-1\n"),
            Err(EnergyError::NegativePower { line: 2, .. })
        ));
        assert!(matches!(
            parse_power(b"#power v1;p.T::t;0;20000\n0;nan\n"),
            Err(EnergyError::Malformed { line: 2, .. })
        ));
        assert!(matches!(
            parse_power(b"#power v9;p.T::t;0;20000\n"),
            Err(EnergyError::UnknownVersion(_))
        ));
        assert!(matches!(
            parse_power(b"#power v1;p.T::t;0;0\n"),
            Err(EnergyError::Malformed { line: 1, .. })
        ));
    }

    #[test]
    fn constant_power_window() {
        let p = constant(100.0, 20_000);
        assert!((p.integrate(0.0, 10_000.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((p.integrate(1_234.5, 11_234.5).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn linear_ramp_is_exact() {
        let p = profile((0..=200).map(|i| (i as f64 * 50.0, i as f64 * 0.5)).collect());
        assert!((p.integrate(0.0, 10_000.0).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn window_outside_range() {
        let p = constant(100.0, 1_000);
        assert!(matches!(
            p.integrate(-5.0, 5.0),
            Err(EnergyError::OutOfRange { .. })
        ));
        assert!(matches!(
            p.integrate(5.0, 1.0),
            Err(EnergyError::InvertedWindow { .. })
        ));
    }

    #[test]
    fn cumulative_matches_direct() {
        let p = profile(
            (0..400)
                .map(|i| (i as f64 * 50.0, 100.0 + ((i * 37) % 11) as f64))
                .collect(),
        );
        let c = CumulativeEnergy::new(&p).unwrap();
        for (a, b) in [(0.0, 19_950.0), (17.0, 18.0), (333.3, 9_999.9), (50.0, 100.0)] {
            let direct = p.integrate(a, b).unwrap();
            let fast = c.integrate(a, b).unwrap();
            assert!((direct - fast).abs() <= 1e-12 * direct.max(1e-9), "{a}..{b}");
        }
    }

    fn nested_tree() -> CallTree {
        let (r, c) = (mid("p.C::root"), mid("p.C::child"));
        build_call_trees(&TestTrace {
            test_name: mid("p.T::t"),
            sample_index: 0,
            events: vec![
                TraceEvent::enter(r.clone(), 0, 0),
                TraceEvent::enter(c.clone(), 0, 2_000_000),
                TraceEvent::exit(c, 0, 6_000_000),
                TraceEvent::exit(r, 0, 10_000_000),
            ],
        })
        .unwrap()
    }

    #[test]
    fn attribution_inclusive_and_exclusive() {
        let tree = nested_tree();
        let recs = attribute(&method_intervals(&tree), &constant(100.0, 10_000)).unwrap();
        assert!((recs[0].energy_mj_inclusive - 1.0).abs() < 1e-12);
        assert!((recs[1].energy_mj_inclusive - 0.4).abs() < 1e-12);
        assert!((recs[0].energy_mj_exclusive - 0.6).abs() < 1e-12);
        assert!((recs[0].avg_power_mw - 100.0).abs() < 1e-9);
        assert_eq!(recs[1].energy_mj_exclusive, recs[1].energy_mj_inclusive);
    }

    #[test]
    fn attribution_zero_duration_and_full_tiling() {
        let (r, a, b, z) = (mid("p.C::r"), mid("p.C::a"), mid("p.C::b"), mid("p.C::z"));
        let tree = build_call_trees(&TestTrace {
            test_name: mid("p.T::t"),
            sample_index: 0,
            events: vec![
                TraceEvent::enter(r.clone(), 0, 0),
                TraceEvent::enter(a.clone(), 0, 0),
                TraceEvent::exit(a, 0, 400_000),
                TraceEvent::enter(z.clone(), 0, 400_000),
                TraceEvent::exit(z, 0, 400_000),
                TraceEvent::enter(b.clone(), 0, 400_000),
                TraceEvent::exit(b, 0, 1_000_000),
                TraceEvent::exit(r, 0, 1_000_000),
            ],
        })
        .unwrap();
        let recs = attribute(&method_intervals(&tree), &constant(250.0, 1_000)).unwrap();
        let root = recs.iter().find(|r| r.node == NodeId(0)).unwrap();
        assert!(root.energy_mj_exclusive.abs() < 1e-12);
        let zero = recs.iter().find(|r| r.method.method() == "z").unwrap();
        assert_eq!((zero.energy_mj_inclusive, zero.energy_mj_exclusive), (0.0, 0.0));
        assert_eq!(zero.avg_power_mw, 0.0);
    }

    #[test]
    fn attribution_out_of_range() {
        let tree = nested_tree();
        assert!(matches!(
            attribute(&method_intervals(&tree), &constant(100.0, 5_000)),
            Err(EnergyError::OutOfRange { .. })
        ));
        // shifting the power clock can bring the window back into range
        let shifted = profile((0..=220).map(|i| (i as f64 * 50.0 - 500.0, 100.0)).collect());
        assert!(attribute(&method_intervals(&tree), &shifted).is_ok());
        assert!(attribute_with_offset(&method_intervals(&tree), &shifted, 600.0).is_err());
    }

    #[test]
    fn execution_energy_over_root_span() {
        let e = execution_energy(&nested_tree(), &constant(100.0, 10_000), 0.0).unwrap();
        assert!((e.energy_mj - 1.0).abs() < 1e-12);
        assert!((e.duration_ms - 10.0).abs() < 1e-12);
        assert!((e.avg_power_mw - 100.0).abs() < 1e-9);
    }

    fn rec(test: &str, rev: &str, energy: f64) -> TestEnergyRecord {
        TestEnergyRecord {
            test_name: mid(test),
            revision: rev.into(),
            energy_mj: energy,
            avg_power_mw: energy * 10.0,
            duration_ms: 100.0,
            n_samples_averaged: 1,
        }
    }

    #[test]
    fn aggregation() {
        let one = rec("p.T::a", "1.0", 1.0);
        assert_eq!(
            aggregate_samples(std::slice::from_ref(&one), Aggregation::Mean).unwrap(),
            one
        );
        let two = aggregate_samples(
            &[rec("p.T::a", "1.0", 1.0), rec("p.T::a", "1.0", 3.0)],
            Aggregation::Mean,
        )
        .unwrap();
        assert_eq!((two.energy_mj, two.n_samples_averaged), (2.0, 2));
        let med = aggregate_samples(
            &[
                rec("p.T::a", "1.0", 1.0),
                rec("p.T::a", "1.0", 2.0),
                rec("p.T::a", "1.0", 90.0),
            ],
            Aggregation::Median,
        )
        .unwrap();
        assert_eq!(med.energy_mj, 2.0);
        assert!(aggregate_samples(&[], Aggregation::Mean).is_err());
        assert!(aggregate_samples(
            &[rec("p.T::a", "1.0", 1.0), rec("p.T::b", "1.0", 1.0)],
            Aggregation::Mean
        )
        .is_err());
    }

    #[test]
    fn power_round_trip() {
        let p = profile(vec![(0.0, 100.125), (50.0, 0.1), (100.5, 1e-7)]);
        assert_eq!(parse_power(write_power(&p).as_bytes()).unwrap(), p);
    }
}
