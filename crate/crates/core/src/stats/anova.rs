use serde::{Deserialize, Serialize};

use super::special::f_upper_tail;
use super::StatsError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Degeneracy {
    /// Every observation is the same value; F is 0/0. Reported with p = 1.
    ConstantData,
    /// Groups are internally constant but differ; F is unbounded. p = 0.
    ZeroWithinVariance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnovaResult {
    /// `None` when the ratio is undefined, see [`AnovaResult::degeneracy`].
    pub f: Option<f64>,
    pub p: f64,
    pub df_between: usize,
    pub df_within: usize,
    pub ss_between: f64,
    pub ss_within: f64,
    pub ss_total: f64,
    pub ms_between: f64,
    pub ms_within: f64,
    pub group_means: Vec<f64>,
    pub group_sizes: Vec<usize>,
    pub degeneracy: Option<Degeneracy>,
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn sum_sq_dev(values: &[f64], center: f64) -> f64 {
    values.iter().map(|v| (v - center) * (v - center)).sum()
}

/// One-way ANOVA across `groups`.
pub fn anova<G: AsRef<[f64]>>(groups: &[G]) -> Result<AnovaResult, StatsError> {
    if groups.len() < 2 {
        return Err(StatsError::TooFewGroups(groups.len()));
    }
    for (i, g) in groups.iter().enumerate() {
        let g = g.as_ref();
        if g.len() < 2 {
            return Err(StatsError::TooFewObservations {
                group: i,
                size: g.len(),
            });
        }
        if g.iter().any(|v| !v.is_finite()) {
            return Err(StatsError::NonFinite(i));
        }
    }

    let k = groups.len();
    let n: usize = groups.iter().map(|g| g.as_ref().len()).sum();
    let all: Vec<f64> = groups.iter().flat_map(|g| g.as_ref().iter().copied()).collect();
    let grand = mean(&all);
    let group_means: Vec<f64> = groups.iter().map(|g| mean(g.as_ref())).collect();
    let group_sizes: Vec<usize> = groups.iter().map(|g| g.as_ref().len()).collect();

    let ss_total = sum_sq_dev(&all, grand);
    let ss_within: f64 = groups
        .iter()
        .zip(&group_means)
        .map(|(g, m)| sum_sq_dev(g.as_ref(), *m))
        .sum();
    let ss_between: f64 = group_means
        .iter()
        .zip(&group_sizes)
        .map(|(m, size)| *size as f64 * (m - grand) * (m - grand))
        .sum();

    let df_between = k - 1;
    let df_within = n - k;
    let ms_between = ss_between / df_between as f64;
    let ms_within = ss_within / df_within as f64;

    // Rounding leaves roughly (eps * |x|)^2 per observation in a constant group.
    let scale = all.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let noise_floor = 16.0 * n as f64 * (f64::EPSILON * scale).powi(2);

    let (f, p, degeneracy) = if ss_within <= noise_floor {
        if ss_between <= noise_floor {
            (None, 1.0, Some(Degeneracy::ConstantData))
        } else {
            (None, 0.0, Some(Degeneracy::ZeroWithinVariance))
        }
    } else {
        let f = ms_between / ms_within;
        let p = f_upper_tail(f, df_between as f64, df_within as f64)?;
        (Some(f), p, None)
    };

    Ok(AnovaResult {
        f,
        p,
        df_between,
        df_within,
        ss_between,
        ss_within,
        ss_total,
        ms_between,
        ms_within,
        group_means,
        group_sizes,
        degeneracy,
    })
}
