use serde::{Deserialize, Serialize};

use super::anova::{anova, AnovaResult};
use super::ptukey::ptukey;
use super::StatsError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TukeyPair {
    pub group_a: usize,
    pub group_b: usize,
    /// `mean(a) - mean(b)`.
    pub mean_diff: f64,
    /// Studentized range statistic; `None` when the error variance is zero
    /// and the means differ (unbounded statistic, `p_adj = 0`).
    pub q: Option<f64>,
    pub p_adj: f64,
    pub significant: bool,
}

/// Tukey HSD over every unordered pair of groups, using the Tukey–Kramer
/// standard error for unequal group sizes.
pub fn tukey_hsd<G: AsRef<[f64]>>(groups: &[G], alpha: f64) -> Result<Vec<TukeyPair>, StatsError> {
    let table = anova(groups)?;
    tukey_hsd_from_anova(&table, alpha)
}

pub fn tukey_hsd_from_anova(table: &AnovaResult, alpha: f64) -> Result<Vec<TukeyPair>, StatsError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(StatsError::InvalidAlpha(alpha));
    }
    let k = table.group_means.len();
    let k_groups = u32::try_from(k)
        .map_err(|_| StatsError::InvalidArgument(format!("{k} groups is too many")))?;
    let df = table.df_within as f64;
    let mut pairs = Vec::with_capacity(k * (k - 1) / 2);
    for a in 0..k {
        for b in (a + 1)..k {
            let mean_diff = table.group_means[a] - table.group_means[b];
            let se = (table.ms_within / 2.0
                * (1.0 / table.group_sizes[a] as f64 + 1.0 / table.group_sizes[b] as f64))
                .sqrt();
            let (q, p_adj) = if table.degeneracy.is_some() || se == 0.0 {
                if mean_diff == 0.0 || table.ss_between == 0.0 {
                    (Some(0.0), 1.0)
                } else {
                    (None, 0.0)
                }
            } else {
                let q = mean_diff.abs() / se;
                (Some(q), (1.0 - ptukey(q, k_groups, df)?).clamp(0.0, 1.0))
            };
            pairs.push(TukeyPair {
                group_a: a,
                group_b: b,
                mean_diff,
                q,
                p_adj,
                significant: p_adj < alpha,
            });
        }
    }
    Ok(pairs)
}
