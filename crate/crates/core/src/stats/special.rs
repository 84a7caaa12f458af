use super::StatsError;

const CF_TOLERANCE: f64 = 1e-12;
const CF_MAX_ITERATIONS: usize = 300;
const TINY: f64 = 1e-300;

pub fn ln_beta(a: f64, b: f64) -> f64 {
    libm::lgamma(a) + libm::lgamma(b) - libm::lgamma(a + b)
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// Upper tail `1 - Φ(z)`, accurate for large positive `z`.
pub(crate) fn normal_sf(z: f64) -> f64 {
    0.5 * libm::erfc(z / std::f64::consts::SQRT_2)
}

/// Regularized incomplete beta `I_x(a, b)`.
pub fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> Result<f64, StatsError> {
    if !(a > 0.0 && b > 0.0) {
        return Err(StatsError::InvalidArgument(format!(
            "incomplete beta needs a, b > 0 (a={a}, b={b})"
        )));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(StatsError::InvalidArgument(format!(
            "incomplete beta needs 0 <= x <= 1 (x={x})"
        )));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == 1.0 {
        return Ok(1.0);
    }
    // The fraction converges fast below the mean; use the reflection above it.
    if x > (a + 1.0) / (a + b + 2.0) {
        Ok(1.0 - beta_fraction(b, a, 1.0 - x)?)
    } else {
        beta_fraction(a, b, x)
    }
}

/// Modified Lentz evaluation of the incomplete-beta continued fraction.
fn beta_fraction(a: f64, b: f64, x: f64) -> Result<f64, StatsError> {
    let ln_front = a * x.ln() + b * (1.0 - x).ln() - ln_beta(a, b);
    let front = ln_front.exp() / a;

    let clamp = |v: f64| if v.abs() < TINY { TINY } else { v };
    let mut c = 1.0;
    let mut d = 1.0 / clamp(1.0 - (a + b) * x / (a + 1.0));
    let mut f = d;
    for m in 1..=CF_MAX_ITERATIONS {
        let m = m as f64;
        let even = m * (b - m) * x / ((a + 2.0 * m - 1.0) * (a + 2.0 * m));
        d = 1.0 / clamp(1.0 + even * d);
        c = clamp(1.0 + even / c);
        f *= d * c;

        let odd = -(a + m) * (a + b + m) * x / ((a + 2.0 * m) * (a + 2.0 * m + 1.0));
        d = 1.0 / clamp(1.0 + odd * d);
        c = clamp(1.0 + odd / c);
        let delta = d * c;
        f *= delta;
        if (delta - 1.0).abs() < CF_TOLERANCE {
            return Ok((front * f).clamp(0.0, 1.0));
        }
    }
    Err(StatsError::NonConvergence {
        iterations: CF_MAX_ITERATIONS,
    })
}

/// `P(X > f)` for `X ~ F(df1, df2)`.
pub fn f_upper_tail(f: f64, df1: f64, df2: f64) -> Result<f64, StatsError> {
    if !(df1 >= 1.0 && df2 >= 1.0) {
        return Err(StatsError::InvalidArgument(format!(
            "F distribution needs df >= 1 (df1={df1}, df2={df2})"
        )));
    }
    if f.is_nan() || f < 0.0 {
        return Err(StatsError::InvalidArgument(format!("F statistic {f} < 0")));
    }
    if f == 0.0 {
        return Ok(1.0);
    }
    if f.is_infinite() {
        return Ok(0.0);
    }
    regularized_incomplete_beta(df2 / 2.0, df1 / 2.0, df2 / (df2 + df1 * f))
}
