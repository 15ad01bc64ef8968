//! Binomial kernels behind the ranked group fairness (prefix) test.

use crate::error::{Error, Result};

/// Relative slack when comparing a CDF against a significance level, so that
/// decimal inputs landing exactly on the level (e.g. `0.1^2` vs `0.01`) are
/// treated as equal rather than depending on the last ulp.
const LEVEL_SLACK: f64 = 1e-12;

/// Bisection stops once the bracket on the adjusted level is this narrow.
pub const ADJUST_TOLERANCE: f64 = 1e-6;

fn check_probability(name: &str, value: f64) -> Result<()> {
    if value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "{name} = {value} must lie strictly between 0 and 1"
        )))
    }
}

/// `P[X <= t]` for every `t in 0..=n`, `X ~ Binomial(n, p)`.
///
/// Mass values are generated by the ratio recurrence outward from the mode
/// (where the unnormalized weight is 1), then normalized by their sum. Points
/// below the mode accumulate from the lower tail; points at or above it are
/// computed as one minus the upper tail, so both tails keep full precision.
pub(crate) fn cdf_table(n: usize, p: f64) -> Vec<f64> {
    let q = 1.0 - p;
    let mode = (((n + 1) as f64) * p).floor().min(n as f64) as usize;

    let mut w = vec![0.0f64; n + 1];
    w[mode] = 1.0;
    for i in mode..n {
        w[i + 1] = w[i] * ((n - i) as f64 / (i + 1) as f64) * (p / q);
    }
    for i in (1..=mode).rev() {
        w[i - 1] = w[i] * (i as f64 / (n - i + 1) as f64) * (q / p);
    }
    let total: f64 = w.iter().sum();

    let mut cdf = vec![0.0; n + 1];
    let mut lower = 0.0;
    for t in 0..mode {
        lower += w[t];
        cdf[t] = lower / total;
    }
    let mut upper = 0.0;
    for t in (mode..=n).rev() {
        cdf[t] = (1.0 - upper / total).clamp(0.0, 1.0);
        upper += w[t];
    }
    cdf
}

/// `P[X <= t]` for `X ~ Binomial(n, p)`.
pub fn binomial_cdf(t: usize, n: usize, p: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    if t > n {
        return Err(Error::InvalidArgument(format!("t = {t} exceeds n = {n}")));
    }
    check_probability("p", p)?;
    if t == n {
        return Ok(1.0);
    }
    Ok(cdf_table(n, p)[t])
}

fn exceeds_level(cdf: f64, level: f64) -> bool {
    cdf > level * (1.0 + LEVEL_SLACK)
}

/// Minimum protected counts for prefixes `1..=k`: entry `i-1` is the
/// smallest `t` with `P[Binomial(i, p) <= t] > alpha`.
pub fn fair_min_table(k: usize, p: f64, alpha: f64) -> Result<Vec<usize>> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be positive".into()));
    }
    check_probability("p", p)?;
    check_probability("alpha", alpha)?;
    Ok(min_table_unchecked(k, p, alpha))
}

fn min_table_unchecked(k: usize, p: f64, alpha: f64) -> Vec<usize> {
    (1..=k)
        .map(|i| {
            let cdf = cdf_table(i, p);
            cdf.iter()
                .position(|&c| exceeds_level(c, alpha))
                .unwrap_or(i)
        })
        .collect()
}

/// Probability that a ranking whose positions are independently protected
/// with probability `p` falls below `min_counts` in at least one prefix.
///
/// Dynamic program over (prefix length, protected count) that discards
/// states as soon as they fail a prefix.
pub fn fail_probability(min_counts: &[usize], p: f64) -> f64 {
    let k = min_counts.len();
    let mut alive = vec![0.0f64; k + 1];
    alive[0] = 1.0;
    for (i, &need) in min_counts.iter().enumerate() {
        // prefix length i+1; counts 0..=i+1
        for c in (0..=i + 1).rev() {
            let stay = alive[c] * (1.0 - p);
            let step = if c > 0 { alive[c - 1] * p } else { 0.0 };
            alive[c] = stay + step;
        }
        for slot in alive.iter_mut().take(need.min(k + 1)) {
            *slot = 0.0;
        }
    }
    let survive: f64 = alive.iter().sum();
    (1.0 - survive).clamp(0.0, 1.0)
}

/// Type-I error of the whole family of `k` prefix tests run at level `level`.
pub fn family_fail_probability(k: usize, p: f64, level: f64) -> Result<f64> {
    Ok(fail_probability(&fair_min_table(k, p, level)?, p))
}

/// Largest per-prefix level `a` in `(0, alpha]` whose family-wide failure
/// probability stays at or below `alpha`, found by bisection.
pub fn adjust_significance(k: usize, p: f64, alpha: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be positive".into()));
    }
    check_probability("p", p)?;
    check_probability("alpha", alpha)?;

    let g = |a: f64| fail_probability(&min_table_unchecked(k, p, a), p);
    if g(alpha) <= alpha {
        return Ok(alpha);
    }
    // g(lo) <= alpha < g(hi); at a -> 0 every minimum count is 0 and g = 0
    let (mut lo, mut hi) = (0.0, alpha);
    while hi - lo > ADJUST_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if g(mid) <= alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if lo > 0.0 {
        return Ok(lo);
    }
    // The bracket never left zero; report the smallest positive level we
    // can certify rather than a degenerate 0.
    let mut a = hi;
    while a > f64::MIN_POSITIVE && g(a) > alpha {
        a *= 0.5;
    }
    Ok(a)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_small_cases() {
        assert!((binomial_cdf(0, 4, 0.5).unwrap() - 0.0625).abs() < 1e-15);
        assert_eq!(binomial_cdf(7, 7, 0.3).unwrap(), 1.0);
        // sum_{i<=3} C(10,i) .3^i .7^(10-i)
        let direct: f64 = (0..=3)
            .map(|i| {
                let c = [1.0, 10.0, 45.0, 120.0][i];
                c * 0.3f64.powi(i as i32) * 0.7f64.powi(10 - i as i32)
            })
            .sum();
        assert!((binomial_cdf(3, 10, 0.3).unwrap() - direct).abs() < 1e-14);
    }

    #[test]
    fn cdf_domain_errors() {
        assert!(binomial_cdf(5, 4, 0.5).is_err());
        assert!(binomial_cdf(0, 0, 0.5).is_err());
        assert!(binomial_cdf(1, 4, 0.0).is_err());
        assert!(binomial_cdf(1, 4, 1.0).is_err());
        assert!(binomial_cdf(1, 4, f64::NAN).is_err());
    }

    #[test]
    fn cdf_large_n_is_monotone_and_bounded() {
        let table = cdf_table(10_000, 0.37);
        assert!(table.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(*table.last().unwrap(), 1.0);
        assert!(table[0] >= 0.0);
        // median sits near n*p
        assert!(table[3690] < 0.5 && table[3710] > 0.5);
    }

    #[test]
    fn min_tables() {
        assert_eq!(fair_min_table(4, 0.5, 0.1).unwrap(), vec![0, 0, 0, 1]);
        assert_eq!(fair_min_table(3, 0.1, 0.05).unwrap(), vec![0, 0, 0]);
        assert_eq!(fair_min_table(2, 0.5, 0.6).unwrap(), vec![1, 1]);
        assert!(fair_min_table(0, 0.5, 0.1).is_err());
        assert!(fair_min_table(3, 0.5, 1.0).is_err());
    }

    #[test]
    fn single_prefix_needs_no_adjustment() {
        for &(p, alpha) in &[(0.5, 0.05), (0.3, 0.1), (0.9, 0.2)] {
            assert_eq!(adjust_significance(1, p, alpha).unwrap(), alpha);
        }
    }

    #[test]
    fn adjusted_level_controls_family_error() {
        let a = adjust_significance(10, 0.5, 0.1).unwrap();
        assert!(a < 0.1);
        assert!(family_fail_probability(10, 0.5, a).unwrap() <= 0.1);
        assert!(family_fail_probability(10, 0.5, a + ADJUST_TOLERANCE).unwrap() > 0.1);
    }

    #[test]
    fn fail_probability_of_trivial_table_is_zero() {
        assert_eq!(fail_probability(&[0, 0, 0], 0.4), 0.0);
        // first position must be protected
        assert!((fail_probability(&[1], 0.4) - 0.6).abs() < 1e-15);
    }
}
