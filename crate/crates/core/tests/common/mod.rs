//! Independent oracles and fixture helpers shared by the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use num_bigint::BigUint;
use rand::Rng;

use ranklabel::{Dataset, RankingRequest};

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

pub fn fixture_bytes(name: &str) -> Vec<u8> {
    std::fs::read(fixture_path(name)).unwrap_or_else(|e| panic!("fixture {name}: {e}"))
}

pub fn load_fixture(name: &str) -> Dataset {
    Dataset::load_csv(&fixture_bytes(name)).unwrap()
}

pub fn request(json: &str) -> RankingRequest {
    serde_json::from_str(json).unwrap()
}

/// Requests used against each fixture, as `(file, request JSON)`.
pub const FIXTURE_REQUESTS: [(&str, &str); 3] = [
    (
        "cs_departments.csv",
        r#"{"weights":{"PubCount":1.0,"GRE":0.3},"normalization":"minmax","sensitive_attribute":"DeptSizeBin","diversity_attributes":["Region"],"k":10}"#,
    ),
    (
        "german_credit.csv",
        r#"{"weights":{"credit_amount":-0.5,"duration":-1.0,"age":0.3},"normalization":"zscore","sensitive_attribute":"sex","diversity_attributes":["housing","foreign_worker"],"k":50}"#,
    ),
    (
        "compas.csv",
        r#"{"weights":{"decile_score":1.0,"priors_count":0.5},"normalization":"minmax","sensitive_attribute":"sex","diversity_attributes":["race","age_cat"],"k":100}"#,
    ),
];

/// Minimum-count table for prefixes `1..=k_max`, computed with exact integer
/// arithmetic for `p = p_tenths / 10` and `alpha = alpha_hundredths / 100`.
///
/// `P[Bin(i, p) <= t] > alpha` is decided as
/// `100 * sum_{j<=t} C(i,j) a^j (10-a)^(i-j) > A * 10^i`.
pub fn exact_min_table(k_max: usize, p_tenths: u32, alpha_hundredths: u32) -> Vec<usize> {
    let a = BigUint::from(p_tenths);
    let b = BigUint::from(10 - p_tenths);
    let hundred = BigUint::from(100u32);
    (1..=k_max)
        .map(|i| {
            let threshold = BigUint::from(alpha_hundredths) * BigUint::from(10u32).pow(i as u32);
            let mut binom = BigUint::from(1u32);
            let mut acc = BigUint::from(0u32);
            for j in 0..=i {
                if j > 0 {
                    binom = binom * BigUint::from((i - j + 1) as u64) / BigUint::from(j as u64);
                }
                acc += &binom * a.pow(j as u32) * b.pow((i - j) as u32);
                if &acc * &hundred > threshold {
                    return j;
                }
            }
            i
        })
        .collect()
}

/// `(preferred, total)` by enumerating every (protected, non-protected) pair.
pub fn brute_pairwise(membership: &[bool]) -> (u64, u64) {
    let mut preferred = 0;
    let mut total = 0;
    for (i, &mi) in membership.iter().enumerate() {
        for (j, &mj) in membership.iter().enumerate() {
            if mi && !mj {
                total += 1;
                if i < j {
                    preferred += 1;
                }
            }
        }
    }
    (preferred, total)
}

/// Random membership vector of length `n` with both groups present.
pub fn mixed_membership(rng: &mut impl Rng, n: usize) -> Vec<bool> {
    assert!(n >= 2);
    let share: f64 = rng.gen_range(0.05..0.95);
    let mut m: Vec<bool> = (0..n).map(|_| rng.gen_bool(share)).collect();
    let a = rng.gen_range(0..n);
    let b = (a + 1 + rng.gen_range(0..n - 1)) % n;
    m[a] = true;
    m[b] = false;
    m
}

/// Fraction of `samples` Bernoulli(p) rankings of length `min_counts.len()`
/// that fall below `min_counts` in some prefix.
pub fn monte_carlo_fail_rate(rng: &mut impl Rng, min_counts: &[usize], p: f64, samples: usize) -> f64 {
    let mut failures = 0usize;
    for _ in 0..samples {
        let mut count = 0;
        for &need in min_counts {
            count += rng.gen_bool(p) as usize;
            if count < need {
                failures += 1;
                break;
            }
        }
    }
    failures as f64 / samples as f64
}

/// Complementary error function evaluated independently of the library.
///
/// Below 3 it uses the all-positive series
/// `erf x = 2/sqrt(pi) e^{-x^2} sum 2^n x^{2n+1} / (2n+1)!!`, which has no
/// cancellation; above it a modified-Lentz continued fraction for erfc.
pub fn erfc_oracle(x: f64) -> f64 {
    if x < 0.0 {
        return 2.0 - erfc_oracle(-x);
    }
    let two_over_sqrt_pi = 2.0 / std::f64::consts::PI.sqrt();
    if x < 3.0 {
        let x2 = x * x;
        let mut term = x;
        let mut sum = x;
        let mut n = 0.0;
        while term > sum * 1e-18 {
            n += 1.0;
            term *= 2.0 * x2 / (2.0 * n + 1.0);
            sum += term;
        }
        return 1.0 - two_over_sqrt_pi * (-x2).exp() * sum;
    }
    // erfc x = e^{-x^2}/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
    let tiny = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for n in 1..500 {
        let an = n as f64 / 2.0;
        d = x + an * d;
        d = if d.abs() < tiny { tiny } else { d };
        c = x + an / c;
        c = if c.abs() < tiny { tiny } else { c };
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-x * x).exp() / std::f64::consts::PI.sqrt() / f
}

/// Two-sided normal tail from the oracle.
pub fn p_value_oracle(z: f64) -> f64 {
    erfc_oracle(z.abs() / std::f64::consts::SQRT_2)
}
