//! Statistical parity tests of a ranking against a binary protected feature.
//!
//! Three measures are provided:
//!
//! * a prefix test: every prefix of the top-k must hold at least the
//!   binomially derived minimum number of protected items, with the
//!   per-prefix level corrected so the whole family has error `alpha`;
//! * a one-sample proportion z-test of the protected share of the top-k;
//! * a pairwise preference test, the rank-sum (Mann-Whitney U) statistic
//!   normalized to the probability that a protected item outranks a
//!   non-protected one.

mod binomial;

pub use binomial::{
    adjust_significance, binomial_cdf, fail_probability, fair_min_table,
    family_fail_probability, ADJUST_TOLERANCE,
};

use serde::{Deserialize, Serialize};
use libm::erfc;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::scoring::Ranking;

pub const DEFAULT_ALPHA: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProtectedFeature {
    pub attribute: String,
    pub protected_value: String,
}

impl ProtectedFeature {
    pub fn new(attribute: impl Into<String>, protected_value: impl Into<String>) -> Self {
        ProtectedFeature {
            attribute: attribute.into(),
            protected_value: protected_value.into(),
        }
    }

    /// Protected flag for each ranked position, best first.
    pub fn membership(&self, dataset: &Dataset, ranking: &Ranking) -> Result<Vec<bool>> {
        ranking.check_dataset(dataset)?;
        let categories = binary_categories(dataset, &self.attribute)?;
        if !categories.contains(&self.protected_value) {
            return Err(Error::InvalidArgument(format!(
                "'{}' is not a value of '{}'",
                self.protected_value, self.attribute
            )));
        }
        let values = dataset.categorical(&self.attribute)?;
        ranking
            .order
            .iter()
            .map(|&row| match &values[row] {
                Some(v) => Ok(*v == self.protected_value),
                None => Err(Error::InvalidArgument(format!(
                    "ranked row {row} has no value for '{}'",
                    self.attribute
                ))),
            })
            .collect()
    }
}

/// The two sorted values of a binary categorical attribute.
pub fn binary_categories(dataset: &Dataset, attribute: &str) -> Result<[String; 2]> {
    dataset.categorical(attribute)?;
    let cats = dataset.column(attribute)?.categories();
    match <[String; 2]>::try_from(cats) {
        Ok(pair) => Ok(pair),
        Err(cats) => Err(Error::NonBinaryAttribute {
            attribute: attribute.to_string(),
            found: cats.len(),
        }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FairnessConfig {
    pub alpha: f64,
    /// Protected proportion; estimated from the ranked rows when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    /// Prefix size; the ranking's own k when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
}

impl Default for FairnessConfig {
    fn default() -> Self {
        FairnessConfig {
            alpha: DEFAULT_ALPHA,
            p: None,
            k: None,
        }
    }
}

impl FairnessConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "alpha = {} must lie strictly between 0 and 1",
                self.alpha
            )));
        }
        if let Some(p) = self.p {
            if p == 0.0 || p == 1.0 {
                return Err(Error::DegeneratePopulation(p));
            }
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "p = {p} must lie strictly between 0 and 1"
                )));
            }
        }
        if self.k == Some(0) {
            return Err(Error::InvalidArgument("k must be positive".into()));
        }
        Ok(())
    }

    fn prefix_size(&self, ranking: &Ranking) -> usize {
        self.k.map_or(ranking.k, |k| k.min(ranking.len()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    FaIr,
    Proportion,
    Pairwise,
}

impl Measure {
    pub fn title(self) -> &'static str {
        match self {
            Measure::FaIr => "FA*IR",
            Measure::Proportion => "Proportion",
            Measure::Pairwise => "Pairwise",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Under,
    Over,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaIrDetails {
    pub alpha: f64,
    pub adjusted_alpha: f64,
    pub p: f64,
    pub k: usize,
    /// Protected items in each prefix `1..=k`.
    pub protected_counts: Vec<usize>,
    /// Required minimum for each prefix `1..=k`.
    pub min_counts: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_failing_prefix: Option<usize>,
    pub worst_prefix: usize,
    pub cross_feature_correction: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProportionDetails {
    pub alpha: f64,
    pub p: f64,
    pub k: usize,
    pub protected_in_topk: usize,
    pub topk_proportion: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairwiseDetails {
    pub alpha: f64,
    pub n_protected: usize,
    pub n_unprotected: usize,
    pub preferred_pairs: u64,
    pub total_pairs: u64,
    pub u: f64,
    pub mean: f64,
    pub std_dev: f64,
    pub z: f64,
    pub continuity_correction: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Details {
    FaIr(FaIrDetails),
    Proportion(ProportionDetails),
    Pairwise(PairwiseDetails),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FairnessResult {
    pub measure: Measure,
    pub protected_attribute: String,
    pub protected_value: String,
    pub statistic: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_value: Option<f64>,
    pub fair: bool,
    pub direction: Direction,
    pub details: Details,
}

/// Two-sided standard normal tail probability `P[|Z| >= |z|]`.
pub fn two_sided_p_value(z: f64) -> f64 {
    erfc(z.abs() / std::f64::consts::SQRT_2).clamp(0.0, 1.0)
}

struct Groups {
    membership: Vec<bool>,
    p: f64,
    k: usize,
}

fn prepare(
    dataset: &Dataset,
    ranking: &Ranking,
    feature: &ProtectedFeature,
    config: &FairnessConfig,
) -> Result<Groups> {
    config.validate()?;
    let membership = feature.membership(dataset, ranking)?;
    let protected = membership.iter().filter(|&&m| m).count();
    if protected == 0 || protected == membership.len() {
        let value = if protected == 0 {
            feature.protected_value.clone()
        } else {
            format!("not {}", feature.protected_value)
        };
        return Err(Error::EmptyGroup {
            attribute: feature.attribute.clone(),
            value,
        });
    }
    let p = config
        .p
        .unwrap_or(protected as f64 / membership.len() as f64);
    Ok(Groups {
        membership,
        p,
        k: config.prefix_size(ranking),
    })
}

fn fa_ir_on(membership: &[bool], k: usize, p: f64, alpha: f64) -> Result<(FaIrDetails, f64)> {
    let adjusted_alpha = adjust_significance(k, p, alpha)?;
    let min_counts = fair_min_table(k, p, adjusted_alpha)?;
    let protected_counts: Vec<usize> = membership[..k]
        .iter()
        .scan(0, |acc, &m| {
            *acc += m as usize;
            Some(*acc)
        })
        .collect();
    let first_failing_prefix = protected_counts
        .iter()
        .zip(&min_counts)
        .position(|(tau, m)| tau < m)
        .map(|i| i + 1);

    let mut worst = (f64::INFINITY, 1);
    for (i, &tau) in protected_counts.iter().enumerate() {
        let cdf = binomial_cdf(tau, i + 1, p)?;
        if cdf < worst.0 {
            worst = (cdf, i + 1);
        }
    }
    Ok((
        FaIrDetails {
            alpha,
            adjusted_alpha,
            p,
            k,
            protected_counts,
            min_counts,
            first_failing_prefix,
            worst_prefix: worst.1,
            cross_feature_correction: false,
        },
        worst.0,
    ))
}

/// Prefix test over the top-k with the family-wise corrected level.
pub fn fa_ir_test(
    dataset: &Dataset,
    ranking: &Ranking,
    feature: &ProtectedFeature,
    config: &FairnessConfig,
) -> Result<FairnessResult> {
    let g = prepare(dataset, ranking, feature, config)?;
    let (details, statistic) = fa_ir_on(&g.membership, g.k, g.p, config.alpha)?;
    let fair = details.first_failing_prefix.is_none();
    Ok(FairnessResult {
        measure: Measure::FaIr,
        protected_attribute: feature.attribute.clone(),
        protected_value: feature.protected_value.clone(),
        statistic,
        p_value: None,
        fair,
        direction: if fair { Direction::None } else { Direction::Under },
        details: Details::FaIr(details),
    })
}

/// `(z, two-sided p-value)` for `protected` of the top `k` against share `p`.
pub fn proportion_z(protected: usize, k: usize, p: f64) -> Result<(f64, f64)> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be positive".into()));
    }
    if protected > k {
        return Err(Error::InvalidArgument(format!(
            "{protected} protected items in a top-{k}"
        )));
    }
    if p <= 0.0 || p >= 1.0 {
        return Err(Error::DegeneratePopulation(p));
    }
    let observed = protected as f64 / k as f64;
    let z = (observed - p) / (p * (1.0 - p) / k as f64).sqrt();
    Ok((z, two_sided_p_value(z)))
}

fn verdict(p_value: f64, alpha: f64, z: f64) -> (bool, Direction) {
    let fair = p_value >= alpha;
    let direction = match (fair, z) {
        (true, _) => Direction::None,
        (false, z) if z < 0.0 => Direction::Under,
        (false, z) if z > 0.0 => Direction::Over,
        _ => Direction::None,
    };
    (fair, direction)
}

/// One-sample z-test of the protected share of the top-k.
pub fn proportion_test(
    dataset: &Dataset,
    ranking: &Ranking,
    feature: &ProtectedFeature,
    config: &FairnessConfig,
) -> Result<FairnessResult> {
    let g = prepare(dataset, ranking, feature, config)?;
    let protected_in_topk = g.membership[..g.k].iter().filter(|&&m| m).count();
    let (z, p_value) = proportion_z(protected_in_topk, g.k, g.p)?;
    let (fair, direction) = verdict(p_value, config.alpha, z);
    Ok(FairnessResult {
        measure: Measure::Proportion,
        protected_attribute: feature.attribute.clone(),
        protected_value: feature.protected_value.clone(),
        statistic: z,
        p_value: Some(p_value),
        fair,
        direction,
        details: Details::Proportion(ProportionDetails {
            alpha: config.alpha,
            p: g.p,
            k: g.k,
            protected_in_topk,
            topk_proportion: protected_in_topk as f64 / g.k as f64,
            z,
        }),
    })
}

/// Pair counts `(preferred, n_protected, n_unprotected)` where `preferred`
/// is the number of (protected, non-protected) pairs with the protected
/// item ranked strictly higher. Linear in the ranking length.
pub fn pairwise_counts(membership: &[bool]) -> (u64, u64, u64) {
    let n_unprotected = membership.iter().filter(|&&m| !m).count() as u64;
    let mut unprotected_seen = 0u64;
    let mut preferred = 0u64;
    let mut n_protected = 0u64;
    for &m in membership {
        if m {
            n_protected += 1;
            preferred += n_unprotected - unprotected_seen;
        } else {
            unprotected_seen += 1;
        }
    }
    (preferred, n_protected, n_unprotected)
}

/// Probability that a protected item outranks a non-protected one.
pub fn pairwise_statistic(membership: &[bool]) -> Result<f64> {
    let (preferred, n1, n2) = pairwise_counts(membership);
    if n1 == 0 || n2 == 0 {
        return Err(Error::EmptyGroup {
            attribute: "protected feature".into(),
            value: if n1 == 0 { "protected" } else { "non-protected" }.into(),
        });
    }
    Ok(preferred as f64 / (n1 * n2) as f64)
}

fn pairwise_on(membership: &[bool], alpha: f64) -> Result<(f64, f64, PairwiseDetails)> {
    let statistic = pairwise_statistic(membership)?;
    let (preferred, n1, n2) = pairwise_counts(membership);
    let (a, b) = (n1 as f64, n2 as f64);
    let u = preferred as f64;
    let mean = a * b / 2.0;
    let std_dev = (a * b * (a + b + 1.0) / 12.0).sqrt();
    let z = (u - mean) / std_dev;
    Ok((
        statistic,
        z,
        PairwiseDetails {
            alpha,
            n_protected: n1 as usize,
            n_unprotected: n2 as usize,
            preferred_pairs: preferred,
            total_pairs: n1 * n2,
            u,
            mean,
            std_dev,
            z,
            continuity_correction: false,
        },
    ))
}

/// Normal-approximation rank-sum test on the full ranking.
pub fn pairwise_test(
    dataset: &Dataset,
    ranking: &Ranking,
    feature: &ProtectedFeature,
    config: &FairnessConfig,
) -> Result<FairnessResult> {
    let g = prepare(dataset, ranking, feature, config)?;
    let (statistic, z, details) = pairwise_on(&g.membership, config.alpha)?;
    let p_value = two_sided_p_value(z);
    let (fair, direction) = verdict(p_value, config.alpha, z);
    Ok(FairnessResult {
        measure: Measure::Pairwise,
        protected_attribute: feature.attribute.clone(),
        protected_value: feature.protected_value.clone(),
        statistic,
        p_value: Some(p_value),
        fair,
        direction,
        details: Details::Pairwise(details),
    })
}

/// All three measures with each value of the binary attribute taken in turn
/// as the protected feature (values in sorted order). An explicit `p`
/// applies to the first value and `1 - p` to the second.
pub fn fairness_suite(
    ranking: &Ranking,
    dataset: &Dataset,
    sensitive_attribute: &str,
    config: &FairnessConfig,
) -> Result<Vec<FairnessResult>> {
    config.validate()?;
    let values = binary_categories(dataset, sensitive_attribute)?;
    let mut results = Vec::with_capacity(6);
    for (i, value) in values.iter().enumerate() {
        let feature = ProtectedFeature::new(sensitive_attribute, value.clone());
        let cfg = FairnessConfig {
            p: config.p.map(|p| if i == 0 { p } else { 1.0 - p }),
            ..*config
        };
        results.push(fa_ir_test(dataset, ranking, &feature, &cfg)?);
        results.push(proportion_test(dataset, ranking, &feature, &cfg)?);
        results.push(pairwise_test(dataset, ranking, &feature, &cfg)?);
    }
    Ok(results)
}
