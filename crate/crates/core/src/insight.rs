//! Recipe, Ingredients and Stability widgets.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::dataset::{summarize, ColumnStats, Dataset};
use crate::error::{Error, Result};
use crate::scoring::Ranking;

pub const DEFAULT_STRENGTH_THRESHOLD: f64 = 0.5;
pub const DEFAULT_STABILITY_THRESHOLD: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecipeEntry {
    pub attribute: String,
    pub weight: f64,
    pub share: f64,
    pub stats_topk: ColumnStats,
    pub stats_overall: ColumnStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecipeReport {
    pub entries: Vec<RecipeEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngredientEntry {
    pub attribute: String,
    pub importance: f64,
    pub correlation: f64,
    pub strong: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stats_topk: Option<ColumnStats>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stats_overall: Option<ColumnStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngredientReport {
    pub strength_threshold: f64,
    pub entries: Vec<IngredientEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityResult {
    pub slope_topk: f64,
    pub slope_overall: f64,
    pub stable_topk: bool,
    pub stable_overall: bool,
    pub threshold: f64,
}

fn stats_over(values: &[Option<f64>], rows: &[usize]) -> Option<ColumnStats> {
    let mut present = Vec::with_capacity(rows.len());
    let mut missing = 0;
    for &r in rows {
        match values[r] {
            Some(v) => present.push(v),
            None => missing += 1,
        }
    }
    summarize(&present, missing)
}

/// Weighted attributes with their share of the total absolute weight, and
/// top-k vs overall statistics of the normalized values.
pub fn recipe(dataset: &Dataset, ranking: &Ranking) -> Result<RecipeReport> {
    ranking.check_dataset(dataset)?;
    let view = ranking.spec.scoring_view(dataset)?;
    let total: f64 = ranking.spec.weights.values().map(|w| w.abs()).sum();
    let overall = ranking.retained_rows();

    let mut entries = ranking
        .spec
        .weights
        .iter()
        .map(|(name, &weight)| {
            let values = view.numeric(name)?;
            let empty = || Error::EmptyColumn(name.clone());
            Ok(RecipeEntry {
                attribute: name.clone(),
                weight,
                share: weight.abs() / total,
                stats_topk: stats_over(values, ranking.top_k()).ok_or_else(empty)?,
                stats_overall: stats_over(values, &overall).ok_or_else(empty)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    entries.sort_by(|a, b| {
        b.share
            .total_cmp(&a.share)
            .then_with(|| a.attribute.cmp(&b.attribute))
    });
    Ok(RecipeReport { entries })
}

/// Ranks starting at 1; tied values share the mean of their positions.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && values[idx[end]] == values[idx[start]] {
            end += 1;
        }
        // positions start+1 ..= end
        let avg = (start + 1 + end) as f64 / 2.0;
        for &i in &idx[start..end] {
            ranks[i] = avg;
        }
        start = end;
    }
    ranks
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument(format!(
            "length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::InsufficientData(
            "correlation needs at least two observations".into(),
        ));
    }
    let rx = average_ranks(x);
    let ry = average_ranks(y);
    let n = rx.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Every numeric attribute, ordered by |Spearman correlation| with the score.
pub fn ingredients(
    dataset: &Dataset,
    ranking: &Ranking,
    strength_threshold: f64,
) -> Result<IngredientReport> {
    ranking.check_dataset(dataset)?;
    if !(0.0..=1.0).contains(&strength_threshold) {
        return Err(Error::InvalidArgument(format!(
            "strength threshold {strength_threshold} outside [0, 1]"
        )));
    }
    let numeric: Vec<&str> = dataset.numeric_attributes().collect();
    if numeric.is_empty() {
        return Err(Error::InvalidDataset("no numeric attributes".into()));
    }
    let view = dataset.normalize_view(&numeric, ranking.spec.normalization)?;
    let overall = ranking.retained_rows();

    let mut entries = Vec::with_capacity(numeric.len());
    for name in numeric {
        let values = view.numeric(name)?;
        let (xs, ys): (Vec<f64>, Vec<f64>) = ranking
            .order
            .iter()
            .zip(&ranking.scores)
            .filter_map(|(&row, &score)| values[row].map(|v| (v, score)))
            .unzip();
        let correlation = match spearman(&xs, &ys) {
            Ok(c) => c,
            Err(Error::UndefinedCorrelation | Error::InsufficientData(_)) => 0.0,
            Err(e) => return Err(e),
        };
        let importance = correlation.abs();
        entries.push(IngredientEntry {
            attribute: name.to_string(),
            importance,
            correlation,
            strong: importance >= strength_threshold && importance > 0.0,
            stats_topk: stats_over(values, ranking.top_k()),
            stats_overall: stats_over(values, &overall),
        });
    }
    entries.sort_by(|a, b| match b.importance.total_cmp(&a.importance) {
        Ordering::Equal => a.attribute.cmp(&b.attribute),
        other => other,
    });
    Ok(IngredientReport {
        strength_threshold,
        entries,
    })
}

/// Least-squares slope of the score curve with both axes on [0, 1]: scores
/// rescaled by the dataset-wide score range, positions by `(i-1)/(m-1)`.
pub fn stability_slope(scores: &[f64], dataset_min: f64, dataset_max: f64) -> Result<f64> {
    let m = scores.len();
    if m < 2 {
        return Err(Error::InsufficientData(
            "a slope needs at least two scores".into(),
        ));
    }
    let range = dataset_max - dataset_min;
    let ys: Vec<f64> = scores
        .iter()
        .map(|&s| if range > 0.0 { (s - dataset_min) / range } else { 0.5 })
        .collect();
    let denom = (m - 1) as f64;
    let xs: Vec<f64> = (0..m).map(|i| i as f64 / denom).collect();
    let mx = xs.iter().sum::<f64>() / m as f64;
    let my = ys.iter().sum::<f64>() / m as f64;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(&ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    Ok(sxy / sxx)
}

/// Unstable when |slope| is at or below `threshold`.
pub fn is_stable(slope: f64, threshold: f64) -> bool {
    slope.abs() > threshold
}

pub fn stability(ranking: &Ranking, threshold: f64) -> Result<StabilityResult> {
    if ranking.len() < 2 {
        return Err(Error::InsufficientData(
            "stability needs at least two ranked rows".into(),
        ));
    }
    let lo = ranking.scores.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ranking.scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // a one-item prefix has no slope; widen it to two
    let head = ranking.k.max(2);
    let slope_topk = stability_slope(&ranking.scores[..head], lo, hi)?;
    let slope_overall = stability_slope(&ranking.scores, lo, hi)?;
    Ok(StabilityResult {
        slope_topk,
        slope_overall,
        stable_topk: is_stable(slope_topk, threshold),
        stable_overall: is_stable(slope_overall, threshold),
        threshold,
    })
}
