use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::Result;
use crate::scoring::Ranking;

/// Bucket for rows with no value for the attribute.
pub const UNKNOWN_CATEGORY: &str = "unknown";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiversityReport {
    pub attribute: String,
    pub topk: BTreeMap<String, f64>,
    pub overall: BTreeMap<String, f64>,
}

fn proportions<'a>(values: &'a [Option<String>], rows: &[usize]) -> BTreeMap<String, f64> {
    let mut counts: BTreeMap<&'a str, usize> = BTreeMap::new();
    for &r in rows {
        let key = values[r].as_deref().unwrap_or(UNKNOWN_CATEGORY);
        *counts.entry(key).or_default() += 1;
    }
    let n = rows.len() as f64;
    counts
        .into_iter()
        .map(|(k, c)| (k.to_string(), c as f64 / n))
        .collect()
}

/// Category shares of a categorical attribute in the top-k and over all
/// ranked rows.
pub fn diversity_report(ranking: &Ranking, dataset: &Dataset, attribute: &str) -> Result<DiversityReport> {
    ranking.check_dataset(dataset)?;
    let values = dataset.categorical(attribute)?;
    Ok(DiversityReport {
        attribute: attribute.to_string(),
        topk: proportions(values, ranking.top_k()),
        overall: proportions(values, &ranking.order),
    })
}
