//! Linear scoring functions and deterministic rankings.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Normalization};
use crate::error::{Error, Result};

pub const DEFAULT_K: usize = 10;

/// Per-attribute weights plus the normalization applied before weighting.
/// Higher scores rank better; use negative weights where smaller is better.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoringSpec {
    pub weights: BTreeMap<String, f64>,
    #[serde(default)]
    pub normalization: Normalization,
}

impl ScoringSpec {
    pub fn new<I, S>(weights: I, normalization: Normalization) -> Result<Self>
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        let spec = ScoringSpec {
            weights: weights.into_iter().map(|(k, v)| (k.into(), v)).collect(),
            normalization,
        };
        spec.check_weights()?;
        Ok(spec)
    }

    /// Parses `a=1.0,b=-0.3`.
    pub fn parse_weights(text: &str) -> Result<BTreeMap<String, f64>> {
        let mut weights = BTreeMap::new();
        for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (name, value) = part.split_once('=').ok_or_else(|| {
                Error::InvalidSpec(format!("weight '{part}' is not of the form name=value"))
            })?;
            let name = name.trim();
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| Error::InvalidSpec(format!("weight for '{name}' is not a number")))?;
            if weights.insert(name.to_string(), value).is_some() {
                return Err(Error::InvalidSpec(format!("weight for '{name}' given twice")));
            }
        }
        Ok(weights)
    }

    fn check_weights(&self) -> Result<()> {
        if let Some((name, _)) = self.weights.iter().find(|(_, w)| !w.is_finite()) {
            return Err(Error::InvalidSpec(format!("weight for '{name}' is not finite")));
        }
        if !self.weights.values().any(|&w| w != 0.0) {
            return Err(Error::InvalidSpec(
                "at least one attribute needs a nonzero weight".into(),
            ));
        }
        Ok(())
    }

    pub fn validate(&self, dataset: &Dataset) -> Result<()> {
        self.check_weights()?;
        for name in self.weights.keys() {
            dataset.numeric(name)?;
        }
        Ok(())
    }

    pub fn attributes(&self) -> impl Iterator<Item = &str> {
        self.weights.keys().map(String::as_str)
    }

    /// The dataset as the scorer sees it: weighted attributes normalized.
    pub fn scoring_view(&self, dataset: &Dataset) -> Result<Dataset> {
        let attrs: Vec<&str> = self.attributes().collect();
        dataset.normalize_view(&attrs, self.normalization)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scored {
    pub rows: Vec<(usize, f64)>,
    pub dropped: usize,
}

/// Scores every row that has all weighted attributes present.
pub fn compute_scores(dataset: &Dataset, spec: &ScoringSpec) -> Result<Scored> {
    compute_scores_requiring(dataset, spec, &[])
}

/// Like [`compute_scores`], also dropping rows missing any of `required`.
pub fn compute_scores_requiring(
    dataset: &Dataset,
    spec: &ScoringSpec,
    required: &[&str],
) -> Result<Scored> {
    spec.validate(dataset)?;
    let view = spec.scoring_view(dataset)?;
    let weighted: Vec<(&[Option<f64>], f64)> = spec
        .weights
        .iter()
        .map(|(name, &w)| Ok((view.numeric(name)?, w)))
        .collect::<Result<_>>()?;
    let required_cols = required
        .iter()
        .map(|name| dataset.column(name).map(|c| c.data()))
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::with_capacity(dataset.row_count());
    'rows: for row in 0..dataset.row_count() {
        if required_cols.iter().any(|c| c.is_missing(row)) {
            continue;
        }
        let mut score = 0.0;
        for (values, w) in &weighted {
            match values[row] {
                Some(x) => score += w * x,
                None => continue 'rows,
            }
        }
        rows.push((row, score));
    }
    if rows.is_empty() {
        return Err(Error::AllRowsDropped);
    }
    let dropped = dataset.row_count() - rows.len();
    Ok(Scored { rows, dropped })
}

/// Sorted order (best first) with aligned scores and the clamped focus size.
#[derive(Debug, Clone, PartialEq)]
pub struct RankOrder {
    pub order: Vec<usize>,
    pub scores: Vec<f64>,
    pub k: usize,
}

/// Sorts by score descending; ties go to the lower row index.
pub fn rank(scored: &[(usize, f64)], k: usize) -> Result<RankOrder> {
    if scored.is_empty() {
        return Err(Error::AllRowsDropped);
    }
    if k == 0 {
        return Err(Error::InvalidArgument("k must be positive".into()));
    }
    let mut sorted = scored.to_vec();
    sorted.sort_by(|a, b| match b.1.total_cmp(&a.1) {
        Ordering::Equal => a.0.cmp(&b.0),
        other => other,
    });
    let (order, scores) = sorted.into_iter().unzip();
    Ok(RankOrder {
        order,
        scores,
        k: k.min(scored.len()),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ranking {
    pub order: Vec<usize>,
    pub scores: Vec<f64>,
    pub k: usize,
    pub spec: ScoringSpec,
    pub dataset_digest: String,
    pub dropped_rows: usize,
}

impl Ranking {
    pub fn build(dataset: &Dataset, spec: &ScoringSpec, k: usize) -> Result<Self> {
        Self::build_requiring(dataset, spec, k, &[])
    }

    /// Ranks the rows that have every weighted attribute and every attribute
    /// in `required` present.
    pub fn build_requiring(
        dataset: &Dataset,
        spec: &ScoringSpec,
        k: usize,
        required: &[&str],
    ) -> Result<Self> {
        let scored = compute_scores_requiring(dataset, spec, required)?;
        let RankOrder { order, scores, k } = rank(&scored.rows, k)?;
        Ok(Ranking {
            order,
            scores,
            k,
            spec: spec.clone(),
            dataset_digest: dataset.source_digest().to_string(),
            dropped_rows: scored.dropped,
        })
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn top_k(&self) -> &[usize] {
        &self.order[..self.k]
    }

    pub fn top_k_scores(&self) -> &[f64] {
        &self.scores[..self.k]
    }

    /// Retained row indices in ascending order.
    pub fn retained_rows(&self) -> Vec<usize> {
        let mut rows = self.order.clone();
        rows.sort_unstable();
        rows
    }

    pub(crate) fn check_dataset(&self, dataset: &Dataset) -> Result<()> {
        if self.dataset_digest != dataset.source_digest() {
            return Err(Error::InvalidArgument(
                "ranking was not computed from this dataset".into(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Column;

    fn two_col(a: &[f64], b: &[f64]) -> Dataset {
        Dataset::from_columns(vec![
            Column::numeric("a", a.iter().map(|&v| Some(v)).collect()),
            Column::numeric("b", b.iter().map(|&v| Some(v)).collect()),
        ])
        .unwrap()
    }

    #[test]
    fn zero_weight_and_convex_combination() {
        let ds = two_col(&[0.4], &[0.9]);
        let spec = ScoringSpec::new([("a", 1.0), ("b", 0.0)], Normalization::None).unwrap();
        assert_eq!(compute_scores(&ds, &spec).unwrap().rows, vec![(0, 0.4)]);

        let ds = two_col(&[1.0], &[0.0]);
        let spec = ScoringSpec::new([("a", 0.5), ("b", 0.5)], Normalization::None).unwrap();
        assert_eq!(compute_scores(&ds, &spec).unwrap().rows, vec![(0, 0.5)]);
    }

    #[test]
    fn tie_rule() {
        let r = rank(&[(0, 0.2), (1, 0.9), (2, 0.9), (3, 0.1)], 10).unwrap();
        assert_eq!(r.order, vec![1, 2, 0, 3]);
        assert_eq!(r.k, 4);
        let r = rank(&[(0, 1.0)], 10).unwrap();
        assert_eq!((r.order, r.k), (vec![0], 1));
        assert!(matches!(rank(&[], 10), Err(Error::AllRowsDropped)));
    }

    #[test]
    fn spec_validation() {
        let ds = Dataset::load_csv(b"a,c\n1,x\n2,y").unwrap();
        assert!(matches!(
            ScoringSpec::new([("a", 0.0)], Normalization::None),
            Err(Error::InvalidSpec(_))
        ));
        assert!(matches!(
            ScoringSpec::new(Vec::<(String, f64)>::new(), Normalization::None),
            Err(Error::InvalidSpec(_))
        ));
        let spec = ScoringSpec::new([("nope", 1.0)], Normalization::None).unwrap();
        assert!(matches!(compute_scores(&ds, &spec), Err(Error::UnknownAttribute(_))));
        let spec = ScoringSpec::new([("c", 1.0)], Normalization::None).unwrap();
        assert!(matches!(compute_scores(&ds, &spec), Err(Error::TypeMismatch { .. })));
    }

    #[test]
    fn drops_rows_with_missing_values() {
        let ds = Dataset::load_csv(b"a,b,g\n1,2,x\nNA,3,y\n4,5,\n").unwrap();
        let spec = ScoringSpec::new([("a", 1.0), ("b", 1.0)], Normalization::None).unwrap();
        let scored = compute_scores(&ds, &spec).unwrap();
        assert_eq!(scored.dropped, 1);
        let r = Ranking::build_requiring(&ds, &spec, 10, &["g"]).unwrap();
        assert_eq!(r.order, vec![0]);
        assert_eq!(r.dropped_rows, 2);

        let ds = Dataset::load_csv(b"a\nNA\nNA").unwrap();
        let spec = ScoringSpec::new([("a", 1.0)], Normalization::None).unwrap();
        assert!(matches!(compute_scores(&ds, &spec), Err(Error::AllRowsDropped)));
    }

    #[test]
    fn parse_weights_string() {
        let w = ScoringSpec::parse_weights("PubCount=1.0, GRE=0.3").unwrap();
        assert_eq!(w["PubCount"], 1.0);
        assert_eq!(w["GRE"], 0.3);
        assert!(ScoringSpec::parse_weights("a").is_err());
        assert!(ScoringSpec::parse_weights("a=x").is_err());
        assert!(ScoringSpec::parse_weights("a=1,a=2").is_err());
    }
}
