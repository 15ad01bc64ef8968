//! Ranking requests as submitted by the CLI, the HTTP service and the FFI.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Normalization};
use crate::error::{Error, Result};
use crate::fairness::{binary_categories, FairnessConfig, DEFAULT_ALPHA};
use crate::label::{build_label, NutritionalLabel};
use crate::scoring::{Ranking, ScoringSpec, DEFAULT_K};

fn default_k() -> usize {
    DEFAULT_K
}

fn default_alpha() -> f64 {
    DEFAULT_ALPHA
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RankingRequest {
    pub weights: BTreeMap<String, f64>,
    #[serde(default)]
    pub normalization: Normalization,
    pub sensitive_attribute: String,
    #[serde(default)]
    pub diversity_attributes: Vec<String>,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
}

/// A validation failure attributed to one request field.
#[derive(Debug)]
pub struct FieldError {
    pub field: String,
    pub error: Error,
}

impl RankingRequest {
    pub fn spec(&self) -> ScoringSpec {
        ScoringSpec {
            weights: self.weights.clone(),
            normalization: self.normalization,
        }
    }

    pub fn fairness_config(&self) -> FairnessConfig {
        FairnessConfig {
            alpha: self.alpha,
            p: self.p,
            k: None,
        }
    }

    /// Checks every field against `dataset`, collecting all failures.
    pub fn validate(&self, dataset: &Dataset) -> Vec<FieldError> {
        let mut errors = Vec::new();
        let mut push = |field: String, error: Error| errors.push(FieldError { field, error });

        if let Err(e) = ScoringSpec::new(self.weights.clone(), self.normalization) {
            push("weights".into(), e);
        }
        for name in self.weights.keys() {
            if let Err(e) = dataset.numeric(name) {
                push(format!("weights.{name}"), e);
            }
        }
        if let Err(e) = binary_categories(dataset, &self.sensitive_attribute) {
            push("sensitive_attribute".into(), e);
        }
        for (i, name) in self.diversity_attributes.iter().enumerate() {
            if let Err(e) = dataset.categorical(name) {
                push(format!("diversity_attributes[{i}]"), e);
            }
        }
        if self.k == 0 {
            push("k".into(), Error::InvalidArgument("k must be positive".into()));
        }
        let cfg = self.fairness_config();
        if let Err(e) = (FairnessConfig { p: None, ..cfg }).validate() {
            push("alpha".into(), e);
        }
        if let Err(e) = (FairnessConfig { alpha: DEFAULT_ALPHA, ..cfg }).validate() {
            push("p".into(), e);
        }
        errors
    }

    /// Validates, ranks (dropping rows missing a scoring or the sensitive
    /// attribute) and builds the label.
    pub fn evaluate(&self, dataset: &Dataset) -> Result<(Ranking, NutritionalLabel)> {
        if let Some(first) = self.validate(dataset).into_iter().next() {
            return Err(first.error);
        }
        let ranking = Ranking::build_requiring(
            dataset,
            &self.spec(),
            self.k,
            &[self.sensitive_attribute.as_str()],
        )?;
        let diversity: Vec<&str> = self.diversity_attributes.iter().map(String::as_str).collect();
        let label = build_label(
            dataset,
            &ranking,
            &self.sensitive_attribute,
            &diversity,
            &self.fairness_config(),
        )?;
        Ok((ranking, label))
    }

    /// Canonical JSON with defaults filled in; the basis of ranking ids.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("requests serialize")
    }
}
