//! Assembly of the nutritional label and its JSON rendering.
//!
//! JSON is the system of record: struct field order fixes key order, maps
//! are sorted, floats use the shortest round-trip representation and no
//! timestamp is written unless asked for, so identical inputs give
//! byte-identical output. The HTML document is derived from the same value.

mod html;

pub use html::render_html;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Normalization};
use crate::diversity::{diversity_report, DiversityReport};
use crate::error::{Error, Result, Widget, WidgetContext};
use crate::fairness::{fairness_suite, FairnessConfig, FairnessResult};
use crate::insight::{
    ingredients, recipe, stability, IngredientReport, RecipeReport, StabilityResult,
    DEFAULT_STABILITY_THRESHOLD, DEFAULT_STRENGTH_THRESHOLD,
};
use crate::scoring::Ranking;

pub const LABEL_SCHEMA_VERSION: &str = "1.0";
pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Methodology {
    pub stability: String,
    pub per_attribute_stability: String,
    pub ingredients: String,
    pub missing_values: String,
    pub fairness: String,
}

impl Methodology {
    fn current(strength_threshold: f64) -> Self {
        Methodology {
            stability: "least-squares slope of scores vs. position; scores min-max scaled to [0,1] over all ranked rows, positions scaled to [0,1] within each segment; unstable when |slope| <= threshold".into(),
            per_attribute_stability: "unavailable".into(),
            ingredients: format!(
                "absolute Spearman rank correlation (average ranks for ties) between each numeric attribute and the score over ranked rows; strong when >= {}",
                fmt_number(strength_threshold)
            ),
            missing_values: "rows missing any scoring or sensitive attribute are dropped before ranking; missing categories appear as 'unknown' in diversity".into(),
            fairness: "each value of the sensitive attribute is tested as the protected feature; p is estimated from ranked rows unless overridden; no correction across the two features; pairwise test uses the normal approximation without continuity correction".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub dataset_digest: String,
    pub row_count: usize,
    pub retained_rows: usize,
    pub dropped_rows: usize,
    pub k: usize,
    pub alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_override: Option<f64>,
    pub normalization: Normalization,
    pub weights: BTreeMap<String, f64>,
    pub sensitive_attribute: String,
    pub diversity_attributes: Vec<String>,
    pub strength_threshold: f64,
    pub stability_threshold: f64,
    pub engine_version: String,
    pub methodology: Methodology,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_at_unix: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NutritionalLabel {
    pub label_schema: String,
    pub metadata: Metadata,
    pub recipe: RecipeReport,
    pub ingredients: IngredientReport,
    pub stability: StabilityResult,
    pub fairness: Vec<FairnessResult>,
    pub diversity: Vec<DiversityReport>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabelOptions {
    pub strength_threshold: f64,
    pub stability_threshold: f64,
    pub timestamp: bool,
}

impl Default for LabelOptions {
    fn default() -> Self {
        LabelOptions {
            strength_threshold: DEFAULT_STRENGTH_THRESHOLD,
            stability_threshold: DEFAULT_STABILITY_THRESHOLD,
            timestamp: false,
        }
    }
}

/// Runs every widget with default thresholds and no timestamp.
pub fn build_label(
    dataset: &Dataset,
    ranking: &Ranking,
    sensitive: &str,
    diversity_attrs: &[&str],
    config: &FairnessConfig,
) -> Result<NutritionalLabel> {
    build_label_with(dataset, ranking, sensitive, diversity_attrs, config, &LabelOptions::default())
}

pub fn build_label_with(
    dataset: &Dataset,
    ranking: &Ranking,
    sensitive: &str,
    diversity_attrs: &[&str],
    config: &FairnessConfig,
    options: &LabelOptions,
) -> Result<NutritionalLabel> {
    ranking.check_dataset(dataset)?;
    config.validate()?;

    let mut div_attrs: Vec<&str> = vec![sensitive];
    for attr in diversity_attrs {
        if !div_attrs.contains(attr) {
            div_attrs.push(attr);
        }
    }

    let recipe = recipe(dataset, ranking).widget(Widget::Recipe)?;
    let ingredients =
        ingredients(dataset, ranking, options.strength_threshold).widget(Widget::Ingredients)?;
    let stability = stability(ranking, options.stability_threshold).widget(Widget::Stability)?;
    let fairness = fairness_suite(ranking, dataset, sensitive, config).widget(Widget::Fairness)?;
    let diversity = div_attrs
        .iter()
        .map(|attr| diversity_report(ranking, dataset, attr))
        .collect::<Result<Vec<_>>>()
        .widget(Widget::Diversity)?;

    let generated_at_unix = options.timestamp.then(|| {
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0)
    });

    Ok(NutritionalLabel {
        label_schema: LABEL_SCHEMA_VERSION.to_string(),
        metadata: Metadata {
            dataset_digest: dataset.source_digest().to_string(),
            row_count: dataset.row_count(),
            retained_rows: ranking.len(),
            dropped_rows: ranking.dropped_rows,
            k: ranking.k,
            alpha: config.alpha,
            p_override: config.p,
            normalization: ranking.spec.normalization,
            weights: ranking.spec.weights.clone(),
            sensitive_attribute: sensitive.to_string(),
            diversity_attributes: div_attrs.iter().map(|s| s.to_string()).collect(),
            strength_threshold: options.strength_threshold,
            stability_threshold: options.stability_threshold,
            engine_version: ENGINE_VERSION.to_string(),
            methodology: Methodology::current(options.strength_threshold),
            generated_at_unix,
        },
        recipe,
        ingredients,
        stability,
        fairness,
        diversity,
    })
}

/// Canonical pretty-printed JSON with a trailing newline.
pub fn render_json(label: &NutritionalLabel) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(label).expect("label values are always serializable");
    out.push(b'\n');
    out
}

pub fn parse_label(bytes: &[u8]) -> Result<NutritionalLabel> {
    let label: NutritionalLabel = serde_json::from_slice(bytes)?;
    if label.label_schema != LABEL_SCHEMA_VERSION {
        return Err(Error::InvalidArgument(format!(
            "unsupported label schema '{}'",
            label.label_schema
        )));
    }
    Ok(label)
}

/// Same text a number gets in the JSON output.
pub(crate) fn fmt_number<T: Serialize>(value: T) -> String {
    serde_json::to_string(&value).expect("numbers serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scoring::ScoringSpec;

    fn fixture() -> (Dataset, Ranking) {
        let csv = "x,y,g,r\n9,1,a,n\n8,2,b,s\n7,3,a,n\n6,4,b,s\n5,5,a,n\n4,6,b,s\n3,7,a,\n2,8,b,s\n";
        let ds = Dataset::load_csv(csv.as_bytes()).unwrap();
        let spec = ScoringSpec::new([("x", 1.0), ("y", 0.5)], Normalization::Minmax).unwrap();
        let r = Ranking::build_requiring(&ds, &spec, 4, &["g"]).unwrap();
        (ds, r)
    }

    #[test]
    fn builds_every_widget() {
        let (ds, r) = fixture();
        let label = build_label(&ds, &r, "g", &["r"], &FairnessConfig::default()).unwrap();
        assert_eq!(label.fairness.len(), 6);
        assert_eq!(label.diversity.len(), 2);
        assert_eq!(label.diversity[0].attribute, "g");
        assert_eq!(label.recipe.entries.len(), 2);
        assert_eq!(label.metadata.k, 4);
        assert_eq!(label.metadata.generated_at_unix, None);
    }

    #[test]
    fn absent_p_value_is_omitted() {
        let (ds, r) = fixture();
        let label = build_label(&ds, &r, "g", &[], &FairnessConfig::default()).unwrap();
        let json: serde_json::Value = serde_json::from_slice(&render_json(&label)).unwrap();
        let fa_ir = &json["fairness"][0];
        assert_eq!(fa_ir["measure"], "fa_ir");
        assert!(fa_ir.as_object().unwrap().get("p_value").is_none());
        assert!(json["fairness"][1]["p_value"].is_number());
    }

    #[test]
    fn round_trip() {
        let (ds, r) = fixture();
        let label = build_label(&ds, &r, "g", &["r"], &FairnessConfig::default()).unwrap();
        let bytes = render_json(&label);
        let back = parse_label(&bytes).unwrap();
        assert_eq!(back, label);
        assert_eq!(render_json(&back), bytes);
    }

    #[test]
    fn errors_are_tagged_with_widget() {
        let (ds, r) = fixture();
        let err = build_label(&ds, &r, "r", &[], &FairnessConfig::default());
        // r has a missing value on a retained row
        assert_eq!(err.unwrap_err().widget(), Some(Widget::Fairness));

        let ds3 = Dataset::load_csv(b"x,g\n1,a\n2,b\n3,c").unwrap();
        let spec = ScoringSpec::new([("x", 1.0)], Normalization::None).unwrap();
        let r3 = Ranking::build(&ds3, &spec, 2).unwrap();
        let err = build_label(&ds3, &r3, "g", &[], &FairnessConfig::default()).unwrap_err();
        assert_eq!(err.widget(), Some(Widget::Fairness));
        assert!(matches!(err.root(), Error::NonBinaryAttribute { .. }));
    }
}
