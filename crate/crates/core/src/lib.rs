//! Nutritional labels for score-based rankings.
//!
//! A [`Dataset`] is ranked with a linear [`ScoringSpec`]; the resulting
//! [`Ranking`] is then described by six widgets (recipe, ingredients,
//! stability, fairness, diversity at top-k and overall) assembled into a
//! [`NutritionalLabel`] that renders to canonical JSON and to HTML.

pub mod dataset;
pub mod diversity;
pub mod error;
pub mod fairness;
pub mod insight;
pub mod label;
pub mod request;
pub mod scoring;
pub mod store;

#[cfg(feature = "server")]
pub mod service;

pub use dataset::{Column, ColumnKind, ColumnStats, Dataset, Histogram, Normalization};
pub use diversity::{diversity_report, DiversityReport};
pub use error::{Error, Result, Widget};
pub use fairness::{
    fairness_suite, FairnessConfig, FairnessResult, Measure, ProtectedFeature,
};
pub use insight::{IngredientReport, RecipeReport, StabilityResult};
pub use label::{build_label, parse_label, render_html, render_json, NutritionalLabel};
pub use request::RankingRequest;
pub use scoring::{Ranking, ScoringSpec};
