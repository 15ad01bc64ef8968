use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Label widget an error originated from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Widget {
    Recipe,
    Ingredients,
    Stability,
    Fairness,
    Diversity,
}

impl fmt::Display for Widget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Widget::Recipe => "recipe",
            Widget::Ingredients => "ingredients",
            Widget::Stability => "stability",
            Widget::Fairness => "fairness",
            Widget::Diversity => "diversity",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("malformed row {row}: expected {expected} cells, found {found}")]
    MalformedRow {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("unknown attribute '{0}'")]
    UnknownAttribute(String),

    #[error("type mismatch: attribute '{attribute}' is not {expected}")]
    TypeMismatch {
        attribute: String,
        expected: &'static str,
    },

    #[error("attribute '{0}' has no non-missing values")]
    EmptyColumn(String),

    #[error("all rows were dropped for missing required values")]
    AllRowsDropped,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid scoring spec: {0}")]
    InvalidSpec(String),

    #[error("correlation undefined for constant input")]
    UndefinedCorrelation,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("empty group: no retained rows with {attribute}={value}")]
    EmptyGroup { attribute: String, value: String },

    #[error("attribute '{attribute}' is not binary ({found} distinct values)")]
    NonBinaryAttribute { attribute: String, found: usize },

    #[error("degenerate population: protected proportion {0} must lie strictly between 0 and 1")]
    DegeneratePopulation(f64),

    #[error("{widget}: {source}")]
    Widget {
        widget: Widget,
        #[source]
        source: Box<Error>,
    },

    #[error("not found: {0}")]
    NotFound(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable snake_case identifier used in CLI output and service error objects.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidDataset(_) => "invalid_dataset",
            Error::MalformedRow { .. } => "malformed_row",
            Error::UnknownAttribute(_) => "unknown_attribute",
            Error::TypeMismatch { .. } => "type_mismatch",
            Error::EmptyColumn(_) => "empty_column",
            Error::AllRowsDropped => "all_rows_dropped",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::InvalidSpec(_) => "invalid_spec",
            Error::UndefinedCorrelation => "undefined_correlation",
            Error::InsufficientData(_) => "insufficient_data",
            Error::EmptyGroup { .. } => "empty_group",
            Error::NonBinaryAttribute { .. } => "non_binary_attribute",
            Error::DegeneratePopulation(_) => "degenerate_population",
            Error::Widget { source, .. } => source.code(),
            Error::NotFound(_) => "not_found",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }

    /// The innermost error, skipping widget tags.
    pub fn root(&self) -> &Error {
        match self {
            Error::Widget { source, .. } => source.root(),
            other => other,
        }
    }

    pub fn widget(&self) -> Option<Widget> {
        match self {
            Error::Widget { widget, .. } => Some(*widget),
            _ => None,
        }
    }

    pub(crate) fn in_widget(self, widget: Widget) -> Error {
        Error::Widget {
            widget,
            source: Box::new(self),
        }
    }
}

pub(crate) trait WidgetContext<T> {
    fn widget(self, widget: Widget) -> Result<T>;
}

impl<T> WidgetContext<T> for Result<T> {
    fn widget(self, widget: Widget) -> Result<T> {
        self.map_err(|e| e.in_widget(widget))
    }
}
