use thiserror::Error;

/// Errors raised when constructing domain values from invalid inputs.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("quality ladder must contain at least one level")]
    EmptyLadder,
    #[error("quality ladder sizes must be finite, positive and strictly increasing (level {index})")]
    LadderSizeOrder { index: usize },
    #[error("advertised bandwidths must be positive and strictly increasing with size (level {index})")]
    LadderBandwidthOrder { index: usize },
    #[error("ladder column lengths differ: {sizes} sizes, {bandwidths} bandwidths, {labels} labels")]
    LadderShape {
        sizes: usize,
        bandwidths: usize,
        labels: usize,
    },
    #[error("objective weights must be finite, nonnegative and not all zero")]
    DegenerateWeights,
    #[error("invalid scenario: {0}")]
    Scenario(String),
    #[error("schedule shape does not match scenario: {0}")]
    ScheduleShape(String),
}

/// Errors from the text and CSV formats of the library.
#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing required field `{0}`")]
    Missing(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl FormatError {
    pub(crate) fn syntax(line: usize, message: impl Into<String>) -> Self {
        FormatError::Syntax {
            line,
            message: message.into(),
        }
    }
}
