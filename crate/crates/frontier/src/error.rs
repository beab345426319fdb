use frontier_core::Error as CoreError;
use thiserror::Error;

/// Application errors, grouped by exit code.
#[derive(Debug, Error)]
pub enum AppError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Input(String),
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("design points are not equidistant (row {row}: spacing {spacing} vs {expected})")]
    NonEquidistantDesign { row: usize, spacing: f64, expected: f64 },
    #[error("{0}")]
    DegenerateInput(String),
    #[error("{0}")]
    Numeric(String),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] CoreError),
}

impl AppError {
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        AppError::Io {
            context: context.into(),
            source,
        }
    }

    /// Machine-readable class printed with the message.
    pub fn class(&self) -> &'static str {
        match self {
            AppError::Config(_) => "config",
            AppError::Input(_) | AppError::Io { .. } => "input",
            AppError::Parse { .. } => "parse",
            AppError::NonEquidistantDesign { .. } => "non_equidistant_design",
            AppError::DegenerateInput(_) => "degenerate_input",
            AppError::Numeric(_) => "numeric",
            AppError::Core(e) => match e {
                CoreError::InvalidConfig(_) => "config",
                CoreError::InvalidInput(_) => "input",
                CoreError::DegenerateWindow(_) => "degenerate_window",
                CoreError::DegenerateInput(_) => "degenerate_input",
                _ => "numeric",
            },
        }
    }

    /// 2 for configuration problems, 3 for bad input, 4 for numerical
    /// failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Config(_) => 2,
            AppError::Input(_)
            | AppError::Parse { .. }
            | AppError::NonEquidistantDesign { .. }
            | AppError::DegenerateInput(_)
            | AppError::Io { .. } => 3,
            AppError::Numeric(_) => 4,
            AppError::Core(e) => match e {
                CoreError::InvalidConfig(_) => 2,
                CoreError::InvalidInput(_) | CoreError::DegenerateInput(_) => 3,
                _ => 4,
            },
        }
    }

    /// Hint printed below the message, when there is a useful one.
    pub fn hint(&self) -> Option<&'static str> {
        match self {
            AppError::Core(CoreError::DegenerateWindow(_)) => Some(
                "the responses near this point have no spread; the tail index cannot be estimated \
                 from tied or constant data (check the input column or choose another --x)",
            ),
            AppError::NonEquidistantDesign { .. } => {
                Some("the estimator assumes x_j = j/n; resample onto an equidistant grid or drop the x column")
            }
            _ => None,
        }
    }
}
