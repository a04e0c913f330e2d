use thiserror::Error;

/// Errors produced by the EPV pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    /// Coordinate outside the 68m x 120m pitch.
    #[error("invalid coordinate ({x}, {y}){}", fmt_line(.line))]
    InvalidCoordinate { x: f64, y: f64, line: Option<u64> },

    /// Point inside the opposition in-goal, which carries no zones.
    #[error("point ({x}, {y}) is outside the modelled area (opposition in-goal removed)")]
    OutOfModelArea { x: f64, y: f64 },

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("unknown action token '{token}' at line {line}")]
    UnknownAction { token: String, line: u64 },

    #[error("unknown outcome token '{token}' at line {line}")]
    UnknownOutcome { token: String, line: u64 },

    /// Raw-orientation input without an attack-direction column.
    #[error("raw orientation requires a 'direction' column (line {line})")]
    MissingDirection { line: u64 },

    #[error("segmentation error: {0}")]
    Segmentation(String),

    /// A caller broke a documented precondition.
    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// A match with zero total return has no reward distribution.
    #[error("zero total return for team {team_id} in match {match_id}")]
    ZeroReturnMatch { match_id: String, team_id: String },

    #[error("z-score profiles need at least two teams")]
    InsufficientTeams,

    /// Model file lacks zone bounds needed for rendering.
    #[error("model has no zone geometry")]
    MissingGeometry,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn fmt_line(line: &Option<u64>) -> String {
    match line {
        Some(n) => format!(" at line {n}"),
        None => String::new(),
    }
}

impl Error {
    /// Process exit code convention: 2 for input problems, 1 for analysis problems.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. }
            | Error::UnknownAction { .. }
            | Error::UnknownOutcome { .. }
            | Error::MissingDirection { .. }
            | Error::InvalidCoordinate { .. }
            | Error::Config(_)
            | Error::Io(_)
            | Error::Json(_)
            | Error::Csv(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
