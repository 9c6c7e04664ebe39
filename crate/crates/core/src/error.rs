use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    /// The message already includes the serde error, so it is not chained
    /// as a source.
    #[error("schema error at `{path}`: {detail}")]
    SchemaAt { path: String, detail: serde_json::Error },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("barrier linearization at infeasible point: user {user} has rate slack {slack}")]
    InfeasibleLinearization { user: usize, slack: f64 },

    #[error("minimum rate {r_min} of user {user} exceeds its achievable bound {r_max}")]
    RateRequirementTooHigh { user: usize, r_min: f64, r_max: f64 },

    #[error("grid of {points} points exceeds the cap of {cap}")]
    GridTooLarge { points: f64, cap: f64 },
}

/// Deserializes JSON, reporting the path of the offending field on failure.
pub fn parse_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| Error::SchemaAt {
        path: e.path().to_string(),
        detail: e.into_inner(),
    })
}
