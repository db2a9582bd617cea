//! Error classification: validation failures exit 1, runtime errors exit 2.
//! Each error is printed to stderr as one JSON object.

use std::fmt;

use formsense_client::ClientError;
use formsense_core::appeal::AppealError;
use formsense_core::fixtures::FixtureError;
use formsense_core::geometry::GeometryError;
use formsense_core::mds::MdsError;
use formsense_core::model::ModelError;
use formsense_core::pipeline::PipelineError;
use formsense_core::prefmap::PrefmapError;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Validation,
    Runtime,
}

#[derive(Debug, Serialize)]
pub struct CliError {
    #[serde(rename = "error")]
    pub kind: Kind,
    pub source: &'static str,
    pub message: String,
}

impl CliError {
    pub fn validation(source: &'static str, message: impl Into<String>) -> Self {
        Self { kind: Kind::Validation, source, message: message.into() }
    }

    pub fn runtime(source: &'static str, message: impl Into<String>) -> Self {
        Self { kind: Kind::Runtime, source, message: message.into() }
    }

    pub fn exit_code(&self) -> u8 {
        match self.kind {
            Kind::Validation => 1,
            Kind::Runtime => 2,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("error serializes")
    }

    pub fn context(mut self, what: impl fmt::Display) -> Self {
        self.message = format!("{what}: {}", self.message);
        self
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        Self::validation("model", e.to_string())
    }
}

impl From<FixtureError> for CliError {
    fn from(e: FixtureError) -> Self {
        match e {
            FixtureError::Model(m) => m.into(),
            FixtureError::Io { .. } => Self::runtime("io", e.to_string()),
        }
    }
}

impl From<MdsError> for CliError {
    fn from(e: MdsError) -> Self {
        match e {
            MdsError::InvalidMatrix(_) | MdsError::Parse { .. } | MdsError::DimensionMismatch(_) => {
                Self::validation("mds", e.to_string())
            }
            MdsError::InvalidOptions(_) | MdsError::AllDistancesZero => Self::runtime("mds", e.to_string()),
        }
    }
}

impl From<PrefmapError> for CliError {
    fn from(e: PrefmapError) -> Self {
        match e {
            PrefmapError::NotTwoDimensional(_) | PrefmapError::TooFewProducts(_) | PrefmapError::MissingAppeal(_) => {
                Self::validation("prefmap", e.to_string())
            }
            _ => Self::runtime("prefmap", e.to_string()),
        }
    }
}

impl From<AppealError> for CliError {
    fn from(e: AppealError) -> Self {
        match e {
            AppealError::InvalidArguments(_) => Self::runtime("appeal", e.to_string()),
            _ => Self::validation("appeal", e.to_string()),
        }
    }
}

impl From<GeometryError> for CliError {
    fn from(e: GeometryError) -> Self {
        Self::validation("geometry", e.to_string())
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Model(m) => m.into(),
            PipelineError::Mds(m) => m.into(),
            PipelineError::Prefmap(p) => p.into(),
            PipelineError::Appeal(a) => a.into(),
            PipelineError::Incomplete(_) => Self::validation("pipeline", e.to_string()),
            PipelineError::Io { .. } => Self::runtime("io", e.to_string()),
        }
    }
}

impl From<ClientError> for CliError {
    fn from(e: ClientError) -> Self {
        match e.status() {
            Some(s) if (400..500).contains(&s) => Self::validation("service", e.to_string()),
            _ => Self::runtime("service", e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::runtime("io", e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classification() {
        assert_eq!(CliError::from(ModelError::UnknownProduct(3)).exit_code(), 1);
        assert_eq!(CliError::from(MdsError::AllDistancesZero).exit_code(), 2);
        assert_eq!(CliError::from(PipelineError::Incomplete("x".into())).exit_code(), 1);
        assert_eq!(CliError::from(std::io::Error::other("disk")).exit_code(), 2);
        let json: serde_json::Value = serde_json::from_str(&CliError::validation("model", "bad").to_json()).unwrap();
        assert_eq!(json["error"], "validation");
        assert_eq!(json["source"], "model");
    }
}
