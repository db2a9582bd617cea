//! Input resolution. An explicit path wins; otherwise the file of the same
//! name in the fixture directory (`--fixtures` / `FORMSENSE_FIXTURES`);
//! otherwise the bundled copy.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use formsense_core::fixtures;
use formsense_core::io;
use formsense_core::model::{AppealScores, DesignParams, ProductId, RuleAssessmentSet, Session, SparseDissimilarityMatrix};
use formsense_core::pipeline::PipelineInputs;

use crate::error::CliError;

/// A resolved input: where it came from and its text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Text {
    pub origin: String,
    pub text: String,
}

#[derive(Debug, Clone, Default)]
pub struct Resolver {
    pub fixtures: Option<PathBuf>,
}

impl Resolver {
    pub fn read(&self, explicit: Option<&Path>, name: &str, bundled: &str) -> Result<Text, CliError> {
        let path = match (explicit, &self.fixtures) {
            (Some(p), _) => p.to_path_buf(),
            (None, Some(dir)) => dir.join(name),
            (None, None) => return Ok(Text { origin: format!("bundled {name}"), text: bundled.to_string() }),
        };
        read_file(&path).map(|text| Text { origin: path.display().to_string(), text })
    }

    pub fn matrix(&self, explicit: Option<&Path>) -> Result<SparseDissimilarityMatrix, CliError> {
        let t = self.read(explicit, fixtures::DISSIM_FILE, fixtures::DISSIM_CSV)?;
        io::load_matrix(&t.text).map_err(|e| CliError::from(e).context(&t.origin))
    }

    pub fn appeal(&self, explicit: Option<&Path>) -> Result<AppealScores, CliError> {
        let t = self.read(explicit, fixtures::APPEAL_FILE, fixtures::APPEAL_CSV)?;
        io::load_appeal(&t.text).map_err(|e| CliError::from(e).context(&t.origin))
    }

    /// Rule codes and the design parameters stored beside them.
    pub fn rules(
        &self,
        explicit: Option<&Path>,
    ) -> Result<(RuleAssessmentSet, BTreeMap<ProductId, DesignParams>), CliError> {
        let t = self.read(explicit, fixtures::RULES_FILE, fixtures::RULES_CSV)?;
        let ctx = |e| CliError::from(e).context(&t.origin);
        Ok((io::load_rules(&t.text).map_err(ctx)?, io::load_dims(&t.text).map_err(ctx)?))
    }
}

pub fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| match e.kind() {
        // Unreadable inputs are the caller's to fix.
        std::io::ErrorKind::NotFound | std::io::ErrorKind::InvalidData | std::io::ErrorKind::IsADirectory => {
            CliError::validation("input", format!("{}: {e}", path.display()))
        }
        _ => CliError::from(e).context(path.display()),
    })
}

pub fn load_session(path: &Path) -> Result<Session, CliError> {
    Session::from_json(&read_file(path)?).map_err(|e| CliError::from(e).context(path.display()))
}

/// Pipeline inputs from a session file, or from the three tables.
pub fn pipeline_inputs(
    resolver: &Resolver,
    session: Option<&Path>,
    dissim: Option<&Path>,
    appeal: Option<&Path>,
    rules: Option<&Path>,
) -> Result<PipelineInputs, CliError> {
    if let Some(path) = session {
        return Ok(PipelineInputs::from_session(&load_session(path)?)?);
    }
    let matrix = resolver.matrix(dissim)?;
    let appeal = resolver.appeal(appeal)?;
    let (rules, dims) = resolver.rules(rules)?;
    Ok(PipelineInputs::from_fixtures(fixtures::FixtureSet { matrix, appeal, rules, dims }))
}
