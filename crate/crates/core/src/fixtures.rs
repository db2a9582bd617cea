//! The single-subject glass study bundled as fixtures: 18 products, the sparse
//! dissimilarity grid, hedonic scores, rule judgments and the published
//! coefficient set of the quadratic appeal model.

use std::collections::BTreeMap;
use std::path::Path;

use crate::appeal::AppealModel;
use crate::io;
use crate::model::{
    AppealScores, DesignParams, ModelError, Product, ProductId, RuleAssessmentSet, Session,
    SparseDissimilarityMatrix, StageState, StageStatus,
};

pub const DISSIM_CSV: &str = include_str!("../fixtures/study/dissim.csv");
pub const APPEAL_CSV: &str = include_str!("../fixtures/study/appeal.csv");
pub const RULES_CSV: &str = include_str!("../fixtures/study/rules.csv");
pub const MODEL_JSON: &str = include_str!("../fixtures/study/model.json");

pub const DISSIM_FILE: &str = "dissim.csv";
pub const APPEAL_FILE: &str = "appeal.csv";
pub const RULES_FILE: &str = "rules.csv";

/// Every glass in the study shares the same container height.
pub const FIXED_D1: f64 = 8.0;

pub fn matrix() -> SparseDissimilarityMatrix {
    io::load_matrix(DISSIM_CSV).expect("bundled dissimilarity fixture parses")
}

pub fn appeal() -> AppealScores {
    io::load_appeal(APPEAL_CSV).expect("bundled appeal fixture parses")
}

pub fn rules() -> RuleAssessmentSet {
    io::load_rules(RULES_CSV).expect("bundled rules fixture parses")
}

pub fn dims() -> BTreeMap<ProductId, DesignParams> {
    io::load_dims(RULES_CSV).expect("bundled rules fixture parses")
}

pub fn products() -> Vec<Product> {
    products_from_dims(&dims())
}

pub fn products_from_dims(dims: &BTreeMap<ProductId, DesignParams>) -> Vec<Product> {
    dims.iter()
        .map(|(&id, &dims)| Product {
            id,
            label: format!("G{id}"),
            dims,
        })
        .collect()
}

/// Published coefficients of the quadratic appeal model.
pub fn reference_model() -> AppealModel {
    serde_json::from_str(MODEL_JSON).expect("bundled model fixture parses")
}

/// A completed session holding exactly the bundled tables.
pub fn session(id: &str) -> Session {
    let mut s = Session::new(id, products()).expect("fixture products are valid");
    s.comparisons = matrix();
    s.appeal = Some(appeal());
    s.rules = Some(rules());
    s.stages = StageStatus {
        stage1: StageState::Complete,
        stage2: StageState::Complete,
        stage3: StageState::Complete,
    };
    s
}

/// Fixture tables loaded from a directory laid out like `fixtures/study/`.
#[derive(Debug, Clone)]
pub struct FixtureSet {
    pub matrix: SparseDissimilarityMatrix,
    pub appeal: AppealScores,
    pub rules: RuleAssessmentSet,
    pub dims: BTreeMap<ProductId, DesignParams>,
}

impl FixtureSet {
    pub fn bundled() -> Self {
        Self {
            matrix: matrix(),
            appeal: appeal(),
            rules: rules(),
            dims: dims(),
        }
    }

    pub fn load_dir(dir: &Path) -> Result<Self, FixtureError> {
        let read = |name: &str| {
            let path = dir.join(name);
            std::fs::read_to_string(&path).map_err(|source| FixtureError::Io { path: path.display().to_string(), source })
        };
        let rules_text = read(RULES_FILE)?;
        Ok(Self {
            matrix: io::load_matrix(&read(DISSIM_FILE)?)?,
            appeal: io::load_appeal(&read(APPEAL_FILE)?)?,
            rules: io::load_rules(&rules_text)?,
            dims: io::load_dims(&rules_text)?,
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum FixtureError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
}
