//! Request and response bodies of the HTTP interface, shared by the service
//! and its client.
//!
//! Numeric fields that carry a range rule are deserialized wider than their
//! domain type so that an out-of-range value reaches validation (422) instead
//! of failing to parse (400).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::model::{DesignParams, ProductId, Session, MIN_COVERAGE};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CreateSession {
    /// Generated when absent. Must match `[A-Za-z0-9_-]{1,64}`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    /// Products are numbered 1..N in this order.
    pub dims: Vec<DesignParams>,
    /// Defaults to `G{id}`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Comparison {
    pub i: i64,
    pub j: i64,
    pub value: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComparisonRecorded {
    pub i: ProductId,
    pub j: ProductId,
    pub value: u8,
    pub previous: Option<u8>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProductCoverage {
    pub id: ProductId,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coverage {
    pub min_required: usize,
    pub counts: Vec<ProductCoverage>,
    pub under_covered: Vec<ProductCoverage>,
    pub complete: bool,
}

impl Coverage {
    pub fn of(session: &Session) -> Self {
        let counts: Vec<ProductCoverage> = session
            .comparisons
            .coverage()
            .into_iter()
            .enumerate()
            .map(|(k, count)| ProductCoverage { id: k + 1, count })
            .collect();
        let under_covered: Vec<ProductCoverage> = counts.iter().copied().filter(|c| c.count < MIN_COVERAGE).collect();
        Self { min_required: MIN_COVERAGE, complete: under_covered.is_empty(), counts, under_covered }
    }
}

/// Stage-2 body: product id (as a JSON object key) to score.
pub type AppealBody = BTreeMap<String, f64>;

/// Stage-3 body: product id to the (R1, R2, R3) codes.
pub type RulesBody = BTreeMap<String, [i64; 3]>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalyzeRequest {
    /// Perceptual-space dimension; the vector model needs 2.
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_k() -> usize {
    2
}

impl Default for AnalyzeRequest {
    fn default() -> Self {
        Self { k: default_k(), seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    /// Stable machine-readable code, e.g. `protocol_order`.
    pub error: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub under_covered: Option<Vec<ProductCoverage>>,
}
