//! Domain types for a staged assessment: products and their design
//! parameters, the sparse dissimilarity matrix, hedonic appeal scores and the
//! per-rule derivative judgments, plus the session that gates them.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Every product must take part in at least this many comparisons.
pub const MIN_COVERAGE: usize = 3;
/// Largest dissimilarity code ("very different").
pub const MAX_DISSIMILARITY: u8 = 3;
pub const MIN_APPEAL: f64 = 0.0;
pub const MAX_APPEAL: f64 = 10.0;

pub type ProductId = usize;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("asymmetric cells at ({i},{j})")]
    Asymmetry { i: ProductId, j: ProductId },
    #[error("diagonal cell ({0},{0}) must be 0")]
    NonZeroDiagonal(ProductId),
    #[error("line {line}: {message}")]
    OutOfRange { line: usize, message: String },
    #[error("unknown product {0}")]
    UnknownProduct(ProductId),
    #[error("self-pair ({0},{0}) is not a comparison")]
    SelfPair(ProductId),
    #[error("dissimilarity {0} outside 0..{max}", max = MAX_DISSIMILARITY)]
    DissimilarityOutOfRange(u8),
    #[error("appeal score {score} for product {id} outside [0, 10]")]
    AppealOutOfRange { id: ProductId, score: f64 },
    #[error("rule code {code} for product {id} outside {{-1, 0, 1}}")]
    RuleCodeOutOfRange { id: ProductId, code: i8 },
    #[error("missing data for products {0:?}")]
    Missing(Vec<ProductId>),
    #[error("invalid product list: {0}")]
    InvalidProducts(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Design parameters of a glass, in centimetres.
///
/// `d1` is the total height of the container, `d2` the height of the foot and
/// `d3` the diameter of the container.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignParams {
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

impl DesignParams {
    pub const fn new(d1: f64, d2: f64, d3: f64) -> Self {
        Self { d1, d2, d3 }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.d1, self.d2, self.d3]
    }

    pub fn from_array(d: [f64; 3]) -> Self {
        Self::new(d[0], d[1], d[2])
    }

    pub fn is_positive(&self) -> bool {
        self.as_array().iter().all(|v| v.is_finite() && *v > 0.0)
    }

    pub fn get(&self, rule: Rule) -> f64 {
        self.as_array()[rule.index()]
    }
}

/// Shape-regulating rules: each one increases a single design parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Rule {
    /// Increase the total height of the container (d1).
    R1,
    /// Increase the height of the foot (d2).
    R2,
    /// Increase the diameter of the container (d3).
    R3,
}

impl Rule {
    pub const ALL: [Rule; 3] = [Rule::R1, Rule::R2, Rule::R3];

    pub fn index(self) -> usize {
        match self {
            Rule::R1 => 0,
            Rule::R2 => 1,
            Rule::R3 => 2,
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "R{}", self.index() + 1)
    }
}

impl FromStr for Rule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "R1" | "1" => Ok(Rule::R1),
            "R2" | "2" => Ok(Rule::R2),
            "R3" | "3" => Ok(Rule::R3),
            other => Err(format!("unknown rule `{other}` (expected R1, R2 or R3)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Product {
    pub id: ProductId,
    #[serde(default)]
    pub label: String,
    pub dims: DesignParams,
}

/// Checks the product-list invariants: ids contiguous from 1, at least two
/// products, strictly positive dimensions.
pub fn validate_products(products: &[Product]) -> Result<(), ModelError> {
    if products.len() < 2 {
        return Err(ModelError::InvalidProducts(format!(
            "need at least 2 products, got {}",
            products.len()
        )));
    }
    for (pos, p) in products.iter().enumerate() {
        if p.id != pos + 1 {
            return Err(ModelError::InvalidProducts(format!(
                "ids must be contiguous from 1; position {} has id {}",
                pos + 1,
                p.id
            )));
        }
        if !p.dims.is_positive() {
            return Err(ModelError::InvalidProducts(format!(
                "product {} has non-positive dimensions",
                p.id
            )));
        }
    }
    Ok(())
}

/// Partially observed symmetric dissimilarities. Pairs are stored once with
/// `i <= j`; the diagonal is implicit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseDissimilarityMatrix {
    n: usize,
    entries: BTreeMap<(ProductId, ProductId), u8>,
}

fn canonical(i: ProductId, j: ProductId) -> (ProductId, ProductId) {
    if i <= j {
        (i, j)
    } else {
        (j, i)
    }
}

impl SparseDissimilarityMatrix {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            entries: BTreeMap::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of observed pairs.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn check_id(&self, id: ProductId) -> Result<(), ModelError> {
        if id == 0 || id > self.n {
            Err(ModelError::UnknownProduct(id))
        } else {
            Ok(())
        }
    }

    /// Records a judgment, returning the value it replaced.
    pub fn set(&mut self, i: ProductId, j: ProductId, value: u8) -> Result<Option<u8>, ModelError> {
        self.check_id(i)?;
        self.check_id(j)?;
        if i == j {
            return Err(ModelError::SelfPair(i));
        }
        if value > MAX_DISSIMILARITY {
            return Err(ModelError::DissimilarityOutOfRange(value));
        }
        Ok(self.entries.insert(canonical(i, j), value))
    }

    /// Stores an entry without range or self-pair checks, so that
    /// [`validate_dissimilarity`] can report on untrusted input.
    pub fn insert_unchecked(&mut self, i: ProductId, j: ProductId, value: u8) -> Result<(), ModelError> {
        self.check_id(i)?;
        self.check_id(j)?;
        self.entries.insert(canonical(i, j), value);
        Ok(())
    }

    pub fn get(&self, i: ProductId, j: ProductId) -> Option<u8> {
        if i == j && i >= 1 && i <= self.n {
            return Some(0);
        }
        self.entries.get(&canonical(i, j)).copied()
    }

    /// Observed entries as `(i, j, value)` with `i < j`, in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (ProductId, ProductId, u8)> + '_ {
        self.entries.iter().map(|(&(i, j), &v)| (i, j, v))
    }

    /// Comparison count per product, indexed by `id - 1`.
    pub fn coverage(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n];
        for (i, j, _) in self.iter() {
            if i == j {
                continue;
            }
            counts[i - 1] += 1;
            counts[j - 1] += 1;
        }
        counts
    }

    /// Products below [`MIN_COVERAGE`] as `(id, count)`.
    pub fn under_covered(&self) -> Vec<(ProductId, usize)> {
        self.coverage()
            .into_iter()
            .enumerate()
            .filter(|(_, c)| *c < MIN_COVERAGE)
            .map(|(k, c)| (k + 1, c))
            .collect()
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    n: usize,
    entries: Vec<(ProductId, ProductId, u8)>,
}

impl Serialize for SparseDissimilarityMatrix {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        MatrixRepr {
            n: self.n,
            entries: self.iter().collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SparseDissimilarityMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = MatrixRepr::deserialize(deserializer)?;
        let mut m = SparseDissimilarityMatrix::new(repr.n);
        for (i, j, v) in repr.entries {
            m.insert_unchecked(i, j, v).map_err(serde::de::Error::custom)?;
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    ValueOutOfRange { i: ProductId, j: ProductId, value: u8 },
    SelfPair { product: ProductId },
    Coverage { product: ProductId, count: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ValueOutOfRange { i, j, value } => {
                write!(f, "value out of 0..{MAX_DISSIMILARITY} at ({i},{j}): {value}")
            }
            Violation::SelfPair { product } => write!(f, "self-pair ({product},{product})"),
            Violation::Coverage { product, count } => {
                write!(f, "coverage({product})={count} < {MIN_COVERAGE}")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        for (k, v) in self.violations.iter().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

pub fn validate_dissimilarity(matrix: &SparseDissimilarityMatrix) -> ValidationReport {
    let mut violations = Vec::new();
    for (i, j, v) in matrix.iter() {
        if i == j {
            violations.push(Violation::SelfPair { product: i });
        } else if v > MAX_DISSIMILARITY {
            violations.push(Violation::ValueOutOfRange { i, j, value: v });
        }
    }
    for (product, count) in matrix.under_covered() {
        violations.push(Violation::Coverage { product, count });
    }
    ValidationReport { violations }
}

/// Hedonic appeal per product on the 0-10 scale.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AppealScores(BTreeMap<ProductId, f64>);

impl AppealScores {
    pub fn new(scores: BTreeMap<ProductId, f64>) -> Result<Self, ModelError> {
        for (&id, &score) in &scores {
            if id == 0 {
                return Err(ModelError::UnknownProduct(id));
            }
            if !(score.is_finite() && (MIN_APPEAL..=MAX_APPEAL).contains(&score)) {
                return Err(ModelError::AppealOutOfRange { id, score });
            }
        }
        Ok(Self(scores))
    }

    pub fn get(&self, id: ProductId) -> Option<f64> {
        self.0.get(&id).copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (ProductId, f64)> + '_ {
        self.0.iter().map(|(&k, &v)| (k, v))
    }

    /// Errors unless every id in `1..=n` has a score and nothing else does.
    pub fn check_complete(&self, n: usize) -> Result<(), ModelError> {
        check_keys(self.0.keys().copied(), n)
    }
}

/// Per-product rule judgments: +1 the rule increases appeal, 0 no change,
/// -1 it decreases appeal. Indexed by [`Rule::index`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RuleAssessmentSet(BTreeMap<ProductId, [i8; 3]>);

impl RuleAssessmentSet {
    pub fn new(codes: BTreeMap<ProductId, [i8; 3]>) -> Result<Self, ModelError> {
        for (&id, row) in &codes {
            if id == 0 {
                return Err(ModelError::UnknownProduct(id));
            }
            if let Some(&code) = row.iter().find(|c| !(-1..=1).contains(*c)) {
                return Err(ModelError::RuleCodeOutOfRange { id, code });
            }
        }
        Ok(Self(codes))
    }

    pub fn get(&self, id: ProductId, rule: Rule) -> Option<i8> {
        self.0.get(&id).map(|row| row[rule.index()])
    }

    pub fn row(&self, id: ProductId) -> Option<[i8; 3]> {
        self.0.get(&id).copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (ProductId, [i8; 3])> + '_ {
        self.0.iter().map(|(&k, &v)| (k, v))
    }

    pub fn check_complete(&self, n: usize) -> Result<(), ModelError> {
        check_keys(self.0.keys().copied(), n)
    }
}

fn check_keys(keys: impl Iterator<Item = ProductId>, n: usize) -> Result<(), ModelError> {
    let mut seen = vec![false; n];
    for id in keys {
        if id == 0 || id > n {
            return Err(ModelError::UnknownProduct(id));
        }
        seen[id - 1] = true;
    }
    let missing: Vec<_> = seen
        .iter()
        .enumerate()
        .filter(|(_, s)| !**s)
        .map(|(k, _)| k + 1)
        .collect();
    if missing.is_empty() {
        Ok(())
    } else {
        Err(ModelError::Missing(missing))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageState {
    Open,
    Complete,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageStatus {
    pub stage1: StageState,
    pub stage2: StageState,
    pub stage3: StageState,
}

impl Default for StageStatus {
    fn default() -> Self {
        Self {
            stage1: StageState::Open,
            stage2: StageState::Open,
            stage3: StageState::Open,
        }
    }
}

/// One overwritten or new dissimilarity judgment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub seq: u64,
    pub i: ProductId,
    pub j: ProductId,
    pub value: u8,
    pub previous: Option<u8>,
}

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("stage {stage} requires stage {requires} to be complete")]
    StageOrder { stage: u8, requires: u8 },
    #[error("stage {0} is already complete")]
    StageClosed(u8),
    #[error("products below {MIN_COVERAGE} comparisons: {}", fmt_coverage(.0))]
    Coverage(Vec<(ProductId, usize)>),
    #[error(transparent)]
    Invalid(#[from] ModelError),
}

fn fmt_coverage(items: &[(ProductId, usize)]) -> String {
    items
        .iter()
        .map(|(id, c)| format!("coverage({id})={c}"))
        .collect::<Vec<_>>()
        .join(", ")
}

/// A single subject's staged assessment. Stage 2 cannot start before stage 1
/// is complete, and stage 3 needs stage 2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub id: String,
    pub products: Vec<Product>,
    pub comparisons: SparseDissimilarityMatrix,
    pub appeal: Option<AppealScores>,
    pub rules: Option<RuleAssessmentSet>,
    pub stages: StageStatus,
    #[serde(default)]
    pub audit: Vec<AuditEntry>,
}

impl Session {
    pub fn new(id: impl Into<String>, products: Vec<Product>) -> Result<Self, ModelError> {
        validate_products(&products)?;
        Ok(Self {
            id: id.into(),
            comparisons: SparseDissimilarityMatrix::new(products.len()),
            products,
            appeal: None,
            rules: None,
            stages: StageStatus::default(),
            audit: Vec::new(),
        })
    }

    pub fn n(&self) -> usize {
        self.products.len()
    }

    pub fn product(&self, id: ProductId) -> Option<&Product> {
        id.checked_sub(1).and_then(|k| self.products.get(k))
    }

    pub fn dims(&self) -> BTreeMap<ProductId, DesignParams> {
        self.products.iter().map(|p| (p.id, p.dims)).collect()
    }

    /// Records (or revises) a stage-1 judgment; the previous value goes to the
    /// audit log.
    pub fn record_comparison(
        &mut self,
        i: ProductId,
        j: ProductId,
        value: u8,
    ) -> Result<Option<u8>, SessionError> {
        if self.stages.stage1 == StageState::Complete {
            return Err(SessionError::StageClosed(1));
        }
        let previous = self.comparisons.set(i, j, value)?;
        let (i, j) = canonical(i, j);
        self.audit.push(AuditEntry {
            seq: self.audit.len() as u64,
            i,
            j,
            value,
            previous,
        });
        Ok(previous)
    }

    pub fn complete_stage1(&mut self) -> Result<(), SessionError> {
        if self.stages.stage1 == StageState::Complete {
            return Ok(());
        }
        let under = self.comparisons.under_covered();
        if !under.is_empty() {
            return Err(SessionError::Coverage(under));
        }
        self.stages.stage1 = StageState::Complete;
        Ok(())
    }

    /// Stores the stage-2 scores, which must cover every product. Scores may be
    /// revised until stage 3 is complete.
    pub fn set_appeal(&mut self, scores: AppealScores) -> Result<(), SessionError> {
        if self.stages.stage1 != StageState::Complete {
            return Err(SessionError::StageOrder { stage: 2, requires: 1 });
        }
        if self.stages.stage3 == StageState::Complete {
            return Err(SessionError::StageClosed(3));
        }
        scores.check_complete(self.n())?;
        self.appeal = Some(scores);
        self.stages.stage2 = StageState::Complete;
        Ok(())
    }

    pub fn set_rules(&mut self, rules: RuleAssessmentSet) -> Result<(), SessionError> {
        if self.stages.stage2 != StageState::Complete {
            return Err(SessionError::StageOrder { stage: 3, requires: 2 });
        }
        rules.check_complete(self.n())?;
        self.rules = Some(rules);
        self.stages.stage3 = StageState::Complete;
        Ok(())
    }

    pub fn is_complete(&self) -> bool {
        self.stages.stage1 == StageState::Complete
            && self.stages.stage2 == StageState::Complete
            && self.stages.stage3 == StageState::Complete
    }

    pub fn to_json(&self) -> Result<String, ModelError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Parses a session file and re-checks the invariants that serde alone
    /// cannot express.
    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let session: Session = serde_json::from_str(text)?;
        validate_products(&session.products)?;
        if session.comparisons.n() != session.n() {
            return Err(ModelError::InvalidProducts(format!(
                "comparison matrix is {}x{} but the session has {} products",
                session.comparisons.n(),
                session.comparisons.n(),
                session.n()
            )));
        }
        if let Some(a) = &session.appeal {
            AppealScores::new(a.0.clone())?;
        }
        if let Some(r) = &session.rules {
            RuleAssessmentSet::new(r.0.clone())?;
        }
        Ok(session)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn products(n: usize) -> Vec<Product> {
        (1..=n)
            .map(|id| Product {
                id,
                label: format!("G{id}"),
                dims: DesignParams::new(8.0, 5.0, 8.0),
            })
            .collect()
    }

    #[test]
    fn set_canonicalizes_and_overwrites() {
        let mut m = SparseDissimilarityMatrix::new(3);
        assert_eq!(m.set(3, 1, 2).unwrap(), None);
        assert_eq!(m.get(1, 3), Some(2));
        assert_eq!(m.set(1, 3, 1).unwrap(), Some(2));
        assert_eq!(m.iter().collect::<Vec<_>>(), vec![(1, 3, 1)]);
        assert_eq!(m.get(2, 2), Some(0));
        assert_eq!(m.get(1, 2), None);
    }

    #[test]
    fn set_rejects_bad_input() {
        let mut m = SparseDissimilarityMatrix::new(3);
        assert!(matches!(m.set(1, 1, 0), Err(ModelError::SelfPair(1))));
        assert!(matches!(m.set(1, 4, 0), Err(ModelError::UnknownProduct(4))));
        assert!(matches!(m.set(1, 2, 4), Err(ModelError::DissimilarityOutOfRange(4))));
    }

    #[test]
    fn validation_flags_range_self_pair_and_coverage() {
        let mut m = SparseDissimilarityMatrix::new(4);
        for (i, j) in [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)] {
            m.set(i, j, 1).unwrap();
        }
        assert!(validate_dissimilarity(&m).is_valid());

        m.insert_unchecked(1, 2, 4).unwrap();
        m.insert_unchecked(2, 2, 1).unwrap();
        let report = validate_dissimilarity(&m);
        let msgs: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
        assert_eq!(msgs, vec!["value out of 0..3 at (1,2): 4", "self-pair (2,2)"]);
    }

    #[test]
    fn coverage_violation_names_the_product() {
        let mut m = SparseDissimilarityMatrix::new(5);
        for (i, j) in [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4), (1, 5), (2, 5)] {
            m.set(i, j, 2).unwrap();
        }
        let report = validate_dissimilarity(&m);
        assert_eq!(report.violations, vec![Violation::Coverage { product: 5, count: 2 }]);
        assert_eq!(report.to_string(), "coverage(5)=2 < 3");
    }

    #[test]
    fn appeal_and_rules_reject_out_of_range() {
        let bad = BTreeMap::from([(1, 10.5)]);
        assert!(matches!(AppealScores::new(bad), Err(ModelError::AppealOutOfRange { .. })));
        let bad = BTreeMap::from([(1, [0, 2, 0])]);
        assert!(matches!(
            RuleAssessmentSet::new(bad),
            Err(ModelError::RuleCodeOutOfRange { id: 1, code: 2 })
        ));
    }

    #[test]
    fn products_must_be_contiguous() {
        let mut ps = products(3);
        ps[2].id = 7;
        assert!(validate_products(&ps).is_err());
        assert!(validate_products(&products(1)).is_err());
        let mut ps = products(2);
        ps[0].dims.d3 = 0.0;
        assert!(validate_products(&ps).is_err());
    }

    #[test]
    fn session_gates_stages() {
        let mut s = Session::new("s", products(4)).unwrap();
        let scores = AppealScores::new((1..=4).map(|i| (i, 5.0)).collect()).unwrap();
        assert!(matches!(
            s.set_appeal(scores.clone()),
            Err(SessionError::StageOrder { stage: 2, requires: 1 })
        ));
        for (i, j) in [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4)] {
            s.record_comparison(i, j, 1).unwrap();
        }
        match s.complete_stage1() {
            Err(SessionError::Coverage(under)) => assert_eq!(under, vec![(3, 2), (4, 2)]),
            other => panic!("expected coverage error, got {other:?}"),
        }
        s.record_comparison(4, 3, 0).unwrap();
        s.complete_stage1().unwrap();
        assert!(matches!(s.record_comparison(1, 2, 3), Err(SessionError::StageClosed(1))));

        let rules = RuleAssessmentSet::new((1..=4).map(|i| (i, [0, 1, -1])).collect()).unwrap();
        assert!(matches!(
            s.set_rules(rules.clone()),
            Err(SessionError::StageOrder { stage: 3, requires: 2 })
        ));
        let partial = AppealScores::new(BTreeMap::from([(1, 2.0)])).unwrap();
        assert!(matches!(
            s.set_appeal(partial),
            Err(SessionError::Invalid(ModelError::Missing(_)))
        ));
        s.set_appeal(scores).unwrap();
        s.set_rules(rules).unwrap();
        assert!(s.is_complete());
    }

    #[test]
    fn revisions_are_audited() {
        let mut s = Session::new("s", products(3)).unwrap();
        s.record_comparison(1, 2, 1).unwrap();
        assert_eq!(s.record_comparison(2, 1, 3).unwrap(), Some(1));
        assert_eq!(s.comparisons.get(1, 2), Some(3));
        assert_eq!(s.audit.len(), 2);
        assert_eq!(s.audit[1].previous, Some(1));
    }

    #[test]
    fn session_json_round_trip() {
        let mut s = Session::new("abc", products(3)).unwrap();
        s.record_comparison(1, 3, 2).unwrap();
        let back = Session::from_json(&s.to_json().unwrap()).unwrap();
        assert_eq!(back, s);
    }
}
