//! Quadratic appeal model fitted to hedonic scores *and* to the subject's
//! judgments of how each shape-regulating rule changes appeal.
//!
//! The model is
//!
//! ```text
//! P(d) = a1 d1 + a2 d2 + a3 d3 + a4 d1^2 + a5 d2^2 + a6 d3^2
//!      + a7 d1 d2 + a8 d1 d3 + a9 d2 d3 + a10
//! ```
//!
//! and the coefficients `a` together with one proportionality factor `k_j`
//! per rule minimize
//!
//! ```text
//! F = sum_i (P_i - P(d_i))^2 + sum_i sum_j (dP_ij - k_j dP/dd_j(d_i))^2
//! ```
//!
//! where `dP_ij` is the subject's code in {-1, 0, +1}. For fixed `k` the
//! problem is linear in `a`, and for fixed `a` each `k_j` is a scalar least
//! squares; [`fit_appeal_model`] alternates the two closed-form steps from
//! many random starts and finishes with a Levenberg-Marquardt polish over all
//! thirteen unknowns.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector, SMatrix, SVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{AppealScores, DesignParams, ProductId, RuleAssessmentSet};

pub const COEFFICIENTS: usize = 10;
pub const RULES: usize = 3;

pub const COEFFICIENT_NAMES: [&str; COEFFICIENTS] = [
    "a1 (d1)",
    "a2 (d2)",
    "a3 (d3)",
    "a4 (d1^2)",
    "a5 (d2^2)",
    "a6 (d3^2)",
    "a7 (d1*d2)",
    "a8 (d1*d3)",
    "a9 (d2*d3)",
    "a10 (1)",
];

#[derive(Debug, Error, PartialEq)]
pub enum AppealError {
    #[error("no observations")]
    Empty,
    #[error("insufficient variation: {0}")]
    InsufficientVariation(String),
    #[error("product {0} lacks {1}")]
    Incomplete(ProductId, &'static str),
    #[error("invalid arguments: {0}")]
    InvalidArguments(String),
}

/// Which expression is used for the model's partial derivatives.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientForm {
    /// The analytic gradient of the quadratic.
    #[default]
    Exact,
    /// The variant that multiplies every cross term by the differentiation
    /// variable, e.g. `dP/dd1 = a1 + (2 a4 + a7 d2 + a8 d3) d1`. Only for
    /// comparison runs; it is not the derivative of the model.
    AsPrinted,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AppealModel {
    /// `a1..a10`; `a10` is the intercept.
    pub a: [f64; COEFFICIENTS],
    /// Per-rule proportionality factors `k1..k3`.
    pub k: [f64; RULES],
}

fn features(d: &DesignParams) -> [f64; COEFFICIENTS] {
    let DesignParams { d1, d2, d3 } = *d;
    [d1, d2, d3, d1 * d1, d2 * d2, d3 * d3, d1 * d2, d1 * d3, d2 * d3, 1.0]
}

/// Rows `g_j` with `dP/dd_j = g_j . a`.
fn gradient_features(d: &DesignParams, form: GradientForm) -> [[f64; COEFFICIENTS]; RULES] {
    let DesignParams { d1, d2, d3 } = *d;
    match form {
        GradientForm::Exact => [
            [1.0, 0.0, 0.0, 2.0 * d1, 0.0, 0.0, d2, d3, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0, 2.0 * d2, 0.0, d1, 0.0, d3, 0.0],
            [0.0, 0.0, 1.0, 0.0, 0.0, 2.0 * d3, 0.0, d1, d2, 0.0],
        ],
        GradientForm::AsPrinted => [
            [1.0, 0.0, 0.0, 2.0 * d1, 0.0, 0.0, d1 * d2, d1 * d3, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0, 2.0 * d2, 0.0, d1 * d2, 0.0, d2 * d3, 0.0],
            [0.0, 0.0, 1.0, 0.0, 0.0, 2.0 * d3, 0.0, d1 * d3, d2 * d3, 0.0],
        ],
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl AppealModel {
    pub const ZERO: AppealModel = AppealModel {
        a: [0.0; COEFFICIENTS],
        k: [0.0; RULES],
    };

    pub fn predict(&self, d: &DesignParams) -> f64 {
        dot(&features(d), &self.a)
    }

    pub fn gradient(&self, d: &DesignParams) -> [f64; RULES] {
        self.gradient_with(d, GradientForm::Exact)
    }

    pub fn gradient_with(&self, d: &DesignParams, form: GradientForm) -> [f64; RULES] {
        let g = gradient_features(d, form);
        [dot(&g[0], &self.a), dot(&g[1], &self.a), dot(&g[2], &self.a)]
    }
}

pub fn predict_appeal(model: &AppealModel, dims: &DesignParams) -> f64 {
    model.predict(dims)
}

pub fn appeal_gradient(model: &AppealModel, dims: &DesignParams) -> [f64; RULES] {
    model.gradient(dims)
}

/// One product's joined judgments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub id: ProductId,
    pub dims: DesignParams,
    pub appeal: f64,
    pub deltas: [i8; RULES],
}

/// Joins appeal scores, rule codes and dimensions by product id. Every product
/// with dimensions must have a score and a full set of codes.
pub fn observations(
    appeal: &AppealScores,
    rules: &RuleAssessmentSet,
    dims: &BTreeMap<ProductId, DesignParams>,
) -> Result<Vec<Observation>, AppealError> {
    dims.iter()
        .map(|(&id, &d)| {
            Ok(Observation {
                id,
                dims: d,
                appeal: appeal.get(id).ok_or(AppealError::Incomplete(id, "an appeal score"))?,
                deltas: rules.row(id).ok_or(AppealError::Incomplete(id, "rule codes"))?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveTerms {
    /// `sum_i (P_i - P(d_i))^2`
    pub appeal: f64,
    /// `sum_i sum_j (dP_ij - k_j dP/dd_j)^2`
    pub derivative: f64,
}

impl ObjectiveTerms {
    pub fn total(&self) -> f64 {
        self.appeal + self.derivative
    }
}

pub fn objective_terms(model: &AppealModel, obs: &[Observation], form: GradientForm) -> ObjectiveTerms {
    let mut terms = ObjectiveTerms {
        appeal: 0.0,
        derivative: 0.0,
    };
    for o in obs {
        let r = o.appeal - model.predict(&o.dims);
        terms.appeal += r * r;
        let g = model.gradient_with(&o.dims, form);
        for j in 0..RULES {
            let r = f64::from(o.deltas[j]) - model.k[j] * g[j];
            terms.derivative += r * r;
        }
    }
    terms
}

/// The combined least-squares objective with the exact gradient.
pub fn objective(model: &AppealModel, obs: &[Observation]) -> f64 {
    objective_terms(model, obs, GradientForm::Exact).total()
}

/// Optimal `k` for fixed coefficients (each factor is a scalar regression of
/// the codes on the model's partial derivatives).
pub fn refit_k(a: &[f64; COEFFICIENTS], obs: &[Observation], form: GradientForm, k_nonneg: bool) -> [f64; RULES] {
    let model = AppealModel { a: *a, k: [0.0; RULES] };
    let mut k = [0.0; RULES];
    for (j, kj) in k.iter_mut().enumerate() {
        let (mut num, mut den) = (0.0, 0.0);
        for o in obs {
            let g = model.gradient_with(&o.dims, form)[j];
            num += g * f64::from(o.deltas[j]);
            den += g * g;
        }
        *kj = if den > 0.0 { num / den } else { 0.0 };
        if k_nonneg {
            *kj = kj.max(0.0);
        }
    }
    k
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub starts: usize,
    pub seed: u64,
    /// Weight of the `ridge * |a|^2` penalty added to the objective.
    pub ridge: f64,
    /// Project the proportionality factors onto `k >= 0`.
    pub k_nonneg: bool,
    pub gradient_form: GradientForm,
    pub max_alternations: usize,
    /// Relative objective improvement below which alternation stops.
    pub tolerance: f64,
    /// Finish the best starts with Levenberg-Marquardt over `(a, k)`.
    pub polish: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            starts: 50,
            seed: 0,
            ridge: 1e-6,
            k_nonneg: false,
            gradient_form: GradientForm::Exact,
            max_alternations: 5000,
            tolerance: 1e-13,
            polish: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationResidual {
    pub id: ProductId,
    /// Observed minus predicted appeal.
    pub appeal: f64,
    /// `dP_ij - k_j dP/dd_j` per rule.
    pub derivative: [f64; RULES],
}

/// Products with identical design parameters; the model cannot tell them
/// apart, so their appeal residuals cannot all vanish.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DuplicateGroup {
    pub ids: Vec<ProductId>,
    pub dims: DesignParams,
    pub appeal_residuals: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentifiabilityReport {
    /// Design parameters that never vary across the observations.
    pub constant_dims: Vec<String>,
    /// Rank of the 10-column appeal design (scaled columns).
    pub appeal_design_rank: usize,
    /// Rank after stacking the derivative rows weighted by the fitted `k`.
    pub combined_design_rank: usize,
    /// Coefficient groups whose columns are (nearly) collinear in the appeal
    /// design; only their combination is pinned down by the scores.
    pub collinear_groups: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub objective: f64,
    pub appeal_term: f64,
    pub derivative_term: f64,
    pub ridge_penalty: f64,
    pub gradient_form: GradientForm,
    pub starts: usize,
    pub best_start: usize,
    /// Starts whose alternation met the tolerance.
    pub converged_starts: usize,
    pub alternations: usize,
    pub polish_iterations: usize,
    /// `|grad F| / (1 + F)` at the returned model, by central differences.
    pub scaled_gradient_norm: f64,
    pub residuals: Vec<ObservationResidual>,
    pub duplicates: Vec<DuplicateGroup>,
    pub identifiability: IdentifiabilityReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppealFit {
    pub model: AppealModel,
    pub diagnostics: FitDiagnostics,
}

/// The stacked linear pieces of the objective.
struct Design {
    appeal_rows: Vec<[f64; COEFFICIENTS]>,
    appeal_targets: Vec<f64>,
    grad_rows: [Vec<[f64; COEFFICIENTS]>; RULES],
    grad_targets: [Vec<f64>; RULES],
    /// Gram blocks: `F'F`, `F'P`, `G_j'G_j`, `G_j'dP_j`.
    appeal_gram: SMatrix<f64, COEFFICIENTS, COEFFICIENTS>,
    appeal_rhs: SVector<f64, COEFFICIENTS>,
    grad_gram: [SMatrix<f64, COEFFICIENTS, COEFFICIENTS>; RULES],
    grad_rhs: [SVector<f64, COEFFICIENTS>; RULES],
}

impl Design {
    fn new(obs: &[Observation], form: GradientForm) -> Self {
        let mut grad_rows: [Vec<[f64; COEFFICIENTS]>; RULES] = Default::default();
        let mut grad_targets: [Vec<f64>; RULES] = Default::default();
        for o in obs {
            let g = gradient_features(&o.dims, form);
            for j in 0..RULES {
                grad_rows[j].push(g[j]);
                grad_targets[j].push(f64::from(o.deltas[j]));
            }
        }
        let appeal_rows: Vec<[f64; COEFFICIENTS]> = obs.iter().map(|o| features(&o.dims)).collect();
        let appeal_targets: Vec<f64> = obs.iter().map(|o| o.appeal).collect();
        let gram = |rows: &[[f64; COEFFICIENTS]], targets: &[f64]| {
            let mut g = SMatrix::<f64, COEFFICIENTS, COEFFICIENTS>::zeros();
            let mut r = SVector::<f64, COEFFICIENTS>::zeros();
            for (row, t) in rows.iter().zip(targets) {
                let v = SVector::<f64, COEFFICIENTS>::from_row_slice(row);
                g += v * v.transpose();
                r += v * *t;
            }
            (g, r)
        };
        let (appeal_gram, appeal_rhs) = gram(&appeal_rows, &appeal_targets);
        let grams: [_; RULES] = std::array::from_fn(|j| gram(&grad_rows[j], &grad_targets[j]));
        Self {
            appeal_rows,
            appeal_targets,
            grad_gram: grams.map(|g| g.0),
            grad_rhs: grams.map(|g| g.1),
            grad_rows,
            grad_targets,
            appeal_gram,
            appeal_rhs,
        }
    }

    fn n(&self) -> usize {
        self.appeal_rows.len()
    }

    fn penalized(&self, a: &[f64; COEFFICIENTS], k: &[f64; RULES], ridge: f64) -> f64 {
        let mut f = ridge * dot(a, a);
        for (row, t) in self.appeal_rows.iter().zip(&self.appeal_targets) {
            let r = t - dot(row, a);
            f += r * r;
        }
        for j in 0..RULES {
            for (row, t) in self.grad_rows[j].iter().zip(&self.grad_targets[j]) {
                let r = t - k[j] * dot(row, a);
                f += r * r;
            }
        }
        f
    }

    /// Ridge least squares for `a` at fixed `k`.
    fn solve_a(&self, k: &[f64; RULES], ridge: f64) -> [f64; COEFFICIENTS] {
        if ridge > 0.0 {
            let mut lhs = self.appeal_gram;
            let mut rhs = self.appeal_rhs;
            for j in 0..RULES {
                lhs += self.grad_gram[j] * (k[j] * k[j]);
                rhs += self.grad_rhs[j] * k[j];
            }
            for c in 0..COEFFICIENTS {
                lhs[(c, c)] += ridge;
            }
            if let Some(chol) = lhs.cholesky() {
                let sol = chol.solve(&rhs);
                return std::array::from_fn(|c| sol[c]);
            }
        }
        self.solve_a_svd(k, ridge)
    }

    /// Minimum-norm solution of the stacked system; used when the normal
    /// equations are singular.
    fn solve_a_svd(&self, k: &[f64; RULES], ridge: f64) -> [f64; COEFFICIENTS] {
        let n = self.n();
        let rows = n * (1 + RULES) + COEFFICIENTS;
        let mut m = DMatrix::<f64>::zeros(rows, COEFFICIENTS);
        let mut b = DVector::<f64>::zeros(rows);
        for (i, (row, t)) in self.appeal_rows.iter().zip(&self.appeal_targets).enumerate() {
            for c in 0..COEFFICIENTS {
                m[(i, c)] = row[c];
            }
            b[i] = *t;
        }
        for j in 0..RULES {
            let offset = n * (1 + j);
            for (i, (row, t)) in self.grad_rows[j].iter().zip(&self.grad_targets[j]).enumerate() {
                for c in 0..COEFFICIENTS {
                    m[(offset + i, c)] = k[j] * row[c];
                }
                b[offset + i] = *t;
            }
        }
        let sr = ridge.sqrt();
        for c in 0..COEFFICIENTS {
            m[(n * (1 + RULES) + c, c)] = sr;
        }
        let svd = m.svd(true, true);
        let eps = svd.singular_values.max() * 1e-12;
        let sol = svd.solve(&b, eps).expect("u and v_t were computed");
        std::array::from_fn(|c| sol[c])
    }

    fn solve_k(&self, a: &[f64; COEFFICIENTS], k_nonneg: bool) -> [f64; RULES] {
        std::array::from_fn(|j| {
            let (mut num, mut den) = (0.0, 0.0);
            for (row, t) in self.grad_rows[j].iter().zip(&self.grad_targets[j]) {
                let g = dot(row, a);
                num += g * t;
                den += g * g;
            }
            let kj = if den > 1e-300 { num / den } else { 0.0 };
            if k_nonneg {
                kj.max(0.0)
            } else {
                kj
            }
        })
    }

    /// Residual vector and Jacobian over `(a, k)` for the penalized objective.
    fn residuals_and_jacobian(
        &self,
        a: &[f64; COEFFICIENTS],
        k: &[f64; RULES],
        ridge: f64,
    ) -> (DVector<f64>, DMatrix<f64>) {
        let n = self.n();
        let rows = n * (1 + RULES) + COEFFICIENTS;
        let cols = COEFFICIENTS + RULES;
        let mut r = DVector::<f64>::zeros(rows);
        let mut jac = DMatrix::<f64>::zeros(rows, cols);
        for (i, (row, t)) in self.appeal_rows.iter().zip(&self.appeal_targets).enumerate() {
            r[i] = dot(row, a) - t;
            for c in 0..COEFFICIENTS {
                jac[(i, c)] = row[c];
            }
        }
        for j in 0..RULES {
            let offset = n * (1 + j);
            for (i, (row, t)) in self.grad_rows[j].iter().zip(&self.grad_targets[j]).enumerate() {
                let g = dot(row, a);
                r[offset + i] = k[j] * g - t;
                for c in 0..COEFFICIENTS {
                    jac[(offset + i, c)] = k[j] * row[c];
                }
                jac[(offset + i, COEFFICIENTS + j)] = g;
            }
        }
        let sr = ridge.sqrt();
        for c in 0..COEFFICIENTS {
            r[n * (1 + RULES) + c] = sr * a[c];
            jac[(n * (1 + RULES) + c, c)] = sr;
        }
        (r, jac)
    }
}

struct StartResult {
    a: [f64; COEFFICIENTS],
    k: [f64; RULES],
    value: f64,
    alternations: usize,
    converged: bool,
}

fn alternate(design: &Design, options: &FitOptions, start: usize) -> StartResult {
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    rng.set_stream(start as u64);
    let mut k: [f64; RULES] = std::array::from_fn(|_| {
        let v: f64 = StandardNormal.sample(&mut rng);
        if options.k_nonneg {
            v.abs()
        } else {
            v
        }
    });
    let mut a = design.solve_a(&k, options.ridge);
    let mut value = design.penalized(&a, &k, options.ridge);
    let mut converged = false;
    let mut iterations = 0;
    for it in 1..=options.max_alternations {
        iterations = it;
        k = design.solve_k(&a, options.k_nonneg);
        a = design.solve_a(&k, options.ridge);
        let next = design.penalized(&a, &k, options.ridge);
        let improvement = value - next;
        value = next;
        if improvement <= options.tolerance * (1.0 + value) {
            converged = true;
            break;
        }
    }
    StartResult {
        a,
        k,
        value,
        alternations: iterations,
        converged,
    }
}

fn unpack(theta: &DVector<f64>) -> ([f64; COEFFICIENTS], [f64; RULES]) {
    (
        std::array::from_fn(|c| theta[c]),
        std::array::from_fn(|j| theta[COEFFICIENTS + j]),
    )
}

/// Levenberg-Marquardt on the penalized objective, starting from an
/// alternation result. Never returns a worse point than it was given.
fn polish(design: &Design, options: &FitOptions, start: &StartResult) -> (StartResult, usize) {
    let cols = COEFFICIENTS + RULES;
    let mut theta = DVector::from_iterator(cols, start.a.iter().chain(start.k.iter()).copied());
    let mut value = start.value;
    let mut mu = 1e-3;
    let mut iterations = 0;
    for it in 1..=500 {
        iterations = it;
        let (a, k) = unpack(&theta);
        let (r, jac) = design.residuals_and_jacobian(&a, &k, options.ridge);
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let grad = &jt * &r;
        if grad.norm() <= 1e-14 * (1.0 + value) {
            break;
        }
        let scale = jtj.diagonal().max().max(1e-300);
        let mut improved = false;
        for _ in 0..40 {
            let mut lhs = jtj.clone();
            for c in 0..cols {
                lhs[(c, c)] += mu * scale;
            }
            let Some(chol) = lhs.cholesky() else {
                mu *= 10.0;
                continue;
            };
            let step = chol.solve(&(-&grad));
            let mut trial = &theta + &step;
            if options.k_nonneg {
                for j in 0..RULES {
                    trial[COEFFICIENTS + j] = trial[COEFFICIENTS + j].max(0.0);
                }
            }
            let (ta, tk) = unpack(&trial);
            let tv = design.penalized(&ta, &tk, options.ridge);
            if tv < value {
                let gain = value - tv;
                theta = trial;
                value = tv;
                mu = (mu * 0.3).max(1e-15);
                improved = gain > 1e-15 * (1.0 + value);
                break;
            }
            mu *= 10.0;
        }
        if !improved {
            break;
        }
    }
    let (a, k) = unpack(&theta);
    (
        StartResult {
            a,
            k,
            value,
            alternations: start.alternations,
            converged: start.converged,
        },
        iterations,
    )
}

fn distinct_dims(obs: &[Observation]) -> usize {
    let mut seen: Vec<[u64; 3]> = obs
        .iter()
        .map(|o| o.dims.as_array().map(f64::to_bits))
        .collect();
    seen.sort_unstable();
    seen.dedup();
    seen.len()
}

fn constant_dims(obs: &[Observation]) -> Vec<String> {
    (0..3)
        .filter(|&c| {
            let first = obs[0].dims.as_array()[c];
            obs.iter().all(|o| o.dims.as_array()[c] == first)
        })
        .map(|c| format!("d{}", c + 1))
        .collect()
}

fn numeric_rank(m: &DMatrix<f64>) -> (usize, DMatrix<f64>, DVector<f64>) {
    // Scale columns to unit norm so the threshold is unit-free.
    let mut scaled = m.clone();
    for mut col in scaled.column_iter_mut() {
        let norm = col.norm();
        if norm > 0.0 {
            col /= norm;
        }
    }
    let cols = scaled.ncols();
    // Pad to at least `cols` rows so the SVD yields a full right basis.
    let padded = if scaled.nrows() < cols {
        scaled.clone().resize_vertically(cols, 0.0)
    } else {
        scaled
    };
    let svd = padded.svd(false, true);
    let sv = svd.singular_values.clone();
    let tol = sv.max() * 1e-9;
    let rank = sv.iter().filter(|s| **s > tol).count();
    (rank, svd.v_t.expect("v_t requested"), sv)
}

fn identifiability(design: &Design, obs: &[Observation], k: &[f64; RULES]) -> IdentifiabilityReport {
    let n = design.n();
    let appeal = DMatrix::from_fn(n, COEFFICIENTS, |i, c| design.appeal_rows[i][c]);
    let (appeal_rank, v_t, sv) = numeric_rank(&appeal);
    let tol = sv.max() * 1e-9;

    // Columns sharing support in a null vector are merged into one group.
    let mut parent: Vec<usize> = (0..COEFFICIENTS).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while parent[r] != r {
            r = parent[r];
        }
        parent[x] = r;
        r
    }
    let mut involved = [false; COEFFICIENTS];
    for (s, row) in sv.iter().zip(v_t.row_iter()) {
        if *s > tol {
            continue;
        }
        let support: Vec<usize> = (0..COEFFICIENTS).filter(|&c| row[c].abs() > 1e-6).collect();
        for w in support.windows(2) {
            let (ra, rb) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
            parent[ra] = rb;
        }
        for c in support {
            involved[c] = true;
        }
    }
    let mut groups: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    for c in 0..COEFFICIENTS {
        if involved[c] {
            let root = find(&mut parent, c);
            groups.entry(root).or_default().push(COEFFICIENT_NAMES[c].to_string());
        }
    }
    let mut collinear_groups: Vec<Vec<String>> = groups.into_values().filter(|g| g.len() > 1).collect();
    collinear_groups.sort();

    let mut combined = DMatrix::<f64>::zeros(n * (1 + RULES), COEFFICIENTS);
    for i in 0..n {
        for c in 0..COEFFICIENTS {
            combined[(i, c)] = design.appeal_rows[i][c];
            for j in 0..RULES {
                combined[(n * (1 + j) + i, c)] = k[j] * design.grad_rows[j][i][c];
            }
        }
    }
    let (combined_rank, _, _) = numeric_rank(&combined);
    IdentifiabilityReport {
        constant_dims: constant_dims(obs),
        appeal_design_rank: appeal_rank,
        combined_design_rank: combined_rank,
        collinear_groups,
    }
}

fn duplicates(model: &AppealModel, obs: &[Observation]) -> Vec<DuplicateGroup> {
    let mut groups: BTreeMap<[u64; 3], Vec<&Observation>> = BTreeMap::new();
    for o in obs {
        groups.entry(o.dims.as_array().map(f64::to_bits)).or_default().push(o);
    }
    let mut out: Vec<DuplicateGroup> = groups
        .into_values()
        .filter(|g| g.len() > 1)
        .map(|g| DuplicateGroup {
            ids: g.iter().map(|o| o.id).collect(),
            dims: g[0].dims,
            appeal_residuals: g.iter().map(|o| o.appeal - model.predict(&o.dims)).collect(),
        })
        .collect();
    out.sort_by_key(|g| g.ids[0]);
    out
}

/// `|grad F| / (1 + F)` of the unpenalized objective over `(a, k)`.
pub fn scaled_gradient_norm(model: &AppealModel, obs: &[Observation], form: GradientForm) -> f64 {
    let f0 = objective_terms(model, obs, form).total();
    let mut sq = 0.0;
    for p in 0..COEFFICIENTS + RULES {
        let value = |delta: f64| {
            let mut m = *model;
            if p < COEFFICIENTS {
                m.a[p] += delta;
            } else {
                m.k[p - COEFFICIENTS] += delta;
            }
            objective_terms(&m, obs, form).total()
        };
        let base = if p < COEFFICIENTS {
            model.a[p]
        } else {
            model.k[p - COEFFICIENTS]
        };
        let h = 1e-6 * base.abs().max(1e-3);
        let g = (value(h) - value(-h)) / (2.0 * h);
        sq += g * g;
    }
    sq.sqrt() / (1.0 + f0)
}

/// Fits the appeal model to scores and rule codes.
///
/// Starts are independent and run in parallel; the lowest penalized objective
/// wins, ties going to the lower start index.
pub fn fit_appeal_model(obs: &[Observation], options: &FitOptions) -> Result<AppealFit, AppealError> {
    if obs.is_empty() {
        return Err(AppealError::Empty);
    }
    if options.starts == 0 {
        return Err(AppealError::InvalidArguments("starts must be at least 1".into()));
    }
    if !(options.ridge >= 0.0 && options.ridge.is_finite()) {
        return Err(AppealError::InvalidArguments(format!("ridge {} must be >= 0", options.ridge)));
    }
    if distinct_dims(obs) < 2 {
        return Err(AppealError::InsufficientVariation(
            "need at least 2 distinct design-parameter triples".into(),
        ));
    }
    let constant = constant_dims(obs);
    if options.ridge == 0.0 && !constant.is_empty() {
        return Err(AppealError::InsufficientVariation(format!(
            "{} constant across observations and the fit is unregularized",
            constant.join(", ")
        )));
    }

    let design = Design::new(obs, options.gradient_form);
    let results: Vec<StartResult> = (0..options.starts)
        .into_par_iter()
        .map(|s| alternate(&design, options, s))
        .collect();
    let converged_starts = results.iter().filter(|r| r.converged).count();
    let (best_start, best) = results
        .into_iter()
        .enumerate()
        .min_by(|(ia, a), (ib, b)| a.value.total_cmp(&b.value).then(ia.cmp(ib)))
        .expect("at least one start");

    let (best, polish_iterations) = if options.polish {
        polish(&design, options, &best)
    } else {
        (best, 0)
    };

    let model = AppealModel { a: best.a, k: best.k };
    let terms = objective_terms(&model, obs, options.gradient_form);
    let residuals = obs
        .iter()
        .map(|o| {
            let g = model.gradient_with(&o.dims, options.gradient_form);
            ObservationResidual {
                id: o.id,
                appeal: o.appeal - model.predict(&o.dims),
                derivative: std::array::from_fn(|j| f64::from(o.deltas[j]) - model.k[j] * g[j]),
            }
        })
        .collect();
    let diagnostics = FitDiagnostics {
        objective: terms.total(),
        appeal_term: terms.appeal,
        derivative_term: terms.derivative,
        ridge_penalty: options.ridge * dot(&model.a, &model.a),
        gradient_form: options.gradient_form,
        starts: options.starts,
        best_start,
        converged_starts,
        alternations: best.alternations,
        polish_iterations,
        scaled_gradient_norm: scaled_gradient_norm(&model, obs, options.gradient_form),
        residuals,
        duplicates: duplicates(&model, obs),
        identifiability: identifiability(&design, obs, &model.k),
    };
    Ok(AppealFit { model, diagnostics })
}

/// The model restricted to a fixed `d1`: a quadratic in `(d2, d3)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResponseSurface {
    pub fixed_d1: f64,
    pub c0: f64,
    pub c_d2: f64,
    pub c_d3: f64,
    pub c_d2_sq: f64,
    pub c_d3_sq: f64,
    pub c_d2d3: f64,
}

impl ResponseSurface {
    pub fn eval(&self, d2: f64, d3: f64) -> f64 {
        self.c0 + self.c_d2 * d2 + self.c_d3 * d3 + self.c_d2_sq * d2 * d2 + self.c_d3_sq * d3 * d3
            + self.c_d2d3 * d2 * d3
    }

    /// `(dP/dd2, dP/dd3)`.
    pub fn gradient(&self, d2: f64, d3: f64) -> [f64; 2] {
        [
            self.c_d2 + 2.0 * self.c_d2_sq * d2 + self.c_d2d3 * d3,
            self.c_d3 + 2.0 * self.c_d3_sq * d3 + self.c_d2d3 * d2,
        ]
    }
}

pub fn response_surface(model: &AppealModel, fixed_d1: f64) -> Result<ResponseSurface, AppealError> {
    if !(fixed_d1 > 0.0 && fixed_d1.is_finite()) {
        return Err(AppealError::InvalidArguments(format!("d1 = {fixed_d1} must be positive")));
    }
    let a = &model.a;
    let d1 = fixed_d1;
    Ok(ResponseSurface {
        fixed_d1,
        c0: a[0] * d1 + a[9] + a[3] * d1 * d1,
        c_d2: a[1] + a[6] * d1,
        c_d3: a[2] + a[7] * d1,
        c_d2_sq: a[4],
        c_d3_sq: a[5],
        c_d2d3: a[8],
    })
}

/// Closed interval of a design parameter, in cm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Span {
    pub lo: f64,
    pub hi: f64,
}

impl Span {
    pub fn new(lo: f64, hi: f64) -> Result<Self, AppealError> {
        if lo.is_finite() && hi.is_finite() && lo <= hi {
            Ok(Self { lo, hi })
        } else {
            Err(AppealError::InvalidArguments(format!("invalid range [{lo}, {hi}]")))
        }
    }

    fn lerp(&self, t: f64) -> f64 {
        self.lo + t * (self.hi - self.lo)
    }
}

/// Appeal sampled at cell centres. `values[row][col]` is at
/// `(d2[col], d3[row])`, rows ordered by increasing d3.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Raster {
    pub d2_span: Span,
    pub d3_span: Span,
    pub d2: Vec<f64>,
    pub d3: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    pub min: f64,
    pub max: f64,
}

impl Raster {
    /// `d2,d3,appeal` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("d2,d3,appeal\n");
        for (row, d3) in self.values.iter().zip(&self.d3) {
            for (v, d2) in row.iter().zip(&self.d2) {
                out.push_str(&format!("{d2},{d3},{v}\n"));
            }
        }
        out
    }
}

pub fn surface_colormap(
    surface: &ResponseSurface,
    d2_span: Span,
    d3_span: Span,
    resolution: (usize, usize),
) -> Result<Raster, AppealError> {
    let (nx, ny) = resolution;
    if nx == 0 || ny == 0 {
        return Err(AppealError::InvalidArguments("resolution must be positive".into()));
    }
    let d2: Vec<f64> = (0..nx).map(|i| d2_span.lerp((i as f64 + 0.5) / nx as f64)).collect();
    let d3: Vec<f64> = (0..ny).map(|j| d3_span.lerp((j as f64 + 0.5) / ny as f64)).collect();
    let values: Vec<Vec<f64>> = d3
        .iter()
        .map(|&y| d2.iter().map(|&x| surface.eval(x, y)).collect())
        .collect();
    let (min, max) = values
        .iter()
        .flatten()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    Ok(Raster {
        d2_span,
        d3_span,
        d2,
        d3,
        values,
        min,
        max,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsoRegion {
    pub d2: Span,
    pub d3: Span,
    /// Marching-squares cells per axis.
    pub resolution: usize,
    /// Gradient samples per axis.
    pub field_resolution: usize,
}

/// Straight-line fit `d3 = slope * d2 + intercept` of one polyline, by total
/// least squares. Vertical lines have no slope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    /// RMS perpendicular distance of the polyline from the fitted line.
    pub rms_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsoPolyline {
    pub points: Vec<[f64; 2]>,
    pub fit: Option<LineFit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsoLevel {
    pub level: f64,
    /// The level lies outside the surface's range over the region.
    pub empty: bool,
    pub polylines: Vec<IsoPolyline>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradientSample {
    pub d2: f64,
    pub d3: f64,
    pub gradient: [f64; 2],
    /// Slope `dd3/dd2` of the iso-appeal curve through this point.
    pub iso_slope: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsoAnalysis {
    pub region: IsoRegion,
    pub levels: Vec<IsoLevel>,
    pub gradient_field: Vec<GradientSample>,
    /// Median of the finite local iso-slopes over the gradient field.
    pub median_iso_slope: Option<f64>,
}

fn fit_line(points: &[[f64; 2]]) -> Option<LineFit> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p[0]).sum::<f64>() / n;
    let my = points.iter().map(|p| p[1]).sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for p in points {
        let (dx, dy) = (p[0] - mx, p[1] - my);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx + syy == 0.0 {
        return None;
    }
    // Principal direction of the 2x2 scatter matrix.
    let theta = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    let (dx, dy) = (theta.cos(), theta.sin());
    let rms_deviation = (points
        .iter()
        .map(|p| {
            let d = (p[0] - mx) * dy - (p[1] - my) * dx;
            d * d
        })
        .sum::<f64>()
        / n)
        .sqrt();
    let (slope, intercept) = if dx.abs() <= 1e-12 {
        (None, None)
    } else {
        let s = dy / dx;
        (Some(s), Some(my - s * mx))
    };
    Some(LineFit {
        slope,
        intercept,
        rms_deviation,
    })
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
enum EdgeKey {
    /// From node (i, j) to (i + 1, j).
    H(usize, usize),
    /// From node (i, j) to (i, j + 1).
    V(usize, usize),
}

/// Marching squares over a node grid `z[j][i]` at `(xs[i], ys[j])`.
fn contour(xs: &[f64], ys: &[f64], z: &[Vec<f64>], level: f64) -> Vec<Vec<[f64; 2]>> {
    let point_on = |e: EdgeKey| -> [f64; 2] {
        let ((i0, j0), (i1, j1)) = match e {
            EdgeKey::H(i, j) => ((i, j), (i + 1, j)),
            EdgeKey::V(i, j) => ((i, j), (i, j + 1)),
        };
        let (v0, v1) = (z[j0][i0], z[j1][i1]);
        let t = if v1 == v0 { 0.5 } else { (level - v0) / (v1 - v0) };
        [
            xs[i0] + t * (xs[i1] - xs[i0]),
            ys[j0] + t * (ys[j1] - ys[j0]),
        ]
    };
    let mut segments: Vec<(EdgeKey, EdgeKey)> = Vec::new();
    for j in 0..ys.len() - 1 {
        for i in 0..xs.len() - 1 {
            let above = |ii: usize, jj: usize| z[jj][ii] >= level;
            let (b00, b10, b11, b01) = (above(i, j), above(i + 1, j), above(i + 1, j + 1), above(i, j + 1));
            let bottom = EdgeKey::H(i, j);
            let right = EdgeKey::V(i + 1, j);
            let top = EdgeKey::H(i, j + 1);
            let left = EdgeKey::V(i, j);
            let mut crossed = Vec::with_capacity(4);
            if b00 != b10 {
                crossed.push(bottom);
            }
            if b10 != b11 {
                crossed.push(right);
            }
            if b11 != b01 {
                crossed.push(top);
            }
            if b01 != b00 {
                crossed.push(left);
            }
            match crossed.len() {
                2 => segments.push((crossed[0], crossed[1])),
                4 => {
                    let centre = 0.25 * (z[j][i] + z[j][i + 1] + z[j + 1][i + 1] + z[j + 1][i]);
                    if (centre >= level) == b00 {
                        segments.push((bottom, right));
                        segments.push((top, left));
                    } else {
                        segments.push((left, bottom));
                        segments.push((right, top));
                    }
                }
                _ => {}
            }
        }
    }

    // Chain segments that share an edge crossing.
    let mut by_edge: BTreeMap<EdgeKey, Vec<usize>> = BTreeMap::new();
    for (s, (a, b)) in segments.iter().enumerate() {
        by_edge.entry(*a).or_default().push(s);
        by_edge.entry(*b).or_default().push(s);
    }
    let mut used = vec![false; segments.len()];
    let mut lines = Vec::new();
    let next_from = |edge: EdgeKey, used: &[bool], by_edge: &BTreeMap<EdgeKey, Vec<usize>>| {
        by_edge[&edge].iter().copied().find(|&s| !used[s])
    };
    // Open chains start at an edge used by a single segment; closed loops are
    // picked up afterwards.
    let mut starts: Vec<EdgeKey> = by_edge
        .iter()
        .filter(|(_, segs)| segs.len() == 1)
        .map(|(e, _)| *e)
        .collect();
    starts.extend(segments.iter().map(|(a, _)| *a));
    for start in starts {
        let Some(first) = next_from(start, &used, &by_edge) else { continue };
        let mut chain = vec![start];
        let mut seg = first;
        let mut at = start;
        loop {
            used[seg] = true;
            let (a, b) = segments[seg];
            let other = if a == at { b } else { a };
            chain.push(other);
            at = other;
            match next_from(at, &used, &by_edge) {
                Some(s) => seg = s,
                None => break,
            }
        }
        lines.push(chain.into_iter().map(point_on).collect());
    }
    lines
}

/// Level sets of the surface over `region`, with a line fit per polyline and
/// the local gradient / iso-slope field.
pub fn iso_appeal_lines(
    surface: &ResponseSurface,
    levels: &[f64],
    region: &IsoRegion,
) -> Result<IsoAnalysis, AppealError> {
    if region.resolution == 0 || region.field_resolution == 0 {
        return Err(AppealError::InvalidArguments("resolution must be positive".into()));
    }
    if region.d2.hi <= region.d2.lo || region.d3.hi <= region.d3.lo {
        return Err(AppealError::InvalidArguments("iso-line region must have positive area".into()));
    }
    let nodes = region.resolution + 1;
    let xs: Vec<f64> = (0..nodes).map(|i| region.d2.lerp(i as f64 / region.resolution as f64)).collect();
    let ys: Vec<f64> = (0..nodes).map(|j| region.d3.lerp(j as f64 / region.resolution as f64)).collect();
    let z: Vec<Vec<f64>> = ys.iter().map(|&y| xs.iter().map(|&x| surface.eval(x, y)).collect()).collect();
    let (zmin, zmax) = z
        .iter()
        .flatten()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));

    let levels = levels
        .iter()
        .map(|&level| {
            if level < zmin || level > zmax {
                return IsoLevel {
                    level,
                    empty: true,
                    polylines: Vec::new(),
                };
            }
            let polylines: Vec<IsoPolyline> = contour(&xs, &ys, &z, level)
                .into_iter()
                .map(|points| IsoPolyline {
                    fit: fit_line(&points),
                    points,
                })
                .collect();
            IsoLevel {
                level,
                empty: polylines.is_empty(),
                polylines,
            }
        })
        .collect();

    let m = region.field_resolution;
    let at = |span: &Span, k: usize| {
        if m == 1 {
            span.lerp(0.5)
        } else {
            span.lerp(k as f64 / (m - 1) as f64)
        }
    };
    let mut gradient_field = Vec::with_capacity(m * m);
    for j in 0..m {
        for i in 0..m {
            let (d2, d3) = (at(&region.d2, i), at(&region.d3, j));
            let g = surface.gradient(d2, d3);
            gradient_field.push(GradientSample {
                d2,
                d3,
                gradient: g,
                iso_slope: if g[1] == 0.0 { None } else { Some(-g[0] / g[1]) },
            });
        }
    }
    let mut slopes: Vec<f64> = gradient_field.iter().filter_map(|s| s.iso_slope).collect();
    slopes.sort_by(f64::total_cmp);
    let median_iso_slope = match slopes.len() {
        0 => None,
        len if len % 2 == 1 => Some(slopes[len / 2]),
        len => Some(0.5 * (slopes[len / 2 - 1] + slopes[len / 2])),
    };
    Ok(IsoAnalysis {
        region: *region,
        levels,
        gradient_field,
        median_iso_slope,
    })
}

/// Iso-lines as CSV: `level,polyline,vertex,d2,d3`.
pub fn iso_lines_csv(analysis: &IsoAnalysis) -> String {
    let mut out = String::from("level,polyline,vertex,d2,d3\n");
    for level in &analysis.levels {
        for (p, line) in level.polylines.iter().enumerate() {
            for (v, pt) in line.points.iter().enumerate() {
                out.push_str(&format!("{},{p},{v},{},{}\n", level.level, pt[0], pt[1]));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obs_at(dims: DesignParams, appeal: f64, deltas: [i8; 3]) -> Observation {
        Observation { id: 1, dims, appeal, deltas }
    }

    #[test]
    fn intercept_only_model() {
        let mut m = AppealModel::ZERO;
        m.a[9] = 5.0;
        assert_eq!(m.predict(&DesignParams::new(3.0, 1.0, 7.5)), 5.0);
        assert_eq!(AppealModel::ZERO.gradient(&DesignParams::new(8.0, 5.0, 8.0)), [0.0; 3]);
    }

    #[test]
    fn single_observation_objective() {
        let mut m = AppealModel::ZERO;
        m.a[9] = 6.0;
        let o = obs_at(DesignParams::new(8.0, 5.0, 8.0), 6.0, [1, 0, -1]);
        let t = objective_terms(&m, &[o], GradientForm::Exact);
        assert_eq!(t.appeal, 0.0);
        assert_eq!(t.derivative, 2.0);
        assert_eq!(objective(&m, &[o]), 2.0);
    }

    #[test]
    fn as_printed_form_differs_only_in_cross_terms() {
        let mut m = AppealModel::ZERO;
        m.a = [1.0, 2.0, 3.0, 0.5, 0.25, -0.5, 0.0, 0.0, 0.0, 4.0];
        let d = DesignParams::new(8.0, 5.0, 7.0);
        assert_eq!(m.gradient(&d), m.gradient_with(&d, GradientForm::AsPrinted));
        m.a[6] = 0.1;
        let exact = m.gradient(&d);
        let printed = m.gradient_with(&d, GradientForm::AsPrinted);
        assert!((exact[0] - (1.0 + 8.0 + 0.1 * 5.0)).abs() < 1e-12);
        assert!((printed[0] - (1.0 + 8.0 + 0.1 * 5.0 * 8.0)).abs() < 1e-12);
    }

    #[test]
    fn refit_k_is_scalar_regression() {
        let mut a = [0.0; COEFFICIENTS];
        a[1] = 2.0; // dP/dd2 = 2 everywhere
        let obs: Vec<_> = (0..4)
            .map(|i| obs_at(DesignParams::new(8.0, 3.0 + i as f64, 7.0), 1.0, [0, 1, 0]))
            .collect();
        assert_eq!(refit_k(&a, &obs, GradientForm::Exact, false), [0.0, 0.5, 0.0]);
        a[1] = -2.0;
        assert_eq!(refit_k(&a, &obs, GradientForm::Exact, false), [0.0, -0.5, 0.0]);
        assert_eq!(refit_k(&a, &obs, GradientForm::Exact, true), [0.0, 0.0, 0.0]);
    }

    #[test]
    fn fit_preconditions() {
        assert_eq!(fit_appeal_model(&[], &FitOptions::default()).unwrap_err(), AppealError::Empty);
        let same = vec![obs_at(DesignParams::new(8.0, 5.0, 8.0), 3.0, [0, 0, 0]); 3];
        assert!(matches!(
            fit_appeal_model(&same, &FitOptions::default()),
            Err(AppealError::InsufficientVariation(_))
        ));
        let obs = vec![
            obs_at(DesignParams::new(8.0, 5.0, 8.0), 3.0, [0, 0, 0]),
            obs_at(DesignParams::new(8.0, 3.0, 6.0), 4.0, [0, 1, 0]),
        ];
        let unregularized = FitOptions { ridge: 0.0, ..FitOptions::default() };
        match fit_appeal_model(&obs, &unregularized) {
            Err(AppealError::InsufficientVariation(msg)) => assert!(msg.contains("d1")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn span_validation() {
        assert!(Span::new(1.0, 0.0).is_err());
        assert!(Span::new(f64::NAN, 1.0).is_err());
        assert!(Span::new(2.0, 2.0).is_ok());
    }

    #[test]
    fn line_fit_handles_vertical_and_degenerate() {
        let fit = fit_line(&[[1.0, 0.0], [1.0, 2.0], [1.0, 5.0]]).unwrap();
        assert_eq!(fit.slope, None);
        assert!(fit_line(&[[1.0, 1.0]]).is_none());
        assert!(fit_line(&[[1.0, 1.0], [1.0, 1.0]]).is_none());
        let fit = fit_line(&[[0.0, 1.0], [2.0, 2.0], [4.0, 3.0]]).unwrap();
        assert!((fit.slope.unwrap() - 0.5).abs() < 1e-12);
        assert!((fit.intercept.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn closed_contour_of_a_bowl() {
        let s = ResponseSurface {
            fixed_d1: 8.0,
            c0: 0.0,
            c_d2: 0.0,
            c_d3: 0.0,
            c_d2_sq: 1.0,
            c_d3_sq: 1.0,
            c_d2d3: 0.0,
        };
        let region = IsoRegion {
            d2: Span::new(-2.0, 2.0).unwrap(),
            d3: Span::new(-2.0, 2.0).unwrap(),
            resolution: 40,
            field_resolution: 3,
        };
        let iso = iso_appeal_lines(&s, &[1.0], &region).unwrap();
        assert_eq!(iso.levels[0].polylines.len(), 1);
        let pts = &iso.levels[0].polylines[0].points;
        assert_eq!(pts.first(), pts.last());
        for p in pts {
            assert!((p[0].hypot(p[1]) - 1.0).abs() < 0.01);
        }
    }
}
