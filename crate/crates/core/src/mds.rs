//! Sparse metric multidimensional scaling.
//!
//! The badness of fit is
//!
//! ```text
//! stress = sqrt( sum (d_ij - D_ij)^2 / sum d_ij^2 )
//! ```
//!
//! where `D_ij` is the judged dissimilarity, `d_ij` the Euclidean distance
//! between configured points, and both sums run over the observed pairs
//! (`i < j`) only. Unobserved pairs carry no weight at all.
//!
//! Minimization is plain gradient descent on `stress^2` with an Armijo
//! backtracking step, repeated from several random starts; the lowest-stress
//! restart wins (ties go to the lower restart index).

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{validate_dissimilarity, ProductId, SparseDissimilarityMatrix, ValidationReport};

/// Observed dissimilarities as seen by the optimizer.
pub trait Dissimilarities {
    fn n(&self) -> usize;
    /// Observed pairs `(i, j, D_ij)` with one-based ids and `i < j`.
    fn pairs(&self) -> Vec<(ProductId, ProductId, f64)>;
    /// Preconditions for fitting.
    fn check(&self) -> Result<(), MdsError>;
}

impl Dissimilarities for SparseDissimilarityMatrix {
    fn n(&self) -> usize {
        SparseDissimilarityMatrix::n(self)
    }

    fn pairs(&self) -> Vec<(ProductId, ProductId, f64)> {
        self.iter()
            .filter(|(i, j, _)| i != j)
            .map(|(i, j, v)| (i, j, f64::from(v)))
            .collect()
    }

    fn check(&self) -> Result<(), MdsError> {
        let report = validate_dissimilarity(self);
        if report.is_valid() {
            Ok(())
        } else {
            Err(MdsError::InvalidMatrix(report))
        }
    }
}

/// Real-valued observed dissimilarities, for inputs that are not subject
/// codes (exact distance matrices, rescaled data).
#[derive(Debug, Clone, PartialEq)]
pub struct RealDissimilarities {
    n: usize,
    pairs: Vec<(ProductId, ProductId, f64)>,
}

impl RealDissimilarities {
    pub fn new(n: usize, pairs: impl IntoIterator<Item = (ProductId, ProductId, f64)>) -> Result<Self, MdsError> {
        let mut out = Vec::new();
        for (i, j, v) in pairs {
            if i == 0 || j == 0 || i > n || j > n || i == j {
                return Err(MdsError::InvalidOptions(format!("invalid pair ({i},{j}) for {n} products")));
            }
            if !(v.is_finite() && v >= 0.0) {
                return Err(MdsError::InvalidOptions(format!("dissimilarity ({i},{j}) = {v} must be finite and non-negative")));
            }
            out.push((i.min(j), i.max(j), v));
        }
        out.sort_by_key(|p| (p.0, p.1));
        out.dedup_by(|a, b| (a.0, a.1) == (b.0, b.1));
        Ok(Self { n, pairs: out })
    }

    /// All pairwise Euclidean distances of `points`.
    pub fn from_points(points: &[Vec<f64>]) -> Self {
        let n = points.len();
        let mut pairs = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                pairs.push((i + 1, j + 1, euclidean(&points[i], &points[j])));
            }
        }
        Self { n, pairs }
    }
}

impl Dissimilarities for RealDissimilarities {
    fn n(&self) -> usize {
        self.n
    }

    fn pairs(&self) -> Vec<(ProductId, ProductId, f64)> {
        self.pairs.clone()
    }

    fn check(&self) -> Result<(), MdsError> {
        let mut seen = vec![false; self.n];
        for &(i, j, _) in &self.pairs {
            seen[i - 1] = true;
            seen[j - 1] = true;
        }
        match seen.iter().position(|s| !s) {
            Some(k) => Err(MdsError::InvalidOptions(format!("product {} has no observed pair", k + 1))),
            None => Ok(()),
        }
    }
}

/// Separation used in place of a zero distance when the direction between two
/// coincident points is needed.
const COINCIDENT_JITTER: f64 = 1e-6;
const ZERO_DISTANCE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum MdsError {
    #[error("all configured distances over observed pairs are zero")]
    AllDistancesZero,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid dissimilarity matrix:\n{0}")]
    InvalidMatrix(ValidationReport),
    #[error("invalid options: {0}")]
    InvalidOptions(String),
    #[error("configuration file line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MdsOptions {
    /// Target dimension K.
    pub dim: usize,
    pub restarts: usize,
    pub max_iterations: usize,
    /// Stop a restart once one iteration improves stress by less than this.
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for MdsOptions {
    fn default() -> Self {
        Self {
            dim: 2,
            restarts: 20,
            max_iterations: 2000,
            tolerance: 1e-8,
            seed: 0,
        }
    }
}

/// N points in K dimensions; `points[id - 1]` belongs to product `id`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerceptualConfiguration {
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
    pub stress: f64,
    pub restarts_used: usize,
    /// False when no restart met the tolerance within the iteration budget.
    pub converged: bool,
}

impl PerceptualConfiguration {
    /// Wraps raw points, computing their stress against `matrix`.
    pub fn from_points<M: Dissimilarities + ?Sized>(
        points: Vec<Vec<f64>>,
        matrix: &M,
    ) -> Result<Self, MdsError> {
        let dim = check_points(&points)?;
        let stress = stress_of_points(&points, matrix)?;
        Ok(Self {
            dim,
            points,
            stress,
            restarts_used: 0,
            converged: true,
        })
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn point(&self, id: ProductId) -> Option<&[f64]> {
        id.checked_sub(1).and_then(|k| self.points.get(k)).map(Vec::as_slice)
    }

    pub fn distance(&self, i: ProductId, j: ProductId) -> f64 {
        euclidean(&self.points[i - 1], &self.points[j - 1])
    }

    /// `id,x1,..,xK` with shortest round-trip float formatting.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("id");
        for k in 1..=self.dim {
            out.push_str(&format!(",x{k}"));
        }
        out.push('\n');
        for (idx, p) in self.points.iter().enumerate() {
            out.push_str(&(idx + 1).to_string());
            for v in p {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }

    /// Reads the CSV written by [`to_csv`](Self::to_csv). Stress is not stored
    /// in the CSV; it is recomputed when a matrix is supplied, NaN otherwise.
    pub fn from_csv(text: &str, matrix: Option<&SparseDissimilarityMatrix>) -> Result<Self, MdsError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(MdsError::Parse {
            line: 1,
            message: "empty configuration".into(),
        })?;
        let dim = header.split(',').count().saturating_sub(1);
        if dim == 0 {
            return Err(MdsError::Parse {
                line: 1,
                message: "header needs at least one coordinate column".into(),
            });
        }
        let mut points = Vec::new();
        for (lineno, line) in lines {
            let cells: Vec<&str> = line.split(',').map(str::trim).collect();
            let parse_failure = |message: String| MdsError::Parse {
                line: lineno + 1,
                message,
            };
            if cells.len() != dim + 1 {
                return Err(parse_failure(format!("expected {} cells", dim + 1)));
            }
            let id: usize = cells[0]
                .parse()
                .map_err(|_| parse_failure(format!("invalid id `{}`", cells[0])))?;
            if id != points.len() + 1 {
                return Err(parse_failure(format!("ids must be contiguous, got {id}")));
            }
            let coords = cells[1..]
                .iter()
                .map(|c| c.parse::<f64>().map_err(|_| parse_failure(format!("invalid coordinate `{c}`"))))
                .collect::<Result<Vec<_>, _>>()?;
            points.push(coords);
        }
        match matrix {
            Some(m) => Self::from_points(points, m),
            None => Ok(Self {
                dim,
                points,
                stress: f64::NAN,
                restarts_used: 0,
                converged: true,
            }),
        }
    }
}

fn check_points(points: &[Vec<f64>]) -> Result<usize, MdsError> {
    let dim = points.first().map(Vec::len).unwrap_or(0);
    if dim == 0 || points.iter().any(|p| p.len() != dim) {
        return Err(MdsError::DimensionMismatch(
            "points must be non-empty with a common dimension".into(),
        ));
    }
    Ok(dim)
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Stress of a configuration over the observed pairs of `matrix`.
pub fn stress<M: Dissimilarities + ?Sized>(
    config: &PerceptualConfiguration,
    matrix: &M,
) -> Result<f64, MdsError> {
    stress_of_points(&config.points, matrix)
}

pub fn stress_of_points<M: Dissimilarities + ?Sized>(points: &[Vec<f64>], matrix: &M) -> Result<f64, MdsError> {
    if points.len() != matrix.n() {
        return Err(MdsError::DimensionMismatch(format!(
            "{} points for a {}-product matrix",
            points.len(),
            matrix.n()
        )));
    }
    let (mut num, mut den) = (0.0, 0.0);
    if points.iter().any(|p| p.len() != points[0].len()) {
        return Err(MdsError::DimensionMismatch("points differ in dimension".into()));
    }
    for (i, j, value) in matrix.pairs() {
        let d = euclidean(&points[i - 1], &points[j - 1]);
        num += (d - value) * (d - value);
        den += d * d;
    }
    if den == 0.0 {
        return Err(MdsError::AllDistancesZero);
    }
    Ok((num / den).sqrt())
}

/// Observed pairs in zero-based form, shared by the optimizer.
struct Pairs {
    n: usize,
    idx: Vec<(usize, usize)>,
    target: Vec<f64>,
}

impl Pairs {
    fn new<M: Dissimilarities + ?Sized>(matrix: &M) -> Self {
        let (idx, target) = matrix
            .pairs()
            .into_iter()
            .map(|(i, j, v)| ((i - 1, j - 1), v))
            .unzip();
        Self {
            n: matrix.n(),
            idx,
            target,
        }
    }

    /// Squared stress of a flat row-major `n x k` coordinate buffer.
    fn squared_stress(&self, x: &[f64], k: usize) -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for (&(i, j), &t) in self.idx.iter().zip(&self.target) {
            let d = euclidean(&x[i * k..(i + 1) * k], &x[j * k..(j + 1) * k]);
            num += (d - t) * (d - t);
            den += d * d;
        }
        if den == 0.0 {
            f64::INFINITY
        } else {
            num / den
        }
    }

    /// Gradient of `num/den` with respect to every coordinate.
    fn gradient(&self, x: &[f64], k: usize, grad: &mut [f64]) -> f64 {
        let m = self.idx.len();
        let mut dist = Vec::with_capacity(m);
        let (mut num, mut den) = (0.0, 0.0);
        for (&(i, j), &t) in self.idx.iter().zip(&self.target) {
            let d = euclidean(&x[i * k..(i + 1) * k], &x[j * k..(j + 1) * k]);
            num += (d - t) * (d - t);
            den += d * d;
            dist.push(d);
        }
        grad.iter_mut().for_each(|g| *g = 0.0);
        if den == 0.0 {
            return f64::INFINITY;
        }
        let inv_den2 = 1.0 / (den * den);
        let mut diff = vec![0.0; k];
        for (p, (&(i, j), &t)) in self.idx.iter().zip(&self.target).enumerate() {
            let mut d = dist[p];
            for c in 0..k {
                diff[c] = x[i * k + c] - x[j * k + c];
            }
            if d < ZERO_DISTANCE {
                diff.iter_mut().for_each(|v| *v = 0.0);
                diff[0] = COINCIDENT_JITTER;
                d = COINCIDENT_JITTER;
            }
            // d(num)/dx_i = 2 (d - t)/d * diff, d(den)/dx_i = 2 diff
            let coeff = 2.0 * ((d - t) / d * den - num) * inv_den2;
            for c in 0..k {
                grad[i * k + c] += coeff * diff[c];
                grad[j * k + c] -= coeff * diff[c];
            }
        }
        num / den
    }
}

struct RestartResult {
    coords: Vec<f64>,
    stress: f64,
    converged: bool,
}

fn run_restart(pairs: &Pairs, options: &MdsOptions, restart: usize) -> RestartResult {
    let k = options.dim;
    let n = pairs.n;
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    rng.set_stream(restart as u64);
    let scale = {
        let mean = pairs.target.iter().sum::<f64>() / pairs.target.len().max(1) as f64;
        if mean > 0.0 {
            mean
        } else {
            1.0
        }
    };
    let normal = Normal::new(0.0, scale).expect("positive scale");
    let mut x: Vec<f64> = (0..n * k).map(|_| normal.sample(&mut rng)).collect();

    let mut grad = vec![0.0; n * k];
    let mut trial = vec![0.0; n * k];
    let mut f = pairs.gradient(&x, k, &mut grad);
    let mut step = 1.0;
    let mut converged = false;
    for _ in 0..options.max_iterations {
        let g2: f64 = grad.iter().map(|g| g * g).sum();
        if g2 == 0.0 {
            converged = true;
            break;
        }
        let mut accepted = None;
        while step > 1e-20 {
            for (t, (xv, gv)) in trial.iter_mut().zip(x.iter().zip(&grad)) {
                *t = xv - step * gv;
            }
            let ft = pairs.squared_stress(&trial, k);
            if ft <= f - 1e-4 * step * g2 {
                accepted = Some(ft);
                break;
            }
            step *= 0.5;
        }
        let Some(ft) = accepted else {
            converged = true;
            break;
        };
        let improvement = f.sqrt() - ft.sqrt();
        std::mem::swap(&mut x, &mut trial);
        f = pairs.gradient(&x, k, &mut grad);
        step *= 2.0;
        if improvement < options.tolerance {
            converged = true;
            break;
        }
    }
    RestartResult {
        coords: x,
        stress: f.sqrt(),
        converged,
    }
}

/// Fits a K-dimensional configuration to the observed dissimilarities.
///
/// Subject matrices must pass [`validate_dissimilarity`]; `K < N` always. Output is
/// centred, rotated onto its principal axes (variance decreasing with axis
/// index) and signed so that product 1 has non-negative coordinates.
pub fn fit_mds<M: Dissimilarities + ?Sized>(
    matrix: &M,
    options: &MdsOptions,
) -> Result<PerceptualConfiguration, MdsError> {
    matrix.check()?;
    if options.dim == 0 || options.restarts == 0 {
        return Err(MdsError::InvalidOptions("dim and restarts must be at least 1".into()));
    }
    if options.dim >= matrix.n() {
        return Err(MdsError::InvalidOptions(format!(
            "dim {} must be below the product count {}",
            options.dim,
            matrix.n()
        )));
    }
    let pairs = Pairs::new(matrix);
    let results: Vec<RestartResult> = (0..options.restarts)
        .into_par_iter()
        .map(|r| run_restart(&pairs, options, r))
        .collect();
    let any_converged = results.iter().any(|r| r.converged);
    let best = results
        .into_iter()
        .enumerate()
        .min_by(|(ia, a), (ib, b)| a.stress.total_cmp(&b.stress).then(ia.cmp(ib)))
        .map(|(_, r)| r)
        .expect("at least one restart");

    let k = options.dim;
    let points: Vec<Vec<f64>> = best.coords.chunks(k).map(<[f64]>::to_vec).collect();
    let points = normalize(&points);
    let stress = stress_of_points(&points, matrix)?;
    Ok(PerceptualConfiguration {
        dim: k,
        points,
        stress,
        restarts_used: options.restarts,
        converged: any_converged,
    })
}

/// Centres the points, rotates them onto principal axes sorted by decreasing
/// variance, and flips each axis so that the first point with a non-zero
/// coordinate on it is positive.
pub fn normalize(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = points.len();
    let Some(k) = points.first().map(Vec::len) else {
        return Vec::new();
    };
    let x = DMatrix::from_fn(n, k, |i, c| points[i][c]);
    let mean = x.row_mean();
    let centred = DMatrix::from_fn(n, k, |i, c| x[(i, c)] - mean[c]);
    let cov = centred.transpose() * &centred;
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let basis = DMatrix::from_fn(k, k, |r, c| eig.eigenvectors[(r, order[c])]);
    let mut rotated = centred * basis;
    for c in 0..k {
        let pivot = (0..n).map(|i| rotated[(i, c)]).find(|v| v.abs() > 1e-12);
        if matches!(pivot, Some(v) if v < 0.0) {
            rotated.column_mut(c).neg_mut();
        }
    }
    (0..n).map(|i| (0..k).map(|c| rotated[(i, c)]).collect()).collect()
}

fn to_matrix(points: &[Vec<f64>]) -> DMatrix<f64> {
    let k = points.first().map(Vec::len).unwrap_or(0);
    DMatrix::from_fn(points.len(), k, |i, c| points[i][c])
}

fn check_same_shape(a: &PerceptualConfiguration, b: &PerceptualConfiguration) -> Result<(), MdsError> {
    if a.n() != b.n() || a.dim != b.dim {
        return Err(MdsError::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            a.n(),
            a.dim,
            b.n(),
            b.dim
        )));
    }
    Ok(())
}

/// Rotates/reflects and translates `config` onto `reference`, minimizing the
/// summed squared point distances. Scale is left alone, so stress is unchanged.
pub fn procrustes_align(
    config: &PerceptualConfiguration,
    reference: &PerceptualConfiguration,
) -> Result<PerceptualConfiguration, MdsError> {
    check_same_shape(config, reference)?;
    let x = to_matrix(&config.points);
    let y = to_matrix(&reference.points);
    let (n, k) = x.shape();
    let xm = x.row_mean();
    let ym = y.row_mean();
    let xc = DMatrix::from_fn(n, k, |i, c| x[(i, c)] - xm[c]);
    let yc = DMatrix::from_fn(n, k, |i, c| y[(i, c)] - ym[c]);
    let svd = (xc.transpose() * &yc).svd(true, true);
    let rotation = svd.u.expect("u requested") * svd.v_t.expect("v_t requested");
    let aligned = xc * rotation;
    let points = (0..n)
        .map(|i| (0..k).map(|c| aligned[(i, c)] + ym[c]).collect())
        .collect();
    Ok(PerceptualConfiguration {
        points,
        ..config.clone()
    })
}

/// Sum of squared distances between corresponding points.
pub fn procrustes_residual(a: &PerceptualConfiguration, b: &PerceptualConfiguration) -> Result<f64, MdsError> {
    check_same_shape(a, b)?;
    Ok(a.points
        .iter()
        .zip(&b.points)
        .map(|(p, q)| p.iter().zip(q).map(|(u, v)| (u - v) * (u - v)).sum::<f64>())
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix_from(n: usize, entries: &[(usize, usize, u8)]) -> SparseDissimilarityMatrix {
        let mut m = SparseDissimilarityMatrix::new(n);
        for &(i, j, v) in entries {
            m.set(i, j, v).unwrap();
        }
        m
    }

    #[test]
    fn exact_line_has_zero_stress() {
        let m = matrix_from(3, &[(1, 2, 1), (2, 3, 1), (1, 3, 2)]);
        let s = stress_of_points(&[vec![0.0], vec![1.0], vec![2.0]], &m).unwrap();
        assert_eq!(s, 0.0);
    }

    #[test]
    fn two_points_hand_value() {
        let m = matrix_from(2, &[(1, 2, 3)]);
        let s = stress_of_points(&[vec![0.0], vec![1.0]], &m).unwrap();
        assert!((s - 2.0).abs() < 1e-15);
    }

    #[test]
    fn coincident_configuration_errors() {
        let m = matrix_from(2, &[(1, 2, 1)]);
        let err = stress_of_points(&[vec![0.5, 0.5], vec![0.5, 0.5]], &m).unwrap_err();
        assert!(matches!(err, MdsError::AllDistancesZero));
    }

    #[test]
    fn point_count_must_match() {
        let m = matrix_from(3, &[(1, 2, 1)]);
        assert!(matches!(
            stress_of_points(&[vec![0.0], vec![1.0]], &m),
            Err(MdsError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let m = matrix_from(4, &[(1, 2, 1), (1, 3, 2), (2, 4, 0), (3, 4, 3), (1, 4, 2)]);
        let pairs = Pairs::new(&m);
        let x = vec![0.1, -0.3, 1.2, 0.4, -0.7, 0.9, 0.3, 0.2];
        let mut g = vec![0.0; x.len()];
        pairs.gradient(&x, 2, &mut g);
        let h = 1e-6;
        for c in 0..x.len() {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[c] += h;
            xm[c] -= h;
            let fd = (pairs.squared_stress(&xp, 2) - pairs.squared_stress(&xm, 2)) / (2.0 * h);
            assert!((fd - g[c]).abs() < 1e-7, "coord {c}: {fd} vs {}", g[c]);
        }
    }

    #[test]
    fn collinear_exact_fit_in_one_dimension() {
        let m = RealDissimilarities::new(3, [(1, 2, 1.0), (2, 3, 1.0), (1, 3, 2.0)]).unwrap();
        let cfg = fit_mds(&m, &MdsOptions { dim: 1, restarts: 5, ..Default::default() }).unwrap();
        assert!(cfg.stress <= 1e-6, "stress {}", cfg.stress);
    }

    #[test]
    fn rejects_invalid_inputs() {
        let m = matrix_from(4, &[(1, 2, 1)]);
        assert!(matches!(fit_mds(&m, &MdsOptions::default()), Err(MdsError::InvalidMatrix(_))));
        let m = matrix_from(
            4,
            &[(1, 2, 1), (2, 3, 1), (1, 3, 2), (3, 4, 1), (2, 4, 2), (1, 4, 3)],
        );
        let opts = MdsOptions { dim: 4, ..Default::default() };
        assert!(matches!(fit_mds(&m, &opts), Err(MdsError::InvalidOptions(_))));
        let opts = MdsOptions { restarts: 0, ..Default::default() };
        assert!(matches!(fit_mds(&m, &opts), Err(MdsError::InvalidOptions(_))));
    }

    #[test]
    fn normalize_orders_axes_by_variance() {
        let pts = vec![vec![0.0, 0.0], vec![0.1, 3.0], vec![-0.1, -3.0], vec![0.0, 1.0]];
        let out = normalize(&pts);
        let var = |c: usize| out.iter().map(|p| p[c] * p[c]).sum::<f64>();
        assert!(var(0) >= var(1));
        let mean0: f64 = out.iter().map(|p| p[0]).sum();
        assert!(mean0.abs() < 1e-12);
    }

    #[test]
    fn procrustes_rejects_shape_mismatch() {
        let a = PerceptualConfiguration {
            dim: 2,
            points: vec![vec![0.0, 0.0], vec![1.0, 0.0]],
            stress: 0.0,
            restarts_used: 0,
            converged: true,
        };
        let b = PerceptualConfiguration {
            dim: 1,
            points: vec![vec![0.0], vec![1.0]],
            ..a.clone()
        };
        assert!(matches!(procrustes_align(&a, &b), Err(MdsError::DimensionMismatch(_))));
    }

    #[test]
    fn csv_round_trip() {
        let m = matrix_from(3, &[(1, 2, 1), (2, 3, 1), (1, 3, 2)]);
        let cfg = PerceptualConfiguration::from_points(
            vec![vec![0.1, 0.25], vec![1.0 / 3.0, -2.0], vec![5.5, 1e-17]],
            &m,
        )
        .unwrap();
        let back = PerceptualConfiguration::from_csv(&cfg.to_csv(), Some(&m)).unwrap();
        assert_eq!(back.points, cfg.points);
        assert_eq!(back.stress, cfg.stress);
    }
}
