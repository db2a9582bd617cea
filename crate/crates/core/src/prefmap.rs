//! External preference mapping with the vector model.
//!
//! Appeal is regressed on the two perceptual axes, `P = a*x1 + b*x2 + c`. The
//! fitted plane's gradient `(a, b)` is the direction of increasing appeal and
//! lines perpendicular to it are iso-appeal lines.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;
use thiserror::Error;

use crate::mds::PerceptualConfiguration;
use crate::model::{AppealScores, ProductId};

/// Number of regressors in the vector model.
const REGRESSORS: usize = 2;
/// Significance levels tested when the caller does not choose.
pub const DEFAULT_P_LEVELS: [f64; 2] = [0.01, 0.05];

#[derive(Debug, Error, PartialEq)]
pub enum PrefmapError {
    #[error("the vector model needs a 2-dimensional configuration, got {0}")]
    NotTwoDimensional(usize),
    #[error("need at least 4 products, got {0}")]
    TooFewProducts(usize),
    #[error("no appeal score for product {0}")]
    MissingAppeal(ProductId),
    #[error("design matrix is rank deficient (perceptual points are collinear)")]
    RankDeficient,
    #[error("appeal vector is zero")]
    ZeroVector,
    #[error("invalid arguments: {0}")]
    InvalidArguments(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignificanceTest {
    pub p_level: f64,
    pub critical_value: f64,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorModelFit {
    /// Coefficient of perceptual axis 1.
    pub a: f64,
    /// Coefficient of perceptual axis 2.
    pub b: f64,
    /// Intercept.
    pub c: f64,
    pub r_squared: f64,
    /// Overall-regression F; `None` in JSON stands for +infinity (a perfect fit).
    #[serde(with = "infinite_as_null")]
    pub f_statistic: f64,
    /// `(p, n - p - 1)`.
    pub dof: (usize, usize),
    pub significance: Vec<SignificanceTest>,
    /// Observed minus fitted appeal, by product id.
    pub residuals: Vec<(ProductId, f64)>,
}

impl VectorModelFit {
    pub fn predict(&self, x1: f64, x2: f64) -> f64 {
        self.a * x1 + self.b * x2 + self.c
    }

    pub fn significant_at(&self, p_level: f64) -> Option<bool> {
        self.significance
            .iter()
            .find(|t| t.p_level == p_level)
            .map(|t| t.significant)
    }
}

mod infinite_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

/// Overall-regression F statistic `(R^2/p) / ((1 - R^2)/(n - p - 1))`.
/// A perfect fit (`R^2 = 1`) gives `+inf`.
pub fn f_statistic(r_squared: f64, n: usize, p: usize) -> Result<f64, PrefmapError> {
    if !(0.0..=1.0).contains(&r_squared) {
        return Err(PrefmapError::InvalidArguments(format!("R^2 = {r_squared} outside [0, 1]")));
    }
    if p == 0 || n <= p + 1 {
        return Err(PrefmapError::InvalidArguments(format!("need n > p + 1 (n = {n}, p = {p})")));
    }
    if r_squared >= 1.0 {
        return Ok(f64::INFINITY);
    }
    let den_dof = (n - p - 1) as f64;
    Ok((r_squared / p as f64) / ((1.0 - r_squared) / den_dof))
}

/// Upper-tail CDF of the Fisher-Snedecor distribution,
/// `P(F > x) = I_{d2/(d2 + d1 x)}(d2/2, d1/2)`.
pub fn f_survival(x: f64, dof_num: usize, dof_den: usize) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x.is_infinite() {
        return 0.0;
    }
    let (d1, d2) = (dof_num as f64, dof_den as f64);
    beta_reg(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * x))
}

/// Upper critical value `x` with `P(F > x) = p_level`.
pub fn f_critical(p_level: f64, dof_num: usize, dof_den: usize) -> Result<f64, PrefmapError> {
    if !(p_level > 0.0 && p_level < 1.0) {
        return Err(PrefmapError::InvalidArguments(format!("p level {p_level} outside (0, 1)")));
    }
    if dof_num == 0 || dof_den == 0 {
        return Err(PrefmapError::InvalidArguments("degrees of freedom must be positive".into()));
    }
    // Survival is decreasing in x: bracket, then bisect.
    let (mut lo, mut hi) = (0.0, 1.0);
    while f_survival(hi, dof_num, dof_den) > p_level {
        lo = hi;
        hi *= 2.0;
        if hi > 1e12 {
            break;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f_survival(mid, dof_num, dof_den) > p_level {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * hi.max(1.0) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Ordinary least squares of appeal on the two perceptual axes.
pub fn fit_vector_model(
    config: &PerceptualConfiguration,
    appeal: &AppealScores,
    p_levels: &[f64],
) -> Result<VectorModelFit, PrefmapError> {
    if config.dim != REGRESSORS {
        return Err(PrefmapError::NotTwoDimensional(config.dim));
    }
    let n = config.n();
    if n < 4 {
        return Err(PrefmapError::TooFewProducts(n));
    }
    let y = (1..=n)
        .map(|id| appeal.get(id).ok_or(PrefmapError::MissingAppeal(id)))
        .collect::<Result<Vec<_>, _>>()?;
    let x = DMatrix::from_fn(n, 3, |i, c| if c < 2 { config.points[i][c] } else { 1.0 });
    let y = DVector::from_vec(y);

    let svd = x.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if svd.singular_values.min() <= smax * 1e-10 {
        return Err(PrefmapError::RankDeficient);
    }
    let coef = svd
        .solve(&y, smax * 1e-12)
        .map_err(|_| PrefmapError::RankDeficient)?;

    let fitted = &x * &coef;
    let mean = y.mean();
    let ss_tot: f64 = y.iter().map(|v| (v - mean) * (v - mean)).sum();
    let ss_res: f64 = y.iter().zip(fitted.iter()).map(|(o, f)| (o - f) * (o - f)).sum();
    let (a, b, c, r_squared) = if ss_tot <= f64::EPSILON * mean.abs().max(1.0) * n as f64 {
        // Constant appeal: the plane is flat at the mean and explains nothing.
        (0.0, 0.0, mean, 0.0)
    } else {
        (coef[0], coef[1], coef[2], (1.0 - ss_res / ss_tot).clamp(0.0, 1.0))
    };
    let f = f_statistic(r_squared, n, REGRESSORS)?;
    let dof = (REGRESSORS, n - REGRESSORS - 1);
    let significance = p_levels
        .iter()
        .map(|&p| {
            let critical_value = f_critical(p, dof.0, dof.1)?;
            Ok(SignificanceTest {
                p_level: p,
                critical_value,
                significant: f > critical_value,
            })
        })
        .collect::<Result<Vec<_>, PrefmapError>>()?;
    let residuals = (0..n)
        .map(|i| {
            let pred = a * config.points[i][0] + b * config.points[i][1] + c;
            (i + 1, y[i] - pred)
        })
        .collect();
    Ok(VectorModelFit {
        a,
        b,
        c,
        r_squared,
        f_statistic: f,
        dof,
        significance,
        residuals,
    })
}

/// A straight iso-appeal line: all points `point + t * direction`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsoLine {
    pub level: f64,
    pub point: [f64; 2],
    pub direction: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppealVectorPlot {
    pub origin: [f64; 2],
    /// Unit vector along `(a, b)`.
    pub direction: [f64; 2],
    /// `|(a, b)|`: appeal gained per unit moved along `direction`.
    pub magnitude: f64,
    pub iso_lines: Vec<IsoLine>,
}

/// Arrow and iso-lines for the fitted plane, one iso-line per requested level.
pub fn appeal_vector(fit: &VectorModelFit, levels: &[f64]) -> Result<AppealVectorPlot, PrefmapError> {
    let magnitude = fit.a.hypot(fit.b);
    if magnitude == 0.0 {
        return Err(PrefmapError::ZeroVector);
    }
    let direction = [fit.a / magnitude, fit.b / magnitude];
    let perpendicular = [-direction[1], direction[0]];
    let iso_lines = levels
        .iter()
        .map(|&level| {
            let t = (level - fit.c) / magnitude;
            IsoLine {
                level,
                point: [t * direction[0], t * direction[1]],
                direction: perpendicular,
            }
        })
        .collect();
    Ok(AppealVectorPlot {
        origin: [0.0, 0.0],
        direction,
        magnitude,
        iso_lines,
    })
}
