//! The full analysis: MDS, vector-model preference map, appeal-model fit,
//! response surface and iso-appeal lines, with every figure rendered.
//!
//! [`run_pipeline`] is pure: it returns the report and the artifact contents
//! in memory. [`write_artifacts`] puts them in a directory; the report refers
//! to artifacts by file name only, so it is identical wherever it is written.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::appeal::{
    self, AppealError, AppealModel, FitDiagnostics, FitOptions, GradientForm, IsoRegion, ResponseSurface, Span,
};
use crate::fixtures::{self, FixtureSet};
use crate::mds::{self, MdsError, MdsOptions};
use crate::model::{
    AppealScores, DesignParams, ModelError, ProductId, RuleAssessmentSet, Session, SparseDissimilarityMatrix,
};
use crate::plot;
use crate::prefmap::{self, PrefmapError, VectorModelFit, DEFAULT_P_LEVELS};

pub const REPORT_FILE: &str = "report.json";
pub const CONFIGURATION_FILE: &str = "configuration.csv";
pub const PERCEPTUAL_MAP_FILE: &str = "perceptual_map.svg";
pub const APPEAL_VECTOR_FILE: &str = "appeal_vector.svg";
pub const MODEL_FILE: &str = "appeal_model.json";
pub const SURFACE_FILE: &str = "surface.csv";
pub const COLORMAP_FILE: &str = "colormap.svg";
pub const ISO_LINES_CSV_FILE: &str = "iso_lines.csv";
pub const ISO_LINES_SVG_FILE: &str = "iso_lines.svg";

/// Reference values the notes compare against.
pub const REFERENCE_STRESS: f64 = 0.12;
pub const REFERENCE_R_SQUARED: f64 = 0.91;
pub const REFERENCE_F: f64 = 80.0;
pub const REFERENCE_ISO_SLOPE: f64 = 0.5;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Mds(#[from] MdsError),
    #[error(transparent)]
    Prefmap(#[from] PrefmapError),
    #[error(transparent)]
    Appeal(#[from] AppealError),
    #[error("incomplete input: {0}")]
    Incomplete(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl PipelineError {
    /// Input data violates a domain rule, as opposed to a runtime failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            PipelineError::Model(_) | PipelineError::Incomplete(_) | PipelineError::Mds(MdsError::InvalidMatrix(_))
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineInputs {
    pub matrix: SparseDissimilarityMatrix,
    pub appeal: AppealScores,
    pub rules: RuleAssessmentSet,
    pub dims: BTreeMap<ProductId, DesignParams>,
    pub labels: Vec<String>,
}

impl PipelineInputs {
    pub fn from_fixtures(set: FixtureSet) -> Self {
        let labels = fixtures::products_from_dims(&set.dims).into_iter().map(|p| p.label).collect();
        Self { matrix: set.matrix, appeal: set.appeal, rules: set.rules, dims: set.dims, labels }
    }

    pub fn bundled() -> Self {
        Self::from_fixtures(FixtureSet::bundled())
    }

    pub fn from_session(session: &Session) -> Result<Self, PipelineError> {
        let appeal = session.appeal.clone().ok_or_else(|| PipelineError::Incomplete("no appeal scores".into()))?;
        let rules = session.rules.clone().ok_or_else(|| PipelineError::Incomplete("no rule assessments".into()))?;
        Ok(Self {
            matrix: session.comparisons.clone(),
            appeal,
            rules,
            dims: session.products.iter().map(|p| (p.id, p.dims)).collect(),
            labels: session.products.iter().map(|p| p.label.clone()).collect(),
        })
    }

    fn check(&self) -> Result<(), PipelineError> {
        let n = self.matrix.n();
        if self.dims.len() != n || self.dims.keys().copied().ne(1..=n) {
            return Err(PipelineError::Incomplete(format!("design parameters must cover products 1..{n}")));
        }
        self.appeal.check_complete(n)?;
        self.rules.check_complete(n)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineOptions {
    pub seed: u64,
    pub restarts: usize,
    pub p_levels: Vec<f64>,
    pub fit: FitOptions,
    /// Defaults to the most common `d1` among the products.
    pub fixed_d1: Option<f64>,
    /// Default to the products' `d2` / `d3` ranges.
    pub d2_span: Option<Span>,
    pub d3_span: Option<Span>,
    pub colormap_resolution: (usize, usize),
    /// Defaults to five levels evenly inside the surface's range.
    pub iso_levels: Option<Vec<f64>>,
    pub iso_resolution: usize,
    pub field_resolution: usize,
    /// Appeal levels drawn across the perceptual map.
    pub vector_levels: Vec<f64>,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            restarts: MdsOptions::default().restarts,
            p_levels: DEFAULT_P_LEVELS.to_vec(),
            fit: FitOptions::default(),
            fixed_d1: None,
            d2_span: None,
            d3_span: None,
            colormap_resolution: (50, 50),
            iso_levels: None,
            iso_resolution: 50,
            field_resolution: 9,
            vector_levels: vec![0.0, 2.0, 4.0, 6.0, 8.0, 10.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MdsSection {
    pub dim: usize,
    pub stress: f64,
    pub restarts: usize,
    pub converged: bool,
    /// Best stress for 1, 2 and 3 dimensions under the same options.
    pub stress_by_dimension: Vec<f64>,
    pub configuration: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrefmapSection {
    pub fit: VectorModelFit,
    pub direction: [f64; 2],
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceComparison {
    /// Objective of the bundled coefficient set with its own `k`.
    pub objective: f64,
    /// Same coefficients, `k` refit by least squares.
    pub refit_k: [f64; 3],
    pub objective_refit_k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppealSection {
    pub model: AppealModel,
    pub objective: f64,
    pub diagnostics: FitDiagnostics,
    pub reference: ReferenceComparison,
    pub model_file: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsoLevelSummary {
    pub level: f64,
    pub empty: bool,
    pub polylines: usize,
    /// Slopes `dd3/dd2` of the straight-line fit of each polyline.
    pub slopes: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceSection {
    pub surface: ResponseSurface,
    pub d2_span: Span,
    pub d3_span: Span,
    pub min: f64,
    pub max: f64,
    pub iso_levels: Vec<IsoLevelSummary>,
    pub median_iso_slope: Option<f64>,
    pub raster_file: String,
    pub iso_lines_file: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub seed: u64,
    pub products: usize,
    pub observed_pairs: usize,
    pub mds: MdsSection,
    pub prefmap: PrefmapSection,
    pub appeal: AppealSection,
    pub surface: SurfaceSection,
    /// File names, relative to the report's directory.
    pub artifacts: Vec<String>,
    pub notes: Vec<String>,
}

impl PipelineReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub content: String,
}

fn most_common_d1(dims: &BTreeMap<ProductId, DesignParams>) -> f64 {
    let mut counts: BTreeMap<u64, usize> = BTreeMap::new();
    for d in dims.values() {
        *counts.entry(d.d1.to_bits()).or_default() += 1;
    }
    let mut best = (0, f64::INFINITY);
    for (bits, count) in counts {
        let v = f64::from_bits(bits);
        if count > best.0 || (count == best.0 && v < best.1) {
            best = (count, v);
        }
    }
    best.1
}

fn span_of(values: impl Iterator<Item = f64>) -> Span {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if hi > lo {
        Span { lo, hi }
    } else {
        Span { lo: lo - 1.0, hi: hi + 1.0 }
    }
}

fn round2(v: f64) -> f64 {
    (v * 100.0).round() / 100.0
}

pub fn run_pipeline(
    inputs: &PipelineInputs,
    options: &PipelineOptions,
) -> Result<(PipelineReport, Vec<Artifact>), PipelineError> {
    inputs.check()?;
    let mut artifacts = Vec::new();
    let mut notes = Vec::new();

    // Perceptual space.
    let mds_options = |dim| MdsOptions { dim, restarts: options.restarts, seed: options.seed, ..MdsOptions::default() };
    let config = mds::fit_mds(&inputs.matrix, &mds_options(2))?;
    let mut stress_by_dimension = Vec::new();
    for dim in 1..=3 {
        stress_by_dimension.push(if dim == 2 { config.stress } else { mds::fit_mds(&inputs.matrix, &mds_options(dim))?.stress });
    }
    artifacts.push(Artifact { name: CONFIGURATION_FILE.into(), content: config.to_csv() });
    artifacts.push(Artifact {
        name: PERCEPTUAL_MAP_FILE.into(),
        content: plot::perceptual_map_svg(&config, &inputs.labels),
    });
    if config.stress > REFERENCE_STRESS {
        notes.push(format!(
            "MDS stress {:.4} is above the reference 0.12; the raw-stress objective over the observed pairs does not reach that value for this matrix",
            config.stress
        ));
    }

    // Preference map.
    let vector_fit = prefmap::fit_vector_model(&config, &inputs.appeal, &options.p_levels)?;
    let vector = prefmap::appeal_vector(&vector_fit, &options.vector_levels)?;
    artifacts.push(Artifact {
        name: APPEAL_VECTOR_FILE.into(),
        content: plot::appeal_vector_svg(&config, &inputs.labels, &vector),
    });
    let n = config.n();
    let f_check = prefmap::f_statistic(REFERENCE_R_SQUARED, 18, 2)?;
    notes.push(format!(
        "F formula check: R^2 = {REFERENCE_R_SQUARED} with n = 18, p = 2 gives F = {f_check:.2}, not the reference F = {REFERENCE_F} (difference {:.2})",
        REFERENCE_F - f_check
    ));
    notes.push(format!(
        "vector model on this configuration: a = {:.4}, b = {:.4}, c = {:.4}, R^2 = {:.4}, F = {:.2} (n = {n}); a and b depend on the configuration's orientation",
        vector_fit.a, vector_fit.b, vector_fit.c, vector_fit.r_squared, vector_fit.f_statistic
    ));

    // Appeal model.
    let observations = appeal::observations(&inputs.appeal, &inputs.rules, &inputs.dims)?;
    let fit = appeal::fit_appeal_model(&observations, &FitOptions { seed: options.seed, ..options.fit })?;
    let reference = fixtures::reference_model();
    let refit_k = appeal::refit_k(&reference.a, &observations, options.fit.gradient_form, false);
    let form = options.fit.gradient_form;
    let reference = ReferenceComparison {
        objective: appeal::objective_terms(&reference, &observations, form).total(),
        refit_k,
        objective_refit_k: appeal::objective_terms(&AppealModel { a: reference.a, k: refit_k }, &observations, form)
            .total(),
    };
    if form == GradientForm::AsPrinted {
        notes.push("appeal model fitted with the as-printed derivative form, not the exact gradient".into());
    }
    let mut model_json = serde_json::to_string_pretty(&fit.model).expect("model serializes");
    model_json.push('\n');
    artifacts.push(Artifact { name: MODEL_FILE.into(), content: model_json });

    // Response surface.
    let fixed_d1 = options.fixed_d1.unwrap_or_else(|| most_common_d1(&inputs.dims));
    let d2_span = options.d2_span.unwrap_or_else(|| span_of(inputs.dims.values().map(|d| d.d2)));
    let d3_span = options.d3_span.unwrap_or_else(|| span_of(inputs.dims.values().map(|d| d.d3)));
    let (surface, surface_artifacts) = analyze_surface(&fit.model, fixed_d1, d2_span, d3_span, options)?;
    artifacts.extend(surface_artifacts);
    if let Some(slope) = surface.median_iso_slope {
        notes.push(format!(
            "median local iso-appeal slope dd3/dd2 over the region is {slope:.4}; the reference relation d3 = d2/2 + c implies {REFERENCE_ISO_SLOPE}"
        ));
    }

    let mut names: Vec<String> = artifacts.iter().map(|a| a.name.clone()).collect();
    names.push(REPORT_FILE.into());
    let report = PipelineReport {
        seed: options.seed,
        products: n,
        observed_pairs: inputs.matrix.len(),
        mds: MdsSection {
            dim: config.dim,
            stress: config.stress,
            restarts: config.restarts_used,
            converged: config.converged,
            stress_by_dimension,
            configuration: CONFIGURATION_FILE.into(),
        },
        prefmap: PrefmapSection { direction: vector.direction, magnitude: vector.magnitude, fit: vector_fit },
        appeal: AppealSection {
            model: fit.model,
            objective: fit.diagnostics.objective,
            diagnostics: fit.diagnostics,
            reference,
            model_file: MODEL_FILE.into(),
        },
        surface,
        artifacts: names,
        notes,
    };
    artifacts.push(Artifact { name: REPORT_FILE.into(), content: report.to_json() });
    Ok((report, artifacts))
}

/// Response surface of `model` at `fixed_d1` over the given region: the
/// colormap raster and iso-appeal lines, as a report section plus the
/// surface, colormap and iso-line artifacts.
pub fn analyze_surface(
    model: &AppealModel,
    fixed_d1: f64,
    d2_span: Span,
    d3_span: Span,
    options: &PipelineOptions,
) -> Result<(SurfaceSection, Vec<Artifact>), PipelineError> {
    let surface = appeal::response_surface(model, fixed_d1)?;
    let raster = appeal::surface_colormap(&surface, d2_span, d3_span, options.colormap_resolution)?;
    let levels = options.iso_levels.clone().unwrap_or_else(|| {
        (1..=5).map(|k| round2(raster.min + (raster.max - raster.min) * k as f64 / 6.0)).collect()
    });
    let region = IsoRegion {
        d2: d2_span,
        d3: d3_span,
        resolution: options.iso_resolution,
        field_resolution: options.field_resolution,
    };
    let iso = appeal::iso_appeal_lines(&surface, &levels, &region)?;
    let artifacts = vec![
        Artifact { name: SURFACE_FILE.into(), content: raster.to_csv() },
        Artifact {
            name: COLORMAP_FILE.into(),
            content: plot::colormap_svg(&raster, &format!("Appeal over (d2, d3) at d1 = {fixed_d1} cm")),
        },
        Artifact { name: ISO_LINES_CSV_FILE.into(), content: appeal::iso_lines_csv(&iso) },
        Artifact {
            name: ISO_LINES_SVG_FILE.into(),
            content: plot::iso_lines_svg(&iso, &format!("Iso-appeal lines at d1 = {fixed_d1} cm")),
        },
    ];
    let section = SurfaceSection {
        surface,
        d2_span,
        d3_span,
        min: raster.min,
        max: raster.max,
        iso_levels: iso
            .levels
            .iter()
            .map(|l| IsoLevelSummary {
                level: l.level,
                empty: l.empty,
                polylines: l.polylines.len(),
                slopes: l.polylines.iter().map(|p| p.fit.and_then(|f| f.slope)).collect(),
            })
            .collect(),
        median_iso_slope: iso.median_iso_slope,
        raster_file: SURFACE_FILE.into(),
        iso_lines_file: ISO_LINES_CSV_FILE.into(),
    };
    Ok((section, artifacts))
}

/// Writes every artifact into `dir`, creating it if needed.
pub fn write_artifacts(dir: &Path, artifacts: &[Artifact]) -> Result<(), PipelineError> {
    let io = |path: &Path, source| PipelineError::Io { path: path.display().to_string(), source };
    std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    for a in artifacts {
        let path = dir.join(&a.name);
        std::fs::write(&path, &a.content).map_err(|e| io(&path, e))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_d1_is_the_mode() {
        let dims: BTreeMap<_, _> = [(1, 8.0), (2, 9.0), (3, 8.0), (4, 7.0)]
            .into_iter()
            .map(|(id, d1)| (id, DesignParams::new(d1, 1.0, 1.0)))
            .collect();
        assert_eq!(most_common_d1(&dims), 8.0);
        let tie: BTreeMap<_, _> = [(1, 9.0), (2, 7.0)].into_iter().map(|(id, d1)| (id, DesignParams::new(d1, 1.0, 1.0))).collect();
        assert_eq!(most_common_d1(&tie), 7.0);
    }

    #[test]
    fn degenerate_span_is_widened() {
        assert_eq!(span_of([2.0, 2.0].into_iter()), Span { lo: 1.0, hi: 3.0 });
        assert_eq!(span_of([3.0, 1.0].into_iter()), Span { lo: 1.0, hi: 3.0 });
    }

    #[test]
    fn incomplete_inputs_are_validation_errors() {
        let mut inputs = PipelineInputs::bundled();
        inputs.dims.remove(&18);
        let err = run_pipeline(&inputs, &PipelineOptions::default()).unwrap_err();
        assert!(err.is_validation(), "{err}");
    }
}
