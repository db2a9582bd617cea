//! Local subcommands. Each writes its main result to stdout (or `--out`) in
//! the selected format; figures are written only where asked.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use formsense_core::appeal::{self, AppealFit, AppealModel, FitOptions, GradientForm, Span, COEFFICIENT_NAMES};
use formsense_core::geometry::{self, ProfileTemplate};
use formsense_core::mds::{self, MdsOptions, PerceptualConfiguration};
use formsense_core::model::{validate_dissimilarity, DesignParams, Rule, Session};
use formsense_core::pipeline::{self, Artifact, PipelineOptions, PrefmapSection};
use formsense_core::{fixtures, io, plot, prefmap};
use serde::Serialize;

use crate::error::CliError;
use crate::inputs::{self, Resolver};
use crate::{DataArgs, FitArgs, Format};

pub struct Context {
    pub resolver: Resolver,
    pub format: Format,
    pub seed: u64,
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output serializes");
    s.push('\n');
    s
}

/// Writes `content` to `out`, or to stdout.
pub fn emit(out: Option<&Path>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => write_file(path, content),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

pub fn write_file(path: &Path, content: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| CliError::from(e).context(parent.display()))?;
    }
    std::fs::write(path, content).map_err(|e| CliError::from(e).context(path.display()))
}

fn labels(n: usize) -> Vec<String> {
    (1..=n).map(|id| format!("G{id}")).collect()
}

#[derive(Debug, Serialize)]
struct InputCheck {
    input: &'static str,
    origin: String,
    valid: bool,
    issues: Vec<String>,
}

#[derive(Debug, Serialize)]
struct ValidationOutput {
    valid: bool,
    inputs: Vec<InputCheck>,
}

fn check<T>(input: &'static str, origin: String, result: Result<T, CliError>) -> (InputCheck, Option<T>) {
    match result {
        Ok(v) => (InputCheck { input, origin, valid: true, issues: Vec::new() }, Some(v)),
        Err(e) => (InputCheck { input, origin, valid: false, issues: vec![e.message] }, None),
    }
}

pub fn validate(ctx: &Context, data: &DataArgs, session: Option<&Path>) -> Result<(), CliError> {
    let mut checks = Vec::new();
    if let Some(path) = session {
        let origin = path.display().to_string();
        let (mut c, loaded) = check("session", origin, inputs::load_session(path));
        if let Some(s) = loaded {
            c.issues.extend(session_issues(&s));
            c.valid = c.issues.is_empty();
        }
        checks.push(c);
    } else {
        let r = &ctx.resolver;
        let origin = |explicit: Option<&PathBuf>, name: &str| match (explicit, &r.fixtures) {
            (Some(p), _) => p.display().to_string(),
            (None, Some(dir)) => dir.join(name).display().to_string(),
            (None, None) => format!("bundled {name}"),
        };
        let (mut c, matrix) = check("dissim", origin(data.dissim.as_ref(), fixtures::DISSIM_FILE), r.matrix(data.dissim.as_deref()));
        if let Some(m) = &matrix {
            c.issues.extend(validate_dissimilarity(m).violations.iter().map(ToString::to_string));
            c.valid = c.issues.is_empty();
        }
        checks.push(c);
        let n = matrix.as_ref().map(|m| m.n());
        let (mut c, appeal) = check("appeal", origin(data.appeal.as_ref(), fixtures::APPEAL_FILE), r.appeal(data.appeal.as_deref()));
        if let (Some(a), Some(n)) = (&appeal, n) {
            if let Err(e) = a.check_complete(n) {
                c.issues.push(e.to_string());
                c.valid = false;
            }
        }
        checks.push(c);
        let (mut c, rules) = check("rules", origin(data.rules.as_ref(), fixtures::RULES_FILE), r.rules(data.rules.as_deref()));
        if let (Some((rules, _)), Some(n)) = (&rules, n) {
            if let Err(e) = rules.check_complete(n) {
                c.issues.push(e.to_string());
                c.valid = false;
            }
        }
        checks.push(c);
    }
    let valid = checks.iter().all(|c| c.valid);
    let output = ValidationOutput { valid, inputs: checks };
    match ctx.format {
        Format::Json => print!("{}", to_json(&output)),
        Format::Csv => {
            let mut csv = String::from("input,origin,issue\n");
            for c in &output.inputs {
                for issue in &c.issues {
                    writeln!(csv, "{},{},\"{}\"", c.input, c.origin, issue.replace('"', "\"\"")).unwrap();
                }
            }
            print!("{csv}");
        }
    }
    if valid {
        Ok(())
    } else {
        let summary: Vec<String> = output
            .inputs
            .iter()
            .filter(|c| !c.valid)
            .map(|c| format!("{}: {}", c.input, c.issues.join("; ")))
            .collect();
        Err(CliError::validation("validate", summary.join(" | ")))
    }
}

fn session_issues(s: &Session) -> Vec<String> {
    let mut issues: Vec<String> = Vec::new();
    let report = validate_dissimilarity(&s.comparisons);
    if s.stages.stage1 == formsense_core::model::StageState::Complete {
        issues.extend(report.violations.iter().map(ToString::to_string));
    }
    if let Some(a) = &s.appeal {
        if let Err(e) = a.check_complete(s.n()) {
            issues.push(e.to_string());
        }
    }
    if let Some(r) = &s.rules {
        if let Err(e) = r.check_complete(s.n()) {
            issues.push(e.to_string());
        }
    }
    issues
}

fn run_mds(ctx: &Context, dissim: Option<&Path>, k: usize, restarts: usize) -> Result<PerceptualConfiguration, CliError> {
    let matrix = ctx.resolver.matrix(dissim)?;
    Ok(mds::fit_mds(&matrix, &MdsOptions { dim: k, restarts, seed: ctx.seed, ..MdsOptions::default() })?)
}

pub fn mds(
    ctx: &Context,
    dissim: Option<&Path>,
    k: usize,
    restarts: usize,
    out: Option<&Path>,
    svg: Option<&Path>,
) -> Result<(), CliError> {
    let config = run_mds(ctx, dissim, k, restarts)?;
    if let Some(path) = svg {
        if config.dim != 2 {
            return Err(CliError::validation("mds", "the perceptual-map SVG needs k = 2"));
        }
        write_file(path, &plot::perceptual_map_svg(&config, &labels(config.n())))?;
    }
    let content = match ctx.format {
        Format::Json => to_json(&config),
        Format::Csv => config.to_csv(),
    };
    emit(out, &content)
}

#[allow(clippy::too_many_arguments)]
pub fn prefmap(
    ctx: &Context,
    config: Option<&Path>,
    dissim: Option<&Path>,
    appeal: Option<&Path>,
    p_levels: &[f64],
    restarts: usize,
    svg: Option<&Path>,
) -> Result<(), CliError> {
    let config = match config {
        Some(path) => PerceptualConfiguration::from_csv(&inputs::read_file(path)?, None)
            .map_err(|e| CliError::from(e).context(path.display()))?,
        None => run_mds(ctx, dissim, 2, restarts)?,
    };
    let scores = ctx.resolver.appeal(appeal)?;
    let levels = if p_levels.is_empty() { prefmap::DEFAULT_P_LEVELS.to_vec() } else { p_levels.to_vec() };
    let fit = prefmap::fit_vector_model(&config, &scores, &levels)?;
    let vector = prefmap::appeal_vector(&fit, &PipelineOptions::default().vector_levels)?;
    if let Some(path) = svg {
        write_file(path, &plot::appeal_vector_svg(&config, &labels(config.n()), &vector))?;
    }
    let section = PrefmapSection { direction: vector.direction, magnitude: vector.magnitude, fit };
    match ctx.format {
        Format::Json => print!("{}", to_json(&section)),
        Format::Csv => {
            let f = &section.fit;
            let mut csv = String::from("a,b,c,r_squared,f_statistic,df1,df2");
            for t in &f.significance {
                write!(csv, ",significant_p{}", t.p_level).unwrap();
            }
            write!(csv, "\n{},{},{},{},{},{},{}", f.a, f.b, f.c, f.r_squared, f.f_statistic, f.dof.0, f.dof.1).unwrap();
            for t in &f.significance {
                write!(csv, ",{}", t.significant).unwrap();
            }
            csv.push('\n');
            print!("{csv}");
        }
    }
    Ok(())
}

fn fit_options(ctx: &Context, fit: &FitArgs) -> FitOptions {
    FitOptions {
        starts: fit.starts,
        seed: ctx.seed,
        ridge: fit.ridge,
        k_nonneg: fit.k_nonneg,
        gradient_form: if fit.as_printed { GradientForm::AsPrinted } else { GradientForm::Exact },
        ..FitOptions::default()
    }
}

pub fn fit(
    ctx: &Context,
    appeal: Option<&Path>,
    rules: Option<&Path>,
    args: &FitArgs,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let scores = ctx.resolver.appeal(appeal)?;
    let (codes, dims) = ctx.resolver.rules(rules)?;
    let obs = appeal::observations(&scores, &codes, &dims)?;
    let result = appeal::fit_appeal_model(&obs, &fit_options(ctx, args))?;
    let content = match ctx.format {
        Format::Json => to_json(&result),
        Format::Csv => fit_csv(&result),
    };
    emit(out, &content)
}

fn fit_csv(fit: &AppealFit) -> String {
    let mut csv = String::from("parameter,value\n");
    for (name, v) in COEFFICIENT_NAMES.iter().zip(fit.model.a) {
        let short = name.split_whitespace().next().unwrap_or(name);
        writeln!(csv, "{short},{v}").unwrap();
    }
    for (j, v) in fit.model.k.iter().enumerate() {
        writeln!(csv, "k{},{v}", j + 1).unwrap();
    }
    writeln!(csv, "objective,{}", fit.diagnostics.objective).unwrap();
    csv
}

/// Accepts a bare model, a `fit` result (`model`) or a report (`appeal.model`).
pub fn parse_model(text: &str) -> Result<AppealModel, CliError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| CliError::validation("model", e.to_string()))?;
    let candidate = if value.get("a").is_some() {
        &value
    } else if let Some(m) = value.get("model") {
        m
    } else if let Some(m) = value.get("appeal").and_then(|a| a.get("model")) {
        m
    } else {
        return Err(CliError::validation("model", "no appeal model (fields `a` and `k`) found"));
    };
    serde_json::from_value(candidate.clone()).map_err(|e| CliError::validation("model", e.to_string()))
}

pub fn parse_span(text: &str) -> Result<Span, CliError> {
    let bad = || CliError::validation("surface", format!("range `{text}` is not `lo:hi`"));
    let (lo, hi) = text.split_once(':').ok_or_else(bad)?;
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    Span::new(lo, hi).map_err(|e| CliError::validation("surface", e.to_string()))
}

#[allow(clippy::too_many_arguments)]
pub fn surface(
    ctx: &Context,
    model: Option<&Path>,
    d1: f64,
    d2_range: &str,
    d3_range: &str,
    levels: Option<Vec<f64>>,
    resolution: usize,
    out_dir: Option<&Path>,
) -> Result<(), CliError> {
    let model = match model {
        Some(path) => parse_model(&inputs::read_file(path)?).map_err(|e| e.context(path.display()))?,
        None => fixtures::reference_model(),
    };
    let options = PipelineOptions {
        colormap_resolution: (resolution, resolution),
        iso_resolution: resolution,
        iso_levels: levels,
        ..PipelineOptions::default()
    };
    let (section, artifacts) =
        pipeline::analyze_surface(&model, d1, parse_span(d2_range)?, parse_span(d3_range)?, &options)?;
    if let Some(dir) = out_dir {
        pipeline::write_artifacts(dir, &artifacts)?;
    }
    match ctx.format {
        Format::Json => print!("{}", to_json(&section)),
        Format::Csv => print!("{}", artifact(&artifacts, pipeline::SURFACE_FILE)),
    }
    Ok(())
}

fn artifact<'a>(artifacts: &'a [Artifact], name: &str) -> &'a str {
    &artifacts.iter().find(|a| a.name == name).expect("artifact is produced").content
}

pub struct RenderArgs {
    pub template: Option<PathBuf>,
    pub product: Option<usize>,
    pub dims: Option<Vec<f64>>,
    pub rules: Option<PathBuf>,
    pub rule: Option<String>,
    pub delta: Option<f64>,
    pub samples: usize,
    pub out: Option<PathBuf>,
    pub stl: Option<PathBuf>,
    pub segments: usize,
}

#[derive(Debug, Serialize)]
struct RenderSummary {
    params: DesignParams,
    height: f64,
    max_diameter: f64,
    svg: Option<String>,
    stl: Option<String>,
    volume: Option<f64>,
    watertight: Option<bool>,
}

pub fn render(ctx: &Context, args: &RenderArgs) -> Result<(), CliError> {
    let template = match &args.template {
        Some(path) => ProfileTemplate::from_json(&inputs::read_file(path)?).map_err(|e| CliError::from(e).context(path.display()))?,
        None => ProfileTemplate::canonical(),
    };
    let mut params = match (args.dims.as_deref(), args.product) {
        (Some(&[d1, d2, d3]), _) => DesignParams::new(d1, d2, d3),
        (Some(d), _) => return Err(CliError::validation("render", format!("--dims needs 3 values, got {}", d.len()))),
        (None, Some(id)) => {
            let (_, dims) = ctx.resolver.rules(args.rules.as_deref())?;
            *dims.get(&id).ok_or_else(|| CliError::validation("render", format!("unknown product {id}")))?
        }
        (None, None) => return Err(CliError::validation("render", "give --product or --dims")),
    };
    if let Some(rule) = &args.rule {
        let rule: Rule = rule.parse().map_err(|e: String| CliError::validation("render", e))?;
        let delta = args.delta.unwrap_or_else(|| geometry::default_rule_delta(&params, rule));
        params = geometry::apply_rule(&params, rule, delta)?;
    }
    let shape = geometry::generate_profile(&template, &params, args.samples)?;
    let svg = geometry::profile_svg(&shape);
    let mut summary = RenderSummary {
        params,
        height: shape.height(),
        max_diameter: shape.max_diameter(),
        svg: None,
        stl: None,
        volume: None,
        watertight: None,
    };
    if let Some(path) = &args.stl {
        let mesh = geometry::revolve(&shape, args.segments)?;
        write_file(path, &mesh.to_stl("glass"))?;
        summary.stl = Some(path.display().to_string());
        summary.volume = Some(mesh.volume());
        summary.watertight = Some(mesh.is_watertight());
    }
    match &args.out {
        None => print!("{svg}"),
        Some(path) => {
            write_file(path, &svg)?;
            summary.svg = Some(path.display().to_string());
            match ctx.format {
                Format::Json => print!("{}", to_json(&summary)),
                Format::Csv => print!(
                    "d1,d2,d3,height,max_diameter\n{},{},{},{},{}\n",
                    params.d1, params.d2, params.d3, summary.height, summary.max_diameter
                ),
            }
        }
    }
    Ok(())
}

pub fn report(
    ctx: &Context,
    data: &DataArgs,
    session: Option<&Path>,
    restarts: usize,
    fit: &FitArgs,
    out_dir: &Path,
) -> Result<(), CliError> {
    let inputs = inputs::pipeline_inputs(
        &ctx.resolver,
        session,
        data.dissim.as_deref(),
        data.appeal.as_deref(),
        data.rules.as_deref(),
    )?;
    let options = PipelineOptions { seed: ctx.seed, restarts, fit: fit_options(ctx, fit), ..PipelineOptions::default() };
    let (report, artifacts) = pipeline::run_pipeline(&inputs, &options)?;
    pipeline::write_artifacts(out_dir, &artifacts)?;
    match ctx.format {
        Format::Json => print!("{}", artifact(&artifacts, pipeline::REPORT_FILE)),
        Format::Csv => {
            let f = &report.prefmap.fit;
            let mut csv = String::from("metric,value\n");
            let rows: [(&str, String); 9] = [
                ("mds_stress", report.mds.stress.to_string()),
                ("prefmap_a", f.a.to_string()),
                ("prefmap_b", f.b.to_string()),
                ("prefmap_c", f.c.to_string()),
                ("prefmap_r_squared", f.r_squared.to_string()),
                ("prefmap_f", f.f_statistic.to_string()),
                ("appeal_objective", report.appeal.objective.to_string()),
                ("reference_objective_refit_k", report.appeal.reference.objective_refit_k.to_string()),
                ("median_iso_slope", report.surface.median_iso_slope.map_or(String::new(), |s| s.to_string())),
            ];
            for (k, v) in rows {
                writeln!(csv, "{k},{v}").unwrap();
            }
            print!("{csv}");
        }
    }
    Ok(())
}

/// Table texts for a session, in the bundled file formats.
pub fn session_tables(session: &Session) -> Vec<(&'static str, String)> {
    let mut out = vec![(fixtures::DISSIM_FILE, io::write_matrix(&session.comparisons))];
    if let Some(a) = &session.appeal {
        out.push((fixtures::APPEAL_FILE, io::write_appeal(a)));
    }
    if let Some(r) = &session.rules {
        out.push((fixtures::RULES_FILE, io::write_rules(&session.dims(), r)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_shapes() {
        let m = fixtures::reference_model();
        let bare = serde_json::to_string(&m).unwrap();
        assert_eq!(parse_model(&bare).unwrap(), m);
        assert_eq!(parse_model(&format!("{{\"model\": {bare}}}")).unwrap(), m);
        assert_eq!(parse_model(&format!("{{\"appeal\": {{\"model\": {bare}}}}}")).unwrap(), m);
        assert_eq!(parse_model("{}").unwrap_err().exit_code(), 1);
    }

    #[test]
    fn spans() {
        assert_eq!(parse_span("3:7").unwrap(), Span::new(3.0, 7.0).unwrap());
        assert!(parse_span("7:3").is_err());
        assert!(parse_span("3-7").is_err());
    }

    #[test]
    fn fixture_session_tables_round_trip() {
        let tables = session_tables(&fixtures::session("s"));
        assert_eq!(tables.len(), 3);
        assert_eq!(io::load_matrix(&tables[0].1).unwrap(), fixtures::matrix());
    }
}
