//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails. Run with `cargo test -p formsense-cli --test acceptance`.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use formsense_core::appeal::{
    self, appeal_gradient, fit_appeal_model, predict_appeal, response_surface, AppealModel, FitOptions, Observation,
};
use formsense_core::fixtures;
use formsense_core::geometry::{self, Node, Profile, ProfileTemplate, WALL_GAP};
use formsense_core::mds::{self, MdsOptions, PerceptualConfiguration, RealDissimilarities};
use formsense_core::model::{AppealScores, DesignParams, Rule};
use formsense_core::pipeline::{run_pipeline, PipelineInputs, PipelineOptions};
use formsense_core::prefmap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c1_mds_reproduction() -> Outcome {
    let matrix = fixtures::matrix();
    let opts = |dim| MdsOptions { dim, restarts: 20, seed: 0, ..MdsOptions::default() };
    let start = Instant::now();
    let config = mds::fit_mds(&matrix, &opts(2)).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let s1 = mds::fit_mds(&matrix, &opts(1)).map_err(|e| e.to_string())?.stress;
    let s3 = mds::fit_mds(&matrix, &opts(3)).map_err(|e| e.to_string())?.stress;
    let s2 = config.stress;
    let detail = format!(
        "stress(K=2) = {s2:.4} (bound 0.15, reference 0.12), {:.2} s (bound 5 s); stress K=1,2,3 = {s1:.4}, {s2:.4}, {s3:.4}",
        elapsed.as_secs_f64()
    );
    ensure(s2 <= 0.15 && elapsed < Duration::from_secs(5) && s1 >= s2 && s2 >= s3, detail)
}

fn c2_mds_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let points: Vec<Vec<f64>> = (0..10).map(|_| vec![rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)]).collect();
    let opts = MdsOptions { dim: 2, seed: 0, ..MdsOptions::default() };
    let random = mds::fit_mds(&RealDissimilarities::from_points(&points), &opts).map_err(|e| e.to_string())?.stress;
    let square = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]];
    let unit = mds::fit_mds(&RealDissimilarities::from_points(&square), &opts).map_err(|e| e.to_string())?.stress;
    ensure(random <= 1e-3 && unit <= 1e-3, format!("10 random points: {random:.2e}; unit square: {unit:.2e} (bound 1e-3)"))
}

fn c3_prefmap_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let points: Vec<Vec<f64>> = (0..12).map(|_| vec![rng.random_range(0.0..2.0), rng.random_range(0.0..1.0)]).collect();
    let scores: BTreeMap<usize, f64> = points.iter().enumerate().map(|(k, p)| (k + 1, 2.0 * p[0] - p[1] + 3.0)).collect();
    let exact = RealDissimilarities::from_points(&points);
    let config = PerceptualConfiguration::from_points(points, &exact).map_err(|e| e.to_string())?;
    let fit = prefmap::fit_vector_model(&config, &AppealScores::new(scores).map_err(|e| e.to_string())?, &[0.01])
        .map_err(|e| e.to_string())?;
    let err = (fit.a - 2.0).abs().max((fit.b + 1.0).abs()).max((fit.c - 3.0).abs());
    ensure(
        err <= 1e-9 && fit.r_squared == 1.0,
        format!("(a, b, c) = ({:.12}, {:.12}, {:.12}), max error {err:.1e}, R^2 = {}", fit.a, fit.b, fit.c, fit.r_squared),
    )
}

fn c4_prefmap_pipeline() -> Outcome {
    let config = mds::fit_mds(&fixtures::matrix(), &MdsOptions::default()).map_err(|e| e.to_string())?;
    let fit = prefmap::fit_vector_model(&config, &fixtures::appeal(), &prefmap::DEFAULT_P_LEVELS)
        .map_err(|e| e.to_string())?;
    let f_check = prefmap::f_statistic(0.91, 18, 2).map_err(|e| e.to_string())?;
    let significant = fit.significant_at(0.01) == Some(true);
    ensure(
        significant && fit.r_squared >= 0.75 && (f_check - 75.83).abs() <= 0.01,
        format!(
            "a = {:.4}, b = {:.4}, c = {:.4}, R^2 = {:.4} (bound 0.75), F = {:.2}, significant at 0.01: {significant}; f_statistic(0.91, 18, 2) = {f_check:.2} vs reference F = 80 (deviation {:.2})",
            fit.a,
            fit.b,
            fit.c,
            fit.r_squared,
            fit.f_statistic,
            80.0 - f_check
        ),
    )
}

fn c5_f_critical() -> Outcome {
    let c01 = prefmap::f_critical(0.01, 2, 15).map_err(|e| e.to_string())?;
    let c05 = prefmap::f_critical(0.05, 2, 15).map_err(|e| e.to_string())?;
    ensure(
        (c01 - 6.36).abs() <= 0.02 && (c05 - 3.68).abs() <= 0.02,
        format!("F(0.01; 2, 15) = {c01:.4} (6.36), F(0.05; 2, 15) = {c05:.4} (3.68)"),
    )
}

fn c6_appeal_evaluation() -> Outcome {
    let m = fixtures::reference_model();
    let p1 = predict_appeal(&m, &DesignParams::new(8.0, 7.0, 6.0));
    let p2 = predict_appeal(&m, &DesignParams::new(8.0, 7.0, 9.5));
    ensure(
        (p1 - 10.40).abs() <= 0.01 && (p2 - 3.31).abs() <= 0.01,
        format!("P(8,7,6) = {p1:.4} (10.40), P(8,7,9.5) = {p2:.4} (3.31)"),
    )
}

fn random_model(rng: &mut ChaCha8Rng) -> AppealModel {
    AppealModel { a: std::array::from_fn(|_| rng.random_range(-1.0..1.0)), k: [1.0; 3] }
}

fn c7_gradient() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let m = random_model(&mut rng);
        let d = [rng.random_range(2.0..10.0), rng.random_range(2.0..10.0), rng.random_range(2.0..10.0)];
        let g = appeal_gradient(&m, &DesignParams::from_array(d));
        for (j, gj) in g.iter().enumerate() {
            let (mut up, mut down) = (d, d);
            up[j] += h;
            down[j] -= h;
            let fd = (predict_appeal(&m, &DesignParams::from_array(up)) - predict_appeal(&m, &DesignParams::from_array(down)))
                / (2.0 * h);
            worst = worst.max((gj - fd).abs() / gj.abs().max(1.0));
        }
    }
    let g = appeal_gradient(&fixtures::reference_model(), &DesignParams::new(8.0, 5.0, 8.0));
    ensure(
        worst <= 1e-6 && (g[1] - 0.32).abs() <= 0.005 && (g[2] + 2.11).abs() <= 0.005,
        format!("worst relative error {worst:.1e} (bound 1e-6); reference gradient at (8,5,8) = ({:.4}, {:.4}) vs (0.32, -2.11)", g[1], g[2]),
    )
}

fn c8_surface_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let m = random_model(&mut rng);
        let s = response_surface(&m, 8.0).map_err(|e| e.to_string())?;
        let (d2, d3) = (rng.random_range(0.0..12.0), rng.random_range(0.0..12.0));
        worst = worst.max((s.eval(d2, d3) - predict_appeal(&m, &DesignParams::new(8.0, d2, d3))).abs());
    }
    let s = response_surface(&fixtures::reference_model(), 8.0).map_err(|e| e.to_string())?;
    ensure(
        worst <= 1e-9 && (s.c0 - 13.88).abs() <= 0.01 && (s.c_d2 - 0.04).abs() <= 0.005 && (s.c_d3 + 0.08).abs() <= 0.005,
        format!(
            "max |surface - P| = {worst:.1e} over 1000 points; c0 = {:.4}, c_d2 = {:.4}, c_d3 = {:.4}",
            s.c0, s.c_d2, s.c_d3
        ),
    )
}

fn fixture_observations() -> Vec<Observation> {
    appeal::observations(&fixtures::appeal(), &fixtures::rules(), &fixtures::dims()).expect("fixtures are complete")
}

fn c9_c10_fit() -> (Outcome, Outcome) {
    let obs = fixture_observations();
    let start = Instant::now();
    let fit = match fit_appeal_model(&obs, &FitOptions::default()) {
        Ok(f) => f,
        Err(e) => return (Err(e.to_string()), Err(e.to_string())),
    };
    let elapsed = start.elapsed();
    let reference = fixtures::reference_model();
    let k = appeal::refit_k(&reference.a, &obs, appeal::GradientForm::Exact, false);
    let reference_objective = appeal::objective(&AppealModel { a: reference.a, k }, &obs);
    let c9 = ensure(
        fit.diagnostics.objective <= reference_objective && elapsed < Duration::from_secs(30),
        format!(
            "fitted objective {:.4} vs reference coefficients with refit k {reference_objective:.4}; {:.2} s (bound 30 s)",
            fit.diagnostics.objective,
            elapsed.as_secs_f64()
        ),
    );
    let grads: Vec<[f64; 3]> = obs.iter().map(|o| fit.model.gradient(&o.dims)).collect();
    let d3_neg = grads.iter().filter(|g| g[2] <= 0.0).count();
    let d2_pos = grads.iter().filter(|g| g[1] >= 0.0).count();
    let n = grads.len() as f64;
    let c10 = ensure(
        d3_neg as f64 >= 0.85 * n && d2_pos as f64 >= 0.70 * n,
        format!("dP/dd3 <= 0 at {d3_neg}/18 (need 85%), dP/dd2 >= 0 at {d2_pos}/18 (need 70%)"),
    );
    (c9, c10)
}

fn c11_synthetic_recovery() -> Outcome {
    let truth = AppealModel { a: [0.5, 0.25, -2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 3.0], k: [2.0, 4.0, 0.5] };
    let mut obs = Vec::new();
    for d1 in [6.0, 8.0, 10.0] {
        for d2 in [3.0, 5.0, 7.0] {
            for d3 in [6.0, 8.0, 9.5] {
                let dims = DesignParams::new(d1, d2, d3);
                let g = truth.gradient(&dims);
                let deltas = [0, 1, 2].map(|j| (truth.k[j] * g[j]).round() as i8);
                obs.push(Observation { id: obs.len() + 1, dims, appeal: truth.predict(&dims), deltas });
            }
        }
    }
    let fit = fit_appeal_model(&obs, &FitOptions::default()).map_err(|e| e.to_string())?;
    let worst = obs.iter().map(|o| (fit.model.predict(&o.dims) - o.appeal).abs()).fold(0.0, f64::max);
    ensure(
        worst <= 1e-3 && fit.diagnostics.objective <= 1e-6,
        format!("27-point grid: max prediction error {worst:.1e} (bound 1e-3), objective {:.1e} (bound 1e-6)", fit.diagnostics.objective),
    )
}

fn gap_to(p: Node, line: &[Node]) -> f64 {
    line.windows(2)
        .map(|w| {
            let (ar, az, br, bz) = (w[0].r, w[0].z, w[1].r, w[1].z);
            let (dr, dz) = (br - ar, bz - az);
            let len2 = dr * dr + dz * dz;
            let t = if len2 == 0.0 { 0.0 } else { (((p.r - ar) * dr + (p.z - az) * dz) / len2).clamp(0.0, 1.0) };
            (p.r - ar - t * dr).hypot(p.z - az - t * dz)
        })
        .fold(f64::INFINITY, f64::min)
}

fn c12_geometry() -> Outcome {
    let mesh = geometry::revolve_profile(&Profile::cylinder(1.0, 2.0), 256).map_err(|e| e.to_string())?;
    let exact = std::f64::consts::PI * 2.0;
    let vol_err = (mesh.volume() - exact).abs() / exact;
    let shape = geometry::generate_profile(&ProfileTemplate::canonical(), &DesignParams::new(8.0, 5.0, 8.0), 64)
        .map_err(|e| e.to_string())?;
    let wall = &shape.inner[..shape.inner.len() - 1];
    let worst_gap = (0..50)
        .map(|k| (gap_to(wall[k * (wall.len() - 1) / 49], shape.container()) - WALL_GAP).abs())
        .fold(0.0, f64::max);
    let p = DesignParams::new(8.0, 5.0, 7.0);
    let rules_ok = geometry::apply_rule(&p, Rule::R2, 0.5).ok() == Some(DesignParams::new(8.0, 5.5, 7.0))
        && geometry::apply_rule(&p, Rule::R1, 1.0).ok() == Some(DesignParams::new(9.0, 5.0, 7.0))
        && geometry::apply_rule(&p, Rule::R3, 0.5).ok() == Some(DesignParams::new(8.0, 5.0, 7.5))
        && geometry::apply_rule(&p, Rule::R3, 0.0).is_err();
    ensure(
        vol_err <= 0.002 && worst_gap <= 1e-3 && rules_ok,
        format!(
            "cylinder volume error {:.4}% (bound 0.2%), worst wall-gap deviation {worst_gap:.1e} cm over 50 samples, rule cases exact: {rules_ok}",
            vol_err * 100.0
        ),
    )
}

fn run_report(dir: &Path) -> Result<(Vec<u8>, Duration), String> {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_formsense"))
        .args(["report", "--seed", "0", "--out-dir"])
        .arg(dir)
        .env_remove("FORMSENSE_FIXTURES")
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(String::from_utf8_lossy(&out.stderr).into_owned());
    }
    Ok((out.stdout, start.elapsed()))
}

fn c13_determinism() -> Outcome {
    let (a, b) = (tempfile::tempdir().map_err(|e| e.to_string())?, tempfile::tempdir().map_err(|e| e.to_string())?);
    let (out_a, t_a) = run_report(a.path())?;
    let (out_b, t_b) = run_report(b.path())?;
    let mut names: Vec<_> = std::fs::read_dir(a.path())
        .map_err(|e| e.to_string())?
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    let differing: Vec<String> = names
        .iter()
        .filter(|n| std::fs::read(a.path().join(n)).ok() != std::fs::read(b.path().join(n)).ok())
        .map(|n| n.to_string_lossy().into_owned())
        .collect();
    let svgs = names.iter().filter(|n| n.to_string_lossy().ends_with(".svg")).count();
    let in_memory = run_pipeline(&PipelineInputs::bundled(), &PipelineOptions::default()).map_err(|e| e.to_string())?;
    let stdout_is_report = out_a == in_memory.0.to_json().into_bytes();
    ensure(
        differing.is_empty() && out_a == out_b && svgs == 4 && stdout_is_report && t_a.max(t_b) < Duration::from_secs(60),
        format!(
            "{} files ({svgs} SVG) identical across runs: {}; slowest run {:.2} s (bound 60 s)",
            names.len(),
            if differing.is_empty() { "yes".to_string() } else { format!("no, {differing:?}") },
            t_a.max(t_b).as_secs_f64()
        ),
    )
}

fn main() {
    let (c9, c10) = c9_c10_fit();
    let results: Vec<(u8, &str, Outcome)> = vec![
        (1, "MDS reproduction", c1_mds_reproduction()),
        (2, "MDS exactness", c2_mds_exactness()),
        (3, "prefmap exactness", c3_prefmap_exactness()),
        (4, "prefmap on the pipeline configuration", c4_prefmap_pipeline()),
        (5, "F critical values", c5_f_critical()),
        (6, "appeal evaluation", c6_appeal_evaluation()),
        (7, "gradient check", c7_gradient()),
        (8, "response-surface identity", c8_surface_identity()),
        (9, "fit dominance", c9),
        (10, "fit sign pattern", c10),
        (11, "synthetic recovery", c11_synthetic_recovery()),
        (12, "geometry", c12_geometry()),
        (13, "pipeline determinism", c13_determinism()),
    ];
    let mut failed = 0;
    for (id, name, outcome) in &results {
        match outcome {
            Ok(detail) => println!("PASS {id:>2} {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {id:>2} {name}: {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
