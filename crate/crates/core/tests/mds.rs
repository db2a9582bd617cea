use formsense_core::fixtures;
use formsense_core::mds::{
    fit_mds, procrustes_align, procrustes_residual, stress, stress_of_points, MdsOptions,
    PerceptualConfiguration, RealDissimilarities,
};
use formsense_core::model::SparseDissimilarityMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_isometry(rng: &mut ChaCha8Rng, pts: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let theta: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let flip = if rng.random_bool(0.5) { -1.0 } else { 1.0 };
    let (tx, ty): (f64, f64) = (rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
    pts.iter()
        .map(|p| {
            let (x, y) = (p[0], flip * p[1]);
            vec![theta.cos() * x - theta.sin() * y + tx, theta.sin() * x + theta.cos() * y + ty]
        })
        .collect()
}

#[test]
fn fixture_fit_is_normalized_and_consistent() {
    let m = fixtures::matrix();
    let cfg = fit_mds(&m, &MdsOptions::default()).unwrap();
    assert_eq!(cfg.n(), 18);
    assert_eq!(cfg.dim, 2);
    assert!(cfg.converged);
    let recomputed = stress(&cfg, &m).unwrap();
    assert!((recomputed - cfg.stress).abs() <= 1e-9);
    for c in 0..2 {
        let mean: f64 = cfg.points.iter().map(|p| p[c]).sum::<f64>() / 18.0;
        assert!(mean.abs() < 1e-9);
    }
    let var = |c: usize| cfg.points.iter().map(|p| p[c] * p[c]).sum::<f64>();
    assert!(var(0) >= var(1));
    let cross: f64 = cfg.points.iter().map(|p| p[0] * p[1]).sum();
    assert!(cross.abs() < 1e-9);
    assert!(cfg.points[0][0] >= 0.0);
}

#[test]
fn fixed_seed_is_bit_stable() {
    let m = fixtures::matrix();
    let opts = MdsOptions { restarts: 6, seed: 42, ..Default::default() };
    let a = fit_mds(&m, &opts).unwrap();
    let b = fit_mds(&m, &opts).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.to_csv(), b.to_csv());
}

#[test]
fn stress_invariant_under_isometries() {
    let m = fixtures::matrix();
    let cfg = fit_mds(&m, &MdsOptions { restarts: 4, ..Default::default() }).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let moved = random_isometry(&mut rng, &cfg.points);
        let s = stress_of_points(&moved, &m).unwrap();
        assert!((s - cfg.stress).abs() <= 1e-9);
    }
}

#[test]
fn unit_square_embeds_exactly() {
    let square = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]];
    let d = RealDissimilarities::from_points(&square);
    let cfg = fit_mds(&d, &MdsOptions::default()).unwrap();
    assert!(cfg.stress <= 1e-3, "stress {}", cfg.stress);
}

#[test]
fn unobserved_pairs_have_no_influence() {
    // A dense matrix, then sparsified two ways that differ only in the value
    // an unobserved pair would have carried.
    let base = fixtures::matrix();
    let mut hidden_a = base.clone();
    let mut hidden_b = base.clone();
    // (1,3) is unobserved in the fixture; setting it and removing it again
    // must leave no trace in either fit.
    assert_eq!(base.get(1, 3), None);
    hidden_a.set(1, 3, 0).unwrap();
    hidden_b.set(1, 3, 3).unwrap();
    let strip = |m: &SparseDissimilarityMatrix| {
        let mut out = SparseDissimilarityMatrix::new(m.n());
        for (i, j, v) in m.iter().filter(|&(i, j, _)| (i, j) != (1, 3)) {
            out.set(i, j, v).unwrap();
        }
        out
    };
    let (a, b) = (strip(&hidden_a), strip(&hidden_b));
    let opts = MdsOptions { restarts: 3, ..Default::default() };
    assert_eq!(fit_mds(&a, &opts).unwrap(), fit_mds(&b, &opts).unwrap());
    let pts = fit_mds(&base, &opts).unwrap().points;
    assert_eq!(stress_of_points(&pts, &a).unwrap(), stress_of_points(&pts, &b).unwrap());
}

#[test]
fn procrustes_recovers_identity_rotation_and_reflection() {
    let m = fixtures::matrix();
    let cfg = fit_mds(&m, &MdsOptions { restarts: 3, ..Default::default() }).unwrap();

    let same = procrustes_align(&cfg, &cfg).unwrap();
    assert!(procrustes_residual(&same, &cfg).unwrap() <= 1e-20);

    let rotated = PerceptualConfiguration {
        points: cfg.points.iter().map(|p| vec![-p[1], p[0]]).collect(),
        ..cfg.clone()
    };
    let aligned = procrustes_align(&cfg, &rotated).unwrap();
    assert!(procrustes_residual(&aligned, &rotated).unwrap() <= 1e-9);

    let reflected = PerceptualConfiguration {
        points: cfg.points.iter().map(|p| vec![p[0], -p[1]]).collect(),
        ..cfg.clone()
    };
    let aligned = procrustes_align(&cfg, &reflected).unwrap();
    assert!(procrustes_residual(&aligned, &reflected).unwrap() <= 1e-9);
    let s = stress(&aligned, &m).unwrap();
    assert!((s - cfg.stress).abs() <= 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn procrustes_undoes_random_isometries(seed in any::<u64>()) {
        let m = fixtures::matrix();
        let cfg = fit_mds(&m, &MdsOptions { restarts: 1, ..Default::default() }).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let moved = PerceptualConfiguration {
            points: random_isometry(&mut rng, &cfg.points),
            ..cfg.clone()
        };
        let aligned = procrustes_align(&moved, &cfg).unwrap();
        prop_assert!(procrustes_residual(&aligned, &cfg).unwrap() <= 1e-9);
    }
}
