use formsense_core::geometry::*;
use formsense_core::model::{DesignParams, Rule};
use proptest::prelude::*;

fn shape(d1: f64, d2: f64, d3: f64) -> GlassShape {
    generate_profile(&ProfileTemplate::canonical(), &DesignParams::new(d1, d2, d3), DEFAULT_SAMPLES_PER_SEGMENT).unwrap()
}

fn point_to_polyline(p: [f64; 2], line: &[Node]) -> f64 {
    line.windows(2)
        .map(|w| {
            let (a, b) = ([w[0].r, w[0].z], [w[1].r, w[1].z]);
            let ab = [b[0] - a[0], b[1] - a[1]];
            let len2 = ab[0] * ab[0] + ab[1] * ab[1];
            let t = if len2 == 0.0 { 0.0 } else { (((p[0] - a[0]) * ab[0] + (p[1] - a[1]) * ab[1]) / len2).clamp(0.0, 1.0) };
            (p[0] - a[0] - t * ab[0]).hypot(p[1] - a[1] - t * ab[1])
        })
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn canonical_shape_meets_its_dimensions() {
    let s = shape(8.0, 5.0, 8.0);
    let base_h = ProfileTemplate::canonical().base_height();
    let (lo, hi) = s.container_z_extent();
    assert!((hi - lo - 8.0).abs() <= 1e-6);
    assert!((lo - (base_h + 5.0)).abs() <= 1e-12);
    assert!((s.max_diameter() - 8.0).abs() <= 1e-6);
    assert_eq!(s.outer[0], Node { r: 0.0, z: 0.0 });
    assert_eq!(s.inner.last().unwrap().r, 0.0);
}

#[test]
fn template_nodes_are_interpolated() {
    let s = shape(8.0, 5.0, 8.0);
    for n in &s.nodes {
        assert!(s.outer.iter().any(|o| (o.r - n.r).abs() < 1e-12 && (o.z - n.z).abs() < 1e-12), "{n:?}");
    }
}

#[test]
fn tangent_continuity_at_p5_and_p9() {
    let s = generate_profile(&ProfileTemplate::canonical(), &DesignParams::new(8.0, 5.0, 8.0), 4096).unwrap();
    for node in [4, 8] {
        let p = s.nodes[node];
        let k = s.outer.iter().position(|o| (o.r - p.r).abs() < 1e-12 && (o.z - p.z).abs() < 1e-12).unwrap();
        let dir = |a: Node, b: Node| {
            let (dr, dz) = (b.r - a.r, b.z - a.z);
            let len = dr.hypot(dz);
            (dr / len, dz / len)
        };
        let before = dir(s.outer[k - 1], s.outer[k]);
        let after = dir(s.outer[k], s.outer[k + 1]);
        // One-sided chord directions agree up to the sampling step.
        let cross = before.0 * after.1 - before.1 * after.0;
        assert!(cross.abs() < 1e-3, "node P{}: {before:?} vs {after:?}", node + 1);
    }
}

#[test]
fn thin_container_is_degenerate() {
    let r = generate_profile(&ProfileTemplate::canonical(), &DesignParams::new(8.0, 5.0, 0.15), 16);
    assert!(matches!(r, Err(GeometryError::DegenerateShape(_))), "{r:?}");
    let r = generate_profile(&ProfileTemplate::canonical(), &DesignParams::new(8.0, 0.0, 8.0), 16);
    assert!(matches!(r, Err(GeometryError::InvalidParams(_))));
}

#[test]
fn wall_gap_is_one_millimetre() {
    let s = generate_profile(&ProfileTemplate::canonical(), &DesignParams::new(8.0, 5.0, 8.0), 64).unwrap();
    let container = s.container();
    // 50 inner points spread over the wall (the floor point is excluded).
    let wall = &s.inner[..s.inner.len() - 1];
    for k in 0..50 {
        let q = wall[k * (wall.len() - 1) / 49];
        let gap = point_to_polyline([q.r, q.z], container);
        assert!((gap - WALL_GAP).abs() <= 1e-3, "gap {gap} at {q:?}");
        assert!(q.r >= 0.0);
    }
}

#[test]
fn apply_rule_unit_cases() {
    let p = DesignParams::new(8.0, 5.0, 7.0);
    assert_eq!(apply_rule(&p, Rule::R2, 0.5).unwrap(), DesignParams::new(8.0, 5.5, 7.0));
    assert_eq!(apply_rule(&p, Rule::R1, 1.0).unwrap(), DesignParams::new(9.0, 5.0, 7.0));
    assert_eq!(apply_rule(&p, Rule::R3, 0.5).unwrap(), DesignParams::new(8.0, 5.0, 7.5));
    assert!(apply_rule(&p, Rule::R3, 0.0).is_err());
    assert!(apply_rule(&p, Rule::R3, -1.0).is_err());
    assert_eq!(default_rule_delta(&p, Rule::R2), 0.5);
}

#[test]
fn revolved_glass_is_closed() {
    let s = shape(8.0, 5.0, 8.0);
    let mesh = revolve(&s, 64).unwrap();
    let profile = s.closed_profile();
    assert_eq!(mesh.vertices.len(), (profile.points.len() - 2) * 64 + 2);
    assert!(mesh.is_watertight());
    assert_eq!(mesh.euler_characteristic(), 2);
    assert!(mesh.volume() > 0.0);
    let (lo, hi) = mesh.bounding_box();
    let min_z = profile.points.iter().map(|p| p[1]).fold(f64::INFINITY, f64::min);
    assert_eq!(min_z, 0.0);
    assert_eq!(lo[2], 0.0);
    assert_eq!(hi[2], s.height());
    assert!(revolve(&s, 2).is_err());
}

#[test]
fn cylinder_volume() {
    let mesh = revolve_profile(&Profile::cylinder(1.0, 2.0), 256).unwrap();
    let exact = std::f64::consts::PI * 2.0;
    assert!((mesh.volume() - exact).abs() / exact <= 0.002, "{}", mesh.volume());
    assert!(mesh.is_watertight());
    assert_eq!(mesh.euler_characteristic(), 2);
}

#[test]
fn profile_svg_structure() {
    let s = shape(8.0, 5.0, 8.0);
    let svg = profile_svg(&s);
    assert_eq!(svg, profile_svg(&s));
    let doc = roxmltree::Document::parse(&svg).unwrap();
    let paths: Vec<_> = doc.descendants().filter(|n| n.has_tag_name("path")).collect();
    assert_eq!(paths.len(), 4);
    for side in ["left", "right"] {
        assert_eq!(paths.iter().filter(|p| p.attribute("class").unwrap().ends_with(side)).count(), 2);
    }
    let vb: Vec<f64> = doc
        .root_element()
        .attribute("viewBox")
        .unwrap()
        .split(' ')
        .map(|x| x.parse().unwrap())
        .collect();
    let base_h = ProfileTemplate::canonical().base_height();
    let want = (8.0 + 5.0 + base_h) / s.max_diameter().max(s.base_diameter());
    assert!((vb[3] / vb[2] - want).abs() <= 1e-6, "{} vs {want}", vb[3] / vb[2]);
}

#[test]
fn reference_glasses_all_generate() {
    let dims = formsense_core::fixtures::dims();
    for (id, d) in dims {
        let s = generate_profile(&ProfileTemplate::canonical(), &d, DEFAULT_SAMPLES_PER_SEGMENT);
        assert!(s.is_ok(), "G{id}: {s:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn diameter_scales_linearly(d3 in 4.0..9.5f64, lambda in 0.5..2.0f64) {
        let a = shape(8.0, 5.0, d3);
        let b = shape(8.0, 5.0, lambda * d3);
        prop_assert!((b.max_diameter() - lambda * a.max_diameter()).abs() <= 1e-6);
    }

    #[test]
    fn rules_touch_one_coordinate_and_commute(
        d in (1.0..10.0f64, 1.0..10.0f64, 1.0..10.0f64),
        steps in (0.01..2.0f64, 0.01..2.0f64, 0.01..2.0f64),
    ) {
        let p = DesignParams::new(d.0, d.1, d.2);
        for (rule, step) in [(Rule::R1, steps.0), (Rule::R2, steps.1), (Rule::R3, steps.2)] {
            let q = apply_rule(&p, rule, step).unwrap();
            let changed = (0..3).filter(|&c| q.as_array()[c] != p.as_array()[c]).count();
            prop_assert_eq!(changed, 1);
        }
        let forward = apply_rule(&apply_rule(&apply_rule(&p, Rule::R1, steps.0).unwrap(), Rule::R2, steps.1).unwrap(), Rule::R3, steps.2).unwrap();
        let backward = apply_rule(&apply_rule(&apply_rule(&p, Rule::R3, steps.2).unwrap(), Rule::R2, steps.1).unwrap(), Rule::R1, steps.0).unwrap();
        prop_assert_eq!(forward, backward);
    }

    #[test]
    fn inner_wall_stays_inside(d1 in 5.0..11.0f64, d2 in 2.0..8.0f64, d3 in 4.0..10.0f64) {
        let s = shape(d1, d2, d3);
        let container = s.container();
        for q in &s.inner {
            prop_assert!(q.r >= 0.0);
            // The outer radius at the same height bounds the inner radius.
            let outer_r = container
                .windows(2)
                .filter(|w| (w[0].z - q.z) * (w[1].z - q.z) <= 0.0 && w[0].z != w[1].z)
                .map(|w| w[0].r + (q.z - w[0].z) / (w[1].z - w[0].z) * (w[1].r - w[0].r))
                .fold(f64::NEG_INFINITY, f64::max);
            if outer_r.is_finite() {
                prop_assert!(q.r <= outer_r);
            }
        }
    }
}
