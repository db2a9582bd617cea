//! Parametric glass profiles: a 15-node spline template in three sections
//! (base P1..P5, foot P5..P9, container P9..P15), scaled to the design
//! parameters, offset inward for the container's inner wall, revolved into a
//! closed triangle mesh and rendered as a 2D SVG silhouette.
//!
//! Heights are measured from the bottom of the base. The base keeps its
//! template size; the foot spans `d2` above the base, so the container base
//! sits at `base_height + d2`; the container spans `d1` and its outer
//! diameter peaks at exactly `d3`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{DesignParams, Rule};

pub const TEMPLATE_JSON: &str = include_str!("../fixtures/template.json");

pub const NODE_COUNT: usize = 15;
/// Wall thickness between the outer and inner container surfaces, in cm.
pub const WALL_GAP: f64 = 0.1;
/// Fraction of a dimension used as the default rule step.
pub const DEFAULT_RULE_FRACTION: f64 = 0.1;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("invalid template: {0}")]
    InvalidTemplate(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("degenerate shape: {0}")]
    DegenerateShape(String),
    #[error("invalid arguments: {0}")]
    InvalidArguments(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub r: f64,
    pub z: f64,
}

impl Node {
    fn add(self, o: Node) -> Node {
        Node { r: self.r + o.r, z: self.z + o.z }
    }
    fn sub(self, o: Node) -> Node {
        Node { r: self.r - o.r, z: self.z - o.z }
    }
    fn scale(self, s: f64) -> Node {
        Node { r: self.r * s, z: self.z * s }
    }
}

/// Control nodes of a glass at `reference_params`, in cm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileTemplate {
    pub reference_params: DesignParams,
    pub nodes: Vec<Node>,
    /// Zero-based indices of P5 and P9.
    pub continuity_nodes: [usize; 2],
}

impl ProfileTemplate {
    pub fn canonical() -> Self {
        let t: Self = serde_json::from_str(TEMPLATE_JSON).expect("bundled template parses");
        t.validate().expect("bundled template is valid");
        t
    }

    pub fn from_json(text: &str) -> Result<Self, GeometryError> {
        let t: Self = serde_json::from_str(text).map_err(|e| GeometryError::InvalidTemplate(e.to_string()))?;
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        let bad = |m: String| Err(GeometryError::InvalidTemplate(m));
        if self.nodes.len() != NODE_COUNT {
            return bad(format!("expected {NODE_COUNT} nodes, got {}", self.nodes.len()));
        }
        if self.continuity_nodes != [4, 8] {
            return bad("continuity nodes must be P5 and P9".into());
        }
        if self.nodes[0] != (Node { r: 0.0, z: 0.0 }) {
            return bad("P1 must lie on the axis at z = 0".into());
        }
        if self.nodes.iter().any(|n| !(n.r.is_finite() && n.z.is_finite()) || n.r < 0.0) {
            return bad("node radii must be finite and non-negative".into());
        }
        if self.nodes[1..].iter().any(|n| n.r == 0.0) {
            return bad("only P1 may lie on the axis".into());
        }
        if self.nodes[4..=8].windows(2).any(|w| w[1].z < w[0].z) {
            return bad("z must be nondecreasing along the foot".into());
        }
        if self.nodes[8..].windows(2).any(|w| w[1].z <= w[0].z) {
            return bad("z must increase along the container".into());
        }
        if self.base_height() <= 0.0 || self.foot_height() <= 0.0 {
            return bad("base and foot must have positive height".into());
        }
        if !self.reference_params.is_positive() {
            return bad("reference parameters must be positive".into());
        }
        Ok(())
    }

    pub fn base_height(&self) -> f64 {
        self.nodes[4].z
    }

    fn foot_height(&self) -> f64 {
        self.nodes[8].z - self.nodes[4].z
    }

    fn container_height(&self) -> f64 {
        self.nodes[14].z - self.nodes[8].z
    }

    /// Nodes placed for `params`, with container radii multiplied by `s`.
    fn placed_nodes(&self, params: &DesignParams, s: f64) -> Vec<Node> {
        let base_h = self.base_height();
        let foot_scale = params.d2 / self.foot_height();
        let container_scale = params.d1 / self.container_height();
        let z9 = self.nodes[8].z;
        self.nodes
            .iter()
            .enumerate()
            .map(|(i, n)| match i {
                0..=4 => *n,
                5..=7 => Node { r: n.r, z: base_h + (n.z - base_h) * foot_scale },
                _ => Node {
                    r: n.r * s,
                    z: base_h + params.d2 + (n.z - z9) * container_scale,
                },
            })
            .collect()
    }
}

/// Hermite segment between `p0` and `p1` with parameter derivatives
/// `m0`, `m1` over `t in [0, 1]`.
#[derive(Debug, Clone, Copy)]
struct Segment {
    p0: Node,
    p1: Node,
    m0: Node,
    m1: Node,
}

impl Segment {
    fn at(&self, t: f64) -> Node {
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        self.p0.scale(h00).add(self.m0.scale(h10)).add(self.p1.scale(h01)).add(self.m1.scale(h11))
    }

    fn derivative(&self, t: f64) -> Node {
        let t2 = t * t;
        let d00 = 6.0 * t2 - 6.0 * t;
        let d10 = 3.0 * t2 - 4.0 * t + 1.0;
        let d01 = -6.0 * t2 + 6.0 * t;
        let d11 = 3.0 * t2 - 2.0 * t;
        self.p0.scale(d00).add(self.m0.scale(d10)).add(self.p1.scale(d01)).add(self.m1.scale(d11))
    }

    /// Parameters in `(0, 1)` where `dr/dt = 0`.
    fn radial_extrema(&self) -> Vec<f64> {
        // r'(t) = a t^2 + b t + c
        let (p0, p1, m0, m1) = (self.p0.r, self.p1.r, self.m0.r, self.m1.r);
        let a = 6.0 * p0 + 3.0 * m0 - 6.0 * p1 + 3.0 * m1;
        let b = -6.0 * p0 - 4.0 * m0 + 6.0 * p1 - 2.0 * m1;
        let c = m0;
        let mut roots = Vec::new();
        if a.abs() < 1e-14 {
            if b.abs() > 1e-14 {
                roots.push(-c / b);
            }
        } else {
            let disc = b * b - 4.0 * a * c;
            if disc >= 0.0 {
                let sq = disc.sqrt();
                roots.push((-b - sq) / (2.0 * a));
                roots.push((-b + sq) / (2.0 * a));
            }
        }
        roots.retain(|t| *t > 0.0 && *t < 1.0);
        roots
    }
}

/// C2 cubic spline through `nodes` (uniform parameter) with clamped end
/// derivatives.
fn clamped_spline(nodes: &[Node], d_start: Node, d_end: Node) -> Vec<Segment> {
    let m = nodes.len() - 1;
    let mut d = vec![Node { r: 0.0, z: 0.0 }; m + 1];
    d[0] = d_start;
    d[m] = d_end;
    if m >= 2 {
        // D[i-1] + 4 D[i] + D[i+1] = 3 (Q[i+1] - Q[i-1]) for interior i.
        let k = m - 1;
        let mut diag = vec![4.0; k];
        let mut rhs: Vec<Node> = (1..m).map(|i| nodes[i + 1].sub(nodes[i - 1]).scale(3.0)).collect();
        rhs[0] = rhs[0].sub(d_start);
        rhs[k - 1] = rhs[k - 1].sub(d_end);
        for i in 1..k {
            let w = 1.0 / diag[i - 1];
            diag[i] -= w;
            rhs[i] = rhs[i].sub(rhs[i - 1].scale(w));
        }
        d[k] = rhs[k - 1].scale(1.0 / diag[k - 1]);
        for i in (0..k - 1).rev() {
            d[i + 1] = rhs[i].sub(d[i + 2]).scale(1.0 / diag[i]);
        }
    }
    (0..m)
        .map(|i| Segment { p0: nodes[i], p1: nodes[i + 1], m0: d[i], m1: d[i + 1] })
        .collect()
}

/// The three sections' segments, tangents at P5 and P9 shared.
fn sections(nodes: &[Node]) -> [Vec<Segment>; 3] {
    let t1 = nodes[1].sub(nodes[0]);
    let t5 = nodes[5].sub(nodes[3]).scale(0.5);
    let t9 = nodes[9].sub(nodes[7]).scale(0.5);
    let t15 = nodes[14].sub(nodes[13]);
    [
        clamped_spline(&nodes[0..=4], t1, t5),
        clamped_spline(&nodes[4..=8], t5, t9),
        clamped_spline(&nodes[8..=14], t9, t15),
    ]
}

fn max_radius(segments: &[Segment]) -> (f64, Vec<(usize, f64)>) {
    let mut best = f64::NEG_INFINITY;
    let mut at = Vec::new();
    for (i, seg) in segments.iter().enumerate() {
        let mut ts = seg.radial_extrema();
        ts.push(0.0);
        ts.push(1.0);
        for t in ts {
            let r = seg.at(t).r;
            if r > best {
                best = r;
            }
            at.push((i, t));
        }
    }
    at.retain(|&(i, t)| segments[i].at(t).r == best);
    (best, at)
}

/// A generated glass: the outer curve from P1 to the rim and the inner
/// container wall from the rim down to the cavity floor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlassShape {
    pub params: DesignParams,
    pub nodes: Vec<Node>,
    /// P1 .. P15, sampled.
    pub outer: Vec<Node>,
    /// Index in `outer` of P9.
    pub container_start: usize,
    /// Inner wall from the rim to the floor, ending on the axis.
    pub inner: Vec<Node>,
}

impl GlassShape {
    pub fn container(&self) -> &[Node] {
        &self.outer[self.container_start..]
    }

    pub fn height(&self) -> f64 {
        self.outer.iter().map(|n| n.z).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_diameter(&self) -> f64 {
        2.0 * self.container().iter().map(|n| n.r).fold(0.0, f64::max)
    }

    pub fn base_diameter(&self) -> f64 {
        2.0 * self.outer[..self.container_start].iter().map(|n| n.r).fold(0.0, f64::max)
    }

    pub fn width(&self) -> f64 {
        self.max_diameter().max(self.base_diameter())
    }

    /// `(min z, max z)` of the container's outer curve.
    pub fn container_z_extent(&self) -> (f64, f64) {
        self.container()
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), n| (lo.min(n.z), hi.max(n.z)))
    }

    /// Closed profile for revolution: outer curve, rim, inner wall, floor.
    /// Both ends lie on the axis.
    pub fn closed_profile(&self) -> Profile {
        let mut points: Vec<[f64; 2]> = self.outer.iter().map(|n| [n.r, n.z]).collect();
        points.extend(self.inner.iter().map(|n| [n.r, n.z]));
        Profile { points }
    }
}

/// Samples per spline segment used by default.
pub const DEFAULT_SAMPLES_PER_SEGMENT: usize = 16;

fn sample(segments: &[Segment], per_segment: usize, extra: &[(usize, f64)]) -> Vec<(Node, Node)> {
    let mut out = Vec::new();
    for (i, seg) in segments.iter().enumerate() {
        let mut ts: Vec<f64> = (0..per_segment).map(|k| k as f64 / per_segment as f64).collect();
        ts.extend(extra.iter().filter(|(j, t)| *j == i && *t > 0.0 && *t < 1.0).map(|(_, t)| *t));
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        out.extend(ts.into_iter().map(|t| (seg.at(t), seg.derivative(t))));
    }
    let last = segments.last().expect("sections are nonempty");
    out.push((last.p1, last.m1));
    out
}

fn segments_intersect(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> bool {
    let orient = |p: [f64; 2], q: [f64; 2], r: [f64; 2]| (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]);
    let (o1, o2, o3, o4) = (orient(a, b, c), orient(a, b, d), orient(c, d, a), orient(c, d, b));
    o1 * o2 < 0.0 && o3 * o4 < 0.0
}

/// A pair of non-adjacent crossing segments of an open polyline, found by a
/// sweep over z.
fn self_intersection(points: &[[f64; 2]]) -> Option<(usize, usize)> {
    let n = points.len();
    if n < 4 {
        return None;
    }
    let span = |i: usize| {
        let (a, b) = (points[i][1], points[i + 1][1]);
        (a.min(b), a.max(b))
    };
    let mut order: Vec<usize> = (0..n - 1).collect();
    order.sort_by(|&a, &b| span(a).0.total_cmp(&span(b).0).then(a.cmp(&b)));
    for (k, &i) in order.iter().enumerate() {
        let top = span(i).1;
        for &j in &order[k + 1..] {
            if span(j).0 > top {
                break;
            }
            if i.abs_diff(j) >= 2 && segments_intersect(points[i], points[i + 1], points[j], points[j + 1]) {
                return Some((i.min(j), i.max(j)));
            }
        }
    }
    None
}

pub fn generate_profile(
    template: &ProfileTemplate,
    params: &DesignParams,
    samples_per_segment: usize,
) -> Result<GlassShape, GeometryError> {
    template.validate()?;
    if !params.is_positive() {
        return Err(GeometryError::InvalidParams(format!("{params:?} must be positive")));
    }
    if samples_per_segment == 0 {
        return Err(GeometryError::InvalidArguments("samples_per_segment must be positive".into()));
    }
    let target = params.d3 / 2.0;
    let container_max = |s: f64| max_radius(&sections(&template.placed_nodes(params, s))[2]).0;

    // The container's peak radius is increasing in the scale; bracket, then bisect.
    let (mut lo, mut hi) = (0.0, target / template.nodes[8..].iter().map(|n| n.r).fold(0.0, f64::max));
    if container_max(lo) > target {
        return Err(GeometryError::DegenerateShape(format!(
            "the foot alone is wider than d3 = {}",
            params.d3
        )));
    }
    while container_max(hi) < target {
        hi *= 2.0;
        if hi > 1e9 {
            return Err(GeometryError::DegenerateShape("cannot reach the requested diameter".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if container_max(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let nodes = template.placed_nodes(params, hi);
    let [base, foot, container] = sections(&nodes);
    let (_, peaks) = max_radius(&container);

    let mut samples = sample(&base, samples_per_segment, &[]);
    samples.pop();
    samples.extend(sample(&foot, samples_per_segment, &[]));
    samples.pop();
    let container_start = samples.len();
    let container_samples = sample(&container, samples_per_segment, &peaks);
    samples.extend(container_samples.iter().copied());

    let mut outer: Vec<Node> = samples.iter().map(|(p, _)| *p).collect();
    // Peak samples are exact up to rounding in the bisection; pin them.
    let peak = outer[container_start..].iter().map(|n| n.r).fold(0.0, f64::max);
    if (peak - target).abs() <= 1e-9 * target {
        for n in &mut outer[container_start..] {
            if n.r == peak {
                n.r = target;
            }
        }
    }
    if outer[1..].iter().any(|n| n.r <= 0.0) {
        return Err(GeometryError::DegenerateShape("outer curve touches or crosses the axis".into()));
    }

    let mut inner: Vec<Node> = Vec::with_capacity(container_samples.len() + 1);
    for (p, d) in container_samples.iter().rev() {
        let len = d.r.hypot(d.z);
        if len == 0.0 {
            return Err(GeometryError::DegenerateShape("container curve has a cusp".into()));
        }
        // Inward normal of a curve traversed upward.
        let n = Node { r: -d.z / len, z: d.r / len };
        let q = p.add(n.scale(WALL_GAP));
        if q.r < 0.0 {
            return Err(GeometryError::DegenerateShape(format!(
                "inner wall crosses the axis at z = {:.4} (radius {:.4} < gap {WALL_GAP})",
                p.z, p.r
            )));
        }
        inner.push(q);
    }
    let floor = inner.last().expect("container is sampled").z;
    inner.push(Node { r: 0.0, z: floor });

    let shape = GlassShape { params: *params, nodes, outer, container_start, inner };
    let closed = shape.closed_profile();
    if let Some((i, j)) = self_intersection(&closed.points) {
        return Err(GeometryError::DegenerateShape(format!(
            "profile self-intersects between samples {i} and {j}"
        )));
    }
    Ok(shape)
}

pub fn apply_rule(params: &DesignParams, rule: Rule, delta: f64) -> Result<DesignParams, GeometryError> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(GeometryError::InvalidArguments(format!("rule step {delta} must be positive")));
    }
    let mut v = params.as_array();
    v[rule.index()] += delta;
    let out = DesignParams::from_array(v);
    if !out.is_positive() {
        return Err(GeometryError::InvalidParams(format!("{out:?} must be positive")));
    }
    Ok(out)
}

/// Default step for previewing a rule: a fixed fraction of the dimension.
pub fn default_rule_delta(params: &DesignParams, rule: Rule) -> f64 {
    DEFAULT_RULE_FRACTION * params.get(rule)
}

/// Closed `(r, z)` polyline whose first and last points lie on the axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub points: Vec<[f64; 2]>,
}

impl Profile {
    /// Solid cylinder outline, bottom centre to top centre.
    pub fn cylinder(radius: f64, height: f64) -> Self {
        Self { points: vec![[0.0, 0.0], [radius, 0.0], [radius, height], [0.0, height]] }
    }

    /// Twice the signed area in the `(r, z)` half-plane, closing along the axis.
    fn signed_area2(&self) -> f64 {
        let p = &self.points;
        (0..p.len())
            .map(|i| {
                let (a, b) = (p[i], p[(i + 1) % p.len()]);
                a[0] * b[1] - b[0] * a[1]
            })
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriangleMesh {
    pub vertices: Vec<[f64; 3]>,
    pub triangles: Vec<[u32; 3]>,
}

pub fn revolve(shape: &GlassShape, angular_segments: usize) -> Result<TriangleMesh, GeometryError> {
    revolve_profile(&shape.closed_profile(), angular_segments)
}

/// Revolves a closed profile about the z axis. Points with `r == 0` become
/// single pole vertices.
pub fn revolve_profile(profile: &Profile, angular_segments: usize) -> Result<TriangleMesh, GeometryError> {
    if angular_segments < 3 {
        return Err(GeometryError::InvalidArguments("angular_segments must be at least 3".into()));
    }
    let p = &profile.points;
    if p.len() < 3 || p[0][0] != 0.0 || p[p.len() - 1][0] != 0.0 {
        return Err(GeometryError::InvalidArguments("profile must start and end on the axis".into()));
    }
    if p[1..p.len() - 1].iter().any(|q| q[0] <= 0.0) {
        return Err(GeometryError::InvalidArguments("only the profile ends may touch the axis".into()));
    }
    let n = angular_segments;
    let mut vertices = Vec::with_capacity((p.len() - 2) * n + 2);
    // ring[i][s] is the vertex index of profile point i at angle s.
    let mut ring: Vec<Vec<u32>> = Vec::with_capacity(p.len());
    for q in p {
        if q[0] == 0.0 {
            ring.push(vec![vertices.len() as u32; n]);
            vertices.push([0.0, 0.0, q[1]]);
        } else {
            let start = vertices.len() as u32;
            ring.push((0..n as u32).map(|s| start + s).collect());
            for s in 0..n {
                let theta = std::f64::consts::TAU * s as f64 / n as f64;
                vertices.push([q[0] * theta.cos(), q[0] * theta.sin(), q[1]]);
            }
        }
    }
    // Outward normals need the profile to run counter-clockwise in (r, z).
    let ccw = profile.signed_area2() > 0.0;
    let mut triangles = Vec::new();
    let mut push = |a: u32, b: u32, c: u32| {
        if a != b && b != c && a != c {
            triangles.push(if ccw { [a, c, b] } else { [a, b, c] });
        }
    };
    for i in 0..p.len() - 1 {
        for s in 0..n {
            let t = (s + 1) % n;
            let (a, b, c, d) = (ring[i][s], ring[i + 1][s], ring[i + 1][t], ring[i][t]);
            push(a, b, c);
            push(a, c, d);
        }
    }
    Ok(TriangleMesh { vertices, triangles })
}

impl TriangleMesh {
    /// Enclosed volume by the divergence theorem.
    pub fn volume(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                let [a, b, c] = t.map(|i| self.vertices[i as usize]);
                a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
                    + a[2] * (b[0] * c[1] - b[1] * c[0])
            })
            .sum::<f64>()
            / 6.0
    }

    fn directed_edges(&self) -> std::collections::BTreeMap<(u32, u32), usize> {
        let mut edges = std::collections::BTreeMap::new();
        for t in &self.triangles {
            for k in 0..3 {
                *edges.entry((t[k], t[(k + 1) % 3])).or_insert(0) += 1;
            }
        }
        edges
    }

    /// Every directed edge appears once and its reverse once.
    pub fn is_watertight(&self) -> bool {
        let edges = self.directed_edges();
        edges.iter().all(|(&(a, b), &count)| count == 1 && edges.get(&(b, a)) == Some(&1))
    }

    pub fn euler_characteristic(&self) -> i64 {
        let edges = self.directed_edges().keys().filter(|(a, b)| a < b).count();
        self.vertices.len() as i64 - edges as i64 + self.triangles.len() as i64
    }

    /// `(min, max)` corners.
    pub fn bounding_box(&self) -> ([f64; 3], [f64; 3]) {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for v in &self.vertices {
            for c in 0..3 {
                lo[c] = lo[c].min(v[c]);
                hi[c] = hi[c].max(v[c]);
            }
        }
        (lo, hi)
    }

    pub fn to_stl(&self, name: &str) -> String {
        let mut out = format!("solid {name}\n");
        for t in &self.triangles {
            let [a, b, c] = t.map(|i| self.vertices[i as usize]);
            let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
            let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
            let mut nrm = [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]];
            let len = (nrm[0] * nrm[0] + nrm[1] * nrm[1] + nrm[2] * nrm[2]).sqrt();
            if len > 0.0 {
                nrm = nrm.map(|x| x / len);
            }
            let _ = writeln!(out, "  facet normal {:e} {:e} {:e}", nrm[0], nrm[1], nrm[2]);
            out.push_str("    outer loop\n");
            for p in [a, b, c] {
                let _ = writeln!(out, "      vertex {:e} {:e} {:e}", p[0], p[1], p[2]);
            }
            out.push_str("    endloop\n  endfacet\n");
        }
        let _ = writeln!(out, "endsolid {name}");
        out
    }
}

fn svg_path(points: impl Iterator<Item = (f64, f64)>) -> String {
    let mut d = String::new();
    for (k, (x, y)) in points.enumerate() {
        let _ = write!(d, "{}{x:.4},{y:.4}", if k == 0 { "M" } else { " L" });
    }
    d
}

/// Front silhouette: outer and inner curves on both sides of the axis. The
/// viewBox is the tight bounding box in cm with z pointing up.
pub fn profile_svg(shape: &GlassShape) -> String {
    let w = shape.width();
    let h = shape.height();
    let flip = |n: &Node, side: f64| (side * n.r, h - n.z);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" viewBox="{:.6} 0 {:.6} {:.6}" width="{:.3}cm" height="{:.3}cm" overflow="visible">"#,
        -w / 2.0,
        w,
        h,
        w,
        h
    );
    let p = shape.params;
    let _ = writeln!(out, "  <title>glass d1={} d2={} d3={}</title>", p.d1, p.d2, p.d3);
    out.push_str("  <g fill=\"none\" stroke=\"#1f2d3d\" stroke-width=\"0.04\" stroke-linejoin=\"round\">\n");
    for (class, curve) in [("outer", &shape.outer), ("inner", &shape.inner)] {
        for (side, sign) in [("left", -1.0), ("right", 1.0)] {
            let _ = writeln!(
                out,
                r#"    <path class="{class} {side}" d="{}"/>"#,
                svg_path(curve.iter().map(|n| flip(n, sign)))
            );
        }
    }
    out.push_str("  </g>\n</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_template_is_valid() {
        let t = ProfileTemplate::canonical();
        assert_eq!(t.nodes.len(), NODE_COUNT);
        assert_eq!(t.base_height(), 0.6);
    }

    #[test]
    fn template_validation() {
        let mut t = ProfileTemplate::canonical();
        t.nodes.pop();
        assert!(matches!(t.validate(), Err(GeometryError::InvalidTemplate(_))));
        let mut t = ProfileTemplate::canonical();
        t.nodes[0].r = 0.5;
        assert!(t.validate().is_err());
        let mut t = ProfileTemplate::canonical();
        t.nodes[6].z = 0.7;
        assert!(t.validate().is_err());
    }

    #[test]
    fn spline_interpolates_and_is_clamped() {
        let nodes = [Node { r: 0.0, z: 0.0 }, Node { r: 1.0, z: 2.0 }, Node { r: 3.0, z: 2.5 }, Node { r: 4.0, z: 5.0 }];
        let (d0, d1) = (Node { r: 1.0, z: 0.0 }, Node { r: 0.0, z: 1.0 });
        let segs = clamped_spline(&nodes, d0, d1);
        for (i, s) in segs.iter().enumerate() {
            assert_eq!(s.at(0.0), nodes[i]);
            let end = s.at(1.0);
            assert!((end.r - nodes[i + 1].r).abs() < 1e-12 && (end.z - nodes[i + 1].z).abs() < 1e-12);
        }
        assert_eq!(segs[0].derivative(0.0), d0);
        // C2 at interior nodes.
        for w in segs.windows(2) {
            let second = |s: &Segment, t: f64| {
                let h = 1e-5;
                s.derivative(t + h).sub(s.derivative(t - h)).scale(0.5 / h)
            };
            let (a, b) = (second(&w[0], 1.0), second(&w[1], 0.0));
            assert!((a.r - b.r).abs() < 1e-4 && (a.z - b.z).abs() < 1e-4);
        }
    }

    #[test]
    fn radial_extrema_of_a_bump() {
        let s = Segment {
            p0: Node { r: 0.0, z: 0.0 },
            p1: Node { r: 0.0, z: 1.0 },
            m0: Node { r: 1.0, z: 1.0 },
            m1: Node { r: -1.0, z: 1.0 },
        };
        assert_eq!(s.radial_extrema(), vec![0.5]);
    }

    #[test]
    fn crossing_detection() {
        assert!(segments_intersect([0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]));
        assert!(!segments_intersect([0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]));
        assert_eq!(self_intersection(&[[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [1.0, -1.0]]), Some((0, 2)));
    }

    #[test]
    fn stl_has_one_facet_per_triangle() {
        let mesh = revolve_profile(&Profile::cylinder(1.0, 2.0), 8).unwrap();
        let stl = mesh.to_stl("c");
        assert_eq!(stl.matches("facet normal").count(), mesh.triangles.len());
        assert!(stl.starts_with("solid c\n") && stl.ends_with("endsolid c\n"));
    }
}
