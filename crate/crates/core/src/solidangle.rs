//! Solid-angle evaluators at points and on grids.
//!
//! The default evaluator drags each component to infinity along a Dirac
//! string direction `n∞` and sums signed spherical triangles with apex `n∞`.
//! The representative it returns jumps by 4π across the surface swept by
//! that homotopy, so points close to the surface are re-evaluated with
//! `-n∞` and, failing that, with a seeded random axis.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::point_segment;
use crate::spherical::{check_off_curve, omega_gauss_bonnet_component, triangle_excess};
use crate::{wrap_4pi, wrap_delta, Error, Link, OrientedCurve, Result, Vec3, TWO_PI};

/// Value stored at grid nodes where evaluation failed. It lies outside the
/// canonical range `[0, 4π)`.
pub const SENTINEL: f64 = -1.0;

/// Smallest `1 + n·axis` accepted when every axis choice is below the
/// switching threshold.
const AXIS_FLOOR: f64 = 1e-9;

/// Tolerance on `1 ± n·T` for the tangent-developable evaluator and on
/// `1 + n0·n1` for the homotopy formula.
const SURFACE_TOLERANCE: f64 = 1e-9;

/// Choice of solid-angle formula.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Evaluator {
    /// Exact spherical-triangle sum with apex at the Dirac-string axis.
    InfinityTriangle,
    /// Midpoint-rule quadrature of the same integral, one node per
    /// projected arc.
    InfinityQuadrature,
    /// Forward tangent-developable formula.
    TangentDevPlus,
    /// Backward tangent-developable formula.
    TangentDevMinus,
    /// Crossing count and turning angles of the projected polygon.
    GaussBonnet,
}

impl Evaluator {
    pub const ALL: [Evaluator; 5] = [
        Evaluator::InfinityTriangle,
        Evaluator::InfinityQuadrature,
        Evaluator::TangentDevPlus,
        Evaluator::TangentDevMinus,
        Evaluator::GaussBonnet,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Evaluator::InfinityTriangle => "infinity_triangle",
            Evaluator::InfinityQuadrature => "infinity_quadrature",
            Evaluator::TangentDevPlus => "tangent_dev_plus",
            Evaluator::TangentDevMinus => "tangent_dev_minus",
            Evaluator::GaussBonnet => "gauss_bonnet",
        }
    }
}

impl fmt::Display for Evaluator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Evaluator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Evaluator::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Evaluator::ALL.iter().map(|e| e.name()).collect();
                Error::Config(format!("unknown evaluator {s:?}; expected one of {}", names.join(", ")))
            })
    }
}

/// Evaluation policy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    /// Dirac-string direction; normalized by [`EvalConfig::validated`].
    pub n_inf: Vec3,
    /// Switch axis when `min (1 + n·n∞)` over the curve drops below this.
    pub switch_threshold: f64,
    /// Seed of the fallback axis.
    pub fallback_seed: u64,
    pub evaluator: Evaluator,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            n_inf: Vec3::z(),
            switch_threshold: 0.05,
            fallback_seed: 0,
            evaluator: Evaluator::InfinityTriangle,
        }
    }
}

impl EvalConfig {
    pub fn with_evaluator(evaluator: Evaluator) -> Self {
        EvalConfig {
            evaluator,
            ..Default::default()
        }
    }

    /// Checks the configuration and normalizes `n_inf`.
    pub fn validated(&self) -> Result<EvalConfig> {
        let norm = self.n_inf.norm();
        if !norm.is_finite() || norm < 1e-12 {
            return Err(Error::Config("n_inf must be a nonzero finite vector".into()));
        }
        if !(self.switch_threshold > 0.0 && self.switch_threshold < 2.0) {
            return Err(Error::Config(format!(
                "switch threshold {} must lie in (0, 2)",
                self.switch_threshold
            )));
        }
        Ok(EvalConfig {
            n_inf: self.n_inf / norm,
            ..self.clone()
        })
    }

    /// The deterministic third axis used when `±n∞` both fail.
    pub fn fallback_axis(&self) -> Vec3 {
        fallback_axis(self.fallback_seed)
    }
}

/// Pseudorandom unit vector determined by `seed`.
pub fn fallback_axis(seed: u64) -> Vec3 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let v = Vec3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let n2 = v.norm_squared();
        if n2 > 1e-4 && n2 <= 1.0 {
            return v / n2.sqrt();
        }
    }
}

/// A regular grid with isotropic spacing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub origin: Vec3,
    pub spacing: f64,
    pub dims: [usize; 3],
}

impl GridSpec {
    pub fn new(origin: Vec3, spacing: f64, dims: [usize; 3]) -> Result<Self> {
        let grid = GridSpec {
            origin,
            spacing,
            dims,
        };
        grid.validate()?;
        Ok(grid)
    }

    /// A cube of `n³` nodes centred at `centre` with the given half-width.
    pub fn cube(centre: Vec3, half_width: f64, n: usize) -> Result<Self> {
        let spacing = 2.0 * half_width / (n.max(2) - 1) as f64;
        GridSpec::new(centre - Vec3::repeat(half_width), spacing, [n, n, n])
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.iter().any(|&d| d < 2) {
            return Err(Error::Grid(format!("dims {:?} must be at least 2 per axis", self.dims)));
        }
        if !(self.spacing > 0.0 && self.spacing.is_finite()) {
            return Err(Error::Grid(format!("spacing {} must be positive", self.spacing)));
        }
        if !self.origin.iter().all(|c| c.is_finite()) {
            return Err(Error::Grid("origin must be finite".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Linear index of node `(i, j, k)`; `k` varies fastest.
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.dims[1] + j) * self.dims[2] + k
    }

    pub fn ijk(&self, index: usize) -> [usize; 3] {
        let k = index % self.dims[2];
        let rest = index / self.dims[2];
        [rest / self.dims[1], rest % self.dims[1], k]
    }

    pub fn node(&self, i: usize, j: usize, k: usize) -> Vec3 {
        self.origin + Vec3::new(i as f64, j as f64, k as f64) * self.spacing
    }

    pub fn point(&self, index: usize) -> Vec3 {
        let [i, j, k] = self.ijk(index);
        self.node(i, j, k)
    }
}

/// Provenance carried by every field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldMeta {
    pub quantity: String,
    pub curve_hash: String,
    pub components: usize,
    pub evaluator: Option<Evaluator>,
    pub config: Option<EvalConfig>,
    pub fallback_axis: Option<Vec3>,
}

impl FieldMeta {
    pub fn new(quantity: &str, link: &Link) -> Self {
        FieldMeta {
            quantity: quantity.to_string(),
            curve_hash: link.content_hash(),
            components: link.len(),
            evaluator: None,
            config: None,
            fallback_axis: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IssueKind {
    /// The node lies on the curve.
    OnCurve,
    /// The evaluator could not produce a value (degenerate configuration).
    Degenerate,
}

/// A grid node whose value was replaced by [`SENTINEL`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeIssue {
    pub index: usize,
    pub kind: IssueKind,
    pub message: String,
}

/// Scalar values on a grid, `k` fastest.
#[derive(Clone, Debug)]
pub struct ScalarField {
    pub grid: GridSpec,
    pub values: Vec<f64>,
    pub meta: FieldMeta,
    pub issues: Vec<NodeIssue>,
}

impl ScalarField {
    pub fn at(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[self.grid.index(i, j, k)]
    }

    pub fn is_sentinel(&self, index: usize) -> bool {
        self.values[index] == SENTINEL
    }
}

/// Sum of `E(axis, n_i, n_{i+1})` over a closed polygon whose vertices are
/// produced on demand, with `n_i` the direction from `x` to vertex `i`.
///
/// The result is not reduced; it is congruent to the solid angle mod 4π.
pub fn triangle_sum(count: usize, vertex: impl Fn(usize) -> Vec3, x: &Vec3, axis: &Vec3) -> f64 {
    let dir = |i: usize| (vertex(i) - x).normalize();
    let first = dir(0);
    let mut prev = first;
    let mut total = 0.0;
    for i in 1..count {
        let next = dir(i);
        total += triangle_excess(axis, &prev, &next);
        prev = next;
    }
    total + triangle_excess(axis, &prev, &first)
}

/// Picks the axis for one component: `n∞`, then `-n∞`, then the fallback.
/// `dirs` are the unit directions at which the integrand is sampled.
fn choose_axis(dirs: &[Vec3], cfg: &EvalConfig, component: usize) -> Result<Vec3> {
    let worst = |axis: &Vec3| {
        dirs.iter()
            .enumerate()
            .map(|(i, n)| (1.0 + n.dot(axis), i))
            .fold((f64::INFINITY, 0), |a, b| if b.0 < a.0 { b } else { a })
    };
    let candidates = [cfg.n_inf, -cfg.n_inf, cfg.fallback_axis()];
    let mut best: Option<(f64, usize, Vec3)> = None;
    for axis in candidates {
        let (margin, vertex) = worst(&axis);
        if margin >= cfg.switch_threshold {
            return Ok(axis);
        }
        if best.is_none_or(|b| margin > b.0) {
            best = Some((margin, vertex, axis));
        }
    }
    let (margin, vertex, axis) = best.expect("three candidates");
    if margin > AXIS_FLOOR {
        Ok(axis)
    } else {
        Err(Error::AxisExhausted { component, vertex })
    }
}

fn directions(curve: &OrientedCurve, x: &Vec3) -> Vec<Vec3> {
    curve.points().iter().map(|p| (p - x).normalize()).collect()
}

fn component_infinity(curve: &OrientedCurve, x: &Vec3, cfg: &EvalConfig, component: usize) -> Result<f64> {
    check_off_curve(curve, x, component)?;
    let dirs = directions(curve, x);
    let axis = choose_axis(&dirs, cfg, component)?;
    let n = dirs.len();
    let total: f64 = (0..n)
        .map(|i| triangle_excess(&axis, &dirs[i], &dirs[(i + 1) % n]))
        .sum();
    Ok(wrap_4pi(total))
}

/// Quadrature nodes of one component seen from `x`: the spherical midpoint
/// of each projected arc and the arc step (unit tangent times arc length).
fn quadrature_nodes(curve: &OrientedCurve, x: &Vec3, component: usize) -> Result<(Vec<Vec3>, Vec<Vec3>)> {
    check_off_curve(curve, x, component)?;
    let dirs = directions(curve, x);
    let n = dirs.len();
    let mut mids = Vec::with_capacity(n);
    let mut steps = Vec::with_capacity(n);
    for i in 0..n {
        let (a, b) = (dirs[i], dirs[(i + 1) % n]);
        let sum = a + b;
        let len = sum.norm();
        if len < 1e-12 {
            return Err(Error::DiscontinuitySurface(format!(
                "component {component} segment {i} passes through the point"
            )));
        }
        let chord = b - a;
        let c = chord.norm();
        mids.push(sum / len);
        steps.push(chord / c * (2.0 * (0.5 * c).min(1.0).asin()));
    }
    Ok((mids, steps))
}

fn component_quadrature(curve: &OrientedCurve, x: &Vec3, cfg: &EvalConfig, component: usize) -> Result<f64> {
    let (mids, steps) = quadrature_nodes(curve, x, component)?;
    let axis = choose_axis(&mids, cfg, component)?;
    let total: f64 = mids
        .iter()
        .zip(&steps)
        .map(|(m, dn)| axis.cross(m).dot(dn) / (1.0 + axis.dot(m)))
        .sum();
    Ok(wrap_4pi(total))
}

/// Dirac-string axis the configured evaluator uses for one component at `x`.
fn component_axis(curve: &OrientedCurve, x: &Vec3, cfg: &EvalConfig, component: usize) -> Result<Vec3> {
    match cfg.evaluator {
        Evaluator::InfinityTriangle => {
            check_off_curve(curve, x, component)?;
            choose_axis(&directions(curve, x), cfg, component)
        }
        Evaluator::InfinityQuadrature => choose_axis(&quadrature_nodes(curve, x, component)?.0, cfg, component),
        other => Err(Error::Config(format!(
            "evaluator {other} has no Dirac-string axis"
        ))),
    }
}

/// Distance from `x` to the half-strip swept by segment `a→b` moving along
/// `axis` (unit) to infinity.
fn half_strip_distance(x: &Vec3, a: &Vec3, b: &Vec3, axis: &Vec3) -> f64 {
    // Points of the strip above y are reached perpendicular to the axis when
    // x lies above y, otherwise the nearest strip point is y itself.
    let flat = |v: &Vec3| v - axis * axis.dot(v);
    let (ha, hb) = (axis.dot(&(x - a)), axis.dot(&(x - b)));
    let split = |t: f64| a + (b - a) * t;
    let above = |p: &Vec3, q: &Vec3| point_segment(&flat(&(x - p)), &Vec3::zeros(), &flat(&(q - p))).0;
    let below = |p: &Vec3, q: &Vec3| point_segment(x, p, q).0;
    if ha >= 0.0 && hb >= 0.0 {
        above(a, b)
    } else if ha < 0.0 && hb < 0.0 {
        below(a, b)
    } else {
        let m = split(ha / (ha - hb));
        if ha >= 0.0 {
            above(a, &m).min(below(&m, b))
        } else {
            below(a, &m).min(above(&m, b))
        }
    }
}

/// Distance from `x` to the surface of discontinuity of the Dirac-string
/// evaluators (`infinity_triangle`, `infinity_quadrature`): the union over
/// components of the component swept to infinity along the axis chosen for
/// it at `x`.
///
/// The quadrature evaluator loses accuracy within a few segment lengths of
/// this surface; the triangle sum is exact up to the surface itself.
pub fn discontinuity_distance(link: &Link, x: &Vec3, cfg: &EvalConfig) -> Result<f64> {
    let cfg = cfg.validated()?;
    let mut best = f64::INFINITY;
    for (c, curve) in link.components().iter().enumerate() {
        let axis = component_axis(curve, x, &cfg, c)?;
        let p = curve.points();
        let n = p.len();
        for i in 0..n {
            best = best.min(half_strip_distance(x, &p[i], &p[(i + 1) % n], &axis));
        }
    }
    Ok(best)
}

/// Biot–Savart integral `∮ dl × (x − y) / |x − y|³` over the link, exact for
/// straight segments. It equals the gradient of ω.
pub fn biot_savart(link: &Link, x: &Vec3) -> Result<Vec3> {
    let mut total = Vec3::zeros();
    for (c, curve) in link.components().iter().enumerate() {
        check_off_curve(curve, x, c)?;
        let p = curve.points();
        let n = p.len();
        for i in 0..n {
            let (a, b) = (p[i], p[(i + 1) % n]);
            let d = b - a;
            let (ra, rb) = (x - a, x - b);
            let perp = d.cross(&ra);
            let p2 = perp.norm_squared();
            // On the segment's line but off the segment: no contribution.
            if p2 <= 1e-30 * d.norm_squared() * ra.norm_squared() {
                continue;
            }
            total += perp * (d.dot(&(ra / ra.norm() - rb / rb.norm())) / p2);
        }
    }
    Ok(total)
}

/// Largest value of `v·T` for `T` on the minor great arc from `a` to `b`.
fn arc_max_dot(a: &Vec3, b: &Vec3, v: &Vec3) -> f64 {
    let ends = v.dot(a).max(v.dot(b));
    let normal = a.cross(b);
    let sin = normal.norm();
    if sin < 1e-15 {
        return ends;
    }
    let m = normal / sin;
    let inplane = v - m * v.dot(&m);
    let len = inplane.norm();
    if len < 1e-15 {
        return ends;
    }
    let q = inplane / len;
    // q lies inside the arc when it is between a and b in the arc's sense.
    if a.cross(&q).dot(&m) >= 0.0 && q.cross(b).dot(&m) >= 0.0 {
        len
    } else {
        ends
    }
}

fn component_tangent_dev(curve: &OrientedCurve, x: &Vec3, sign: f64, component: usize) -> Result<f64> {
    check_off_curve(curve, x, component)?;
    let p = curve.points();
    let n = p.len();
    let seg_t = curve.segment_tangents();
    let mut sum = 0.0;
    for i in 0..n {
        let view = (p[i] - x).normalize();
        let a = seg_t[(i + n - 1) % n];
        let b = seg_t[i];
        // Need 1 + sign·n·T > 0 along the corner arc.
        if 1.0 - arc_max_dot(&a, &b, &(-sign * view)) < SURFACE_TOLERANCE {
            return Err(Error::DiscontinuitySurface(format!(
                "component {component} vertex {i}: point is on the {} tangent developable; use the other sign or another evaluator",
                if sign > 0.0 { "forward" } else { "backward" }
            )));
        }
        sum += triangle_excess(&(sign * view), &a, &b);
    }
    let wr = curve.writhe();
    Ok(wrap_4pi(TWO_PI * (1.0 + sign * wr) - sign * sum))
}

fn component_omega(curve: &OrientedCurve, x: &Vec3, cfg: &EvalConfig, component: usize) -> Result<f64> {
    match cfg.evaluator {
        Evaluator::InfinityTriangle => component_infinity(curve, x, cfg, component),
        Evaluator::InfinityQuadrature => component_quadrature(curve, x, cfg, component),
        Evaluator::TangentDevPlus => component_tangent_dev(curve, x, 1.0, component),
        Evaluator::TangentDevMinus => component_tangent_dev(curve, x, -1.0, component),
        Evaluator::GaussBonnet => omega_gauss_bonnet_component(curve, x, component),
    }
}

/// Solid angle of `link` at `x` with the configured evaluator, in `[0, 4π)`.
///
/// Components are evaluated independently, each reduced mod 4π, then summed.
pub fn omega_at(link: &Link, x: &Vec3, cfg: &EvalConfig) -> Result<f64> {
    let cfg = cfg.validated()?;
    omega_validated(link, x, &cfg)
}

fn omega_validated(link: &Link, x: &Vec3, cfg: &EvalConfig) -> Result<f64> {
    let mut total = 0.0;
    for (c, curve) in link.components().iter().enumerate() {
        total += component_omega(curve, x, cfg, c)?;
    }
    Ok(wrap_4pi(total))
}

/// Exact triangle-sum evaluation with Dirac string along `-n∞`.
pub fn omega_point_infinity(link: &Link, x: &Vec3, cfg: &EvalConfig) -> Result<f64> {
    omega_at(link, x, &EvalConfig {
        evaluator: Evaluator::InfinityTriangle,
        ..cfg.clone()
    })
}

/// Midpoint-rule quadrature of the Dirac-string integral over the projected
/// curve, one node at the middle of each great arc.
///
/// Unlike the triangle sum it cannot resolve the integrand's peak when `x`
/// is within about one segment length of the surface of discontinuity.
pub fn omega_point_infinity_quadrature(link: &Link, x: &Vec3, cfg: &EvalConfig) -> Result<f64> {
    omega_at(link, x, &EvalConfig {
        evaluator: Evaluator::InfinityQuadrature,
        ..cfg.clone()
    })
}

/// Tangent-developable evaluation of one curve; `sign` selects the forward
/// (`+1`) or backward (`-1`) developable as the surface of discontinuity.
pub fn omega_point_tangent_dev(curve: &OrientedCurve, x: &Vec3, sign: i32) -> Result<f64> {
    if sign != 1 && sign != -1 {
        return Err(Error::Config(format!("tangent developable sign must be ±1, got {sign}")));
    }
    component_tangent_dev(curve, x, sign as f64, 0)
}

fn homotopy_check(k0: &OrientedCurve, k1: &OrientedCurve, x: &Vec3) -> Result<(Vec<Vec3>, Vec<Vec3>)> {
    if k0.len() != k1.len() {
        return Err(Error::Validation(format!(
            "homotopy needs equal vertex counts, got {} and {}",
            k0.len(),
            k1.len()
        )));
    }
    check_off_curve(k0, x, 0)?;
    check_off_curve(k1, x, 1)?;
    let n0 = directions(k0, x);
    let n1 = directions(k1, x);
    Ok((n0, n1))
}

fn antipodal(i: usize) -> Error {
    Error::DiscontinuitySurface(format!(
        "the homotopy line through vertex {i} passes through the point"
    ))
}

/// Change of solid angle under the straight-line homotopy from `k0` to `k1`
/// (vertices matched by index), in `(-2π, 2π]`.
///
/// Each segment sweeps a ruled quadrilateral whose image on the observation
/// sphere is bounded by four great arcs; its signed area is computed exactly.
pub fn homotopy_delta(k0: &OrientedCurve, k1: &OrientedCurve, x: &Vec3) -> Result<f64> {
    let (n0, n1) = homotopy_check(k0, k1, x)?;
    let n = n0.len();
    if let Some(i) = (0..n).find(|&i| 1.0 + n0[i].dot(&n1[i]) <= SURFACE_TOLERANCE) {
        return Err(antipodal(i));
    }
    let total: f64 = (0..n)
        .map(|i| {
            let j = (i + 1) % n;
            // Orderings keep coincident pairs inside the cross product, so an
            // identity homotopy contributes exactly zero.
            triangle_excess(&n1[j], &n0[i], &n1[i]) + triangle_excess(&n0[i], &n1[j], &n0[j])
        })
        .sum();
    Ok(wrap_delta(total))
}

/// [`homotopy_delta`] by four-point Gauss–Legendre quadrature of the
/// homotopy integrand on each segment.
pub fn homotopy_delta_quadrature(k0: &OrientedCurve, k1: &OrientedCurve, x: &Vec3) -> Result<f64> {
    const NODES: [f64; 4] = [-0.861_136_311_594_052_6, -0.339_981_043_584_856_3, 0.339_981_043_584_856_3, 0.861_136_311_594_052_6];
    const WEIGHTS: [f64; 4] = [0.347_854_845_137_453_9, 0.652_145_154_862_546_1, 0.652_145_154_862_546_1, 0.347_854_845_137_453_9];
    homotopy_check(k0, k1, x)?;
    let (p, q) = (k0.points(), k1.points());
    let n = p.len();
    let unit = |y: Vec3, dy: Vec3| {
        let r = y - x;
        let d = r.norm();
        let u = r / d;
        (u, (dy - u * u.dot(&dy)) / d)
    };
    let mut total = 0.0;
    for i in 0..n {
        let j = (i + 1) % n;
        let (d0, d1) = (p[j] - p[i], q[j] - q[i]);
        for (node, w) in NODES.iter().zip(WEIGHTS) {
            let s = 0.5 * (node + 1.0);
            let (a, da) = unit(p[i] + d0 * s, d0);
            let (b, db) = unit(q[i] + d1 * s, d1);
            let den = 1.0 + a.dot(&b);
            if den <= SURFACE_TOLERANCE {
                return Err(antipodal(i));
            }
            total += 0.5 * w * a.cross(&b).dot(&(da + db)) / den;
        }
    }
    Ok(wrap_delta(total))
}

/// Evaluates ω at every node of `grid` using the global rayon pool.
///
/// Nodes where evaluation fails hold [`SENTINEL`] and are listed in
/// `issues`. Each value depends only on its node, so results do not depend
/// on the number of workers.
pub fn omega_grid(link: &Link, grid: &GridSpec, cfg: &EvalConfig) -> Result<ScalarField> {
    grid.validate()?;
    let cfg = cfg.validated()?;
    if matches!(cfg.evaluator, Evaluator::TangentDevPlus | Evaluator::TangentDevMinus) {
        for c in link.components() {
            c.writhe();
        }
    }
    let results: Vec<std::result::Result<f64, NodeIssue>> = (0..grid.len())
        .into_par_iter()
        .map(|index| {
            omega_validated(link, &grid.point(index), &cfg).map_err(|e| NodeIssue {
                index,
                kind: if matches!(e, Error::OnCurve { .. }) {
                    IssueKind::OnCurve
                } else {
                    IssueKind::Degenerate
                },
                message: e.to_string(),
            })
        })
        .collect();
    let mut values = Vec::with_capacity(results.len());
    let mut issues = Vec::new();
    for r in results {
        match r {
            Ok(v) => values.push(v),
            Err(issue) => {
                values.push(SENTINEL);
                issues.push(issue);
            }
        }
    }
    let mut meta = FieldMeta::new("omega", link);
    meta.evaluator = Some(cfg.evaluator);
    meta.fallback_axis = Some(cfg.fallback_axis());
    meta.config = Some(cfg);
    Ok(ScalarField {
        grid: grid.clone(),
        values,
        meta,
        issues,
    })
}

/// [`omega_grid`] on a dedicated pool of `workers` threads.
pub fn omega_grid_with_workers(link: &Link, grid: &GridSpec, cfg: &EvalConfig, workers: usize) -> Result<ScalarField> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?;
    pool.install(|| omega_grid(link, grid, cfg))
}
