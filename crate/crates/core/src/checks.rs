//! Self-consistency suites run by `knotfield verify`.
//!
//! Every suite is deterministic for a given seed: sample points come from a
//! seeded ChaCha stream and no timing enters the report.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::curve::{linking_number, projective_twist};
use crate::solidangle::{discontinuity_distance, omega_at, GridSpec, ScalarField};
use crate::spherical::{crossing_count, project};
use crate::{wrap_delta, EvalConfig, Evaluator, Link, OrientedCurve, Result, Vec3, FOUR_PI};

/// Tolerance of the cross-evaluator comparison.
pub const CROSS_TOLERANCE: f64 = 1e-3 * FOUR_PI;
/// Tolerance of the circulation check.
pub const CIRCULATION_TOLERANCE: f64 = 1e-6;
/// Smallest accepted decrease of the Laplacian residual when `h` halves.
pub const HARMONIC_RATIO: f64 = 3.5;
/// Distance of `Tw + Wr` from the nearest integer.
pub const SELF_LINK_TOLERANCE: f64 = 2e-2;

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// The measured quantity compared against `tolerance`.
    pub value: f64,
    pub tolerance: f64,
    /// Number of samples that entered the measurement.
    pub samples: usize,
    /// Samples excluded as non-generic, with the reason.
    pub skipped: usize,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub curve_hash: String,
    pub components: usize,
    pub points: usize,
    pub seed: u64,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub points: usize,
    pub seed: u64,
    pub config: EvalConfig,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            points: 1000,
            seed: 0,
            config: EvalConfig::default(),
        }
    }
}

/// Axis-aligned bounding box of all vertices.
pub fn bounding_box(link: &Link) -> (Vec3, Vec3) {
    let mut lo = Vec3::repeat(f64::INFINITY);
    let mut hi = Vec3::repeat(f64::NEG_INFINITY);
    for p in link.components().iter().flat_map(|c| c.points()) {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    (lo, hi)
}

/// Uniform points in the bounding box grown by `grow` times its diagonal on
/// every side.
pub fn sample_box(link: &Link, count: usize, seed: u64, grow: f64) -> Vec<Vec3> {
    let (lo, hi) = bounding_box(link);
    let pad = Vec3::repeat(grow * (hi - lo).norm());
    let (lo, hi) = (lo - pad, hi + pad);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            Vec3::new(
                rng.gen_range(lo.x..hi.x),
                rng.gen_range(lo.y..hi.y),
                rng.gen_range(lo.z..hi.z),
            )
        })
        .collect()
}

/// Largest segment length in the link.
pub fn max_spacing(link: &Link) -> f64 {
    link.components()
        .iter()
        .flat_map(|c| c.seg_lengths().iter().copied())
        .fold(0.0, f64::max)
}

/// Cross-evaluator agreement: the largest pairwise disagreement (mod 4π)
/// among all evaluators at seeded random points.
///
/// Points closer to the curve than `4·Δs` are not in general position for a
/// polyline and are skipped, as are points where the tangent-developable
/// evaluators report that the point lies on their surface (the other
/// evaluators still compare there).
/// Half-width of the band about the quadrature's surface of discontinuity,
/// in units of the largest segment length, inside which it is not compared.
pub const QUADRATURE_BAND: f64 = 4.0;

pub fn cross_evaluator(link: &Link, opts: &VerifyOptions) -> CheckResult {
    let spacing = max_spacing(link);
    let near = 4.0 * spacing;
    let quad_cfg = EvalConfig {
        evaluator: Evaluator::InfinityQuadrature,
        ..opts.config.clone()
    };
    let mut worst: f64 = 0.0;
    let mut worst_pair = String::new();
    let mut samples = 0;
    let mut skipped = 0;
    for x in sample_box(link, opts.points, opts.seed, 0.1) {
        if link.distance(&x) < near {
            skipped += 1;
            continue;
        }
        // The midpoint rule is only accurate a few segment lengths away from
        // its own surface of discontinuity.
        let quad_ok = discontinuity_distance(link, &x, &quad_cfg).is_ok_and(|d| d >= QUADRATURE_BAND * spacing);
        let values: Vec<(Evaluator, f64)> = Evaluator::ALL
            .iter()
            .filter(|&&e| quad_ok || e != Evaluator::InfinityQuadrature)
            .filter_map(|&e| {
                let cfg = EvalConfig {
                    evaluator: e,
                    ..opts.config.clone()
                };
                omega_at(link, &x, &cfg).ok().map(|v| (e, v))
            })
            .collect();
        if values.len() < 2 {
            skipped += 1;
            continue;
        }
        samples += 1;
        for (i, (ea, a)) in values.iter().enumerate() {
            for (eb, b) in &values[i + 1..] {
                let d = wrap_delta(a - b).abs();
                if d > worst {
                    worst = d;
                    worst_pair = format!("{ea} vs {eb} at ({:.4}, {:.4}, {:.4})", x.x, x.y, x.z);
                }
            }
        }
    }
    CheckResult {
        name: "cross_evaluator".into(),
        passed: samples > 0 && worst <= CROSS_TOLERANCE,
        value: worst,
        tolerance: CROSS_TOLERANCE,
        samples,
        skipped,
        detail: if worst_pair.is_empty() {
            "no comparable points".into()
        } else {
            format!("largest disagreement {worst_pair}")
        },
    }
}

/// Radius of a loop around one strand of component `c` that stays clear of
/// every other part of the link.
fn loop_radius(link: &Link, c: usize) -> f64 {
    let curve = &link.components()[c];
    let mut r = curve.min_radius_of_curvature().min(curve.min_self_distance());
    for (j, other) in link.components().iter().enumerate() {
        if j != c {
            r = r.min(crate::curve::curve_distance(curve, other));
        }
    }
    if !r.is_finite() {
        r = curve.total_length() / 8.0;
    }
    0.3 * r
}

/// A circle of `count` points with centre `centre` in the plane spanned by
/// the orthonormal pair `u`, `v`.
pub fn circle_loop(centre: Vec3, u: Vec3, v: Vec3, radius: f64, count: usize) -> Result<OrientedCurve> {
    OrientedCurve::new(
        (0..count)
            .map(|i| {
                let t = std::f64::consts::TAU * i as f64 / count as f64;
                centre + (u * t.cos() + v * t.sin()) * radius
            })
            .collect(),
    )
}

/// A loop around the middle of segment `segment` of component `c`, in the
/// segment's normal plane, and a loop of half the radius displaced sideways
/// by twice the radius that does not link the strand.
pub fn strand_loops(link: &Link, c: usize, segment: usize, count: usize) -> Result<(OrientedCurve, OrientedCurve)> {
    let curve = &link.components()[c];
    let n = curve.len();
    let p = curve.points();
    let mid = (p[segment] + p[(segment + 1) % n]) * 0.5;
    let t = curve.segment_tangent(segment);
    let helper = if t.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let u = t.cross(&helper).normalize();
    let v = t.cross(&u);
    let r = loop_radius(link, c);
    let linked = circle_loop(mid, u, v, r, count)?;
    let unlinked = circle_loop(mid + u * (2.0 * r), u, v, 0.5 * r, count)?;
    Ok((linked, unlinked))
}

/// Continuous lift of ω along the closed loop: the sum of the smallest
/// representatives of successive differences.
pub fn circulation(link: &Link, path: &OrientedCurve, cfg: &EvalConfig) -> Result<f64> {
    let values = path
        .points()
        .iter()
        .map(|x| omega_at(link, x, cfg))
        .collect::<Result<Vec<_>>>()?;
    let n = values.len();
    Ok((0..n).map(|i| wrap_delta(values[(i + 1) % n] - values[i])).sum())
}

/// Circulation of ω around loops linking each component once and around
/// loops that link nothing, against `4π` times the Gauss linking number.
pub fn circulation_check(link: &Link, opts: &VerifyOptions) -> CheckResult {
    let cfg = EvalConfig {
        evaluator: Evaluator::InfinityTriangle,
        ..opts.config.clone()
    };
    let mut worst: f64 = 0.0;
    let mut samples = 0;
    let mut detail = Vec::new();
    let mut failure = None;
    for (c, curve) in link.components().iter().enumerate() {
        let segment = curve.len() / 3;
        let loops = match strand_loops(link, c, segment, 1000) {
            Ok(l) => l,
            Err(e) => {
                failure = Some(format!("component {c}: {e}"));
                break;
            }
        };
        for (label, path) in [("linked", loops.0), ("unlinked", loops.1)] {
            let expected: Result<i64> = link
                .components()
                .iter()
                .map(|k| linking_number(&path, k).map(|l| l.value))
                .sum();
            let measured = circulation(link, &path, &cfg);
            match (expected, measured) {
                (Ok(l), Ok(m)) => {
                    let err = (m - FOUR_PI * l as f64).abs();
                    worst = worst.max(err);
                    samples += 1;
                    detail.push(format!("component {c} {label}: lk {l}, change {m:.9}"));
                }
                (Err(e), _) | (_, Err(e)) => {
                    failure = Some(format!("component {c} {label}: {e}"));
                }
            }
        }
    }
    if let Some(f) = &failure {
        detail.push(f.clone());
    }
    CheckResult {
        name: "circulation".into(),
        passed: failure.is_none() && worst <= CIRCULATION_TOLERANCE,
        value: worst,
        tolerance: CIRCULATION_TOLERANCE,
        samples,
        skipped: 0,
        detail: detail.join("; "),
    }
}

/// Seven-point Laplacian of ω at `x` with spacing `h`, after unwrapping the
/// six neighbours against the centre value.
pub fn laplacian_at(link: &Link, x: &Vec3, h: f64, cfg: &EvalConfig) -> Result<f64> {
    let centre = omega_at(link, x, cfg)?;
    let mut sum = 0.0;
    for axis in 0..3 {
        for sign in [-1.0, 1.0] {
            let mut y = *x;
            y[axis] += sign * h;
            sum += wrap_delta(omega_at(link, &y, cfg)? - centre);
        }
    }
    Ok(sum / (h * h))
}

fn rms(values: &[f64]) -> f64 {
    (values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64).sqrt()
}

/// Harmonicity at sampled points: the RMS 7-point Laplacian at spacing `h`
/// and `h/2`. The discrete residual of a harmonic function is `O(h²)`, so
/// halving `h` should divide it by about four.
pub fn harmonicity_check(link: &Link, opts: &VerifyOptions) -> CheckResult {
    let cfg = EvalConfig {
        evaluator: Evaluator::InfinityTriangle,
        ..opts.config.clone()
    };
    let (lo, hi) = bounding_box(link);
    let h = 0.02 * (hi - lo).norm();
    let count = opts.points.clamp(1, 200);
    let mut coarse = Vec::new();
    let mut fine = Vec::new();
    let mut skipped = 0;
    for x in sample_box(link, count, opts.seed ^ 0x4a52, 0.05) {
        if link.distance(&x) < 6.0 * h {
            skipped += 1;
            continue;
        }
        match (laplacian_at(link, &x, h, &cfg), laplacian_at(link, &x, 0.5 * h, &cfg)) {
            (Ok(a), Ok(b)) => {
                coarse.push(a);
                fine.push(b);
            }
            _ => skipped += 1,
        }
    }
    let ratio = if coarse.is_empty() { 0.0 } else { rms(&coarse) / rms(&fine) };
    CheckResult {
        name: "harmonicity".into(),
        passed: ratio >= HARMONIC_RATIO,
        value: ratio,
        tolerance: HARMONIC_RATIO,
        samples: coarse.len(),
        skipped,
        detail: if coarse.is_empty() {
            "no sample points clear of the curve".into()
        } else {
            format!("rms residual {:.3e} at h = {h:.4}, {:.3e} at h/2", rms(&coarse), rms(&fine))
        },
    }
}

/// Outcome of one self-linking measurement.
#[derive(Clone, Copy, Debug)]
pub struct SelfLinkSample {
    pub value: f64,
    pub crossings: usize,
}

impl SelfLinkSample {
    pub fn integer_error(&self) -> f64 {
        (self.value - self.value.round()).abs()
    }

    pub fn parity_matches(&self) -> bool {
        (self.value.round() as i64).rem_euclid(2) == (self.crossings % 2) as i64
    }
}

/// `Tw(K, x) + Wr(K)` and the crossing count of the projection from `x`.
pub fn self_link_sample(curve: &OrientedCurve, x: &Vec3) -> Result<SelfLinkSample> {
    let value = projective_twist(curve, x)? + curve.writhe();
    let crossings = crossing_count(&project(curve, x)?)?;
    Ok(SelfLinkSample { value, crossings })
}

/// `Tw + Wr` is an integer with the parity of the crossing number, for every
/// component and generic viewpoint. Cusped or degenerate viewpoints are
/// skipped.
pub fn self_link_check(link: &Link, opts: &VerifyOptions) -> CheckResult {
    let count = opts.points.clamp(1, 100);
    let mut worst: f64 = 0.0;
    let mut samples = 0;
    let mut skipped = 0;
    let mut parity_failures = 0;
    for (c, curve) in link.components().iter().enumerate() {
        let one: Link = curve.clone().into();
        for x in sample_box(&one, count, opts.seed ^ (0x5e1f + c as u64), 0.5) {
            match self_link_sample(curve, &x) {
                Ok(s) => {
                    samples += 1;
                    worst = worst.max(s.integer_error());
                    if !s.parity_matches() {
                        parity_failures += 1;
                    }
                }
                Err(_) => skipped += 1,
            }
        }
    }
    CheckResult {
        name: "self_link".into(),
        passed: samples > 0 && worst <= SELF_LINK_TOLERANCE && parity_failures == 0,
        value: worst,
        tolerance: SELF_LINK_TOLERANCE,
        samples,
        skipped,
        detail: format!("{parity_failures} parity mismatches with the crossing count"),
    }
}

/// Runs all suites.
pub fn verify(link: &Link, opts: &VerifyOptions) -> VerifyReport {
    let checks = vec![
        cross_evaluator(link, opts),
        circulation_check(link, opts),
        harmonicity_check(link, opts),
        self_link_check(link, opts),
    ];
    VerifyReport {
        curve_hash: link.content_hash(),
        components: link.len(),
        points: opts.points,
        seed: opts.seed,
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}

/// 7-point Laplacian of a grid field at interior node `(i, j, k)`, with
/// neighbours unwrapped against the centre. `None` if any value is a
/// sentinel.
pub fn grid_laplacian(field: &ScalarField, i: usize, j: usize, k: usize) -> Option<f64> {
    let g: &GridSpec = &field.grid;
    let centre = field.values[g.index(i, j, k)];
    if field.is_sentinel(g.index(i, j, k)) {
        return None;
    }
    let neighbours = [
        (i - 1, j, k),
        (i + 1, j, k),
        (i, j - 1, k),
        (i, j + 1, k),
        (i, j, k - 1),
        (i, j, k + 1),
    ];
    let mut sum = 0.0;
    for (a, b, c) in neighbours {
        let index = g.index(a, b, c);
        if field.is_sentinel(index) {
            return None;
        }
        sum += wrap_delta(field.values[index] - centre);
    }
    Some(sum / (g.spacing * g.spacing))
}
