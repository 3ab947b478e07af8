//! Closed polyline curves, links and their classical integral invariants.

use std::sync::OnceLock;

use rayon::prelude::*;

use crate::spherical::triangle_excess;
use crate::{wrap_4pi, Error, Result, Vec3, TWO_PI};

/// Curvature below `FLAT_CURVATURE / mean_spacing` is treated as an inflection.
const FLAT_CURVATURE: f64 = 1e-9;
/// Tolerance on `1 - |n·T|` for the projective framing.
const CUSP_TOLERANCE: f64 = 1e-9;
/// Tolerance on `1 + n∞·T` for the Fuller integral.
const ANTIPODAL_TOLERANCE: f64 = 1e-9;
/// Largest accepted distance of the discrete linking integral from an integer.
const LINKING_RESIDUAL: f64 = 0.05;

/// A closed, oriented polyline with per-vertex Frenet frames.
///
/// The last point connects back to the first; the listed order is the
/// orientation. Frames and curvature are computed once at construction.
#[derive(Clone, Debug)]
pub struct OrientedCurve {
    points: Vec<Vec3>,
    tangents: Vec<Vec3>,
    normals: Vec<Vec3>,
    binormals: Vec<Vec3>,
    curvature: Vec<f64>,
    transported: Vec<bool>,
    seg_lengths: Vec<f64>,
    total_length: f64,
    writhe: OnceLock<f64>,
}

impl OrientedCurve {
    /// Builds a curve from its vertices and computes Frenet frames.
    pub fn new(points: Vec<Vec3>) -> Result<Self> {
        if points.len() < 3 {
            return Err(Error::Validation(format!(
                "a closed curve needs at least 3 points, got {}",
                points.len()
            )));
        }
        if let Some(i) = points.iter().position(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(Error::Validation(format!("point {i} is not finite")));
        }
        let scale = points.iter().map(|p| p.amax()).fold(1.0, f64::max);
        let n = points.len();
        let mut seg_lengths = Vec::with_capacity(n);
        for i in 0..n {
            let len = (points[(i + 1) % n] - points[i]).norm();
            if len <= 1e-14 * scale {
                return Err(Error::Validation(format!(
                    "zero-length segment between points {i} and {}",
                    (i + 1) % n
                )));
            }
            seg_lengths.push(len);
        }
        let total_length = seg_lengths.iter().sum();
        let mut curve = OrientedCurve {
            points,
            tangents: Vec::new(),
            normals: Vec::new(),
            binormals: Vec::new(),
            curvature: Vec::new(),
            transported: Vec::new(),
            seg_lengths,
            total_length,
            writhe: OnceLock::new(),
        };
        curve.compute_frames();
        Ok(curve)
    }

    fn compute_frames(&mut self) {
        let n = self.points.len();
        let p = &self.points;
        let mean_spacing = self.total_length / n as f64;
        let mut tangents = Vec::with_capacity(n);
        let mut normals = vec![Vec3::zeros(); n];
        let mut curvature = Vec::with_capacity(n);
        let mut flat = Vec::with_capacity(n);

        for i in 0..n {
            let prev = p[(i + n - 1) % n];
            let next = p[(i + 1) % n];
            let h_minus = self.seg_lengths[(i + n - 1) % n];
            let h_plus = self.seg_lengths[i];
            let t = (next - prev).normalize();
            let second = 2.0 * ((next - p[i]) / h_plus - (p[i] - prev) / h_minus) / (h_plus + h_minus);
            let perp = second - t * second.dot(&t);
            let kappa = perp.norm();
            tangents.push(t);
            curvature.push(kappa);
            if kappa < FLAT_CURVATURE / mean_spacing {
                flat.push(true);
            } else {
                flat.push(false);
                normals[i] = perp / kappa;
            }
        }

        // Parallel-transport N across flat vertices, starting after a curved one.
        if let Some(start) = flat.iter().position(|f| !f) {
            for step in 1..n {
                let i = (start + step) % n;
                if flat[i] {
                    let prev = normals[(i + n - 1) % n];
                    normals[i] = project_perpendicular(prev, tangents[i]);
                }
            }
        } else {
            normals[0] = any_perpendicular(tangents[0]);
            for i in 1..n {
                normals[i] = project_perpendicular(normals[i - 1], tangents[i]);
            }
        }

        self.binormals = tangents.iter().zip(&normals).map(|(t, nn)| t.cross(nn)).collect();
        self.tangents = tangents;
        self.normals = normals;
        self.curvature = curvature;
        self.transported = flat;
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn tangents(&self) -> &[Vec3] {
        &self.tangents
    }

    pub fn normals(&self) -> &[Vec3] {
        &self.normals
    }

    pub fn binormals(&self) -> &[Vec3] {
        &self.binormals
    }

    pub fn curvature(&self) -> &[f64] {
        &self.curvature
    }

    /// Vertices whose normal was parallel-transported because the discrete
    /// curvature vanished.
    pub fn transported(&self) -> &[bool] {
        &self.transported
    }

    pub fn seg_lengths(&self) -> &[f64] {
        &self.seg_lengths
    }

    pub fn total_length(&self) -> f64 {
        self.total_length
    }

    /// Arclength of vertex `i` measured from vertex 0.
    pub fn arclength(&self, i: usize) -> f64 {
        self.seg_lengths[..i].iter().sum()
    }

    /// Cumulative arclength at every vertex.
    pub fn arclengths(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.seg_lengths
            .iter()
            .map(|l| {
                let s = acc;
                acc += l;
                s
            })
            .collect()
    }

    /// Unit direction of segment `i` (from vertex `i` to vertex `i + 1`).
    pub fn segment_tangent(&self, i: usize) -> Vec3 {
        let n = self.len();
        (self.points[(i + 1) % n] - self.points[i]) / self.seg_lengths[i]
    }

    pub fn segment_tangents(&self) -> Vec<Vec3> {
        (0..self.len()).map(|i| self.segment_tangent(i)).collect()
    }

    /// Smallest radius of curvature over non-flat vertices.
    pub fn min_radius_of_curvature(&self) -> f64 {
        self.curvature
            .iter()
            .zip(&self.transported)
            .filter(|(_, flat)| !**flat)
            .map(|(k, _)| 1.0 / k)
            .fold(f64::INFINITY, f64::min)
    }

    /// The same curve traversed in the opposite direction.
    pub fn reversed(&self) -> OrientedCurve {
        let mut pts = self.points.clone();
        pts.reverse();
        OrientedCurve::new(pts).expect("reversal preserves validity")
    }

    /// Applies `f` to every vertex.
    pub fn mapped(&self, f: impl Fn(&Vec3) -> Vec3) -> Result<OrientedCurve> {
        OrientedCurve::new(self.points.iter().map(f).collect())
    }

    /// Minimum distance from `x` to the polyline, with the segment index and
    /// the parameter in `[0, 1]` of the nearest point.
    pub fn nearest(&self, x: &Vec3) -> (f64, usize, f64) {
        let n = self.len();
        let mut best = (f64::INFINITY, 0, 0.0);
        for i in 0..n {
            let (d, t) = point_segment(x, &self.points[i], &self.points[(i + 1) % n]);
            if d < best.0 {
                best = (d, i, t);
            }
        }
        best
    }

    /// Minimum distance between points of the curve whose arclength separation
    /// exceeds `π ρ_min`.
    pub fn min_self_distance(&self) -> f64 {
        let n = self.len();
        let rho = self.min_radius_of_curvature();
        let window = if rho.is_finite() {
            std::f64::consts::PI * rho
        } else {
            self.total_length / 4.0
        };
        if 2.0 * window >= self.total_length {
            return f64::INFINITY;
        }
        let s = self.arclengths();
        let mut best = f64::INFINITY;
        for i in 0..n {
            for j in (i + 1)..n {
                let gap = (s[j] - s[i]).abs();
                let gap = gap.min(self.total_length - gap);
                // Segment extents add at most one segment each to the separation.
                if gap - self.seg_lengths[i] - self.seg_lengths[j] < window {
                    continue;
                }
                let d = segment_segment(
                    &self.points[i],
                    &self.points[(i + 1) % n],
                    &self.points[j],
                    &self.points[(j + 1) % n],
                );
                best = best.min(d);
            }
        }
        best
    }

    /// Redistributes vertices uniformly in arclength with spacing close to
    /// `spacing`.
    pub fn resample(&self, spacing: f64) -> Result<OrientedCurve> {
        let total = self.total_length;
        if !(spacing > 0.0) || spacing >= total / 3.0 {
            return Err(Error::ResampleSpacing {
                spacing,
                total_length: total,
            });
        }
        let count = ((total / spacing).round() as usize).max(3);
        self.resample_count(count)
    }

    /// Redistributes `count` vertices uniformly in arclength.
    pub fn resample_count(&self, count: usize) -> Result<OrientedCurve> {
        if count < 3 {
            return Err(Error::Validation(format!("cannot resample to {count} points")));
        }
        let n = self.len();
        let step = self.total_length / count as f64;
        let mut out = Vec::with_capacity(count);
        let mut seg = 0;
        let mut seg_start = 0.0;
        for k in 0..count {
            let target = k as f64 * step;
            while seg + 1 < n && seg_start + self.seg_lengths[seg] <= target {
                seg_start += self.seg_lengths[seg];
                seg += 1;
            }
            let t = ((target - seg_start) / self.seg_lengths[seg]).clamp(0.0, 1.0);
            let a = self.points[seg];
            let b = self.points[(seg + 1) % n];
            out.push(a + (b - a) * t);
        }
        OrientedCurve::new(out)
    }

    /// Writhe of the closed polyline, computed once and cached.
    pub fn writhe(&self) -> f64 {
        *self.writhe.get_or_init(|| writhe(self))
    }
}

/// A link: an ordered list of pairwise disjoint oriented curves.
#[derive(Clone, Debug)]
pub struct Link {
    components: Vec<OrientedCurve>,
}

impl Link {
    pub fn new(components: Vec<OrientedCurve>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Validation("a link needs at least one component".into()));
        }
        for i in 0..components.len() {
            for j in (i + 1)..components.len() {
                let d = curve_distance(&components[i], &components[j]);
                if !(d > 0.0) {
                    return Err(Error::Validation(format!(
                        "components {i} and {j} intersect"
                    )));
                }
            }
        }
        Ok(Link { components })
    }

    pub fn components(&self) -> &[OrientedCurve] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Mean segment length over all components.
    pub fn mean_spacing(&self) -> f64 {
        let (len, count) = self
            .components
            .iter()
            .fold((0.0, 0usize), |(l, c), k| (l + k.total_length(), c + k.len()));
        len / count as f64
    }

    /// Minimum distance from `x` to any component.
    pub fn distance(&self, x: &Vec3) -> f64 {
        self.components
            .iter()
            .map(|c| c.nearest(x).0)
            .fold(f64::INFINITY, f64::min)
    }

    /// Hex SHA-256 of the vertex coordinates, component by component.
    pub fn content_hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut hasher = Sha256::new();
        for c in &self.components {
            hasher.update((c.len() as u64).to_le_bytes());
            for p in c.points() {
                for v in p.iter() {
                    hasher.update(v.to_le_bytes());
                }
            }
        }
        hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

impl From<OrientedCurve> for Link {
    fn from(curve: OrientedCurve) -> Self {
        Link {
            components: vec![curve],
        }
    }
}

/// Integer linking number together with the raw discrete Gauss integral.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinkingNumber {
    pub value: i64,
    pub integral: f64,
    pub residual: f64,
}

/// Signed area of the Gauss-map image of a pair of straight segments
/// `a0→a1` and `b0→b1`: a geodesic quadrilateral spanned by the unit
/// directions from points of the first segment to points of the second.
///
/// Dividing by 4π gives the exact Gauss linking integral of the pair.
pub fn segment_pair_solid_angle(a0: &Vec3, a1: &Vec3, b0: &Vec3, b1: &Vec3) -> f64 {
    let v00 = b0 - a0;
    let v10 = b0 - a1;
    let v11 = b1 - a1;
    let v01 = b1 - a0;
    let (n00, n10, n11, n01) = (v00.norm(), v10.norm(), v11.norm(), v01.norm());
    if n00 == 0.0 || n10 == 0.0 || n11 == 0.0 || n01 == 0.0 {
        return 0.0;
    }
    let e00 = v00 / n00;
    let e10 = v10 / n10;
    let e11 = v11 / n11;
    let e01 = v01 / n01;
    triangle_excess(&e00, &e10, &e11) + triangle_excess(&e00, &e11, &e01)
}

/// Writhe by the exact per-segment-pair Gauss integral.
pub fn writhe(curve: &OrientedCurve) -> f64 {
    let p = curve.points();
    let n = p.len();
    let rows: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let a0 = p[i];
            let a1 = p[(i + 1) % n];
            let mut acc = 0.0;
            for j in (i + 2)..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                acc += segment_pair_solid_angle(&a0, &a1, &p[j], &p[(j + 1) % n]);
            }
            acc
        })
        .collect();
    2.0 * rows.iter().sum::<f64>() / (2.0 * TWO_PI)
}

/// Discrete Gauss linking integral of two closed polylines (not rounded).
pub fn gauss_linking_integral(c1: &OrientedCurve, c2: &OrientedCurve) -> f64 {
    let p = c1.points();
    let q = c2.points();
    let (n, m) = (p.len(), q.len());
    let rows: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let a0 = p[i];
            let a1 = p[(i + 1) % n];
            (0..m)
                .map(|j| segment_pair_solid_angle(&a0, &a1, &q[j], &q[(j + 1) % m]))
                .sum()
        })
        .collect();
    rows.iter().sum::<f64>() / (2.0 * TWO_PI)
}

/// Linking number of two disjoint closed curves.
pub fn linking_number(c1: &OrientedCurve, c2: &OrientedCurve) -> Result<LinkingNumber> {
    let integral = gauss_linking_integral(c1, c2);
    let value = integral.round();
    let residual = (integral - value).abs();
    if residual > LINKING_RESIDUAL {
        return Err(Error::Resolution {
            value: integral,
            residual,
        });
    }
    Ok(LinkingNumber {
        value: value as i64,
        integral,
        residual,
    })
}

/// Twist of the projective framing seen from `x`: the framing obtained by
/// projecting lines of sight from `x` into the normal planes of the curve.
///
/// On a polyline the tangent is constant along segments and turns along a
/// great arc at each vertex, where the direction to `x` is fixed, so the
/// twist integral is evaluated in closed form vertex by vertex.
pub fn projective_twist(curve: &OrientedCurve, x: &Vec3) -> Result<f64> {
    let p = curve.points();
    let n = p.len();
    let seg_t = curve.segment_tangents();
    let s = curve.arclengths();
    let mut total = 0.0;
    for i in 0..n {
        let r = p[i] - x;
        let dist = r.norm();
        if dist < 1e-9 {
            return Err(Error::OnCurve {
                component: 0,
                segment: i,
                distance: dist,
            });
        }
        let view = r / dist;
        let a = seg_t[(i + n - 1) % n];
        let b = seg_t[i];
        for t in [a, b] {
            if 1.0 - view.dot(&t).abs() < CUSP_TOLERANCE {
                return Err(Error::Cusp { arclength: s[i] });
            }
        }
        let axis = a.cross(&b);
        let sin_turn = axis.norm();
        if sin_turn < 1e-15 {
            continue;
        }
        let m = axis / sin_turn;
        let c = view.dot(&m);
        let wa = view.dot(&a.cross(&m));
        let wb = view.dot(&b.cross(&m));
        // 1 - (n·T)^2 = c^2 + w^2 along the arc; w vanishes inside the arc
        // exactly when its endpoint values differ in sign.
        let floor = if wa * wb <= 0.0 { 0.0 } else { wa.abs().min(wb.abs()) };
        if c * c + floor * floor < CUSP_TOLERANCE {
            return Err(Error::Cusp { arclength: s[i] });
        }
        total += (wb / c).atan() - (wa / c).atan();
    }
    Ok(total / TWO_PI)
}

/// Fuller's integral `∮ n∞·(T×dT)/(1 + n∞·T)` reduced to `[0, 4π)`.
///
/// This is the signed area bounded by the tangent indicatrix (a geodesic
/// polygon through the segment tangents) measured with Dirac string at
/// `-n∞`; it is congruent to `2π(1 + Wr)` modulo 4π.
pub fn fuller_writhe_mod2(curve: &OrientedCurve, n_inf: &Vec3) -> Result<f64> {
    let axis = n_inf.normalize();
    let seg_t = curve.segment_tangents();
    let n = seg_t.len();
    let s = curve.arclengths();
    for (i, t) in seg_t.iter().enumerate() {
        if 1.0 + axis.dot(t) < ANTIPODAL_TOLERANCE {
            return Err(Error::AntipodalTangent {
                arclength: s[i] + 0.5 * curve.seg_lengths()[i],
            });
        }
    }
    let total: f64 = (0..n)
        .map(|i| triangle_excess(&axis, &seg_t[(i + n - 1) % n], &seg_t[i]))
        .sum();
    Ok(wrap_4pi(total))
}

/// Total twist of the Frenet frame, in turns: the sum over consecutive
/// vertices of the rotation of `N` relative to parallel transport along `T`.
pub fn frenet_twist(curve: &OrientedCurve) -> f64 {
    let t = curve.tangents();
    let nn = curve.normals();
    let n = t.len();
    let mut total = 0.0;
    for i in 0..n {
        let j = (i + 1) % n;
        let carried = parallel_transport(&nn[i], &t[i], &t[j]);
        total += signed_angle(&carried, &nn[j], &t[j]);
    }
    total / TWO_PI
}

/// Rotates `v` by the minimal rotation taking unit `from` to unit `to`.
pub fn parallel_transport(v: &Vec3, from: &Vec3, to: &Vec3) -> Vec3 {
    let c = from.dot(to);
    let k = from.cross(to);
    if c <= -1.0 + 1e-12 {
        return project_perpendicular(*v, *to);
    }
    v * c + k.cross(v) + k * (k.dot(v) / (1.0 + c))
}

/// Angle from `a` to `b` about `axis`, in `(-π, π]`.
pub fn signed_angle(a: &Vec3, b: &Vec3, axis: &Vec3) -> f64 {
    axis.dot(&a.cross(b)).atan2(a.dot(b))
}

fn project_perpendicular(v: Vec3, t: Vec3) -> Vec3 {
    let w = v - t * v.dot(&t);
    let norm = w.norm();
    if norm < 1e-12 {
        any_perpendicular(t)
    } else {
        w / norm
    }
}

fn any_perpendicular(t: Vec3) -> Vec3 {
    let trial = if t.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    (trial - t * trial.dot(&t)).normalize()
}

/// Distance from `x` to segment `a→b` and the parameter of the nearest point.
pub fn point_segment(x: &Vec3, a: &Vec3, b: &Vec3) -> (f64, f64) {
    let d = b - a;
    let len2 = d.norm_squared();
    let t = if len2 > 0.0 {
        ((x - a).dot(&d) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    ((a + d * t - x).norm(), t)
}

/// Minimum distance between segments `p0→p1` and `q0→q1`.
pub fn segment_segment(p0: &Vec3, p1: &Vec3, q0: &Vec3, q1: &Vec3) -> f64 {
    let d1 = p1 - p0;
    let d2 = q1 - q0;
    let r = p0 - q0;
    let a = d1.norm_squared();
    let e = d2.norm_squared();
    let f = d2.dot(&r);
    let c = d1.dot(&r);
    let b = d1.dot(&d2);
    let denom = a * e - b * b;
    let mut s = if denom > 1e-14 * a * e {
        ((b * f - c * e) / denom).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let mut t = (b * s + f) / e;
    if t < 0.0 {
        t = 0.0;
        s = (-c / a).clamp(0.0, 1.0);
    } else if t > 1.0 {
        t = 1.0;
        s = ((b - c) / a).clamp(0.0, 1.0);
    }
    (p0 + d1 * s - (q0 + d2 * t)).norm()
}

/// Minimum distance between two polylines.
pub fn curve_distance(c1: &OrientedCurve, c2: &OrientedCurve) -> f64 {
    let p = c1.points();
    let q = c2.points();
    let (n, m) = (p.len(), q.len());
    let mut best = f64::INFINITY;
    for i in 0..n {
        for j in 0..m {
            best = best.min(segment_segment(&p[i], &p[(i + 1) % n], &q[j], &q[(j + 1) % m]));
        }
    }
    best
}
