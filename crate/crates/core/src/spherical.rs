//! Geometry of a curve projected onto the observation sphere.
//!
//! Straight segments project to great-circle arcs, so the projection of a
//! polyline is a geodesic polygon. Its geodesic curvature is concentrated in
//! the turning angles at the vertices, which makes the Gauss–Bonnet form of
//! the solid angle exact up to rounding.

use crate::curve::point_segment;
use crate::{wrap_4pi, Error, OrientedCurve, Result, Vec3, TWO_PI};

/// Smallest accepted distance from the evaluation point to the curve.
pub const ON_CURVE_DISTANCE: f64 = 1e-9;
/// Crossings closer than this (in sine of arc angle) to an arc endpoint are
/// treated as degenerate.
const VERTEX_CROSSING_TOLERANCE: f64 = 1e-9;

/// Signed area of the spherical triangle `(a, b, c)` for unit vectors, in
/// `(-2π, 2π)`, positive when the vertices run counterclockwise seen from
/// outside the sphere.
///
/// Uses the half-angle form `tan(E/2) = a·(b×c) / (1 + a·b + b·c + c·a)`.
#[inline]
pub fn triangle_excess(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    let num = a.dot(&b.cross(c));
    let den = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
    2.0 * num.atan2(den)
}

/// The projection `n = (y - x)/|y - x|` of a closed polyline onto the unit
/// sphere centred at `x`.
#[derive(Clone, Debug)]
pub struct SphericalPolyline {
    /// Projected vertices.
    pub verts: Vec<Vec3>,
    /// Unit tangent at the start of each arc (arc `i` runs from vertex `i` to
    /// vertex `i + 1`).
    pub arc_tangents: Vec<Vec3>,
    /// Signed turning angle at each vertex, positive towards `γ = n × t`.
    pub turning_angles: Vec<f64>,
    /// Per-arc pole `t × n`: the dual-curve point of the arc.
    pub poles: Vec<Vec3>,
}

impl SphericalPolyline {
    /// Builds the polyline from unit vertices.
    pub fn from_verts(verts: Vec<Vec3>) -> Result<Self> {
        let n = verts.len();
        if n < 3 {
            return Err(Error::Validation("spherical polyline needs 3 vertices".into()));
        }
        let mut arc_tangents = Vec::with_capacity(n);
        let mut end_tangents = Vec::with_capacity(n);
        let mut poles = Vec::with_capacity(n);
        for i in 0..n {
            let a = verts[i];
            let b = verts[(i + 1) % n];
            let cross = a.cross(&b);
            let sin = cross.norm();
            let cos = a.dot(&b);
            if cos <= -1.0 + 1e-9 {
                return Err(Error::DiscontinuitySurface(format!(
                    "vertices {i} and {} are antipodal",
                    (i + 1) % n
                )));
            }
            if sin < 1e-12 {
                return Err(Error::Degenerate(format!("arc {i} has zero length (cusp)")));
            }
            let pole = -cross / sin;
            // t = pole... t × n = pole gives t = n × pole.
            arc_tangents.push(a.cross(&pole));
            end_tangents.push(b.cross(&pole));
            poles.push(pole);
        }
        let mut turning_angles = Vec::with_capacity(n);
        for i in 0..n {
            let t_in = end_tangents[(i + n - 1) % n];
            let t_out = arc_tangents[i];
            let turn = verts[i].dot(&t_in.cross(&t_out)).atan2(t_in.dot(&t_out));
            if turn.abs() > std::f64::consts::PI - 1e-9 {
                return Err(Error::Degenerate(format!("arc reverses direction at vertex {i}")));
            }
            turning_angles.push(turn);
        }
        Ok(SphericalPolyline {
            verts,
            arc_tangents,
            turning_angles,
            poles,
        })
    }

    pub fn len(&self) -> usize {
        self.verts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.verts.is_empty()
    }
}

/// Projects `curve` onto the observation sphere at `x`.
pub fn project(curve: &OrientedCurve, x: &Vec3) -> Result<SphericalPolyline> {
    project_component(curve, x, 0)
}

pub(crate) fn project_component(
    curve: &OrientedCurve,
    x: &Vec3,
    component: usize,
) -> Result<SphericalPolyline> {
    check_off_curve(curve, x, component)?;
    let verts = curve.points().iter().map(|p| (p - x).normalize()).collect();
    SphericalPolyline::from_verts(verts)
}

pub(crate) fn check_off_curve(curve: &OrientedCurve, x: &Vec3, component: usize) -> Result<()> {
    let p = curve.points();
    let n = p.len();
    for i in 0..n {
        let (d, _) = point_segment(x, &p[i], &p[(i + 1) % n]);
        if d < ON_CURVE_DISTANCE {
            return Err(Error::OnCurve {
                component,
                segment: i,
                distance: d,
            });
        }
    }
    Ok(())
}

enum Containment {
    Inside,
    Outside,
    Boundary,
}

fn arc_contains(a: &Vec3, b: &Vec3, pole: &Vec3, q: &Vec3) -> Containment {
    // pole = b × a normalized, so (q × a)·pole and (b × q)·pole are the sines
    // of the angles a→q and q→b measured along the arc.
    let m1 = q.cross(a).dot(pole);
    let m2 = b.cross(q).dot(pole);
    let tol = VERTEX_CROSSING_TOLERANCE;
    if m1 > tol && m2 > tol && q.dot(&(a + b)) > 0.0 {
        Containment::Inside
    } else if m1 < -tol || m2 < -tol || q.dot(&(a + b)) <= 0.0 {
        Containment::Outside
    } else {
        Containment::Boundary
    }
}

/// Number of transverse self-intersections `D` of the projected curve.
pub fn crossing_count(proj: &SphericalPolyline) -> Result<usize> {
    let n = proj.len();
    let v = &proj.verts;
    // Bounding caps: centre and angular radius of each arc.
    let caps: Vec<(Vec3, f64)> = (0..n)
        .map(|i| {
            let a = v[i];
            let b = v[(i + 1) % n];
            let centre = (a + b).normalize();
            (centre, centre.dot(&a).clamp(-1.0, 1.0).acos())
        })
        .collect();
    let mut count = 0;
    for i in 0..n {
        for j in (i + 2)..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let reach = caps[i].1 + caps[j].1 + 1e-9;
            if reach < std::f64::consts::PI && caps[i].0.dot(&caps[j].0) < reach.cos() {
                continue;
            }
            if arcs_cross(proj, i, j)? {
                count += 1;
            }
        }
    }
    Ok(count)
}

fn arcs_cross(proj: &SphericalPolyline, i: usize, j: usize) -> Result<bool> {
    let n = proj.len();
    let v = &proj.verts;
    let (a, b) = (v[i], v[(i + 1) % n]);
    let (c, d) = (v[j], v[(j + 1) % n]);
    let (p1, p2) = (proj.poles[i], proj.poles[j]);
    let line = p1.cross(&p2);
    let sin = line.norm();
    if sin < 1e-12 {
        // Same great circle: any overlap is degenerate.
        let overlaps = [c, d].iter().any(|q| !matches!(arc_contains(&a, &b, &p1, q), Containment::Outside))
            || [a, b].iter().any(|q| !matches!(arc_contains(&c, &d, &p2, q), Containment::Outside));
        if overlaps {
            return Err(Error::Degenerate(format!("arcs {i} and {j} overlap")));
        }
        return Ok(false);
    }
    let q = line / sin;
    for cand in [q, -q] {
        match (arc_contains(&a, &b, &p1, &cand), arc_contains(&c, &d, &p2, &cand)) {
            (Containment::Inside, Containment::Inside) => return Ok(true),
            (Containment::Outside, _) | (_, Containment::Outside) => {}
            _ => {
                return Err(Error::Degenerate(format!(
                    "arcs {i} and {j} cross at a vertex"
                )))
            }
        }
    }
    Ok(false)
}

/// Total signed geodesic curvature: the sum of vertex turning angles.
pub fn total_turning(proj: &SphericalPolyline) -> f64 {
    proj.turning_angles.iter().sum()
}

/// The dual curve `n* = t × n`: one point per arc of the primal curve, joined
/// at each primal vertex by a great arc whose length is the absolute turning
/// angle there and whose sign is the sign of the turning.
#[derive(Clone, Debug)]
pub struct DualCurve {
    pub points: Vec<Vec3>,
    /// Signed length of the dual arc entering point `i` (from point `i - 1`).
    pub signed_lengths: Vec<f64>,
}

impl DualCurve {
    pub fn signed_length(&self) -> f64 {
        self.signed_lengths.iter().sum()
    }

    /// Indices where the sign of the dual length element flips: cusps of the
    /// dual, corresponding to inflections of the primal curve.
    pub fn cusps(&self) -> Vec<usize> {
        let signs: Vec<(usize, f64)> = self
            .signed_lengths
            .iter()
            .enumerate()
            .filter(|(_, l)| l.abs() > 1e-15)
            .map(|(i, l)| (i, l.signum()))
            .collect();
        let m = signs.len();
        (0..m)
            .filter(|&k| signs[k].1 != signs[(k + m - 1) % m].1)
            .map(|k| signs[k].0)
            .collect()
    }
}

/// Builds the dual curve of a projection.
pub fn dual_curve(proj: &SphericalPolyline) -> DualCurve {
    let n = proj.len();
    let signed_lengths = (0..n)
        .map(|i| {
            let from = proj.poles[(i + n - 1) % n];
            let to = proj.poles[i];
            let angle = from.cross(&to).norm().atan2(from.dot(&to));
            angle * proj.turning_angles[i].signum()
        })
        .collect();
    DualCurve {
        points: proj.poles.clone(),
        signed_lengths,
    }
}

/// Solid angle of one closed curve by the Gauss–Bonnet formula
/// `ω = 2π(D + 1) − ∮ k_γ ds (mod 4π)`.
pub fn omega_gauss_bonnet(curve: &OrientedCurve, x: &Vec3) -> Result<f64> {
    omega_gauss_bonnet_component(curve, x, 0)
}

pub(crate) fn omega_gauss_bonnet_component(
    curve: &OrientedCurve,
    x: &Vec3,
    component: usize,
) -> Result<f64> {
    let proj = project_component(curve, x, component)?;
    let d = crossing_count(&proj)?;
    Ok(wrap_4pi(TWO_PI * (d as f64 + 1.0) - total_turning(&proj)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knots;
    use std::f64::consts::PI;

    #[test]
    fn triangle_excess_of_octant() {
        let e = triangle_excess(&Vec3::x(), &Vec3::y(), &Vec3::z());
        assert!((e - PI / 2.0).abs() < 1e-14);
        let r = triangle_excess(&Vec3::x(), &Vec3::z(), &Vec3::y());
        assert!((r + PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn circle_from_centre_is_a_great_circle() {
        let c = knots::circle(1.0, 400);
        let proj = project(&c, &Vec3::zeros()).unwrap();
        assert!(proj.turning_angles.iter().all(|t| t.abs() < 1e-9));
        assert!(total_turning(&proj).abs() < 1e-9);
        assert_eq!(crossing_count(&proj).unwrap(), 0);
        let dual = dual_curve(&proj);
        assert!(dual.signed_length().abs() < 1e-12);
        for p in &dual.points {
            assert!((p - dual.points[0]).norm() < 1e-12);
        }
    }

    #[test]
    fn small_circle_turning_matches_cap() {
        // Circle of radius 1 at height 2 seen from the origin: polar angle θ0
        // with tan θ0 = 1/2; Gauss–Bonnet gives |turning| = 2π cos θ0.
        let c = knots::circle(1.0, 20000).mapped(|p| p + Vec3::new(0.0, 0.0, 2.0)).unwrap();
        let proj = project(&c, &Vec3::zeros()).unwrap();
        let theta0 = (0.5f64).atan();
        let total = total_turning(&proj);
        assert!((total.abs() - TWO_PI * theta0.cos()).abs() < 1e-6, "{total}");

        let dual = dual_curve(&proj);
        assert!((dual.signed_length() - total).abs() < 1e-12);
        for p in &dual.points {
            assert!((p.z.abs() - theta0.sin()).abs() < 1e-6);
        }
        assert!(dual.cusps().is_empty());

        let far = knots::circle(1.0, 400).mapped(|p| p + Vec3::new(0.0, 0.0, 1e4)).unwrap();
        let proj = project(&far, &Vec3::zeros()).unwrap();
        assert!((total_turning(&proj).abs() - TWO_PI).abs() < 1e-6);
    }

    #[test]
    fn mirror_negates_turning() {
        let c = knots::trefoil(200);
        let x = Vec3::new(0.3, -0.4, 5.0);
        let m = c.mapped(|p| Vec3::new(p.x, p.y, -p.z)).unwrap();
        let xm = Vec3::new(x.x, x.y, -x.z);
        let a = total_turning(&project(&c, &x).unwrap());
        let b = total_turning(&project(&m, &xm).unwrap());
        assert!((a + b).abs() < 1e-12);
    }

    #[test]
    fn lemniscate_dual_has_two_cusps() {
        // A figure-eight curve drawn on the plane z = -1 and viewed from the
        // origin: one double point and two inflections.
        let pts: Vec<Vec3> = (0..800)
            .map(|k| {
                let t = TWO_PI * (k as f64 + 0.5) / 800.0;
                Vec3::new(0.6 * t.cos(), 0.6 * t.sin() * t.cos(), -1.0)
            })
            .collect();
        let c = OrientedCurve::new(pts).unwrap();
        let proj = project(&c, &Vec3::zeros()).unwrap();
        assert_eq!(crossing_count(&proj).unwrap(), 1);
        let dual = dual_curve(&proj);
        let cusps = dual.cusps();
        assert_eq!(cusps.len(), 2);
        let first: f64 = dual.signed_lengths[cusps[0]..cusps[1]].iter().sum();
        let second = dual.signed_length() - first;
        assert!(first * second < 0.0);
        let omega = omega_gauss_bonnet(&c, &Vec3::zeros()).unwrap();
        assert!(crate::wrap_delta(omega).abs() < 1e-9, "{omega}");
    }

    #[test]
    fn gauss_bonnet_on_circle() {
        let c = knots::circle(1.0, 200);
        assert!((omega_gauss_bonnet(&c, &Vec3::zeros()).unwrap() - TWO_PI).abs() < 1e-9);
        let far = omega_gauss_bonnet(&c, &Vec3::new(0.0, 0.0, 1e4)).unwrap();
        assert!(crate::wrap_delta(far).abs() < 1e-6);
    }

    #[test]
    fn trefoil_from_far_has_three_crossings() {
        let c = knots::trefoil(300);
        let proj = project(&c, &Vec3::new(0.01, 0.02, 1e3)).unwrap();
        assert_eq!(crossing_count(&proj).unwrap(), 3);
    }

    #[test]
    fn on_curve_point_is_rejected() {
        let c = knots::circle(1.0, 100);
        let x = (c.points()[3] + c.points()[4]) * 0.5;
        assert!(matches!(project(&c, &x), Err(Error::OnCurve { .. })));
    }
}
