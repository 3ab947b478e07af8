//! Parametric sample curves and links.
//!
//! Curves are sampled uniformly in their parameter; call
//! [`OrientedCurve::resample`] for uniform arclength spacing.

use std::f64::consts::TAU;

use crate::{Link, OrientedCurve, Vec3};

fn sample(n: usize, f: impl Fn(f64) -> Vec3) -> OrientedCurve {
    let pts = (0..n).map(|i| f(TAU * i as f64 / n as f64)).collect();
    OrientedCurve::new(pts).expect("parametric sample curves are valid")
}

/// Circle of radius `radius` in the xy-plane, counterclockwise about +z.
pub fn circle(radius: f64, n: usize) -> OrientedCurve {
    sample(n, |t| Vec3::new(radius * t.cos(), radius * t.sin(), 0.0))
}

/// Regular `n`-gon in the xy-plane enclosing the same area as the circle of
/// radius `radius`, counterclockwise about +z.
///
/// Its vertices sit slightly outside the circle, which cancels the leading
/// discretization error of the solid angle seen from the axis.
pub fn circle_equal_area(radius: f64, n: usize) -> OrientedCurve {
    let step = TAU / n as f64;
    circle(radius * (step / step.sin()).sqrt(), n)
}

/// The (p, q) torus knot on the torus with radii `major` and `minor`.
pub fn torus_knot(p: u32, q: u32, major: f64, minor: f64, n: usize) -> OrientedCurve {
    let (p, q) = (p as f64, q as f64);
    sample(n, |t| {
        let r = major + minor * (q * t).cos();
        Vec3::new(r * (p * t).cos(), r * (p * t).sin(), minor * (q * t).sin())
    })
}

/// Trefoil as the (2, 3) torus knot with radii 2 and 1.
pub fn trefoil(n: usize) -> OrientedCurve {
    torus_knot(2, 3, 2.0, 1.0, n)
}

/// Figure-eight knot `((2 + cos 2t) cos 3t, (2 + cos 2t) sin 3t, sin 4t)`.
pub fn figure_eight(n: usize) -> OrientedCurve {
    sample(n, |t| {
        let r = 2.0 + (2.0 * t).cos();
        Vec3::new(r * (3.0 * t).cos(), r * (3.0 * t).sin(), (4.0 * t).sin())
    })
}

/// Hopf link of two unit circles; the components have linking number +1.
pub fn hopf_link(n: usize) -> Link {
    let a = circle(1.0, n);
    let b = sample(n, |t| Vec3::new(1.0 + t.cos(), 0.0, -t.sin()));
    Link::new(vec![a, b]).expect("Hopf components are disjoint")
}

/// Whitehead link: a twisted figure-eight loop and a saddle-shaped ring
/// threading both of its lobes (an alternating five-crossing diagram).
pub fn whitehead_link(n: usize) -> Link {
    let loop_ = sample(n, |t| Vec3::new(2.0 * t.cos(), (2.0 * t).sin(), 0.5 * t.sin()));
    let ring = sample(n, |t| Vec3::new(1.2 * t.cos(), 1.2 * t.sin(), 1.2 * (2.0 * t).sin()));
    Link::new(vec![loop_, ring]).expect("Whitehead components are disjoint")
}

/// Borromean rings as three mutually orthogonal ellipses.
pub fn borromean_rings(n: usize) -> Link {
    let a = sample(n, |t| Vec3::new(2.0 * t.cos(), t.sin(), 0.0));
    let b = sample(n, |t| Vec3::new(0.0, 2.0 * t.cos(), t.sin()));
    let c = sample(n, |t| Vec3::new(t.sin(), 0.0, 2.0 * t.cos()));
    Link::new(vec![a, b, c]).expect("Borromean components are disjoint")
}

/// Looks up a sample curve by name.
pub fn by_name(name: &str, n: usize) -> Option<Link> {
    Some(match name {
        "circle" | "unknot" => circle(1.0, n).into(),
        "trefoil" => trefoil(n).into(),
        "figure-eight" | "figure_eight" => figure_eight(n).into(),
        "hopf" => hopf_link(n),
        "whitehead" => whitehead_link(n),
        "borromean" => borromean_rings(n),
        _ => return None,
    })
}

/// Names accepted by [`by_name`].
pub const NAMES: &[&str] = &["circle", "trefoil", "figure-eight", "hopf", "whitehead", "borromean"];
