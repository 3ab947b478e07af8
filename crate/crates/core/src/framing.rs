//! The solid-angle framing and the local structure of ω near a curve.
//!
//! Close to the curve, ω restricted to a small circle in the normal plane
//! winds once around `R/4πZ`, approximately as `2(θ − α(s))` with `θ`
//! measured from the Frenet normal towards the binormal. The level set
//! `ω = 0` meets the circle at `θ = α(s)`, which defines a framing of the
//! curve with zero self-linking number.

use rayon::prelude::*;

use crate::curve::linking_number;
use crate::solidangle::{omega_at, triangle_sum};
use crate::{wrap_4pi, wrap_delta, EvalConfig, Error, Link, OrientedCurve, Result, Vec3, FOUR_PI, TWO_PI};

/// Default framing offset relative to the smallest radius of curvature.
pub const DEFAULT_EPS_REL: f64 = 0.02;
/// Largest framing offset relative to the smallest radius of curvature.
const MAX_EPS_CURVATURE: f64 = 0.05;
/// Largest framing offset relative to the minimum self-distance.
const MAX_EPS_DISTANCE: f64 = 0.2;
/// Samples used to bracket the root on each normal circle.
const SCAN_SAMPLES: usize = 16;

/// A framing of one curve by the `ω = 0` level set.
#[derive(Clone, Debug)]
pub struct Framing {
    pub base: OrientedCurve,
    /// Angle from the Frenet normal to the framing vector, per vertex,
    /// unwrapped along the curve.
    pub alpha: Vec<f64>,
    pub pushoff: Vec<Vec3>,
    pub epsilon: f64,
}

impl Framing {
    /// The pushoff as a closed curve.
    pub fn pushoff_curve(&self) -> Result<OrientedCurve> {
        OrientedCurve::new(self.pushoff.clone())
    }

    /// Net number of turns of the framing relative to the Frenet frame over
    /// one traversal.
    pub fn alpha_winding(&self) -> i64 {
        let n = self.alpha.len();
        let closing = wrap_pi(self.alpha[0] - self.alpha[n - 1]);
        ((self.alpha[n - 1] + closing - self.alpha[0]) / TWO_PI).round() as i64
    }
}

fn wrap_pi(a: f64) -> f64 {
    let r = a.rem_euclid(TWO_PI);
    if r > std::f64::consts::PI {
        r - TWO_PI
    } else {
        r
    }
}

/// The offset `DEFAULT_EPS_REL · ρ_min` used when none is given.
pub fn default_epsilon(curve: &OrientedCurve) -> f64 {
    DEFAULT_EPS_REL * curve.min_radius_of_curvature().min(curve.total_length())
}

/// Solid-angle framing of a single knot.
pub fn solid_angle_framing(curve: &OrientedCurve, eps: f64, cfg: &EvalConfig) -> Result<Framing> {
    solid_angle_framing_in_link(&Link::from(curve.clone()), 0, eps, cfg)
}

/// Solid-angle framing of one component of a link, using ω of the whole
/// link. Its self-linking number is minus the sum of the component's linking
/// numbers with the other components.
pub fn solid_angle_framing_in_link(link: &Link, component: usize, eps: f64, cfg: &EvalConfig) -> Result<Framing> {
    let curve = link
        .components()
        .get(component)
        .ok_or_else(|| Error::Config(format!("link has no component {component}")))?;
    check_epsilon(link, component, eps)?;
    let cfg = cfg.validated()?;
    let p = curve.points();
    let nn = curve.normals();
    let bb = curve.binormals();

    let roots: Vec<Result<f64>> = (0..curve.len())
        .into_par_iter()
        .map(|i| {
            let omega = |theta: f64| {
                let x = p[i] + (nn[i] * theta.cos() + bb[i] * theta.sin()) * eps;
                omega_at(link, &x, &cfg)
            };
            zero_crossing(omega, i)
        })
        .collect();

    let mut alpha = Vec::with_capacity(curve.len());
    for root in roots {
        let theta = root?;
        let a = match alpha.last() {
            None => theta,
            Some(&prev) => prev + wrap_pi(theta - prev),
        };
        alpha.push(a);
    }
    let pushoff = (0..curve.len())
        .map(|i| p[i] + (nn[i] * alpha[i].cos() + bb[i] * alpha[i].sin()) * eps)
        .collect();
    Ok(Framing {
        base: curve.clone(),
        alpha,
        pushoff,
        epsilon: eps,
    })
}

fn check_epsilon(link: &Link, component: usize, eps: f64) -> Result<()> {
    let curve = &link.components()[component];
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::FramingOffset {
            eps,
            reason: "offset must be positive".into(),
        });
    }
    let rho = curve.min_radius_of_curvature();
    if eps >= MAX_EPS_CURVATURE * rho {
        return Err(Error::FramingOffset {
            eps,
            reason: format!("must be below {MAX_EPS_CURVATURE} times the minimum radius of curvature {rho:.4}"),
        });
    }
    let mut gap = curve.min_self_distance();
    for (j, other) in link.components().iter().enumerate() {
        if j != component {
            gap = gap.min(crate::curve::curve_distance(curve, other));
        }
    }
    if eps >= MAX_EPS_DISTANCE * gap {
        return Err(Error::FramingOffset {
            eps,
            reason: format!("must be below {MAX_EPS_DISTANCE} times the minimum self-distance {gap:.4}"),
        });
    }
    Ok(())
}

/// Finds the angle on a normal circle where ω crosses 0 mod 4π while
/// increasing.
fn zero_crossing(omega: impl Fn(f64) -> Result<f64>, vertex: usize) -> Result<f64> {
    let step = TWO_PI / SCAN_SAMPLES as f64;
    let samples: Vec<f64> = (0..SCAN_SAMPLES)
        .map(|k| omega(k as f64 * step).map(wrap_delta))
        .collect::<Result<_>>()?;
    let lift: f64 = (0..SCAN_SAMPLES)
        .map(|k| wrap_delta(samples[(k + 1) % SCAN_SAMPLES] - samples[k]))
        .sum();
    if (lift - FOUR_PI).abs() > 1e-6 {
        return Err(Error::Bracketing {
            vertex,
            reason: format!("ω changes by {lift:.4} around the normal circle instead of 4π; refine the curve"),
        });
    }
    // In (-2π, 2π] the representative crosses zero upwards exactly once; the
    // wrap from +2π to -2π is a downward jump and is skipped.
    let k = (0..SCAN_SAMPLES)
        .find(|&k| {
            let (a, b) = (samples[k], samples[(k + 1) % SCAN_SAMPLES]);
            a <= 0.0 && b > 0.0 && b - a < TWO_PI
        })
        .ok_or_else(|| Error::Bracketing {
            vertex,
            reason: "no upward zero crossing among the scan samples".into(),
        })?;
    let g = |theta: f64| omega(theta).map(wrap_delta);
    let (mut lo, mut hi) = (k as f64 * step, (k + 1) as f64 * step);
    let (mut f_lo, mut f_hi) = (samples[k], samples[(k + 1) % SCAN_SAMPLES]);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    // Illinois variant of regula falsi.
    let mut side = 0i8;
    for _ in 0..200 {
        let mid = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
        let f_mid = g(mid)?;
        if f_mid.abs() < 1e-13 || hi - lo < 1e-13 {
            return Ok(mid.rem_euclid(TWO_PI));
        }
        if f_mid < 0.0 {
            lo = mid;
            f_lo = f_mid;
            if side == -1 {
                f_hi *= 0.5;
            }
            side = -1;
        } else {
            hi = mid;
            f_hi = f_mid;
            if side == 1 {
                f_lo *= 0.5;
            }
            side = 1;
        }
    }
    Ok((0.5 * (lo + hi)).rem_euclid(TWO_PI))
}

/// Linking number of the base curve with its framing pushoff.
pub fn framing_self_link(framing: &Framing) -> Result<i64> {
    Ok(linking_number(&framing.base, &framing.pushoff_curve()?)?.value)
}

/// Leading-order model of ω on a small normal circle of relative radius
/// `eps_tilde = ε/ρ`: `2(θ − α) + ε̃ ln(8/ε̃) sin θ`, reduced mod 4π.
pub fn local_omega_model(eps_tilde: f64, theta: f64, alpha: f64) -> f64 {
    wrap_4pi(2.0 * (theta - alpha) + eps_tilde * (8.0 / eps_tilde).ln() * theta.sin())
}

/// Projected direction of the curve near its tangent, seen from a point at
/// relative distance `eps_tilde` in the normal plane at angle `theta`, for
/// `s' − s = e^t √(2ερ)`.
///
/// Coordinates are `(N, B, T)` rotated by `θ/2` about `T`, in which the
/// image is a hyperbola with vertex at `t = 0`.
pub fn hyperbola_projection(eps_tilde: f64, theta: f64, t: f64) -> Vec3 {
    let scale = (2.0 * eps_tilde).sqrt();
    let norm = (1.0 + eps_tilde * ((2.0 * t).cosh() - theta.cos())).sqrt();
    Vec3::new(
        scale * (0.5 * theta).cos() * t.sinh(),
        -scale * (0.5 * theta).sin() * t.cosh(),
        1.0,
    ) / norm
}

/// [`hyperbola_projection`] in unrotated `(N, B, T)` coordinates.
pub fn hyperbola_projection_frenet(eps_tilde: f64, theta: f64, t: f64) -> Vec3 {
    let v = hyperbola_projection(eps_tilde, theta, t);
    let (s, c) = (0.5 * theta).sin_cos();
    Vec3::new(c * v.x - s * v.y, s * v.x + c * v.y, v.z)
}

/// Solid angle of the circle of radius `rho` centred at the origin in the
/// xy-plane, traversed clockwise seen from +z.
///
/// On the axis this is the spherical-cap area `2π(1 − z/√(z² + ρ²))`.
/// Elsewhere inscribed polygons are refined by doubling and Richardson
/// extrapolated until successive estimates agree to 1e-9.
pub fn exact_circle_omega(rho: f64, x: &Vec3) -> Result<f64> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::Config(format!("circle radius {rho} must be positive")));
    }
    let radial = x.x.hypot(x.y);
    let distance = (radial - rho).hypot(x.z);
    if distance < 1e-9 * rho {
        return Err(Error::OnCurve {
            component: 0,
            segment: 0,
            distance,
        });
    }
    if radial <= 1e-14 * rho {
        return Ok(wrap_4pi(TWO_PI * (1.0 - x.z / x.z.hypot(rho))));
    }
    // Keep the Dirac string on the far side of the plane from the circle.
    let axis = if x.z > 0.0 { -Vec3::z() } else { Vec3::z() };
    let polygon = |n: usize| {
        triangle_sum(
            n,
            |i| {
                let phi = -TWO_PI * i as f64 / n as f64;
                Vec3::new(rho * phi.cos(), rho * phi.sin(), 0.0)
            },
            x,
            &axis,
        )
    };
    let mut n = 64;
    let mut coarse = polygon(n);
    let mut previous: Option<f64> = None;
    while n < 1 << 20 {
        n *= 2;
        let fine = polygon(n);
        let extrapolated = fine + wrap_delta(fine - coarse) / 3.0;
        if let Some(prev) = previous {
            if wrap_delta(extrapolated - prev).abs() < 1e-9 {
                return Ok(wrap_4pi(extrapolated));
            }
        }
        previous = Some(extrapolated);
        coarse = fine;
    }
    Err(Error::Convergence(format!(
        "circle solid angle at {x:?} did not converge with {n} vertices"
    )))
}

/// Continuous lift of ω at `samples` equally spaced angles on the circle
/// `y + ε(cos θ N + sin θ B)`, starting from the representative of ω at
/// `θ = 0` in `(-2π, 2π]`.
pub fn normal_circle_lift(
    omega: impl Fn(&Vec3) -> Result<f64>,
    y: &Vec3,
    normal: &Vec3,
    binormal: &Vec3,
    eps: f64,
    samples: usize,
) -> Result<Vec<f64>> {
    let mut out: Vec<f64> = Vec::with_capacity(samples);
    let mut prev = 0.0;
    for k in 0..samples {
        let theta = TWO_PI * k as f64 / samples as f64;
        let w = omega(&(y + (normal * theta.cos() + binormal * theta.sin()) * eps))?;
        let value = match out.last() {
            None => wrap_delta(w),
            Some(&last) => last + wrap_delta(w - prev),
        };
        prev = w;
        out.push(value);
    }
    Ok(out)
}

/// First Fourier coefficients of `lift(θ) − 2θ` on equally spaced samples.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WindingFit {
    /// Mean value, equal to `−2α` for a pure winding.
    pub offset: f64,
    pub sin_coeff: f64,
    pub cos_coeff: f64,
    /// Largest deviation of the samples from the three-term fit.
    pub residual: f64,
}

pub fn fit_winding(lift: &[f64]) -> WindingFit {
    let m = lift.len() as f64;
    let thetas: Vec<f64> = (0..lift.len()).map(|k| TWO_PI * k as f64 / m).collect();
    let reduced: Vec<f64> = lift.iter().zip(&thetas).map(|(w, t)| w - 2.0 * t).collect();
    let offset = reduced.iter().sum::<f64>() / m;
    let sin_coeff = 2.0 * reduced.iter().zip(&thetas).map(|(r, t)| r * t.sin()).sum::<f64>() / m;
    let cos_coeff = 2.0 * reduced.iter().zip(&thetas).map(|(r, t)| r * t.cos()).sum::<f64>() / m;
    let residual = reduced
        .iter()
        .zip(&thetas)
        .map(|(r, t)| (r - offset - sin_coeff * t.sin() - cos_coeff * t.cos()).abs())
        .fold(0.0, f64::max);
    WindingFit {
        offset,
        sin_coeff,
        cos_coeff,
        residual,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{frenet_twist, writhe};
    use crate::knots;
    use std::f64::consts::PI;

    #[test]
    fn model_reduces_to_winding() {
        assert_eq!(local_omega_model(0.05, 0.0, 0.0), 0.0);
        let theta = 1.1;
        let small = local_omega_model(1e-12, theta, 0.3);
        assert!((small - 2.0 * (theta - 0.3)).abs() < 1e-9);
        let v = local_omega_model(0.1, PI / 2.0, 0.0);
        assert!((v - (PI + 0.1 * 80f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn hyperbola_is_unit_with_sqrt_vertex() {
        for &(e, th, t) in &[(0.1, 0.3, -2.0), (0.01, 2.0, 0.0), (0.05, 5.0, 1.5)] {
            assert!((hyperbola_projection(e, th, t).norm() - 1.0).abs() < 1e-14);
        }
        let polar = |e: f64| {
            let v = hyperbola_projection(e, PI / 2.0, 0.0);
            v.xy().norm().atan2(v.z)
        };
        let ratio = polar(0.01) / polar(0.0025);
        assert!((ratio - 2.0).abs() < 0.02, "{ratio}");
    }

    #[test]
    fn hyperbola_asymptotes() {
        let theta = 1.2;
        let far = hyperbola_projection_frenet(0.01, theta, 12.0);
        let back = hyperbola_projection_frenet(0.01, theta, -12.0);
        // Azimuths about T: 0 for t → ∞ and θ + π for t → −∞.
        assert!(far.y.atan2(far.x).abs() < 1e-6);
        assert!(wrap_pi(back.y.atan2(back.x) - theta - PI).abs() < 1e-6);
    }

    #[test]
    fn hyperbola_matches_projected_circle() {
        // Counterclockwise circle of radius ρ; at (ρ, 0, 0): T = +y,
        // N = −x, B = +z.
        let rho = 1.3;
        let frame = |v: Vec3| Vec3::new(-v.x, v.z, v.y);
        let mut worst = Vec::new();
        for &e in &[0.02, 0.01, 0.005] {
            let eps = e * rho;
            let mut dev: f64 = 0.0;
            for th_k in 0..8 {
                let theta = 0.1 + 0.77 * th_k as f64;
                let x = Vec3::new(rho - eps * theta.cos(), 0.0, eps * theta.sin());
                for tk in 0..=20 {
                    let t = -1.0 + 0.1 * tk as f64;
                    let ds = t.exp() * (2.0 * eps * rho).sqrt();
                    let y = Vec3::new(rho * (ds / rho).cos(), rho * (ds / rho).sin(), 0.0);
                    let n = frame((y - x).normalize());
                    let (s, c) = (0.5 * theta).sin_cos();
                    let rotated = Vec3::new(c * n.x + s * n.y, -s * n.x + c * n.y, n.z);
                    let model = hyperbola_projection(e, theta, t);
                    dev = dev.max(rotated.cross(&model).norm().asin());
                }
            }
            worst.push(dev / e);
        }
        for w in &worst {
            assert!(*w < 1.0, "{worst:?}");
        }
    }

    #[test]
    fn exact_circle_on_axis_and_centre() {
        assert!((exact_circle_omega(1.0, &Vec3::zeros()).unwrap() - TWO_PI).abs() < 1e-15);
        let z = 2.0;
        let v = exact_circle_omega(2.0, &Vec3::new(0.0, 0.0, z)).unwrap();
        assert!((v - TWO_PI * (1.0 - 1.0 / 2f64.sqrt())).abs() < 1e-14);
        assert!(exact_circle_omega(1.0, &Vec3::x()).is_err());
    }

    #[test]
    fn exact_circle_off_axis_is_converged() {
        let x = Vec3::new(0.6, 0.2, 0.3);
        let a = exact_circle_omega(1.0, &x).unwrap();
        let fine = triangle_sum(
            1 << 16,
            |i| {
                let phi = -TWO_PI * i as f64 / 65536.0;
                Vec3::new(phi.cos(), phi.sin(), 0.0)
            },
            &x,
            &-Vec3::z(),
        );
        assert!(wrap_delta(a - fine).abs() < 1e-8, "{a} vs {fine}");
        // Continuity with the on-axis closed form.
        let near = exact_circle_omega(1.0, &Vec3::new(1e-6, 0.0, 0.4)).unwrap();
        let axis = exact_circle_omega(1.0, &Vec3::new(0.0, 0.0, 0.4)).unwrap();
        assert!((near - axis).abs() < 1e-8);
    }

    #[test]
    fn winding_fit_recovers_coefficients() {
        let lift: Vec<f64> = (0..64)
            .map(|k| {
                let t = TWO_PI * k as f64 / 64.0;
                2.0 * t - 0.6 + 0.3 * t.sin() - 0.1 * t.cos()
            })
            .collect();
        let fit = fit_winding(&lift);
        assert!((fit.offset + 0.6).abs() < 1e-12);
        assert!((fit.sin_coeff - 0.3).abs() < 1e-12);
        assert!((fit.cos_coeff + 0.1).abs() < 1e-12);
        assert!(fit.residual < 1e-12);
    }

    #[test]
    fn circle_normal_circle_bunching() {
        // Clockwise unit circle; at (1, 0, 0) N points to the centre.
        let y = Vec3::x();
        let (n, b) = (-Vec3::x(), -Vec3::z());
        for &e in &[0.1, 0.02] {
            let lift = normal_circle_lift(|x| exact_circle_omega(1.0, x), &y, &n, &b, e, 32).unwrap();
            let fit = fit_winding(&lift);
            let predicted = e * (8.0 / e).ln();
            assert!((fit.sin_coeff / predicted - 1.0).abs() < 0.1, "{e}: {fit:?}");
        }
    }

    #[test]
    fn circle_framing_is_planar() {
        let c = knots::circle(1.0, 200);
        let f = solid_angle_framing(&c, 0.02, &EvalConfig::default()).unwrap();
        for (p, q) in c.points().iter().zip(&f.pushoff) {
            assert!(q.z.abs() < 1e-8, "{q:?}");
            assert!(((q - p).norm() / 0.02 - 1.0).abs() < 1e-8);
            assert!((q.xy().norm() - p.xy().norm()).abs() > 0.019);
        }
        assert_eq!(framing_self_link(&f).unwrap(), 0);
    }

    #[test]
    fn trefoil_framing_has_zero_self_link() {
        let c = knots::trefoil(240);
        let eps = default_epsilon(&c);
        let f = solid_angle_framing(&c, eps, &EvalConfig::default()).unwrap();
        assert_eq!(framing_self_link(&f).unwrap(), 0);
        // Pushoff lies in the normal planes at distance eps.
        for i in 0..c.len() {
            let d = f.pushoff[i] - c.points()[i];
            assert!(d.dot(&c.tangents()[i]).abs() < 1e-8 * eps);
            assert!((d.norm() / eps - 1.0).abs() < 1e-8);
        }
        let sl = f.alpha_winding() as f64 + frenet_twist(&c) + writhe(&c);
        assert!(sl.abs() < 2e-2, "{sl}");
    }

    #[test]
    fn framing_rejects_large_offsets() {
        let c = knots::circle(1.0, 100);
        assert!(matches!(
            solid_angle_framing(&c, 0.2, &EvalConfig::default()),
            Err(Error::FramingOffset { .. })
        ));
        assert!(solid_angle_framing(&c, -0.01, &EvalConfig::default()).is_err());
    }

    #[test]
    fn hopf_component_self_link_is_minus_one() {
        let link = knots::hopf_link(160);
        for c in 0..2 {
            let eps = default_epsilon(&link.components()[c]);
            let f = solid_angle_framing_in_link(&link, c, eps, &EvalConfig::default()).unwrap();
            assert_eq!(framing_self_link(&f).unwrap(), -1);
        }
    }
}
