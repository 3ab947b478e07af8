//! Knotted scalar and director fields built from ω.

use rayon::prelude::*;

use crate::solidangle::{omega_grid, FieldMeta, IssueKind, NodeIssue, SENTINEL};
use crate::{wrap_2pi, EvalConfig, Error, GridSpec, Link, Result, ScalarField, Vec3};

/// Unit vectors on a grid. Nodes with issues hold the zero vector.
#[derive(Clone, Debug)]
pub struct VectorField {
    pub grid: GridSpec,
    pub values: Vec<Vec3>,
    pub meta: FieldMeta,
    pub issues: Vec<NodeIssue>,
}

/// Nearest point of a link: component, arclength along it and distance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Nearest {
    pub component: usize,
    pub arclength: f64,
    pub distance: f64,
}

pub fn nearest_point(link: &Link, x: &Vec3) -> Nearest {
    let mut best = Nearest {
        component: 0,
        arclength: 0.0,
        distance: f64::INFINITY,
    };
    for (c, curve) in link.components().iter().enumerate() {
        let (d, seg, t) = curve.nearest(x);
        if d < best.distance {
            best = Nearest {
                component: c,
                arclength: curve.arclength(seg) + t * curve.seg_lengths()[seg],
                distance: d,
            };
        }
    }
    best
}

/// Distance from every node to the nearest segment of the link.
pub fn distance_field(link: &Link, grid: &GridSpec) -> Result<ScalarField> {
    grid.validate()?;
    let values = (0..grid.len())
        .into_par_iter()
        .map(|i| link.distance(&grid.point(i)))
        .collect();
    Ok(ScalarField {
        grid: grid.clone(),
        values,
        meta: FieldMeta::new("distance", link),
        issues: Vec::new(),
    })
}

/// Offset to the distance function, piecewise linear in arclength and
/// periodic with the length of each component.
#[derive(Clone, Debug, PartialEq)]
pub struct Modulation {
    knots: Vec<(f64, f64)>,
}

impl Modulation {
    /// Builds a table from `(arclength, offset)` pairs.
    pub fn new(mut knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::Validation("modulation table is empty".into()));
        }
        if knots.iter().any(|(s, m)| !s.is_finite() || !m.is_finite() || *s < 0.0) {
            return Err(Error::Validation("modulation entries must be finite with nonnegative arclength".into()));
        }
        knots.sort_by(|a, b| a.0.total_cmp(&b.0));
        if knots.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Validation("modulation table repeats an arclength".into()));
        }
        Ok(Modulation { knots })
    }

    /// `amplitude · sin(2π periods s / length)` sampled at `samples` points.
    pub fn sinusoidal(amplitude: f64, periods: u32, length: f64, samples: usize) -> Result<Self> {
        let knots = (0..samples)
            .map(|i| {
                let s = length * i as f64 / samples as f64;
                (s, amplitude * (std::f64::consts::TAU * periods as f64 * s / length).sin())
            })
            .collect();
        Modulation::new(knots)
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    /// Offset at arclength `s` on a component of length `length`.
    pub fn at(&self, s: f64, length: f64) -> f64 {
        let s = s.rem_euclid(length);
        let k = &self.knots;
        let n = k.len();
        if n == 1 {
            return k[0].1;
        }
        let idx = k.partition_point(|(t, _)| *t <= s);
        let (a, b) = match idx {
            0 => ((k[n - 1].0 - length, k[n - 1].1), k[0]),
            i if i == n => (k[n - 1], (k[0].0 + length, k[0].1)),
            i => (k[i - 1], k[i]),
        };
        let span = b.0 - a.0;
        if span <= 0.0 {
            return a.1;
        }
        a.1 + (b.1 - a.1) * (s - a.0) / span
    }
}

/// Scroll-wave phase `ψ = k(d − m(s*)) + ω/2 mod 2π` at a point, where `d`
/// is the distance to the link and `s*` the arclength of the nearest point.
pub fn scroll_phase_value(link: &Link, x: &Vec3, omega: f64, k: f64, modulation: Option<&Modulation>) -> f64 {
    let near = nearest_point(link, x);
    let offset = modulation.map_or(0.0, |m| {
        m.at(near.arclength, link.components()[near.component].total_length())
    });
    wrap_2pi(k * (near.distance - offset) + 0.5 * omega)
}

/// Scroll-wave phase on a grid. Nodes where ω is unavailable hold
/// [`SENTINEL`].
pub fn scroll_phase(
    link: &Link,
    grid: &GridSpec,
    k: f64,
    cfg: &EvalConfig,
    modulation: Option<&Modulation>,
) -> Result<ScalarField> {
    let omega = omega_grid(link, grid, cfg)?;
    scroll_phase_from_omega(link, &omega, k, modulation)
}

/// Scroll-wave phase from a precomputed ω field of the same link.
pub fn scroll_phase_from_omega(
    link: &Link,
    omega: &ScalarField,
    k: f64,
    modulation: Option<&Modulation>,
) -> Result<ScalarField> {
    if !k.is_finite() {
        return Err(Error::Config(format!("wavenumber {k} must be finite")));
    }
    let grid = &omega.grid;
    let values = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let w = omega.values[i];
            if w == SENTINEL {
                SENTINEL
            } else {
                scroll_phase_value(link, &grid.point(i), w, k, modulation)
            }
        })
        .collect();
    let mut meta = omega.meta.clone();
    meta.quantity = "scroll_phase".into();
    Ok(ScalarField {
        grid: grid.clone(),
        values,
        meta,
        issues: omega.issues.clone(),
    })
}

/// Planar director `(sin(ω/4), 0, cos(ω/4))`.
pub fn planar_director_value(omega: f64) -> Vec3 {
    let (s, c) = (0.25 * omega).sin_cos();
    Vec3::new(s, 0.0, c)
}

/// Three-dimensional director
/// `(sin(ω_K/4) cos(ω_L/2), sin(ω_K/4) sin(ω_L/2), cos(ω_K/4))`.
pub fn full_director_value(omega_k: f64, omega_l: f64) -> Vec3 {
    let (s, c) = (0.25 * omega_k).sin_cos();
    let (sl, cl) = (0.5 * omega_l).sin_cos();
    Vec3::new(s * cl, s * sl, c)
}

/// Director field with a disclination along the curve of `omega_field`.
pub fn planar_director(omega_field: &ScalarField) -> VectorField {
    let values = omega_field
        .values
        .par_iter()
        .map(|&w| if w == SENTINEL { Vec3::zeros() } else { planar_director_value(w) })
        .collect();
    let mut meta = omega_field.meta.clone();
    meta.quantity = "director".into();
    VectorField {
        grid: omega_field.grid.clone(),
        values,
        meta,
        issues: omega_field.issues.clone(),
    }
}

/// Director field combining the solid angle of the disclination `K` with
/// that of an auxiliary curve `L`.
pub fn full_director(omega_k: &ScalarField, omega_l: &ScalarField) -> Result<VectorField> {
    if omega_k.grid != omega_l.grid {
        return Err(Error::Grid("the two solid-angle fields are on different grids".into()));
    }
    let values = omega_k
        .values
        .par_iter()
        .zip(&omega_l.values)
        .map(|(&a, &b)| {
            if a == SENTINEL || b == SENTINEL {
                Vec3::zeros()
            } else {
                full_director_value(a, b)
            }
        })
        .collect();
    let mut issues = omega_k.issues.clone();
    for issue in &omega_l.issues {
        if !issues.iter().any(|i| i.index == issue.index) {
            issues.push(NodeIssue {
                index: issue.index,
                kind: IssueKind::Degenerate,
                message: format!("auxiliary curve: {}", issue.message),
            });
        }
    }
    issues.sort_by_key(|i| i.index);
    let mut meta = omega_k.meta.clone();
    meta.quantity = "director".into();
    Ok(VectorField {
        grid: omega_k.grid.clone(),
        values,
        meta,
        issues,
    })
}
