//! Curve files and volume output.
//!
//! Curve files are plain text:
//!
//! ```text
//! # comment
//! components: 2
//! points: 3
//! 0 0 0
//! 1 0 0
//! 0 1 0
//! points: 3
//! ...
//! ```
//!
//! Volumes are written as legacy VTK structured points (binary payload,
//! big-endian as that format requires, x fastest) and as bare little-endian
//! `f64` arrays in the crate's native `k`-fastest order.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::fields::{Modulation, VectorField};
use crate::{Error, GridSpec, Link, OrientedCurve, Result, ScalarField, Vec3};

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines {
            inner: text.lines().enumerate(),
            last: 0,
        }
    }

    /// Next line with comments and surrounding blanks removed.
    fn next_content(&mut self) -> Option<(usize, &'a str)> {
        for (i, raw) in self.inner.by_ref() {
            let line = raw.split('#').next().unwrap_or("").trim();
            self.last = i + 1;
            if !line.is_empty() {
                return Some((i + 1, line));
            }
        }
        None
    }

    fn expect(&mut self, what: &str) -> Result<(usize, &'a str)> {
        let last = self.last;
        self.next_content().ok_or_else(|| Error::Parse {
            line: last + 1,
            message: format!("unexpected end of file, expected {what}"),
        })
    }
}

fn header(line: usize, text: &str, key: &str) -> Result<usize> {
    let value = text
        .strip_prefix(key)
        .and_then(|rest| rest.trim_start().strip_prefix(':'))
        .ok_or_else(|| Error::Parse {
            line,
            message: format!("expected `{key}: <count>`, found {text:?}"),
        })?;
    value.trim().parse().map_err(|_| Error::Parse {
        line,
        message: format!("`{key}` count {:?} is not a nonnegative integer", value.trim()),
    })
}

fn parse_vec3(line: usize, text: &str) -> Result<Vec3> {
    let fields: Vec<&str> = text.split_whitespace().collect();
    if fields.len() != 3 {
        return Err(Error::Parse {
            line,
            message: format!("expected 3 coordinates, found {}", fields.len()),
        });
    }
    let mut v = [0.0f64; 3];
    for (slot, field) in v.iter_mut().zip(&fields) {
        *slot = field.parse().map_err(|_| Error::Parse {
            line,
            message: format!("{field:?} is not a number"),
        })?;
        if !slot.is_finite() {
            return Err(Error::Parse {
                line,
                message: format!("{field:?} is not finite"),
            });
        }
    }
    Ok(Vec3::new(v[0], v[1], v[2]))
}

/// Parses the point lists of a curve file without building curves.
pub fn parse_curve_points(text: &str) -> Result<Vec<Vec<Vec3>>> {
    let mut lines = Lines::new(text);
    let (line, first) = lines.expect("`components: N`")?;
    let count = header(line, first, "components")?;
    if count == 0 {
        return Err(Error::Parse {
            line,
            message: "a curve file needs at least one component".into(),
        });
    }
    let mut components = Vec::with_capacity(count);
    for _ in 0..count {
        let (line, text) = lines.expect("`points: M`")?;
        let m = header(line, text, "points")?;
        let mut pts = Vec::with_capacity(m);
        for _ in 0..m {
            let (line, text) = lines.expect("a point `x y z`")?;
            pts.push(parse_vec3(line, text)?);
        }
        components.push(pts);
    }
    if let Some((line, text)) = lines.next_content() {
        return Err(Error::Parse {
            line,
            message: format!("unexpected content after the last component: {text:?}"),
        });
    }
    Ok(components)
}

/// Parses curve-file content into a link. The listed order of points is the
/// orientation of each component.
pub fn load_link(text: &str) -> Result<Link> {
    let components = parse_curve_points(text)?
        .into_iter()
        .enumerate()
        .map(|(c, pts)| {
            OrientedCurve::new(pts).map_err(|e| match e {
                Error::Validation(msg) => Error::Validation(format!("component {c}: {msg}")),
                other => other,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Link::new(components)
}

pub fn read_link(path: &Path) -> Result<Link> {
    load_link(&fs::read_to_string(path)?)
}

/// Serializes a link; floats are written in shortest round-trip form.
pub fn write_curve_file(link: &Link) -> String {
    let mut out = format!("components: {}\n", link.len());
    for c in link.components() {
        out.push_str(&format!("points: {}\n", c.len()));
        for p in c.points() {
            out.push_str(&format!("{} {} {}\n", p.x, p.y, p.z));
        }
    }
    out
}

/// Parses a list of evaluation points, one `x y z` per line.
pub fn parse_points(text: &str) -> Result<Vec<Vec3>> {
    let mut lines = Lines::new(text);
    let mut out = Vec::new();
    while let Some((line, content)) = lines.next_content() {
        out.push(parse_vec3(line, content)?);
    }
    Ok(out)
}

/// Parses a modulation table, one `s m` pair per line.
pub fn parse_modulation(text: &str) -> Result<Modulation> {
    let mut lines = Lines::new(text);
    let mut knots = Vec::new();
    while let Some((line, content)) = lines.next_content() {
        let fields: Vec<&str> = content.split_whitespace().collect();
        let parsed: Option<Vec<f64>> = fields.iter().map(|f| f.parse().ok()).collect();
        match parsed.as_deref() {
            Some([s, m]) => knots.push((*s, *m)),
            _ => {
                return Err(Error::Parse {
                    line,
                    message: format!("expected `arclength offset`, found {content:?}"),
                })
            }
        }
    }
    Modulation::new(knots)
}

fn vtk_header(grid: &GridSpec, title: &str) -> String {
    let [nx, ny, nz] = grid.dims;
    let o = grid.origin;
    let h = grid.spacing;
    format!(
        "# vtk DataFile Version 3.0\n{title}\nBINARY\nDATASET STRUCTURED_POINTS\nDIMENSIONS {nx} {ny} {nz}\nORIGIN {} {} {}\nSPACING {h} {h} {h}\nPOINT_DATA {}\n",
        o.x,
        o.y,
        o.z,
        grid.len()
    )
}

/// Appends one scalar array in VTK order (x fastest, big-endian).
fn vtk_scalars(out: &mut Vec<u8>, grid: &GridSpec, name: &str, value: impl Fn(usize) -> f64) {
    out.extend_from_slice(format!("SCALARS {name} double 1\nLOOKUP_TABLE default\n").as_bytes());
    let [nx, ny, nz] = grid.dims;
    out.reserve(grid.len() * 8 + 1);
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                out.extend_from_slice(&value(grid.index(i, j, k)).to_be_bytes());
            }
        }
    }
    out.push(b'\n');
}

/// Legacy VTK structured-points file with one scalar array named `name`.
pub fn vtk_scalar_bytes(field: &ScalarField, name: &str) -> Vec<u8> {
    let mut out = vtk_header(&field.grid, &format!("{} curve {}", field.meta.quantity, field.meta.curve_hash)).into_bytes();
    vtk_scalars(&mut out, &field.grid, name, |i| field.values[i]);
    out
}

/// Legacy VTK file with the three components as scalars `dx`, `dy`, `dz`.
pub fn vtk_vector_bytes(field: &VectorField) -> Vec<u8> {
    let mut out = vtk_header(&field.grid, &format!("{} curve {}", field.meta.quantity, field.meta.curve_hash)).into_bytes();
    for (c, name) in ["dx", "dy", "dz"].iter().enumerate() {
        vtk_scalars(&mut out, &field.grid, name, |i| field.values[i][c]);
    }
    out
}

/// Little-endian `f64` values in grid order (`k` fastest).
pub fn raw_scalar_bytes(field: &ScalarField) -> Vec<u8> {
    field.values.iter().flat_map(|v| v.to_le_bytes()).collect()
}

/// Three little-endian `f64` blocks (x, y, then z components), each in grid
/// order.
pub fn raw_vector_bytes(field: &VectorField) -> Vec<u8> {
    (0..3)
        .flat_map(|c| field.values.iter().flat_map(move |v| v[c].to_le_bytes()))
        .collect()
}

/// Reads a little-endian `f64` array.
pub fn read_raw(path: &Path) -> Result<Vec<f64>> {
    let bytes = fs::read(path)?;
    if bytes.len() % 8 != 0 {
        return Err(Error::Validation(format!(
            "{} is not a whole number of f64 values",
            path.display()
        )));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect())
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(bytes)?;
    Ok(())
}
