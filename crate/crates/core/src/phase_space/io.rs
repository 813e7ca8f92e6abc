//! Grid serialization: CSV (`x,p,w`, x-major), a JSON descriptor with the
//! values inline, and PGM/PPM heat maps.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::grid::{GridSpec, WignerGrid, CONVENTION};

pub fn write_csv<T: Real, W: Write>(grid: &WignerGrid<T>, mut w: W) -> std::io::Result<()> {
    writeln!(w, "x,p,w")?;
    let xs = grid.spec.xs();
    let ps = grid.spec.ps();
    for (i, x) in xs.iter().enumerate() {
        for (j, p) in ps.iter().enumerate() {
            writeln!(w, "{:.16e},{:.16e},{:.16e}", x.as_f64(), p.as_f64(), grid.at(i, j).as_f64())?;
        }
    }
    Ok(())
}

/// Reads a grid written by [`write_csv`]; the lattice is recovered from the
/// node coordinates.
pub fn read_csv<R: BufRead>(r: R) -> Result<WignerGrid<f64>> {
    let mut lines = r.lines();
    let head = lines.next().ok_or_else(|| Error::input("empty grid CSV"))?;
    let head = head.map_err(|e| Error::input(e.to_string()))?;
    if head.trim() != "x,p,w" {
        return Err(Error::input(format!("expected header `x,p,w`, got `{}`", head.trim())));
    }
    let mut rows = Vec::new();
    for (n, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::input(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<f64> = line
            .split(',')
            .map(|c| c.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::input(format!("line {}: {e}", n + 2)))?;
        if cells.len() != 3 {
            return Err(Error::input(format!("line {}: expected 3 columns", n + 2)));
        }
        rows.push((cells[0], cells[1], cells[2]));
    }
    if rows.is_empty() {
        return Err(Error::input("grid CSV has no rows"));
    }
    let x_first = rows[0].0;
    let n_p = rows.iter().take_while(|r| r.0 == x_first).count();
    if n_p < 2 || rows.len() % n_p != 0 {
        return Err(Error::input("grid CSV is not a full x-major lattice"));
    }
    let n_x = rows.len() / n_p;
    let spec = GridSpec {
        x_min: rows[0].0,
        x_max: rows[rows.len() - 1].0,
        n_x,
        p_min: rows[0].1,
        p_max: rows[n_p - 1].1,
        n_p,
    };
    spec.validate()?;
    Ok(WignerGrid { spec, values: rows.into_iter().map(|r| r.2).collect(), warnings: Vec::new() })
}

#[derive(Serialize, Deserialize)]
struct Descriptor {
    convention: String,
    x_min: f64,
    x_max: f64,
    n_x: usize,
    p_min: f64,
    p_max: f64,
    n_p: usize,
    /// `values[i*n_p + j] = W(x_i, p_j)`.
    values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    warnings: Vec<String>,
}

pub fn write_json<T: Real, W: Write>(grid: &WignerGrid<T>, w: W) -> Result<()> {
    let s = grid.spec;
    let d = Descriptor {
        convention: CONVENTION.to_string(),
        x_min: s.x_min.as_f64(),
        x_max: s.x_max.as_f64(),
        n_x: s.n_x,
        p_min: s.p_min.as_f64(),
        p_max: s.p_max.as_f64(),
        n_p: s.n_p,
        values: grid.values.iter().map(|v| v.as_f64()).collect(),
        warnings: grid.warnings.clone(),
    };
    serde_json::to_writer(w, &d).map_err(|e| Error::input(e.to_string()))
}

pub fn read_json<R: std::io::Read>(r: R) -> Result<WignerGrid<f64>> {
    let d: Descriptor = serde_json::from_reader(r).map_err(|e| Error::input(e.to_string()))?;
    if d.convention != CONVENTION {
        return Err(Error::input(format!("unsupported convention `{}`", d.convention)));
    }
    let spec = GridSpec { x_min: d.x_min, x_max: d.x_max, n_x: d.n_x, p_min: d.p_min, p_max: d.p_max, n_p: d.n_p };
    spec.validate()?;
    if d.values.len() != spec.len() {
        return Err(Error::input(format!("expected {} values, found {}", spec.len(), d.values.len())));
    }
    Ok(WignerGrid { spec, values: d.values, warnings: d.warnings })
}

/// Pixel `(row, col)` ↔ `(p, x)` with `p` increasing upwards.
fn pixels<T: Real>(grid: &WignerGrid<T>) -> impl Iterator<Item = f64> + '_ {
    let (nx, np) = (grid.spec.n_x, grid.spec.n_p);
    (0..np).rev().flat_map(move |j| (0..nx).map(move |i| grid.at(i, j).as_f64()))
}

/// Binary greyscale, black at min(W), white at max(W).
pub fn render_pgm<T: Real, W: Write>(grid: &WignerGrid<T>, mut w: W) -> std::io::Result<()> {
    let lo = grid.values.iter().fold(f64::INFINITY, |m, v| m.min(v.as_f64()));
    let hi = grid.values.iter().fold(f64::NEG_INFINITY, |m, v| m.max(v.as_f64()));
    let range = if hi > lo { hi - lo } else { 1.0 };
    write!(w, "P5\n{} {}\n255\n", grid.spec.n_x, grid.spec.n_p)?;
    let bytes: Vec<u8> = pixels(grid).map(|v| (255.0 * (v - lo) / range).round() as u8).collect();
    w.write_all(&bytes)
}

/// Binary colour, diverging around zero: blue negative, white zero, red
/// positive, saturating at max|W|.
pub fn render_ppm<T: Real, W: Write>(grid: &WignerGrid<T>, mut w: W) -> std::io::Result<()> {
    let top = grid.values.iter().fold(0.0f64, |m, v| m.max(v.as_f64().abs()));
    let top = if top > 0.0 { top } else { 1.0 };
    write!(w, "P6\n{} {}\n255\n", grid.spec.n_x, grid.spec.n_p)?;
    let mut bytes = Vec::with_capacity(3 * grid.spec.len());
    for v in pixels(grid) {
        let s = (v / top).clamp(-1.0, 1.0);
        let fade = (255.0 * (1.0 - s.abs())).round() as u8;
        if s >= 0.0 {
            bytes.extend_from_slice(&[255, fade, fade]);
        } else {
            bytes.extend_from_slice(&[fade, fade, 255]);
        }
    }
    w.write_all(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::{wigner_state, StateKind};

    #[test]
    fn csv_and_json_round_trip() {
        let spec = GridSpec { x_min: -3.0, x_max: 5.0, n_x: 17, p_min: -2.0, p_max: 2.5, n_p: 9 };
        let w = wigner_state(StateKind::Cat { alpha: 1.1 }, spec).unwrap();

        let mut buf = Vec::new();
        write_csv(&w, &mut buf).unwrap();
        let back = read_csv(&buf[..]).unwrap();
        assert_eq!(back.values, w.values);
        assert_eq!((back.spec.n_x, back.spec.n_p), (17, 9));
        assert_eq!((back.spec.x_max, back.spec.p_max), (5.0, 2.5));

        let mut buf = Vec::new();
        write_json(&w, &mut buf).unwrap();
        let back = read_json(&buf[..]).unwrap();
        assert_eq!(back, w);
    }

    #[test]
    fn images_have_expected_size() {
        let w = wigner_state(StateKind::Cat { alpha: 2.0 }, GridSpec::square(8.0, 40)).unwrap();
        let mut pgm = Vec::new();
        render_pgm(&w, &mut pgm).unwrap();
        assert!(pgm.starts_with(b"P5\n40 40\n255\n"));
        assert_eq!(pgm.len(), "P5\n40 40\n255\n".len() + 1600);
        let mut ppm = Vec::new();
        render_ppm(&w, &mut ppm).unwrap();
        assert_eq!(ppm.len(), "P6\n40 40\n255\n".len() + 4800);
    }

    #[test]
    fn malformed_csv_is_rejected() {
        assert!(read_csv(&b"a,b,c\n1,2,3\n"[..]).is_err());
        assert!(read_csv(&b"x,p,w\n1,2\n"[..]).is_err());
    }
}
