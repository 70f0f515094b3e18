//! Sampled closed curves.
//!
//! ```text
//! planar 4
//! 1 0
//! 0 1
//! -1 0
//! 0 -1
//! ```
//!
//! The header names the curve kind (`planar` or `spherical`) and the number
//! of rows; each row holds 2 or 3 coordinates. The last point joins the
//! first. Lines starting with `#` and blank lines are skipped.

use std::path::Path;

use shellkorn_core::geometry::{CurveKind, PlanarCurve, Vec3};

use crate::error::{LabError, Result};

pub fn parse_curve(src: &str, origin: &str) -> Result<(CurveKind, Vec<Vec3>)> {
    let mut lines = src
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hline, header) = lines.next().ok_or_else(|| LabError::config(origin, 1, "empty curve file"))?;
    let mut words = header.split_whitespace();
    let kind = match words.next() {
        Some("planar") => CurveKind::Planar,
        Some("spherical") => CurveKind::Spherical,
        other => {
            return Err(LabError::config(
                origin,
                hline,
                format!("expected `planar N` or `spherical N`, found {:?}", other.unwrap_or("")),
            ))
        }
    };
    let n: usize = words
        .next()
        .and_then(|w| w.parse().ok())
        .ok_or_else(|| LabError::config(origin, hline, "missing or invalid point count"))?;
    if words.next().is_some() {
        return Err(LabError::config(origin, hline, "trailing tokens after point count"));
    }
    let mut pts = Vec::with_capacity(n);
    let mut last = hline;
    for (ln, line) in lines {
        last = ln;
        if pts.len() == n {
            return Err(LabError::config(origin, ln, format!("more than the declared {n} points")));
        }
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|w| w.parse::<f64>().map_err(|_| LabError::config(origin, ln, format!("bad number {w:?}"))))
            .collect::<Result<_>>()?;
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(LabError::config(origin, ln, "non-finite coordinate"));
        }
        pts.push(match vals.as_slice() {
            [x, y] => [*x, *y, 0.0],
            [x, y, z] => [*x, *y, *z],
            _ => return Err(LabError::config(origin, ln, format!("expected 2 or 3 coordinates, got {}", vals.len()))),
        });
    }
    if pts.len() != n {
        return Err(LabError::config(origin, last, format!("declared {n} points, found {}", pts.len())));
    }
    Ok((kind, pts))
}

pub fn read_curve(path: &Path) -> Result<PlanarCurve> {
    let src = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
    let (kind, pts) = parse_curve(&src, &path.display().to_string())?;
    Ok(PlanarCurve::from_points(kind, pts)?)
}

pub fn format_curve(kind: CurveKind, pts: &[Vec3]) -> String {
    let mut out = String::new();
    let name = match kind {
        CurveKind::Planar => "planar",
        CurveKind::Spherical => "spherical",
    };
    out.push_str(&format!("{name} {}\n", pts.len()));
    for p in pts {
        match kind {
            CurveKind::Planar => out.push_str(&format!("{:.17e} {:.17e}\n", p[0], p[1])),
            CurveKind::Spherical => out.push_str(&format!("{:.17e} {:.17e} {:.17e}\n", p[0], p[1], p[2])),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_square() {
        let (kind, pts) = parse_curve("# unit\nplanar 4\n1 0\n0 1\n\n-1 0\n0 -1\n", "sq").unwrap();
        assert_eq!(kind, CurveKind::Planar);
        assert_eq!(pts[2], [-1.0, 0.0, 0.0]);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = parse_curve("planar 3\n1 0\n0 x\n-1 0\n", "f").unwrap_err();
        assert!(matches!(err, LabError::Config { line: 3, .. }), "{err}");
        let err = parse_curve("planar 3\n1 0\n0 1\n", "f").unwrap_err();
        assert!(matches!(err, LabError::Config { line: 3, .. }), "{err}");
        let err = parse_curve("ellipse 3\n", "f").unwrap_err();
        assert!(matches!(err, LabError::Config { line: 1, .. }), "{err}");
        let err = parse_curve("planar 1\n1 2 3 4\n", "f").unwrap_err();
        assert!(matches!(err, LabError::Config { line: 2, .. }), "{err}");
    }

    #[test]
    fn formatted_curve_reads_back() {
        let pts: Vec<Vec3> = (0..7).map(|i| [(i as f64).cos() / 3.0, (i as f64).sin(), 0.0]).collect();
        let (_, back) = parse_curve(&format_curve(CurveKind::Planar, &pts), "f").unwrap();
        assert_eq!(back, pts);
    }
}
