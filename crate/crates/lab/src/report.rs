//! CSV and SVG output of sweep results.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use shellkorn_core::operators::{BcTag, GradKind};

use crate::config::{Format, Mode};
use crate::error::{LabError, Result};
use crate::fit::FitResult;
use crate::sweep::{SweepResult, SweepRow};

pub const HEADER: &str = "h,n,mode,bc,kind,value,iters,residual,wall_ms";

fn bc_name(bc: BcTag) -> &'static str {
    match bc {
        BcTag::V1 => "V1",
        BcTag::V2 => "V2",
        BcTag::V3 => "V3",
        BcTag::PeriodicOnly => "periodic",
    }
}

fn kind_name(k: GradKind) -> &'static str {
    match k {
        GradKind::Full => "full",
        GradKind::Simplified => "simplified",
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Trailing `# slope=… r2=… seed=…` line.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Footer {
    pub slope: f64,
    pub r_squared: f64,
    pub seed: u64,
}

pub fn csv_string(rows: &[&SweepRow], fit: Option<FitResult>, seed: u64) -> String {
    let mut out = String::new();
    out.push_str(HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            num(r.h),
            r.n,
            r.mode.name(),
            bc_name(r.bc),
            kind_name(r.kind),
            num(r.value),
            r.iters,
            num(r.residual),
            num(r.wall_ms)
        );
    }
    let (slope, r2) = fit.map_or((f64::NAN, f64::NAN), |f| (f.slope, f.r_squared));
    let _ = writeln!(out, "# slope={} r2={} seed={seed}", num(slope), num(r2));
    out
}

pub fn parse_csv(src: &str) -> Result<(Vec<SweepRow>, Footer)> {
    let bad = |line: usize, msg: String| LabError::config("<csv>", line, msg);
    let mut lines = src.lines().enumerate().map(|(i, l)| (i + 1, l));
    match lines.next() {
        Some((_, h)) if h == HEADER => {}
        _ => return Err(bad(1, format!("expected header {HEADER:?}"))),
    }
    let mut rows = Vec::new();
    let mut footer = None;
    for (ln, line) in lines {
        if let Some(rest) = line.strip_prefix("# ") {
            let mut f = Footer { slope: f64::NAN, r_squared: f64::NAN, seed: 0 };
            for kv in rest.split_whitespace() {
                let (k, v) = kv.split_once('=').ok_or_else(|| bad(ln, format!("bad footer item {kv:?}")))?;
                let perr = |_| bad(ln, format!("bad footer value {v:?}"));
                match k {
                    "slope" => f.slope = v.parse().map_err(perr)?,
                    "r2" => f.r_squared = v.parse().map_err(perr)?,
                    "seed" => f.seed = v.parse().map_err(|_| bad(ln, format!("bad seed {v:?}")))?,
                    _ => return Err(bad(ln, format!("unknown footer key {k:?}"))),
                }
            }
            footer = Some(f);
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 9 {
            return Err(bad(ln, format!("expected 9 columns, found {}", cols.len())));
        }
        let f = |i: usize| cols[i].parse::<f64>().map_err(|_| bad(ln, format!("bad number {:?}", cols[i])));
        let u = |i: usize| cols[i].parse::<usize>().map_err(|_| bad(ln, format!("bad integer {:?}", cols[i])));
        rows.push(SweepRow {
            h: f(0)?,
            n: u(1)? as u32,
            mode: Mode::parse(cols[2]).ok_or_else(|| bad(ln, format!("bad mode {:?}", cols[2])))?,
            bc: match cols[3] {
                "V1" => BcTag::V1,
                "V2" => BcTag::V2,
                "V3" => BcTag::V3,
                "periodic" => BcTag::PeriodicOnly,
                other => return Err(bad(ln, format!("bad bc {other:?}"))),
            },
            kind: match cols[4] {
                "full" => GradKind::Full,
                "simplified" => GradKind::Simplified,
                other => return Err(bad(ln, format!("bad kind {other:?}"))),
            },
            value: f(5)?,
            iters: u(6)?,
            residual: f(7)?,
            wall_ms: f(8)?,
        });
    }
    let footer = footer.ok_or_else(|| bad(src.lines().count(), "missing footer".into()))?;
    Ok((rows, footer))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Log-log scatter of `(h, value)` with the fitted line.
pub fn svg_string(rows: &[&SweepRow], fit: Option<FitResult>, title: &str) -> String {
    let (w, hgt, m) = (640.0, 480.0, 60.0);
    let xs: Vec<f64> = rows.iter().map(|r| r.h.log10()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.value.max(f64::MIN_POSITIVE).log10()).collect();
    let span = |v: &[f64]| {
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if hi - lo < 1e-9 { (lo - 0.5, hi + 0.5) } else { (lo - 0.05 * (hi - lo), hi + 0.05 * (hi - lo)) }
    };
    let ((x0, x1), (y0, y1)) = (span(&xs), span(&ys));
    let px = |x: f64| m + (x - x0) / (x1 - x0) * (w - 2.0 * m);
    let py = |y: f64| hgt - m - (y - y0) / (y1 - y0) * (hgt - 2.0 * m);
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{hgt}" viewBox="0 0 {w} {hgt}">"#);
    let _ = writeln!(out, r#"  <rect x="0" y="0" width="{w}" height="{hgt}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"  <path d="M {m} {m} L {m} {b} L {r} {b}" fill="none" stroke="black"/>"#,
        b = hgt - m,
        r = w - m
    );
    let _ = writeln!(out, r#"  <text x="{}" y="30" text-anchor="middle" font-size="16">{}</text>"#, w / 2.0, escape(title));
    let _ = writeln!(out, r#"  <text x="{}" y="{}" text-anchor="middle" font-size="12">log10 h</text>"#, w / 2.0, hgt - 20.0);
    let _ = writeln!(
        out,
        r#"  <text x="20" y="{}" font-size="12" transform="rotate(-90 20 {})" text-anchor="middle">log10 value</text>"#,
        hgt / 2.0,
        hgt / 2.0
    );
    if let Some(f) = fit {
        let line = |x: f64| (f.intercept + f.slope * x * std::f64::consts::LN_10) / std::f64::consts::LN_10;
        let _ = writeln!(
            out,
            r#"  <line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="steelblue" stroke-width="1.5"/>"#,
            px(x0),
            py(line(x0)),
            px(x1),
            py(line(x1))
        );
        let _ = writeln!(
            out,
            r#"  <text x="{}" y="{}" font-size="12">slope {:.4}, r² {:.5}</text>"#,
            m + 10.0,
            m + 15.0,
            f.slope,
            f.r_squared
        );
    }
    for (x, y) in xs.iter().zip(&ys) {
        let _ = writeln!(out, r#"  <circle cx="{:.2}" cy="{:.2}" r="4" fill="firebrick"/>"#, px(*x), py(*y));
    }
    out.push_str("</svg>\n");
    out
}

/// Writes one CSV and/or SVG per mode into `dir` as `<prefix>-<mode>.<ext>`.
pub fn emit_report(result: &SweepResult, dir: &Path, prefix: &str, format: Format) -> Result<Vec<PathBuf>> {
    if result.rows.is_empty() {
        return Err(LabError::InsufficientData(0));
    }
    std::fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))?;
    let mut written = Vec::new();
    for mode in result.modes() {
        let rows: Vec<&SweepRow> = result.rows_for(mode).collect();
        let fit = result.fit(mode).ok();
        let mut outputs = Vec::new();
        if format.csv() {
            outputs.push(("csv", csv_string(&rows, fit, result.seed)));
        }
        if format.svg() {
            outputs.push(("svg", svg_string(&rows, fit, &format!("{prefix} ({})", mode.name()))));
        }
        for (ext, body) in outputs {
            let path = dir.join(format!("{prefix}-{}.{ext}", mode.name()));
            std::fs::write(&path, body).map_err(|e| LabError::io(&path, e))?;
            written.push(path);
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows() -> Vec<SweepRow> {
        (0..5)
            .map(|i| SweepRow {
                h: 0.1 / 2f64.powi(i),
                n: 1 + i as u32,
                mode: Mode::Eig,
                bc: BcTag::V2,
                kind: GradKind::Full,
                value: 0.1f64.powi(i + 1) * std::f64::consts::PI,
                iters: 10 + i as usize,
                residual: 1.0 / 3.0 * 1e-9,
                wall_ms: 12.345678901234567,
            })
            .collect()
    }

    #[test]
    fn csv_round_trips_exactly() {
        let rows = rows();
        let refs: Vec<&SweepRow> = rows.iter().collect();
        let fit = FitResult { slope: 1.2345678901234567, intercept: 0.5, r_squared: 0.99 };
        let text = csv_string(&refs, Some(fit), 42);
        assert_eq!(text.lines().count(), 7);
        assert!(text.lines().last().unwrap().starts_with("# slope="));
        let (back, footer) = parse_csv(&text).unwrap();
        assert_eq!(back, rows);
        assert_eq!(footer, Footer { slope: fit.slope, r_squared: 0.99, seed: 42 });
    }

    #[test]
    fn svg_is_a_single_document() {
        let rows = rows();
        let refs: Vec<&SweepRow> = rows.iter().collect();
        let svg = svg_string(&refs, None, "a < b");
        assert!(svg.starts_with("<?xml") && svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<circle").count(), 5);
        assert!(svg.contains("a &lt; b"));
    }
}
