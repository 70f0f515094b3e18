//! Experiment configuration files.
//!
//! Flat `key = value` lines grouped under `[surface]`, `[experiment]`,
//! `[eig]` and `[output]`. `#` starts a comment. Lists are separated by
//! commas or whitespace.
//!
//! ```text
//! [surface]
//! preset = cylinder-circular radius=1 length=4
//!
//! [experiment]
//! mode = both
//! bc = V2
//! kind = full
//! n = 2, 3, 4, 5, 6
//!
//! [eig]
//! tol = 1e-8
//!
//! [output]
//! dir = out
//! format = both
//! ```
//!
//! A surface is one of: `preset = NAME [key=value ...]`; `curve = PATH`
//! with `extrude = cylinder|cone`, `zmin`, `zmax`; or the profiles `B` (in
//! `z`), `a`, `b`, `c` (in `theta`) with `period`, `zmin`, `zmax`.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_4, TAU};
use std::path::{Path, PathBuf};

use shellkorn_core::operators::{BcTag, GradKind};

use crate::error::{LabError, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum Preset {
    CylinderCircular { radius: f64, length: f64 },
    CylinderEllipse { ax: f64, ay: f64, length: f64, samples: usize },
    ConeCircle { colatitude: f64, zmin: f64, zmax: f64 },
    /// Convex cylinder with two straight strips of width `flat`.
    CylinderFlatPatch { flat: f64, length: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Extrusion {
    Cylinder,
    Cone,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SurfaceSpec {
    Preset(Preset),
    Profiles { b_z: String, a: String, b: String, c: String, period: f64, z_range: (f64, f64) },
    Curve { path: PathBuf, extrude: Extrusion, z_range: (f64, f64) },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mode {
    Ansatz,
    Eig,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Ansatz => "ansatz",
            Mode::Eig => "eig",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "ansatz" => Some(Mode::Ansatz),
            "eig" => Some(Mode::Eig),
            _ => None,
        }
    }
}

/// Which optimal field the ansatz mode builds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AnsatzChoice {
    /// Separable case when possible, else the flat-strip plate field on the
    /// flat-patch preset.
    Auto,
    Separable,
    /// Non-separable field supported on a θ-interval.
    General { interval: (f64, f64) },
    /// Plate bending field supported on a flat θ-strip.
    Kirchhoff { support: Option<(f64, f64)> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Svg,
    Both,
}

impl Format {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "csv" => Some(Format::Csv),
            "svg" => Some(Format::Svg),
            "both" => Some(Format::Both),
            _ => None,
        }
    }
    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }
    pub fn svg(self) -> bool {
        matches!(self, Format::Svg | Format::Both)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct ResolutionOverrides {
    pub n_t: Option<usize>,
    pub n_theta: Option<usize>,
    pub n_z: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub prefix: String,
    pub format: Format,
    /// Record wall times; with `false` the CSV is byte-reproducible.
    pub timings: bool,
    /// Write each assembled form pair as a binary dump.
    pub dump: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("."), prefix: "sweep".into(), format: Format::Csv, timings: true, dump: false }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub surface: SurfaceSpec,
    pub bc: BcTag,
    pub kind: GradKind,
    /// Strictly decreasing, all in `(0, 1)`.
    pub h: Vec<f64>,
    pub modes: Vec<Mode>,
    pub ansatz: AnsatzChoice,
    pub resolution: ResolutionOverrides,
    pub tol: f64,
    pub maxit: usize,
    pub block: usize,
    pub seed: u64,
    pub output: OutputConfig,
}

impl ExperimentConfig {
    /// A sweep over `h` on `surface` with default settings for the rest.
    pub fn new(surface: SurfaceSpec, h: Vec<f64>, modes: Vec<Mode>) -> Self {
        Self {
            surface,
            bc: BcTag::V2,
            kind: GradKind::Full,
            h,
            modes,
            ansatz: AnsatzChoice::Auto,
            resolution: ResolutionOverrides::default(),
            tol: 1e-8,
            maxit: 500,
            block: 3,
            seed: 0x5eed,
            output: OutputConfig::default(),
        }
    }

    /// `h = n⁻⁴` for each `n`.
    pub fn h_from_n(ns: &[u32]) -> Vec<f64> {
        ns.iter().map(|&n| (n as f64).powi(-4)).collect()
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.h.is_empty() {
            return Err("h list is empty".into());
        }
        if let Some(h) = self.h.iter().find(|h| !(**h > 0.0 && **h < 1.0)) {
            return Err(format!("h = {h} is outside (0, 1)"));
        }
        if self.h.windows(2).any(|w| w[1] >= w[0]) {
            return Err("h values must be strictly decreasing".into());
        }
        if self.modes.is_empty() {
            return Err("no mode selected".into());
        }
        if let AnsatzChoice::General { interval: (lo, hi) } = self.ansatz {
            if !(lo < hi) {
                return Err(format!("case-2 interval ({lo}, {hi}) is empty"));
            }
        }
        if let AnsatzChoice::Kirchhoff { support: None } = self.ansatz {
            if !matches!(self.surface, SurfaceSpec::Preset(Preset::CylinderFlatPatch { .. })) {
                return Err("kirchhoff ansatz needs `support` unless the surface is cylinder-flat-patch".into());
            }
        }
        if !(self.tol > 0.0) || self.maxit == 0 || self.block == 0 {
            return Err("eig tol, maxit and block must be positive".into());
        }
        Ok(())
    }
}

struct Entry {
    line: usize,
    value: String,
    used: bool,
}

type Section = BTreeMap<String, Entry>;

struct Sections {
    origin: String,
    map: BTreeMap<String, Section>,
}

impl Sections {
    fn parse(src: &str, origin: &str) -> Result<Self> {
        let mut map: BTreeMap<String, Section> = BTreeMap::new();
        let mut current: Option<String> = None;
        for (i, raw) in src.lines().enumerate() {
            let ln = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| LabError::config(origin, ln, "unterminated section header"))?
                    .trim();
                if !matches!(name, "surface" | "experiment" | "eig" | "output") {
                    return Err(LabError::config(origin, ln, format!("unknown section [{name}]")));
                }
                if map.contains_key(name) {
                    return Err(LabError::config(origin, ln, format!("section [{name}] appears twice")));
                }
                map.insert(name.to_string(), Section::new());
                current = Some(name.to_string());
                continue;
            }
            let sec = current.as_ref().ok_or_else(|| LabError::config(origin, ln, "key outside of any section"))?;
            let (k, v) = line.split_once('=').ok_or_else(|| LabError::config(origin, ln, "expected `key = value`"))?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() {
                return Err(LabError::config(origin, ln, "empty key"));
            }
            let section = map.get_mut(sec).expect("section exists");
            if section.contains_key(k) {
                return Err(LabError::config(origin, ln, format!("duplicate key `{k}`")));
            }
            section.insert(k.to_string(), Entry { line: ln, value: v.to_string(), used: false });
        }
        Ok(Self { origin: origin.to_string(), map })
    }

    fn take(&mut self, sec: &str, key: &str) -> Option<(usize, String)> {
        let e = self.map.get_mut(sec)?.get_mut(key)?;
        e.used = true;
        Some((e.line, e.value.clone()))
    }

    fn err(&self, line: usize, msg: impl Into<String>) -> LabError {
        LabError::config(&self.origin, line, msg)
    }

    fn num<T: std::str::FromStr>(&mut self, sec: &str, key: &str) -> Result<Option<T>> {
        match self.take(sec, key) {
            None => Ok(None),
            Some((ln, v)) => v.parse().map(Some).map_err(|_| self.err(ln, format!("`{key}`: cannot parse {v:?}"))),
        }
    }

    fn list<T: std::str::FromStr>(&mut self, sec: &str, key: &str) -> Result<Option<(usize, Vec<T>)>> {
        match self.take(sec, key) {
            None => Ok(None),
            Some((ln, v)) => {
                let items = v
                    .split(|c: char| c == ',' || c.is_whitespace())
                    .filter(|s| !s.is_empty())
                    .map(|s| s.parse().map_err(|_| self.err(ln, format!("`{key}`: cannot parse {s:?}"))))
                    .collect::<Result<Vec<T>>>()?;
                Ok(Some((ln, items)))
            }
        }
    }

    fn pair(&mut self, sec: &str, key: &str) -> Result<Option<(f64, f64)>> {
        match self.list::<f64>(sec, key)? {
            None => Ok(None),
            Some((_, v)) if v.len() == 2 => Ok(Some((v[0], v[1]))),
            Some((ln, _)) => Err(self.err(ln, format!("`{key}` needs two numbers"))),
        }
    }

    fn finish(&self) -> Result<()> {
        for sec in self.map.values() {
            if let Some((k, e)) = sec.iter().find(|(_, e)| !e.used) {
                return Err(self.err(e.line, format!("unknown key `{k}`")));
            }
        }
        Ok(())
    }
}

fn parse_preset(s: &mut Sections, line: usize, value: &str) -> Result<Preset> {
    let mut words = value.split_whitespace();
    let name = words.next().unwrap_or("");
    let mut params: BTreeMap<String, f64> = BTreeMap::new();
    for w in words {
        let (k, v) = w.split_once('=').ok_or_else(|| s.err(line, format!("preset parameter {w:?} is not key=value")))?;
        let v: f64 = v.parse().map_err(|_| s.err(line, format!("preset parameter {k}: cannot parse {v:?}")))?;
        params.insert(k.to_string(), v);
    }
    // parameters may also be given as keys of [surface]
    for key in ["radius", "length", "ax", "ay", "samples", "colatitude", "zmin", "zmax", "flat"] {
        if let Some((ln, v)) = s.take("surface", key) {
            let v: f64 = v.parse().map_err(|_| s.err(ln, format!("`{key}`: cannot parse {v:?}")))?;
            if params.insert(key.to_string(), v).is_some() {
                return Err(s.err(ln, format!("`{key}` given twice")));
            }
        }
    }
    let mut get = |k: &str, d: f64| params.remove(k).unwrap_or(d);
    let preset = match name {
        "cylinder-circular" => Preset::CylinderCircular { radius: get("radius", 1.0), length: get("length", 4.0) },
        "cylinder-ellipse" => Preset::CylinderEllipse {
            ax: get("ax", 1.5),
            ay: get("ay", 1.0),
            length: get("length", 4.0),
            samples: get("samples", 2048.0) as usize,
        },
        "cone-circle" => {
            Preset::ConeCircle { colatitude: get("colatitude", FRAC_PI_4), zmin: get("zmin", 1.0), zmax: get("zmax", 2.0) }
        }
        "cylinder-flat-patch" => Preset::CylinderFlatPatch { flat: get("flat", 2.0), length: get("length", 4.0) },
        other => return Err(s.err(line, format!("unknown preset {other:?}"))),
    };
    if let Some(k) = params.keys().next() {
        return Err(s.err(line, format!("preset {name} has no parameter `{k}`")));
    }
    Ok(preset)
}

fn parse_surface(s: &mut Sections, base: &Path) -> Result<SurfaceSpec> {
    if !s.map.contains_key("surface") {
        return Err(s.err(1, "missing [surface] section"));
    }
    if let Some((ln, v)) = s.take("surface", "preset") {
        return Ok(SurfaceSpec::Preset(parse_preset(s, ln, &v)?));
    }
    let z_range = |s: &mut Sections| -> Result<(f64, f64)> {
        let lo = s.num::<f64>("surface", "zmin")?.unwrap_or(0.0);
        let hi = s.num::<f64>("surface", "zmax")?.unwrap_or(1.0);
        Ok((lo, hi))
    };
    if let Some((ln, v)) = s.take("surface", "curve") {
        let extrude = match s.take("surface", "extrude") {
            None => Extrusion::Cylinder,
            Some((_, e)) if e == "cylinder" => Extrusion::Cylinder,
            Some((_, e)) if e == "cone" => Extrusion::Cone,
            Some((l, e)) => return Err(s.err(l, format!("extrude must be cylinder or cone, got {e:?}"))),
        };
        if v.is_empty() {
            return Err(s.err(ln, "empty curve path"));
        }
        return Ok(SurfaceSpec::Curve { path: base.join(v), extrude, z_range: z_range(s)? });
    }
    let mut prof = |k: &str, d: &str| s.take("surface", k).map(|(_, v)| v).unwrap_or_else(|| d.to_string());
    let (b_z, a, b, c) = (prof("B", "z"), prof("a", "0"), prof("b", "1"), prof("c", ""));
    if c.is_empty() {
        return Err(s.err(1, "[surface] needs `preset`, `curve`, or profiles with at least `c`"));
    }
    let period = s.num::<f64>("surface", "period")?.unwrap_or(TAU);
    Ok(SurfaceSpec::Profiles { b_z, a, b, c, period, z_range: z_range(s)? })
}

/// Parses a configuration; relative paths resolve against `base`.
pub fn parse_config(src: &str, origin: &str, base: &Path) -> Result<ExperimentConfig> {
    let mut s = Sections::parse(src, origin)?;
    let surface = parse_surface(&mut s, base)?;
    let (h_line, h) = match (s.list::<f64>("experiment", "h")?, s.list::<u32>("experiment", "n")?) {
        (Some(_), Some((ln, _))) => return Err(s.err(ln, "give either `h` or `n`, not both")),
        (Some((ln, h)), None) => (ln, h),
        (None, Some((ln, n))) => (ln, ExperimentConfig::h_from_n(&n)),
        (None, None) => (1, Vec::new()),
    };
    let modes = match s.take("experiment", "mode") {
        None => vec![Mode::Ansatz, Mode::Eig],
        Some((_, m)) if m == "both" => vec![Mode::Ansatz, Mode::Eig],
        Some((ln, m)) => vec![Mode::parse(&m).ok_or_else(|| s.err(ln, format!("unknown mode {m:?}")))?],
    };
    let mut cfg = ExperimentConfig::new(surface, h, modes);
    if let Some((ln, v)) = s.take("experiment", "bc") {
        cfg.bc = match v.as_str() {
            "V1" | "v1" => BcTag::V1,
            "V2" | "v2" => BcTag::V2,
            "V3" | "v3" => BcTag::V3,
            _ => return Err(s.err(ln, format!("bc must be V1, V2 or V3, got {v:?}"))),
        };
    }
    if let Some((ln, v)) = s.take("experiment", "kind") {
        cfg.kind = match v.as_str() {
            "full" => GradKind::Full,
            "simplified" => GradKind::Simplified,
            _ => return Err(s.err(ln, format!("kind must be full or simplified, got {v:?}"))),
        };
    }
    let interval = s.pair("experiment", "interval")?;
    let support = s.pair("experiment", "support")?;
    if let Some((ln, v)) = s.take("experiment", "ansatz") {
        cfg.ansatz = match v.as_str() {
            "auto" => AnsatzChoice::Auto,
            "case1" => AnsatzChoice::Separable,
            "case2" => AnsatzChoice::General {
                interval: interval.ok_or_else(|| s.err(ln, "case2 ansatz needs `interval = lo, hi`"))?,
            },
            "kirchhoff" => AnsatzChoice::Kirchhoff { support },
            _ => return Err(s.err(ln, format!("unknown ansatz {v:?}"))),
        };
    }
    cfg.seed = s.num("experiment", "seed")?.unwrap_or(cfg.seed);
    cfg.resolution = ResolutionOverrides {
        n_t: s.num("experiment", "n_t")?,
        n_theta: s.num("experiment", "n_theta")?,
        n_z: s.num("experiment", "n_z")?,
    };
    cfg.tol = s.num("eig", "tol")?.unwrap_or(cfg.tol);
    cfg.maxit = s.num("eig", "maxit")?.unwrap_or(cfg.maxit);
    cfg.block = s.num("eig", "block")?.unwrap_or(cfg.block);
    if let Some((_, d)) = s.take("output", "dir") {
        cfg.output.dir = base.join(d);
    }
    if let Some((_, p)) = s.take("output", "prefix") {
        cfg.output.prefix = p;
    }
    if let Some((ln, f)) = s.take("output", "format") {
        cfg.output.format = Format::parse(&f).ok_or_else(|| s.err(ln, format!("format must be csv, svg or both, got {f:?}")))?;
    }
    for (key, slot) in [("timings", &mut cfg.output.timings), ("dump", &mut cfg.output.dump)] {
        if let Some((ln, v)) = s.take("output", key) {
            *slot = v.parse().map_err(|_| s.err(ln, format!("`{key}` must be true or false")))?;
        }
    }
    s.finish()?;
    cfg.validate().map_err(|m| s.err(h_line, m))?;
    Ok(cfg)
}

pub fn read_config(path: &Path) -> Result<ExperimentConfig> {
    let src = std::fs::read_to_string(path).map_err(|e| LabError::config(&path.display().to_string(), 0, format!("cannot read: {e}")))?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_config(&src, &path.display().to_string(), base)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(src: &str) -> Result<ExperimentConfig> {
        parse_config(src, "test.cfg", Path::new("/base"))
    }

    #[test]
    fn full_config() {
        let cfg = parse(
            "[surface]\npreset = cylinder-circular radius=2\nlength = 3\n\
             [experiment]\nmode = eig\nbc = V1\nkind = simplified\nn = 2, 3 4\nseed = 9\nn_theta = 64\n\
             [eig]\ntol = 1e-9\nmaxit = 50\n[output]\ndir = out\nformat = both\ntimings = false\n",
        )
        .unwrap();
        assert_eq!(cfg.surface, SurfaceSpec::Preset(Preset::CylinderCircular { radius: 2.0, length: 3.0 }));
        assert_eq!(cfg.modes, vec![Mode::Eig]);
        assert_eq!(cfg.bc, BcTag::V1);
        assert_eq!(cfg.h, vec![1.0 / 16.0, 1.0 / 81.0, 1.0 / 256.0]);
        assert_eq!(cfg.resolution.n_theta, Some(64));
        assert_eq!(cfg.output.dir, PathBuf::from("/base/out"));
        assert!(!cfg.output.timings && cfg.output.format == Format::Both);
    }

    #[test]
    fn profile_surface() {
        let cfg = parse("[surface]\na = 1\nb = 2 + sin(theta)\nc = 1\nzmin = 1\nzmax = 2\n[experiment]\nh = 0.1 0.05 0.025\n").unwrap();
        match cfg.surface {
            SurfaceSpec::Profiles { b_z, b, z_range, .. } => {
                assert_eq!(b_z, "z");
                assert_eq!(b, "2 + sin(theta)");
                assert_eq!(z_range, (1.0, 2.0));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_bad_input_with_lines() {
        let cases = [
            ("[surface]\npreset = cylinder-circular\n[experiment]\n", 1),
            ("[surface]\npreset = cylinder-circular\n[experiment]\nh = 0.1, 0.2, 0.05\n", 4),
            ("[surface]\npreset = torus\n", 2),
            ("[surface]\npreset = cylinder-circular\n[experiment]\nh = 0.1\nfoo = 1\n", 5),
            ("[surface]\npreset = cylinder-circular\n[experiment]\nh = 0.1\nh = 0.2\n", 5),
            ("[surfaces]\n", 1),
            ("preset = x\n", 1),
            ("[surface]\npreset = cylinder-circular\n[experiment]\nh = 0.1\nansatz = case2\n", 5),
            ("[surface]\npreset = cylinder-circular\n[experiment]\nh = 1.5\n", 4),
        ];
        for (src, line) in cases {
            match parse(src) {
                Err(LabError::Config { line: l, .. }) => assert_eq!(l, line, "{src}"),
                other => panic!("{src}: {other:?}"),
            }
        }
    }
}
