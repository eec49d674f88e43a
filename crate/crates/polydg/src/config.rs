//! Flat `section.key = value` configuration files.
//!
//! Physical quantities need a unit suffix (`dt = 2.5 us`, `sigma.grey.l = 0.63 S/m`)
//! and are converted to mV, ms, cm, uF and mS. Strings may be quoted. Lists are
//! comma separated. `#` starts a comment.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use polydg_core::assembly::{ConductivityField, TissueConductivity};
use polydg_core::ionics::{FitzHughNagumo, IonicModelChoice};
use polydg_core::timestepper::{DiscretizationSpec, MembraneParams, PreconditionerKind, PreconditionerSpec, SolverSpec};
use polydg_core::Point;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Length,
    Time,
    Rate,
    Conductivity,
    InverseLength,
    Capacitance,
    Potential,
}

impl Dimension {
    /// Conversion factors to internal units.
    fn units(self) -> &'static [(&'static str, f64)] {
        match self {
            Dimension::Length => &[("cm", 1.0), ("mm", 0.1), ("m", 100.0), ("um", 1e-4)],
            Dimension::Time => &[("ms", 1.0), ("us", 1e-3), ("s", 1e3)],
            Dimension::Rate => &[("1/ms", 1.0), ("1/s", 1e-3)],
            Dimension::Conductivity => &[("mS/cm", 1.0), ("S/m", 10.0), ("S/cm", 1e3)],
            Dimension::InverseLength => &[("1/cm", 1.0), ("1/mm", 10.0), ("1/m", 0.01)],
            Dimension::Capacitance => &[("uF/cm2", 1.0), ("F/m2", 100.0)],
            Dimension::Potential => &[("mV", 1.0), ("V", 1e3)],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MeshSource {
    Generate { cells: usize, seed: u64, lloyd: usize },
    File(PathBuf),
}

/// Piecewise-constant initial potential: `u_stim` inside a disk, `u_rest` elsewhere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialData {
    pub u_rest: f64,
    pub u_stim: f64,
    pub center: Point,
    pub radius_sq: f64,
}

impl Default for InitialData {
    fn default() -> Self {
        InitialData { u_rest: -67.0, u_stim: -50.0, center: [0.5, 1.0], radius_sq: 0.016 }
    }
}

impl InitialData {
    pub fn value(&self, x: Point) -> f64 {
        let (dx, dy) = (x[0] - self.center[0], x[1] - self.center[1]);
        if dx * dx + dy * dy < self.radius_sq {
            self.u_stim
        } else {
            self.u_rest
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnapshotFormat {
    VtkLegacy,
    CsvCellMeans,
}

impl SnapshotFormat {
    pub fn extension(self) -> &'static str {
        match self {
            SnapshotFormat::VtkLegacy => "vtk",
            SnapshotFormat::CsvCellMeans => "csv",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Snapshot cadence in steps; `t = 0` and `t = T` are always written.
    pub every: usize,
    pub formats: Vec<SnapshotFormat>,
    pub snapshots: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub mesh: Option<MeshSource>,
    pub split_y: f64,
    pub discretization: DiscretizationSpec,
    pub t_end: f64,
    pub sigma: ConductivityField,
    pub ionic: IonicModelChoice,
    pub initial: InitialData,
    pub solver: SolverSpec,
    pub output: OutputConfig,
}

impl SimulationConfig {
    pub fn mesh_source(&self) -> Result<&MeshSource, CliError> {
        self.mesh.as_ref().ok_or_else(|| CliError::Config("missing mandatory key mesh.cells or mesh.file".into()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudySpec {
    pub cells: Vec<usize>,
    pub ratios: Vec<usize>,
    /// `(p, q)` pairs.
    pub degrees: Vec<(usize, usize)>,
    pub kinds: Vec<PreconditionerKind>,
    pub t_end: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub simulation: SimulationConfig,
    pub study: StudySpec,
}

pub fn load_config(path: &Path) -> Result<Config, CliError> {
    let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
    parse_config(&text, path)
}

struct Entries<'a> {
    path: &'a Path,
    map: BTreeMap<String, (usize, String)>,
}

impl Entries<'_> {
    fn err(&self, line: usize, message: String) -> CliError {
        CliError::Parse { path: self.path.to_path_buf(), line, message }
    }

    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.map.remove(key)
    }

    fn string(&mut self, key: &str) -> Option<(usize, String)> {
        self.take(key).map(|(l, v)| (l, unquote(&v).to_string()))
    }

    fn parsed<T: std::str::FromStr>(&mut self, key: &str, what: &str) -> Result<Option<T>, CliError> {
        match self.string(key) {
            None => Ok(None),
            Some((l, v)) => v.parse().map(Some).map_err(|_| self.err(l, format!("{key}: expected {what}, found `{v}`"))),
        }
    }

    fn count(&mut self, key: &str) -> Result<Option<usize>, CliError> {
        self.parsed(key, "a non-negative integer")
    }

    fn number(&mut self, key: &str) -> Result<Option<f64>, CliError> {
        match self.parsed::<f64>(key, "a number")? {
            Some(v) if !v.is_finite() => Err(CliError::Config(format!("{key} must be finite"))),
            v => Ok(v),
        }
    }

    fn flag(&mut self, key: &str) -> Result<Option<bool>, CliError> {
        self.parsed(key, "true or false")
    }

    fn quantity(&mut self, key: &str, dim: Dimension) -> Result<Option<f64>, CliError> {
        let Some((l, raw)) = self.take(key) else { return Ok(None) };
        let (num, unit) = raw.trim().split_once(char::is_whitespace).map(|(a, b)| (a, b.trim())).unwrap_or((raw.trim(), ""));
        let value: f64 = num.parse().map_err(|_| self.err(l, format!("{key}: expected a number with unit, found `{raw}`")))?;
        let allowed: Vec<&str> = dim.units().iter().map(|u| u.0).collect();
        if unit.is_empty() {
            return Err(self.err(l, format!("{key}: missing unit (one of {})", allowed.join(", "))));
        }
        let factor = dim
            .units()
            .iter()
            .find(|u| u.0 == unit)
            .map(|u| u.1)
            .ok_or_else(|| self.err(l, format!("{key}: unit `{unit}` does not match {dim:?} (one of {})", allowed.join(", "))))?;
        if !value.is_finite() {
            return Err(CliError::Config(format!("{key} must be finite")));
        }
        Ok(Some(value * factor))
    }

    fn list<T: std::str::FromStr>(&mut self, key: &str, what: &str) -> Result<Option<Vec<T>>, CliError> {
        let Some((l, raw)) = self.string(key) else { return Ok(None) };
        raw.split(',')
            .map(|s| {
                let s = unquote(s.trim());
                s.parse().map_err(|_| self.err(l, format!("{key}: expected a list of {what}, found `{s}`")))
            })
            .collect::<Result<Vec<T>, _>>()
            .map(Some)
    }
}

fn strip_comment(line: &str) -> &str {
    let mut quoted = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' => quoted = !quoted,
            '#' if !quoted => return &line[..i],
            _ => {}
        }
    }
    line
}

fn unquote(s: &str) -> &str {
    let s = s.trim();
    s.strip_prefix('"').and_then(|t| t.strip_suffix('"')).unwrap_or(s)
}

fn parse_kind(s: &str) -> Option<PreconditionerKind> {
    match s {
        "none" | "cg" => Some(PreconditionerKind::None),
        "block-jacobi" => Some(PreconditionerKind::BlockJacobi),
        "two-level" => Some(PreconditionerKind::TwoLevel),
        _ => None,
    }
}

pub fn kind_name(k: PreconditionerKind) -> &'static str {
    match k {
        PreconditionerKind::None => "none",
        PreconditionerKind::BlockJacobi => "block-jacobi",
        PreconditionerKind::TwoLevel => "two-level",
    }
}

fn positive(key: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 {
        Ok(v)
    } else {
        Err(CliError::Config(format!("{key} must be positive, got {v}")))
    }
}

pub fn parse_config(text: &str, path: &Path) -> Result<Config, CliError> {
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let ln = i + 1;
        let line = strip_comment(line).trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Parse { path: path.to_path_buf(), line: ln, message: format!("expected `key = value`, found `{line}`") })?;
        let key = key.trim().to_string();
        if let Some((prev, _)) = map.insert(key.clone(), (ln, value.trim().to_string())) {
            return Err(CliError::Parse { path: path.to_path_buf(), line: ln, message: format!("duplicate key {key} (first set on line {prev})") });
        }
    }
    let mut e = Entries { path, map };

    let mesh_file = e.string("mesh.file").map(|(_, v)| PathBuf::from(v));
    let cells = e.count("mesh.cells")?;
    let seed = e.parsed::<u64>("mesh.seed", "a non-negative integer")?.unwrap_or(0);
    let lloyd = e.count("mesh.lloyd")?.unwrap_or(20);
    let mesh = match (mesh_file, cells) {
        (Some(_), Some(_)) => return Err(CliError::Config("mesh.file and mesh.cells are mutually exclusive".into())),
        (Some(f), None) => {
            let f = if f.is_relative() { path.parent().unwrap_or(Path::new(".")).join(f) } else { f };
            Some(MeshSource::File(f))
        }
        (None, Some(cells)) => Some(MeshSource::Generate { cells, seed, lloyd }),
        (None, None) => None,
    };
    let split_y = e.quantity("mesh.split_y", Dimension::Length)?.unwrap_or(0.5);

    let p = e.count("dg.p")?.ok_or_else(|| CliError::Config("missing mandatory key dg.p".into()))?;
    if p == 0 {
        return Err(CliError::Config("dg.p must be at least 1".into()));
    }
    let eta0 = positive("dg.eta0", e.number("dg.eta0")?.unwrap_or(10.0))?;
    let dt = positive("time.dt", e.quantity("time.dt", Dimension::Time)?.unwrap_or(2.5e-3))?;
    let t_end = e.quantity("time.T", Dimension::Time)?.unwrap_or(10.0);
    if t_end < dt {
        return Err(CliError::Config(format!("time.T = {t_end} ms must be at least time.dt = {dt} ms")));
    }
    let chi_m = positive("membrane.chi_m", e.quantity("membrane.chi_m", Dimension::InverseLength)?.unwrap_or(1000.0))?;
    let c_m = positive("membrane.C_m", e.quantity("membrane.C_m", Dimension::Capacitance)?.unwrap_or(1.0))?;

    let defaults = ConductivityField::brain_default();
    let mut tissue = |name: &str, d: TissueConductivity| -> Result<TissueConductivity, CliError> {
        let sigma_l = e.quantity(&format!("sigma.{name}.l"), Dimension::Conductivity)?.unwrap_or(d.sigma_l);
        let sigma_n = e.quantity(&format!("sigma.{name}.n"), Dimension::Conductivity)?.unwrap_or(d.sigma_n);
        let fiber = match e.list::<f64>(&format!("sigma.{name}.fiber"), "numbers")? {
            None => d.fiber,
            Some(v) if v.len() == 2 => [v[0], v[1]],
            Some(_) => return Err(CliError::Config(format!("sigma.{name}.fiber needs two components"))),
        };
        Ok(TissueConductivity { sigma_l, sigma_n, fiber })
    };
    let grey = tissue("grey", defaults.grey)?;
    let white = tissue("white", defaults.white)?;
    let sigma = ConductivityField::new(grey, white)?;

    let d = FitzHughNagumo::default();
    let fhn = FitzHughNagumo {
        a: e.number("ionic.params.a")?.unwrap_or(d.a),
        b: e.quantity("ionic.params.b", Dimension::Rate)?.unwrap_or(d.b),
        c1: e.quantity("ionic.params.c1", Dimension::Rate)?.unwrap_or(d.c1),
        c2: e.quantity("ionic.params.c2", Dimension::Rate)?.unwrap_or(d.c2),
        d: e.number("ionic.params.d")?.unwrap_or(d.d),
        u_min: e.quantity("ionic.params.u_min", Dimension::Potential)?.unwrap_or(d.u_min),
        u_max: e.quantity("ionic.params.u_max", Dimension::Potential)?.unwrap_or(d.u_max),
        amplitude: e.number("ionic.params.A")?.unwrap_or(d.amplitude),
    };
    fhn.validate()?;
    let ionic = match e.string("ionic.model") {
        None => IonicModelChoice::FitzHughNagumo(fhn),
        Some((l, m)) => match m.as_str() {
            "fhn" => IonicModelChoice::FitzHughNagumo(fhn),
            "barreto-cressman" => IonicModelChoice::BarretoCressman,
            "none" => IonicModelChoice::None,
            other => return Err(e.err(l, format!("ionic.model: unknown model `{other}` (fhn, barreto-cressman, none)"))),
        },
    };

    let di = InitialData::default();
    let radius_sq = match e.quantity("init.radius", Dimension::Length)? {
        Some(r) => positive("init.radius", r)? * r,
        None => di.radius_sq,
    };
    let initial = InitialData {
        u_rest: e.quantity("init.u_rest", Dimension::Potential)?.unwrap_or(di.u_rest),
        u_stim: e.quantity("init.u_stim", Dimension::Potential)?.unwrap_or(di.u_stim),
        center: [
            e.quantity("init.center_x", Dimension::Length)?.unwrap_or(di.center[0]),
            e.quantity("init.center_y", Dimension::Length)?.unwrap_or(di.center[1]),
        ],
        radius_sq,
    };

    let ds = SolverSpec::default();
    let tol = e.number("solver.tol")?.unwrap_or(ds.tol);
    if !(tol > 0.0 && tol < 1.0) {
        return Err(CliError::Config(format!("solver.tol must lie in (0, 1), got {tol}")));
    }
    let maxit = e.count("solver.maxit")?;
    let warm_start = e.flag("solver.warm_start")?.unwrap_or(ds.warm_start);
    let dp = PreconditionerSpec::default();
    let kind = match e.string("precond.kind") {
        None => dp.kind,
        Some((l, k)) => parse_kind(&k).ok_or_else(|| e.err(l, format!("precond.kind: unknown kind `{k}` (none, block-jacobi, two-level)")))?,
    };
    let coarse_ratio = e.count("precond.H_ratio")?.unwrap_or(dp.coarse_ratio);
    let subdomain_ratio = e.count("precond.subdomain_ratio")?.unwrap_or(dp.subdomain_ratio);
    let q = e.count("precond.q")?.unwrap_or(dp.q);
    if q == 0 || q > p {
        return Err(CliError::Config(format!("precond.q = {q} must satisfy 1 <= q <= dg.p = {p}")));
    }
    for (key, r) in [("precond.H_ratio", coarse_ratio), ("precond.subdomain_ratio", subdomain_ratio)] {
        if !r.is_power_of_two() {
            return Err(CliError::Config(format!("{key} must be a power of two, got {r}")));
        }
    }
    let solver = SolverSpec { tol, maxit, warm_start, precond: PreconditionerSpec { kind, coarse_ratio, q, subdomain_ratio } };

    let dir = e.string("output.dir").map(|(_, v)| PathBuf::from(v)).unwrap_or_else(|| PathBuf::from("output"));
    let every = e.count("output.every")?.unwrap_or(100);
    if every == 0 {
        return Err(CliError::Config("output.every must be at least 1".into()));
    }
    let formats = match e.list::<String>("output.format", "formats")? {
        None => vec![SnapshotFormat::VtkLegacy, SnapshotFormat::CsvCellMeans],
        Some(v) => v
            .iter()
            .map(|f| match f.as_str() {
                "vtk-legacy" => Ok(SnapshotFormat::VtkLegacy),
                "csv-cellmeans" => Ok(SnapshotFormat::CsvCellMeans),
                other => Err(CliError::Config(format!("output.format: unknown format `{other}` (vtk-legacy, csv-cellmeans)"))),
            })
            .collect::<Result<_, _>>()?,
    };
    let snapshots = e.flag("output.snapshots")?.unwrap_or(true);
    let output = OutputConfig { dir, every, formats, snapshots };

    let study_cells = e.list::<usize>("study.cells", "cell counts")?;
    let cells = match (study_cells, &mesh) {
        (Some(c), _) => c,
        (None, Some(MeshSource::Generate { cells, .. })) => vec![*cells],
        (None, _) => Vec::new(),
    };
    let ratios = e.list::<usize>("study.ratios", "ratios")?.unwrap_or_else(|| vec![2, 4, 8]);
    if let Some(r) = ratios.iter().find(|r| **r < 2 || !r.is_power_of_two()) {
        return Err(CliError::Config(format!("study.ratios: {r} is not a power of two >= 2")));
    }
    let degrees = match e.list::<String>("study.degrees", "p:q pairs")? {
        None => vec![(p, q)],
        Some(v) => v
            .iter()
            .map(|s| {
                let bad = || CliError::Config(format!("study.degrees: expected `p:q`, found `{s}`"));
                let (a, b) = s.split_once(':').ok_or_else(bad)?;
                let (pp, qq): (usize, usize) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
                if pp == 0 || qq == 0 || qq > pp {
                    return Err(CliError::Config(format!("study.degrees: q = {qq} must satisfy 1 <= q <= p = {pp}")));
                }
                Ok((pp, qq))
            })
            .collect::<Result<_, _>>()?,
    };
    let kinds = match e.list::<String>("study.kinds", "preconditioner kinds")? {
        None => vec![PreconditionerKind::TwoLevel, PreconditionerKind::None],
        Some(v) => v
            .iter()
            .map(|k| parse_kind(k).ok_or_else(|| CliError::Config(format!("study.kinds: unknown kind `{k}`"))))
            .collect::<Result<_, _>>()?,
    };
    let study_t = e.quantity("study.T", Dimension::Time)?.unwrap_or(0.25);
    if study_t < dt {
        return Err(CliError::Config(format!("study.T = {study_t} ms must be at least time.dt = {dt} ms")));
    }

    if let Some((key, (l, _))) = e.map.iter().next() {
        return Err(e.err(*l, format!("unknown key {key}")));
    }

    let discretization = DiscretizationSpec { degree: p, eta0, dt, membrane: MembraneParams { chi_m, c_m } };
    Ok(Config {
        simulation: SimulationConfig { mesh, split_y, discretization, t_end, sigma, ionic, initial, solver, output },
        study: StudySpec { cells, ratios, degrees, kinds, t_end: study_t },
    })
}
