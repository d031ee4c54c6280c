//! Scenario schema, defaults and validation.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use num_complex::Complex64;

use crate::cli::ini::{self, Diagnostic, Entry, Section};
use crate::greens::TimeGrid;
use crate::linalg::CMatrix;
use crate::mastereq::default_cutoff;
use crate::models::{ModelKind, SpecialModel};
use crate::spectral::{Band, Coupling, ReservoirSpec, SpectralDensity, Statistics, SystemSpec};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "EXACTME_OUT_DIR";
const DEFAULT_OUT_DIR: &str = "exactme-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Task {
    U,
    V,
    Coefficients,
    Occupation,
    Rho,
    Measure,
    BoundStates,
    Spectra,
    Model(ModelKind),
}

impl Task {
    /// Output file name.
    pub fn file_name(&self) -> String {
        format!("{self}.csv").replace(':', "_")
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Task::U => f.write_str("u"),
            Task::V => f.write_str("v"),
            Task::Coefficients => f.write_str("coefficients"),
            Task::Occupation => f.write_str("occupation"),
            Task::Rho => f.write_str("rho"),
            Task::Measure => f.write_str("measure"),
            Task::BoundStates => f.write_str("bound_states"),
            Task::Spectra => f.write_str("spectra"),
            Task::Model(k) => write!(f, "model:{k}"),
        }
    }
}

impl FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "u" => Task::U,
            "v" => Task::V,
            "coefficients" => Task::Coefficients,
            "occupation" => Task::Occupation,
            "rho" => Task::Rho,
            "measure" => Task::Measure,
            "bound_states" => Task::BoundStates,
            "spectra" => Task::Spectra,
            _ => match s.strip_prefix("model:") {
                Some(k) => Task::Model(k.parse().map_err(|_| format!("unknown model kind '{k}'"))?),
                None => return Err(format!("unknown task '{s}'")),
            },
        })
    }
}

/// Initial state of the system.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    /// Occupation numbers, one per level.
    Fock(Vec<usize>),
    /// Boson coherent state amplitude (single level).
    Coherent(Complex64),
}

impl InitialState {
    /// Initial single-particle matrix `n₀` (`n_{ji} = ⟨a_i†a_j⟩`).
    pub fn occupation(&self, dim: usize) -> CMatrix {
        match self {
            InitialState::Fock(ns) => CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                dim,
                ns.iter().map(|&n| Complex64::new(n as f64, 0.0)),
            )),
            InitialState::Coherent(a) => CMatrix::from_element(1, 1, Complex64::new(a.norm_sqr(), 0.0)),
        }
    }

    /// Largest mean occupation of a level.
    pub fn max_occupation(&self) -> f64 {
        match self {
            InitialState::Fock(ns) => ns.iter().copied().max().unwrap_or(0) as f64,
            InitialState::Coherent(a) => a.norm_sqr(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelState {
    Ground,
    Excited,
    Plus,
    Mixed,
}

impl ModelState {
    /// 2×2 density matrix; index 0 is the ground / spin-up state.
    pub fn matrix(&self) -> CMatrix {
        let c = |re: f64| Complex64::new(re, 0.0);
        match self {
            ModelState::Ground => CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(0.0)]),
            ModelState::Excited => CMatrix::from_row_slice(2, 2, &[c(0.0), c(0.0), c(0.0), c(1.0)]),
            ModelState::Plus => CMatrix::from_element(2, 2, c(0.5)),
            ModelState::Mixed => CMatrix::from_row_slice(2, 2, &[c(0.5), c(0.0), c(0.0), c(0.5)]),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    /// Shortest representation that round-trips.
    Shortest,
    /// Fixed number of significant digits.
    Digits(usize),
}

impl Precision {
    pub fn format(&self, x: f64) -> String {
        match self {
            Precision::Shortest => format!("{}", x + 0.0),
            Precision::Digits(d) => format!("{:.*e}", d.saturating_sub(1), x + 0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReservoirConfig {
    pub name: String,
    pub spec: ReservoirSpec,
    pub coupling: CMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Anchors {
    /// Logarithmically spaced anchors.
    Count(usize),
    /// Explicit anchor times.
    Times(Vec<f64>),
}

/// A validated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub statistics: Statistics,
    pub energy: CMatrix,
    pub units: String,
    pub initial: InitialState,
    pub cutoff: usize,
    pub reservoirs: Vec<ReservoirConfig>,
    pub grid: TimeGrid,
    pub quadrature_points: usize,
    pub v_stride: usize,
    pub tasks: Vec<Task>,
    pub anchors: Anchors,
    pub max_lag: f64,
    pub spectra_range: (f64, f64),
    pub spectra_points: usize,
    pub model_state: ModelState,
    pub out_dir: PathBuf,
    pub precision: Precision,
}

impl Scenario {
    pub fn system_spec(&self) -> crate::Result<SystemSpec> {
        SystemSpec::new(
            self.statistics,
            self.energy.clone(),
            self.reservoirs
                .iter()
                .map(|r| Coupling {
                    reservoir: r.spec.clone(),
                    weights: r.coupling.clone(),
                })
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.energy.nrows()
    }

    /// The special model for `kind`, built on the first reservoir and the
    /// first level energy.
    pub fn special_model(&self, kind: ModelKind) -> crate::Result<SpecialModel> {
        let bath = self
            .reservoirs
            .first()
            .ok_or_else(|| crate::Error::Configuration("special models need a reservoir".into()))?;
        let splitting = if kind == ModelKind::Majorana { 0.0 } else { self.energy[(0, 0)].re };
        SpecialModel::new(kind, bath.spec.clone(), splitting)
    }

    pub fn has(&self, task: Task) -> bool {
        self.tasks.contains(&task)
    }
}

/// Parses a number such as `1.5`, `-2i`, `0.3+0.1i` or `1e-3-2e-2i`.
pub fn parse_complex(s: &str) -> Option<Complex64> {
    let s = s.trim();
    if let Some(body) = s.strip_suffix('i') {
        let bytes = body.as_bytes();
        let split = (1..bytes.len())
            .rev()
            .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
        match split {
            Some(i) => {
                let re: f64 = body[..i].parse().ok()?;
                let im_str = &body[i..];
                let im: f64 = if im_str == "+" || im_str == "-" {
                    format!("{im_str}1").parse().ok()?
                } else {
                    im_str.parse().ok()?
                };
                Some(Complex64::new(re, im))
            }
            None => {
                let im: f64 = if body.is_empty() || body == "+" || body == "-" {
                    format!("{body}1").parse().ok()?
                } else {
                    body.parse().ok()?
                };
                Some(Complex64::new(0.0, im))
            }
        }
    } else {
        s.parse::<f64>().ok().map(|x| Complex64::new(x, 0.0))
    }
}

/// Rows separated by `;`, entries by `,` or whitespace.
pub fn parse_matrix(s: &str) -> Result<CMatrix, String> {
    let rows: Vec<Vec<Complex64>> = s
        .split(';')
        .map(|row| {
            row.split(|c: char| c == ',' || c.is_whitespace())
                .filter(|t| !t.is_empty())
                .map(|t| parse_complex(t).ok_or_else(|| format!("'{t}' is not a number")))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<_, _>>()?;
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err("matrix must be square with rows separated by ';'".into());
    }
    Ok(CMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

/// Collects typed values from one section and flags unknown keys.
struct Reader<'a> {
    section: Option<&'a Section>,
    used: Vec<&'a str>,
    diags: &'a mut Vec<Diagnostic>,
}

impl<'a> Reader<'a> {
    fn new(section: Option<&'a Section>, diags: &'a mut Vec<Diagnostic>) -> Self {
        Self {
            section,
            used: Vec::new(),
            diags,
        }
    }

    fn entry(&mut self, key: &'a str) -> Option<&'a Entry> {
        self.used.push(key);
        self.section.and_then(|s| s.get(key))
    }

    fn line(&self) -> usize {
        self.section.map_or(0, |s| s.line)
    }

    fn error(&mut self, e: Option<&Entry>, key: &str, msg: impl Into<String>) {
        let line = e.map_or(self.line(), |e| e.line);
        self.diags.push(Diagnostic::new(line, Some(key), msg));
    }

    fn parsed<T: FromStr>(&mut self, key: &'a str, what: &str) -> Option<T> {
        let e = self.entry(key)?;
        match e.value.parse::<T>() {
            Ok(v) => Some(v),
            Err(_) => {
                self.error(Some(e), key, format!("expected {what}, got '{}'", e.value));
                None
            }
        }
    }

    fn f64_or(&mut self, key: &'a str, default: f64) -> f64 {
        self.float(key).unwrap_or(default)
    }

    fn float(&mut self, key: &'a str) -> Option<f64> {
        let v: f64 = self.parsed(key, "a number")?;
        if v.is_finite() {
            Some(v)
        } else {
            let e = self.entry(key);
            self.error(e, key, "must be finite");
            None
        }
    }

    fn required_float(&mut self, key: &'a str) -> Option<f64> {
        if self.entry(key).is_none() {
            let line = self.line();
            self.diags.push(Diagnostic::new(line, Some(key), "required key is missing"));
            return None;
        }
        self.float(key)
    }

    fn text(&mut self, key: &'a str) -> Option<&'a str> {
        self.entry(key).map(|e| e.value.as_str())
    }

    fn line_of(&self, key: &str) -> usize {
        self.section.and_then(|s| s.get(key)).map_or(self.line(), |e| e.line)
    }

    fn finish(self) {
        if let Some(s) = self.section {
            for e in &s.entries {
                if !self.used.contains(&e.key.as_str()) {
                    self.diags.push(Diagnostic::new(
                        e.line,
                        Some(&e.key),
                        format!("unknown key in [{}]", s.name),
                    ));
                }
            }
        }
    }
}

const SECTIONS: [&str; 8] = ["system", "reservoir", "grid", "tasks", "measure", "spectra", "model", "output"];

fn single<'a>(sections: &'a [Section], name: &str, diags: &mut Vec<Diagnostic>) -> Option<&'a Section> {
    let mut found = sections.iter().filter(|s| s.name == name);
    let first = found.next();
    for extra in found {
        diags.push(Diagnostic::new(extra.line, None, format!("section [{name}] given more than once")));
    }
    if let Some(s) = first {
        if s.label.is_some() {
            diags.push(Diagnostic::new(s.line, None, format!("section [{name}] takes no label")));
        }
    }
    first
}

fn density(r: &mut Reader<'_>, kind: &str) -> Option<Result<SpectralDensity, String>> {
    let d = match kind {
        "ohmic" => {
            let eta = r.required_float("eta")?;
            let s = r.f64_or("exponent", 1.0);
            let c = r.required_float("cutoff")?;
            SpectralDensity::ohmic(eta, s, c)
        }
        "lorentzian" => {
            let eta = r.required_float("eta")?;
            let c = r.required_float("center")?;
            let w = r.required_float("width")?;
            SpectralDensity::lorentzian(eta, c, w)
        }
        "flat" => {
            let k = r.required_float("kappa")?;
            let lo = r.required_float("lower")?;
            let hi = r.required_float("upper")?;
            SpectralDensity::flat_band(k, lo, hi)
        }
        "gapped" => {
            let Some(text) = r.text("bands") else {
                let line = r.line();
                r.diags.push(Diagnostic::new(line, Some("bands"), "required key is missing"));
                return None;
            };
            let mut bands = Vec::new();
            for part in text.split(';') {
                let v: Vec<f64> = part.split_whitespace().filter_map(|t| t.parse().ok()).collect();
                if v.len() != 3 || part.split_whitespace().count() != 3 {
                    return Some(Err(format!("band '{}' must be 'lower upper kappa'", part.trim())));
                }
                bands.push(Band::flat(v[2], v[0], v[1]));
            }
            SpectralDensity::gapped(bands)
        }
        "tabulated" => {
            let Some(text) = r.text("samples") else {
                let line = r.line();
                r.diags.push(Diagnostic::new(line, Some("samples"), "required key is missing"));
                return None;
            };
            let mut samples = Vec::new();
            for part in text.split(';') {
                let v: Vec<f64> = part.split_whitespace().filter_map(|t| t.parse().ok()).collect();
                if v.len() != 2 || part.split_whitespace().count() != 2 {
                    return Some(Err(format!("sample '{}' must be 'energy value'", part.trim())));
                }
                samples.push((v[0], v[1]));
            }
            SpectralDensity::tabulated(samples)
        }
        other => {
            return Some(Err(format!(
                "unknown spectral kind '{other}' (expected ohmic, lorentzian, flat, gapped or tabulated)"
            )))
        }
    };
    Some(d.map_err(|e| e.to_string()))
}

/// Parses and validates scenario text. All problems are reported together.
pub fn parse_scenario(text: &str) -> Result<Scenario, Vec<Diagnostic>> {
    let sections = ini::parse(text)?;
    let mut diags = Vec::new();
    for s in &sections {
        if !SECTIONS.contains(&s.name.as_str()) {
            diags.push(Diagnostic::new(s.line, None, format!("unknown section [{}]", s.name)));
        }
    }

    // [system]
    let sys_sec = single(&sections, "system", &mut diags);
    if sys_sec.is_none() {
        diags.push(Diagnostic::new(0, None, "missing [system] section"));
    }
    let mut r = Reader::new(sys_sec, &mut diags);
    let statistics: Option<Statistics> = if sys_sec.is_some() && r.entry("statistics").is_none() {
        let line = r.line();
        r.diags.push(Diagnostic::new(line, Some("statistics"), "required key is missing"));
        None
    } else {
        r.parsed("statistics", "'boson' or 'fermion'")
    };
    let energy = match r.entry("energy") {
        Some(e) => match parse_matrix(&e.value) {
            Ok(m) => Some(m),
            Err(msg) => {
                r.error(Some(e), "energy", msg);
                None
            }
        },
        None => {
            if sys_sec.is_some() {
                let line = r.line();
                r.diags.push(Diagnostic::new(line, Some("energy"), "required key is missing"));
            }
            None
        }
    };
    let dim = energy.as_ref().map_or(1, |m| m.nrows());
    let units = r.text("units").unwrap_or("natural").to_string();
    if units != "natural" && units != "eps_s" {
        let e = r.entry("units");
        r.error(e, "units", format!("expected 'natural' or 'eps_s', got '{units}'"));
    }
    let initial = match r.entry("initial") {
        None => Some(InitialState::Fock(vec![1; dim])),
        Some(e) => {
            let mut words = e.value.split_whitespace();
            match words.next() {
                Some("fock") => {
                    let ns: Result<Vec<usize>, _> = words.map(str::parse).collect();
                    match ns {
                        Ok(ns) if ns.len() == dim => Some(InitialState::Fock(ns)),
                        _ => {
                            r.error(Some(e), "initial", format!("'fock' needs {dim} non-negative integers"));
                            None
                        }
                    }
                }
                Some("coherent") => {
                    let rest: Vec<&str> = words.collect();
                    match (rest.as_slice(), dim) {
                        ([a], 1) if parse_complex(a).is_some() => Some(InitialState::Coherent(parse_complex(a).unwrap())),
                        _ => {
                            r.error(Some(e), "initial", "'coherent' needs one amplitude and a single level");
                            None
                        }
                    }
                }
                _ => {
                    r.error(Some(e), "initial", "expected 'fock n...' or 'coherent alpha'");
                    None
                }
            }
        }
    };
    if let (Some(Statistics::Fermion), Some(init)) = (statistics, &initial) {
        let bad = match init {
            InitialState::Fock(ns) => ns.iter().any(|&n| n > 1),
            InitialState::Coherent(_) => true,
        };
        if bad {
            let line = r.line_of("initial");
            r.diags.push(Diagnostic::new(line, Some("initial"), "fermion levels hold 0 or 1 particle"));
        }
    }
    let cutoff = r
        .parsed::<usize>("cutoff", "a positive integer")
        .unwrap_or_else(|| default_cutoff(initial.as_ref().map_or(0.0, |i| i.max_occupation())));
    let sys_line = r.line();
    r.finish();

    // [reservoir ...]
    let mut reservoirs = Vec::new();
    for (idx, s) in sections.iter().filter(|s| s.name == "reservoir").enumerate() {
        let mut r = Reader::new(Some(s), &mut diags);
        let name = s.label.clone().unwrap_or_else(|| format!("reservoir{idx}"));
        let stats: Option<Statistics> = match r.entry("statistics") {
            Some(_) => r.parsed("statistics", "'boson' or 'fermion'"),
            None => statistics,
        };
        let t = r.f64_or("temperature", 0.0);
        if t < 0.0 {
            let e = r.entry("temperature");
            r.error(e, "temperature", format!("must be >= 0, got {t}"));
        }
        let mu = r.f64_or("chemical_potential", 0.0);
        let kind = r.text("spectral");
        let coupling = match r.entry("coupling") {
            Some(e) => match parse_matrix(&e.value) {
                Ok(m) if m.nrows() == dim => Some(m),
                Ok(_) => {
                    r.error(Some(e), "coupling", format!("must be {dim}x{dim}"));
                    None
                }
                Err(msg) => {
                    r.error(Some(e), "coupling", msg);
                    None
                }
            },
            None => Some(CMatrix::identity(dim, dim)),
        };
        let d = match kind {
            Some(k) => density(&mut r, k),
            None => {
                let line = r.line();
                r.diags.push(Diagnostic::new(line, Some("spectral"), "required key is missing"));
                None
            }
        };
        let spectral_line = r.line_of("spectral");
        let mu_line = r.line_of("chemical_potential");
        r.finish();
        match d {
            Some(Err(msg)) => diags.push(Diagnostic::new(spectral_line, Some("spectral"), msg)),
            Some(Ok(d)) => {
                if let (Some(stats), Some(coupling)) = (stats, coupling) {
                    if t >= 0.0 {
                        match ReservoirSpec::new(stats, t, mu, d) {
                            Ok(spec) => reservoirs.push(ReservoirConfig { name, spec, coupling }),
                            Err(e) => diags.push(Diagnostic::new(mu_line, Some("chemical_potential"), e.to_string())),
                        }
                    }
                }
            }
            None => {}
        }
    }

    // [grid]
    let grid_sec = single(&sections, "grid", &mut diags);
    let mut r = Reader::new(grid_sec, &mut diags);
    let t_max = r.f64_or("t_max", 50.0);
    let dt = r.f64_or("dt", 0.01);
    let quadrature_points = r.parsed::<usize>("quadrature_points", "a positive integer").unwrap_or(60000);
    let v_stride = r.parsed::<usize>("v_stride", "a positive integer").unwrap_or(1);
    let mut grid = None;
    if dt <= 0.0 {
        let e = r.entry("dt");
        r.error(e, "dt", format!("must be > 0, got {dt}"));
    } else if t_max <= 0.0 {
        let e = r.entry("t_max");
        r.error(e, "t_max", format!("must be > 0, got {t_max}"));
    } else {
        match TimeGrid::with_horizon(t_max, dt) {
            Ok(g) => grid = Some(g),
            Err(e) => {
                let entry = r.entry("t_max");
                r.error(entry, "t_max", e.to_string());
            }
        }
    }
    if v_stride == 0 {
        let e = r.entry("v_stride");
        r.error(e, "v_stride", "must be >= 1");
    }
    if quadrature_points < 15 {
        let e = r.entry("quadrature_points");
        r.error(e, "quadrature_points", "must be >= 15");
    }
    r.finish();

    // [tasks]
    let task_sec = single(&sections, "tasks", &mut diags);
    let mut r = Reader::new(task_sec, &mut diags);
    let mut tasks = Vec::new();
    match r.entry("run") {
        Some(e) => {
            for word in e.value.split(',').map(str::trim).filter(|w| !w.is_empty()) {
                match word.parse::<Task>() {
                    Ok(t) if !tasks.contains(&t) => tasks.push(t),
                    Ok(_) => r.error(Some(e), "run", format!("task '{word}' listed twice")),
                    Err(msg) => r.error(Some(e), "run", msg),
                }
            }
            if tasks.is_empty() {
                r.error(Some(e), "run", "at least one task is required");
            }
        }
        None => {
            let line = r.line();
            r.diags.push(Diagnostic::new(line, Some("run"), "at least one task is required ([tasks] run = ...)"));
        }
    }
    let tasks_line = r.line_of("run");
    r.finish();
    tasks.sort();

    // [measure]
    let measure_sec = single(&sections, "measure", &mut diags);
    let mut r = Reader::new(measure_sec, &mut diags);
    let count = r.parsed::<usize>("anchors", "a positive integer");
    let times = r.entry("anchor_times");
    let anchors = match (count, times) {
        (Some(_), Some(e)) => {
            r.error(Some(e), "anchor_times", "give either 'anchors' or 'anchor_times', not both");
            Anchors::Count(8)
        }
        (_, Some(e)) => {
            let v: Result<Vec<f64>, _> = e.value.split(',').map(|t| t.trim().parse::<f64>()).collect();
            match v {
                Ok(v) if !v.is_empty() && v.iter().all(|t| t.is_finite() && *t >= 0.0) => Anchors::Times(v),
                _ => {
                    r.error(Some(e), "anchor_times", "expected comma-separated times >= 0");
                    Anchors::Count(8)
                }
            }
        }
        (Some(0), None) => {
            let e = r.entry("anchors");
            r.error(e, "anchors", "must be >= 1");
            Anchors::Count(8)
        }
        (Some(n), None) => Anchors::Count(n),
        (None, None) => Anchors::Count(8),
    };
    let max_lag = r.f64_or("max_lag", 20.0f64.min(0.5 * t_max.max(0.0)));
    if let Some(g) = &grid {
        if max_lag < 0.0 || max_lag >= g.t_max() {
            let e = r.entry("max_lag");
            r.error(e, "max_lag", format!("must lie in [0, t_max), got {max_lag}"));
        }
        if let Anchors::Times(ts) = &anchors {
            for &t in ts {
                if g.index_of(t).is_none() || t + max_lag > g.t_max() + 1e-9 {
                    let e = r.entry("anchor_times");
                    r.error(e, "anchor_times", format!("anchor {t} must be a grid time with t + max_lag <= t_max"));
                }
            }
        }
    }
    r.finish();

    // [spectra]
    let spectra_sec = single(&sections, "spectra", &mut diags);
    let mut r = Reader::new(spectra_sec, &mut diags);
    let (lo_default, hi_default) = energy.as_ref().map_or((-5.0, 5.0), |m| {
        let d: Vec<f64> = (0..m.nrows()).map(|i| m[(i, i)].re).collect();
        (
            d.iter().copied().fold(f64::INFINITY, f64::min) - 5.0,
            d.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 5.0,
        )
    });
    let e_min = r.f64_or("e_min", lo_default);
    let e_max = r.f64_or("e_max", hi_default);
    let spectra_points = r.parsed::<usize>("points", "an integer >= 2").unwrap_or(401);
    if e_max <= e_min {
        let e = r.entry("e_max");
        r.error(e, "e_max", "must exceed e_min");
    }
    if spectra_points < 2 {
        let e = r.entry("points");
        r.error(e, "points", "must be >= 2");
    }
    r.finish();

    // [model]
    let model_sec = single(&sections, "model", &mut diags);
    let mut r = Reader::new(model_sec, &mut diags);
    let model_state = match r.entry("state") {
        None => ModelState::Plus,
        Some(e) => match e.value.as_str() {
            "ground" => ModelState::Ground,
            "excited" => ModelState::Excited,
            "plus" => ModelState::Plus,
            "mixed" => ModelState::Mixed,
            other => {
                r.error(Some(e), "state", format!("expected ground, excited, plus or mixed, got '{other}'"));
                ModelState::Plus
            }
        },
    };
    r.finish();

    // [output]
    let out_sec = single(&sections, "output", &mut diags);
    let mut r = Reader::new(out_sec, &mut diags);
    let out_dir = r
        .text("directory")
        .map(PathBuf::from)
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    let precision = match r.entry("precision") {
        None => Precision::Shortest,
        Some(e) if e.value == "shortest" => Precision::Shortest,
        Some(e) => match e.value.parse::<usize>() {
            Ok(d) if (1..=17).contains(&d) => Precision::Digits(d),
            _ => {
                r.error(Some(e), "precision", "expected 'shortest' or 1..17 significant digits");
                Precision::Shortest
            }
        },
    };
    r.finish();

    // Cross-section checks.
    if let (Some(stats), Some(energy)) = (statistics, &energy) {
        let couplings = reservoirs
            .iter()
            .map(|r| Coupling {
                reservoir: r.spec.clone(),
                weights: r.coupling.clone(),
            })
            .collect();
        if let Err(e) = SystemSpec::new(stats, energy.clone(), couplings) {
            diags.push(Diagnostic::new(sys_line, None, e.to_string()));
        }
        let scalar_only = [Task::Measure, Task::BoundStates, Task::Spectra];
        for t in &tasks {
            if scalar_only.contains(t) && dim != 1 {
                diags.push(Diagnostic::new(tasks_line, Some("run"), format!("task '{t}' needs a single level")));
            }
        }
        if tasks.contains(&Task::Rho) && stats == Statistics::Boson && dim != 1 {
            diags.push(Diagnostic::new(
                tasks_line,
                Some("run"),
                "density-matrix propagation supports a single boson level",
            ));
        }
        if tasks.contains(&Task::Rho) && stats == Statistics::Fermion && dim > 10 {
            diags.push(Diagnostic::new(tasks_line, Some("run"), "too many fermion levels for 'rho'"));
        }
        if let Some(InitialState::Fock(ns)) = &initial {
            if stats == Statistics::Boson && ns.iter().any(|&n| n > cutoff) {
                diags.push(Diagnostic::new(sys_line, Some("cutoff"), "initial occupation exceeds the cutoff"));
            }
        }
        for t in &tasks {
            if let Task::Model(kind) = t {
                match reservoirs.first() {
                    None => diags.push(Diagnostic::new(tasks_line, Some("run"), format!("task '{t}' needs a reservoir"))),
                    Some(b) => {
                        let split = if *kind == ModelKind::Majorana { 0.0 } else { energy[(0, 0)].re };
                        if let Err(e) = SpecialModel::new(*kind, b.spec.clone(), split) {
                            diags.push(Diagnostic::new(tasks_line, Some("run"), e.to_string()));
                        }
                    }
                }
            }
        }
    }

    if !diags.is_empty() {
        diags.sort_by_key(|d| d.line);
        return Err(diags);
    }
    Ok(Scenario {
        statistics: statistics.expect("validated"),
        energy: energy.expect("validated"),
        units,
        initial: initial.expect("validated"),
        cutoff,
        reservoirs,
        grid: grid.expect("validated"),
        quadrature_points,
        v_stride,
        tasks,
        anchors,
        max_lag,
        spectra_range: (e_min, e_max),
        spectra_points,
        model_state,
        out_dir,
        precision,
    })
}

/// Overrides `section.key` (or `section.label.key`) in scenario text; used
/// by parameter sweeps. Returns the rewritten text.
pub fn override_value(text: &str, param: &str, value: &str) -> Result<String, Diagnostic> {
    let parts: Vec<&str> = param.split('.').collect();
    let (name, label, key) = match parts.as_slice() {
        [s, k] => (*s, None, *k),
        [s, l, k] => (*s, Some(*l), *k),
        _ => return Err(Diagnostic::new(0, Some(param), "expected 'section.key' or 'section.label.key'")),
    };
    let sections = ini::parse(text).map_err(|d| d.into_iter().next().expect("non-empty diagnostics"))?;
    let matches: Vec<&Section> = sections
        .iter()
        .filter(|s| s.name == name && (label.is_none() || s.label.as_deref() == label))
        .collect();
    let target = match matches.as_slice() {
        [one] => *one,
        [] => return Err(Diagnostic::new(0, Some(param), format!("no section [{name}] to override"))),
        _ => return Err(Diagnostic::new(0, Some(param), "ambiguous section; add the label")),
    };
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    match target.get(key) {
        Some(e) => lines[e.line - 1] = format!("{key} = {value}"),
        None => lines.insert(target.line, format!("{key} = {value}")),
    }
    let mut out = lines.join("\n");
    out.push('\n');
    Ok(out)
}
