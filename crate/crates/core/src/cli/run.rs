//! Task orchestration, CSV output and the run report.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::cli::scenario::{Anchors, InitialState, Precision, Scenario, Task};
use crate::correlations::{bm_reference, bm_series, exact_series, log_anchors, nonmarkov_measure};
use crate::error::{Error, Result};
use crate::greens::{solve_u, solve_v, GreenFunctions, ScalarSpectrum, VOptions};
use crate::linalg::{CMatrix, MatSeries};
use crate::mastereq::{compute_coefficients, occupation, propagate_rho, Basis, DensityMatrix, MECoefficients, PropagationOptions};
use crate::models::model_dynamics;
use crate::spectral::{Statistics, SystemSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

pub const REPORT_FILE: &str = "report.json";

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Overrides the scenario's output directory.
    pub out_dir: Option<PathBuf>,
    /// Size of the worker pool; `None` uses the global pool.
    pub threads: Option<usize>,
    /// Treat warnings as failures.
    pub strict: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskStatus {
    Ok,
    Failed,
}

#[derive(Debug, Clone, Serialize)]
pub struct TaskReport {
    pub task: String,
    pub status: TaskStatus,
    pub wall_time_s: f64,
    pub warnings: Vec<String>,
    pub notes: Vec<String>,
    pub error: Option<String>,
    pub file: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FileRecord {
    pub path: String,
    pub sha256: String,
}

/// Machine-readable summary of one run; serialized with fixed key order.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub exit_code: i32,
    pub threads: usize,
    pub strict: bool,
    pub output_directory: String,
    pub tasks: Vec<TaskReport>,
    pub files: Vec<FileRecord>,
}

impl RunReport {
    pub fn task(&self, name: &str) -> Option<&TaskReport> {
        self.tasks.iter().find(|t| t.task == name)
    }
}

/// Writes RFC 4180 CSV (CRLF line endings).
struct Table {
    precision: Precision,
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    fn new(precision: Precision, header: &[String]) -> Result<Self> {
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::CRLF)
            .from_writer(Vec::new());
        writer.write_record(header).map_err(io_error)?;
        Ok(Self { precision, writer })
    }

    fn row(&mut self, values: &[f64]) -> Result<()> {
        let cells: Vec<String> = values.iter().map(|&x| self.precision.format(x)).collect();
        self.writer.write_record(&cells).map_err(io_error)
    }

    fn into_bytes(self) -> Result<Vec<u8>> {
        self.writer.into_inner().map_err(|e| io_error(e.into_error()))
    }
}

fn io_error(e: impl std::fmt::Display) -> Error {
    Error::Configuration(format!("output: {e}"))
}

fn matrix_header(prefix: &str, dim: usize) -> Vec<String> {
    let mut h = Vec::with_capacity(2 * dim * dim);
    for i in 0..dim {
        for j in 0..dim {
            h.push(format!("re_{prefix}_{i}_{j}"));
            h.push(format!("im_{prefix}_{i}_{j}"));
        }
    }
    h
}

fn push_matrix(row: &mut Vec<f64>, m: &CMatrix) {
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            row.push(m[(i, j)].re);
            row.push(m[(i, j)].im);
        }
    }
}

/// Intermediate results shared between tasks.
#[derive(Default)]
struct Pipeline {
    sys: Option<std::result::Result<SystemSpec, String>>,
    u: Option<std::result::Result<GreenFunctions, String>>,
    v: Option<std::result::Result<GreenFunctions, String>>,
    coefficients: Option<std::result::Result<MECoefficients, String>>,
}

impl Pipeline {
    fn sys(&mut self, s: &Scenario) -> Result<SystemSpec> {
        self.sys
            .get_or_insert_with(|| s.system_spec().map_err(|e| e.to_string()))
            .clone()
            .map_err(Error::Configuration)
    }

    fn u(&mut self, s: &Scenario, warnings: &mut Vec<String>) -> Result<GreenFunctions> {
        if self.u.is_none() {
            let r = self.sys(s).and_then(|sys| solve_u(&sys, &s.grid));
            if let Ok(gf) = &r {
                warnings.extend(gf.warnings.iter().cloned());
            }
            self.u = Some(r.map_err(|e| e.to_string()));
        }
        prerequisite("u", self.u.as_ref())
    }

    fn v(&mut self, s: &Scenario, warnings: &mut Vec<String>) -> Result<GreenFunctions> {
        if self.v.is_none() {
            let r = self.u(s, warnings).and_then(|gf| {
                let sys = self.sys(s)?;
                let max_lag = lag_steps(s);
                let anchors = if s.has(Task::Measure) { anchor_steps(s, max_lag) } else { Vec::new() };
                solve_v(&sys, gf, &VOptions { anchors, max_lag })
            });
            self.v = Some(r.map_err(|e| e.to_string()));
        }
        prerequisite("v", self.v.as_ref())
    }

    fn coefficients(&mut self, s: &Scenario, warnings: &mut Vec<String>) -> Result<MECoefficients> {
        if self.coefficients.is_none() {
            let r = self.v(s, warnings).and_then(|gf| compute_coefficients(&gf));
            if let Ok(c) = &r {
                if !c.singular_steps.is_empty() {
                    warnings.push(format!(
                        "coefficients singular at {} step(s) where u is not invertible (first t = {})",
                        c.singular_steps.len(),
                        s.grid.time(c.singular_steps[0])
                    ));
                }
            }
            self.coefficients = Some(r.map_err(|e| e.to_string()));
        }
        prerequisite("coefficients", self.coefficients.as_ref())
    }
}

fn prerequisite<T: Clone>(name: &str, r: Option<&std::result::Result<T, String>>) -> Result<T> {
    match r.expect("stage computed") {
        Ok(v) => Ok(v.clone()),
        Err(e) => Err(Error::Precondition(format!("{name} failed: {e}"))),
    }
}

fn lag_steps(s: &Scenario) -> usize {
    (s.max_lag / s.grid.dt).round() as usize
}

fn anchor_steps(s: &Scenario, max_lag: usize) -> Vec<usize> {
    match &s.anchors {
        Anchors::Count(n) => log_anchors(&s.grid, *n, max_lag),
        Anchors::Times(ts) => ts.iter().filter_map(|&t| s.grid.index_of(t)).collect(),
    }
}

fn stride_steps(s: &Scenario) -> impl Iterator<Item = usize> {
    let n = s.grid.n_steps;
    let stride = s.v_stride;
    (0..=n).filter(move |k| k % stride == 0 || *k == n)
}

fn series_table(s: &Scenario, prefix: &str, series: &MatSeries, steps: impl Iterator<Item = usize>, scalar: &[&str]) -> Result<Vec<u8>> {
    let dim = series.dim();
    let mut header = vec!["t".to_string()];
    if dim == 1 {
        header.extend(scalar.iter().map(|h| h.to_string()));
    } else {
        header.extend(matrix_header(prefix, dim));
    }
    let mut table = Table::new(s.precision, &header)?;
    for k in steps {
        let mut row = vec![s.grid.time(k)];
        if dim == 1 {
            let z = series.entry(k, 0, 0);
            for h in scalar {
                row.push(match *h {
                    h if h.starts_with("re_") => z.re,
                    h if h.starts_with("im_") => z.im,
                    h if h.starts_with("abs_") => z.norm(),
                    _ => z.re,
                });
            }
        } else {
            push_matrix(&mut row, &series.matrix(k));
        }
        table.row(&row)?;
    }
    table.into_bytes()
}

struct Output {
    bytes: Vec<u8>,
    warnings: Vec<String>,
    notes: Vec<String>,
}

impl From<Vec<u8>> for Output {
    fn from(bytes: Vec<u8>) -> Self {
        Self {
            bytes,
            warnings: Vec::new(),
            notes: Vec::new(),
        }
    }
}

fn initial_rho(s: &Scenario) -> Result<DensityMatrix> {
    match (&s.initial, s.statistics) {
        (InitialState::Coherent(a), _) => DensityMatrix::coherent(s.cutoff, *a),
        (InitialState::Fock(ns), Statistics::Boson) => DensityMatrix::fock(Basis::BosonFock { cutoff: s.cutoff }, ns),
        (InitialState::Fock(ns), Statistics::Fermion) => DensityMatrix::fock(Basis::FermionFock { modes: s.dim() }, ns),
    }
}

fn execute(task: Task, s: &Scenario, p: &mut Pipeline, warnings: &mut Vec<String>) -> Result<Output> {
    let n0 = s.initial.occupation(s.dim());
    match task {
        Task::U => {
            let gf = p.u(s, warnings)?;
            Ok(series_table(s, "u", &gf.u, 0..s.grid.len(), &["re_u", "im_u", "abs_u"])?.into())
        }
        Task::V => {
            let gf = p.v(s, warnings)?;
            let v = gf.v_diag.as_ref().expect("v solved");
            Ok(series_table(s, "v", v, stride_steps(s), &["v"])?.into())
        }
        Task::Occupation => {
            let gf = p.v(s, warnings)?;
            let n = occupation(&gf, &n0)?;
            Ok(series_table(s, "n", &n, stride_steps(s), &["n"])?.into())
        }
        Task::Coefficients => {
            let c = p.coefficients(s, warnings)?;
            let dim = c.dim();
            let mut header = vec!["t".to_string()];
            if dim == 1 {
                header.extend(["eps_prime", "gamma", "gamma_tilde"].map(String::from));
            } else {
                for name in ["eps_prime", "gamma", "gamma_tilde"] {
                    header.extend(matrix_header(name, dim));
                }
            }
            let mut table = Table::new(s.precision, &header)?;
            for k in 0..c.len() {
                let set = c.at(k);
                let mut row = vec![s.grid.time(k)];
                if dim == 1 {
                    row.extend([set.eps_prime[(0, 0)].re, set.gamma[(0, 0)].re, set.gamma_tilde[(0, 0)].re]);
                } else {
                    for m in [&set.eps_prime, &set.gamma, &set.gamma_tilde] {
                        push_matrix(&mut row, m);
                    }
                }
                table.row(&row)?;
            }
            Ok(table.into_bytes()?.into())
        }
        Task::Rho => {
            let c = p.coefficients(s, warnings)?;
            let rho0 = initial_rho(s)?;
            let traj = propagate_rho(
                &rho0,
                &c,
                &PropagationOptions {
                    record_every: s.v_stride,
                    last_step: None,
                },
            )?;
            let dim = rho0.dim();
            let modes = rho0.basis.modes();
            let mut header = vec!["t".to_string(), "trace".into(), "purity".into()];
            header.extend((0..modes).map(|i| if modes == 1 { "n".to_string() } else { format!("n_{i}") }));
            header.extend(matrix_header("rho", dim));
            let mut table = Table::new(s.precision, &header)?;
            for (k, rho) in traj.steps.iter().zip(&traj.states) {
                let mut row = vec![s.grid.time(*k), rho.trace().re, rho.purity()];
                let n = rho.occupation_matrix();
                row.extend((0..modes).map(|i| n[(i, i)].re));
                push_matrix(&mut row, &rho.matrix);
                table.row(&row)?;
            }
            let mut out: Output = table.into_bytes()?.into();
            out.warnings = traj.warnings.clone();
            out.notes.push(format!("max trace drift {:.3e}", traj.trace_drift));
            out.notes.push(format!("min eigenvalue {:.3e}", traj.min_eigenvalue));
            if rho0.basis.statistics() == Statistics::Boson {
                out.notes.push(format!("max top-level population {:.3e}", traj.top_population));
            }
            Ok(out)
        }
        Task::Measure => {
            let gf = p.v(s, warnings)?;
            let sys = p.sys(s)?;
            let n0 = s.initial.max_occupation();
            let anchors: Vec<usize> = gf.v_slices.keys().copied().collect();
            let exact = exact_series(&gf, n0, &anchors, lag_steps(s))?;
            let bm = bm_reference(&sys)?;
            let reference = bm_series(&bm, n0, &exact.base_times, &exact.lags, s.grid.t0);
            let header = ["t", "tau", "re_c", "im_c", "re_c_bm", "im_c_bm", "n_t", "n_t_tau", "measure"].map(String::from);
            let mut table = Table::new(s.precision, &header)?;
            let mut undefined = 0usize;
            for (a, &t) in exact.base_times.iter().enumerate() {
                for (l, &tau) in exact.lags.iter().enumerate() {
                    let m = nonmarkov_measure(&exact, &reference, a, l)?;
                    if m.is_none() {
                        undefined += 1;
                    }
                    let c = exact.values[a][l];
                    let cb = reference.values[a][l];
                    table.row(&[
                        t,
                        tau,
                        c.re,
                        c.im,
                        cb.re,
                        cb.im,
                        exact.base_occupation[a],
                        exact.shifted_occupation[a][l],
                        m.unwrap_or(f64::NAN),
                    ])?;
                }
            }
            let mut out: Output = table.into_bytes()?.into();
            if undefined > 0 {
                out.warnings.push(format!("measure undefined at {undefined} point(s) where n < 1e-12"));
            }
            out.notes.push(format!(
                "Born-Markov reference: kappa = {}, shift = {}, mean occupation = {}",
                bm.kappa, bm.lamb_shift, bm.mean_occupation
            ));
            Ok(out)
        }
        Task::BoundStates => {
            let sys = p.sys(s)?;
            let spec = ScalarSpectrum::new(&sys)?;
            let mut table = Table::new(s.precision, &["energy".to_string(), "residue".into()])?;
            let mut out_warnings = Vec::new();
            for b in &spec.bound_states {
                table.row(&[b.energy, b.residue])?;
                out_warnings.extend(b.warning.clone());
            }
            let mut out: Output = table.into_bytes()?.into();
            out.warnings = out_warnings;
            out.notes.push(format!("{} bound state(s)", spec.bound_states.len()));
            Ok(out)
        }
        Task::Spectra => {
            let sys = p.sys(s)?;
            let spec = ScalarSpectrum::new(&sys)?.with_quadrature_budget(s.quadrature_points);
            let header = ["energy", "j", "lamb_shift", "dissipation"].map(String::from);
            let mut table = Table::new(s.precision, &header)?;
            let (lo, hi) = s.spectra_range;
            let m = s.spectra_points;
            let rows: Vec<Result<[f64; 4]>> = {
                use rayon::prelude::*;
                (0..m)
                    .into_par_iter()
                    .map(|i| {
                        let e = lo + (hi - lo) * i as f64 / (m - 1) as f64;
                        Ok([e, spec.bath().j(e), spec.bath().lamb_shift(e)?, spec.dissipation(e)?])
                    })
                    .collect()
            };
            for r in rows {
                table.row(&r?)?;
            }
            Ok(table.into_bytes()?.into())
        }
        Task::Model(kind) => {
            let m = s.special_model(kind)?;
            let traj = model_dynamics(&m, &s.grid, &s.model_state.matrix())?;
            let header = ["t", "rho_00", "rho_11", "re_rho_01", "im_rho_01", "rate"].map(String::from);
            let mut table = Table::new(s.precision, &header)?;
            for ((t, rho), rate) in traj.times.iter().zip(&traj.states).zip(&traj.rate) {
                let c: Complex64 = rho[(0, 1)];
                table.row(&[*t, rho[(0, 0)].re, rho[(1, 1)].re, c.re, c.im, *rate])?;
            }
            let mut out: Output = table.into_bytes()?.into();
            out.warnings = traj.warnings.clone();
            if !traj.backflow_events.is_empty() {
                out.notes.push(format!(
                    "rate changes sign {} time(s), first at t = {}",
                    traj.backflow_events.len(),
                    traj.backflow_events[0]
                ));
            }
            Ok(out)
        }
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> io::Result<()> {
    fs::write(dir.join(name), bytes)
}

/// Runs every task of `s`, writes one CSV per task plus `report.json`,
/// and returns the report. Task failures are recorded, not returned.
pub fn run(s: &Scenario, options: &RunOptions) -> RunReport {
    match options.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| run_in_pool(s, options)),
            Err(e) => {
                log::warn!("could not build a {n}-thread pool ({e}); using the global pool");
                run_in_pool(s, options)
            }
        },
        None => run_in_pool(s, options),
    }
}

fn run_in_pool(s: &Scenario, options: &RunOptions) -> RunReport {
    let dir = options.out_dir.clone().unwrap_or_else(|| s.out_dir.clone());
    let mut report = RunReport {
        exit_code: EXIT_OK,
        threads: rayon::current_num_threads(),
        strict: options.strict,
        output_directory: dir.display().to_string(),
        tasks: Vec::new(),
        files: Vec::new(),
    };
    if let Err(e) = fs::create_dir_all(&dir) {
        report.tasks.push(TaskReport {
            task: "output".into(),
            status: TaskStatus::Failed,
            wall_time_s: 0.0,
            warnings: Vec::new(),
            notes: Vec::new(),
            error: Some(format!("cannot create {}: {e}", dir.display())),
            file: None,
        });
        report.exit_code = EXIT_NUMERICAL;
        return report;
    }
    let mut pipeline = Pipeline::default();
    for &task in &s.tasks {
        let start = Instant::now();
        let mut warnings = Vec::new();
        let result = execute(task, s, &mut pipeline, &mut warnings);
        let mut entry = TaskReport {
            task: task.to_string(),
            status: TaskStatus::Ok,
            wall_time_s: 0.0,
            warnings,
            notes: Vec::new(),
            error: None,
            file: None,
        };
        match result {
            Ok(out) => {
                entry.warnings.extend(out.warnings);
                entry.notes = out.notes;
                let name = task.file_name();
                match write_file(&dir, &name, &out.bytes) {
                    Ok(()) => {
                        report.files.push(FileRecord {
                            path: name.clone(),
                            sha256: sha256_hex(&out.bytes),
                        });
                        entry.file = Some(name);
                    }
                    Err(e) => {
                        entry.status = TaskStatus::Failed;
                        entry.error = Some(format!("writing {name}: {e}"));
                    }
                }
                if options.strict && !entry.warnings.is_empty() {
                    entry.status = TaskStatus::Failed;
                    entry.error = Some("warnings treated as errors (--strict)".into());
                }
            }
            Err(e) => {
                log::error!("task {task} failed: {e}");
                entry.status = TaskStatus::Failed;
                entry.error = Some(e.to_string());
            }
        }
        for w in &entry.warnings {
            log::warn!("{task}: {w}");
        }
        entry.wall_time_s = start.elapsed().as_secs_f64();
        if entry.status == TaskStatus::Failed {
            report.exit_code = EXIT_NUMERICAL;
        }
        report.tasks.push(entry);
    }
    match serde_json::to_vec_pretty(&report) {
        Ok(bytes) => {
            if let Err(e) = write_file(&dir, REPORT_FILE, &bytes) {
                log::error!("cannot write report: {e}");
                report.exit_code = EXIT_NUMERICAL;
            }
        }
        Err(e) => {
            log::error!("cannot serialize report: {e}");
            report.exit_code = EXIT_NUMERICAL;
        }
    }
    report
}
