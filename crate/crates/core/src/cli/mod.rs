//! Batch front end: single runs, convergence sweeps and the ε study.
//!
//! Every flag can also come from a `key=value` config file (`--config`);
//! flags win. The output directory defaults to `$APRD_OUT_DIR`, then
//! `aprd_out`.

pub mod output;

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::cases::{get_case, BenchmarkCase, Overrides, Simulation};
use crate::error::{Error, Result};
use crate::mesh::{load_mesh_2d, Mesh};
use crate::residual::Variant;
use crate::verify::{eoc, eoc_fit, error_norms, error_vs_fine, ErrorReport};

pub use output::RunManifest;

pub const OUT_DIR_ENV: &str = "APRD_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "aprd", version, about = "Kinetic relaxation residual distribution solver")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one case and write snapshots.
    Run(Flags),
    /// Error and convergence-rate table over a list of resolutions.
    Converge(Flags),
    /// Error table over relaxation parameters and resolutions.
    Apstudy(Flags),
}

#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// key=value file with defaults for any of these flags
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub case: Option<String>,
    /// Polynomial degree; a comma-separated list for sweeps
    #[arg(long, value_delimiter = ',')]
    pub degree: Vec<usize>,
    /// Cells (1D) or rings / cells per unit length (2D); a list for sweeps
    #[arg(long, value_delimiter = ',')]
    pub cells: Vec<usize>,
    /// Triangle mesh file replacing the generated mesh
    #[arg(long)]
    pub mesh: Option<PathBuf>,
    /// Relaxation speed replacing the catalogue value
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Relaxation parameter; a list for `apstudy`
    #[arg(long, value_delimiter = ',')]
    pub eps: Vec<f64>,
    #[arg(long)]
    pub cfl: Option<f64>,
    /// DeC iterations per step
    #[arg(long)]
    pub corrections: Option<usize>,
    /// galerkin_jump or lxf_blend
    #[arg(long)]
    pub scheme: Option<String>,
    /// Jump weights θ_1..θ_d replacing the catalogue values
    #[arg(long, value_delimiter = ',')]
    pub theta: Vec<f64>,
    #[arg(long)]
    pub t_final: Option<f64>,
    /// Extra snapshot times
    #[arg(long, value_delimiter = ',')]
    pub output_times: Vec<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub threads: Option<usize>,
}

/// Flags merged with the config file.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub case: String,
    pub degrees: Vec<usize>,
    pub cells: Vec<usize>,
    pub mesh: Option<PathBuf>,
    pub lambda: Option<f64>,
    pub eps: Vec<f64>,
    pub cfl: Option<f64>,
    pub corrections: Option<usize>,
    pub scheme: Option<Variant>,
    pub theta: Vec<f64>,
    pub t_final: Option<f64>,
    pub output_times: Vec<f64>,
    pub out: PathBuf,
    pub threads: Option<usize>,
}

const CONFIG_KEYS: [&str; 14] = [
    "case",
    "degree",
    "cells",
    "mesh",
    "lambda",
    "eps",
    "cfl",
    "corrections",
    "scheme",
    "theta",
    "t_final",
    "output_times",
    "out",
    "threads",
];

/// Parses `key=value` lines; `#` starts a comment, dashes in keys read as underscores.
pub fn parse_config(text: &str) -> Result<HashMap<String, String>> {
    let mut map = HashMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::config(format!("config line {}: expected key=value", n + 1)))?;
        let key = key.trim().replace('-', "_");
        if !CONFIG_KEYS.contains(&key.as_str()) {
            return Err(Error::config(format!("config line {}: unknown key `{key}`", n + 1)));
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

fn parse_value<T: FromStr>(key: &str, s: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::config(format!("invalid value `{s}` for {key}")))
}

fn parse_list<T: FromStr>(key: &str, s: &str) -> Result<Vec<T>> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| parse_value(key, p))
        .collect()
}

impl Flags {
    pub fn resolve(&self) -> Result<Settings> {
        let file = match &self.config {
            Some(path) => parse_config(&std::fs::read_to_string(path)?)?,
            None => HashMap::new(),
        };
        fn one<T: FromStr>(flag: Option<T>, file: &HashMap<String, String>, key: &str) -> Result<Option<T>> {
            match (flag, file.get(key)) {
                (Some(v), _) => Ok(Some(v)),
                (None, Some(s)) => parse_value(key, s).map(Some),
                (None, None) => Ok(None),
            }
        }
        fn list<T: FromStr + Clone>(flag: &[T], file: &HashMap<String, String>, key: &str) -> Result<Vec<T>> {
            match (flag.is_empty(), file.get(key)) {
                (false, _) => Ok(flag.to_vec()),
                (true, Some(s)) => parse_list(key, s),
                (true, None) => Ok(Vec::new()),
            }
        }
        let case = one(self.case.clone(), &file, "case")?.ok_or_else(|| Error::config("--case is required"))?;
        let scheme = one(self.scheme.clone(), &file, "scheme")?
            .map(|s: String| s.parse::<Variant>())
            .transpose()?;
        let out = one(self.out.clone(), &file, "out")?
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("aprd_out"));
        Ok(Settings {
            case,
            degrees: list(&self.degree, &file, "degree")?,
            cells: list(&self.cells, &file, "cells")?,
            mesh: one(self.mesh.clone(), &file, "mesh")?,
            lambda: one(self.lambda, &file, "lambda")?,
            eps: list(&self.eps, &file, "eps")?,
            cfl: one(self.cfl, &file, "cfl")?,
            corrections: one(self.corrections, &file, "corrections")?,
            scheme,
            theta: list(&self.theta, &file, "theta")?,
            t_final: one(self.t_final, &file, "t_final")?,
            output_times: list(&self.output_times, &file, "output_times")?,
            out,
            threads: one(self.threads, &file, "threads")?,
        })
    }
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

impl Settings {
    fn case(&self) -> Result<BenchmarkCase> {
        get_case(&self.case)
    }

    fn overrides(&self, eps: Option<f64>) -> Overrides {
        Overrides {
            lambda: self.lambda,
            eps,
            cfl: self.cfl,
            corrections: self.corrections,
            variant: self.scheme,
            theta: (!self.theta.is_empty()).then(|| self.theta.clone()),
            t_final: self.t_final,
        }
    }

    fn single_degree(&self) -> Result<usize> {
        match self.degrees[..] {
            [] => Ok(2),
            [d] => Ok(d),
            _ => Err(Error::config("run takes a single --degree")),
        }
    }

    fn mesh(&self, case: &BenchmarkCase, cells: usize) -> Result<Mesh> {
        match &self.mesh {
            Some(path) => Ok(Mesh::Triangles(load_mesh_2d(path)?)),
            None => case.build_mesh(cells),
        }
    }

    /// Settings as manifest lines, with defaults filled in from the case.
    fn manifest_lines(&self, case: &BenchmarkCase, degrees: &[usize], cells: &[usize]) -> Vec<(String, String)> {
        let mut v = vec![
            ("case".to_string(), self.case.clone()),
            ("degree".into(), join(degrees)),
        ];
        match &self.mesh {
            Some(m) => v.push(("mesh".into(), m.display().to_string())),
            None => v.push(("cells".into(), join(cells))),
        }
        v.push(("lambda".into(), self.lambda.unwrap_or(case.lambda).to_string()));
        let eps = if self.eps.is_empty() {
            vec![case.eps]
        } else {
            self.eps.clone()
        };
        v.push(("eps".into(), join(&eps)));
        v.push(("cfl".into(), self.cfl.unwrap_or(case.cfl).to_string()));
        if let Some(k) = self.corrections {
            v.push(("corrections".into(), k.to_string()));
        }
        v.push(("scheme".into(), self.scheme.unwrap_or(case.variant).to_string()));
        if !self.theta.is_empty() {
            v.push(("theta".into(), join(&self.theta)));
        }
        v.push(("t_final".into(), self.t_final.unwrap_or(case.t_final).to_string()));
        if !self.output_times.is_empty() {
            v.push(("output_times".into(), join(&self.output_times)));
        }
        v.push(("out".into(), self.out.display().to_string()));
        if let Some(t) = self.threads {
            v.push(("threads".into(), t.to_string()));
        }
        v
    }
}

/// Files written by a run and the final simulation.
pub struct RunOutcome {
    pub simulation: Simulation,
    pub outputs: Vec<PathBuf>,
    pub manifest: PathBuf,
}

fn snapshot_stem(case: &str, degree: usize, t: f64) -> String {
    format!("{case}_B{degree}_t{t:.4}")
}

pub fn cmd_run(settings: &Settings) -> Result<RunOutcome> {
    let started = Instant::now();
    let case = settings.case()?;
    let degree = settings.single_degree()?;
    let cells = match settings.cells[..] {
        [] => case.default_cells,
        [n] => n,
        _ => return Err(Error::config("run takes a single --cells")),
    };
    let eps = match settings.eps[..] {
        [] => None,
        [e] => Some(e),
        _ => return Err(Error::config("run takes a single --eps")),
    };
    let mesh = settings.mesh(&case, cells)?;
    let sim = case.simulate(mesh, degree, &settings.overrides(eps), &settings.output_times)?;
    let k = case.model.n_components();
    let disc = &sim.op.disc;
    let mut outputs = Vec::new();
    for (t, u) in sim.snapshots.iter().skip(1) {
        let stem = snapshot_stem(case.name, degree, *t);
        if disc.dim() == 1 {
            outputs.push(output::write_file(
                &settings.out,
                &format!("{stem}.csv"),
                &output::snapshot_csv(disc, u, k),
            )?);
        } else {
            let vtk = output::snapshot_vtk(disc, u, k, &format!("{} B{degree} t={t}", case.name));
            outputs.push(output::write_file(&settings.out, &format!("{stem}.vtk"), &vtk)?);
            let slice = output::slice_csv(disc, u, k, case.slice_y(), 401);
            outputs.push(output::write_file(&settings.out, &format!("{stem}_slice.csv"), &slice)?);
        }
    }
    let manifest = RunManifest {
        command: "run".into(),
        settings: settings.manifest_lines(&case, &[degree], &[cells]),
        outputs: outputs.clone(),
        steps: sim.stats.steps,
        wall_seconds: started.elapsed().as_secs_f64(),
    };
    let name = format!("{}_B{degree}_manifest.txt", case.name);
    let manifest = output::write_file(&settings.out, &name, &manifest.render())?;
    Ok(RunOutcome {
        simulation: sim,
        outputs,
        manifest,
    })
}

/// One line of a convergence table; errors are for the first component.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub degree: usize,
    pub cells: usize,
    pub report: ErrorReport,
    /// Rates against the previous row of the same degree.
    pub eoc: Option<[f64; 3]>,
}

/// Errors of a finished run: against the exact solution when the case has
/// one, otherwise against a 1D run on a mesh `4×` finer than `fine_cells`.
pub fn measure_error(case: &BenchmarkCase, sim: &Simulation, fine: Option<&Simulation>) -> Result<ErrorReport> {
    let k = case.model.n_components();
    let t = sim.stats.t;
    let disc = &sim.op.disc;
    if case.exact([0.0, 0.0], t).is_some() {
        return error_norms(disc, &sim.stats.u, k, |x| case.exact(x, t).unwrap_or_default());
    }
    match fine {
        Some(f) => error_vs_fine(disc, &sim.stats.u, &f.op.disc, &f.stats.u, k),
        None => Err(Error::config(format!("case {} has no reference solution", case.name))),
    }
}

/// Runs the reference for sweeps without an exact solution.
fn fine_reference(case: &BenchmarkCase, degree: usize, cells: &[usize], ov: &Overrides) -> Result<Option<Simulation>> {
    if case.exact([0.0, 0.0], 0.0).is_some() {
        return Ok(None);
    }
    if case.model.dim() != 1 {
        return Err(Error::config(format!(
            "case {} has no exact solution and fine-grid references are 1D only",
            case.name
        )));
    }
    let finest = cells.iter().copied().max().unwrap_or(case.default_cells);
    let fine = case.simulate(case.build_mesh(4 * finest)?, degree, ov, &[])?;
    Ok(Some(fine))
}

fn rows_with_rates(degree: usize, cells: &[usize], reports: Vec<ErrorReport>) -> Result<Vec<ConvergenceRow>> {
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    for (n, report) in cells.iter().zip(reports) {
        let eoc = match rows.last() {
            Some(prev) => {
                let hs = [prev.report.h, report.h];
                let rate = |a: f64, b: f64| eoc(&[a, b], &hs).map(|r| r[0]);
                Some([
                    rate(prev.report.l1[0], report.l1[0])?,
                    rate(prev.report.l2[0], report.l2[0])?,
                    rate(prev.report.linf[0], report.linf[0])?,
                ])
            }
            None => None,
        };
        rows.push(ConvergenceRow {
            degree,
            cells: *n,
            report,
            eoc,
        });
    }
    Ok(rows)
}

/// Error table for one degree over increasing resolutions.
pub fn convergence_sweep(
    case: &BenchmarkCase,
    degree: usize,
    cells: &[usize],
    ov: &Overrides,
) -> Result<Vec<ConvergenceRow>> {
    let fine = fine_reference(case, degree, cells, ov)?;
    let mut reports = Vec::new();
    for &n in cells {
        let sim = case.simulate(case.build_mesh(n)?, degree, ov, &[])?;
        reports.push(measure_error(case, &sim, fine.as_ref())?);
    }
    rows_with_rates(degree, cells, reports)
}

pub fn convergence_csv(rows: &[ConvergenceRow]) -> String {
    let mut out = String::from("degree,h,dofs,L1,L2,Linf,eoc_L1,eoc_L2,eoc_Linf\n");
    for r in rows {
        let e = &r.report;
        let _ = write!(
            out,
            "{},{:.6e},{},{:.6e},{:.6e},{:.6e}",
            r.degree, e.h, e.dofs, e.l1[0], e.l2[0], e.linf[0]
        );
        match r.eoc {
            Some([a, b, c]) => {
                let _ = writeln!(out, ",{a:.4},{b:.4},{c:.4}");
            }
            None => out.push_str(",,,\n"),
        }
    }
    out
}

fn default_sweep(case: &BenchmarkCase) -> Vec<usize> {
    if case.model.dim() == 1 {
        vec![32, 64, 128, 256]
    } else {
        vec![4, 8, 16]
    }
}

pub fn cmd_converge(settings: &Settings) -> Result<(Vec<ConvergenceRow>, PathBuf)> {
    let started = Instant::now();
    let case = settings.case()?;
    if settings.mesh.is_some() {
        return Err(Error::config("converge builds its own meshes; drop --mesh"));
    }
    let degrees = if settings.degrees.is_empty() {
        vec![1, 2, 3]
    } else {
        settings.degrees.clone()
    };
    let mut cells = if settings.cells.is_empty() {
        default_sweep(&case)
    } else {
        settings.cells.clone()
    };
    cells.sort_unstable();
    cells.dedup();
    let eps = match settings.eps[..] {
        [] => None,
        [e] => Some(e),
        _ => return Err(Error::config("converge takes a single --eps")),
    };
    let ov = settings.overrides(eps);
    let mut rows = Vec::new();
    for &d in &degrees {
        let sweep = convergence_sweep(&case, d, &cells, &ov)?;
        if sweep.len() >= 2 {
            let errs: Vec<f64> = sweep.iter().map(|r| r.report.l2[0]).collect();
            let hs: Vec<f64> = sweep.iter().map(|r| r.report.h).collect();
            println!("{} B{d}: fitted L2 rate {:.3}", case.name, eoc_fit(&errs, &hs)?);
        }
        rows.extend(sweep);
    }
    let name = format!("{}_convergence.csv", case.name);
    let path = output::write_file(&settings.out, &name, &convergence_csv(&rows))?;
    let manifest = RunManifest {
        command: "converge".into(),
        settings: settings.manifest_lines(&case, &degrees, &cells),
        outputs: vec![path.clone()],
        steps: 0,
        wall_seconds: started.elapsed().as_secs_f64(),
    };
    output::write_file(
        &settings.out,
        &format!("{}_convergence_manifest.txt", case.name),
        &manifest.render(),
    )?;
    Ok((rows, path))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApRow {
    pub eps: f64,
    pub cells: usize,
    pub h: f64,
    pub l2: f64,
    pub eoc_l2: Option<f64>,
    /// Rate more than half an order below `degree + 1`.
    pub reduced: bool,
}

pub fn ap_study(
    case: &BenchmarkCase,
    degree: usize,
    eps_list: &[f64],
    cells: &[usize],
    base: &Overrides,
) -> Result<Vec<ApRow>> {
    let mut rows = Vec::new();
    for &eps in eps_list {
        let ov = Overrides {
            eps: Some(eps),
            ..base.clone()
        };
        let sweep = convergence_sweep(case, degree, cells, &ov)?;
        for r in sweep {
            let eoc_l2 = r.eoc.map(|e| e[1]);
            rows.push(ApRow {
                eps,
                cells: r.cells,
                h: r.report.h,
                l2: r.report.l2[0],
                eoc_l2,
                reduced: eoc_l2.is_some_and(|e| e < degree as f64 + 0.5),
            });
        }
    }
    Ok(rows)
}

pub fn ap_csv(rows: &[ApRow]) -> String {
    let mut out = String::from("eps,cells,h,L2,eoc_L2,order_reduced\n");
    for r in rows {
        let rate = r.eoc_l2.map(|e| format!("{e:.4}")).unwrap_or_default();
        let _ = writeln!(
            out,
            "{:e},{},{:.6e},{:.6e},{rate},{}",
            r.eps, r.cells, r.h, r.l2, r.reduced
        );
    }
    out
}

pub fn cmd_apstudy(settings: &Settings) -> Result<(Vec<ApRow>, PathBuf)> {
    let started = Instant::now();
    let case = settings.case()?;
    let degree = settings.single_degree()?;
    let eps = if settings.eps.is_empty() {
        vec![1e-9, 1e-6, 1e-3, 1.0]
    } else {
        settings.eps.clone()
    };
    let mut cells = if settings.cells.is_empty() {
        vec![32, 64, 128]
    } else {
        settings.cells.clone()
    };
    cells.sort_unstable();
    cells.dedup();
    let rows = ap_study(&case, degree, &eps, &cells, &settings.overrides(None))?;
    let path = output::write_file(
        &settings.out,
        &format!("{}_B{degree}_apstudy.csv", case.name),
        &ap_csv(&rows),
    )?;
    let mut lines = settings.manifest_lines(&case, &[degree], &cells);
    if let Some(e) = lines.iter_mut().find(|(k, _)| k == "eps") {
        e.1 = join(&eps);
    }
    let manifest = RunManifest {
        command: "apstudy".into(),
        settings: lines,
        outputs: vec![path.clone()],
        steps: 0,
        wall_seconds: started.elapsed().as_secs_f64(),
    };
    output::write_file(
        &settings.out,
        &format!("{}_B{degree}_apstudy_manifest.txt", case.name),
        &manifest.render(),
    )?;
    Ok((rows, path))
}

fn init_threads(n: Option<usize>) -> Result<()> {
    if let Some(n) = n {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::config(format!("cannot set up {n} threads: {e}")))?;
    }
    Ok(())
}

/// Entry point of the `aprd` binary.
pub fn execute(cli: Cli) -> Result<()> {
    let (flags, kind) = match &cli.command {
        Command::Run(f) => (f, "run"),
        Command::Converge(f) => (f, "converge"),
        Command::Apstudy(f) => (f, "apstudy"),
    };
    let settings = flags.resolve()?;
    init_threads(settings.threads)?;
    match kind {
        "run" => {
            let out = cmd_run(&settings)?;
            let s = &out.simulation.stats;
            println!("{}: {} steps to t = {}", settings.case, s.steps, s.t);
            for p in out.outputs.iter().chain([&out.manifest]) {
                println!("wrote {}", p.display());
            }
        }
        "converge" => {
            let (rows, path) = cmd_converge(&settings)?;
            print!("{}", convergence_csv(&rows));
            println!("wrote {}", path.display());
        }
        _ => {
            let (rows, path) = cmd_apstudy(&settings)?;
            print!("{}", ap_csv(&rows));
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}
