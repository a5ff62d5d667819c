//! Command-line driver: configuration, orchestration and file output.

use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::boundary_data::{BoundaryFunction, DirectionField, Piece, ValueKind};
use crate::direction_solver::{solve_directional, DirectionalParams, HarmonicSolution};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::jordan_domain::{solve_on_map, ConformalMap, TheodorsenParams};
use crate::neumann::{solve_neumann, Domain};
use crate::rh_solver::{default_hom_points, homogeneous_family, SolverParams};
use crate::verify::{certificate_points, dimension_certificate, solution_residual, verify_solution, VerifySettings};

#[derive(Debug, Parser)]
#[command(
    name = "hbvp",
    version,
    about = "Neumann and directional-derivative problems for harmonic functions"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Override the number of boundary nodes.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Override the verification tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Seed for randomized sampling.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Solve and write the field CSV.
    Solve,
    /// Solve, write the field CSV and the verification report.
    Verify,
    /// Write one CSV per family member and the rank certificate.
    Family,
    /// Write the boundary correspondence table of the domain map.
    Map,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Problem {
    Directional,
    Neumann,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainConfig {
    Disk,
    Starlike { rho: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Angle {
    Number(f64),
    Text(String),
}

impl Angle {
    fn value(&self) -> Result<f64> {
        match self {
            Angle::Number(x) => Ok(*x),
            Angle::Text(s) => Expr::parse_angle(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceConfig {
    pub from: Angle,
    pub to: Angle,
    pub expr: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PhiConfig {
    Expr(String),
    Pieces(Vec<PieceConfig>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParamsConfig {
    pub n: usize,
    pub cut: Angle,
    /// Accepted for compatibility; the antiderivative does not sample a circle.
    pub rho_sample: Option<f64>,
    pub hom_points: Vec<Angle>,
    pub hom_coeffs: Vec<f64>,
    pub d0: f64,
}

impl Default for ParamsConfig {
    fn default() -> Self {
        ParamsConfig {
            n: 1024,
            cut: Angle::Number(0.0),
            rho_sample: None,
            hom_points: Vec::new(),
            hom_coeffs: Vec::new(),
            d0: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub points: usize,
    pub half_width: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            points: 101,
            half_width: 0.95,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputsConfig {
    pub field_csv: String,
    pub report: String,
    pub certificate: String,
    pub map_table: String,
    pub grid: GridConfig,
}

impl Default for OutputsConfig {
    fn default() -> Self {
        OutputsConfig {
            field_csv: "field.csv".into(),
            report: "report.txt".into(),
            certificate: "certificate.txt".into(),
            map_table: "map.csv".into(),
            grid: GridConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FamilyConfig {
    /// Number of homogeneous poles.
    pub k: usize,
    /// Sample points of the rank certificate.
    pub samples: usize,
}

impl Default for FamilyConfig {
    fn default() -> Self {
        FamilyConfig { k: 10, samples: 64 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MapConfig {
    pub max_iter: usize,
    pub fp_tol: f64,
}

impl Default for MapConfig {
    fn default() -> Self {
        MapConfig {
            max_iter: 200,
            fp_tol: 1e-13,
        }
    }
}

fn default_nu() -> String {
    "normal".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: Problem,
    #[serde(default = "default_domain")]
    pub domain: DomainConfig,
    #[serde(default = "default_nu")]
    pub nu: String,
    pub phi: PhiConfig,
    #[serde(default)]
    pub params: ParamsConfig,
    #[serde(default)]
    pub verify: VerifySettings,
    #[serde(default)]
    pub family: FamilyConfig,
    #[serde(default)]
    pub map: MapConfig,
    #[serde(default)]
    pub outputs: OutputsConfig,
}

fn default_domain() -> DomainConfig {
    DomainConfig::Disk
}

const TOP_KEYS: &[&str] = &[
    "problem", "domain", "nu", "phi", "params", "verify", "family", "map", "outputs",
];
const PARAMS_KEYS: &[&str] = &["n", "cut", "rho_sample", "hom_points", "hom_coeffs", "d0"];
const VERIFY_KEYS: &[&str] = &[
    "vertices",
    "apertures",
    "tol",
    "delta",
    "probe_depth",
    "quotient_tol",
    "quotient_depth",
    "chords",
    "chord_tol",
    "residual_grid",
    "residual_radius",
    "residual_step",
    "seed",
];
const OUTPUT_KEYS: &[&str] = &["field_csv", "report", "certificate", "map_table", "grid"];
const GRID_KEYS: &[&str] = &["points", "half_width"];
const FAMILY_KEYS: &[&str] = &["k", "samples"];
const MAP_KEYS: &[&str] = &["max_iter", "fp_tol"];
const PIECE_KEYS: &[&str] = &["from", "to", "expr"];

fn collect_unknown(value: &Value, known: &[&str], prefix: &str, out: &mut Vec<String>) {
    if let Value::Object(map) = value {
        for key in map.keys() {
            if !known.contains(&key.as_str()) {
                out.push(format!("{prefix}{key}"));
            }
        }
    }
}

/// Every key of the configuration that is not part of the schema.
pub fn unknown_keys(value: &Value) -> Vec<String> {
    let mut out = Vec::new();
    collect_unknown(value, TOP_KEYS, "", &mut out);
    let sections: [(&str, &[&str]); 5] = [
        ("params", PARAMS_KEYS),
        ("verify", VERIFY_KEYS),
        ("outputs", OUTPUT_KEYS),
        ("family", FAMILY_KEYS),
        ("map", MAP_KEYS),
    ];
    for (name, keys) in sections {
        if let Some(v) = value.get(name) {
            collect_unknown(v, keys, &format!("{name}."), &mut out);
        }
    }
    if let Some(g) = value.get("outputs").and_then(|o| o.get("grid")) {
        collect_unknown(g, GRID_KEYS, "outputs.grid.", &mut out);
    }
    if let Some(Value::Object(d)) = value.get("domain") {
        collect_unknown(&Value::Object(d.clone()), &["starlike"], "domain.", &mut out);
        if let Some(s) = d.get("starlike") {
            collect_unknown(s, &["rho"], "domain.starlike.", &mut out);
        }
    }
    if let Some(Value::Array(pieces)) = value.get("phi") {
        for (i, p) in pieces.iter().enumerate() {
            collect_unknown(p, PIECE_KEYS, &format!("phi[{i}]."), &mut out);
        }
    }
    out
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid JSON: {e}")))?;
        let unknown = unknown_keys(&value);
        if !unknown.is_empty() {
            return Err(Error::Config(format!("unknown keys: {}", unknown.join(", "))));
        }
        let config: RunConfig = serde_json::from_value(value).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.params.n;
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::Config(format!(
                "params.n = {n} must be a power of two and at least 16"
            )));
        }
        let cut = self.params.cut.value()?;
        if !(0.0..TAU).contains(&cut) {
            return Err(Error::Config(format!("params.cut = {cut} must lie in [0, 2π)")));
        }
        for (i, p) in self.params.hom_points.iter().enumerate() {
            let a = p.value()?;
            if !(0.0..TAU).contains(&a) {
                return Err(Error::Config(format!(
                    "params.hom_points[{i}] = {a} must lie in [0, 2π)"
                )));
            }
        }
        if !self.params.d0.is_finite() {
            return Err(Error::Config("params.d0 must be finite".into()));
        }
        if self.problem == Problem::Neumann && self.nu != "normal" {
            return Err(Error::Config("nu must be \"normal\" for the Neumann problem".into()));
        }
        if self.problem == Problem::Directional && self.nu == "normal" && self.domain != DomainConfig::Disk {
            return Err(Error::Config(
                "use problem \"neumann\" for the normal on a star-like domain".into(),
            ));
        }
        if self.outputs.grid.points < 2 || !(self.outputs.grid.half_width > 0.0) {
            return Err(Error::Config(
                "outputs.grid needs at least 2 points and positive half_width".into(),
            ));
        }
        Ok(())
    }

    pub fn cut(&self) -> Result<f64> {
        self.params.cut.value()
    }

    pub fn phi(&self) -> Result<BoundaryFunction> {
        let n = self.params.n;
        let pieces = match &self.phi {
            PhiConfig::Expr(e) => vec![Piece::new(0.0, TAU, e)?],
            PhiConfig::Pieces(list) => list
                .iter()
                .map(|p| Piece::new(p.from.value()?, p.to.value()?, &p.expr))
                .collect::<Result<Vec<_>>>()?,
        };
        BoundaryFunction::from_pieces(pieces, ValueKind::Real, n)
    }

    pub fn solver_params(&self) -> Result<DirectionalParams> {
        let hom_points = self
            .params
            .hom_points
            .iter()
            .map(|a| Ok(Complex64::from_polar(1.0, a.value()?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(DirectionalParams {
            solver: SolverParams {
                hom_points,
                hom_coeffs: self.params.hom_coeffs.clone(),
                ..Default::default()
            },
            d0: self.params.d0,
            ..Default::default()
        })
    }

    pub fn conformal_map(&self) -> Result<Option<Arc<ConformalMap>>> {
        match &self.domain {
            DomainConfig::Disk => Ok(None),
            DomainConfig::Starlike { rho } => Ok(Some(Arc::new(ConformalMap::from_expr(
                rho,
                TheodorsenParams {
                    n: self.params.n,
                    max_iter: self.map.max_iter,
                    fp_tol: self.map.fp_tol,
                },
            )?))),
        }
    }
}

/// A solved configuration: the solution with `ν` and `φ` on the disk parameter.
pub struct Solved {
    pub solution: HarmonicSolution,
    pub nu: DirectionField,
    pub phi: BoundaryFunction,
    pub map: Option<Arc<ConformalMap>>,
}

pub fn solve_config(config: &RunConfig) -> Result<Solved> {
    let phi = config.phi()?;
    let params = config.solver_params()?;
    let cut = config.cut()?;
    let map = config.conformal_map()?;
    let domain = match &map {
        None => Domain::Disk,
        Some(m) => Domain::Mapped(Arc::clone(m)),
    };
    let solution = match config.problem {
        Problem::Neumann => solve_neumann(&phi, &domain, cut, &params)?,
        Problem::Directional => {
            let nu = if config.nu == "normal" {
                DirectionField::disk_inner_normal(config.params.n, cut)?
            } else {
                DirectionField::from_expr(&config.nu, config.params.n, cut)?
            };
            match &map {
                None => solve_directional(&nu, &phi, &params)?,
                Some(m) => {
                    let lambda = m.pull_back_direction(&nu)?;
                    solve_on_map(m, &lambda, &m.pull_back(&phi)?, &params)?
                }
            }
        }
    };
    let nu = solution.rh().nu().clone();
    let phi = match &map {
        None => phi,
        Some(m) => m.pull_back(&phi)?,
    };
    Ok(Solved { solution, nu, phi, map })
}

/// Grid points of `[−w, w]²` inside the domain, row-major.
pub fn field_grid(config: &RunConfig, sol: &HarmonicSolution) -> Vec<Complex64> {
    let GridConfig { points, half_width } = config.outputs.grid;
    let step = 2.0 * half_width / (points - 1) as f64;
    let mut out = Vec::new();
    for i in 0..points {
        for k in 0..points {
            let w = Complex64::new(-half_width + step * k as f64, -half_width + step * i as f64);
            if sol.to_disk(w).is_ok() {
                out.push(w);
            }
        }
    }
    out
}

pub fn field_csv(sol: &HarmonicSolution, grid: &[Complex64]) -> Result<String> {
    let mut out = String::from("x,y,u\n");
    for &w in grid {
        let u = sol.u_at(w)?;
        let _ = writeln!(out, "{:.16e},{:.16e},{:.16e}", w.re, w.im, u);
    }
    Ok(out)
}

/// Parses a field CSV back into `(x, y, u)` rows.
pub fn read_field_csv(text: &str) -> Result<Vec<(f64, f64, f64)>> {
    let mut lines = text.lines();
    if lines.next() != Some("x,y,u") {
        return Err(Error::Data("field CSV must start with the header x,y,u".into()));
    }
    lines
        .filter(|l| !l.is_empty())
        .map(|l| {
            let v: Vec<f64> = l
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::Data(format!("{e} in '{l}'")))
                })
                .collect::<Result<_>>()?;
            if v.len() != 3 {
                return Err(Error::Data(format!("expected 3 columns in '{l}'")));
            }
            Ok((v[0], v[1], v[2]))
        })
        .collect()
}

/// Files written by a run, removed again if the run fails.
struct Outputs {
    dir: PathBuf,
    written: Vec<PathBuf>,
    lock: Option<PathBuf>,
}

impl Outputs {
    fn open(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        let lock = dir.join(".hbvp.lock");
        match fs::OpenOptions::new().write(true).create_new(true).open(&lock) {
            Ok(_) => {}
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                return Err(Error::Config(format!(
                    "output directory {} is locked by another run ({})",
                    dir.display(),
                    lock.display()
                )))
            }
            Err(e) => return Err(e.into()),
        }
        Ok(Outputs {
            dir: dir.to_path_buf(),
            written: Vec::new(),
            lock: Some(lock),
        })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<PathBuf> {
        let path = self.dir.join(name);
        self.written.push(path.clone());
        fs::write(&path, contents)?;
        Ok(path)
    }

    fn discard(&mut self) {
        for p in self.written.drain(..) {
            let _ = fs::remove_file(p);
        }
    }
}

impl Drop for Outputs {
    fn drop(&mut self) {
        if let Some(lock) = self.lock.take() {
            let _ = fs::remove_file(lock);
        }
    }
}

fn trace(sol: &Solved, config: &RunConfig) -> String {
    let rh = sol.solution.rh();
    let mut out = String::new();
    let _ = writeln!(out, "problem: {:?}, N = {}", config.problem, config.params.n);
    let _ = writeln!(out, "arg ν jumps: {}", rh.alpha().jumps().len());
    let _ = writeln!(out, "ψ jumps: {}", rh.psi().jumps().len());
    let _ = writeln!(out, "clamped conjugate samples: {}", rh.clamped_samples());
    if let Some(m) = &sol.map {
        let _ = writeln!(
            out,
            "map: {} iterations, correspondence residual {:.3e}",
            m.iterations(),
            m.residual()
        );
    }
    if config.params.rho_sample.is_some() {
        out.push_str("note: params.rho_sample has no effect; the antiderivative uses ray quadrature\n");
    }
    for note in sol.solution.notes() {
        let _ = writeln!(out, "note: {note}");
    }
    out
}

fn run_command(cli: &Cli, config: &RunConfig, outputs: &mut Outputs) -> Result<String> {
    let mut log = String::new();
    match cli.command {
        Command::Solve | Command::Verify => {
            let solved = solve_config(config)?;
            log.push_str(&trace(&solved, config));
            let grid = field_grid(config, &solved.solution);
            let path = outputs.write(&config.outputs.field_csv, &field_csv(&solved.solution, &grid)?)?;
            let _ = writeln!(log, "wrote {}", path.display());
            if cli.command == Command::Verify {
                let report = verify_solution(&solved.solution, &solved.nu, &solved.phi, &config.verify)?;
                let mut text = String::new();
                let _ = writeln!(
                    text,
                    "# config: {}",
                    serde_json::to_string(config).expect("config serializes")
                );
                text.push_str(&report.to_text());
                let path = outputs.write(&config.outputs.report, &text)?;
                let _ = writeln!(
                    log,
                    "pass_fraction = {:.4} over {} vertices; wrote {}",
                    report.pass_fraction,
                    report.active_count(),
                    path.display()
                );
            }
        }
        Command::Family => {
            let solved = solve_config(config)?;
            log.push_str(&trace(&solved, config));
            let avoid = solved.solution.rh().exceptional_angles();
            let points = default_hom_points(config.family.k, &avoid);
            let members = certificate_family(&solved.solution, &points)?;
            let grid = field_grid(config, &solved.solution);
            for (i, m) in members.iter().enumerate() {
                outputs.write(&format!("family_{i}.csv"), &field_csv(m, &grid)?)?;
            }
            let sample = certificate_points(config.family.samples, &points);
            let sample: Vec<Complex64> = match &solved.map {
                None => sample,
                Some(m) => sample
                    .iter()
                    .map(|&z| crate::direction_solver::DomainMap::omega(m.as_ref(), z))
                    .collect(),
            };
            let cert = dimension_certificate(&members, &sample)?;
            let mut text = String::new();
            let _ = writeln!(
                text,
                "# config: {}",
                serde_json::to_string(config).expect("config serializes")
            );
            let _ = writeln!(text, "members={}", cert.members);
            let _ = writeln!(text, "sigma_min={:.16e}", cert.sigma_min);
            for s in &cert.singular_values {
                let _ = writeln!(text, "singular_value={s:.16e}");
            }
            for d in &cert.diagnostics {
                let _ = writeln!(text, "note={d}");
            }
            let path = outputs.write(&config.outputs.certificate, &text)?;
            let _ = writeln!(
                log,
                "{} members, sigma_min = {:.3e}; wrote {}",
                cert.members,
                cert.sigma_min,
                path.display()
            );
        }
        Command::Map => {
            let map = match config.conformal_map()? {
                Some(m) => m,
                None => Arc::new(ConformalMap::identity(config.params.n)?),
            };
            let n = config.params.n;
            let mut text = String::from("t,sigma,abs_omega,residual\n");
            for j in 0..n {
                let t = crate::boundary_data::node_angle(j, n);
                let w = crate::direction_solver::DomainMap::omega(map.as_ref(), Complex64::from_polar(1.0, t));
                let _ = writeln!(
                    text,
                    "{:.16e},{:.16e},{:.16e},{:.16e}",
                    t,
                    map.sigma(t),
                    w.norm(),
                    map.boundary_residual(t)
                );
            }
            let path = outputs.write(&config.outputs.map_table, &text)?;
            let _ = writeln!(
                log,
                "map: {} iterations, residual {:.3e}; wrote {}",
                map.iterations(),
                map.residual(),
                path.display()
            );
        }
    }
    Ok(log)
}

/// Base solution, its unit shift, and the base plus each pole member of the
/// homogeneous family: `k + 2` members.
pub fn certificate_family(base: &HarmonicSolution, points: &[Complex64]) -> Result<Vec<HarmonicSolution>> {
    let rh = base.rh();
    let hom = homogeneous_family(rh.nu(), points)?;
    let mut members = vec![base.clone(), base.with_shift(base.d0() + 1.0)];
    for (j, _) in hom.iter().enumerate().skip(1) {
        let mut coeffs = vec![0.0; points.len() + 1];
        coeffs[j] = 1.0;
        let rh_j = rh.with_homogeneous(points.to_vec(), coeffs)?;
        let map = base.map().cloned();
        members.push(HarmonicSolution::new(rh_j, map, Default::default(), base.d0())?);
    }
    Ok(members)
}

/// Applies command-line overrides to a parsed configuration.
pub fn apply_overrides(config: &mut RunConfig, cli: &Cli) -> Result<()> {
    if let Some(n) = cli.n {
        config.params.n = n;
    }
    if let Some(t) = cli.tol {
        config.verify.tol = t;
    }
    if let Some(s) = cli.seed {
        config.verify.seed = s;
    }
    config.validate()
}

/// Runs the CLI and returns the process exit status.
pub fn run(cli: &Cli) -> i32 {
    let result = (|| -> Result<String> {
        let path = cli
            .config
            .as_ref()
            .ok_or_else(|| Error::Config("--config PATH is required".into()))?;
        let text =
            fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut config = RunConfig::from_json(&text)?;
        apply_overrides(&mut config, cli)?;
        let mut outputs = Outputs::open(&cli.out)?;
        match run_command(cli, &config, &mut outputs) {
            Ok(log) => Ok(log),
            Err(e) => {
                outputs.discard();
                Err(e)
            }
        }
    })();
    match result {
        Ok(log) => {
            if !cli.quiet {
                print!("{log}");
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Laplacian residual statistics of the grid values of a field CSV, using the
/// solution to fill the stencil.
pub fn csv_residual(
    sol: &HarmonicSolution,
    rows: &[(f64, f64, f64)],
    radius: f64,
    h: f64,
) -> crate::verify::ResidualStats {
    let grid: Vec<Complex64> = rows
        .iter()
        .map(|&(x, y, _)| Complex64::new(x, y))
        .filter(|z| z.norm() <= radius)
        .collect();
    solution_residual(sol, &grid, radius, h)
}
