//! Command-line front end: configuration, orchestration and the CSV/JSON file formats.
//!
//! All CSV files have a header line, `.` decimals, LF line endings and values
//! written as `{:.16e}` (17 significant digits).

use crate::analysis::{density_experiment, density_sobolev_experiment, ArcSplit};
use crate::coeff::{alpha_from_nu, sigma_to_nu, Coefficient, NuSample};
use crate::domains::{pullback_problem, pushforward_solution, ConformalMap, MapSpec};
use crate::error::Error;
use crate::expr::Expr;
use crate::factor::factorize;
use crate::grid::{BoundarySpectrum, DiskField, GridSpec, PolarGrid};
use crate::ops::{
    analytic_projection, beurling, cauchy_area, conjugation_h0, trace_at_boundary, SignVariant, TraceKind,
};
use crate::radial_oracle::RadialOracle;
use crate::solver::{dirichlet_g, dirichlet_h, hilbert_nu, neumann, SolveConfig};
use crate::verify::{run_verify_with, VerifyConfig};
use clap::{Parser, Subcommand};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use thiserror::Error;

type C64 = Complex64;

/// Environment fallback for `--threads`.
pub const THREADS_ENV: &str = "BELTRAMI_LAB_THREADS";
/// Angle and radius mismatch tolerated when reading grid CSV input.
const GRID_MATCH_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Solver(#[from] Error),
    #[error("{0} acceptance criteria failed")]
    VerifyFailed(usize),
}

impl CliError {
    /// 3 for non-convergence and Neumann incompatibility, 1 for failed
    /// verification, 2 for everything caused by the configuration or its files.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Solver(Error::NotConverged { .. } | Error::Compatibility(_)) => 3,
            CliError::VerifyFailed(_) => 1,
            _ => 2,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_owned(),
        source,
    }
}

/// The dilatation, either on the disk or, under a non-identity map, on the image domain.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CoefficientSpec {
    #[default]
    Zero,
    Constant {
        nu: f64,
    },
    ConstantSigma {
        sigma: f64,
    },
    /// `σ = 1 + a|z|²`.
    Radial {
        a: f64,
    },
    /// Real expression for `ν`.
    Expression {
        nu: String,
        #[serde(default)]
        kappa: Option<f64>,
    },
}

impl CoefficientSpec {
    fn sampler(&self) -> CliResult<Box<dyn Fn(C64) -> NuSample + Send + Sync>> {
        let zero = C64::new(0.0, 0.0);
        Ok(match self.clone() {
            CoefficientSpec::Zero => Box::new(move |_| NuSample { nu: 0.0, dbar_nu: zero }),
            CoefficientSpec::Constant { nu } => Box::new(move |_| NuSample { nu, dbar_nu: zero }),
            CoefficientSpec::ConstantSigma { sigma } => {
                if !(sigma > 0.0) {
                    return Err(CliError::Config(format!("sigma must be positive, got {sigma}")));
                }
                let nu = sigma_to_nu(sigma);
                Box::new(move |_| NuSample { nu, dbar_nu: zero })
            }
            CoefficientSpec::Radial { a } => Box::new(move |w: C64| {
                let s = 1.0 + a * w.norm_sqr();
                NuSample {
                    nu: sigma_to_nu(s),
                    dbar_nu: -2.0 * a * w / ((1.0 + s) * (1.0 + s)),
                }
            }),
            CoefficientSpec::Expression { nu, .. } => {
                let e = Expr::parse(&nu)?;
                Box::new(move |w| {
                    let d = e.eval_dual(w);
                    NuSample {
                        nu: d.v.re,
                        dbar_nu: 0.5 * C64::new(d.dx.re, d.dy.re),
                    }
                })
            }
        })
    }

    fn build(&self, grid: &Arc<PolarGrid>) -> CliResult<Coefficient> {
        Ok(match self {
            CoefficientSpec::Zero => Coefficient::zero(grid),
            CoefficientSpec::Constant { nu } => Coefficient::constant(grid, *nu)?,
            CoefficientSpec::ConstantSigma { sigma } => Coefficient::constant_sigma(grid, *sigma)?,
            CoefficientSpec::Radial { a } => Coefficient::radial_quadratic(grid, *a)?,
            CoefficientSpec::Expression { nu, kappa } => Coefficient::from_expression(grid, &Expr::parse(nu)?, *kappa)?,
        })
    }
}

/// Real boundary data: an expression evaluated on the boundary, or a CSV file
/// with header `theta,value` and one row per grid angle (disk angles, also under a map).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundarySpec {
    Expression { expr: String },
    Csv { path: PathBuf },
}

impl Default for BoundarySpec {
    fn default() -> Self {
        BoundarySpec::Expression {
            expr: "cos(theta)".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FactorizeOptions {
    pub variant: SignVariant,
}

impl Default for FactorizeOptions {
    fn default() -> Self {
        Self {
            variant: SignVariant::Plus,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DensityOptions {
    /// Complex target on the circle.
    pub target: String,
    /// Arcs `[a, b]` (radians, counterclockwise) forming `I`.
    pub arcs: Vec<[f64; 2]>,
    pub schedule: Vec<usize>,
    /// Fit in the fractional Sobolev norm instead of `L^p`.
    pub sobolev: bool,
}

impl Default for DensityOptions {
    fn default() -> Self {
        Self {
            target: "exp(-i*theta)".into(),
            arcs: vec![[0.0, std::f64::consts::PI]],
            schedule: vec![4, 8, 16, 32],
            sobolev: false,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    #[default]
    CauchyArea,
    Beurling,
    DBar,
    D,
    ConjugationH0,
    AnalyticProjection,
    HilbertNu,
}

impl OperatorKind {
    fn on_disk(self) -> bool {
        matches!(self, Self::CauchyArea | Self::Beurling | Self::DBar | Self::D)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OpOptions {
    pub operator: OperatorKind,
    pub input: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyOptions {
    pub only: Vec<String>,
}

/// Everything a run needs; every field has a default.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridSpec,
    pub solve: SolveConfig,
    pub coefficient: CoefficientSpec,
    pub boundary: BoundarySpec,
    pub map: MapSpec,
    pub output_dir: PathBuf,
    /// Compare with the radial ODE oracle (radial coefficient, identity map).
    pub oracle: bool,
    pub seed: u64,
    pub factorize: FactorizeOptions,
    pub density: DensityOptions,
    pub op: OpOptions,
    pub verify: VerifyOptions,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            grid: GridSpec::default(),
            solve: SolveConfig::default(),
            coefficient: CoefficientSpec::default(),
            boundary: BoundarySpec::default(),
            map: MapSpec::default(),
            output_dir: PathBuf::from("out"),
            oracle: false,
            seed: 0,
            factorize: FactorizeOptions::default(),
            density: DensityOptions::default(),
            op: OpOptions::default(),
            verify: VerifyOptions::default(),
        }
    }
}

/// Sets `key.sub = value` in a JSON object; `value` is parsed as JSON, else taken as a string.
fn apply_override(root: &mut Value, assignment: &str) -> CliResult<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("--set expects key=value, got {assignment:?}")))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_owned()));
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        if part.is_empty() {
            return Err(CliError::Config(format!("empty segment in key {key:?}")));
        }
        let obj = node
            .as_object_mut()
            .ok_or_else(|| CliError::Config(format!("{key:?}: {part:?} is inside a non-object")))?;
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        node = obj.entry(part.to_string()).or_insert_with(|| json!({}));
    }
    Ok(())
}

/// Fills entries missing from `user` with those of `defaults`. An object that names
/// its own `kind` is a different enum variant and is left as given.
fn merge_defaults(user: &mut Value, defaults: &Value) {
    if let (Some(u), Some(d)) = (user.as_object_mut(), defaults.as_object()) {
        if u.contains_key("kind") {
            return;
        }
        for (k, dv) in d {
            match u.get_mut(k) {
                Some(uv) => merge_defaults(uv, dv),
                None => {
                    u.insert(k.clone(), dv.clone());
                }
            }
        }
    }
}

impl RunConfig {
    /// Reads the optional JSON file, applies `--set` overrides and validates.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> CliResult<Self> {
        let mut root = match path {
            Some(p) => {
                let text = fs::read_to_string(p).map_err(io_err(p))?;
                serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
            }
            None => json!({}),
        };
        for o in overrides {
            apply_override(&mut root, o)?;
        }
        merge_defaults(
            &mut root,
            &serde_json::to_value(RunConfig::default()).expect("config serializes"),
        );
        let cfg: RunConfig = serde_json::from_value(root).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.solve.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    fn grid(&self) -> CliResult<Arc<PolarGrid>> {
        self.grid.build().map_err(|e| CliError::Config(e.to_string()))
    }

    fn map(&self) -> CliResult<Option<ConformalMap>> {
        match self.map {
            MapSpec::Identity => Ok(None),
            ref spec => Ok(Some(
                ConformalMap::new(spec.clone()).map_err(|e| CliError::Config(e.to_string()))?,
            )),
        }
    }

    /// Coefficient and real boundary data on the disk, pulled back through the map if any.
    fn problem(&self, grid: &Arc<PolarGrid>) -> CliResult<(Coefficient, BoundarySpectrum)> {
        let csv = match &self.boundary {
            BoundarySpec::Csv { path } => Some(read_boundary_csv(path, grid)?),
            BoundarySpec::Expression { .. } => None,
        };
        let expr = match &self.boundary {
            BoundarySpec::Expression { expr } => Some(Expr::parse(expr).map_err(|e| CliError::Config(e.to_string()))?),
            BoundarySpec::Csv { .. } => None,
        };
        let circle = grid.circle();
        let config_err = |e: Error| CliError::Config(e.to_string());
        match self.map()? {
            None => {
                let coef = self.coefficient.build(grid).map_err(|e| match e {
                    CliError::Solver(e) => config_err(e),
                    e => e,
                })?;
                let phi = match (csv, expr) {
                    (Some(phi), _) => phi,
                    (None, Some(e)) => BoundarySpectrum::from_real_fn(circle, |t| e.eval_boundary(t).re),
                    (None, None) => unreachable!("boundary spec is one of the two kinds"),
                };
                Ok((coef, phi))
            }
            Some(map) => {
                let nu = self.coefficient.sampler()?;
                let (coef, from_expr) = match &expr {
                    Some(e) => pullback_problem(&map, grid, nu, |w| e.eval(w).re).map_err(config_err)?,
                    None => pullback_problem(&map, grid, nu, |_| 0.0).map_err(config_err)?,
                };
                Ok((coef, csv.unwrap_or(from_expr)))
            }
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "beltrami-lab",
    version,
    about = "Solvers and diagnostics for the conjugate Beltrami equation on the unit disk"
)]
pub struct Cli {
    /// JSON run configuration; every field is optional.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override a configuration entry, e.g. --set grid.n_theta=128 or --set coefficient.kind=radial.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub overrides: Vec<String>,
    /// Worker thread cap (falls back to BELTRAMI_LAB_THREADS).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Dirichlet problem with Re tr f = φ.
    ///
    /// Writes field.csv (r,theta,re,im of f on the radial nodes and the circle),
    /// trace.csv (theta,re,im of tr f), report.json, and image.csv (x,y,re,im)
    /// when a map is configured. "oracle": true adds an ODE comparison block.
    Solve,
    /// Conjugate function ℋ_ν φ.
    ///
    /// Writes hilbert.csv (theta,phi,hilbert) and report.json.
    Hilbert,
    /// Neumann problem with ∂ₙu = g (boundary data as g).
    ///
    /// Writes field.csv (r,theta,re,im of u), trace.csv (theta,re,im of tr u)
    /// and report.json. Exits with 3 when ∫σg ≠ 0.
    Neumann,
    /// Solves ∂̄w = αw̄ with Re tr w = boundary data, then factors w = eˢF.
    ///
    /// Writes w.csv, s.csv, f.csv (r,theta,re,im) and report.json with the certificates.
    Factorize,
    /// Approximation on an arc I by traces bounded on the complement J.
    ///
    /// Writes trend.csv (error_i,norm_j, one row per schedule entry) and report.json.
    Density,
    /// Runs the acceptance suite; prints pass/fail JSON and exits with 1 on any failure.
    ///
    /// Also writes verify.json to the output directory.
    Verify {
        /// Run only these criteria (repeatable).
        #[arg(long)]
        only: Vec<String>,
    },
    /// Applies one operator to CSV input.
    ///
    /// Disk operators (cauchy_area, beurling, d_bar, d) read r,theta,re,im on the
    /// grid nodes (rows at r = 1 are ignored); boundary operators (conjugation_h0,
    /// analytic_projection, hilbert_nu) read theta,re,im. Writes op.csv in the same schema.
    Op {
        #[arg(long)]
        operator: Option<String>,
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_file(dir: &Path, name: &str, contents: &str) -> CliResult<PathBuf> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(io_err(&path))?;
    Ok(path)
}

/// `r,theta,re,im` over the radial nodes and, when present, the exact circle values.
pub fn field_csv(field: &DiskField) -> String {
    let grid = field.grid();
    let nt = grid.n_theta();
    let mut out = String::from("r,theta,re,im\n");
    let samples = field.synthesize();
    let mut rows: Vec<(f64, &[C64])> = grid
        .radial()
        .nodes()
        .iter()
        .enumerate()
        .map(|(j, &r)| (r, &samples[j * nt..(j + 1) * nt]))
        .collect();
    let edge = field.edge_spectrum().map(|e| e.samples());
    if let Some(e) = &edge {
        rows.push((1.0, e));
    }
    for (r, ring) in rows {
        for (k, v) in ring.iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                num(r),
                num(grid.circle().theta(k)),
                num(v.re),
                num(v.im)
            );
        }
    }
    out
}

/// `theta,re,im` at the grid angles.
pub fn spectrum_csv(s: &BoundarySpectrum) -> String {
    let mut out = String::from("theta,re,im\n");
    for (k, v) in s.samples().iter().enumerate() {
        let _ = writeln!(out, "{},{},{}", num(s.circle().theta(k)), num(v.re), num(v.im));
    }
    out
}

fn read_rows(path: &Path, header: &[&str]) -> CliResult<Vec<Vec<f64>>> {
    let bad = |what: String| CliError::Config(format!("{}: {what}", path.display()));
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(source) => CliError::Io {
                path: path.to_path_buf(),
                source,
            },
            other => bad(format!("{other:?}")),
        })?;
    let head = reader.headers().map_err(|e| bad(e.to_string()))?;
    if head.iter().ne(header.iter().copied()) {
        return Err(bad(format!("expected header {}", header.join(","))));
    }
    reader
        .records()
        .map(|record| {
            let record = record.map_err(|e| bad(e.to_string()))?;
            let line = record.position().map_or(0, |p| p.line());
            if record.len() != header.len() {
                return Err(bad(format!("line {line}: expected {} columns", header.len())));
            }
            record
                .iter()
                .map(|x| x.parse::<f64>().map_err(|e| bad(format!("line {line}: {e}"))))
                .collect()
        })
        .collect()
}

fn check_angles(path: &Path, rows: &[Vec<f64>], grid: &PolarGrid) -> CliResult<()> {
    let circle = grid.circle();
    let nt = circle.n_theta();
    for (i, row) in rows.iter().enumerate() {
        if (row[0] - circle.theta(i % nt)).abs() > GRID_MATCH_TOL {
            return Err(CliError::Config(format!(
                "{}: row {} has theta {} but the grid angle is {}",
                path.display(),
                i + 2,
                row[0],
                circle.theta(i % nt)
            )));
        }
    }
    Ok(())
}

fn read_boundary_csv(path: &Path, grid: &PolarGrid) -> CliResult<BoundarySpectrum> {
    let rows = read_rows(path, &["theta", "value"])?;
    if rows.len() != grid.n_theta() {
        return Err(CliError::Config(format!(
            "{}: {} rows for {} grid angles",
            path.display(),
            rows.len(),
            grid.n_theta()
        )));
    }
    check_angles(path, &rows, grid)?;
    let values: Vec<f64> = rows.iter().map(|r| r[1]).collect();
    Ok(BoundarySpectrum::from_real_samples(grid.circle(), &values)?)
}

fn read_spectrum_csv(path: &Path, grid: &PolarGrid) -> CliResult<BoundarySpectrum> {
    let rows = read_rows(path, &["theta", "re", "im"])?;
    if rows.len() != grid.n_theta() {
        return Err(CliError::Config(format!(
            "{}: {} rows for {} grid angles",
            path.display(),
            rows.len(),
            grid.n_theta()
        )));
    }
    check_angles(path, &rows, grid)?;
    let values: Vec<C64> = rows.iter().map(|r| C64::new(r[1], r[2])).collect();
    Ok(BoundarySpectrum::from_samples(grid.circle(), &values)?)
}

fn read_field_csv(path: &Path, grid: &Arc<PolarGrid>) -> CliResult<DiskField> {
    let rows: Vec<Vec<f64>> = read_rows(path, &["r", "theta", "re", "im"])?
        .into_iter()
        .filter(|r| r[0] < 1.0)
        .collect();
    let (nr, nt) = (grid.n_r(), grid.n_theta());
    if rows.len() != nr * nt {
        return Err(CliError::Config(format!(
            "{}: {} interior rows for a {nr}x{nt} grid",
            path.display(),
            rows.len()
        )));
    }
    let nodes = grid.radial().nodes();
    for (i, row) in rows.iter().enumerate() {
        if (row[0] - nodes[i / nt]).abs() > GRID_MATCH_TOL {
            return Err(CliError::Config(format!(
                "{}: row {} is not on radial node {}",
                path.display(),
                i + 2,
                nodes[i / nt]
            )));
        }
    }
    let angles: Vec<Vec<f64>> = rows.iter().map(|r| vec![r[1]]).collect();
    check_angles(path, &angles, grid)?;
    let samples: Vec<C64> = rows.iter().map(|r| C64::new(r[2], r[3])).collect();
    Ok(grid.analyze(&samples)?)
}

fn oracle_block(
    cfg: &RunConfig,
    grid: &Arc<PolarGrid>,
    u: &DiskField,
    phi: &BoundarySpectrum,
    neumann_data: bool,
) -> CliResult<Value> {
    let a = match (&cfg.coefficient, &cfg.map) {
        (CoefficientSpec::Radial { a }, MapSpec::Identity) => *a,
        _ => {
            return Err(CliError::Config(
                "\"oracle\": true needs a radial coefficient and the identity map".into(),
            ))
        }
    };
    let oracle = RadialOracle::new(a)?;
    let mut rings = Vec::new();
    for r in [0.3, 0.6, 0.9] {
        let got = BoundarySpectrum::from_coeffs(grid.circle(), u.coeffs_at_radius(r), false)?;
        let want = if neumann_data {
            oracle.neumann_ring(phi, r)
        } else {
            oracle.dirichlet_ring(phi, r)
        };
        let err = got.sub(&want).l2_norm() / want.l2_norm().max(f64::MIN_POSITIVE);
        rings.push(json!({"r": r, "relative_l2_error": err}));
    }
    Ok(json!({"kind": "radial_ode", "a": a, "rings": rings}))
}

fn write_report(dir: &Path, value: &Value) -> CliResult<PathBuf> {
    write_file(
        dir,
        "report.json",
        &(serde_json::to_string_pretty(value).expect("report serializes") + "\n"),
    )
}

fn cmd_solve(cfg: &RunConfig) -> CliResult<Vec<PathBuf>> {
    let grid = cfg.grid()?;
    let (coef, phi) = cfg.problem(&grid)?;
    let (f, report) = dirichlet_h(&phi, &coef, &cfg.solve)?;
    let tr = trace_at_boundary(&f, TraceKind::CauchyImage)?;
    let dir = &cfg.output_dir;
    let mut files = vec![
        write_file(dir, "field.csv", &field_csv(&f))?,
        write_file(dir, "trace.csv", &spectrum_csv(&tr))?,
    ];
    if let Some(map) = cfg.map()? {
        let mut csv = String::from("x,y,re,im\n");
        for p in pushforward_solution(&map, &f) {
            let _ = writeln!(
                csv,
                "{},{},{},{}",
                num(p.w.re),
                num(p.w.im),
                num(p.value.re),
                num(p.value.im)
            );
        }
        files.push(write_file(dir, "image.csv", &csv)?);
    }
    let mut out = json!({"command": "solve", "config": cfg, "report": report});
    if cfg.oracle {
        out["oracle"] = oracle_block(cfg, &grid, &f.real_part(), &phi, false)?;
    }
    files.push(write_report(dir, &out)?);
    Ok(files)
}

fn cmd_hilbert(cfg: &RunConfig) -> CliResult<Vec<PathBuf>> {
    let grid = cfg.grid()?;
    let (coef, phi) = cfg.problem(&grid)?;
    let (h, report) = hilbert_nu(&phi, &coef, &cfg.solve)?;
    let mut csv = String::from("theta,phi,hilbert\n");
    for (k, (a, b)) in phi.real_samples().iter().zip(h.real_samples()).enumerate() {
        let _ = writeln!(csv, "{},{},{}", num(grid.circle().theta(k)), num(*a), num(b));
    }
    let dir = &cfg.output_dir;
    Ok(vec![
        write_file(dir, "hilbert.csv", &csv)?,
        write_report(dir, &json!({"command": "hilbert", "config": cfg, "report": report}))?,
    ])
}

fn cmd_neumann(cfg: &RunConfig) -> CliResult<Vec<PathBuf>> {
    let grid = cfg.grid()?;
    let (coef, g) = cfg.problem(&grid)?;
    let (u, report) = neumann(&g, &coef, &cfg.solve)?;
    let tr = trace_at_boundary(&u, TraceKind::CauchyImage)?;
    let dir = &cfg.output_dir;
    let mut out = json!({"command": "neumann", "config": cfg, "report": report});
    if cfg.oracle {
        out["oracle"] = oracle_block(cfg, &grid, &u, &g, true)?;
    }
    Ok(vec![
        write_file(dir, "field.csv", &field_csv(&u))?,
        write_file(dir, "trace.csv", &spectrum_csv(&tr))?,
        write_report(dir, &out)?,
    ])
}

fn cmd_factorize(cfg: &RunConfig) -> CliResult<Vec<PathBuf>> {
    let grid = cfg.grid()?;
    let (coef, psi) = cfg.problem(&grid)?;
    let alpha = alpha_from_nu(&coef);
    let (w, report) = dirichlet_g(&psi, 0.0, &alpha, &cfg.solve)?;
    let fac = factorize(&w, &alpha, cfg.factorize.variant)?;
    let dir = &cfg.output_dir;
    let out = json!({
        "command": "factorize",
        "config": cfg,
        "report": report,
        "variant": fac.variant,
        "certificates": fac.certificates,
        "bound_holds": fac.certificates.bound_holds(1e-6),
        "holomorphic": fac.certificates.holomorphic(),
        "warnings": fac.warnings,
    });
    Ok(vec![
        write_file(dir, "w.csv", &field_csv(&w))?,
        write_file(dir, "s.csv", &field_csv(&fac.s))?,
        write_file(dir, "f.csv", &field_csv(&fac.f))?,
        write_report(dir, &out)?,
    ])
}

fn cmd_density(cfg: &RunConfig) -> CliResult<Vec<PathBuf>> {
    let grid = cfg.grid()?;
    let (coef, _) = cfg.problem(&grid)?;
    let circle = grid.circle();
    let arcs: Vec<(f64, f64)> = cfg.density.arcs.iter().map(|a| (a[0], a[1])).collect();
    let split = ArcSplit::from_arcs(circle, &arcs).map_err(|e| CliError::Config(e.to_string()))?;
    let expr = Expr::parse(&cfg.density.target).map_err(|e| CliError::Config(e.to_string()))?;
    let target: Vec<C64> = circle.thetas().iter().map(|&t| expr.eval_boundary(t)).collect();
    let run = if cfg.density.sobolev {
        density_sobolev_experiment
    } else {
        density_experiment
    };
    let rep = run(&target, &split, &coef, &cfg.solve, &cfg.density.schedule)?;
    let mut csv = String::from("error_i,norm_j\n");
    for row in &rep.rows {
        let _ = writeln!(csv, "{},{}", num(row.error_i), num(row.norm_j));
    }
    let dir = &cfg.output_dir;
    let out = json!({
        "command": "density",
        "config": cfg,
        "rows": rep.rows,
        "errors_non_increasing": rep.errors_non_increasing(1e-9),
        "norms_non_decreasing": rep.norms_non_decreasing(1e-9),
    });
    Ok(vec![write_file(dir, "trend.csv", &csv)?, write_report(dir, &out)?])
}

fn cmd_verify(cfg: &RunConfig, only: &[String]) -> CliResult<Vec<PathBuf>> {
    let vcfg = VerifyConfig {
        grid: cfg.grid,
        solve: cfg.solve.clone(),
        seed: cfg.seed,
        only: if only.is_empty() {
            cfg.verify.only.clone()
        } else {
            only.to_vec()
        },
    };
    let report =
        run_verify_with(&vcfg, |c| eprintln!("{}", c.summary_line())).map_err(|e| CliError::Config(e.to_string()))?;
    let text = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    print!("{text}");
    let path = write_file(&cfg.output_dir, "verify.json", &text)?;
    let failed = report.criteria.iter().filter(|c| !c.passed).count();
    if failed > 0 {
        return Err(CliError::VerifyFailed(failed));
    }
    Ok(vec![path])
}

fn parse_operator(name: &str) -> CliResult<OperatorKind> {
    serde_json::from_value(Value::String(name.to_owned()))
        .map_err(|_| CliError::Config(format!("unknown operator {name:?}")))
}

fn cmd_op(cfg: &RunConfig, operator: Option<&str>, input: Option<&Path>) -> CliResult<Vec<PathBuf>> {
    let op = match operator {
        Some(name) => parse_operator(name)?,
        None => cfg.op.operator,
    };
    let input = input
        .or(cfg.op.input.as_deref())
        .ok_or_else(|| CliError::Config("op needs an input CSV (--input or op.input)".into()))?;
    let grid = cfg.grid()?;
    let csv = if op.on_disk() {
        let w = read_field_csv(input, &grid)?;
        let out = match op {
            OperatorKind::CauchyArea => cauchy_area(&w),
            OperatorKind::Beurling => beurling(&w),
            OperatorKind::DBar => w.d_bar(),
            OperatorKind::D => w.d(),
            _ => unreachable!("disk operators only"),
        };
        field_csv(&out)
    } else {
        let s = read_spectrum_csv(input, &grid)?;
        let out = match op {
            OperatorKind::ConjugationH0 => conjugation_h0(&s)?,
            OperatorKind::AnalyticProjection => analytic_projection(&s),
            OperatorKind::HilbertNu => {
                let (coef, _) = cfg.problem(&grid)?;
                hilbert_nu(&s, &coef, &cfg.solve)?.0
            }
            _ => unreachable!("boundary operators only"),
        };
        spectrum_csv(&out)
    };
    Ok(vec![write_file(&cfg.output_dir, "op.csv", &csv)?])
}

fn resolve_threads(flag: Option<usize>) -> CliResult<Option<usize>> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::Config(format!("{THREADS_ENV}={v:?} is not a thread count"))),
        Err(_) => Ok(None),
    }
}

/// Runs a parsed command line and returns the files written.
pub fn run(cli: &Cli) -> CliResult<Vec<PathBuf>> {
    if let Some(n) = resolve_threads(cli.threads)? {
        if n == 0 {
            return Err(CliError::Config("--threads must be positive".into()));
        }
        // A second build in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let cfg = RunConfig::load(cli.config.as_deref(), &cli.overrides)?;
    match &cli.command {
        Command::Solve => cmd_solve(&cfg),
        Command::Hilbert => cmd_hilbert(&cfg),
        Command::Neumann => cmd_neumann(&cfg),
        Command::Factorize => cmd_factorize(&cfg),
        Command::Density => cmd_density(&cfg),
        Command::Verify { only } => cmd_verify(&cfg, only),
        Command::Op { operator, input } => cmd_op(&cfg, operator.as_deref(), input.as_deref()),
    }
}

/// Process entry point: parses `std::env::args`, runs, reports on stderr and returns the exit code.
pub fn main() -> i32 {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(files) => {
            for f in files {
                eprintln!("wrote {}", f.display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_build_nested_keys() {
        let cfg = RunConfig::load(
            None,
            &[
                "grid.n_theta=64".into(),
                "coefficient.kind=radial".into(),
                "coefficient.a=0.5".into(),
                "density.schedule=[2,4]".into(),
                "output_dir=/tmp/x".into(),
            ],
        )
        .unwrap();
        assert_eq!(cfg.grid.n_theta, 64);
        assert_eq!(cfg.coefficient, CoefficientSpec::Radial { a: 0.5 });
        assert_eq!(cfg.density.schedule, vec![2, 4]);
        assert_eq!(cfg.output_dir, PathBuf::from("/tmp/x"));
        assert!(matches!(
            RunConfig::load(None, &["grid.bogus=1".into()]),
            Err(CliError::Config(_))
        ));
        assert!(matches!(
            RunConfig::load(None, &["novalue".into()]),
            Err(CliError::Config(_))
        ));
        let cfg = RunConfig::load(None, &["boundary.expr=sin(theta)".into(), "solve.p=3".into()]).unwrap();
        assert_eq!(
            cfg.boundary,
            BoundarySpec::Expression {
                expr: "sin(theta)".into()
            }
        );
        assert_eq!(cfg.solve.inner_tol, SolveConfig::default().inner_tol);
        let cfg = RunConfig::load(None, &["boundary.kind=csv".into(), "boundary.path=b.csv".into()]).unwrap();
        assert_eq!(cfg.boundary, BoundarySpec::Csv { path: "b.csv".into() });
    }

    #[test]
    fn config_round_trip() {
        let cfg = RunConfig {
            coefficient: CoefficientSpec::Expression {
                nu: "0.1*x".into(),
                kappa: Some(0.5),
            },
            map: MapSpec::Quadratic { eps: 0.2 },
            oracle: true,
            ..RunConfig::default()
        };
        let back: RunConfig = serde_json::from_str(&cfg.to_json()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Config("x".into()).exit_code(), 2);
        assert_eq!(CliError::Solver(Error::Compatibility(1.0)).exit_code(), 3);
        let nc = Error::NotConverged {
            stage: "s".into(),
            iterations: 1,
            residual: 1.0,
        };
        assert_eq!(CliError::Solver(nc).exit_code(), 3);
        assert_eq!(CliError::VerifyFailed(2).exit_code(), 1);
    }

    #[test]
    fn csv_formats() {
        let g = PolarGrid::new(16, 1, 2).unwrap();
        let text = field_csv(&g.sample_fn(|z| z));
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "r,theta,re,im");
        assert_eq!(lines.len(), 1 + 3 * 16);
        assert!(lines[1].split(',').all(|v| v.contains('e')));
        assert_eq!(num(1.0), "1.0000000000000000e0");
    }
}
