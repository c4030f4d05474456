//! Batch front-end: dispatch computations and emit CSV/JSON tables for
//! external plotting. Values are printed with 17 significant digits so the
//! output round-trips to the exact doubles.

use std::fs;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DVector;
use num_complex::Complex64;
use serde::Deserialize;

use kbm::error::Error;
use kbm::perturbation::{
    convergence_radius, taylor_coefficients, taylor_error_bound, trajectory,
};
use kbm::rep::{RepresentationModel, SeriesKind};
use kbm::semigroup::decay_defect;
use kbm::spectral::{eigen_spectrum, resolvent_bound, resolvent_norm};
use kbm::surface::{
    build_registry, equilibrium_expansion, SectionCoefficients, SurfaceData,
};
use kbm::operator::{assemble_operator, OperatorSymbol};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

/// Defaults loadable from a JSON config file; command-line flags win.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    format: Option<String>,
    window: Option<usize>,
    tol: Option<f64>,
    epsilon: Option<f64>,
    c: Option<f64>,
    eta_max: Option<f64>,
    n_max: Option<u32>,
}

#[derive(Debug, Parser)]
#[command(name = "kbm", about = "Spectral toolkit for the kinetic Brownian motion generator", version)]
struct Cli {
    /// JSON file with default parameter values (flags override it)
    #[arg(long, global = true)]
    config: Option<String>,
    /// Output file; stdout when absent
    #[arg(long, global = true)]
    output: Option<String>,
    /// Output format
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Re-check every value-vs-bound row and fail on any violation
    #[arg(long, global = true)]
    verify: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct RepArgs {
    /// Representation series: principal, complementary, discrete, anti-discrete, trivial
    #[arg(long)]
    series: Option<String>,
    /// Spectral parameter s (principal/complementary)
    #[arg(long)]
    s: Option<f64>,
    /// Lowest weight n (discrete series)
    #[arg(long)]
    n: Option<u32>,
    /// Laplace eigenvalue shortcut: picks principal/complementary/trivial from eta
    #[arg(long)]
    eta: Option<f64>,
}

impl RepArgs {
    fn resolve(&self) -> Result<RepresentationModel, Error> {
        if let Some(eta) = self.eta {
            if self.series.is_some() {
                return Err(Error::InvalidInput(
                    "give either --eta or --series, not both".into(),
                ));
            }
            return RepresentationModel::from_laplace_eigenvalue(eta);
        }
        let series = self.series.as_deref().ok_or_else(|| {
            Error::InvalidInput("a representation is required: --series or --eta".into())
        })?;
        let need_s = || {
            self.s
                .ok_or_else(|| Error::InvalidInput(format!("--s is required for {series}")))
        };
        let need_n = || {
            self.n
                .ok_or_else(|| Error::InvalidInput(format!("--n is required for {series}")))
        };
        let kind = match series {
            "principal" => SeriesKind::Principal { s: need_s()? },
            "complementary" => SeriesKind::Complementary { s: need_s()? },
            "discrete" => SeriesKind::DiscreteHolomorphic { n: need_n()? },
            "anti-discrete" => SeriesKind::DiscreteAntiHolomorphic { n: need_n()? },
            "trivial" => SeriesKind::Trivial,
            other => {
                return Err(Error::InvalidInput(format!(
                    "unknown series '{other}' (expected principal, complementary, discrete, anti-discrete, trivial)"
                )))
            }
        };
        RepresentationModel::new(kind)
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Casimir value, convergence radius, and ladder coupling table
    RepInfo {
        #[command(flatten)]
        rep: RepArgs,
        /// Number of couplings to tabulate
        #[arg(long, default_value_t = 8)]
        count: usize,
    },
    /// Eigenvalues of the truncated generator at coupling x
    Spectrum {
        #[command(flatten)]
        rep: RepArgs,
        #[arg(long)]
        x: f64,
        #[arg(long)]
        window: Option<usize>,
    },
    /// Low-eigenvalue trajectory over a gamma grid with its certified envelope
    Trajectory {
        /// Target Laplace eigenvalue
        #[arg(long)]
        eta: f64,
        /// Gamma grid, comma-separated
        #[arg(long, value_delimiter = ',', required = true)]
        gamma: Vec<f64>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Taylor coefficients of the low eigenvalue with truncation envelopes
    Perturb {
        #[command(flatten)]
        rep: RepArgs,
        #[arg(long, default_value_t = 4)]
        order: usize,
        /// Coupling at which the truncation envelopes are evaluated
        #[arg(long)]
        x: Option<f64>,
        #[arg(long)]
        window: Option<usize>,
    },
    /// Resolvent norms at probe points, with the certified bounds where they apply
    Resolvent {
        #[command(flatten)]
        rep: RepArgs,
        #[arg(long)]
        x: f64,
        /// Probe point "re,im"; repeatable
        #[arg(long = "zeta", value_name = "RE,IM", required = true)]
        zetas: Vec<String>,
        #[arg(long)]
        window: Option<usize>,
    },
    /// Semigroup decay defects against the certified bounds
    Semigroup {
        #[command(flatten)]
        rep: RepArgs,
        #[arg(long)]
        x: f64,
        /// Times, comma-separated
        #[arg(long, value_delimiter = ',', required = true)]
        t: Vec<f64>,
        #[arg(long)]
        window: Option<usize>,
        /// Seed for the random unit initial vector
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Decomposition registry of a surface file
    Decompose {
        #[arg(long)]
        surface: String,
        #[arg(long)]
        eta_max: Option<f64>,
        #[arg(long)]
        n_max: Option<u32>,
    },
    /// Equilibrium expansion of a section with the residual bound
    Equilibrium {
        #[arg(long)]
        surface: String,
        /// Section coefficient file (JSON)
        #[arg(long)]
        section: String,
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        epsilon: Option<f64>,
        /// Sobolev bound C on the section
        #[arg(long)]
        c: Option<f64>,
        #[arg(long)]
        eta_max: Option<f64>,
        #[arg(long)]
        n_max: Option<u32>,
    },
}

/// One table cell.
#[derive(Debug, Clone)]
enum Cell {
    Text(String),
    Int(i64),
    Num(f64),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Int(i) => i.to_string(),
            Cell::Num(v) => format!("{v:.16e}"),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::Text(s) => serde_json::Value::String(s.clone()),
            Cell::Int(i) => serde_json::json!(i),
            Cell::Num(v) => serde_json::json!(v),
            Cell::Empty => serde_json::Value::Null,
        }
    }
}

struct Table {
    command: &'static str,
    columns: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
    /// (label, value, bound) triples re-checked under --verify.
    checks: Vec<(String, f64, f64)>,
}

impl Table {
    fn new(command: &'static str, columns: Vec<&'static str>) -> Self {
        Table {
            command,
            columns,
            rows: Vec::new(),
            checks: Vec::new(),
        }
    }

    fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => {
                let mut out = self.columns.join(",");
                out.push('\n');
                for row in &self.rows {
                    let line: Vec<String> = row.iter().map(Cell::csv).collect();
                    out.push_str(&line.join(","));
                    out.push('\n');
                }
                out
            }
            Format::Json => {
                let rows: Vec<serde_json::Value> = self
                    .rows
                    .iter()
                    .map(|row| {
                        let map: serde_json::Map<String, serde_json::Value> = self
                            .columns
                            .iter()
                            .zip(row)
                            .map(|(c, cell)| (c.to_string(), cell.json()))
                            .collect();
                        serde_json::Value::Object(map)
                    })
                    .collect();
                let payload = serde_json::json!({
                    "command": self.command,
                    "columns": self.columns,
                    "rows": rows,
                });
                let mut text = serde_json::to_string_pretty(&payload).expect("serializable");
                text.push('\n');
                text
            }
        }
    }
}

fn deterministic_unit_vector(n: usize, seed: u64) -> DVector<Complex64> {
    // splitmix64 stream; good enough for reproducible test vectors and free
    // of external dependencies
    let mut state = seed.wrapping_add(0x9e3779b97f4a7c15);
    let mut next = move || {
        state = state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^= z >> 31;
        (z >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    let mut u = DVector::from_fn(n, |_, _| Complex64::new(next(), next()));
    let norm = u.norm();
    u /= Complex64::new(norm, 0.0);
    u
}

fn parse_zeta(text: &str) -> Result<Complex64, Error> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        return Err(Error::InvalidInput(format!(
            "zeta must be 're,im', got '{text}'"
        )));
    }
    let re: f64 = parts[0]
        .trim()
        .parse()
        .map_err(|_| Error::InvalidInput(format!("bad real part in '{text}'")))?;
    let im: f64 = parts[1]
        .trim()
        .parse()
        .map_err(|_| Error::InvalidInput(format!("bad imaginary part in '{text}'")))?;
    Ok(Complex64::new(re, im))
}

fn series_label(kind: SeriesKind) -> (String, Cell) {
    match kind {
        SeriesKind::Principal { s } => ("principal".into(), Cell::Num(s)),
        SeriesKind::Complementary { s } => ("complementary".into(), Cell::Num(s)),
        SeriesKind::DiscreteHolomorphic { n } => ("discrete".into(), Cell::Int(i64::from(n))),
        SeriesKind::DiscreteAntiHolomorphic { n } => {
            ("anti-discrete".into(), Cell::Int(i64::from(n)))
        }
        SeriesKind::Trivial => ("trivial".into(), Cell::Empty),
    }
}

fn run(cli: &Cli, cfg: &FileConfig) -> Result<Table, Error> {
    match &cli.command {
        Command::RepInfo { rep, count } => {
            let rep = rep.resolve()?;
            let mut table = Table::new("rep-info", vec!["quantity", "k", "value"]);
            table
                .rows
                .push(vec![Cell::Text("lambda".into()), Cell::Empty, Cell::Num(rep.casimir())]);
            if let Ok(r) = convergence_radius(&rep) {
                table
                    .rows
                    .push(vec![Cell::Text("radius".into()), Cell::Empty, Cell::Num(r)]);
            }
            let start = match rep.ktypes() {
                kbm::rep::KTypeSet::AtLeast(n) => n,
                kbm::rep::KTypeSet::AtMost(n) => n - *count as i64,
                _ => 0,
            };
            for k in start..start + *count as i64 {
                if rep.ktypes().contains(k) && rep.ktypes().contains(k + 1) {
                    table.rows.push(vec![
                        Cell::Text("coupling".into()),
                        Cell::Int(k),
                        Cell::Num(rep.coupling(k)?),
                    ]);
                }
            }
            Ok(table)
        }
        Command::Spectrum { rep, x, window } => {
            let rep = rep.resolve()?;
            let size = window.or(cfg.window).unwrap_or(65);
            let w = rep.default_window(size);
            let matrix = assemble_operator(&rep, OperatorSymbol::Generator(*x), w)?;
            let spectrum = eigen_spectrum(&matrix)?;
            let mut table = Table::new("spectrum", vec!["index", "re", "im"]);
            for (i, v) in spectrum.eigenvalues.iter().enumerate() {
                table
                    .rows
                    .push(vec![Cell::Int(i as i64), Cell::Num(v.re), Cell::Num(v.im)]);
            }
            Ok(table)
        }
        Command::Trajectory { eta, gamma, tol } => {
            let tol = tol.or(cfg.tol).unwrap_or(1e-10);
            let curve = trajectory(*eta, gamma, tol)?;
            let mut table = Table::new("trajectory", vec!["gamma", "lambda", "bound"]);
            for ((&g, &v), &b) in curve
                .gamma_grid
                .iter()
                .zip(&curve.values)
                .zip(&curve.bound)
            {
                table.rows.push(vec![Cell::Num(g), Cell::Num(v), Cell::Num(b)]);
                table
                    .checks
                    .push((format!("|lambda - eta| at gamma = {g}"), (v - eta).abs(), b));
            }
            Ok(table)
        }
        Command::Perturb {
            rep,
            order,
            x,
            window,
        } => {
            let rep = rep.resolve()?;
            let size = window.or(cfg.window).unwrap_or(65);
            let series = taylor_coefficients(&rep, *order, rep.default_window(size))?;
            let x = x.unwrap_or(series.radius / 2.0);
            let mut table = Table::new("perturb", vec!["order", "coefficient", "envelope"]);
            for (n, &mu) in series.coefficients.iter().enumerate() {
                let envelope = taylor_error_bound(&series, x, n)?;
                table
                    .rows
                    .push(vec![Cell::Int(n as i64), Cell::Num(mu), Cell::Num(envelope)]);
            }
            Ok(table)
        }
        Command::Resolvent {
            rep,
            x,
            zetas,
            window,
        } => {
            let rep = rep.resolve()?;
            let size = window.or(cfg.window).unwrap_or(65);
            let w = rep.default_window(size);
            let mut table = Table::new("resolvent", vec!["zeta_re", "zeta_im", "norm", "bound"]);
            for text in zetas {
                let zeta = parse_zeta(text)?;
                let norm = resolvent_norm(&rep, zeta, *x, w)?;
                let bound = match resolvent_bound(&rep, zeta, *x) {
                    Ok(b) => {
                        table
                            .checks
                            .push((format!("resolvent norm at zeta = {zeta}"), norm, b));
                        Cell::Num(b)
                    }
                    Err(Error::Hypothesis(_)) => Cell::Empty,
                    Err(e) => return Err(e),
                };
                table
                    .rows
                    .push(vec![Cell::Num(zeta.re), Cell::Num(zeta.im), Cell::Num(norm), bound]);
            }
            Ok(table)
        }
        Command::Semigroup {
            rep,
            x,
            t,
            window,
            seed,
        } => {
            let rep = rep.resolve()?;
            let size = window.or(cfg.window).unwrap_or(65);
            let w = rep.default_window(size);
            let u = deterministic_unit_vector(w.size(), *seed);
            let mut table = Table::new("semigroup", vec!["t", "defect", "bound"]);
            for &t in t {
                let (defect, bound) = decay_defect(&rep, *x, t, &u)?;
                table.rows.push(vec![Cell::Num(t), Cell::Num(defect), Cell::Num(bound)]);
                table
                    .checks
                    .push((format!("decay defect at t = {t}"), defect, bound));
            }
            Ok(table)
        }
        Command::Decompose {
            surface,
            eta_max,
            n_max,
        } => {
            let surface = SurfaceData::from_json(&fs::read_to_string(surface)?)?;
            let eta_max = eta_max.or(cfg.eta_max).unwrap_or(f64::INFINITY);
            let n_max = n_max.or(cfg.n_max).unwrap_or(8);
            let registry = build_registry(&surface, eta_max, n_max)?;
            let mut table = Table::new(
                "decompose",
                vec!["entry", "series", "parameter", "multiplicity", "eta"],
            );
            for (i, e) in registry.entries.iter().enumerate() {
                let (label, parameter) = series_label(e.rep.kind());
                table.rows.push(vec![
                    Cell::Int(i as i64),
                    Cell::Text(label),
                    parameter,
                    Cell::Int(i64::from(e.multiplicity)),
                    e.eta.map_or(Cell::Empty, Cell::Num),
                ]);
            }
            Ok(table)
        }
        Command::Equilibrium {
            surface,
            section,
            gamma,
            t,
            epsilon,
            c,
            eta_max,
            n_max,
        } => {
            let surface = SurfaceData::from_json(&fs::read_to_string(surface)?)?;
            let f = SectionCoefficients::from_json(&fs::read_to_string(section)?)?;
            let epsilon = epsilon.or(cfg.epsilon).unwrap_or(0.1);
            let c = c.or(cfg.c).unwrap_or(1.0);
            let eta_max = eta_max.or(cfg.eta_max).unwrap_or(f64::INFINITY);
            let n_max = n_max.or(cfg.n_max).unwrap_or(8);
            let registry = build_registry(&surface, eta_max, n_max)?;
            let out = equilibrium_expansion(&registry, &f, *gamma, *t, epsilon, c)?;
            let mut table = Table::new(
                "equilibrium",
                vec!["gamma", "t", "epsilon", "actual_residual", "residual_bound"],
            );
            table.rows.push(vec![
                Cell::Num(*gamma),
                Cell::Num(*t),
                Cell::Num(epsilon),
                Cell::Num(out.actual_residual),
                Cell::Num(out.residual_bound),
            ]);
            table.checks.push((
                "equilibrium residual".into(),
                out.actual_residual,
                out.residual_bound,
            ));
            Ok(table)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match &cli.config {
        Some(path) => match fs::read_to_string(path)
            .map_err(Error::from)
            .and_then(|text| serde_json::from_str::<FileConfig>(&text).map_err(Error::from))
        {
            Ok(cfg) => cfg,
            Err(e) => {
                eprintln!("error[{}]: {e}", e.code());
                return ExitCode::from(e.exit_code() as u8);
            }
        },
        None => FileConfig::default(),
    };
    let format = cli.format.unwrap_or(match cfg.format.as_deref() {
        Some("json") => Format::Json,
        _ => Format::Csv,
    });
    let table = match run(&cli, &cfg) {
        Ok(table) => table,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code());
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    if cli.verify {
        let mut violations = 0;
        for (label, value, bound) in &table.checks {
            if value > &(bound * (1.0 + 1e-12)) {
                eprintln!("verify failed: {label}: {value:.6e} > bound {bound:.6e}");
                violations += 1;
            }
        }
        if violations > 0 {
            return ExitCode::from(1);
        }
    }
    let text = table.render(format);
    match &cli.output {
        Some(path) => {
            if let Err(e) = fs::write(path, text) {
                let e = Error::from(e);
                eprintln!("error[{}]: {e}", e.code());
                return ExitCode::from(e.exit_code() as u8);
            }
        }
        None => print!("{text}"),
    }
    ExitCode::SUCCESS
}
