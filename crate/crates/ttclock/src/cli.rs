//! Command-line front end: parameter sweeps, figure-data presets, and
//! verification runs with structured CSV/JSON output.
//!
//! Configuration is a JSON document given via --config; every field can be
//! overridden by a same-named flag (flag > file > default). Numbers are
//! serialized with 17 significant digits so CSV round-trips doubles exactly.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::analysis::{KPoint, Scenario};
use crate::error::{Error, Result};
use crate::potential::{make_barrier, BarrierKind, BarrierSpec, UnitSystem};
use crate::scattering::{unwrap_phases, SolverOptions};
use crate::spin_meter::{postselection_overlaps, Side};
use crate::verify::{run_all_identities, IdentityReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_PARTIAL: i32 = 4;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BarrierConfig {
    pub kind: String,
    pub v0: f64,
    pub d: f64,
    pub a: f64,
    pub epsilon: f64,
    pub samples: Option<Vec<(f64, f64)>>,
}

impl Default for BarrierConfig {
    fn default() -> Self {
        let k0 = 3.0 * std::f64::consts::PI;
        Self {
            kind: "square".into(),
            v0: k0 * k0,
            d: 1.0,
            a: 0.0,
            epsilon: 0.0,
            samples: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KGridConfig {
    /// Lower edge in units of k0.
    pub k_min: f64,
    /// Upper edge in units of k0.
    pub k_max: f64,
    pub n_points: usize,
}

impl Default for KGridConfig {
    fn default() -> Self {
        Self {
            k_min: 0.05,
            k_max: 0.95,
            n_points: 181,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpinConfig {
    pub theta: f64,
    pub phi: f64,
}

impl Default for SpinConfig {
    fn default() -> Self {
        Self {
            theta: std::f64::consts::FRAC_PI_2 - std::f64::consts::PI / 8.0,
            phi: std::f64::consts::FRAC_PI_4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub barrier: BarrierConfig,
    pub k_grid: KGridConfig,
    pub spin: SpinConfig,
    pub units: UnitSystem,
    /// Working omega_L for CV scaling; default 1e-3 V0 / hbar.
    pub omega: Option<f64>,
    /// Larmor probe frequency; default 1e-6 V0 / hbar.
    pub probe_omega: Option<f64>,
    pub slices: usize,
    /// Quantity columns; empty means the subcommand's default set.
    pub outputs: Vec<String>,
    pub format: OutputFormat,
    /// Seed for the randomized identity sweeps in `verify`.
    pub seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            barrier: BarrierConfig::default(),
            k_grid: KGridConfig::default(),
            spin: SpinConfig::default(),
            units: UnitSystem::default(),
            omega: None,
            probe_omega: None,
            slices: crate::scattering::DEFAULT_SLICES,
            outputs: Vec::new(),
            format: OutputFormat::Csv,
            seed: 0,
        }
    }
}

impl SweepConfig {
    pub fn barrier_spec(&self) -> Result<BarrierSpec> {
        let kind = match self.barrier.kind.as_str() {
            "square" => BarrierKind::Square,
            "quadratic" | "quadratic_symmetric" => BarrierKind::QuadraticSymmetric,
            "trapezoid" => BarrierKind::Trapezoid,
            "sampled" => BarrierKind::Sampled,
            other => {
                return Err(Error::Config(format!(
                    "barrier.kind: unknown kind {other:?} (square, quadratic, trapezoid, sampled)"
                )))
            }
        };
        make_barrier(
            kind,
            self.barrier.v0,
            self.barrier.a,
            self.barrier.epsilon,
            self.barrier.d,
            self.barrier.samples.clone(),
            self.units,
        )
        .map_err(|e| Error::Config(format!("barrier: {e}")))
    }

    pub fn scenario(&self) -> Result<Scenario> {
        let barrier = self.barrier_spec()?;
        let spin = postselection_overlaps(self.spin.theta, self.spin.phi)
            .map_err(|e| Error::Config(format!("spin: {e}")))?;
        let mut sc = Scenario::new(barrier, spin);
        if let Some(om) = self.omega {
            if om <= 0.0 || om.is_nan() {
                return Err(Error::Config(format!("omega: must be > 0, got {om}")));
            }
            sc.omega = om;
        }
        if let Some(p) = self.probe_omega {
            if p <= 0.0 || p.is_nan() {
                return Err(Error::Config(format!("probe_omega: must be > 0, got {p}")));
            }
            sc.probe_omega = p;
        }
        if self.slices == 0 {
            return Err(Error::Config("slices: must be >= 1".into()));
        }
        sc.solver = SolverOptions::with_slices(self.slices);
        Ok(sc)
    }

    pub fn k_values(&self) -> Result<(f64, Vec<f64>)> {
        let g = &self.k_grid;
        if g.k_min <= 0.0 || g.k_max <= g.k_min || g.k_min.is_nan() || g.k_max.is_nan() {
            return Err(Error::Config(format!(
                "k_grid: need 0 < k_min < k_max, got [{}, {}]",
                g.k_min, g.k_max
            )));
        }
        if g.n_points < 2 {
            return Err(Error::Config(format!(
                "k_grid.n_points: need >= 2, got {}",
                g.n_points
            )));
        }
        // Grid edges are in units of k0; for a zero-height barrier (free
        // particle) they are read as absolute wavenumbers instead.
        let k0 = self.barrier_spec()?.k0();
        let scale = if k0 > 0.0 { k0 } else { 1.0 };
        Ok((
            scale,
            crate::linspace(g.k_min * scale, g.k_max * scale, g.n_points),
        ))
    }
}

/// Quantity ids accepted in `outputs`, in registry order.
pub const QUANTITIES: &[&str] = &[
    "transmission",
    "reflection",
    "phase_t",
    "phase_r_left",
    "phase_r_right",
    "tau_d",
    "c_rr",
    "c_rl_re",
    "c_rl_im",
    "lambda_plus",
    "lambda_minus",
    "tau_zt",
    "tau_yt",
    "tau_zr",
    "tau_yr_left",
    "tau_yr_right",
    "wl_alpha_r_plus",
    "wl_alpha_r_minus",
    "wl_alpha_l_plus",
    "wl_alpha_l_minus",
    "alpha0_r",
    "alpha0_l",
    "cv_condition",
    "cond_avg",
    "cond_avg_reflected",
    "weak_re",
    "weak_im",
    "disturbance",
    "trans_prob",
    "second_moment",
    "delta_t",
    "stein_re",
    "stein_im",
];

fn extract(point: &KPoint, quantity: &str) -> Result<f64> {
    Ok(match quantity {
        "transmission" => point.amps.transmission,
        "reflection" => point.amps.reflection,
        "phase_t" => point.amps.phase_t,
        "phase_r_left" => point.amps.phase_r_left,
        "phase_r_right" => point.amps.phase_r_right,
        "tau_d" => point.dwell.c_ll,
        "c_rr" => point.dwell.c_rr,
        "c_rl_re" => point.dwell.c_rl.re,
        "c_rl_im" => point.dwell.c_rl.im,
        "lambda_plus" => point.eigen.lambda_plus,
        "lambda_minus" => point.eigen.lambda_minus,
        "tau_zt" => point.times()?.tau_zt,
        "tau_yt" => point.times()?.tau_yt,
        "tau_zr" => point.times()?.tau_zr,
        "tau_yr_left" => point.times()?.tau_yr_left,
        "tau_yr_right" => point.times()?.tau_yr_right,
        "wl_alpha_r_plus" => point.omega * point.cvs()?.alpha_r_plus,
        "wl_alpha_r_minus" => point.omega * point.cvs()?.alpha_r_minus,
        "wl_alpha_l_plus" => point.omega * point.cvs()?.alpha_l_plus,
        "wl_alpha_l_minus" => point.omega * point.cvs()?.alpha_l_minus,
        "alpha0_r" => point.cvs()?.alpha0_r,
        "alpha0_l" => point.cvs()?.alpha0_l,
        "cv_condition" => point.cvs()?.condition_number,
        "cond_avg" => point.conditioned(Side::Transmitted)?.conditioned_avg,
        "cond_avg_reflected" => point.conditioned(Side::Reflected)?.conditioned_avg,
        "weak_re" => point.conditioned(Side::Transmitted)?.weak_value.re,
        "weak_im" => point.conditioned(Side::Transmitted)?.weak_value.im,
        "disturbance" => point.conditioned(Side::Transmitted)?.disturbance,
        "trans_prob" => point.conditioned(Side::Transmitted)?.transmitted_prob,
        "second_moment" => point.moments()?.0,
        "delta_t" => point.moments()?.1,
        "stein_re" => point.steinberg()?.re,
        "stein_im" => point.steinberg()?.im,
        other => return Err(Error::Config(format!("unknown quantity {other:?}"))),
    })
}

fn status_code(e: &Error) -> &'static str {
    match e {
        Error::SingularContext(_) => "singular_context",
        Error::AmplitudeTooSmall { .. } => "opaque_or_free_barrier",
        Error::VanishingPostSelection(_) => "vanishing_postselection",
        Error::UnitarityNotMet { .. } => "unitarity_failure",
        Error::PropagationOverflow => "propagation_overflow",
        _ => "error",
    }
}

/// One sweep row: k in units of k0, the requested quantity values in
/// declared order, and a status sentinel ("ok" or a failure code).
#[derive(Debug, Clone, Serialize)]
pub struct OutputRow {
    pub k_over_k0: f64,
    pub values: Vec<f64>,
    pub status: String,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub quantities: Vec<String>,
    pub rows: Vec<OutputRow>,
}

impl SweepResult {
    pub fn all_ok(&self) -> bool {
        self.rows.iter().all(|r| r.status == "ok")
    }

    pub fn any_ok(&self) -> bool {
        self.rows.iter().any(|r| r.status == "ok")
    }
}

fn thread_pool() -> rayon::ThreadPool {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = std::env::var("TTCLOCK_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n >= 1)
    {
        builder = builder.num_threads(n);
    }
    builder.build().expect("thread pool")
}

/// Evaluates the sweep over the configured k-grid; rows come back in
/// ascending k regardless of the worker pool, and phase columns are
/// unwrapped along the scan.
pub fn run_sweep(config: &SweepConfig, quantities: &[String]) -> Result<SweepResult> {
    for q in quantities {
        if !QUANTITIES.contains(&q.as_str()) {
            return Err(Error::Config(format!(
                "outputs: unknown quantity {q:?} (known: {})",
                QUANTITIES.join(", ")
            )));
        }
    }
    let scenario = config.scenario()?;
    let (k0, ks) = config.k_values()?;
    if config.k_grid.k_max * k0 > scenario.barrier.k0_min() + 1e-12 {
        eprintln!(
            "warning: k_max = {:.6} exceeds the lowest barrier wavenumber {:.6}; \
             upper grid points leave the everywhere-tunneling regime",
            config.k_grid.k_max * k0,
            scenario.barrier.k0_min()
        );
    }

    use rayon::prelude::*;
    let pool = thread_pool();
    let rows: Vec<OutputRow> = pool.install(|| {
        ks.par_iter()
            .map(|&k| {
                let mut values = vec![0.0; quantities.len()];
                let mut status = "ok".to_string();
                match scenario.at_k(k) {
                    Ok(point) => {
                        for (slot, q) in values.iter_mut().zip(quantities) {
                            match extract(&point, q) {
                                Ok(v) => *slot = v,
                                Err(e) => {
                                    if status == "ok" {
                                        status = status_code(&e).to_string();
                                    }
                                }
                            }
                        }
                    }
                    Err(e) => status = status_code(&e).to_string(),
                }
                OutputRow {
                    k_over_k0: k / k0,
                    values,
                    status,
                }
            })
            .collect()
    });

    let mut result = SweepResult {
        quantities: quantities.to_vec(),
        rows,
    };
    for (idx, q) in quantities.iter().enumerate() {
        if q.starts_with("phase_") {
            unwrap_column(&mut result, idx);
        }
    }
    Ok(result)
}

fn unwrap_column(result: &mut SweepResult, idx: usize) {
    let mut column: Vec<f64> = result
        .rows
        .iter()
        .filter(|r| r.status == "ok")
        .map(|r| r.values[idx])
        .collect();
    unwrap_phases(&mut column);
    let mut it = column.into_iter();
    for row in result.rows.iter_mut().filter(|r| r.status == "ok") {
        row.values[idx] = it.next().expect("same length");
    }
}

/// 17 significant digits: round-trip exact for f64.
fn fmt_g17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_sweep_csv<W: Write>(out: &mut W, result: &SweepResult) -> std::io::Result<()> {
    write!(out, "k_over_k0")?;
    for q in &result.quantities {
        write!(out, ",{q}")?;
    }
    writeln!(out, ",status")?;
    for row in &result.rows {
        write!(out, "{}", fmt_g17(row.k_over_k0))?;
        for v in &row.values {
            write!(out, ",{}", fmt_g17(*v))?;
        }
        writeln!(out, ",{}", row.status)?;
    }
    Ok(())
}

pub fn write_sweep_json<W: Write>(out: &mut W, result: &SweepResult) -> std::io::Result<()> {
    let rows: Vec<serde_json::Value> = result
        .rows
        .iter()
        .map(|row| {
            let mut map = serde_json::Map::new();
            map.insert("k_over_k0".into(), row.k_over_k0.into());
            for (q, v) in result.quantities.iter().zip(&row.values) {
                map.insert(q.clone(), (*v).into());
            }
            map.insert("status".into(), row.status.clone().into());
            serde_json::Value::Object(map)
        })
        .collect();
    writeln!(out, "{}", serde_json::to_string_pretty(&rows)?)
}

pub fn write_reports_json<W: Write>(
    out: &mut W,
    reports: &[IdentityReport],
) -> std::io::Result<()> {
    writeln!(out, "{}", serde_json::to_string_pretty(reports)?)
}

pub fn write_reports_csv<W: Write>(out: &mut W, reports: &[IdentityReport]) -> std::io::Result<()> {
    writeln!(out, "name,residual,tolerance,passed,skipped")?;
    for r in reports {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.name,
            fmt_g17(r.abs_residual),
            fmt_g17(r.tolerance),
            r.passed,
            r.skipped.as_deref().unwrap_or("")
        )?;
    }
    Ok(())
}

/// Fully populated configs for the published figure panels.
pub fn figure_preset(name: &str) -> Result<SweepConfig> {
    let k0 = 3.0 * std::f64::consts::PI;
    let v0 = k0 * k0;
    let mut config = SweepConfig::default();
    let cv_columns = vec![
        "wl_alpha_r_plus".to_string(),
        "wl_alpha_r_minus".to_string(),
        "wl_alpha_l_plus".to_string(),
        "wl_alpha_l_minus".to_string(),
    ];
    let time_columns = vec!["cond_avg".to_string(), "weak_re".to_string()];
    match name {
        "fig2a" => {
            config.outputs = cv_columns;
        }
        "fig2b" => {
            config.barrier.kind = "quadratic".into();
            config.barrier.a = v0; // k0^2 / d^2 with d = 1
            config.outputs = cv_columns;
        }
        "fig2c" => {
            config.barrier.kind = "trapezoid".into();
            config.barrier.epsilon = 0.5 * v0;
            config.outputs = cv_columns;
        }
        "fig3a" => {
            config.outputs = time_columns;
        }
        "fig3b" => {
            config.spin.theta = std::f64::consts::FRAC_PI_2 - std::f64::consts::PI / 200.0;
            config.outputs = time_columns;
        }
        "fig3c" => {
            config.barrier.kind = "quadratic".into();
            config.barrier.a = v0;
            config.outputs = time_columns;
        }
        other => {
            return Err(Error::Config(format!(
                "unknown figure preset {other:?} (fig2a, fig2b, fig2c, fig3a, fig3b, fig3c)"
            )))
        }
    }
    Ok(config)
}

#[derive(Debug, Parser)]
#[command(
    name = "ttclock",
    version,
    about = "Operational tunneling-time toolkit: scattering, dwell-time operator, Larmor clock, contextual values"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SweepArgs {
    /// JSON config file; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Barrier kind: square | quadratic | trapezoid | sampled.
    #[arg(long)]
    pub barrier: Option<String>,
    /// Base barrier height V0.
    #[arg(long)]
    pub v0: Option<f64>,
    /// Barrier width d.
    #[arg(long)]
    pub d: Option<f64>,
    /// Quadratic coefficient a.
    #[arg(long)]
    pub a: Option<f64>,
    /// Trapezoid total rise epsilon.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Spin post-selection polar angle theta.
    #[arg(long)]
    pub theta: Option<f64>,
    /// Spin post-selection azimuth phi.
    #[arg(long)]
    pub phi: Option<f64>,
    /// Working omega_L for CV scaling.
    #[arg(long)]
    pub omega: Option<f64>,
    /// Larmor probe frequency for the time extraction.
    #[arg(long = "probe-omega")]
    pub probe_omega: Option<f64>,
    /// Grid lower edge in units of k0.
    #[arg(long)]
    pub kmin: Option<f64>,
    /// Grid upper edge in units of k0.
    #[arg(long)]
    pub kmax: Option<f64>,
    /// Number of grid points.
    #[arg(long)]
    pub n: Option<usize>,
    /// Barrier slices for the transfer-matrix solver.
    #[arg(long)]
    pub slices: Option<usize>,
    /// Output format: csv | json.
    #[arg(long)]
    pub format: Option<String>,
    /// Output path (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed for randomized identity sweeps.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Transmission/reflection probabilities and phases over the k-grid.
    Amplitudes(SweepArgs),
    /// Dwell-time operator elements and spectrum.
    Dwell(SweepArgs),
    /// Larmor times from the spin-split response.
    Larmor(SweepArgs),
    /// Contextual values (times omega_L) for the four outcomes.
    Cv(SweepArgs),
    /// Conditioned (tunneling-time) average, weak value, disturbance.
    Conditioned(SweepArgs),
    /// Second moment and dwell-time uncertainty.
    Moments(SweepArgs),
    /// Data behind a published figure panel (fig2a..fig2c, fig3a..fig3c).
    Figure {
        name: String,
        #[command(flatten)]
        args: SweepArgs,
    },
    /// Run the full identity-verification suite over the grid.
    Verify(SweepArgs),
}

impl SweepArgs {
    /// flag > file > default.
    fn resolve(&self, base: Option<SweepConfig>) -> Result<SweepConfig> {
        let mut config = match (&self.config, base) {
            (Some(path), _) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    Error::Config(format!("cannot read config {}: {e}", path.display()))
                })?;
                serde_json::from_str::<SweepConfig>(&text)
                    .map_err(|e| Error::Config(format!("config {}: {e}", path.display())))?
            }
            (None, Some(preset)) => preset,
            (None, None) => SweepConfig::default(),
        };
        if let Some(kind) = &self.barrier {
            config.barrier.kind = kind.clone();
        }
        if let Some(v) = self.v0 {
            config.barrier.v0 = v;
        }
        if let Some(v) = self.d {
            config.barrier.d = v;
        }
        if let Some(v) = self.a {
            config.barrier.a = v;
        }
        if let Some(v) = self.epsilon {
            config.barrier.epsilon = v;
        }
        if let Some(v) = self.theta {
            config.spin.theta = v;
        }
        if let Some(v) = self.phi {
            config.spin.phi = v;
        }
        if let Some(v) = self.omega {
            config.omega = Some(v);
        }
        if let Some(v) = self.probe_omega {
            config.probe_omega = Some(v);
        }
        if let Some(v) = self.kmin {
            config.k_grid.k_min = v;
        }
        if let Some(v) = self.kmax {
            config.k_grid.k_max = v;
        }
        if let Some(v) = self.n {
            config.k_grid.n_points = v;
        }
        if let Some(v) = self.slices {
            config.slices = v;
        }
        if let Some(fmt) = &self.format {
            config.format = match fmt.as_str() {
                "csv" => OutputFormat::Csv,
                "json" => OutputFormat::Json,
                other => {
                    return Err(Error::Config(format!(
                        "format: expected csv or json, got {other:?}"
                    )))
                }
            };
        }
        if let Some(v) = self.seed {
            config.seed = v;
        }
        Ok(config)
    }
}

fn default_outputs(command: &str) -> Vec<String> {
    let list: &[&str] = match command {
        "amplitudes" => &[
            "transmission",
            "reflection",
            "phase_t",
            "phase_r_left",
            "phase_r_right",
        ],
        "dwell" => &[
            "tau_d",
            "c_rr",
            "c_rl_re",
            "c_rl_im",
            "lambda_plus",
            "lambda_minus",
        ],
        "larmor" => &["tau_zt", "tau_yt", "tau_zr", "tau_yr_left", "tau_yr_right"],
        "cv" => &[
            "wl_alpha_r_plus",
            "wl_alpha_r_minus",
            "wl_alpha_l_plus",
            "wl_alpha_l_minus",
        ],
        "conditioned" => &["cond_avg", "weak_re", "weak_im", "disturbance"],
        "moments" => &["second_moment", "delta_t"],
        _ => &[],
    };
    list.iter().map(|s| s.to_string()).collect()
}

fn output_writer(path: &Option<PathBuf>) -> std::io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(std::io::BufWriter::new(std::fs::File::create(p)?)),
        None => Box::new(std::io::BufWriter::new(std::io::stdout())),
    })
}

fn run_sweep_command(args: &SweepArgs, preset: Option<SweepConfig>, command: &str) -> i32 {
    let config = match args.resolve(preset) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let quantities = if config.outputs.is_empty() {
        default_outputs(command)
    } else {
        config.outputs.clone()
    };
    let result = match run_sweep(&config, &quantities) {
        Ok(r) => r,
        Err(e @ Error::Config(_)) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_NUMERICAL;
        }
    };
    let mut out = match output_writer(&args.out) {
        Ok(w) => w,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let io_result = match config.format {
        OutputFormat::Csv => write_sweep_csv(&mut out, &result),
        OutputFormat::Json => write_sweep_json(&mut out, &result),
    };
    if let Err(e) = io_result.and_then(|_| out.flush()) {
        eprintln!("error: {e}");
        return EXIT_NUMERICAL;
    }
    // Rows were produced; flagged rows make the result partial. Hard
    // failures before any row exist exit through EXIT_NUMERICAL above.
    if result.all_ok() {
        EXIT_OK
    } else {
        EXIT_PARTIAL
    }
}

fn run_verify_command(args: &SweepArgs) -> i32 {
    let config = match args.resolve(None) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let scenario = match config.scenario() {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let ks = match config.k_values() {
        Ok((_, ks)) => ks,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let reports = run_all_identities(&scenario, &ks, config.seed);
    let mut out = match output_writer(&args.out) {
        Ok(w) => w,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let io_result = match config.format {
        // JSON is the natural report shape; CSV on request.
        OutputFormat::Csv => write_reports_csv(&mut out, &reports),
        OutputFormat::Json => write_reports_json(&mut out, &reports),
    };
    if let Err(e) = io_result.and_then(|_| out.flush()) {
        eprintln!("error: {e}");
        return EXIT_NUMERICAL;
    }
    let failed: Vec<&IdentityReport> = reports
        .iter()
        .filter(|r| r.skipped.is_none() && !r.passed)
        .collect();
    for r in &failed {
        eprintln!(
            "FAILED {}: residual {:.3e} > tolerance {:.3e}",
            r.name, r.abs_residual, r.tolerance
        );
    }
    if failed.is_empty() {
        EXIT_OK
    } else {
        EXIT_VERIFY_FAILED
    }
}

/// Entry point used by the `ttclock` binary; returns the process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    dispatch(cli)
}

pub fn dispatch(cli: Cli) -> i32 {
    match &cli.command {
        Command::Amplitudes(args) => run_sweep_command(args, None, "amplitudes"),
        Command::Dwell(args) => run_sweep_command(args, None, "dwell"),
        Command::Larmor(args) => run_sweep_command(args, None, "larmor"),
        Command::Cv(args) => run_sweep_command(args, None, "cv"),
        Command::Conditioned(args) => run_sweep_command(args, None, "conditioned"),
        Command::Moments(args) => run_sweep_command(args, None, "moments"),
        Command::Figure { name, args } => match figure_preset(name) {
            Ok(preset) => run_sweep_command(args, Some(preset), "figure"),
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_CONFIG
            }
        },
        Command::Verify(args) => run_verify_command(args),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_have_expected_shapes() {
        let c = figure_preset("fig2a").unwrap();
        assert_eq!(c.barrier.kind, "square");
        assert_eq!(c.outputs.len(), 4);
        assert_eq!(c.k_grid.n_points, 181);
        let c = figure_preset("fig2b").unwrap();
        assert_eq!(c.barrier.kind, "quadratic");
        assert!((c.barrier.a - (3.0 * std::f64::consts::PI).powi(2)).abs() < 1e-12);
        let c = figure_preset("fig2c").unwrap();
        assert_eq!(c.barrier.kind, "trapezoid");
        assert!((c.barrier.epsilon - 0.5 * (3.0 * std::f64::consts::PI).powi(2)).abs() < 1e-12);
        let c = figure_preset("fig3b").unwrap();
        assert!(
            (c.spin.theta - (std::f64::consts::FRAC_PI_2 - std::f64::consts::PI / 200.0)).abs()
                < 1e-12
        );
        assert!(figure_preset("fig9z").is_err());
    }

    #[test]
    fn minimal_sweep_two_rows() {
        let mut config = SweepConfig::default();
        config.k_grid.n_points = 2;
        config.slices = 200;
        let result = run_sweep(&config, &["tau_d".to_string()]).unwrap();
        assert_eq!(result.rows.len(), 2);
        assert!(result.all_ok());
        assert!(result.rows[0].k_over_k0 < result.rows[1].k_over_k0);
    }

    #[test]
    fn singular_context_rows_are_flagged() {
        let mut config = SweepConfig::default();
        config.spin.theta = std::f64::consts::FRAC_PI_2;
        config.spin.phi = std::f64::consts::FRAC_PI_2;
        config.k_grid.n_points = 3;
        config.slices = 200;
        let result = run_sweep(&config, &["cond_avg".to_string()]).unwrap();
        for row in &result.rows {
            assert_eq!(row.status, "singular_context");
        }
        // Context-free quantities still evaluate cleanly.
        let result = run_sweep(&config, &["tau_d".to_string()]).unwrap();
        assert!(result.all_ok());
    }

    #[test]
    fn csv_schema_and_digits() {
        let mut config = SweepConfig::default();
        config.k_grid.n_points = 2;
        config.slices = 100;
        let result =
            run_sweep(&config, &["transmission".to_string(), "tau_d".to_string()]).unwrap();
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &result).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "k_over_k0,transmission,tau_d,status");
        let first = lines.next().unwrap();
        assert!(first.ends_with(",ok"));
        // 17 significant digits round-trip.
        let field = first.split(',').nth(1).unwrap();
        let parsed: f64 = field.parse().unwrap();
        assert_eq!(parsed, result.rows[0].values[0]);
        assert!(!text.contains('\r'));
    }

    #[test]
    fn unknown_quantity_is_config_error() {
        let config = SweepConfig::default();
        assert!(matches!(
            run_sweep(&config, &["bogus".to_string()]),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn config_json_roundtrip() {
        let text = r#"{
            "barrier": {"kind": "trapezoid", "v0": 50.0, "d": 2.0, "epsilon": 10.0},
            "k_grid": {"k_min": 0.1, "k_max": 0.8, "n_points": 5},
            "spin": {"theta": 1.0, "phi": 0.5},
            "slices": 500,
            "outputs": ["tau_d"],
            "format": "json",
            "seed": 7
        }"#;
        let config: SweepConfig = serde_json::from_str(text).unwrap();
        assert_eq!(config.slices, 500);
        assert_eq!(config.format, OutputFormat::Json);
        let barrier = config.barrier_spec().unwrap();
        assert_eq!(barrier.kind, BarrierKind::Trapezoid);
    }

    #[test]
    fn flag_overrides_file_and_default() {
        let args = SweepArgs {
            v0: Some(25.0),
            ..Default::default()
        };
        let config = args.resolve(None).unwrap();
        assert_eq!(config.barrier.v0, 25.0);
    }
}
