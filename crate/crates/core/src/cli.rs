//! Batch front end: JSON configuration, subcommands and file emitters.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::cylinder::{self, analytic_mode, mode_wavenumbers, Boundary, FdOracle, ModeSolution, ModeTarget, Potential, RadialGrid};
use crate::decoherence::{
    self, d_of_t, d_saturation, decoherence_exponent, intermediate_window, log_log_slope, log_times, DecoherenceRequest,
};
use crate::dissipation::{dissipation_time, surface_impedance_at, GapModel};
use crate::error::Error;
use crate::physical::{
    single_flux_current, validate_regime, MaterialParams, RingGeometry, ThermalState, CGS, STATA_PER_AMPERE,
    TESLA_M2_PER_GAUSS_CM2,
};
use crate::quadrature::QuadOptions;
use crate::report::{round9, sci};
use crate::spectral::{
    compare_bins, default_ir_wavenumbers, ir_coefficient_scaling, oracle_spectrum, BinSpec, BinningRule, CurrentProfile,
    IrMode, MultipoleOrder, ScattererMap, SpectralDensityModel, DEFAULT_BIN_WIDTH_SPACINGS,
};

// ---------------------------------------------------------------------------
// Configuration

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometryConfig {
    pub r0: f64,
    pub r1: f64,
    pub delta: f64,
    pub r_norm: f64,
    pub r_sphere: f64,
    pub omega_min_multiplier: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            r0: 1.0,
            r1: 0.1,
            delta: 1e-5,
            r_norm: 0.3,
            r_sphere: 1000.0,
            omega_min_multiplier: 1.0,
        }
    }
}

impl GeometryConfig {
    /// Scale hierarchy wide enough for every asymptotic window to be open.
    pub fn validation_default() -> Self {
        Self {
            r0: 1.0,
            r1: 1e-4,
            delta: 2e-6,
            r_norm: 0.3,
            r_sphere: 1000.0,
            omega_min_multiplier: 1.0,
        }
    }

    pub fn build(&self) -> crate::Result<RingGeometry> {
        RingGeometry::with_omega_min_multiplier(
            self.r0,
            self.r1,
            self.delta,
            self.r_norm,
            self.r_sphere,
            self.omega_min_multiplier,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MaterialConfig {
    pub sigma_n: f64,
    pub t_c: f64,
    /// Delta0 / (k_B T_c).
    pub gap_ratio: f64,
    pub gap_model: GapModel,
}

impl Default for MaterialConfig {
    fn default() -> Self {
        Self {
            sigma_n: 1e18,
            t_c: 3.7,
            gap_ratio: 1.764,
            gap_model: GapModel::Interpolated,
        }
    }
}

impl MaterialConfig {
    pub fn build(&self) -> crate::Result<MaterialParams> {
        MaterialParams::new(self.sigma_n, self.t_c, self.gap_ratio * CGS.k_b * self.t_c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThermalConfig {
    pub temperature: f64,
}

impl Default for ThermalConfig {
    fn default() -> Self {
        Self { temperature: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SpectralSource {
    #[default]
    Analytic,
    Binned,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NumericsConfig {
    pub grid_points: usize,
    /// Bin width in units of pi c / R_norm.
    pub bin_width_spacings: f64,
    pub binning: BinningRule,
    pub rel_tol: f64,
    pub max_panels: usize,
    pub ir_mode: IrMode,
    pub boundary: Boundary,
    pub log_override: bool,
    /// Delta q in units of the single-flux current.
    pub charge_multiplier: f64,
    pub spectral_source: SpectralSource,
    pub spectrum_points: usize,
    pub multipole: u32,
    pub ir_wavenumbers: Option<Vec<f64>>,
}

impl Default for NumericsConfig {
    fn default() -> Self {
        Self {
            grid_points: cylinder::DEFAULT_GRID_POINTS,
            bin_width_spacings: DEFAULT_BIN_WIDTH_SPACINGS,
            binning: BinningRule::CellSpread,
            rel_tol: 1e-6,
            max_panels: 200_000,
            ir_mode: IrMode::Cutoff,
            boundary: Boundary::Dirichlet,
            log_override: false,
            charge_multiplier: 1.0,
            spectral_source: SpectralSource::Analytic,
            spectrum_points: 200,
            multipole: 1,
            ir_wavenumbers: None,
        }
    }
}

impl NumericsConfig {
    fn quad(&self) -> QuadOptions {
        QuadOptions {
            rel_tol: self.rel_tol,
            abs_tol: 0.0,
            max_panels: self.max_panels,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimesConfig {
    /// Defaults to 3 R1/c.
    pub t_start: Option<f64>,
    /// Defaults to 3000 R0/c.
    pub t_end: Option<f64>,
    pub count: usize,
    /// Explicit grid; overrides the log grid.
    pub values: Option<Vec<f64>>,
}

impl Default for TimesConfig {
    fn default() -> Self {
        Self {
            t_start: None,
            t_end: None,
            count: 61,
            values: None,
        }
    }
}

impl TimesConfig {
    pub fn grid(&self, geom: &RingGeometry) -> Vec<f64> {
        if let Some(v) = &self.values {
            return v.clone();
        }
        let t0 = self.t_start.unwrap_or(3.0 * geom.r1() / CGS.c);
        let t1 = self.t_end.unwrap_or(3000.0 * geom.r0() / CGS.c);
        log_times(t0, t1, self.count)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DissipationConfig {
    pub r_cav: f64,
    pub omega: f64,
    /// Temperatures for the sweep, as fractions of T_c.
    pub temperature_fractions: Vec<f64>,
}

impl Default for DissipationConfig {
    fn default() -> Self {
        Self {
            r_cav: 3.0,
            omega: 1e11,
            temperature_fractions: (1..=16).map(|i| 0.05 * i as f64).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ValidationConfig {
    pub geometry: GeometryConfig,
    pub r_norm_list: Vec<f64>,
    pub grid_points: usize,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        Self {
            geometry: GeometryConfig::validation_default(),
            r_norm_list: vec![0.3, 0.6],
            grid_points: cylinder::DEFAULT_GRID_POINTS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    #[default]
    Temperature,
    Delta,
    R0,
    R1,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
    /// Time of the quadrature column; defaults to 30 R0/c.
    pub t: Option<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            parameter: SweepParameter::Temperature,
            values: vec![0.25, 0.5, 1.0, 2.0, 4.0],
            t: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub directory: PathBuf,
    /// Adds SI-unit columns and blocks to the reports.
    pub si_report: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("ringdec-out"),
            si_report: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub geometry: GeometryConfig,
    pub material: MaterialConfig,
    pub thermal: ThermalConfig,
    pub numerics: NumericsConfig,
    pub times: TimesConfig,
    pub dissipation: DissipationConfig,
    pub validation: ValidationConfig,
    pub sweep: SweepConfig,
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))
    }
}

// ---------------------------------------------------------------------------
// Errors and exit codes

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Model(Error),
    /// A validation suite ran but some checks failed.
    ChecksFailed(usize),
    Io(std::io::Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Model(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "{m}"),
            CliError::Model(e) => write!(f, "{e}"),
            CliError::ChecksFailed(n) => write!(f, "{n} validation check(s) failed"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_REJECTED: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Model(e) if e.is_numerical() => EXIT_NUMERICAL,
            CliError::ChecksFailed(_) => EXIT_NUMERICAL,
            _ => EXIT_REJECTED,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Model(e) if e.is_numerical() => "numerical",
            CliError::Model(_) => "model",
            CliError::ChecksFailed(_) => "checks_failed",
            CliError::Io(_) => "io",
        }
    }
}

// ---------------------------------------------------------------------------
// Command line

#[derive(Debug, Parser)]
#[command(name = "ringdec", version, about = "Decoherence of a persistent supercurrent by its electromagnetic environment")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON configuration file; defaults are used when absent.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides the configuration).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for parallel sections.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Replace the logarithms in the saturation estimate by one.
    #[arg(long, global = true)]
    pub log_override: bool,
    #[arg(long, global = true, value_enum)]
    pub ir_mode: Option<IrModeArg>,
    #[arg(long, global = true, value_enum)]
    pub boundary: Option<BoundaryArg>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Analytic and oracle-binned spectral density.
    Spectrum,
    /// D(t) on the configured time grid.
    Decohere,
    /// Saturation value: estimate and long-time quadrature.
    Saturation,
    /// Surface impedance and dissipation time.
    Dissipation,
    /// Runs the oracle and property suites.
    Validate,
    /// Parameter sweep of the saturation value.
    Sweep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum IrModeArg {
    Cutoff,
    Omega3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundaryArg {
    Dirichlet,
    Neumann,
}

fn init_logging() {
    let env = env_logger::Env::new().filter_or("RINGDEC_LOG", "warn");
    let _ = env_logger::Builder::from_env(env).format_timestamp(None).try_init();
}

/// Parses `args`, runs the subcommand and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    init_logging();
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_REJECTED } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let config = match load_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let out_dir = config.output.directory.clone();
    let result = match cli.workers {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
            Ok(pool) => pool.install(|| dispatch(cli.command, &config)),
            Err(e) => Err(CliError::Config(format!("workers: {e}"))),
        },
        None => dispatch(cli.command, &config),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            let diag = json!({ "error": e.kind(), "message": e.to_string(), "exit_code": e.exit_code() });
            if fs::create_dir_all(&out_dir).is_ok() {
                let _ = fs::write(out_dir.join("error.json"), pretty(&diag));
            }
            e.exit_code()
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut config = match &cli.config {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
            RunConfig::from_json(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(o) = &cli.out {
        config.output.directory = o.clone();
    }
    if cli.log_override {
        config.numerics.log_override = true;
    }
    if let Some(m) = cli.ir_mode {
        config.numerics.ir_mode = match m {
            IrModeArg::Cutoff => IrMode::Cutoff,
            IrModeArg::Omega3 => IrMode::Omega3,
        };
    }
    if let Some(b) = cli.boundary {
        config.numerics.boundary = match b {
            BoundaryArg::Dirichlet => Boundary::Dirichlet,
            BoundaryArg::Neumann => Boundary::Neumann,
        };
    }
    Ok(config)
}

/// Geometry from the configuration, rejected unless every hierarchy check holds.
fn gated_geometry(cfg: &GeometryConfig) -> Result<RingGeometry, CliError> {
    let geom = cfg.build()?;
    validate_regime(&geom).into_result()?;
    Ok(geom)
}

pub fn dispatch(command: Command, config: &RunConfig) -> Result<(), CliError> {
    let geom = gated_geometry(&config.geometry)?;
    let thermal = ThermalState::new(config.thermal.temperature)?;
    let dir = &config.output.directory;
    fs::create_dir_all(dir)?;
    info!("running {command:?} into {}", dir.display());
    match command {
        Command::Spectrum => cmd_spectrum(config, &geom, dir),
        Command::Decohere => cmd_decohere(config, &geom, &thermal, dir),
        Command::Saturation => cmd_saturation(config, &geom, &thermal, dir),
        Command::Dissipation => cmd_dissipation(config, &geom, &thermal, dir),
        Command::Validate => cmd_validate(config, &geom, dir),
        Command::Sweep => cmd_sweep(config, &geom, &thermal, dir),
    }
}

// ---------------------------------------------------------------------------
// Emitters

/// JSON number rounded to 9 significant digits; non-finite values as strings.
fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(round9(x))
    } else {
        json!(sci(x))
    }
}

fn opt_num(x: Option<f64>) -> Value {
    x.map(num).unwrap_or(Value::Null)
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn write(dir: &Path, name: &str, content: &str) -> Result<(), CliError> {
    fs::write(dir.join(name), content)?;
    info!("wrote {name}");
    Ok(())
}

fn opt_sci(x: Option<f64>) -> String {
    x.map(sci).unwrap_or_else(|| "nan".into())
}

fn geometry_json(g: &RingGeometry) -> Value {
    json!({
        "R0": num(g.r0()), "R1": num(g.r1()), "delta": num(g.delta()),
        "R_norm": num(g.r_norm()), "R_sphere": num(g.r_sphere()),
        "L": num(g.circumference()), "omega_min": num(g.omega_min()),
    })
}

fn model_for(config: &RunConfig, geom: &RingGeometry) -> crate::Result<SpectralDensityModel> {
    SpectralDensityModel::analytic(geom, config.numerics.ir_mode)?.with_charge_multiplier(config.numerics.charge_multiplier)
}

/// Oracle-binned density for `geom`, or the reason none was formed.
fn binned_for(config: &RunConfig, geom: &RingGeometry) -> Result<Result<crate::spectral::OracleSpectrum, String>, CliError> {
    let width = config.numerics.bin_width_spacings * std::f64::consts::PI * CGS.c / geom.r_norm();
    let spec = match BinSpec::with_width(geom, geom.r_norm(), width) {
        Ok(s) => s,
        Err(e) => return Ok(Err(e.to_string())),
    };
    let current = CurrentProfile::new(config.numerics.charge_multiplier * single_flux_current(geom)?, geom)?;
    let os = oracle_spectrum(
        geom,
        config.numerics.grid_points,
        config.numerics.boundary,
        &current,
        &spec,
        config.numerics.binning,
    )?;
    Ok(Ok(os))
}

fn cmd_spectrum(config: &RunConfig, geom: &RingGeometry, dir: &Path) -> Result<(), CliError> {
    let model = model_for(config, geom)?;
    let binned = binned_for(config, geom)?;
    let current = config.numerics.charge_multiplier * single_flux_current(geom)?;

    let lo = 0.1 * model.omega_c.min(model.omega_min);
    let hi = 2.0 * model.omega_max;
    let n = config.numerics.spectrum_points.max(2);
    let mut csv = String::from("omega,J_analytic,J_binned,sector\n");
    for i in 0..n {
        let w = lo * (hi / lo).powf(i as f64 / (n - 1) as f64);
        let jb = binned.as_ref().ok().and_then(|b| b.table.lookup(w)).map(|b| b.value);
        let _ = writeln!(csv, "{},{},{},{}", sci(w), sci(model.evaluate(w)), opt_sci(jb), model.sector(w).label());
    }
    write(dir, "spectrum.csv", &csv)?;

    let mut bins_csv = String::from("omega_lo,omega_hi,J_binned,J_analytic,ratio,effective_modes,populated,comparable\n");
    let mut summary = Map::new();
    match &binned {
        Ok(os) => {
            let cmp = compare_bins(&os.table, geom, current);
            let mut max_dev: Option<f64> = None;
            for (c, b) in cmp.iter().zip(&os.table.bins) {
                let _ = writeln!(
                    bins_csv,
                    "{},{},{},{},{},{},{},{}",
                    sci(c.lo),
                    sci(c.hi),
                    sci(c.binned),
                    sci(c.analytic),
                    sci(c.ratio),
                    sci(c.effective_modes),
                    b.populated,
                    c.comparable
                );
                if c.comparable {
                    let d = (c.ratio - 1.0).abs();
                    max_dev = Some(max_dev.map_or(d, |m: f64| m.max(d)));
                }
            }
            summary.insert("binned_modes".into(), json!(os.couplings.len()));
            summary.insert("comparable_bins".into(), json!(cmp.iter().filter(|c| c.comparable).count()));
            summary.insert("max_relative_deviation".into(), opt_num(max_dev));
        }
        Err(reason) => {
            warn!("no binned density: {reason}");
            summary.insert("binned_skipped".into(), json!(reason));
        }
    }
    write(dir, "spectrum_bins.csv", &bins_csv)?;

    let k_top = cylinder::LOW_FREQUENCY_LIMIT / geom.r1();
    let ks = mode_wavenumbers(geom, k_top, config.numerics.boundary)?;
    let modes: Vec<ModeSolution> = ks
        .par_iter()
        .enumerate()
        .filter_map(|(i, &k)| {
            analytic_mode(geom, ModeTarget::Wavenumber(k), config.numerics.boundary)
                .ok()
                .map(|m| ModeSolution { n: i + 1, ..m })
        })
        .collect();
    let mut modes_csv = format!("{}\n", ModeSolution::CSV_HEADER);
    for m in &modes {
        modes_csv.push_str(&m.csv_row());
        modes_csv.push('\n');
    }
    write(dir, "modes.csv", &modes_csv)?;

    let mut model_json = json!({
        "geometry": geometry_json(geom),
        "ir_mode": model.ir_mode,
        "charge_multiplier": num(model.charge_multiplier),
        "prefactor_J_log2": num(model.prefactor),
        "omega_c": num(model.omega_c),
        "omega_min": num(model.omega_min),
        "omega_max": num(model.omega_max),
        "boundary": config.numerics.boundary,
        "binning": config.numerics.binning,
        "binned": Value::Object(summary),
    });
    if config.output.si_report {
        model_json["si"] = json!({ "I_s_A": num(current / STATA_PER_AMPERE) });
    }
    write(dir, "spectrum.json", &pretty(&model_json))
}

fn decoherence_request(config: &RunConfig, geom: &RingGeometry, thermal: &ThermalState, times: Vec<f64>) -> Result<DecoherenceRequest, CliError> {
    let mut model = model_for(config, geom)?;
    if config.numerics.spectral_source == SpectralSource::Binned {
        match binned_for(config, geom)? {
            Ok(os) => model = model.with_binned(os.table),
            Err(reason) => return Err(CliError::Config(format!("binned spectral source unavailable: {reason}"))),
        }
    }
    let mut req = DecoherenceRequest::new(model, *thermal, times)?;
    req.log_override = config.numerics.log_override;
    req.quadrature = config.numerics.quad();
    Ok(req)
}

fn band_json(model: &SpectralDensityModel) -> Value {
    let lo = model.lower_edge();
    let empty = lo >= model.omega_max;
    if empty {
        warn!("spectral support is empty: lower edge {lo:e} >= upper edge {:e}", model.omega_max);
    }
    json!({ "omega_lo": num(lo), "omega_hi": num(model.omega_max), "empty": empty })
}

fn saturation_json(s: &decoherence::SaturationEstimate) -> Value {
    json!({ "D_lim": num(s.d_lim), "u": num(s.u), "f_u": num(s.f_u), "log_override": s.log_override })
}

fn cmd_decohere(config: &RunConfig, geom: &RingGeometry, thermal: &ThermalState, dir: &Path) -> Result<(), CliError> {
    let req = decoherence_request(config, geom, thermal, config.times.grid(geom))?;
    let curve = d_of_t(&req)?;
    let mut csv = String::from("t,D_quadrature,D_lowT1,D_Dfin,regime,tail_bound,quad_error\n");
    for s in &curve.samples {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            sci(s.t),
            sci(s.d),
            opt_sci(s.d_low_t),
            opt_sci(s.d_high_t),
            s.regime.label(),
            sci(s.tail_bound),
            sci(s.error)
        );
    }
    write(dir, "dcurve.csv", &csv)?;

    let (w_lo, w_hi) = intermediate_window(geom);
    let window_slope = if w_hi > w_lo * 1.5 {
        let wreq = decoherence_request(config, geom, thermal, log_times(w_lo, w_hi, 12))?;
        let wc = d_of_t(&wreq)?;
        let pts: Vec<(f64, f64)> = wc.samples.iter().map(|s| (s.t, s.d)).collect();
        Some(log_log_slope(&pts)?)
    } else {
        None
    };
    let main = if config.numerics.log_override { &curve.d_lim_override } else { &curve.d_lim };
    let mut summary = json!({
        "geometry": geometry_json(geom),
        "temperature_K": num(thermal.temperature()),
        "ir_mode": req.model.ir_mode,
        "spectral_band": band_json(&req.model),
        "D_lim": saturation_json(main),
        "D_lim_formula": saturation_json(&curve.d_lim),
        "D_lim_override": saturation_json(&curve.d_lim_override),
        "D_lim_quadrature": curve.plateau.map(|p| json!({
            "mean": num(p.mean), "max_deviation": num(p.max_deviation),
            "t_start": num(p.t_start), "t_end": num(p.t_end), "points": p.points,
        })),
        "regime_boundaries": {
            "R1_over_c": num(geom.r1() / CGS.c),
            "hbar_beta": num(thermal.thermal_crossover_time()),
            "R0_over_c": num(geom.r0() / CGS.c),
        },
        "intermediate_window": [num(w_lo), num(w_hi)],
        "window_slope": opt_num(window_slope),
    });
    if config.output.si_report {
        let is = single_flux_current(geom)?;
        summary["si"] = json!({
            "I_s_A": num(config.numerics.charge_multiplier * is / STATA_PER_AMPERE),
            "flux_quantum_T_m2": num(CGS.flux_quantum() * TESLA_M2_PER_GAUSS_CM2),
            "times_s": true,
        });
    }
    write(dir, "summary.json", &pretty(&summary))
}

fn cmd_saturation(config: &RunConfig, geom: &RingGeometry, thermal: &ThermalState, dir: &Path) -> Result<(), CliError> {
    let formula = d_saturation(geom, thermal, false)?;
    let overridden = d_saturation(geom, thermal, true)?;
    let r0c = geom.r0() / CGS.c;
    let times = log_times(decoherence::SATURATION_ONSET * r0c, 100.0 * decoherence::SATURATION_ONSET * r0c, 11);
    let mut quad = Map::new();
    for mode in [IrMode::Cutoff, IrMode::Omega3] {
        let model = SpectralDensityModel::analytic(geom, mode)?.with_charge_multiplier(config.numerics.charge_multiplier)?;
        let mut req = DecoherenceRequest::new(model, *thermal, times.clone())?;
        req.quadrature = config.numerics.quad();
        let curve = d_of_t(&req)?;
        let p = curve.plateau.ok_or_else(|| Error::Fit("no saturated samples".into()))?;
        quad.insert(
            serde_json::to_value(mode).expect("enum").as_str().unwrap_or("mode").to_string(),
            json!({
                "spectral_band": band_json(&req.model),
                "mean": num(p.mean),
                "max_deviation": num(p.max_deviation),
                "ratio_to_formula": num(p.mean / formula.d_lim),
            }),
        );
    }
    let selected = if config.numerics.log_override { &overridden } else { &formula };
    let v = json!({
        "D_lim": saturation_json(selected),
        "formula": saturation_json(&formula),
        "log_override": saturation_json(&overridden),
        "quadrature": Value::Object(quad),
        "omega_min": num(geom.omega_min()),
    });
    write(dir, "saturation.json", &pretty(&v))
}

fn cmd_dissipation(config: &RunConfig, geom: &RingGeometry, thermal: &ThermalState, dir: &Path) -> Result<(), CliError> {
    let mat = config.material.build()?;
    let d = &config.dissipation;
    let in_band = d.omega <= geom.omega_uv_edge();
    let point = surface_impedance_at(d.omega, thermal, &mat, geom.delta(), geom.r0(), d.r_cav, config.material.gap_model)?;
    let mut csv = String::from("T,T_over_Tc,sigma,zeta_R,tau,margin\n");
    let mut min_margin = f64::INFINITY;
    for &frac in &d.temperature_fractions {
        let th = ThermalState::new(frac * mat.t_c())?;
        let r = surface_impedance_at(d.omega, &th, &mat, geom.delta(), geom.r0(), d.r_cav, config.material.gap_model)?;
        min_margin = min_margin.min(r.margin);
        let _ = writeln!(csv, "{},{},{},{},{},{}", sci(r.temperature), sci(frac), sci(r.sigma), sci(r.zeta_r), sci(r.tau), sci(r.margin));
    }
    write(dir, "dissipation.csv", &csv)?;
    let identity = if point.zeta_r > 0.0 { point.tau * CGS.c / point.r_cav * point.zeta_r } else { 1.0 };
    let v = json!({
        "omega": num(point.omega),
        "omega_within_band": in_band,
        "temperature_K": num(point.temperature),
        "sigma": num(point.sigma),
        "zeta": { "re": num(point.zeta_re), "im": num(point.zeta_im) },
        "zeta_R": num(point.zeta_r),
        "zeta_R_normal_state": num(crate::dissipation::zeta_real(d.omega, mat.sigma_n(), geom.delta())),
        "tau_s": num(point.tau),
        "R_cav": num(point.r_cav),
        "margin": num(point.margin),
        "identity_tau_c_zeta_over_Rcav": num(identity),
        "min_margin_over_sweep": num(min_margin),
    });
    write(dir, "dissipation.json", &pretty(&v))
}

fn cmd_sweep(config: &RunConfig, geom: &RingGeometry, thermal: &ThermalState, dir: &Path) -> Result<(), CliError> {
    let sw = &config.sweep;
    let rows = sw
        .values
        .par_iter()
        .map(|&x| -> Result<String, CliError> {
            let (g, th) = match sw.parameter {
                SweepParameter::Temperature => (*geom, ThermalState::new(x)?),
                SweepParameter::Delta => (geom.with_delta(x)?, *thermal),
                SweepParameter::R0 => (geom.with_r0(x)?, *thermal),
                SweepParameter::R1 => (geom.with_r1(x)?, *thermal),
            };
            validate_regime(&g).into_result()?;
            let lim = d_saturation(&g, &th, false)?;
            let lim_o = d_saturation(&g, &th, true)?;
            let t = sw.t.unwrap_or(decoherence::SATURATION_ONSET * g.r0() / CGS.c);
            let model = model_for(config, &g)?;
            let d = decoherence_exponent(&model, &th, t, &config.numerics.quad())?;
            Ok(format!(
                "{},{},{},{},{},{}\n",
                sci(x),
                sci(lim.d_lim),
                sci(lim_o.d_lim),
                sci(lim.u),
                sci(t),
                sci(d.value)
            ))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut csv = String::from("value,D_lim,D_lim_override,u,t,D_quadrature\n");
    rows.iter().for_each(|r| csv.push_str(r));
    write(dir, "sweep.csv", &csv)
}

// ---------------------------------------------------------------------------
// Validation suite

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub measured: f64,
    pub limit: f64,
}

impl Check {
    fn at_most(name: &str, measured: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            pass: measured <= limit,
            measured,
            limit,
        }
    }
    fn at_least(name: &str, measured: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            pass: measured >= limit,
            measured,
            limit,
        }
    }
}

/// Oracle, spectral, infrared, dissipation and decoherence-property checks.
pub fn validation_checks(config: &RunConfig, geom: &RingGeometry) -> crate::Result<Vec<Check>> {
    let mut checks = Vec::new();
    let v = &config.validation;
    let vgeom = v.geometry.build()?;
    validate_regime(&vgeom).into_result()?;
    let rn_list: Vec<f64> = if v.r_norm_list.is_empty() { vec![vgeom.r_norm()] } else { v.r_norm_list.clone() };
    let rn_min = rn_list.iter().cloned().fold(f64::INFINITY, f64::min);
    let g0 = vgeom.with_r_norm(rn_min)?;

    // free field
    let grid = RadialGrid::for_geometry(&g0, v.grid_points)?;
    let free = FdOracle::new(&g0, grid.clone(), Boundary::Dirichlet, Potential::FreeField);
    let zeros = crate::special::j0_zeros(10);
    let free_dev = free
        .wavenumbers(10)
        .iter()
        .zip(&zeros)
        .map(|(k, z)| (k * g0.r_norm() / z - 1.0).abs())
        .fold(0.0, f64::max);
    checks.push(Check::at_most("free-field eigenvalues vs J0 zeros", free_dev, 1e-3));

    // oracle with wire
    let oracle = FdOracle::new(&g0, grid, Boundary::Dirichlet, Potential::Wire);
    let k_cmp = 0.05 / g0.r1();
    let modes = oracle.modes_below(k_cmp)?;
    let mut ortho = 0.0f64;
    for i in 0..modes.len() {
        for j in 0..=i {
            let d = oracle.inner_product(&modes[i].values, &modes[j].values);
            ortho = ortho.max((d - if i == j { 1.0 } else { 0.0 }).abs());
        }
    }
    checks.push(Check::at_most("oracle orthonormality", ortho, 1e-8));
    let ks = mode_wavenumbers(&g0, k_cmp * 1.05, Boundary::Dirichlet)?;
    let mut k_dev = 0.0f64;
    let mut surf_dev = 0.0f64;
    let mut coup_dev = 0.0f64;
    let mut shape_ok = true;
    let current = CurrentProfile::single_flux(&g0)?;
    for m in &modes {
        if m.k * g0.r_norm() >= 5.0 && m.k * g0.r1() <= 0.05 {
            if let Some(kn) = ks.get(m.n - 1) {
                k_dev = k_dev.max((kn / m.k - 1.0).abs());
            }
        }
        if (m.k * g0.r1()).ln().abs() >= 3.0 && m.k * g0.r_norm() >= cylinder::FAR_ZONE_MIN {
            let a = analytic_mode(&g0, ModeTarget::Wavenumber(m.k), Boundary::Dirichlet)?;
            surf_dev = surf_dev.max((oracle.surface_value(m) / a.surface_value - 1.0).abs());
            let ca = crate::spectral::coupling_analytic(&g0, &a, &current)?;
            let co = crate::spectral::coupling_oracle(&oracle, m, &current)?;
            coup_dev = coup_dev.max((co / ca - 1.0).abs());
            let bound = 2.0 * (g0.delta() / g0.r1()) / (m.k * g0.r1()).ln().abs();
            shape_ok &= oracle.surface_value(m) / oracle.exterior_peak(m) <= bound;
        }
    }
    checks.push(Check::at_most("analytic vs oracle wavenumbers", k_dev, 0.01));
    checks.push(Check::at_most("analytic vs oracle surface value", surf_dev, 0.35));
    checks.push(Check::at_most("analytic vs oracle coupling", coup_dev, 0.35));
    checks.push(Check::at_least("surface value below exterior peak bound", shape_ok as u8 as f64, 1.0));
    let probe = &modes[modes.len() / 2];
    let decay = oracle.interior_decay_length(probe)?;
    checks.push(Check::at_most("interior decay length vs delta", (decay / g0.delta() - 1.0).abs(), 0.05));
    checks.push(Check::at_most(
        "interior weight fraction",
        oracle.interior_fraction(probe),
        10.0 * (g0.delta() / g0.r1()).powi(2),
    ));

    // binned spectral density
    let spec = BinSpec::for_geometry(&g0, rn_min)?;
    let mut tables = Vec::new();
    for &rn in &rn_list {
        let g = vgeom.with_r_norm(rn)?;
        let cur = CurrentProfile::single_flux(&g)?;
        let os = oracle_spectrum(&g, v.grid_points, Boundary::Dirichlet, &cur, &spec, config.numerics.binning)?;
        let cmp = compare_bins(&os.table, &g, cur.total());
        let dev = cmp.iter().filter(|c| c.comparable).map(|c| (c.ratio - 1.0).abs()).fold(0.0, f64::max);
        let n_cmp = cmp.iter().filter(|c| c.comparable).count();
        checks.push(Check::at_least(&format!("comparable bins at R_norm = {rn}"), n_cmp as f64, 1.0));
        checks.push(Check::at_most(&format!("binned vs analytic J at R_norm = {rn}"), dev, 0.35));
        tables.push(cmp);
    }
    if tables.len() >= 2 {
        let inv = tables[0]
            .iter()
            .zip(&tables[1])
            .filter(|(a, b)| a.comparable && b.comparable)
            .map(|(a, b)| (b.binned / a.binned - 1.0).abs())
            .fold(0.0, f64::max);
        checks.push(Check::at_most("binned J invariance under R_norm change", inv, 0.05));
    }

    // infrared law on the run geometry
    let l = MultipoleOrder::new(config.numerics.multipole)?;
    let ks_ir = config.numerics.ir_wavenumbers.clone().unwrap_or_else(|| default_ir_wavenumbers(geom));
    let fit = ir_coefficient_scaling(geom, l, &ks_ir, ScattererMap::default())?;
    let lf = l.get() as f64;
    checks.push(Check::at_most("IR coefficient exponent", (fit.slope - (lf + 1.0)).abs(), 0.05));
    checks.push(Check::at_most("implied J exponent", (fit.implied_j_exponent - (2.0 * lf + 1.0)).abs(), 0.05));

    // dissipation
    let mat = config.material.build()?;
    let d = &config.dissipation;
    let mut identity = 0.0f64;
    let mut min_margin = f64::INFINITY;
    for &frac in d.temperature_fractions.iter().filter(|&&f| f <= 0.8) {
        let th = ThermalState::new(frac * mat.t_c())?;
        let r = surface_impedance_at(d.omega, &th, &mat, geom.delta(), geom.r0(), d.r_cav, config.material.gap_model)?;
        min_margin = min_margin.min(r.margin);
        if r.zeta_r > 0.0 {
            identity = identity.max((r.tau * CGS.c / r.r_cav * r.zeta_r - 1.0).abs());
        }
    }
    checks.push(Check::at_most("tau c zeta_R / R_cav identity", identity, 1e-12));
    checks.push(Check::at_least("dissipation margin up to 0.8 T_c", min_margin, 1e4));
    let t_double = dissipation_time(2e-6, d.r_cav, geom.r0())?.tau / dissipation_time(1e-6, d.r_cav, geom.r0())?.tau;
    checks.push(Check::at_most("tau halves when zeta_R doubles", (t_double - 0.5).abs(), 1e-12));

    // decoherence properties on the validation geometry
    let quad = config.numerics.quad();
    let model = SpectralDensityModel::analytic(&g0, IrMode::Cutoff)?;
    let r0c = g0.r0() / CGS.c;
    let times = log_times(3.0 * g0.r1() / CGS.c, 100.0 * r0c, 15);
    let cold = ThermalState::new(0.5)?;
    let warm = ThermalState::new(2.0)?;
    let eval = |m: &SpectralDensityModel, th: &ThermalState| -> crate::Result<Vec<f64>> {
        times.par_iter().map(|&t| Ok(decoherence_exponent(m, th, t, &quad)?.value)).collect()
    };
    let dc = eval(&model, &cold)?;
    let dw = eval(&model, &warm)?;
    let d0 = decoherence_exponent(&model, &cold, 0.0, &quad)?.value;
    checks.push(Check::at_most("D(0)", d0.abs(), 0.0));
    let min_d = dc.iter().chain(&dw).cloned().fold(f64::INFINITY, f64::min);
    checks.push(Check::at_least("D >= 0", min_d, 0.0));
    let mono = dc.iter().zip(&dw).map(|(c, w)| (c - w) / c).fold(f64::NEG_INFINITY, f64::max);
    checks.push(Check::at_most("temperature monotonicity (max relative decrease)", mono.max(0.0), 0.0));
    let g2 = g0.with_delta(2.0 * g0.delta())?;
    let model2 = SpectralDensityModel::analytic(&g2, IrMode::Cutoff)?;
    let d2 = eval(&model2, &cold)?;
    let homog = dc.iter().zip(&d2).map(|(a, b)| (b / a / 4.0 - 1.0).abs()).fold(0.0, f64::max);
    checks.push(Check::at_most("quadrature (delta/R1)^2 homogeneity", homog, 10.0 * quad.rel_tol));
    let (w_lo, w_hi) = intermediate_window(&g0);
    let tm = (w_lo * w_hi).sqrt();
    let zero = ThermalState::zero();
    let closed_h = decoherence::d_low_t_closed(tm, &g2, &zero)? / decoherence::d_low_t_closed(tm, &g0, &zero)?;
    let sat_h = d_saturation(&g2, &zero, false)?.d_lim / d_saturation(&g0, &zero, false)?.d_lim;
    checks.push(Check::at_most(
        "closed-form (delta/R1)^2 homogeneity",
        (closed_h / 4.0 - 1.0).abs().max((sat_h / 4.0 - 1.0).abs()),
        1e-12,
    ));
    Ok(checks)
}

fn cmd_validate(config: &RunConfig, geom: &RingGeometry, dir: &Path) -> Result<(), CliError> {
    let checks = validation_checks(config, geom)?;
    let failed = checks.iter().filter(|c| !c.pass).count();
    let report = json!({
        "pass": failed == 0,
        "checks": checks.iter().map(|c| json!({
            "name": c.name, "pass": c.pass, "measured": num(c.measured), "limit": num(c.limit),
        })).collect::<Vec<_>>(),
    });
    write(dir, "report.json", &pretty(&report))?;
    for c in &checks {
        let tag = if c.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] {}: {} (limit {})", c.name, sci(c.measured), sci(c.limit));
    }
    if failed > 0 {
        return Err(CliError::ChecksFailed(failed));
    }
    Ok(())
}
