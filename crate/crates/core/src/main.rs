//! Command-line front end: dataset analysis, synthetic data generation,
//! estimate-vs-measurement validation, and curve export.
//!
//! Exit codes: 0 success, 1 error, 2 indeterminate classification under
//! --strict. Errors print a single machine-parseable line
//! `error: <code>: <detail>` on stderr.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use sha2::{Digest, Sha256};

use chicrit::criterion::{
    self, validation_scores, ChiThresholds, Classification, ConfigEcho, DatasetInfo, ReportInputs,
};
use chicrit::gridseries::{
    self, filter_day_hours, load_grid_with_spacing, load_series, DayFilterWindow, DistanceMode,
    GridError, GridSeriesSet,
};
use chicrit::infotheory::{BinningRule, BinningSpec, InfoError, RangePolicy};
use chicrit::spatial::{
    extract_delta, fit_exp_decay, pairwise_nmi, PairSampling, PairwiseConfig, SpatialError,
    SpatialMICurve,
};
use chicrit::synth::{
    gen_diurnal_field, gen_spatial_field, gen_temporal_series, single_pixel_set, DiurnalSpec,
    SpatialGenSpec, SynthError, TemporalGenSpec,
};
use chicrit::temporal::{
    auto_mi_curves, tau_statistics, AutoMICurve, TauPolicy, TemporalConfig, TemporalError,
};

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze(args) => cmd_analyze(&args),
        Command::Synth(args) => cmd_synth(&args),
        Command::Validate(args) => cmd_validate(&args),
        Command::Curves(args) => cmd_curves(&args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}: {}", e.code, e.detail.replace('\n', "; "));
            1
        }
    }
}

#[derive(Parser)]
#[command(
    name = "chicrit",
    version,
    about = "Spatio-temporal decorrelation criterion for solar irradiance forecasting: \
             recommends a stochastic forecaster or NWP from gridded data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full analysis and emit a report plus curve artifacts
    Analyze(AnalyzeArgs),
    /// Generate a synthetic geometry + series dataset
    Synth(SynthArgs),
    /// Score an estimated series against measurements (nMBE/nRMSE)
    Validate(ValidateArgs),
    /// Emit curve CSVs only; no classification is computed
    Curves(CurvesArgs),
}

#[derive(Clone, Copy, ValueEnum, Default, PartialEq)]
enum DistanceArg {
    #[default]
    Haversine,
    Planar,
}

impl From<DistanceArg> for DistanceMode {
    fn from(d: DistanceArg) -> Self {
        match d {
            DistanceArg::Haversine => DistanceMode::Haversine,
            DistanceArg::Planar => DistanceMode::Planar,
        }
    }
}

#[derive(Clone, Copy, ValueEnum, Default, PartialEq)]
enum TauPolicyArg {
    Start,
    #[default]
    End,
    Mid,
}

impl From<TauPolicyArg> for TauPolicy {
    fn from(p: TauPolicyArg) -> Self {
        match p {
            TauPolicyArg::Start => TauPolicy::PlateauStart,
            TauPolicyArg::End => TauPolicy::PlateauEnd,
            TauPolicyArg::Mid => TauPolicy::Midpoint,
        }
    }
}

#[derive(Args)]
struct DatasetArgs {
    /// Geometry CSV: pixel_id,lat_deg,lon_deg[,x_km,y_km][,elevation_m]
    #[arg(long)]
    grid: PathBuf,
    /// Series CSV: long form timestamp,pixel_id,ghi_whm2 or wide form timestamp,px<id>,...
    #[arg(long)]
    series: PathBuf,
    /// Grid spacing in km; inferred as the minimum pairwise distance when omitted
    #[arg(long)]
    spacing: Option<f64>,
    /// Keep only local hours HH:HH (inclusive), e.g. 8:19
    #[arg(long, value_name = "HH:HH")]
    day_filter: Option<String>,
    /// Fixed UTC offset used to derive the local hour
    #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
    utc_offset: i32,
    /// Binning rule: sturges, fd, or fixed:<n>
    #[arg(long, default_value = "sturges")]
    bins: String,
    /// Pixel-pair sampling: all or random:<m>
    #[arg(long, default_value = "all")]
    pairs: String,
    /// RNG seed; falls back to the CHI_SEED environment variable, then 0
    #[arg(long)]
    seed: Option<u64>,
    /// Distance computation between pixels
    #[arg(long, value_enum, default_value_t)]
    distance: DistanceArg,
    /// Minimum co-present samples per pixel pair and per lag
    #[arg(long, default_value_t = 100)]
    sample_floor: usize,
    /// Maximum auto-MI lag, in time steps
    #[arg(long, default_value_t = 24)]
    max_lag: usize,
    /// Minimum-detection tolerance in bits
    #[arg(long, default_value_t = 0.005)]
    tau_tol: f64,
    /// Which plateau bound becomes tau
    #[arg(long, value_enum, default_value_t)]
    tau_policy: TauPolicyArg,
    /// Output directory for reports and curve files
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Worker threads for the pair/pixel loops (0 = auto)
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    dataset: DatasetArgs,
    /// Forecast horizon in time steps; tau is divided by it
    #[arg(long, default_value_t = 1)]
    horizon: u32,
    /// Below this chi the stochastic route is recommended
    #[arg(long, default_value_t = 0.9)]
    chi_low: f64,
    /// Above this chi the NWP route is recommended
    #[arg(long, default_value_t = 1.1)]
    chi_high: f64,
    /// Exit with code 2 when the classification is indeterminate
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct CurvesArgs {
    #[command(flatten)]
    dataset: DatasetArgs,
}

#[derive(Args)]
struct SynthArgs {
    /// Spatial grid as <nx>x<ny>, e.g. 12x12
    #[arg(long, value_name = "NXxNY")]
    spatial: Option<String>,
    /// Grid spacing in km
    #[arg(long, default_value_t = 2.5)]
    spacing: f64,
    /// Spatial correlation length of the field in km
    #[arg(long, default_value_t = 5.0)]
    corr_length: f64,
    /// Number of hourly steps
    #[arg(long, default_value_t = 5000)]
    steps: usize,
    /// Add a diurnal envelope and AR(1) temporal memory to the field
    #[arg(long)]
    diurnal: bool,
    /// Generate one pixel from the diurnal AR(1) generator instead of a field
    #[arg(long, conflicts_with = "spatial")]
    temporal: bool,
    /// Days of data for --temporal
    #[arg(long, default_value_t = 60)]
    days: usize,
    /// Peak envelope irradiance in Wh/m^2
    #[arg(long, default_value_t = 900.0)]
    peak: f64,
    #[arg(long, default_value_t = 6)]
    sunrise: u8,
    #[arg(long, default_value_t = 18)]
    sunset: u8,
    /// AR(1) coefficient of the clear-sky index
    #[arg(long, default_value_t = 0.8, allow_hyphen_values = true)]
    ar_phi: f64,
    /// Innovation sigma of the clear-sky index (--temporal only)
    #[arg(long, default_value_t = 0.15)]
    noise_sigma: f64,
    /// RNG seed; falls back to CHI_SEED, then 0
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct ValidateArgs {
    /// Estimated series CSV (single pixel)
    #[arg(long)]
    estimate: PathBuf,
    /// Measured series CSV (single pixel)
    #[arg(long)]
    measured: PathBuf,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

// ---------------------------------------------------------------------------
// error mapping
// ---------------------------------------------------------------------------

struct CliError {
    code: &'static str,
    detail: String,
}

impl CliError {
    fn config(detail: impl Into<String>) -> Self {
        Self {
            code: "E_CONFIG",
            detail: detail.into(),
        }
    }

    fn io(detail: impl Into<String>) -> Self {
        Self {
            code: "E_IO",
            detail: detail.into(),
        }
    }

    fn data(detail: impl Into<String>) -> Self {
        Self {
            code: "E_DATA",
            detail: detail.into(),
        }
    }
}

impl From<GridError> for CliError {
    fn from(e: GridError) -> Self {
        let code = match &e {
            GridError::Io(_) => "E_IO",
            GridError::Csv(c) => {
                if matches!(c.kind(), csv::ErrorKind::Io(_)) {
                    "E_IO"
                } else {
                    "E_PARSE"
                }
            }
            GridError::Parse { .. } => "E_PARSE",
            GridError::InvalidHourRange { .. } | GridError::SpacingUnknown(_) => "E_CONFIG",
            _ => "E_DATA",
        };
        Self {
            code,
            detail: e.to_string(),
        }
    }
}

impl From<InfoError> for CliError {
    fn from(e: InfoError) -> Self {
        let code = match &e {
            InfoError::InvalidBinSpec(_) => "E_CONFIG",
            _ => "E_DATA",
        };
        Self {
            code,
            detail: e.to_string(),
        }
    }
}

impl From<SpatialError> for CliError {
    fn from(e: SpatialError) -> Self {
        match e {
            SpatialError::Grid(g) => g.into(),
            SpatialError::Info(i) => i.into(),
            SpatialError::FitDiverged { .. }
            | SpatialError::DegenerateCurve(_)
            | SpatialError::UnconvergedFit => Self {
                code: "E_FIT",
                detail: e.to_string(),
            },
            _ => Self {
                code: "E_DATA",
                detail: e.to_string(),
            },
        }
    }
}

impl From<TemporalError> for CliError {
    fn from(e: TemporalError) -> Self {
        match e {
            TemporalError::Info(i) => i.into(),
            _ => Self {
                code: "E_DATA",
                detail: e.to_string(),
            },
        }
    }
}

impl From<criterion::CriterionError> for CliError {
    fn from(e: criterion::CriterionError) -> Self {
        let code = match &e {
            criterion::CriterionError::InvalidThresholds { .. } => "E_CONFIG",
            _ => "E_DATA",
        };
        Self {
            code,
            detail: e.to_string(),
        }
    }
}

impl From<SynthError> for CliError {
    fn from(e: SynthError) -> Self {
        match e {
            SynthError::Grid(g) => g.into(),
            SynthError::CovarianceNotPD => Self {
                code: "E_DATA",
                detail: e.to_string(),
            },
            _ => Self {
                code: "E_CONFIG",
                detail: e.to_string(),
            },
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::io(e.to_string())
    }
}

// ---------------------------------------------------------------------------
// flag parsing helpers
// ---------------------------------------------------------------------------

fn parse_bins(s: &str) -> Result<BinningSpec, CliError> {
    let rule = match s {
        "sturges" => BinningRule::Sturges,
        "fd" => BinningRule::FreedmanDiaconis,
        other => {
            let n = other
                .strip_prefix("fixed:")
                .and_then(|n| n.parse::<usize>().ok())
                .filter(|&n| n >= 2)
                .ok_or_else(|| {
                    CliError::config(format!(
                        "--bins expects sturges, fd, or fixed:<n>=2>, got '{other}'"
                    ))
                })?;
            BinningRule::FixedCount(n)
        }
    };
    Ok(BinningSpec {
        rule,
        range_policy: RangePolicy::DataMinMax,
    })
}

fn parse_pairs(s: &str, seed: u64) -> Result<PairSampling, CliError> {
    match s {
        "all" => Ok(PairSampling::AllPairs),
        other => {
            let m = other
                .strip_prefix("random:")
                .and_then(|m| m.parse::<usize>().ok())
                .filter(|&m| m >= 1)
                .ok_or_else(|| {
                    CliError::config(format!(
                        "--pairs expects all or random:<m>=1>, got '{other}'"
                    ))
                })?;
            Ok(PairSampling::RandomPairs { m, seed })
        }
    }
}

fn parse_day_filter(s: &str) -> Result<(u8, u8), CliError> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| CliError::config(format!("--day-filter expects HH:HH, got '{s}'")))?;
    let parse_hour = |h: &str| {
        h.parse::<u8>()
            .ok()
            .filter(|&h| h <= 23)
            .ok_or_else(|| CliError::config(format!("invalid hour '{h}' in --day-filter")))
    };
    Ok((parse_hour(a)?, parse_hour(b)?))
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.or_else(|| std::env::var("CHI_SEED").ok().and_then(|v| v.parse().ok()))
        .unwrap_or(0)
}

fn init_threads(threads: usize) {
    if threads > 0 {
        // ignore failure: the global pool can only be set once per process
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
}

// ---------------------------------------------------------------------------
// shared analysis plumbing
// ---------------------------------------------------------------------------

struct LoadedDataset {
    set: GridSeriesSet,
    hash: String,
    pairwise: PairwiseConfig,
    temporal: TemporalConfig,
    seed: u64,
}

fn load_dataset(args: &DatasetArgs) -> Result<LoadedDataset, CliError> {
    init_threads(args.threads);
    let seed = resolve_seed(args.seed);
    let binning = parse_bins(&args.bins)?;
    let sampling = parse_pairs(&args.pairs, seed)?;

    let geometry_bytes = fs::read(&args.grid)
        .map_err(|e| CliError::io(format!("cannot read geometry {}: {e}", args.grid.display())))?;
    let series_bytes = fs::read(&args.series)
        .map_err(|e| CliError::io(format!("cannot read series {}: {e}", args.series.display())))?;
    let mut hasher = Sha256::new();
    hasher.update(&geometry_bytes);
    hasher.update(&series_bytes);
    let hash = hex::encode(hasher.finalize());

    let geometry = load_grid_with_spacing(&args.grid, args.spacing)?;
    let mut set = load_series(&args.series, &geometry)?;
    if let Some(filter) = &args.day_filter {
        let (start_hour, end_hour) = parse_day_filter(filter)?;
        set = filter_day_hours(
            &set,
            DayFilterWindow {
                start_hour,
                end_hour,
                utc_offset_hours: args.utc_offset,
            },
        )?;
    }

    let pairwise = PairwiseConfig {
        binning,
        sampling,
        distance_mode: args.distance.into(),
        sample_floor: args.sample_floor,
        orientation_tol: 0.05,
    };
    let temporal = TemporalConfig {
        max_lag: args.max_lag,
        binning,
        tol: args.tau_tol,
        policy: args.tau_policy.into(),
        sample_floor: args.sample_floor,
    };
    Ok(LoadedDataset {
        set,
        hash,
        pairwise,
        temporal,
        seed,
    })
}

fn spatial_curve_csv(curve: &SpatialMICurve) -> String {
    let mut out = String::from("distance_km,nmi,pair_count\n");
    for p in &curve.points {
        let _ = writeln!(out, "{},{},{}", p.distance_km, p.nmi, p.pair_count);
    }
    out
}

fn temporal_curve_csv(curve: &AutoMICurve) -> String {
    let mut out = String::from("lag,mi_bits,nmi\n");
    for i in 0..curve.lags.len() {
        let _ = writeln!(
            out,
            "{},{},{}",
            curve.lags[i], curve.mi_bits[i], curve.nmi[i]
        );
    }
    out
}

fn write_temporal_curves(out_dir: &Path, curves: &[AutoMICurve]) -> Result<(), CliError> {
    let dir = out_dir.join("temporal");
    fs::create_dir_all(&dir)?;
    for curve in curves {
        fs::write(
            dir.join(format!("px{}.csv", curve.pixel_id)),
            temporal_curve_csv(curve),
        )?;
    }
    Ok(())
}

fn config_echo(
    args: &DatasetArgs,
    thresholds: ChiThresholds,
    horizon: u32,
    seed: u64,
) -> ConfigEcho {
    ConfigEcho {
        binning: args.bins.clone(),
        horizon_steps: horizon,
        day_filter: args.day_filter.clone(),
        utc_offset_hours: args.utc_offset,
        distance_mode: match args.distance {
            DistanceArg::Haversine => "haversine".into(),
            DistanceArg::Planar => "planar".into(),
        },
        sampling: args.pairs.clone(),
        sample_floor: args.sample_floor,
        tau_policy: match args.tau_policy {
            TauPolicyArg::Start => "plateau-start".into(),
            TauPolicyArg::End => "plateau-end".into(),
            TauPolicyArg::Mid => "plateau-mid".into(),
        },
        tau_tol: args.tau_tol,
        max_lag: args.max_lag,
        thresholds,
        seed: Some(seed),
    }
}

#[derive(serde::Serialize)]
struct TauStatsExport {
    median: f64,
    min: f64,
    max: f64,
    mean: f64,
    std: f64,
    n_pixels: usize,
    n_no_minimum: usize,
}

// ---------------------------------------------------------------------------
// commands
// ---------------------------------------------------------------------------

fn cmd_analyze(args: &AnalyzeArgs) -> Result<i32, CliError> {
    if args.horizon < 1 {
        return Err(CliError::config("--horizon must be >= 1"));
    }
    let thresholds = ChiThresholds::new(args.chi_low, args.chi_high)?;
    let data = load_dataset(&args.dataset)?;
    let out_dir = &args.dataset.out_dir;
    fs::create_dir_all(out_dir)?;

    // spatial branch
    let curve = pairwise_nmi(&data.set, &data.pairwise)?;
    fs::write(out_dir.join("spatial_curve.csv"), spatial_curve_csv(&curve))?;
    let fit = fit_exp_decay(&curve, None)?;
    fs::write(
        out_dir.join("spatial_fit.json"),
        criterion::to_json_12sig(&fit),
    )?;
    let delta = extract_delta(&fit, data.set.geometry.grid_spacing_km)?;

    // temporal branch
    let curves = auto_mi_curves(&data.set, &data.temporal)?;
    write_temporal_curves(out_dir, &curves)?;
    let stats = tau_statistics(&data.set, &data.temporal)?;
    let mut tau_csv = String::from("pixel_id,plateau_start,plateau_end,tau\n");
    for t in &stats.per_pixel {
        let _ = writeln!(
            tau_csv,
            "{},{},{},{}",
            t.pixel_id, t.plateau_start, t.plateau_end, t.tau
        );
    }
    fs::write(out_dir.join("tau_per_pixel.csv"), tau_csv)?;
    fs::write(
        out_dir.join("tau_stats.json"),
        criterion::to_json_12sig(&TauStatsExport {
            median: stats.median,
            min: stats.min,
            max: stats.max,
            mean: stats.mean,
            std: stats.std,
            n_pixels: stats.per_pixel.len(),
            n_no_minimum: stats.n_no_minimum,
        }),
    )?;

    // criterion
    let report = criterion::build_report(ReportInputs {
        dataset: DatasetInfo {
            hash: data.hash.clone(),
            n_pixels: data.set.n_pixels(),
            n_steps: data.set.n_steps(),
            grid_spacing_km: data.set.geometry.grid_spacing_km,
        },
        config: config_echo(&args.dataset, thresholds, args.horizon, data.seed),
        delta: &delta,
        fit: &fit,
        tau_stats: &stats,
        horizon_steps: args.horizon,
        curve_path: "spatial_curve.csv".into(),
        per_pixel_path: "tau_per_pixel.csv".into(),
    })?;
    fs::write(out_dir.join("report.json"), report.to_json())?;

    let classification = report.classification();
    println!(
        "dataset: {} pixels, {} steps, spacing {} km (sha256 {})",
        report.dataset.n_pixels,
        report.dataset.n_steps,
        criterion::format_sig(report.dataset.grid_spacing_km, 6),
        &data.hash[..16]
    );
    println!(
        "delta: {} km = {} pixels (fit a={}, b={}, c={}, rss={}, {} iterations)",
        criterion::format_sig(delta.delta_km, 6),
        criterion::format_sig(delta.delta_pixels, 6),
        criterion::format_sig(fit.a, 4),
        criterion::format_sig(fit.b, 4),
        criterion::format_sig(fit.c, 4),
        criterion::format_sig(fit.rss, 4),
        fit.iterations
    );
    println!(
        "tau: median {} steps (min {}, max {}, mean {}, std {}), {} pixel(s) without minimum",
        criterion::format_sig(stats.median, 4),
        criterion::format_sig(stats.min, 4),
        criterion::format_sig(stats.max, 4),
        criterion::format_sig(stats.mean, 4),
        criterion::format_sig(stats.std, 4),
        stats.n_no_minimum
    );
    println!(
        "chi: {} pixel.time_lag^-1 at horizon {} (tau_eff {}), thresholds [{}, {}]",
        criterion::format_sig(report.chi.value, 6),
        args.horizon,
        criterion::format_sig(report.chi.tau_eff, 6),
        criterion::format_sig(thresholds.low, 4),
        criterion::format_sig(thresholds.high, 4)
    );
    println!("report: {}", out_dir.join("report.json").display());
    println!("{}", classification.token());

    if args.strict && classification == Classification::Indeterminate {
        return Ok(2);
    }
    Ok(0)
}

fn cmd_curves(args: &CurvesArgs) -> Result<i32, CliError> {
    let data = load_dataset(&args.dataset)?;
    let out_dir = &args.dataset.out_dir;
    fs::create_dir_all(out_dir)?;

    let curve = pairwise_nmi(&data.set, &data.pairwise)?;
    fs::write(out_dir.join("spatial_curve.csv"), spatial_curve_csv(&curve))?;
    let fit = fit_exp_decay(&curve, None)?;
    fs::write(
        out_dir.join("spatial_fit.json"),
        criterion::to_json_12sig(&fit),
    )?;

    // fitted curve sampled for plotting
    let d_max = curve.points.last().map(|p| p.distance_km).unwrap_or(1.0);
    let mut fit_csv = String::from("distance_km,nmi\n");
    for i in 0..200 {
        let d = d_max * i as f64 / 199.0;
        let _ = writeln!(fit_csv, "{},{}", d, fit.evaluate(d));
    }
    fs::write(out_dir.join("fit_curve.csv"), fit_csv)?;

    let curves = auto_mi_curves(&data.set, &data.temporal)?;
    write_temporal_curves(out_dir, &curves)?;

    println!(
        "wrote spatial_curve.csv ({} points), fit_curve.csv, spatial_fit.json, and {} temporal curve file(s) to {}",
        curve.points.len(),
        curves.len(),
        out_dir.display()
    );
    Ok(0)
}

fn cmd_synth(args: &SynthArgs) -> Result<i32, CliError> {
    let seed = resolve_seed(args.seed);
    let set = if args.temporal {
        let series = gen_temporal_series(&TemporalGenSpec {
            n_days: args.days,
            diurnal_peak: args.peak,
            sunrise_hour: args.sunrise,
            sunset_hour: args.sunset,
            ar_phi: args.ar_phi,
            noise_sigma: args.noise_sigma,
            seed,
        })?;
        single_pixel_set(series)?
    } else {
        let spatial = args
            .spatial
            .as_deref()
            .ok_or_else(|| CliError::config("--spatial <nx>x<ny> is required unless --temporal"))?;
        let (nx, ny) = spatial
            .split_once('x')
            .and_then(|(a, b)| Some((a.parse::<usize>().ok()?, b.parse::<usize>().ok()?)))
            .ok_or_else(|| {
                CliError::config(format!("--spatial expects <nx>x<ny>, got '{spatial}'"))
            })?;
        let spec = SpatialGenSpec {
            nx,
            ny,
            spacing_km: args.spacing,
            corr_length_km: args.corr_length,
            n_steps: args.steps,
            seed,
        };
        if args.diurnal {
            gen_diurnal_field(
                &spec,
                &DiurnalSpec {
                    diurnal_peak: args.peak,
                    sunrise_hour: args.sunrise,
                    sunset_hour: args.sunset,
                    ar_phi: args.ar_phi,
                },
            )?
        } else {
            gen_spatial_field(&spec)?
        }
    };

    fs::create_dir_all(&args.out_dir)?;
    let geometry_csv = gridseries::geometry_to_csv(&set.geometry);
    let series_csv = gridseries::series_to_csv(&set);
    let geometry_path = args.out_dir.join("geometry.csv");
    let series_path = args.out_dir.join("series.csv");
    fs::write(&geometry_path, &geometry_csv)?;
    fs::write(&series_path, &series_csv)?;

    let mut hasher = Sha256::new();
    hasher.update(geometry_csv.as_bytes());
    hasher.update(series_csv.as_bytes());
    println!(
        "wrote {} and {} ({} pixels x {} steps)",
        geometry_path.display(),
        series_path.display(),
        set.n_pixels(),
        set.n_steps()
    );
    println!("dataset sha256 {}", hex::encode(hasher.finalize()));
    Ok(0)
}

fn cmd_validate(args: &ValidateArgs) -> Result<i32, CliError> {
    let est = gridseries::load_single_series(&args.estimate)?;
    let meas = gridseries::load_single_series(&args.measured)?;

    // inner join on timestamps
    let meas_map: std::collections::BTreeMap<_, _> = meas.into_iter().collect();
    let mut est_vals = Vec::new();
    let mut meas_vals = Vec::new();
    for (ts, e) in est {
        if let Some(&m) = meas_map.get(&ts) {
            est_vals.push(e);
            meas_vals.push(m);
        }
    }
    if est_vals.is_empty() {
        return Err(CliError::data(
            "estimate and measurement share no timestamps",
        ));
    }
    let scores = validation_scores(&est_vals, &meas_vals)?;

    fs::create_dir_all(&args.out_dir)?;
    fs::write(
        args.out_dir.join("validation.json"),
        criterion::to_json_12sig(&scores),
    )?;
    println!("n: {}", scores.n);
    println!("nMBE: {}%", criterion::format_sig(scores.nmbe_pct, 6));
    println!("nRMSE: {}%", criterion::format_sig(scores.nrmse_pct, 6));
    Ok(0)
}
