//! C ABI over the chicrit library: opaque dataset handles, status codes, and
//! a JSON report string, so other languages can bind without knowing any Rust
//! types. Every entry point is panic-safe; failures return a status code and
//! leave a detail message readable through [`chi_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use sha2::{Digest, Sha256};

use chicrit::criterion::{
    build_report, chi as chi_ratio, classify, ChiThresholds, Classification, ConfigEcho,
    CriterionError, DatasetInfo, ReportInputs,
};
use chicrit::gridseries::{
    filter_day_hours, load_grid_with_spacing, load_series, DayFilterWindow, DistanceMode,
    GridError, GridSeriesSet,
};
use chicrit::infotheory::{normalized_mi, BinningRule, BinningSpec, InfoError, RangePolicy};
use chicrit::spatial::{
    extract_delta, fit_exp_decay, pairwise_nmi, PairSampling, PairwiseConfig, SpatialError,
    SpatialMICurve, SpatialPoint,
};
use chicrit::synth::analytic_gaussian_mi;
use chicrit::temporal::{effective_tau, tau_statistics, TauPolicy, TemporalConfig, TemporalError};

/// Status code returned by every fallible entry point.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ChiStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    IoError = 3,
    ParseError = 4,
    DataError = 5,
    FitError = 6,
    Panic = 7,
}

/// Which plateau bound of the auto-MI first minimum becomes tau.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ChiTauPolicy {
    PlateauStart = 0,
    PlateauEnd = 1,
    PlateauMid = 2,
}

/// Pixel separation computation.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ChiDistanceMode {
    Haversine = 0,
    Planar = 1,
}

/// Recommendation decoded from the chi value.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ChiClassification {
    Stochastic = 0,
    Nwp = 1,
    Indeterminate = 2,
    ClassifyError = -1,
}

/// Knobs of [`chi_dataset_analyze`]. Obtain defaults from
/// [`chi_analyze_options_default`] and override fields as needed.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct ChiAnalyzeOptions {
    /// Forecast horizon in time steps; tau is divided by it.
    pub horizon_steps: u32,
    /// Classification band: below low is stochastic, above high is NWP.
    pub chi_low: f64,
    pub chi_high: f64,
    /// Histogram bins: 0 = Sturges rule, 1 = Freedman-Diaconis, n >= 2 = fixed n.
    pub bins: u32,
    /// Maximum auto-MI lag in time steps.
    pub max_lag: u32,
    /// Minimum-detection tolerance in bits.
    pub tau_tol: f64,
    pub tau_policy: ChiTauPolicy,
    pub distance_mode: ChiDistanceMode,
    /// Minimum co-present samples per pixel pair and per lag.
    pub sample_floor: u32,
    /// Pixel pairs to sample (0 = all pairs).
    pub sampling_m: u64,
    /// Seed for pair subsampling.
    pub seed: u64,
}

/// Mutual information estimate plus its surrounding entropies, in bits.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct ChiMiResult {
    pub mi_bits: f64,
    pub h_x_bits: f64,
    pub h_y_bits: f64,
    pub h_x_given_y_bits: f64,
    /// MI / H(X), in [0, 1].
    pub nmi: f64,
    pub n_used: u64,
    pub n_dropped: u64,
}

/// Parameters of the fitted a*exp(-d/b) + c decay.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct ChiExpDecayFit {
    pub a: f64,
    /// Decay length; equals the extracted decorrelation distance.
    pub b: f64,
    pub c: f64,
    pub rss: f64,
    pub iterations: u64,
    /// Nonzero when the fit converged.
    pub converged: i32,
}

/// Opaque handle over a loaded geometry + series dataset.
pub struct ChiDataset {
    set: GridSeriesSet,
    hash: String,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(status: ChiStatus, msg: &str) -> ChiStatus {
    let sanitized: String = msg.chars().filter(|&c| c != '\0').collect();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap();
    });
    status
}

fn grid_status(e: &GridError) -> ChiStatus {
    match e {
        GridError::Io(_) => ChiStatus::IoError,
        GridError::Csv(c) => {
            if matches!(c.kind(), csv::ErrorKind::Io(_)) {
                ChiStatus::IoError
            } else {
                ChiStatus::ParseError
            }
        }
        GridError::Parse { .. } => ChiStatus::ParseError,
        GridError::InvalidHourRange { .. } | GridError::SpacingUnknown(_) => {
            ChiStatus::InvalidArgument
        }
        _ => ChiStatus::DataError,
    }
}

fn info_status(e: &InfoError) -> ChiStatus {
    match e {
        InfoError::InvalidBinSpec(_) => ChiStatus::InvalidArgument,
        _ => ChiStatus::DataError,
    }
}

fn spatial_status(e: &SpatialError) -> ChiStatus {
    match e {
        SpatialError::Grid(g) => grid_status(g),
        SpatialError::Info(i) => info_status(i),
        SpatialError::FitDiverged { .. }
        | SpatialError::DegenerateCurve(_)
        | SpatialError::UnconvergedFit => ChiStatus::FitError,
        _ => ChiStatus::DataError,
    }
}

fn temporal_status(e: &TemporalError) -> ChiStatus {
    match e {
        TemporalError::Info(i) => info_status(i),
        _ => ChiStatus::DataError,
    }
}

fn criterion_status(e: &CriterionError) -> ChiStatus {
    match e {
        CriterionError::InvalidThresholds { .. } => ChiStatus::InvalidArgument,
        _ => ChiStatus::DataError,
    }
}

fn guarded(f: impl FnOnce() -> ChiStatus) -> ChiStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => set_error(ChiStatus::Panic, "internal panic"),
    }
}

unsafe fn path_from<'a>(ptr: *const c_char) -> Result<&'a Path, ChiStatus> {
    if ptr.is_null() {
        return Err(ChiStatus::NullPointer);
    }
    match CStr::from_ptr(ptr).to_str() {
        Ok(s) => Ok(Path::new(s)),
        Err(_) => Err(ChiStatus::InvalidArgument),
    }
}

unsafe fn slice_from<'a>(ptr: *const f64, len: usize) -> Result<&'a [f64], ChiStatus> {
    if ptr.is_null() {
        return Err(ChiStatus::NullPointer);
    }
    if len == 0 {
        return Err(ChiStatus::InvalidArgument);
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

fn binning_from(bins: u32) -> BinningSpec {
    let rule = match bins {
        0 => BinningRule::Sturges,
        1 => BinningRule::FreedmanDiaconis,
        n => BinningRule::FixedCount(n as usize),
    };
    BinningSpec {
        rule,
        range_policy: RangePolicy::DataMinMax,
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn chi_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Detail message of the most recent failure on this thread. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn chi_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Load a geometry CSV and a series CSV into a dataset handle.
/// `spacing_km <= 0` infers the grid spacing from the minimum pair distance.
/// The handle must be released with [`chi_dataset_free`].
///
/// # Safety
/// `geometry_path` and `series_path` must be NUL-terminated strings and
/// `out_dataset` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn chi_dataset_load(
    geometry_path: *const c_char,
    series_path: *const c_char,
    spacing_km: f64,
    out_dataset: *mut *mut ChiDataset,
) -> ChiStatus {
    guarded(|| {
        if out_dataset.is_null() {
            return set_error(ChiStatus::NullPointer, "out_dataset is null");
        }
        let geometry_path = match path_from(geometry_path) {
            Ok(p) => p,
            Err(s) => return set_error(s, "geometry_path is not a valid string"),
        };
        let series_path = match path_from(series_path) {
            Ok(p) => p,
            Err(s) => return set_error(s, "series_path is not a valid string"),
        };
        let geometry_bytes = match std::fs::read(geometry_path) {
            Ok(b) => b,
            Err(e) => return set_error(ChiStatus::IoError, &e.to_string()),
        };
        let series_bytes = match std::fs::read(series_path) {
            Ok(b) => b,
            Err(e) => return set_error(ChiStatus::IoError, &e.to_string()),
        };
        let mut hasher = Sha256::new();
        hasher.update(&geometry_bytes);
        hasher.update(&series_bytes);
        let hash = hex::encode(hasher.finalize());

        let spacing = if spacing_km > 0.0 {
            Some(spacing_km)
        } else {
            None
        };
        let geometry = match load_grid_with_spacing(geometry_path, spacing) {
            Ok(g) => g,
            Err(e) => return set_error(grid_status(&e), &e.to_string()),
        };
        let set = match load_series(series_path, &geometry) {
            Ok(s) => s,
            Err(e) => return set_error(grid_status(&e), &e.to_string()),
        };
        *out_dataset = Box::into_raw(Box::new(ChiDataset { set, hash }));
        ChiStatus::Ok
    })
}

/// Release a dataset handle. Accepts null.
///
/// # Safety
/// `dataset` must be null or a pointer obtained from this library.
#[no_mangle]
pub unsafe extern "C" fn chi_dataset_free(dataset: *mut ChiDataset) {
    if !dataset.is_null() {
        drop(Box::from_raw(dataset));
    }
}

/// Number of pixels carrying a series; 0 for a null handle.
///
/// # Safety
/// `dataset` must be null or a valid handle.
#[no_mangle]
pub unsafe extern "C" fn chi_dataset_pixel_count(dataset: *const ChiDataset) -> usize {
    dataset.as_ref().map_or(0, |d| d.set.n_pixels())
}

/// Number of time steps on the shared axis; 0 for a null handle.
///
/// # Safety
/// `dataset` must be null or a valid handle.
#[no_mangle]
pub unsafe extern "C" fn chi_dataset_step_count(dataset: *const ChiDataset) -> usize {
    dataset.as_ref().map_or(0, |d| d.set.n_steps())
}

/// Produce a new handle holding only samples whose local hour lies in the
/// inclusive [start_hour, end_hour] window.
///
/// # Safety
/// `dataset` and `out_dataset` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn chi_dataset_filter_day_hours(
    dataset: *const ChiDataset,
    start_hour: u8,
    end_hour: u8,
    utc_offset_hours: i32,
    out_dataset: *mut *mut ChiDataset,
) -> ChiStatus {
    guarded(|| {
        let Some(d) = dataset.as_ref() else {
            return set_error(ChiStatus::NullPointer, "dataset is null");
        };
        if out_dataset.is_null() {
            return set_error(ChiStatus::NullPointer, "out_dataset is null");
        }
        match filter_day_hours(
            &d.set,
            DayFilterWindow {
                start_hour,
                end_hour,
                utc_offset_hours,
            },
        ) {
            Ok(set) => {
                *out_dataset = Box::into_raw(Box::new(ChiDataset {
                    set,
                    hash: d.hash.clone(),
                }));
                ChiStatus::Ok
            }
            Err(e) => set_error(grid_status(&e), &e.to_string()),
        }
    })
}

/// Defaults: horizon 1, band [0.9, 1.1], Sturges bins, max lag 24,
/// tolerance 0.005 bits, plateau end, haversine distances, floor 100,
/// all pairs.
#[no_mangle]
pub extern "C" fn chi_analyze_options_default() -> ChiAnalyzeOptions {
    ChiAnalyzeOptions {
        horizon_steps: 1,
        chi_low: 0.9,
        chi_high: 1.1,
        bins: 0,
        max_lag: 24,
        tau_tol: 0.005,
        tau_policy: ChiTauPolicy::PlateauEnd,
        distance_mode: ChiDistanceMode::Haversine,
        sample_floor: 100,
        sampling_m: 0,
        seed: 0,
    }
}

/// Run the full analysis and hand back the report as a JSON string, to be
/// released with [`chi_string_free`].
///
/// # Safety
/// All pointers must be valid; `options` may be null for defaults.
#[no_mangle]
pub unsafe extern "C" fn chi_dataset_analyze(
    dataset: *const ChiDataset,
    options: *const ChiAnalyzeOptions,
    out_report_json: *mut *mut c_char,
) -> ChiStatus {
    guarded(|| {
        let Some(d) = dataset.as_ref() else {
            return set_error(ChiStatus::NullPointer, "dataset is null");
        };
        if out_report_json.is_null() {
            return set_error(ChiStatus::NullPointer, "out_report_json is null");
        }
        let opts = options
            .as_ref()
            .copied()
            .unwrap_or_else(|| chi_analyze_options_default());
        if opts.horizon_steps == 0 {
            return set_error(ChiStatus::InvalidArgument, "horizon_steps must be >= 1");
        }
        let thresholds = match ChiThresholds::new(opts.chi_low, opts.chi_high) {
            Ok(t) => t,
            Err(e) => return set_error(criterion_status(&e), &e.to_string()),
        };
        let binning = binning_from(opts.bins);
        let sampling = if opts.sampling_m == 0 {
            PairSampling::AllPairs
        } else {
            PairSampling::RandomPairs {
                m: opts.sampling_m as usize,
                seed: opts.seed,
            }
        };
        let pairwise = PairwiseConfig {
            binning,
            sampling,
            distance_mode: match opts.distance_mode {
                ChiDistanceMode::Haversine => DistanceMode::Haversine,
                ChiDistanceMode::Planar => DistanceMode::Planar,
            },
            sample_floor: opts.sample_floor as usize,
            orientation_tol: 0.05,
        };
        let temporal = TemporalConfig {
            max_lag: opts.max_lag as usize,
            binning,
            tol: opts.tau_tol,
            policy: match opts.tau_policy {
                ChiTauPolicy::PlateauStart => TauPolicy::PlateauStart,
                ChiTauPolicy::PlateauEnd => TauPolicy::PlateauEnd,
                ChiTauPolicy::PlateauMid => TauPolicy::Midpoint,
            },
            sample_floor: opts.sample_floor as usize,
        };

        let curve = match pairwise_nmi(&d.set, &pairwise) {
            Ok(c) => c,
            Err(e) => return set_error(spatial_status(&e), &e.to_string()),
        };
        let fit = match fit_exp_decay(&curve, None) {
            Ok(f) => f,
            Err(e) => return set_error(spatial_status(&e), &e.to_string()),
        };
        let delta = match extract_delta(&fit, d.set.geometry.grid_spacing_km) {
            Ok(d) => d,
            Err(e) => return set_error(spatial_status(&e), &e.to_string()),
        };
        let stats = match tau_statistics(&d.set, &temporal) {
            Ok(s) => s,
            Err(e) => return set_error(temporal_status(&e), &e.to_string()),
        };
        let config = ConfigEcho {
            binning: match opts.bins {
                0 => "sturges".to_string(),
                1 => "fd".to_string(),
                n => format!("fixed:{n}"),
            },
            horizon_steps: opts.horizon_steps,
            day_filter: d
                .set
                .day_filter
                .map(|w| format!("{}:{}", w.start_hour, w.end_hour)),
            utc_offset_hours: d.set.day_filter.map_or(0, |w| w.utc_offset_hours),
            distance_mode: match opts.distance_mode {
                ChiDistanceMode::Haversine => "haversine".to_string(),
                ChiDistanceMode::Planar => "planar".to_string(),
            },
            sampling: if opts.sampling_m == 0 {
                "all".to_string()
            } else {
                format!("random:{}", opts.sampling_m)
            },
            sample_floor: opts.sample_floor as usize,
            tau_policy: match opts.tau_policy {
                ChiTauPolicy::PlateauStart => "plateau-start".to_string(),
                ChiTauPolicy::PlateauEnd => "plateau-end".to_string(),
                ChiTauPolicy::PlateauMid => "plateau-mid".to_string(),
            },
            tau_tol: opts.tau_tol,
            max_lag: opts.max_lag as usize,
            thresholds,
            seed: Some(opts.seed),
        };
        let report = match build_report(ReportInputs {
            dataset: DatasetInfo {
                hash: d.hash.clone(),
                n_pixels: d.set.n_pixels(),
                n_steps: d.set.n_steps(),
                grid_spacing_km: d.set.geometry.grid_spacing_km,
            },
            config,
            delta: &delta,
            fit: &fit,
            tau_stats: &stats,
            horizon_steps: opts.horizon_steps,
            curve_path: String::new(),
            per_pixel_path: String::new(),
        }) {
            Ok(r) => r,
            Err(e) => return set_error(criterion_status(&e), &e.to_string()),
        };
        let json = CString::new(report.to_json()).expect("JSON has no NUL bytes");
        *out_report_json = json.into_raw();
        ChiStatus::Ok
    })
}

/// Release a string returned by this library. Accepts null.
///
/// # Safety
/// `s` must be null or a pointer returned by this library.
#[no_mangle]
pub unsafe extern "C" fn chi_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Normalized mutual information between two equally long samples.
/// NaN entries are removed pairwise. `bins` follows the options convention.
///
/// # Safety
/// `x` and `y` must point to `len` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn chi_normalized_mi(
    x: *const f64,
    y: *const f64,
    len: usize,
    bins: u32,
    out: *mut ChiMiResult,
) -> ChiStatus {
    guarded(|| {
        if out.is_null() {
            return set_error(ChiStatus::NullPointer, "out is null");
        }
        let (x, y) = match (slice_from(x, len), slice_from(y, len)) {
            (Ok(x), Ok(y)) => (x, y),
            _ => return set_error(ChiStatus::NullPointer, "x/y must point to len doubles"),
        };
        match normalized_mi(x, y, &binning_from(bins)) {
            Ok(r) => {
                *out = ChiMiResult {
                    mi_bits: r.mi_bits,
                    h_x_bits: r.h_x_bits,
                    h_y_bits: r.h_y_bits,
                    h_x_given_y_bits: r.h_x_given_y_bits,
                    nmi: r.nmi,
                    n_used: r.n_used,
                    n_dropped: r.n_dropped,
                };
                ChiStatus::Ok
            }
            Err(e) => set_error(info_status(&e), &e.to_string()),
        }
    })
}

/// Closed-form Gaussian mutual information in bits for |rho| < 1.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn chi_analytic_gaussian_mi(rho: f64, out: *mut f64) -> ChiStatus {
    guarded(|| {
        if out.is_null() {
            return set_error(ChiStatus::NullPointer, "out is null");
        }
        match analytic_gaussian_mi(rho) {
            Ok(v) => {
                *out = v;
                ChiStatus::Ok
            }
            Err(e) => set_error(ChiStatus::InvalidArgument, &e.to_string()),
        }
    })
}

/// Weighted-equal least-squares fit of nmi = a*exp(-d/b) + c over the given
/// (distance, nmi) samples.
///
/// # Safety
/// `distances` and `nmi` must point to `len` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn chi_fit_exp_decay(
    distances: *const f64,
    nmi: *const f64,
    len: usize,
    out: *mut ChiExpDecayFit,
) -> ChiStatus {
    guarded(|| {
        if out.is_null() {
            return set_error(ChiStatus::NullPointer, "out is null");
        }
        let (d, y) = match (slice_from(distances, len), slice_from(nmi, len)) {
            (Ok(d), Ok(y)) => (d, y),
            _ => {
                return set_error(
                    ChiStatus::NullPointer,
                    "distances/nmi must point to len doubles",
                )
            }
        };
        let curve = SpatialMICurve::from_points(
            d.iter()
                .zip(y)
                .map(|(&distance_km, &nmi)| SpatialPoint {
                    distance_km,
                    nmi,
                    pair_count: 1,
                })
                .collect(),
        );
        match fit_exp_decay(&curve, None) {
            Ok(f) => {
                *out = ChiExpDecayFit {
                    a: f.a,
                    b: f.b,
                    c: f.c,
                    rss: f.rss,
                    iterations: f.iterations as u64,
                    converged: i32::from(f.converged),
                };
                ChiStatus::Ok
            }
            Err(e) => set_error(spatial_status(&e), &e.to_string()),
        }
    })
}

/// chi = delta_pixels / tau_eff; both inputs must be strictly positive.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn chi_value(delta_pixels: f64, tau_eff: f64, out: *mut f64) -> ChiStatus {
    guarded(|| {
        if out.is_null() {
            return set_error(ChiStatus::NullPointer, "out is null");
        }
        match chi_ratio(delta_pixels, tau_eff) {
            Ok(v) => {
                *out = v;
                ChiStatus::Ok
            }
            Err(e) => set_error(ChiStatus::InvalidArgument, &e.to_string()),
        }
    })
}

/// Classify a chi value against the [low, high] band.
#[no_mangle]
pub extern "C" fn chi_classify(chi: f64, low: f64, high: f64) -> ChiClassification {
    let Ok(thresholds) = ChiThresholds::new(low, high) else {
        return ChiClassification::ClassifyError;
    };
    if !(chi > 0.0) {
        return ChiClassification::ClassifyError;
    }
    match classify(chi, &thresholds) {
        Classification::Stochastic => ChiClassification::Stochastic,
        Classification::Nwp => ChiClassification::Nwp,
        Classification::Indeterminate => ChiClassification::Indeterminate,
    }
}

/// tau divided by the horizon length in steps.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn chi_effective_tau(
    tau: f64,
    horizon_steps: u32,
    out: *mut f64,
) -> ChiStatus {
    guarded(|| {
        if out.is_null() {
            return set_error(ChiStatus::NullPointer, "out is null");
        }
        match effective_tau(tau, horizon_steps) {
            Ok(v) => {
                *out = v;
                ChiStatus::Ok
            }
            Err(e) => set_error(ChiStatus::InvalidArgument, &e.to_string()),
        }
    })
}

/// Normalized mean bias error in percent; NaN pairs are deleted.
///
/// # Safety
/// `est` and `meas` must point to `len` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn chi_nmbe(
    est: *const f64,
    meas: *const f64,
    len: usize,
    out: *mut f64,
) -> ChiStatus {
    score(est, meas, len, out, chicrit::criterion::nmbe)
}

/// Normalized root mean square error in percent; NaN pairs are deleted.
///
/// # Safety
/// `est` and `meas` must point to `len` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn chi_nrmse(
    est: *const f64,
    meas: *const f64,
    len: usize,
    out: *mut f64,
) -> ChiStatus {
    score(est, meas, len, out, chicrit::criterion::nrmse)
}

unsafe fn score(
    est: *const f64,
    meas: *const f64,
    len: usize,
    out: *mut f64,
    f: fn(&[f64], &[f64]) -> Result<f64, CriterionError>,
) -> ChiStatus {
    guarded(|| {
        if out.is_null() {
            return set_error(ChiStatus::NullPointer, "out is null");
        }
        let (est, meas) = match (slice_from(est, len), slice_from(meas, len)) {
            (Ok(e), Ok(m)) => (e, m),
            _ => return set_error(ChiStatus::NullPointer, "est/meas must point to len doubles"),
        };
        match f(est, meas) {
            Ok(v) => {
                *out = v;
                ChiStatus::Ok
            }
            Err(e) => set_error(criterion_status(&e), &e.to_string()),
        }
    })
}
