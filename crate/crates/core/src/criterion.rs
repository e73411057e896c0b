//! The delta/tau ratio, its classification against configurable thresholds,
//! satellite-versus-ground validation metrics, and assembly of the analysis
//! report.
//!
//! Report serialization is deterministic: stable field order and every float
//! rendered at 12 significant digits, so identical inputs give identical
//! bytes.

use serde::Serialize;
use thiserror::Error;

use crate::spatial::{DeltaResult, ExpDecayFit};
use crate::temporal::TauStats;

#[derive(Debug, Error)]
pub enum CriterionError {
    #[error("chi needs strictly positive inputs: delta_pixels={delta}, tau_eff={tau}")]
    NonPositiveInput { delta: f64, tau: f64 },
    #[error("measurement mean must be positive")]
    ZeroMeasurementMean,
    #[error("no sample pairs remain after pairwise deletion")]
    EmptyAfterDeletion,
    #[error("report is missing a component: {0}")]
    MissingComponent(String),
    #[error("invalid thresholds: need 0 < low <= high, got [{low}, {high}]")]
    InvalidThresholds { low: f64, high: f64 },
}

/// Decision band around chi = 1. Inside the band the tool declines to decide.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiThresholds {
    pub low: f64,
    pub high: f64,
}

impl Default for ChiThresholds {
    fn default() -> Self {
        Self {
            low: 0.9,
            high: 1.1,
        }
    }
}

impl ChiThresholds {
    pub fn new(low: f64, high: f64) -> Result<Self, CriterionError> {
        if !(low > 0.0 && low <= high) {
            return Err(CriterionError::InvalidThresholds { low, high });
        }
        Ok(Self { low, high })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Stochastic,
    Nwp,
    Indeterminate,
}

impl Classification {
    /// The machine-readable token the CLI prints on its last stdout line.
    pub fn token(&self) -> &'static str {
        match self {
            Classification::Stochastic => "STOCHASTIC",
            Classification::Nwp => "NWP",
            Classification::Indeterminate => "INDETERMINATE",
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Classification::Stochastic => "stochastic",
            Classification::Nwp => "nwp",
            Classification::Indeterminate => "indeterminate",
        }
    }
}

/// chi = delta / tau_eff, in pixel·time_lag^-1, at full precision.
pub fn chi(delta_pixels: f64, tau_eff: f64) -> Result<f64, CriterionError> {
    if !(delta_pixels > 0.0) || !(tau_eff > 0.0) {
        return Err(CriterionError::NonPositiveInput {
            delta: delta_pixels,
            tau: tau_eff,
        });
    }
    Ok(delta_pixels / tau_eff)
}

/// chi recomputed with tau_eff first rounded to one decimal place. Kept for
/// the report's compatibility note; the primary value never rounds.
pub fn chi_with_rounded_tau(delta_pixels: f64, tau_eff: f64) -> Result<(f64, f64), CriterionError> {
    let rounded = (tau_eff * 10.0).round() / 10.0;
    let value = chi(delta_pixels, rounded)?;
    Ok((rounded, value))
}

pub fn classify(chi: f64, t: &ChiThresholds) -> Classification {
    if chi < t.low {
        Classification::Stochastic
    } else if chi > t.high {
        Classification::Nwp
    } else {
        Classification::Indeterminate
    }
}

fn paired(est: &[f64], meas: &[f64]) -> Result<Vec<(f64, f64)>, CriterionError> {
    let pairs: Vec<(f64, f64)> = est
        .iter()
        .zip(meas)
        .filter(|(e, m)| !e.is_nan() && !m.is_nan())
        .map(|(&e, &m)| (e, m))
        .collect();
    if pairs.is_empty() {
        return Err(CriterionError::EmptyAfterDeletion);
    }
    Ok(pairs)
}

/// Normalized mean bias error in percent: 100·Σ(est-meas)/Σmeas.
pub fn nmbe(est: &[f64], meas: &[f64]) -> Result<f64, CriterionError> {
    let pairs = paired(est, meas)?;
    let sum_meas: f64 = pairs.iter().map(|(_, m)| m).sum();
    if !(sum_meas > 0.0) {
        return Err(CriterionError::ZeroMeasurementMean);
    }
    let sum_diff: f64 = pairs.iter().map(|(e, m)| e - m).sum();
    Ok(100.0 * sum_diff / sum_meas)
}

/// Normalized root mean square error in percent:
/// 100·sqrt(mean((est-meas)^2))/mean(meas).
pub fn nrmse(est: &[f64], meas: &[f64]) -> Result<f64, CriterionError> {
    let pairs = paired(est, meas)?;
    let n = pairs.len() as f64;
    let mean_meas: f64 = pairs.iter().map(|(_, m)| m).sum::<f64>() / n;
    if !(mean_meas > 0.0) {
        return Err(CriterionError::ZeroMeasurementMean);
    }
    let mse: f64 = pairs.iter().map(|(e, m)| (e - m) * (e - m)).sum::<f64>() / n;
    Ok(100.0 * mse.sqrt() / mean_meas)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationScores {
    pub nmbe_pct: f64,
    pub nrmse_pct: f64,
    pub n: usize,
}

pub fn validation_scores(est: &[f64], meas: &[f64]) -> Result<ValidationScores, CriterionError> {
    let n = paired(est, meas)?.len();
    Ok(ValidationScores {
        nmbe_pct: nmbe(est, meas)?,
        nrmse_pct: nrmse(est, meas)?,
        n,
    })
}

// ---------------------------------------------------------------------------
// Analysis report
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetInfo {
    pub hash: String,
    pub n_pixels: usize,
    pub n_steps: usize,
    pub grid_spacing_km: f64,
}

/// Echo of every configuration knob that shaped the numbers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigEcho {
    pub binning: String,
    pub horizon_steps: u32,
    pub day_filter: Option<String>,
    pub utc_offset_hours: i32,
    pub distance_mode: String,
    pub sampling: String,
    pub sample_floor: usize,
    pub tau_policy: String,
    pub tau_tol: f64,
    pub max_lag: usize,
    pub thresholds: ChiThresholds,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaSection {
    pub km: f64,
    pub pixels: f64,
    pub fit: ExpDecayFit,
    pub curve_path: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TauSection {
    pub median: f64,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub std: f64,
    pub n_pixels: usize,
    pub n_no_minimum: usize,
    pub per_pixel_path: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChiSection {
    pub value: f64,
    pub tau_eff: f64,
    pub units: String,
    pub classification: String,
    pub thresholds: ChiThresholds,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub dataset: DatasetInfo,
    pub config: ConfigEcho,
    pub delta: DeltaSection,
    pub tau: TauSection,
    pub chi: ChiSection,
    pub notes: Vec<String>,
}

pub struct ReportInputs<'a> {
    pub dataset: DatasetInfo,
    pub config: ConfigEcho,
    pub delta: &'a DeltaResult,
    pub fit: &'a ExpDecayFit,
    pub tau_stats: &'a TauStats,
    pub horizon_steps: u32,
    pub curve_path: String,
    pub per_pixel_path: String,
}

/// Assemble the full report. Re-running on identical inputs yields identical
/// bytes from [`AnalysisReport::to_json`].
pub fn build_report(inputs: ReportInputs<'_>) -> Result<AnalysisReport, CriterionError> {
    if inputs.tau_stats.per_pixel.is_empty() {
        return Err(CriterionError::MissingComponent(
            "tau statistics cover no pixel".into(),
        ));
    }
    if !inputs.fit.converged {
        return Err(CriterionError::MissingComponent(
            "spatial fit did not converge".into(),
        ));
    }
    if inputs.horizon_steps == 0 {
        return Err(CriterionError::MissingComponent(
            "horizon_steps >= 1".into(),
        ));
    }
    let tau_median = inputs.tau_stats.median;
    let tau_eff = tau_median / inputs.horizon_steps as f64;
    let chi_value = chi(inputs.delta.delta_pixels, tau_eff)?;
    let thresholds = inputs.config.thresholds;
    let classification = classify(chi_value, &thresholds);

    let mut notes = vec![inputs.delta.method_note.clone()];
    if inputs.horizon_steps > 1 {
        let (rounded_tau, rounded_chi) = chi_with_rounded_tau(inputs.delta.delta_pixels, tau_eff)?;
        notes.push(format!(
            "rounded-intermediate convention: tau_eff rounded to 1 decimal ({}) gives chi = {}",
            format_sig(rounded_tau, 3),
            format_sig(rounded_chi, 3)
        ));
    }
    if inputs.tau_stats.n_no_minimum > 0 {
        notes.push(format!(
            "{} pixel(s) showed no auto-MI minimum before the maximum lag and were excluded",
            inputs.tau_stats.n_no_minimum
        ));
    }

    Ok(AnalysisReport {
        dataset: inputs.dataset,
        config: inputs.config,
        delta: DeltaSection {
            km: inputs.delta.delta_km,
            pixels: inputs.delta.delta_pixels,
            fit: *inputs.fit,
            curve_path: inputs.curve_path,
        },
        tau: TauSection {
            median: inputs.tau_stats.median,
            min: inputs.tau_stats.min,
            max: inputs.tau_stats.max,
            mean: inputs.tau_stats.mean,
            std: inputs.tau_stats.std,
            n_pixels: inputs.tau_stats.per_pixel.len(),
            n_no_minimum: inputs.tau_stats.n_no_minimum,
            per_pixel_path: inputs.per_pixel_path,
        },
        chi: ChiSection {
            value: chi_value,
            tau_eff,
            units: "pixel.time_lag^-1".to_string(),
            classification: classification.as_str().to_string(),
            thresholds,
        },
        notes,
    })
}

impl AnalysisReport {
    pub fn classification(&self) -> Classification {
        match self.chi.classification.as_str() {
            "stochastic" => Classification::Stochastic,
            "nwp" => Classification::Nwp,
            _ => Classification::Indeterminate,
        }
    }

    /// Deterministic pretty JSON with floats at 12 significant digits.
    pub fn to_json(&self) -> String {
        to_json_12sig(self)
    }
}

/// Serialize any value to pretty JSON with every f64 fixed to 12 significant
/// digits, so serialization is byte-stable and diff-friendly.
pub fn to_json_12sig<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SigFigFormatter::new());
    value
        .serialize(&mut ser)
        .expect("report serialization cannot fail");
    let mut s = String::from_utf8(out).expect("serializer emits UTF-8");
    s.push('\n');
    s
}

/// Round to `sig` significant digits and render without exponent for the
/// magnitudes a report actually contains.
pub fn format_sig(v: f64, sig: usize) -> String {
    if v == 0.0 {
        return "0.0".to_string();
    }
    if !v.is_finite() {
        return "null".to_string();
    }
    let formatted = format!("{:.*e}", sig - 1, v);
    let (mantissa, exp) = formatted
        .split_once('e')
        .expect("exponential format always contains e");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    if !(-5..=15).contains(&exp) {
        return formatted;
    }
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let point = exp + 1; // digits before the decimal point
    let mut s = String::new();
    if negative {
        s.push('-');
    }
    if point <= 0 {
        s.push_str("0.");
        for _ in 0..(-point) {
            s.push('0');
        }
        s.push_str(digits.trim_end_matches('0'));
        if s.ends_with('.') {
            s.push('0');
        }
    } else if (point as usize) >= digits.len() {
        s.push_str(&digits);
        for _ in 0..(point as usize - digits.len()) {
            s.push('0');
        }
        s.push_str(".0");
    } else {
        s.push_str(&digits[..point as usize]);
        let frac = digits[point as usize..].trim_end_matches('0');
        s.push('.');
        if frac.is_empty() {
            s.push('0');
        } else {
            s.push_str(frac);
        }
    }
    // "0.0" handles the all-zero-fraction case after trimming
    if s == "-0.0" {
        s = "0.0".to_string();
    }
    s
}

struct SigFigFormatter {
    pretty: serde_json::ser::PrettyFormatter<'static>,
}

impl SigFigFormatter {
    fn new() -> Self {
        Self {
            pretty: serde_json::ser::PrettyFormatter::new(),
        }
    }
}

impl serde_json::ser::Formatter for SigFigFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        writer.write_all(format_sig(value, 12).as_bytes())
    }

    // everything else delegates to the pretty formatter

    fn begin_array<W>(&mut self, w: &mut W) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        serde_json::ser::Formatter::begin_array(&mut self.pretty, w)
    }

    fn end_array<W>(&mut self, w: &mut W) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        serde_json::ser::Formatter::end_array(&mut self.pretty, w)
    }

    fn begin_array_value<W>(&mut self, w: &mut W, first: bool) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        serde_json::ser::Formatter::begin_array_value(&mut self.pretty, w, first)
    }

    fn end_array_value<W>(&mut self, w: &mut W) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        serde_json::ser::Formatter::end_array_value(&mut self.pretty, w)
    }

    fn begin_object<W>(&mut self, w: &mut W) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        serde_json::ser::Formatter::begin_object(&mut self.pretty, w)
    }

    fn end_object<W>(&mut self, w: &mut W) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        serde_json::ser::Formatter::end_object(&mut self.pretty, w)
    }

    fn begin_object_key<W>(&mut self, w: &mut W, first: bool) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        serde_json::ser::Formatter::begin_object_key(&mut self.pretty, w, first)
    }

    fn end_object_key<W>(&mut self, w: &mut W) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        serde_json::ser::Formatter::end_object_key(&mut self.pretty, w)
    }

    fn begin_object_value<W>(&mut self, w: &mut W) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        serde_json::ser::Formatter::begin_object_value(&mut self.pretty, w)
    }

    fn end_object_value<W>(&mut self, w: &mut W) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        serde_json::ser::Formatter::end_object_value(&mut self.pretty, w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::temporal::TauResult;
    use proptest::prelude::*;

    #[test]
    fn chi_of_one_pixel_over_seven_lags() {
        let v = chi(1.0, 7.0).unwrap();
        assert!((v - 1.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn chi_identity_when_delta_equals_tau() {
        assert_eq!(chi(3.7, 3.7).unwrap(), 1.0);
    }

    #[test]
    fn chi_full_precision_vs_rounded_intermediate() {
        let tau_eff = 7.0 / 12.0;
        let full = chi(1.0, tau_eff).unwrap();
        assert!((full - 12.0 / 7.0).abs() < 1e-12);
        let (rounded_tau, rounded) = chi_with_rounded_tau(1.0, tau_eff).unwrap();
        assert_eq!(rounded_tau, 0.6);
        assert!((rounded - 1.67).abs() < 0.005);
        assert!((full - rounded).abs() < 0.05);
    }

    #[test]
    fn chi_rejects_nonpositive() {
        assert!(matches!(
            chi(0.0, 1.0),
            Err(CriterionError::NonPositiveInput { .. })
        ));
        assert!(matches!(
            chi(1.0, -2.0),
            Err(CriterionError::NonPositiveInput { .. })
        ));
    }

    #[test]
    fn classify_decides_per_band() {
        let t = ChiThresholds::default();
        assert_eq!(classify(0.143, &t), Classification::Stochastic);
        assert_eq!(classify(1.71, &t), Classification::Nwp);
        assert_eq!(classify(1.0, &t), Classification::Indeterminate);
    }

    #[test]
    fn thresholds_must_be_ordered_and_positive() {
        assert!(ChiThresholds::new(1.2, 0.8).is_err());
        assert!(ChiThresholds::new(0.0, 1.0).is_err());
        assert!(ChiThresholds::new(1.0, 1.0).is_ok());
    }

    #[test]
    fn nmbe_zero_for_identical_series() {
        let m = vec![3.0, 5.0, 7.0];
        assert_eq!(nmbe(&m, &m).unwrap(), 0.0);
    }

    #[test]
    fn nmbe_linear_scaling() {
        let meas = vec![10.0, 20.0, 30.0];
        let est: Vec<f64> = meas.iter().map(|m| m * 1.10).collect();
        assert!((nmbe(&est, &meas).unwrap() - 10.0).abs() < 1e-9);
        let est: Vec<f64> = meas.iter().map(|m| m * 0.95).collect();
        assert!((nmbe(&est, &meas).unwrap() + 5.0).abs() < 1e-9);
    }

    #[test]
    fn nrmse_constant_offset() {
        let meas = vec![10.0; 50];
        let est = vec![12.0; 50];
        assert!((nrmse(&est, &meas).unwrap() - 20.0).abs() < 1e-9);
        assert_eq!(nrmse(&meas, &meas).unwrap(), 0.0);
    }

    #[test]
    fn nrmse_of_seeded_perturbation_matches_closed_form() {
        use rand::SeedableRng;
        use rand_distr::{Distribution, StandardNormal};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
        let sigma = 5.0;
        let mean = 100.0;
        let meas = vec![mean; 200_000];
        let est: Vec<f64> = meas
            .iter()
            .map(|m| {
                let z: f64 = StandardNormal.sample(&mut rng);
                m + sigma * z
            })
            .collect();
        let expected = 100.0 * sigma / mean;
        let got = nrmse(&est, &meas).unwrap();
        assert!((got - expected).abs() < 0.1, "nrmse {got} vs {expected}");
    }

    #[test]
    fn metrics_reject_zero_mean_and_empty() {
        assert!(matches!(
            nmbe(&[1.0], &[0.0]),
            Err(CriterionError::ZeroMeasurementMean)
        ));
        let nan = f64::NAN;
        assert!(matches!(
            nrmse(&[nan], &[1.0]),
            Err(CriterionError::EmptyAfterDeletion)
        ));
    }

    #[test]
    fn metrics_vanish_iff_series_identical() {
        let meas = vec![5.0, 6.0, 7.0, 8.0];
        let mut est = meas.clone();
        assert_eq!(nrmse(&est, &meas).unwrap(), 0.0);
        est[2] += 1e-3;
        assert!(nrmse(&est, &meas).unwrap() > 1e-12);
        assert!(nmbe(&est, &meas).unwrap().abs() > 1e-12);
    }

    fn sample_inputs() -> (DeltaResult, ExpDecayFit, TauStats) {
        let delta = DeltaResult {
            delta_km: 2.5,
            delta_pixels: 1.0,
            method_note: "tangent/asymptote intersection at d = b".into(),
        };
        let fit = ExpDecayFit {
            a: 0.10,
            b: 2.5,
            c: 0.0085,
            rss: 1.2e-5,
            iterations: 14,
            converged: true,
        };
        let taus = TauStats::from_results(
            vec![
                TauResult {
                    pixel_id: 0,
                    plateau_start: 7,
                    plateau_end: 7,
                    tau: 7.0,
                },
                TauResult {
                    pixel_id: 1,
                    plateau_start: 6,
                    plateau_end: 8,
                    tau: 8.0,
                },
                TauResult {
                    pixel_id: 2,
                    plateau_start: 7,
                    plateau_end: 7,
                    tau: 7.0,
                },
            ],
            1,
        )
        .unwrap();
        (delta, fit, taus)
    }

    fn sample_config() -> ConfigEcho {
        ConfigEcho {
            binning: "sturges".into(),
            horizon_steps: 12,
            day_filter: Some("8:19".into()),
            utc_offset_hours: 1,
            distance_mode: "haversine".into(),
            sampling: "all".into(),
            sample_floor: 100,
            tau_policy: "plateau-end".into(),
            tau_tol: 0.005,
            max_lag: 24,
            thresholds: ChiThresholds::default(),
            seed: Some(42),
        }
    }

    fn sample_report() -> AnalysisReport {
        let (delta, fit, taus) = sample_inputs();
        build_report(ReportInputs {
            dataset: DatasetInfo {
                hash: "abc123".into(),
                n_pixels: 3,
                n_steps: 700,
                grid_spacing_km: 2.5,
            },
            config: sample_config(),
            delta: &delta,
            fit: &fit,
            tau_stats: &taus,
            horizon_steps: 12,
            curve_path: "spatial_curve.csv".into(),
            per_pixel_path: "tau_per_pixel.csv".into(),
        })
        .unwrap()
    }

    #[test]
    fn report_serialization_is_byte_identical() {
        let a = sample_report().to_json();
        let b = sample_report().to_json();
        assert_eq!(a, b);
        assert!(a.ends_with('\n'));
    }

    #[test]
    fn report_schema_keys_are_stable() {
        let json = sample_report().to_json();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        for pointer in [
            "/dataset/hash",
            "/dataset/n_pixels",
            "/config/horizon_steps",
            "/delta/km",
            "/delta/pixels",
            "/delta/fit/a",
            "/delta/fit/converged",
            "/tau/median",
            "/tau/min",
            "/tau/max",
            "/tau/mean",
            "/tau/std",
            "/tau/per_pixel_path",
            "/chi/value",
            "/chi/units",
            "/chi/classification",
            "/chi/thresholds/low",
            "/notes",
        ] {
            assert!(v.pointer(pointer).is_some(), "missing {pointer}");
        }
        assert_eq!(
            v.pointer("/chi/units").unwrap().as_str().unwrap(),
            "pixel.time_lag^-1"
        );
    }

    #[test]
    fn report_rejects_empty_tau() {
        let (delta, fit, _) = sample_inputs();
        let empty = TauStats {
            per_pixel: vec![],
            median: 0.0,
            min: 0.0,
            max: 0.0,
            mean: 0.0,
            std: 0.0,
            n_no_minimum: 5,
        };
        let err = build_report(ReportInputs {
            dataset: DatasetInfo {
                hash: "x".into(),
                n_pixels: 5,
                n_steps: 10,
                grid_spacing_km: 2.5,
            },
            config: sample_config(),
            delta: &delta,
            fit: &fit,
            tau_stats: &empty,
            horizon_steps: 1,
            curve_path: "c".into(),
            per_pixel_path: "p".into(),
        });
        assert!(matches!(err, Err(CriterionError::MissingComponent(_))));
    }

    #[test]
    fn headline_reversal_between_horizons() {
        // delta = 1 pixel, tau = 7 steps: a 1-step horizon favors the
        // stochastic route, a 12-step horizon reverses the call
        let t = ChiThresholds::default();
        let h1 = chi(1.0, 7.0 / 1.0).unwrap();
        assert_eq!(classify(h1, &t), Classification::Stochastic);
        let h12 = chi(1.0, 7.0 / 12.0).unwrap();
        assert_eq!(classify(h12, &t), Classification::Nwp);
    }

    #[test]
    fn format_sig_renders_plain_decimals() {
        assert_eq!(format_sig(0.0, 12), "0.0");
        assert_eq!(format_sig(2.5, 12), "2.5");
        assert_eq!(format_sig(1.0 / 7.0, 12), "0.142857142857");
        assert_eq!(format_sig(12.0 / 7.0, 12), "1.71428571429");
        assert_eq!(format_sig(-144.0, 12), "-144.0");
        assert_eq!(format_sig(0.6, 3), "0.6");
        assert_eq!(format_sig(1e20, 12), "1.00000000000e20");
    }

    proptest! {
        #[test]
        fn prop_chi_scales_linearly_in_delta(delta in 1e-6..1e6f64, tau in 1e-6..1e6f64, k in 1e-3..1e3f64) {
            let base = chi(delta, tau).unwrap();
            let scaled = chi(k * delta, tau).unwrap();
            prop_assert!((scaled - k * base).abs() <= 1e-9 * scaled.abs().max(1.0));
            let tau_scaled = chi(delta, k * tau).unwrap();
            prop_assert!((tau_scaled - base / k).abs() <= 1e-9 * tau_scaled.abs().max(1.0));
        }

        #[test]
        fn prop_classification_monotone_in_chi(a in 1e-6..1e3f64, b in 1e-6..1e3f64) {
            let t = ChiThresholds::default();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let rank = |c: Classification| match c {
                Classification::Stochastic => 0,
                Classification::Indeterminate => 1,
                Classification::Nwp => 2,
            };
            prop_assert!(rank(classify(lo, &t)) <= rank(classify(hi, &t)));
        }

        #[test]
        fn prop_format_sig_roundtrips_close(v in -1e12..1e12f64) {
            let s = format_sig(v, 12);
            let parsed: f64 = s.parse().unwrap();
            let tol = v.abs().max(1e-300) * 1e-10;
            prop_assert!((parsed - v).abs() <= tol, "{v} -> {s} -> {parsed}");
        }
    }
}
