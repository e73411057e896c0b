//! Seeded synthetic data generators and analytic oracles. Everything here is
//! a pure function of (spec, seed): identical inputs give bit-identical
//! output, so generated datasets double as regression fixtures.

use std::collections::BTreeMap;

use chrono::{DateTime, TimeDelta, Utc};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::gridseries::{GridGeometry, GridSeriesSet, IrradianceSeries, PixelMeta};

/// km per degree of great-circle arc at the mean Earth radius.
const KM_PER_DEGREE: f64 = 2.0 * std::f64::consts::PI * crate::gridseries::EARTH_RADIUS_KM / 360.0;

/// Anchor of synthetic grids in geographic space; planar offsets are mapped
/// to small lat/lon displacements around it so haversine distances work too.
const ANCHOR_LAT_DEG: f64 = 42.0;
const ANCHOR_LON_DEG: f64 = 9.0;

fn epoch() -> DateTime<Utc> {
    DateTime::parse_from_rfc3339("2020-01-01T00:00:00Z")
        .unwrap()
        .with_timezone(&Utc)
}

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("correlation must satisfy |rho| < 1, got {0}")]
    InvalidRho(f64),
    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),
    #[error("covariance is not positive definite even with jitter")]
    CovarianceNotPD,
    #[error(transparent)]
    Grid(#[from] crate::gridseries::GridError),
}

/// Closed-form mutual information of a bivariate Gaussian in bits:
/// -0.5·log2(1 - rho^2).
pub fn analytic_gaussian_mi(rho: f64) -> Result<f64, SynthError> {
    if !(rho.abs() < 1.0) {
        return Err(SynthError::InvalidRho(rho));
    }
    Ok(-0.5 * (1.0 - rho * rho).log2())
}

/// Draw n correlated standard-normal pairs via y = rho·x + sqrt(1-rho^2)·z.
pub fn gen_bivariate_gaussian(
    rho: f64,
    n: usize,
    seed: u64,
) -> Result<(Vec<f64>, Vec<f64>), SynthError> {
    if !(rho.abs() < 1.0) {
        return Err(SynthError::InvalidRho(rho));
    }
    if n < 2 {
        return Err(SynthError::InvalidSpec(format!("n must be >= 2, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cross = (1.0 - rho * rho).sqrt();
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let a: f64 = StandardNormal.sample(&mut rng);
        let b: f64 = StandardNormal.sample(&mut rng);
        x.push(a);
        y.push(rho * a + cross * b);
    }
    Ok((x, y))
}

/// Diurnal clear-sky-index generator: a half-sine envelope between sunrise
/// and sunset modulated by a clipped AR(1) index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemporalGenSpec {
    pub n_days: usize,
    pub diurnal_peak: f64,
    pub sunrise_hour: u8,
    pub sunset_hour: u8,
    pub ar_phi: f64,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Default for TemporalGenSpec {
    fn default() -> Self {
        Self {
            n_days: 60,
            diurnal_peak: 900.0,
            sunrise_hour: 6,
            sunset_hour: 18,
            ar_phi: 0.8,
            noise_sigma: 0.15,
            seed: 0,
        }
    }
}

impl TemporalGenSpec {
    fn validate(&self) -> Result<(), SynthError> {
        if self.sunrise_hour >= self.sunset_hour || self.sunset_hour > 24 {
            return Err(SynthError::InvalidSpec(format!(
                "need sunrise < sunset <= 24, got {}..{}",
                self.sunrise_hour, self.sunset_hour
            )));
        }
        if !(self.ar_phi.abs() < 1.0) {
            return Err(SynthError::InvalidSpec(format!(
                "|ar_phi| must be < 1, got {}",
                self.ar_phi
            )));
        }
        if self.noise_sigma < 0.0 || self.diurnal_peak <= 0.0 || self.n_days == 0 {
            return Err(SynthError::InvalidSpec(
                "need noise_sigma >= 0, diurnal_peak > 0, n_days >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Zero at night, half-sine through the day.
fn envelope(hour_of_day: usize, sunrise: u8, sunset: u8, peak: f64) -> f64 {
    let h = hour_of_day as f64;
    let (rise, set) = (sunrise as f64, sunset as f64);
    if h <= rise || h >= set {
        0.0
    } else {
        peak * (std::f64::consts::PI * (h - rise) / (set - rise)).sin()
    }
}

/// Mean of the clipped AR(1) clear-sky index.
const CLEARSKY_MEAN: f64 = 0.75;

/// Hourly irradiance series value(t) = envelope(hour)·k(t) with k a clipped
/// AR(1) around 0.75. The AR noise stream advances every hour, nights
/// included, so output is reproducible sample-for-sample.
pub fn gen_temporal_series(spec: &TemporalGenSpec) -> Result<IrradianceSeries, SynthError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.n_days * 24;
    let mut values = Vec::with_capacity(n);
    let mut k = CLEARSKY_MEAN;
    for t in 0..n {
        let eps: f64 = StandardNormal.sample(&mut rng);
        k = (CLEARSKY_MEAN + spec.ar_phi * (k - CLEARSKY_MEAN) + spec.noise_sigma * eps)
            .clamp(0.0, 1.0);
        let e = envelope(
            t % 24,
            spec.sunrise_hour,
            spec.sunset_hour,
            spec.diurnal_peak,
        );
        values.push(e * k);
    }
    Ok(IrradianceSeries {
        start_timestamp: epoch(),
        step: TimeDelta::hours(1),
        values,
    })
}

/// Spatially correlated Gaussian field on a regular grid: covariance
/// exp(-d/corr_length_km), each time step an independent draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialGenSpec {
    pub nx: usize,
    pub ny: usize,
    pub spacing_km: f64,
    pub corr_length_km: f64,
    pub n_steps: usize,
    pub seed: u64,
}

impl SpatialGenSpec {
    fn validate(&self) -> Result<(), SynthError> {
        let p = self.nx * self.ny;
        if p < 4 {
            return Err(SynthError::InvalidSpec(format!(
                "grid must hold at least 4 pixels, got {}x{}",
                self.nx, self.ny
            )));
        }
        if p > 400 {
            return Err(SynthError::InvalidSpec(format!(
                "dense covariance factorization is capped at 400 pixels, got {p}"
            )));
        }
        if !(self.spacing_km > 0.0) || !(self.corr_length_km > 0.0) || self.n_steps == 0 {
            return Err(SynthError::InvalidSpec(
                "need spacing_km > 0, corr_length_km > 0, n_steps >= 1".into(),
            ));
        }
        Ok(())
    }

    /// Row-major pixel layout with planar and matching geographic coordinates.
    pub fn geometry(&self) -> Result<GridGeometry, SynthError> {
        let lat_scale = 1.0 / KM_PER_DEGREE;
        let lon_scale = 1.0 / (KM_PER_DEGREE * ANCHOR_LAT_DEG.to_radians().cos());
        let pixels: Vec<PixelMeta> = (0..self.nx * self.ny)
            .map(|i| {
                let x = (i % self.nx) as f64 * self.spacing_km;
                let y = (i / self.nx) as f64 * self.spacing_km;
                PixelMeta {
                    pixel_id: i as u32,
                    lat_deg: Some(ANCHOR_LAT_DEG + y * lat_scale),
                    lon_deg: Some(ANCHOR_LON_DEG + x * lon_scale),
                    x_km: Some(x),
                    y_km: Some(y),
                    elevation_m: None,
                }
            })
            .collect();
        Ok(GridGeometry::new(pixels, Some(self.spacing_km))?)
    }
}

/// Lower-triangular Cholesky factor with a jitter ladder on near-singular
/// input; fails with CovarianceNotPD when even 1e-8 jitter cannot rescue it.
fn cholesky_with_jitter(cov: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, SynthError> {
    for jitter in [0.0, 1e-12, 1e-10, 1e-8] {
        if let Some(l) = cholesky(cov, jitter) {
            return Ok(l);
        }
    }
    Err(SynthError::CovarianceNotPD)
}

fn cholesky(cov: &[Vec<f64>], jitter: f64) -> Option<Vec<Vec<f64>>> {
    let n = cov.len();
    let mut l = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = cov[i][j] + if i == j { jitter } else { 0.0 };
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if s <= 0.0 {
                    return None;
                }
                l[i][j] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    Some(l)
}

fn field_cholesky(
    geometry: &GridGeometry,
    corr_length_km: f64,
) -> Result<Vec<Vec<f64>>, SynthError> {
    let pixels = &geometry.pixels;
    let p = pixels.len();
    let mut cov = vec![vec![0.0f64; p]; p];
    for i in 0..p {
        for j in 0..p {
            let d = crate::gridseries::pixel_distance(
                &pixels[i],
                &pixels[j],
                crate::gridseries::DistanceMode::Planar,
            )?;
            cov[i][j] = (-d / corr_length_km).exp();
        }
    }
    cholesky_with_jitter(&cov)
}

/// Shift/scale mapping the unit-variance field into an irradiance-like range.
const FIELD_SHIFT: f64 = 600.0;
const FIELD_SCALE: f64 = 150.0;

/// Independent field draws per step, mapped into a positive irradiance-like
/// range. Temporal structure is deliberately absent so spatial decorrelation
/// can be probed in isolation. The seeded stream is consumed pixel-major
/// within each step.
pub fn gen_spatial_field(spec: &SpatialGenSpec) -> Result<GridSeriesSet, SynthError> {
    spec.validate()?;
    let geometry = spec.geometry()?;
    let chol = field_cholesky(&geometry, spec.corr_length_km)?;
    let p = geometry.pixels.len();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut values: Vec<Vec<f64>> = vec![Vec::with_capacity(spec.n_steps); p];
    let mut z = vec![0.0f64; p];
    for _ in 0..spec.n_steps {
        for zi in z.iter_mut() {
            *zi = StandardNormal.sample(&mut rng);
        }
        for i in 0..p {
            let mut v = 0.0;
            for k in 0..=i {
                v += chol[i][k] * z[k];
            }
            values[i].push((FIELD_SHIFT + FIELD_SCALE * v).max(0.0));
        }
    }
    build_set(geometry, values)
}

/// Extra knobs of the combined space-time generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiurnalSpec {
    pub diurnal_peak: f64,
    pub sunrise_hour: u8,
    pub sunset_hour: u8,
    pub ar_phi: f64,
}

impl Default for DiurnalSpec {
    fn default() -> Self {
        Self {
            diurnal_peak: 900.0,
            sunrise_hour: 6,
            sunset_hour: 18,
            ar_phi: 0.8,
        }
    }
}

/// Spatially correlated field with AR(1) temporal evolution under a shared
/// diurnal envelope: value_i(t) = envelope(hour)·k_i(t) with
/// k_i = clip(0.65 + 0.2·g_i), g_t = phi·g_{t-1} + sqrt(1-phi^2)·L·z_t.
/// Gives datasets with both a spatial decay and a detectable auto-MI first
/// minimum, so the whole analysis pipeline can run end to end on them.
pub fn gen_diurnal_field(
    spec: &SpatialGenSpec,
    diurnal: &DiurnalSpec,
) -> Result<GridSeriesSet, SynthError> {
    spec.validate()?;
    if diurnal.sunrise_hour >= diurnal.sunset_hour || diurnal.sunset_hour > 24 {
        return Err(SynthError::InvalidSpec(format!(
            "need sunrise < sunset <= 24, got {}..{}",
            diurnal.sunrise_hour, diurnal.sunset_hour
        )));
    }
    if !(diurnal.ar_phi.abs() < 1.0) {
        return Err(SynthError::InvalidSpec(format!(
            "|ar_phi| must be < 1, got {}",
            diurnal.ar_phi
        )));
    }
    let geometry = spec.geometry()?;
    let chol = field_cholesky(&geometry, spec.corr_length_km)?;
    let p = geometry.pixels.len();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let innovation = (1.0 - diurnal.ar_phi * diurnal.ar_phi).sqrt();
    let mut g = vec![0.0f64; p];
    let mut z = vec![0.0f64; p];
    let mut fresh = vec![0.0f64; p];
    let mut values: Vec<Vec<f64>> = vec![Vec::with_capacity(spec.n_steps); p];
    for t in 0..spec.n_steps {
        for zi in z.iter_mut() {
            *zi = StandardNormal.sample(&mut rng);
        }
        for i in 0..p {
            let mut v = 0.0;
            for k in 0..=i {
                v += chol[i][k] * z[k];
            }
            fresh[i] = v;
        }
        for i in 0..p {
            g[i] = if t == 0 {
                fresh[i]
            } else {
                diurnal.ar_phi * g[i] + innovation * fresh[i]
            };
        }
        let e = envelope(
            t % 24,
            diurnal.sunrise_hour,
            diurnal.sunset_hour,
            diurnal.diurnal_peak,
        );
        for i in 0..p {
            let k = (0.65 + 0.2 * g[i]).clamp(0.0, 1.1);
            values[i].push(e * k);
        }
    }
    build_set(geometry, values)
}

fn build_set(geometry: GridGeometry, values: Vec<Vec<f64>>) -> Result<GridSeriesSet, SynthError> {
    let n_steps = values[0].len();
    let timestamps: Vec<DateTime<Utc>> = (0..n_steps)
        .map(|i| epoch() + TimeDelta::hours(i as i64))
        .collect();
    let series: BTreeMap<u32, Vec<f64>> = values
        .into_iter()
        .enumerate()
        .map(|(i, v)| (i as u32, v))
        .collect();
    Ok(GridSeriesSet::new(
        geometry,
        timestamps,
        TimeDelta::hours(1),
        series,
    )?)
}

/// Wrap a single generated series as a one-pixel set, so temporal-only
/// synthetic data flows through the same CSV formats.
pub fn single_pixel_set(series: IrradianceSeries) -> Result<GridSeriesSet, SynthError> {
    let geometry = GridGeometry::new(
        vec![PixelMeta {
            pixel_id: 0,
            lat_deg: Some(ANCHOR_LAT_DEG),
            lon_deg: Some(ANCHOR_LON_DEG),
            x_km: Some(0.0),
            y_km: Some(0.0),
            elevation_m: None,
        }],
        Some(1.0),
    )?;
    let timestamps: Vec<DateTime<Utc>> = (0..series.values.len())
        .map(|i| series.start_timestamp + series.step * i as i32)
        .collect();
    let mut map = BTreeMap::new();
    map.insert(0u32, series.values);
    Ok(GridSeriesSet::new(geometry, timestamps, series.step, map)?)
}
