//! Data model and ingestion for a pixel grid with aligned hourly irradiance
//! series: geometry/series CSV parsing, serialization, distance computation,
//! and day-hour filtering.
//!
//! Missing samples are encoded as NaN and are never interpolated; downstream
//! MI estimation uses pairwise deletion.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use chrono::{DateTime, TimeDelta, Timelike, Utc};
use thiserror::Error;

/// Mean Earth radius used by the haversine distance, in km.
pub const EARTH_RADIUS_KM: f64 = 6371.0;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("duplicate pixel id {0}")]
    DuplicatePixelId(u32),
    #[error("pixel {0}: missing coordinates for the requested operation")]
    MissingCoordinates(u32),
    #[error("misaligned timestamps: {0}")]
    MisalignedTimestamps(String),
    #[error("series references pixel id {0} absent from the geometry")]
    UnknownPixelId(u32),
    #[error("negative irradiance {value} for pixel {pixel_id} at {timestamp}")]
    NegativeValue {
        pixel_id: u32,
        timestamp: String,
        value: f64,
    },
    #[error("no samples remain after filtering")]
    EmptyResult,
    #[error("invalid hour range: start {start} > end {end}")]
    InvalidHourRange { start: u8, end: u8 },
    #[error("grid spacing could not be determined: {0}")]
    SpacingUnknown(String),
}

/// One cell of the measurement mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct PixelMeta {
    pub pixel_id: u32,
    pub lat_deg: Option<f64>,
    pub lon_deg: Option<f64>,
    pub x_km: Option<f64>,
    pub y_km: Option<f64>,
    pub elevation_m: Option<f64>,
}

impl PixelMeta {
    pub fn has_geographic(&self) -> bool {
        self.lat_deg.is_some() && self.lon_deg.is_some()
    }

    pub fn has_planar(&self) -> bool {
        self.x_km.is_some() && self.y_km.is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistanceMode {
    Haversine,
    Planar,
}

/// Great-circle or planar separation of two pixels, in km.
pub fn pixel_distance(a: &PixelMeta, b: &PixelMeta, mode: DistanceMode) -> Result<f64, GridError> {
    match mode {
        DistanceMode::Planar => {
            let (ax, ay) = (
                a.x_km.ok_or(GridError::MissingCoordinates(a.pixel_id))?,
                a.y_km.ok_or(GridError::MissingCoordinates(a.pixel_id))?,
            );
            let (bx, by) = (
                b.x_km.ok_or(GridError::MissingCoordinates(b.pixel_id))?,
                b.y_km.ok_or(GridError::MissingCoordinates(b.pixel_id))?,
            );
            Ok(((ax - bx).powi(2) + (ay - by).powi(2)).sqrt())
        }
        DistanceMode::Haversine => {
            let lat1 = a
                .lat_deg
                .ok_or(GridError::MissingCoordinates(a.pixel_id))?
                .to_radians();
            let lon1 = a
                .lon_deg
                .ok_or(GridError::MissingCoordinates(a.pixel_id))?
                .to_radians();
            let lat2 = b
                .lat_deg
                .ok_or(GridError::MissingCoordinates(b.pixel_id))?
                .to_radians();
            let lon2 = b
                .lon_deg
                .ok_or(GridError::MissingCoordinates(b.pixel_id))?
                .to_radians();
            let dlat = lat2 - lat1;
            let dlon = lon2 - lon1;
            let s =
                (dlat / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * (dlon / 2.0).sin().powi(2);
            Ok(2.0 * EARTH_RADIUS_KM * s.sqrt().asin())
        }
    }
}

/// The pixel mesh plus its nominal spacing.
#[derive(Debug, Clone, PartialEq)]
pub struct GridGeometry {
    pub pixels: Vec<PixelMeta>,
    pub grid_spacing_km: f64,
}

impl GridGeometry {
    /// Validate pixels and settle the grid spacing. When `spacing_km` is None
    /// the spacing is inferred as the minimum pairwise distance (planar when
    /// every pixel has planar coordinates, haversine otherwise).
    pub fn new(pixels: Vec<PixelMeta>, spacing_km: Option<f64>) -> Result<Self, GridError> {
        let mut seen = std::collections::BTreeSet::new();
        for p in &pixels {
            if !seen.insert(p.pixel_id) {
                return Err(GridError::DuplicatePixelId(p.pixel_id));
            }
            if !p.has_geographic() && !p.has_planar() {
                return Err(GridError::MissingCoordinates(p.pixel_id));
            }
        }
        let grid_spacing_km = match spacing_km {
            Some(s) if s > 0.0 => s,
            Some(s) => {
                return Err(GridError::SpacingUnknown(format!(
                    "explicit spacing must be > 0, got {s}"
                )))
            }
            None => infer_spacing(&pixels)?,
        };
        Ok(Self {
            pixels,
            grid_spacing_km,
        })
    }

    pub fn pixel(&self, id: u32) -> Option<&PixelMeta> {
        self.pixels.iter().find(|p| p.pixel_id == id)
    }
}

fn infer_spacing(pixels: &[PixelMeta]) -> Result<f64, GridError> {
    if pixels.len() < 2 {
        return Err(GridError::SpacingUnknown(
            "need >= 2 pixels to infer spacing; pass it explicitly".into(),
        ));
    }
    let mode = if pixels.iter().all(PixelMeta::has_planar) {
        DistanceMode::Planar
    } else {
        DistanceMode::Haversine
    };
    let mut min = f64::INFINITY;
    for i in 0..pixels.len() {
        for j in (i + 1)..pixels.len() {
            let d = pixel_distance(&pixels[i], &pixels[j], mode)?;
            if d < min {
                min = d;
            }
        }
    }
    if !(min > 0.0) {
        return Err(GridError::SpacingUnknown(
            "coincident pixels give zero minimum distance".into(),
        ));
    }
    Ok(min)
}

/// A single pixel's regular hourly record; NaN marks missing samples.
#[derive(Debug, Clone, PartialEq)]
pub struct IrradianceSeries {
    pub start_timestamp: DateTime<Utc>,
    pub step: TimeDelta,
    pub values: Vec<f64>,
}

/// Inclusive local-hour window with the UTC offset it is evaluated under.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DayFilterWindow {
    pub start_hour: u8,
    pub end_hour: u8,
    pub utc_offset_hours: i32,
}

/// Pixel geometry plus aligned irradiance series on one shared time axis.
/// Immutable after construction; safe for shared concurrent reads.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSeriesSet {
    pub geometry: GridGeometry,
    pub timestamps: Vec<DateTime<Utc>>,
    /// Nominal sampling step of the raw (unfiltered) axis.
    pub step: TimeDelta,
    series: BTreeMap<u32, Vec<f64>>,
    pub day_filter: Option<DayFilterWindow>,
}

impl GridSeriesSet {
    pub fn new(
        geometry: GridGeometry,
        timestamps: Vec<DateTime<Utc>>,
        step: TimeDelta,
        series: BTreeMap<u32, Vec<f64>>,
    ) -> Result<Self, GridError> {
        for (&id, values) in &series {
            if geometry.pixel(id).is_none() {
                return Err(GridError::UnknownPixelId(id));
            }
            if values.len() != timestamps.len() {
                return Err(GridError::MisalignedTimestamps(format!(
                    "pixel {id} has {} values for {} timestamps",
                    values.len(),
                    timestamps.len()
                )));
            }
        }
        Ok(Self {
            geometry,
            timestamps,
            step,
            series,
            day_filter: None,
        })
    }

    pub fn n_steps(&self) -> usize {
        self.timestamps.len()
    }

    pub fn n_pixels(&self) -> usize {
        self.series.len()
    }

    pub fn pixel_ids(&self) -> impl Iterator<Item = u32> + '_ {
        self.series.keys().copied()
    }

    pub fn values(&self, pixel_id: u32) -> Option<&[f64]> {
        self.series.get(&pixel_id).map(Vec::as_slice)
    }

    pub fn iter_series(&self) -> impl Iterator<Item = (u32, &[f64])> {
        self.series.iter().map(|(&id, v)| (id, v.as_slice()))
    }
}

fn local_hour(ts: DateTime<Utc>, utc_offset_hours: i32) -> u8 {
    ((ts.hour() as i32 + utc_offset_hours).rem_euclid(24)) as u8
}

/// Keep only samples whose local-time hour falls inside the inclusive window.
/// The default analysis window 8–19 retains 12 samples per full day.
pub fn filter_day_hours(
    set: &GridSeriesSet,
    window: DayFilterWindow,
) -> Result<GridSeriesSet, GridError> {
    if window.start_hour > window.end_hour {
        return Err(GridError::InvalidHourRange {
            start: window.start_hour,
            end: window.end_hour,
        });
    }
    let keep: Vec<usize> = set
        .timestamps
        .iter()
        .enumerate()
        .filter(|(_, ts)| {
            let h = local_hour(**ts, window.utc_offset_hours);
            h >= window.start_hour && h <= window.end_hour
        })
        .map(|(i, _)| i)
        .collect();
    if keep.is_empty() {
        return Err(GridError::EmptyResult);
    }
    let timestamps: Vec<DateTime<Utc>> = keep.iter().map(|&i| set.timestamps[i]).collect();
    let series: BTreeMap<u32, Vec<f64>> = set
        .series
        .iter()
        .map(|(&id, v)| (id, keep.iter().map(|&i| v[i]).collect()))
        .collect();
    Ok(GridSeriesSet {
        geometry: set.geometry.clone(),
        timestamps,
        step: set.step,
        series,
        day_filter: Some(window),
    })
}

// ---------------------------------------------------------------------------
// CSV ingestion
// ---------------------------------------------------------------------------

fn parse_timestamp(s: &str, line: usize) -> Result<DateTime<Utc>, GridError> {
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Ok(dt.with_timezone(&Utc));
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S", "%Y-%m-%d %H:%M"] {
        if let Ok(naive) = chrono::NaiveDateTime::parse_from_str(s, fmt) {
            return Ok(naive.and_utc());
        }
    }
    Err(GridError::Parse {
        line,
        msg: format!("unrecognized timestamp '{s}'"),
    })
}

fn parse_opt_f64(field: &str, line: usize, col: &str) -> Result<Option<f64>, GridError> {
    let t = field.trim();
    if t.is_empty() {
        return Ok(None);
    }
    t.parse::<f64>().map(Some).map_err(|_| GridError::Parse {
        line,
        msg: format!("invalid number '{t}' in column {col}"),
    })
}

/// Load a geometry CSV (`pixel_id,lat_deg,lon_deg[,x_km,y_km][,elevation_m]`),
/// inferring the grid spacing from the minimum pairwise distance.
pub fn load_grid(path: &Path) -> Result<GridGeometry, GridError> {
    load_grid_with_spacing(path, None)
}

pub fn load_grid_with_spacing(
    path: &Path,
    spacing_km: Option<f64>,
) -> Result<GridGeometry, GridError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let headers = reader
        .headers()
        .map_err(|e| GridError::Parse {
            line: 1,
            msg: e.to_string(),
        })?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let id_col = col("pixel_id").ok_or(GridError::Parse {
        line: 1,
        msg: "missing required column pixel_id".into(),
    })?;
    let lat_col = col("lat_deg");
    let lon_col = col("lon_deg");
    let x_col = col("x_km");
    let y_col = col("y_km");
    let elev_col = col("elevation_m");

    let mut pixels = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let line = idx + 2; // 1-based, after the header
        let record = record.map_err(|e| GridError::Parse {
            line,
            msg: e.to_string(),
        })?;
        let get = |c: Option<usize>| c.and_then(|c| record.get(c)).unwrap_or("");
        let pixel_id: u32 =
            record
                .get(id_col)
                .unwrap_or("")
                .parse()
                .map_err(|_| GridError::Parse {
                    line,
                    msg: format!("invalid pixel_id '{}'", get(Some(id_col))),
                })?;
        pixels.push(PixelMeta {
            pixel_id,
            lat_deg: parse_opt_f64(get(lat_col), line, "lat_deg")?,
            lon_deg: parse_opt_f64(get(lon_col), line, "lon_deg")?,
            x_km: parse_opt_f64(get(x_col), line, "x_km")?,
            y_km: parse_opt_f64(get(y_col), line, "y_km")?,
            elevation_m: parse_opt_f64(get(elev_col), line, "elevation_m")?,
        });
    }
    if pixels.is_empty() {
        return Err(GridError::Parse {
            line: 1,
            msg: "geometry file contains no pixels".into(),
        });
    }
    GridGeometry::new(pixels, spacing_km)
}

/// Load a series CSV. Two layouts are accepted:
/// long form `timestamp,pixel_id,ghi_whm2` and wide form `timestamp,px<id>,...`.
/// Empty value fields are missing samples; gaps in the time axis become NaN.
pub fn load_series(path: &Path, geometry: &GridGeometry) -> Result<GridSeriesSet, GridError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(false)
        .from_path(path)?;
    let headers = reader
        .headers()
        .map_err(|e| GridError::Parse {
            line: 1,
            msg: e.to_string(),
        })?
        .clone();
    let header_vec: Vec<String> = headers.iter().map(str::to_string).collect();
    if header_vec.first().map(String::as_str) != Some("timestamp") {
        return Err(GridError::Parse {
            line: 1,
            msg: "series file must start with a timestamp column".into(),
        });
    }

    // (timestamp, pixel_id, value) triples with None = missing
    let mut samples: Vec<(DateTime<Utc>, u32, Option<f64>)> = Vec::new();
    if header_vec.len() >= 3 && header_vec[1] == "pixel_id" && header_vec[2] == "ghi_whm2" {
        for (idx, record) in reader.records().enumerate() {
            let line = idx + 2;
            let record = record.map_err(|e| GridError::Parse {
                line,
                msg: e.to_string(),
            })?;
            let ts = parse_timestamp(record.get(0).unwrap_or(""), line)?;
            let pixel_id: u32 =
                record
                    .get(1)
                    .unwrap_or("")
                    .parse()
                    .map_err(|_| GridError::Parse {
                        line,
                        msg: format!("invalid pixel_id '{}'", record.get(1).unwrap_or("")),
                    })?;
            let value = parse_opt_f64(record.get(2).unwrap_or(""), line, "ghi_whm2")?;
            samples.push((ts, pixel_id, value));
        }
    } else {
        // wide form: every remaining column must be px<id>
        let mut ids = Vec::new();
        for h in &header_vec[1..] {
            let id: u32 = h
                .strip_prefix("px")
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| GridError::Parse {
                    line: 1,
                    msg: format!("unrecognized series column '{h}' (expected px<id>)"),
                })?;
            ids.push(id);
        }
        for (idx, record) in reader.records().enumerate() {
            let line = idx + 2;
            let record = record.map_err(|e| GridError::Parse {
                line,
                msg: e.to_string(),
            })?;
            let ts = parse_timestamp(record.get(0).unwrap_or(""), line)?;
            for (k, &id) in ids.iter().enumerate() {
                let value = parse_opt_f64(record.get(k + 1).unwrap_or(""), line, "value")?;
                samples.push((ts, id, value));
            }
        }
    }
    if samples.is_empty() {
        return Err(GridError::Parse {
            line: 1,
            msg: "series file contains no samples".into(),
        });
    }

    for (ts, pixel_id, value) in &samples {
        if geometry.pixel(*pixel_id).is_none() {
            return Err(GridError::UnknownPixelId(*pixel_id));
        }
        if let Some(v) = value {
            if *v < 0.0 {
                return Err(GridError::NegativeValue {
                    pixel_id: *pixel_id,
                    timestamp: ts.to_rfc3339(),
                    value: *v,
                });
            }
        }
    }

    // shared axis: uniform grid from min to max timestamp at the inferred step
    let mut stamps: Vec<DateTime<Utc>> = samples.iter().map(|(ts, _, _)| *ts).collect();
    stamps.sort();
    stamps.dedup();
    let step = if stamps.len() >= 2 {
        stamps
            .windows(2)
            .map(|w| w[1] - w[0])
            .min()
            .unwrap_or(TimeDelta::hours(1))
    } else {
        TimeDelta::hours(1)
    };
    if step <= TimeDelta::zero() {
        return Err(GridError::MisalignedTimestamps(
            "non-increasing timestamps".into(),
        ));
    }
    let t0 = stamps[0];
    let span = (*stamps.last().unwrap() - t0).num_seconds();
    let step_s = step.num_seconds();
    let n_steps = (span / step_s) as usize + 1;
    let index_of = |ts: DateTime<Utc>| -> Result<usize, GridError> {
        let off = (ts - t0).num_seconds();
        if off % step_s != 0 {
            return Err(GridError::MisalignedTimestamps(format!(
                "{} is not aligned to the {}s step",
                ts.to_rfc3339(),
                step_s
            )));
        }
        Ok((off / step_s) as usize)
    };

    let timestamps: Vec<DateTime<Utc>> = (0..n_steps)
        .map(|i| t0 + TimeDelta::seconds(step_s * i as i64))
        .collect();
    let mut series: BTreeMap<u32, Vec<f64>> = BTreeMap::new();
    let mut filled: BTreeMap<u32, Vec<bool>> = BTreeMap::new();
    for (ts, pixel_id, value) in samples {
        let i = index_of(ts)?;
        let values = series
            .entry(pixel_id)
            .or_insert_with(|| vec![f64::NAN; n_steps]);
        let seen = filled
            .entry(pixel_id)
            .or_insert_with(|| vec![false; n_steps]);
        if seen[i] {
            return Err(GridError::MisalignedTimestamps(format!(
                "duplicate sample for pixel {pixel_id} at {}",
                ts.to_rfc3339()
            )));
        }
        seen[i] = true;
        if let Some(v) = value {
            values[i] = v;
        }
    }

    GridSeriesSet::new(geometry.clone(), timestamps, step, series)
}

/// Load a series CSV that must carry exactly one pixel, without a geometry.
/// Returns (timestamp, value) pairs sorted by time; missing samples are NaN.
pub fn load_single_series(path: &Path) -> Result<Vec<(DateTime<Utc>, f64)>, GridError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let headers = reader
        .headers()
        .map_err(|e| GridError::Parse {
            line: 1,
            msg: e.to_string(),
        })?
        .clone();
    let header_vec: Vec<String> = headers.iter().map(str::to_string).collect();
    if header_vec.first().map(String::as_str) != Some("timestamp") {
        return Err(GridError::Parse {
            line: 1,
            msg: "series file must start with a timestamp column".into(),
        });
    }
    let long_form = header_vec.len() >= 3 && header_vec[1] == "pixel_id";
    if !long_form && header_vec.len() != 2 {
        return Err(GridError::Parse {
            line: 1,
            msg: format!(
                "single-series file must hold exactly one value column, found {}",
                header_vec.len() - 1
            ),
        });
    }
    let mut rows: Vec<(DateTime<Utc>, f64)> = Vec::new();
    let mut pixel_seen: Option<String> = None;
    for (idx, record) in reader.records().enumerate() {
        let line = idx + 2;
        let record = record.map_err(|e| GridError::Parse {
            line,
            msg: e.to_string(),
        })?;
        let ts = parse_timestamp(record.get(0).unwrap_or(""), line)?;
        let (pixel, value_field) = if long_form {
            (record.get(1).unwrap_or("").to_string(), record.get(2))
        } else {
            (header_vec[1].clone(), record.get(1))
        };
        match &pixel_seen {
            None => pixel_seen = Some(pixel),
            Some(seen) if *seen != pixel => {
                return Err(GridError::Parse {
                    line,
                    msg: format!(
                        "single-series file holds more than one pixel ({seen} and {pixel})"
                    ),
                })
            }
            _ => {}
        }
        let value = parse_opt_f64(value_field.unwrap_or(""), line, "value")?;
        if let Some(v) = value {
            if v < 0.0 {
                return Err(GridError::NegativeValue {
                    pixel_id: 0,
                    timestamp: ts.to_rfc3339(),
                    value: v,
                });
            }
        }
        rows.push((ts, value.unwrap_or(f64::NAN)));
    }
    if rows.is_empty() {
        return Err(GridError::Parse {
            line: 1,
            msg: "series file contains no samples".into(),
        });
    }
    rows.sort_by_key(|(ts, _)| *ts);
    Ok(rows)
}

// ---------------------------------------------------------------------------
// CSV serialization (the synth generators emit the same formats)
// ---------------------------------------------------------------------------

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Render a geometry table; only columns carried by at least one pixel appear.
pub fn geometry_to_csv(geometry: &GridGeometry) -> String {
    let any_geo = geometry.pixels.iter().any(PixelMeta::has_geographic);
    let any_planar = geometry.pixels.iter().any(PixelMeta::has_planar);
    let any_elev = geometry.pixels.iter().any(|p| p.elevation_m.is_some());
    let mut out = String::from("pixel_id");
    if any_geo {
        out.push_str(",lat_deg,lon_deg");
    }
    if any_planar {
        out.push_str(",x_km,y_km");
    }
    if any_elev {
        out.push_str(",elevation_m");
    }
    out.push('\n');
    for p in &geometry.pixels {
        let _ = write!(out, "{}", p.pixel_id);
        if any_geo {
            let _ = write!(out, ",{},{}", fmt_opt(p.lat_deg), fmt_opt(p.lon_deg));
        }
        if any_planar {
            let _ = write!(out, ",{},{}", fmt_opt(p.x_km), fmt_opt(p.y_km));
        }
        if any_elev {
            let _ = write!(out, ",{}", fmt_opt(p.elevation_m));
        }
        out.push('\n');
    }
    out
}

/// Render the wide-matrix series form `timestamp,px<id>,...` with empty
/// fields for missing samples.
pub fn series_to_csv(set: &GridSeriesSet) -> String {
    let ids: Vec<u32> = set.pixel_ids().collect();
    let mut out = String::from("timestamp");
    for id in &ids {
        let _ = write!(out, ",px{id}");
    }
    out.push('\n');
    for (i, ts) in set.timestamps.iter().enumerate() {
        out.push_str(&ts.to_rfc3339_opts(chrono::SecondsFormat::Secs, true));
        for id in &ids {
            let v = set.values(*id).unwrap()[i];
            if v.is_nan() {
                out.push(',');
            } else {
                let _ = write!(out, ",{v}");
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f.flush().unwrap();
        f
    }

    fn planar_pixel(id: u32, x: f64, y: f64) -> PixelMeta {
        PixelMeta {
            pixel_id: id,
            lat_deg: None,
            lon_deg: None,
            x_km: Some(x),
            y_km: Some(y),
            elevation_m: None,
        }
    }

    #[test]
    fn load_grid_three_pixels() {
        let f = write_temp(
            "pixel_id,lat_deg,lon_deg\n\
             1,41.92,8.73\n\
             2,42.30,9.15\n\
             3,42.70,9.45\n",
        );
        let g = load_grid(f.path()).unwrap();
        assert_eq!(g.pixels.len(), 3);
        assert!(g.grid_spacing_km > 0.0);
    }

    #[test]
    fn load_grid_duplicate_id_rejected() {
        let f = write_temp("pixel_id,lat_deg,lon_deg\n7,41.0,8.0\n7,42.0,9.0\n");
        assert!(matches!(
            load_grid(f.path()),
            Err(GridError::DuplicatePixelId(7))
        ));
    }

    #[test]
    fn load_grid_empty_file_is_parse_error() {
        let f = write_temp("");
        assert!(matches!(load_grid(f.path()), Err(GridError::Parse { .. })));
    }

    #[test]
    fn load_grid_pixel_without_coordinates() {
        let f = write_temp("pixel_id,lat_deg,lon_deg\n1,,\n2,42.0,9.0\n");
        assert!(matches!(
            load_grid(f.path()),
            Err(GridError::MissingCoordinates(1))
        ));
    }

    fn two_pixel_geometry() -> GridGeometry {
        GridGeometry::new(
            vec![planar_pixel(0, 0.0, 0.0), planar_pixel(1, 2.5, 0.0)],
            None,
        )
        .unwrap()
    }

    #[test]
    fn load_series_long_form_aligns() {
        let g = two_pixel_geometry();
        let mut body = String::from("timestamp,pixel_id,ghi_whm2\n");
        for h in 0..24 {
            for id in 0..2 {
                body += &format!("2020-01-01T{h:02}:00:00Z,{id},{}\n", 100 + h);
            }
        }
        let f = write_temp(&body);
        let set = load_series(f.path(), &g).unwrap();
        assert_eq!(set.n_steps(), 24);
        assert_eq!(set.n_pixels(), 2);
        assert_eq!(set.step, TimeDelta::hours(1));
    }

    #[test]
    fn load_series_unknown_pixel_rejected() {
        let g = two_pixel_geometry();
        let f = write_temp("timestamp,pixel_id,ghi_whm2\n2020-01-01T00:00:00Z,9,5.0\n");
        assert!(matches!(
            load_series(f.path(), &g),
            Err(GridError::UnknownPixelId(9))
        ));
    }

    #[test]
    fn load_series_negative_value_rejected() {
        let g = two_pixel_geometry();
        let f = write_temp("timestamp,pixel_id,ghi_whm2\n2020-01-01T00:00:00Z,0,-5.0\n");
        assert!(matches!(
            load_series(f.path(), &g),
            Err(GridError::NegativeValue { .. })
        ));
    }

    #[test]
    fn load_series_gap_becomes_missing() {
        let g = two_pixel_geometry();
        let f = write_temp(
            "timestamp,pixel_id,ghi_whm2\n\
             2020-01-01T00:00:00Z,0,1.0\n\
             2020-01-01T02:00:00Z,0,3.0\n\
             2020-01-01T01:00:00Z,1,2.0\n\
             2020-01-01T02:00:00Z,1,3.0\n",
        );
        let set = load_series(f.path(), &g).unwrap();
        assert_eq!(set.n_steps(), 3);
        let v0 = set.values(0).unwrap();
        assert!(v0[1].is_nan());
        let v1 = set.values(1).unwrap();
        assert!(v1[0].is_nan());
        assert_eq!(v1[2], 3.0);
    }

    fn hourly_set(n_hours: usize) -> GridSeriesSet {
        let g = two_pixel_geometry();
        let t0 = DateTime::parse_from_rfc3339("2020-01-01T00:00:00Z")
            .unwrap()
            .with_timezone(&Utc);
        let timestamps: Vec<_> = (0..n_hours)
            .map(|i| t0 + TimeDelta::hours(i as i64))
            .collect();
        let mut series = BTreeMap::new();
        series.insert(0, (0..n_hours).map(|i| i as f64).collect());
        series.insert(1, (0..n_hours).map(|i| (i * 2) as f64).collect());
        GridSeriesSet::new(g, timestamps, TimeDelta::hours(1), series).unwrap()
    }

    #[test]
    fn filter_8_to_19_keeps_12_per_day() {
        let set = hourly_set(48);
        let window = DayFilterWindow {
            start_hour: 8,
            end_hour: 19,
            utc_offset_hours: 0,
        };
        let filtered = filter_day_hours(&set, window).unwrap();
        assert_eq!(filtered.n_steps(), 24);
        assert_eq!(filtered.day_filter, Some(window));
    }

    #[test]
    fn filter_full_day_is_identity() {
        let set = hourly_set(30);
        let window = DayFilterWindow {
            start_hour: 0,
            end_hour: 23,
            utc_offset_hours: 0,
        };
        let filtered = filter_day_hours(&set, window).unwrap();
        assert_eq!(filtered.timestamps, set.timestamps);
        assert_eq!(filtered.values(0), set.values(0));
    }

    #[test]
    fn filter_reversed_window_rejected() {
        let set = hourly_set(24);
        let window = DayFilterWindow {
            start_hour: 3,
            end_hour: 2,
            utc_offset_hours: 0,
        };
        assert!(matches!(
            filter_day_hours(&set, window),
            Err(GridError::InvalidHourRange { start: 3, end: 2 })
        ));
    }

    #[test]
    fn filter_is_idempotent() {
        let set = hourly_set(72);
        let window = DayFilterWindow {
            start_hour: 8,
            end_hour: 19,
            utc_offset_hours: 1,
        };
        let once = filter_day_hours(&set, window).unwrap();
        let twice = filter_day_hours(&once, window).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn distance_to_self_is_zero() {
        let p = planar_pixel(0, 3.0, 4.0);
        assert_eq!(pixel_distance(&p, &p, DistanceMode::Planar).unwrap(), 0.0);
    }

    #[test]
    fn distance_planar_3_4_5() {
        let a = planar_pixel(0, 0.0, 0.0);
        let b = planar_pixel(1, 3.0, 4.0);
        assert_eq!(pixel_distance(&a, &b, DistanceMode::Planar).unwrap(), 5.0);
    }

    #[test]
    fn distance_haversine_one_degree_longitude_at_equator() {
        let a = PixelMeta {
            pixel_id: 0,
            lat_deg: Some(0.0),
            lon_deg: Some(0.0),
            x_km: None,
            y_km: None,
            elevation_m: None,
        };
        let b = PixelMeta {
            pixel_id: 1,
            lat_deg: Some(0.0),
            lon_deg: Some(1.0),
            x_km: None,
            y_km: None,
            elevation_m: None,
        };
        let d = pixel_distance(&a, &b, DistanceMode::Haversine).unwrap();
        let expected = 2.0 * std::f64::consts::PI * EARTH_RADIUS_KM / 360.0;
        assert!((d - expected).abs() < 0.1, "got {d}, expected {expected}");
    }

    #[test]
    fn distance_missing_coordinates() {
        let a = planar_pixel(0, 0.0, 0.0);
        let b = planar_pixel(1, 1.0, 1.0);
        assert!(matches!(
            pixel_distance(&a, &b, DistanceMode::Haversine),
            Err(GridError::MissingCoordinates(0))
        ));
    }

    #[test]
    fn distance_metric_properties_over_all_pairs() {
        let pixels: Vec<PixelMeta> = (0..6)
            .map(|i| {
                planar_pixel(
                    i,
                    (i as f64 * 1.7).sin() * 10.0,
                    (i as f64 * 2.3).cos() * 10.0,
                )
            })
            .collect();
        for a in &pixels {
            for b in &pixels {
                let dab = pixel_distance(a, b, DistanceMode::Planar).unwrap();
                let dba = pixel_distance(b, a, DistanceMode::Planar).unwrap();
                assert!(dab >= 0.0);
                assert!((dab - dba).abs() < 1e-9);
                if a.pixel_id == b.pixel_id {
                    assert!(dab < 1e-9);
                }
            }
        }
    }

    #[test]
    fn single_series_loader_enforces_one_pixel() {
        let ok = write_temp(
            "timestamp,pixel_id,ghi_whm2\n\
             2020-01-01T01:00:00Z,4,\n\
             2020-01-01T00:00:00Z,4,7.5\n",
        );
        let rows = load_single_series(ok.path()).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].1, 7.5);
        assert!(rows[1].1.is_nan());

        let two_pixels = write_temp("timestamp,px0,px1\n2020-01-01T00:00:00Z,1.0,2.0\n");
        assert!(matches!(
            load_single_series(two_pixels.path()),
            Err(GridError::Parse { .. })
        ));
    }

    #[test]
    fn roundtrip_series_is_bit_exact() {
        let mut set = hourly_set(30);
        // punch in a missing value and a fractional one
        let g = set.geometry.clone();
        let mut series = BTreeMap::new();
        for (id, v) in set.iter_series() {
            let mut v = v.to_vec();
            if id == 0 {
                v[3] = f64::NAN;
                v[7] = 123.456789;
            }
            series.insert(id, v);
        }
        set = GridSeriesSet::new(g, set.timestamps.clone(), set.step, series).unwrap();

        let geo_csv = geometry_to_csv(&set.geometry);
        let series_csv = series_to_csv(&set);
        let gf = write_temp(&geo_csv);
        let sf = write_temp(&series_csv);
        let geometry = load_grid(gf.path()).unwrap();
        let loaded = load_series(sf.path(), &geometry).unwrap();

        assert_eq!(loaded.timestamps, set.timestamps);
        for (id, original) in set.iter_series() {
            let got = loaded.values(id).unwrap();
            assert_eq!(got.len(), original.len());
            for (a, b) in got.iter().zip(original) {
                assert!(
                    (a.is_nan() && b.is_nan()) || a.to_bits() == b.to_bits(),
                    "value mismatch: {a} vs {b}"
                );
            }
        }
    }
}
