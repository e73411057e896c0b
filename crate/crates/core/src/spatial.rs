//! nMI-versus-distance curve over pixel pairs, exponential-decay fitting, and
//! extraction of the spatial decorrelation distance.
//!
//! The fitted model is f(d) = a·exp(-d/b) + c. Its tangent at d = 0 is
//! y = (a+c) - (a/b)·d, which meets the asymptote y = c at d = b, so the
//! decorrelation distance extracted by the tangent/limit intersection is the
//! fitted decay length itself.

use rayon::prelude::*;
use thiserror::Error;

use crate::gridseries::{pixel_distance, DistanceMode, GridError, GridSeriesSet};
use crate::infotheory::{
    build_edges, joint_histogram, mutual_information, BinEdges, BinningSpec, InfoError,
    DEFAULT_SAMPLE_FLOOR,
};

#[derive(Debug, Error)]
pub enum SpatialError {
    #[error("spatial analysis needs at least 2 pixels with series, got {0}")]
    NotEnoughPixels(usize),
    #[error("all {0} pixel pairs were skipped (sample floor or degenerate data)")]
    AllPairsSkipped(usize),
    #[error("fit diverged: damping exceeded ceiling after {iterations} iterations")]
    FitDiverged { iterations: usize },
    #[error("degenerate curve: {0}")]
    DegenerateCurve(String),
    #[error("fit did not converge; refusing to extract a decorrelation distance")]
    UnconvergedFit,
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Info(#[from] InfoError),
}

/// Pair selection strategy. Random sampling is stratified by distance decile
/// so the curve keeps its shape when subsampled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PairSampling {
    AllPairs,
    RandomPairs { m: usize, seed: u64 },
}

#[derive(Debug, Clone)]
pub struct PairwiseConfig {
    pub binning: BinningSpec,
    pub sampling: PairSampling,
    pub distance_mode: DistanceMode,
    /// Minimum co-present samples per pair after pairwise deletion.
    pub sample_floor: usize,
    /// Pairs whose two nMI orientations differ by more than this are flagged.
    pub orientation_tol: f64,
}

impl Default for PairwiseConfig {
    fn default() -> Self {
        Self {
            binning: BinningSpec::default(),
            sampling: PairSampling::AllPairs,
            distance_mode: DistanceMode::Haversine,
            sample_floor: DEFAULT_SAMPLE_FLOOR,
            orientation_tol: 0.05,
        }
    }
}

/// One curve point: all pixel pairs at (bitwise) the same separation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialPoint {
    pub distance_km: f64,
    /// Mean nMI over the contributing pairs (each pair already averages its
    /// two orientations).
    pub nmi: f64,
    pub pair_count: usize,
}

#[derive(Debug, Clone)]
pub struct SpatialMICurve {
    /// Sorted by distance; strictly positive distances.
    pub points: Vec<SpatialPoint>,
    pub sampling: PairSampling,
    pub skipped_pairs: usize,
    /// Pairs whose orientation asymmetry exceeded the tolerance.
    pub flagged_pairs: usize,
}

impl SpatialMICurve {
    pub fn from_points(points: Vec<SpatialPoint>) -> Self {
        let mut points = points;
        points.sort_by(|a, b| a.distance_km.partial_cmp(&b.distance_km).unwrap());
        Self {
            points,
            sampling: PairSampling::AllPairs,
            skipped_pairs: 0,
            flagged_pairs: 0,
        }
    }

    pub fn total_pairs(&self) -> usize {
        self.points.iter().map(|p| p.pair_count).sum()
    }

    /// Distance-bin averaged view for plots; the fit never uses it.
    pub fn binned(&self, bin_width_km: f64) -> Vec<SpatialPoint> {
        let mut bins: std::collections::BTreeMap<i64, (f64, f64, usize)> = Default::default();
        for p in &self.points {
            let key = (p.distance_km / bin_width_km).floor() as i64;
            let e = bins.entry(key).or_insert((0.0, 0.0, 0));
            e.0 += p.distance_km * p.pair_count as f64;
            e.1 += p.nmi * p.pair_count as f64;
            e.2 += p.pair_count;
        }
        bins.values()
            .map(|&(dsum, nsum, n)| SpatialPoint {
                distance_km: dsum / n as f64,
                nmi: nsum / n as f64,
                pair_count: n,
            })
            .collect()
    }
}

/// Compute per-pair nMI against separation for every retained pixel pair.
///
/// Each pair contributes the mean of its two orientations (nMI normalizes by
/// H of the first argument, so the two directions differ in general). Points
/// at identical distances are merged with their multiplicity kept as
/// `pair_count`; a least-squares fit weighted by `pair_count` is exactly the
/// fit over the raw per-pair scatter.
pub fn pairwise_nmi(
    set: &GridSeriesSet,
    config: &PairwiseConfig,
) -> Result<SpatialMICurve, SpatialError> {
    let ids: Vec<u32> = set.pixel_ids().collect();
    if ids.len() < 2 {
        return Err(SpatialError::NotEnoughPixels(ids.len()));
    }

    // per-pixel edges built once from each full series
    let mut edges: Vec<Option<BinEdges>> = Vec::with_capacity(ids.len());
    for &id in &ids {
        let e = match build_edges(set.values(id).unwrap(), &config.binning) {
            Ok(e) => Some(e),
            Err(InfoError::DegenerateSample) | Err(InfoError::TooFewSamples { .. }) => None,
            Err(e) => return Err(e.into()),
        };
        edges.push(e);
    }

    let mut pairs: Vec<(usize, usize, f64)> = Vec::new();
    for i in 0..ids.len() {
        for j in (i + 1)..ids.len() {
            let a = set.geometry.pixel(ids[i]).unwrap();
            let b = set.geometry.pixel(ids[j]).unwrap();
            let d = pixel_distance(a, b, config.distance_mode)?;
            pairs.push((i, j, d));
        }
    }
    let n_candidates = pairs.len();
    let pairs = select_pairs(pairs, config.sampling);

    struct PairOutcome {
        distance_km: f64,
        nmi: f64,
        flagged: bool,
    }

    let outcomes: Vec<Option<PairOutcome>> = pairs
        .par_iter()
        .map(|&(i, j, d)| {
            if d <= 0.0 {
                return Ok(None);
            }
            let (Some(ex), Some(ey)) = (&edges[i], &edges[j]) else {
                return Ok(None);
            };
            let x = set.values(ids[i]).unwrap();
            let y = set.values(ids[j]).unwrap();
            let hist = match joint_histogram(x, y, ex, ey) {
                Ok(h) => h,
                Err(InfoError::EmptyAfterDeletion) => return Ok(None),
                Err(e) => return Err(SpatialError::from(e)),
            };
            if (hist.n_total as usize) < config.sample_floor {
                return Ok(None);
            }
            let r = mutual_information(&hist)?;
            if r.h_x_bits == 0.0 || r.h_y_bits == 0.0 {
                return Ok(None);
            }
            let nmi_xy = r.mi_bits / r.h_x_bits;
            let nmi_yx = r.mi_bits / r.h_y_bits;
            Ok(Some(PairOutcome {
                distance_km: d,
                nmi: 0.5 * (nmi_xy + nmi_yx),
                flagged: (nmi_xy - nmi_yx).abs() > config.orientation_tol,
            }))
        })
        .collect::<Result<_, SpatialError>>()?;

    let skipped = outcomes.iter().filter(|o| o.is_none()).count();
    let flagged = outcomes.iter().flatten().filter(|o| o.flagged).count();

    // merge pairs at bitwise-identical distances, keeping multiplicity
    let mut grouped: std::collections::BTreeMap<i64, (f64, f64, usize)> = Default::default();
    for o in outcomes.into_iter().flatten() {
        let key = (o.distance_km * 1e9).round() as i64;
        let e = grouped.entry(key).or_insert((o.distance_km, 0.0, 0));
        e.1 += o.nmi;
        e.2 += 1;
    }
    if grouped.is_empty() {
        return Err(SpatialError::AllPairsSkipped(n_candidates));
    }
    let points: Vec<SpatialPoint> = grouped
        .values()
        .map(|&(d, nmi_sum, n)| SpatialPoint {
            distance_km: d,
            nmi: nmi_sum / n as f64,
            pair_count: n,
        })
        .collect();

    Ok(SpatialMICurve {
        points,
        sampling: config.sampling,
        skipped_pairs: skipped,
        flagged_pairs: flagged,
    })
}

fn select_pairs(
    mut pairs: Vec<(usize, usize, f64)>,
    sampling: PairSampling,
) -> Vec<(usize, usize, f64)> {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;

    let PairSampling::RandomPairs { m, seed } = sampling else {
        return pairs;
    };
    if m >= pairs.len() {
        return pairs;
    }
    pairs.sort_by(|a, b| a.2.partial_cmp(&b.2).unwrap());
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n_strata = 10usize.min(pairs.len());
    let per_stratum = m / n_strata;
    let mut remainder = m % n_strata;
    let mut selected = Vec::with_capacity(m);
    let stratum_len = pairs.len() / n_strata;
    for s in 0..n_strata {
        let lo = s * stratum_len;
        let hi = if s == n_strata - 1 {
            pairs.len()
        } else {
            lo + stratum_len
        };
        let mut want = per_stratum;
        if remainder > 0 {
            want += 1;
            remainder -= 1;
        }
        let stratum = &pairs[lo..hi];
        let take = want.min(stratum.len());
        let mut idx: Vec<usize> = (0..stratum.len()).collect();
        idx.shuffle(&mut rng);
        for &k in idx.iter().take(take) {
            selected.push(stratum[k]);
        }
    }
    // deterministic downstream order regardless of shuffle
    selected.sort_by_key(|p| (p.0, p.1));
    selected
}

/// Fitted a·exp(-d/b) + c parameters.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ExpDecayFit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub rss: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl ExpDecayFit {
    pub fn evaluate(&self, d: f64) -> f64 {
        self.a * (-d / self.b).exp() + self.c
    }
}

const FIT_MAX_ITERATIONS: usize = 200;
const FIT_PARAM_TOL: f64 = 1e-8;
const FIT_DAMPING_CEILING: f64 = 1e12;

/// Weighted least-squares fit of f(d) = a·exp(-d/b) + c by damped
/// Gauss-Newton: the damping is raised when a step increases the residual
/// sum and shrunk when it decreases. Convergence is declared when the
/// relative parameter change of an accepted step falls below 1e-8.
pub fn fit_exp_decay(
    curve: &SpatialMICurve,
    init: Option<(f64, f64, f64)>,
) -> Result<ExpDecayFit, SpatialError> {
    let pts = &curve.points;
    let distinct = pts.len();
    if distinct < 4 {
        return Err(SpatialError::DegenerateCurve(format!(
            "need >= 4 distinct distances, got {distinct}"
        )));
    }
    let y_min = pts.iter().map(|p| p.nmi).fold(f64::INFINITY, f64::min);
    let y_max = pts.iter().map(|p| p.nmi).fold(f64::NEG_INFINITY, f64::max);
    if y_max - y_min < 1e-9 {
        return Err(SpatialError::DegenerateCurve(
            "flat nMI curve carries no decay to fit".into(),
        ));
    }

    let (mut a, mut b, mut c) = match init {
        Some(p) => p,
        None => default_init(pts),
    };
    if b <= 0.0 {
        b = median_distance(pts);
    }

    let weights: Vec<f64> = pts.iter().map(|p| p.pair_count as f64).collect();
    let rss = |a: f64, b: f64, c: f64| -> f64 {
        pts.iter()
            .zip(&weights)
            .map(|(p, w)| {
                let r = p.nmi - (a * (-p.distance_km / b).exp() + c);
                w * r * r
            })
            .sum()
    };

    let mut current_rss = rss(a, b, c);
    let mut damping = 1e-3;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < FIT_MAX_ITERATIONS {
        iterations += 1;
        // normal equations J^T W J + damping*I, J^T W r
        let mut ata = [[0.0f64; 3]; 3];
        let mut atr = [0.0f64; 3];
        for (p, w) in pts.iter().zip(&weights) {
            let e = (-p.distance_km / b).exp();
            let f = a * e + c;
            let r = p.nmi - f;
            let jac = [e, a * p.distance_km / (b * b) * e, 1.0];
            for m in 0..3 {
                for n in 0..3 {
                    ata[m][n] += w * jac[m] * jac[n];
                }
                atr[m] += w * jac[m] * r;
            }
        }
        for m in 0..3 {
            ata[m][m] += damping;
        }
        let Some(step) = solve3(ata, atr) else {
            damping *= 10.0;
            if damping > FIT_DAMPING_CEILING {
                return Err(SpatialError::FitDiverged { iterations });
            }
            continue;
        };
        let rel_change = step
            .iter()
            .zip([a, b, c])
            .map(|(s, p)| (s / (p.abs() + 1e-12)).abs())
            .fold(0.0, f64::max);
        let (na, nb, nc) = (a + step[0], b + step[1], c + step[2]);
        let new_rss = if nb > 0.0 {
            rss(na, nb, nc)
        } else {
            f64::INFINITY
        };
        if new_rss.is_finite() && new_rss < current_rss {
            a = na;
            b = nb;
            c = nc;
            current_rss = new_rss;
            damping = (damping * 0.3).max(1e-14);
            if rel_change < FIT_PARAM_TOL {
                converged = true;
                break;
            }
        } else if rel_change < FIT_PARAM_TOL {
            // the feasible step has shrunk below the parameter tolerance:
            // the iteration is at a rest point
            converged = true;
            break;
        } else {
            damping *= 10.0;
            if damping > FIT_DAMPING_CEILING {
                return Err(SpatialError::FitDiverged { iterations });
            }
        }
    }

    Ok(ExpDecayFit {
        a,
        b,
        c,
        rss: current_rss,
        iterations,
        converged,
    })
}

fn median_distance(pts: &[SpatialPoint]) -> f64 {
    let mut d: Vec<f64> = pts.iter().map(|p| p.distance_km).collect();
    d.sort_by(|a, b| a.partial_cmp(b).unwrap());
    d[d.len() / 2]
}

/// c0 = mean nMI over the farthest 20% of distances, a0 = max(nMI) - c0,
/// b0 = first distance where nMI drops below c0 + a0/e (fallback: median).
fn default_init(pts: &[SpatialPoint]) -> (f64, f64, f64) {
    let n = pts.len();
    let tail = (n as f64 * 0.2).ceil() as usize;
    let tail = tail.clamp(1, n);
    let c0 = pts[n - tail..].iter().map(|p| p.nmi).sum::<f64>() / tail as f64;
    let y_max = pts.iter().map(|p| p.nmi).fold(f64::NEG_INFINITY, f64::max);
    let a0 = (y_max - c0).max(1e-6);
    let threshold = c0 + a0 / std::f64::consts::E;
    let b0 = pts
        .iter()
        .find(|p| p.nmi < threshold)
        .map(|p| p.distance_km)
        .unwrap_or_else(|| median_distance(pts));
    (a0, b0.max(f64::MIN_POSITIVE), c0)
}

/// Gaussian elimination with partial pivoting on a 3x3 system.
fn solve3(mut m: [[f64; 3]; 3], mut rhs: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let pivot =
            (col..3).max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())?;
        if m[pivot][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in (col + 1)..3 {
            let f = m[row][col] / m[col][col];
            for k in col..3 {
                m[row][k] -= f * m[col][k];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let mut s = rhs[row];
        for k in (row + 1)..3 {
            s -= m[row][k] * x[k];
        }
        x[row] = s / m[row][row];
    }
    if x.iter().all(|v| v.is_finite()) {
        Some(x)
    } else {
        None
    }
}

/// Spatial decorrelation distance in km and in pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaResult {
    pub delta_km: f64,
    pub delta_pixels: f64,
    pub method_note: String,
}

/// The tangent of the fit at d = 0 meets the asymptote y = c where
/// a = (a/b)·d, i.e. at d = b: the extraction reduces to the decay length.
pub fn extract_delta(fit: &ExpDecayFit, grid_spacing_km: f64) -> Result<DeltaResult, SpatialError> {
    if !fit.converged || !(fit.b > 0.0) {
        return Err(SpatialError::UnconvergedFit);
    }
    Ok(DeltaResult {
        delta_km: fit.b,
        delta_pixels: fit.b / grid_spacing_km,
        method_note: "intersection of the zero-distance tangent with the nMI asymptote; \
                      analytically equal to the fitted decay length"
            .to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridseries::{GridGeometry, GridSeriesSet, PixelMeta};
    use chrono::{DateTime, TimeDelta, Utc};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeMap;

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

    fn set_from_series(series: Vec<(u32, f64, f64, Vec<f64>)>) -> GridSeriesSet {
        let pixels = series
            .iter()
            .map(|(id, x, y, _)| planar_pixel(*id, *x, *y))
            .collect();
        let geometry = GridGeometry::new(pixels, Some(2.5)).unwrap();
        let n = series[0].3.len();
        let t0 = DateTime::parse_from_rfc3339("2020-01-01T00:00:00Z")
            .unwrap()
            .with_timezone(&Utc);
        let timestamps = (0..n).map(|i| t0 + TimeDelta::hours(i as i64)).collect();
        let map: BTreeMap<u32, Vec<f64>> =
            series.into_iter().map(|(id, _, _, v)| (id, v)).collect();
        GridSeriesSet::new(geometry, timestamps, TimeDelta::hours(1), map).unwrap()
    }

    fn planar_config() -> PairwiseConfig {
        PairwiseConfig {
            distance_mode: DistanceMode::Planar,
            ..Default::default()
        }
    }

    #[test]
    fn identical_series_give_full_nmi_point() {
        let values: Vec<f64> = (0..400)
            .map(|i| (i as f64 * 0.37).sin() * 100.0 + 200.0)
            .collect();
        let set = set_from_series(vec![(0, 0.0, 0.0, values.clone()), (1, 5.0, 0.0, values)]);
        let curve = pairwise_nmi(&set, &planar_config()).unwrap();
        assert_eq!(curve.points.len(), 1);
        let p = curve.points[0];
        assert_eq!(p.distance_km, 5.0);
        assert!((p.nmi - 1.0).abs() < 1e-12);
        assert_eq!(p.pair_count, 1);
    }

    #[test]
    fn three_pixels_give_three_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mk = |rng: &mut ChaCha8Rng| -> Vec<f64> {
            (0..300).map(|_| rng.random::<f64>() * 500.0).collect()
        };
        let set = set_from_series(vec![
            (0, 0.0, 0.0, mk(&mut rng)),
            (1, 2.5, 0.0, mk(&mut rng)),
            (2, 0.0, 7.5, mk(&mut rng)),
        ]);
        let curve = pairwise_nmi(&set, &planar_config()).unwrap();
        assert_eq!(curve.total_pairs(), 3);
    }

    #[test]
    fn too_few_pixels_rejected() {
        let set = set_from_series(vec![(0, 0.0, 0.0, vec![1.0; 200])]);
        assert!(matches!(
            pairwise_nmi(&set, &planar_config()),
            Err(SpatialError::NotEnoughPixels(1))
        ));
    }

    #[test]
    fn sample_floor_skips_short_pairs() {
        let set = set_from_series(vec![
            (0, 0.0, 0.0, (0..50).map(|i| i as f64).collect()),
            (1, 2.5, 0.0, (0..50).map(|i| (i * 3) as f64).collect()),
        ]);
        assert!(matches!(
            pairwise_nmi(&set, &planar_config()),
            Err(SpatialError::AllPairsSkipped(1))
        ));
    }

    #[test]
    fn insertion_order_does_not_change_curve() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let series: Vec<Vec<f64>> = (0..4)
            .map(|_| (0..300).map(|_| rng.random::<f64>() * 900.0).collect())
            .collect();
        let coords = [(0.0, 0.0), (2.5, 0.0), (5.0, 0.0), (0.0, 2.5)];
        let forward: Vec<(u32, f64, f64, Vec<f64>)> = (0..4)
            .map(|i| (i as u32, coords[i].0, coords[i].1, series[i].clone()))
            .collect();
        let reversed: Vec<(u32, f64, f64, Vec<f64>)> = forward.iter().rev().cloned().collect();
        let a = pairwise_nmi(&set_from_series(forward), &planar_config()).unwrap();
        let b = pairwise_nmi(&set_from_series(reversed), &planar_config()).unwrap();
        assert_eq!(a.points, b.points);
    }

    fn synthetic_curve(a: f64, b: f64, c: f64, noise: f64, seed: u64) -> SpatialMICurve {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points = (1..=40)
            .map(|i| {
                let d = i as f64 * 0.5;
                let eps = if noise > 0.0 {
                    use rand_distr::{Distribution, StandardNormal};
                    let z: f64 = StandardNormal.sample(&mut rng);
                    z * noise
                } else {
                    0.0
                };
                SpatialPoint {
                    distance_km: d,
                    nmi: a * (-d / b).exp() + c + eps,
                    pair_count: 1,
                }
            })
            .collect();
        SpatialMICurve::from_points(points)
    }

    #[test]
    fn fit_recovers_noiseless_parameters() {
        let curve = synthetic_curve(0.10, 2.5, 0.0085, 0.0, 0);
        let fit = fit_exp_decay(&curve, None).unwrap();
        assert!(fit.converged);
        assert!((fit.a - 0.10).abs() / 0.10 < 1e-6, "a = {}", fit.a);
        assert!((fit.b - 2.5).abs() / 2.5 < 1e-6, "b = {}", fit.b);
        assert!((fit.c - 0.0085).abs() / 0.0085 < 1e-6, "c = {}", fit.c);
    }

    #[test]
    fn fit_flat_curve_is_degenerate() {
        let points = (1..=20)
            .map(|i| SpatialPoint {
                distance_km: i as f64,
                nmi: 0.2,
                pair_count: 1,
            })
            .collect();
        let curve = SpatialMICurve::from_points(points);
        assert!(matches!(
            fit_exp_decay(&curve, None),
            Err(SpatialError::DegenerateCurve(_))
        ));
    }

    #[test]
    fn fit_with_seeded_noise_recovers_decay_length_within_10_percent() {
        let curve = synthetic_curve(0.10, 2.5, 0.0085, 0.01, 424242);
        let fit = fit_exp_decay(&curve, None).unwrap();
        assert!(fit.converged);
        assert!(
            (fit.b - 2.5).abs() / 2.5 < 0.10,
            "b = {} strays more than 10% from 2.5",
            fit.b
        );
    }

    #[test]
    fn delta_equals_fitted_decay_length_and_fit_is_locally_optimal() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..100 {
            let a = rng.random::<f64>() * 0.5 + 0.05;
            let b = rng.random::<f64>() * 8.0 + 0.5;
            let c = rng.random::<f64>() * 0.05;
            let curve = synthetic_curve(a, b, c, 0.0, 0);
            let fit = fit_exp_decay(&curve, None).unwrap();
            assert!(fit.converged);
            let delta = extract_delta(&fit, 2.5).unwrap();
            assert_eq!(delta.delta_km, fit.b);
            assert_eq!(delta.delta_pixels, fit.b / 2.5);
            // 1% single-parameter perturbations never improve the residual
            let rss = |a: f64, b: f64, c: f64| -> f64 {
                curve
                    .points
                    .iter()
                    .map(|p| {
                        let r = p.nmi - (a * (-p.distance_km / b).exp() + c);
                        p.pair_count as f64 * r * r
                    })
                    .sum()
            };
            for scale in [0.99, 1.01] {
                assert!(rss(fit.a * scale, fit.b, fit.c) >= fit.rss - 1e-12);
                assert!(rss(fit.a, fit.b * scale, fit.c) >= fit.rss - 1e-12);
                assert!(rss(fit.a, fit.b, fit.c * scale) >= fit.rss - 1e-12);
            }
        }
    }

    #[test]
    fn delta_in_pixels_divides_by_spacing() {
        let fit = ExpDecayFit {
            a: 0.2,
            b: 7.0,
            c: 0.05,
            rss: 0.0,
            iterations: 1,
            converged: true,
        };
        let delta = extract_delta(&fit, 2.5).unwrap();
        assert!((delta.delta_pixels - 2.8).abs() < 1e-12);
    }

    #[test]
    fn unconverged_fit_rejected() {
        let fit = ExpDecayFit {
            a: 0.1,
            b: 2.5,
            c: 0.0,
            rss: 1.0,
            iterations: 200,
            converged: false,
        };
        assert!(matches!(
            extract_delta(&fit, 2.5),
            Err(SpatialError::UnconvergedFit)
        ));
    }

    #[test]
    fn rescaling_distances_rescales_delta() {
        let base = synthetic_curve(0.3, 4.0, 0.02, 0.0, 0);
        let fit_base = fit_exp_decay(&base, None).unwrap();
        let scaled = SpatialMICurve::from_points(
            base.points
                .iter()
                .map(|p| SpatialPoint {
                    distance_km: p.distance_km * 3.0,
                    ..*p
                })
                .collect(),
        );
        let fit_scaled = fit_exp_decay(&scaled, None).unwrap();
        assert!(
            (fit_scaled.b - 3.0 * fit_base.b).abs() / (3.0 * fit_base.b) < 1e-6,
            "scaled b = {}, base b = {}",
            fit_scaled.b,
            fit_base.b
        );
    }

    #[test]
    fn converged_fit_is_a_local_minimum() {
        for seed in [1u64, 2, 3] {
            let curve = synthetic_curve(0.15, 3.0, 0.01, 0.01, seed);
            let fit = fit_exp_decay(&curve, None).unwrap();
            assert!(fit.converged);
            let rss = |a: f64, b: f64, c: f64| -> f64 {
                curve
                    .points
                    .iter()
                    .map(|p| {
                        let r = p.nmi - (a * (-p.distance_km / b).exp() + c);
                        p.pair_count as f64 * r * r
                    })
                    .sum()
            };
            for scale in [0.99, 1.01] {
                assert!(rss(fit.a * scale, fit.b, fit.c) >= fit.rss - 1e-12);
                assert!(rss(fit.a, fit.b * scale, fit.c) >= fit.rss - 1e-12);
                assert!(rss(fit.a, fit.b, fit.c * scale) >= fit.rss - 1e-12);
            }
        }
    }

    #[test]
    fn exponential_kernel_field_gives_decaying_curve() {
        let set = crate::synth::gen_spatial_field(&crate::synth::SpatialGenSpec {
            nx: 6,
            ny: 6,
            spacing_km: 2.5,
            corr_length_km: 5.0,
            n_steps: 1500,
            seed: 61,
        })
        .unwrap();
        let curve = pairwise_nmi(&set, &planar_config()).unwrap();
        let means = curve.binned(2.5);
        assert!(means.len() >= 4);
        // Spearman rank correlation of bin-mean nMI against distance < 0
        let n = means.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| means[a].nmi.partial_cmp(&means[b].nmi).unwrap());
        let mut rank = vec![0usize; n];
        for (r, &i) in order.iter().enumerate() {
            rank[i] = r;
        }
        let nf = n as f64;
        let d2: f64 = (0..n)
            .map(|i| {
                let d = i as f64 - rank[i] as f64;
                d * d
            })
            .sum();
        let spearman = 1.0 - 6.0 * d2 / (nf * (nf * nf - 1.0));
        assert!(
            spearman < 0.0,
            "nMI should decay with distance, spearman = {spearman}"
        );
    }

    #[test]
    fn random_pair_sampling_is_deterministic_and_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let series: Vec<(u32, f64, f64, Vec<f64>)> = (0..8)
            .map(|i| {
                (
                    i as u32,
                    (i % 4) as f64 * 2.5,
                    (i / 4) as f64 * 2.5,
                    (0..200).map(|_| rng.random::<f64>() * 700.0).collect(),
                )
            })
            .collect();
        let set = set_from_series(series);
        let config = PairwiseConfig {
            sampling: PairSampling::RandomPairs { m: 10, seed: 5 },
            ..planar_config()
        };
        let a = pairwise_nmi(&set, &config).unwrap();
        let b = pairwise_nmi(&set, &config).unwrap();
        assert_eq!(a.points, b.points);
        assert!(a.total_pairs() <= 10);
    }
}
