//! Histogram-based plug-in estimators for entropy, conditional entropy,
//! mutual information, and normalized mutual information.
//!
//! All quantities use the binary logarithm, so entropies and MI are in bits.
//! Empty cells contribute zero (0·log 0 := 0). Missing values are encoded as
//! NaN and removed by pairwise deletion before histogramming; the drop count
//! is carried on the histogram. No bias correction is applied: these are the
//! plain plug-in estimators, and their bias is characterized by tests.

use thiserror::Error;

/// Floor on co-present sample pairs used by the higher-level curve builders.
pub const DEFAULT_SAMPLE_FLOOR: usize = 100;

#[derive(Debug, Error, PartialEq)]
pub enum InfoError {
    #[error("all samples are equal; cannot derive a data-driven bin range")]
    DegenerateSample,
    #[error("need at least {needed} finite samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("input lengths differ: {x} vs {y}")]
    LengthMismatch { x: usize, y: usize },
    #[error("no sample pairs remain after pairwise deletion")]
    EmptyAfterDeletion,
    #[error("histogram holds no counts")]
    EmptyHistogram,
    #[error("invalid binning spec: {0}")]
    InvalidBinSpec(String),
}

/// How to choose the number of bins.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BinningRule {
    FixedCount(usize),
    Sturges,
    FreedmanDiaconis,
}

/// How to choose the binned range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RangePolicy {
    DataMinMax,
    Explicit { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinningSpec {
    pub rule: BinningRule,
    pub range_policy: RangePolicy,
}

impl Default for BinningSpec {
    fn default() -> Self {
        Self {
            rule: BinningRule::Sturges,
            range_policy: RangePolicy::DataMinMax,
        }
    }
}

impl BinningSpec {
    pub fn fixed(n: usize) -> Self {
        Self {
            rule: BinningRule::FixedCount(n),
            range_policy: RangePolicy::DataMinMax,
        }
    }

    fn validate(&self) -> Result<(), InfoError> {
        if let BinningRule::FixedCount(n) = self.rule {
            if n < 2 {
                return Err(InfoError::InvalidBinSpec(format!(
                    "FixedCount needs n >= 2, got {n}"
                )));
            }
        }
        if let RangePolicy::Explicit { lo, hi } = self.range_policy {
            if !(lo < hi) {
                return Err(InfoError::InvalidBinSpec(format!(
                    "explicit range needs lo < hi, got [{lo}, {hi}]"
                )));
            }
        }
        Ok(())
    }
}

/// Ordered bin boundaries: k+1 strictly increasing edges for k bins.
/// The last bin is closed on both sides so the maximum sample is counted.
#[derive(Debug, Clone, PartialEq)]
pub struct BinEdges {
    edges: Vec<f64>,
}

impl BinEdges {
    pub fn from_edges(edges: Vec<f64>) -> Result<Self, InfoError> {
        if edges.len() < 3 {
            return Err(InfoError::InvalidBinSpec(
                "need at least 3 edges (2 bins)".into(),
            ));
        }
        if edges.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(InfoError::InvalidBinSpec(
                "edges must be strictly increasing".into(),
            ));
        }
        Ok(Self { edges })
    }

    /// Uniform edges over [lo, hi]; the final edge is set to `hi` exactly.
    pub fn uniform(lo: f64, hi: f64, bins: usize) -> Result<Self, InfoError> {
        if !(lo < hi) || bins < 2 {
            return Err(InfoError::InvalidBinSpec(format!(
                "uniform edges need lo < hi and bins >= 2 (lo={lo}, hi={hi}, bins={bins})"
            )));
        }
        let width = (hi - lo) / bins as f64;
        let mut edges: Vec<f64> = (0..bins).map(|i| lo + width * i as f64).collect();
        edges.push(hi);
        Self::from_edges(edges)
    }

    pub fn bin_count(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn lo(&self) -> f64 {
        self.edges[0]
    }

    pub fn hi(&self) -> f64 {
        *self.edges.last().unwrap()
    }

    /// Bin index for `v`, or None when `v` is NaN or outside the range.
    /// Bins are half-open [e_i, e_{i+1}) except the last, which is closed.
    pub fn index_of(&self, v: f64) -> Option<usize> {
        if v.is_nan() || v < self.lo() || v > self.hi() {
            return None;
        }
        if v == self.hi() {
            return Some(self.bin_count() - 1);
        }
        // partition_point: first edge strictly greater than v
        let upper = self.edges.partition_point(|&e| e <= v);
        Some(upper - 1)
    }
}

fn finite(samples: &[f64]) -> Vec<f64> {
    samples.iter().copied().filter(|v| v.is_finite()).collect()
}

/// Interpolated quartile (linear, the common "type 7" rule) on sorted data.
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let frac = pos - lo as f64;
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    }
}

/// Build bin edges from data according to the binning spec.
///
/// Sturges gives `ceil(log2 n) + 1` bins. Freedman-Diaconis derives the bin
/// width from `2·IQR·n^(-1/3)` and falls back to Sturges when the IQR is zero.
pub fn build_edges(samples: &[f64], spec: &BinningSpec) -> Result<BinEdges, InfoError> {
    spec.validate()?;
    let vals = finite(samples);
    if vals.len() < 2 {
        return Err(InfoError::TooFewSamples {
            needed: 2,
            got: vals.len(),
        });
    }
    let (lo, hi) = match spec.range_policy {
        RangePolicy::Explicit { lo, hi } => (lo, hi),
        RangePolicy::DataMinMax => {
            let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if lo == hi {
                return Err(InfoError::DegenerateSample);
            }
            (lo, hi)
        }
    };
    let n = vals.len();
    let bins = match spec.rule {
        BinningRule::FixedCount(k) => k,
        BinningRule::Sturges => sturges_bins(n),
        BinningRule::FreedmanDiaconis => {
            let mut sorted = vals.clone();
            sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
            if iqr <= 0.0 {
                sturges_bins(n)
            } else {
                let width = 2.0 * iqr / (n as f64).powf(1.0 / 3.0);
                (((hi - lo) / width).ceil() as usize).max(2)
            }
        }
    };
    BinEdges::uniform(lo, hi, bins)
}

fn sturges_bins(n: usize) -> usize {
    ((n as f64).log2().ceil() as usize + 1).max(2)
}

/// Binned joint counts of two variables; the substrate of every MI estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct JointHistogram {
    counts: Vec<u64>, // row-major: counts[x * k_y + y]
    k_x: usize,
    k_y: usize,
    pub n_total: u64,
    pub n_dropped: u64,
    pub edges_x: BinEdges,
    pub edges_y: BinEdges,
}

impl JointHistogram {
    /// Build from a count matrix directly (rows index X, columns Y).
    /// Edges are synthesized as unit-width placeholders.
    pub fn from_counts(matrix: &[Vec<u64>]) -> Result<Self, InfoError> {
        let k_x = matrix.len();
        let k_y = matrix.first().map(|r| r.len()).unwrap_or(0);
        if k_x < 2 || k_y < 2 || matrix.iter().any(|r| r.len() != k_y) {
            return Err(InfoError::InvalidBinSpec(
                "count matrix must be rectangular, at least 2x2".into(),
            ));
        }
        let counts: Vec<u64> = matrix.iter().flatten().copied().collect();
        let n_total: u64 = counts.iter().sum();
        if n_total == 0 {
            return Err(InfoError::EmptyHistogram);
        }
        Ok(Self {
            counts,
            k_x,
            k_y,
            n_total,
            n_dropped: 0,
            edges_x: BinEdges::uniform(0.0, k_x as f64, k_x)?,
            edges_y: BinEdges::uniform(0.0, k_y as f64, k_y)?,
        })
    }

    pub fn count(&self, x: usize, y: usize) -> u64 {
        self.counts[x * self.k_y + y]
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.k_x, self.k_y)
    }

    /// Row sums: counts of X irrespective of Y.
    pub fn marginal_x(&self) -> Vec<u64> {
        let mut m = vec![0u64; self.k_x];
        for x in 0..self.k_x {
            for y in 0..self.k_y {
                m[x] += self.count(x, y);
            }
        }
        m
    }

    /// Column sums: counts of Y irrespective of X.
    pub fn marginal_y(&self) -> Vec<u64> {
        let mut m = vec![0u64; self.k_y];
        for x in 0..self.k_x {
            for y in 0..self.k_y {
                m[y] += self.count(x, y);
            }
        }
        m
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0u64; self.counts.len()];
        for x in 0..self.k_x {
            for y in 0..self.k_y {
                counts[y * self.k_x + x] = self.count(x, y);
            }
        }
        Self {
            counts,
            k_x: self.k_y,
            k_y: self.k_x,
            n_total: self.n_total,
            n_dropped: self.n_dropped,
            edges_x: self.edges_y.clone(),
            edges_y: self.edges_x.clone(),
        }
    }
}

/// Histogram two paired samples. Pairs where either value is missing (NaN)
/// or falls outside the edge range are dropped and counted in `n_dropped`.
pub fn joint_histogram(
    x: &[f64],
    y: &[f64],
    edges_x: &BinEdges,
    edges_y: &BinEdges,
) -> Result<JointHistogram, InfoError> {
    if x.len() != y.len() {
        return Err(InfoError::LengthMismatch {
            x: x.len(),
            y: y.len(),
        });
    }
    let (k_x, k_y) = (edges_x.bin_count(), edges_y.bin_count());
    let mut counts = vec![0u64; k_x * k_y];
    let mut n_total = 0u64;
    let mut n_dropped = 0u64;
    for (&xv, &yv) in x.iter().zip(y) {
        match (edges_x.index_of(xv), edges_y.index_of(yv)) {
            (Some(i), Some(j)) => {
                counts[i * k_y + j] += 1;
                n_total += 1;
            }
            _ => n_dropped += 1,
        }
    }
    if n_total == 0 {
        return Err(InfoError::EmptyAfterDeletion);
    }
    Ok(JointHistogram {
        counts,
        k_x,
        k_y,
        n_total,
        n_dropped,
        edges_x: edges_x.clone(),
        edges_y: edges_y.clone(),
    })
}

/// Plug-in Shannon entropy in bits: H = -Σ p log2 p over cells with count > 0.
pub fn entropy(counts: &[u64]) -> Result<f64, InfoError> {
    let n_total: u64 = counts.iter().sum();
    if n_total == 0 {
        return Err(InfoError::EmptyHistogram);
    }
    let n = n_total as f64;
    let mut h = 0.0;
    for &c in counts {
        if c > 0 {
            let p = c as f64 / n;
            h -= p * p.log2();
        }
    }
    Ok(h)
}

/// Conditional entropy H(X|Y) = Σ_x Σ_y p(x,y) log2(p(y) / p(x,y)), in bits.
/// Equals H(X,Y) - H(Y) up to rounding.
pub fn conditional_entropy(j: &JointHistogram) -> Result<f64, InfoError> {
    if j.n_total == 0 {
        return Err(InfoError::EmptyHistogram);
    }
    let n = j.n_total as f64;
    let my = j.marginal_y();
    let (k_x, k_y) = j.dims();
    let mut h = 0.0;
    for x in 0..k_x {
        for y in 0..k_y {
            let c = j.count(x, y);
            if c > 0 {
                let p_xy = c as f64 / n;
                let p_y = my[y] as f64 / n;
                h += p_xy * (p_y / p_xy).log2();
            }
        }
    }
    Ok(h)
}

/// Mutual information and the entropies around it, all in bits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MIResult {
    pub mi_bits: f64,
    pub h_x_bits: f64,
    pub h_y_bits: f64,
    pub h_x_given_y_bits: f64,
    /// MI / H(X); zero (with the flag below) when H(X) = 0.
    pub nmi: f64,
    pub degenerate_entropy: bool,
    pub n_used: u64,
    pub n_dropped: u64,
}

/// Plug-in mutual information via the joint-vs-product sum
/// MI = Σ p(x,y) log2( p(x,y) / (p(x)·p(y)) ).
///
/// The marginal and conditional entropies in the result come from their own
/// sums over the same histogram, so the identity MI = H(X) - H(X|Y) is a
/// genuine cross-check, not a restatement.
pub fn mutual_information(j: &JointHistogram) -> Result<MIResult, InfoError> {
    if j.n_total == 0 {
        return Err(InfoError::EmptyHistogram);
    }
    let n = j.n_total as f64;
    let mx = j.marginal_x();
    let my = j.marginal_y();
    let (k_x, k_y) = j.dims();
    let mut mi = 0.0;
    for x in 0..k_x {
        for y in 0..k_y {
            let c = j.count(x, y);
            if c > 0 {
                let p_xy = c as f64 / n;
                let p_x = mx[x] as f64 / n;
                let p_y = my[y] as f64 / n;
                mi += p_xy * (p_xy / (p_x * p_y)).log2();
            }
        }
    }
    let h_x = entropy(&mx)?;
    let h_y = entropy(&my)?;
    let h_x_given_y = conditional_entropy(j)?;
    let degenerate = h_x == 0.0;
    let nmi = if degenerate { 0.0 } else { mi / h_x };
    Ok(MIResult {
        mi_bits: mi,
        h_x_bits: h_x,
        h_y_bits: h_y,
        h_x_given_y_bits: h_x_given_y,
        nmi,
        degenerate_entropy: degenerate,
        n_used: j.n_total,
        n_dropped: j.n_dropped,
    })
}

/// Normalized mutual information nMI(X,Y) = MI(X,Y) / H(X) from raw samples.
///
/// Edges are built per variable from its own finite samples, and the joint
/// and marginals share those edges.
pub fn normalized_mi(x: &[f64], y: &[f64], spec: &BinningSpec) -> Result<MIResult, InfoError> {
    let ex = build_edges(x, spec)?;
    let ey = build_edges(y, spec)?;
    let j = joint_histogram(x, y, &ex, &ey)?;
    mutual_information(&j)
}
