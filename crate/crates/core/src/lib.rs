//! Decides between stochastic time-series forecasting and numerical weather
//! prediction for gridded solar irradiance at a given location, spatial
//! resolution, temporal step, and forecast horizon.
//!
//! The decision ratio is delta/tau in pixel·time_lag^-1, where delta is the
//! spatial decorrelation distance (exponential-decay fit of normalized mutual
//! information against pixel separation) and tau is the temporal
//! decorrelation lag (first minimum of the auto-mutual-information curve),
//! rescaled by the forecast horizon. Values well below one favor stochastic
//! models, values well above one favor NWP.

pub mod criterion;
pub mod gridseries;
pub mod infotheory;
pub mod spatial;
pub mod synth;
pub mod temporal;

pub use criterion::{chi, classify, ChiThresholds, Classification};
pub use gridseries::{GridGeometry, GridSeriesSet};
pub use infotheory::{normalized_mi, BinningSpec, MIResult};
pub use spatial::{extract_delta, fit_exp_decay, pairwise_nmi, DeltaResult};
pub use temporal::{auto_mi, first_minimum, tau_statistics, TauStats};
