//! Forecasting of high-dimensional, non-stationary multivariate time series.
//!
//! Observations are embedded to one dimension with PCA or RBF kernel PCA
//! ([`embedding`]) and the resulting univariate series is forecast one step
//! ahead by a first-order non-stationary fuzzy time series model whose sets
//! drift and widen with the recent residuals ([`nsfts`]). [`evaluation`]
//! provides the sliding-window backtest, persistence baseline, skill scores
//! and grid search; [`data_io`] covers CSV ingestion, synthetic drift fixtures
//! and model persistence.
//!
//! ```
//! use ensfts::nsfts::{train, NsftsParams};
//!
//! let series: Vec<f64> = (0..60).map(|t| (t as f64 / 6.0).sin()).collect();
//! let mut model = train(&series[..45], NsftsParams::new(7, 3)).unwrap();
//! let forecasts = model.predict_series(series[44], &series[45..], true);
//! assert_eq!(forecasts.len(), 15);
//! ```

pub mod data_io;
pub mod embedding;
pub mod error;
pub mod evaluation;
pub mod linalg;
pub mod nsfts;
pub mod parallel;

pub use error::{Error, Result};
pub use parallel::Execution;
