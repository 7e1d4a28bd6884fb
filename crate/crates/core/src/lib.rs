//! Classical time-series forecasting: transforms, decomposition, diagnostics,
//! naive baselines, exponential smoothing, ARIMA and regression.

pub mod arima;
pub mod baseline;
pub mod cli;
pub mod decompose;
pub mod diagnostics;
pub mod error;
pub mod expsmooth;
mod linalg;
pub mod optim;
pub mod plot;
pub mod regress;
pub mod series;
pub mod simulate;
pub mod stats;
pub mod transform;

pub use error::{Error, Result};
