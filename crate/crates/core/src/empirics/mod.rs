//! Sliding-interval estimators for real or simulated daily series.
//!
//! The pipeline is the same for both: detrend log-prices, form overlapping
//! lag-T returns, then estimate return PDFs, the scaling collapse, the
//! volatility autocorrelation with its power-law exponent, moment-scaling
//! exponents and effective-dimension curves.

pub mod autocorr;
pub mod collapse;
pub mod histogram;
pub mod moments;
pub mod series;

pub use autocorr::{fit_power_law, fit_power_law_robust, volatility_autocorr, AutocorrCurve, RobustPowerLawFit};
pub use collapse::{collapse_metric, fit_collapse_exponent};
pub use histogram::{empirical_pdf, HistogramConfig, HistogramPdf};
pub use moments::{effective_dimension_curve, moment_scaling, MomentTable};
pub use series::{
    detrend, detrend_log_prices, ingest_csv, sliding_returns, DetrendedSeries, PriceSeries,
    ReturnSample,
};
