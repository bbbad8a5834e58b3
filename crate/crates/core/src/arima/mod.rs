//! Box-Jenkins pipeline: unit-root testing, correlograms, order selection,
//! conditional-sum-of-squares estimation and forecasting.

mod adf;
mod correlogram;
mod fit;
mod forecast;
mod linalg;
mod order;
mod simulate;

pub use adf::{
    adf_statistic, adf_test, adf_test_with_table, build_adf_table, build_adf_table_with_jobs,
    df_statistic, schwert_lags,
    AdfRegression, AdfResult, AdfTable, Stationarity, ADF_ALPHA, DEFAULT_PROBABILITIES,
    DEFAULT_SAMPLE_SIZES,
};
pub use correlogram::{
    acf, default_max_lag, pacf, pacf_from_acf, write_correlogram, AcfResult, PacfResult,
};
pub use fit::{fit, fit_with, ArimaModel, ArimaSpec, FitOptions, FitWarning};
pub use forecast::{
    evaluate, forecast, integrate_forecast, one_step_predictions, write_forecast, Evaluation,
};
pub use linalg::{ols, Ols};
pub use order::{cutoff_lag, suggest_order, MAX_ORDER_LAG};
pub use simulate::simulate_arima;

use crate::series::SeriesError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ArimaError {
    #[error("series too short: need at least {needed} values, have {len}")]
    TooShort { needed: usize, len: usize },
    #[error("series has zero variance")]
    ZeroVariance,
    #[error("Durbin-Levinson recursion broke down at lag {lag}")]
    NumericalBreakdown { lag: usize },
    #[error("singular regression design")]
    SingularRegression,
    #[error("invalid ARIMA order: {0}")]
    InvalidSpec(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("ADF table: {0}")]
    Table(String),
    #[error(transparent)]
    Series(#[from] SeriesError),
}
