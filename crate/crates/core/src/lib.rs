//! Call-detail-record analytics: ingestion of the CRAWDAD, Nodobo and
//! Telecom Italia schemas, activity bucketing, k-means anomaly detection,
//! anomaly scrubbing, a small feed-forward network for measuring the effect
//! of anomalies on training, and a Box-Jenkins ARIMA pipeline.
//!
//! Every stage exchanges [`ActivitySeries`] values; the CLI crate wires the
//! stages together through plain CSV files.

pub mod arima;
pub mod cluster;
pub mod ingest;
pub mod mlp;
pub mod scrub;
pub mod seed;
pub mod series;
pub mod synth;
pub mod time;

mod error;

pub use cluster::{
    best_of_restarts, detect_anomalies, kmeans, ActiveWindow, Anomaly, AnomalyReason,
    AnomalyReport, ClusterModel, DetectConfig, KMeansConfig,
};
pub use error::{classify, Error, ErrorClass};
pub use ingest::{
    preprocess, AggregatedActivity, CdrEvent, Direction, Format, IngestReport, Kind, MalformedRow,
};
pub use mlp::{compare_anomaly_effect, FitReport, MlpModel, SupervisedSet, TrainConfig};
pub use scrub::{make_anomaly_free, ScrubbedSeries};
pub use series::{ActivitySeries, DifferencedSeries, Metric};
