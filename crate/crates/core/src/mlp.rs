//! One-hidden-layer network (tanh hidden units, linear output) trained by
//! full-batch gradient descent on lagged windows of an activity series.
//! Used to compare training on raw data against training on scrubbed data.

use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::scrub::ScrubbedSeries;
use crate::series::ActivitySeries;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MlpError {
    #[error("too short: {0}")]
    TooShort(String),
    #[error("length mismatch: {0} predictions vs {1} targets")]
    LengthMismatch(usize, usize),
    #[error("empty input")]
    EmptyInput,
    #[error("training diverged at epoch {epoch} (non-finite loss or parameters)")]
    NonFinite { epoch: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Sliding-window regression rows: `inputs[i] = series[i..i+w]`,
/// `targets[i] = series[i+w]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SupervisedSet {
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<f64>,
    pub window: usize,
}

impl SupervisedSet {
    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    fn slice(&self, range: std::ops::Range<usize>) -> SupervisedSet {
        SupervisedSet {
            inputs: self.inputs[range.clone()].to_vec(),
            targets: self.targets[range].to_vec(),
            window: self.window,
        }
    }
}

pub fn make_supervised(values: &[f64], window: usize) -> Result<SupervisedSet, MlpError> {
    if window == 0 {
        return Err(MlpError::InvalidArgument("window must be at least 1".into()));
    }
    if values.len() <= window {
        return Err(MlpError::TooShort(format!(
            "series of length {} needs more than {window} values",
            values.len()
        )));
    }
    Ok(SupervisedSet {
        inputs: values.windows(window).take(values.len() - window).map(<[f64]>::to_vec).collect(),
        targets: values[window..].to_vec(),
        window,
    })
}

pub fn mse(pred: &[f64], actual: &[f64]) -> Result<f64, MlpError> {
    if pred.len() != actual.len() {
        return Err(MlpError::LengthMismatch(pred.len(), actual.len()));
    }
    if pred.is_empty() {
        return Err(MlpError::EmptyInput);
    }
    Ok(pred
        .iter()
        .zip(actual)
        .map(|(p, a)| (p - a) * (p - a))
        .sum::<f64>()
        / pred.len() as f64)
}

/// Per-feature min/max scaling onto `[0, 1]`. A constant feature keeps unit
/// range so it maps to 0 rather than dividing by zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMax {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl MinMax {
    pub fn fit(rows: &[Vec<f64>]) -> Self {
        let dim = rows.first().map_or(0, Vec::len);
        let mut min = vec![f64::INFINITY; dim];
        let mut max = vec![f64::NEG_INFINITY; dim];
        for r in rows {
            for (j, &x) in r.iter().enumerate() {
                min[j] = min[j].min(x);
                max[j] = max[j].max(x);
            }
        }
        Self { min, max }
    }

    fn range(&self, j: usize) -> f64 {
        let r = self.max[j] - self.min[j];
        if r > 0.0 {
            r
        } else {
            1.0
        }
    }

    pub fn normalize(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .enumerate()
            .map(|(j, &v)| (v - self.min[j]) / self.range(j))
            .collect()
    }

    pub fn denormalize(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .enumerate()
            .map(|(j, &v)| v * self.range(j) + self.min[j])
            .collect()
    }
}

/// `[window, hidden, 1]` network with its training-split scalers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub window: usize,
    pub hidden: usize,
    /// Row-major `hidden x window`.
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
    pub input_scale: MinMax,
    pub target_scale: MinMax,
}

impl MlpModel {
    /// Glorot-uniform weights, zero biases, identity scalers.
    pub fn init(window: usize, hidden: usize, rng: &mut impl Rng) -> Self {
        let l1 = (6.0 / (window + hidden) as f64).sqrt();
        let l2 = (6.0 / (hidden + 1) as f64).sqrt();
        let w1 = (0..window * hidden).map(|_| rng.gen_range(-l1..l1)).collect();
        let w2 = (0..hidden).map(|_| rng.gen_range(-l2..l2)).collect();
        Self {
            window,
            hidden,
            w1,
            b1: vec![0.0; hidden],
            w2,
            b2: 0.0,
            input_scale: MinMax {
                min: vec![0.0; window],
                max: vec![1.0; window],
            },
            target_scale: MinMax {
                min: vec![0.0],
                max: vec![1.0],
            },
        }
    }

    pub fn layer_sizes(&self) -> [usize; 3] {
        [self.window, self.hidden, 1]
    }

    pub fn n_params(&self) -> usize {
        self.w1.len() + self.b1.len() + self.w2.len() + 1
    }

    pub fn params(&self) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.n_params());
        p.extend(&self.w1);
        p.extend(&self.b1);
        p.extend(&self.w2);
        p.push(self.b2);
        p
    }

    pub fn set_params(&mut self, p: &[f64]) {
        assert_eq!(p.len(), self.n_params(), "parameter vector length");
        let (w1, rest) = p.split_at(self.w1.len());
        let (b1, rest) = rest.split_at(self.b1.len());
        let (w2, rest) = rest.split_at(self.w2.len());
        self.w1.copy_from_slice(w1);
        self.b1.copy_from_slice(b1);
        self.w2.copy_from_slice(w2);
        self.b2 = rest[0];
    }

    fn hidden_activations(&self, x: &[f64], out: &mut [f64]) {
        for (j, h) in out.iter_mut().enumerate() {
            let row = &self.w1[j * self.window..(j + 1) * self.window];
            let z: f64 = row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.b1[j];
            *h = z.tanh();
        }
    }

    /// Output for an already-normalized input.
    pub fn forward_normalized(&self, x: &[f64]) -> f64 {
        let mut h = vec![0.0; self.hidden];
        self.hidden_activations(x, &mut h);
        h.iter().zip(&self.w2).map(|(a, w)| a * w).sum::<f64>() + self.b2
    }

    /// Prediction in original units.
    pub fn predict(&self, x: &[f64]) -> f64 {
        let y = self.forward_normalized(&self.input_scale.normalize(x));
        self.target_scale.denormalize(&[y])[0]
    }

    /// Mean squared error over normalized rows and its gradient with respect
    /// to [`MlpModel::params`].
    pub fn loss_and_gradient(&self, xs: &[Vec<f64>], ys: &[f64]) -> (f64, Vec<f64>) {
        let n = ys.len() as f64;
        let (hdim, wdim) = (self.hidden, self.window);
        let mut g_w1 = vec![0.0; self.w1.len()];
        let mut g_b1 = vec![0.0; hdim];
        let mut g_w2 = vec![0.0; hdim];
        let mut g_b2 = 0.0;
        let mut loss = 0.0;
        let mut h = vec![0.0; hdim];
        for (x, &y) in xs.iter().zip(ys) {
            self.hidden_activations(x, &mut h);
            let out = h.iter().zip(&self.w2).map(|(a, w)| a * w).sum::<f64>() + self.b2;
            let err = out - y;
            loss += err * err;
            let d_out = 2.0 * err / n;
            g_b2 += d_out;
            for j in 0..hdim {
                g_w2[j] += d_out * h[j];
                let d_z = d_out * self.w2[j] * (1.0 - h[j] * h[j]);
                g_b1[j] += d_z;
                let row = &mut g_w1[j * wdim..(j + 1) * wdim];
                for (g, v) in row.iter_mut().zip(x) {
                    *g += d_z * v;
                }
            }
        }
        let mut grad = g_w1;
        grad.extend(g_b1);
        grad.extend(g_w2);
        grad.push(g_b2);
        (loss / n, grad)
    }

    /// MSE in original units over raw rows.
    pub fn evaluate(&self, set: &SupervisedSet) -> f64 {
        let preds: Vec<f64> = set.inputs.iter().map(|x| self.predict(x)).collect();
        mse(&preds, &set.targets).unwrap_or(f64::NAN)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub hidden: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub train_fraction: f64,
    pub val_fraction: f64,
    pub seed: u64,
    /// Epochs without validation improvement before stopping.
    pub patience: usize,
    /// Lag window for [`compare_anomaly_effect`].
    pub window: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            hidden: 10,
            epochs: 2000,
            learning_rate: 0.05,
            train_fraction: 0.70,
            val_fraction: 0.15,
            seed: 0,
            patience: 200,
            window: 24,
        }
    }
}

/// Train/validation/test errors in original units plus the learning curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub mse_train: f64,
    pub mse_val: f64,
    pub mse_test: f64,
    /// Index into `curve` of the restored parameters.
    pub best_epoch: usize,
    /// `(train, val)` MSE; entry 0 is the untrained model.
    pub curve: Vec<(f64, f64)>,
}

/// Chronological row counts for the three splits.
pub fn split_sizes(n: usize, config: &TrainConfig) -> Result<(usize, usize, usize), MlpError> {
    let f = (config.train_fraction, config.val_fraction);
    if !(f.0 > 0.0 && f.1 > 0.0 && f.0 + f.1 < 1.0) {
        return Err(MlpError::InvalidArgument(format!(
            "bad split fractions {f:?}"
        )));
    }
    let train = (n as f64 * f.0).floor() as usize;
    let val = (n as f64 * f.1).floor() as usize;
    let test = n.saturating_sub(train + val);
    if train == 0 || val == 0 || test == 0 {
        return Err(MlpError::TooShort(format!(
            "{n} rows leave an empty split ({train}/{val}/{test})"
        )));
    }
    Ok((train, val, test))
}

pub fn train(set: &SupervisedSet, config: &TrainConfig) -> Result<(MlpModel, FitReport), MlpError> {
    if config.hidden == 0 {
        return Err(MlpError::InvalidArgument("hidden size must be at least 1".into()));
    }
    if !(config.learning_rate >= 0.0 && config.learning_rate.is_finite()) {
        return Err(MlpError::InvalidArgument(format!(
            "learning rate {}",
            config.learning_rate
        )));
    }
    let (n_train, n_val, _) = split_sizes(set.len(), config)?;
    let train_set = set.slice(0..n_train);
    let val_set = set.slice(n_train..n_train + n_val);
    let test_set = set.slice(n_train + n_val..set.len());

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut model = MlpModel::init(set.window, config.hidden, &mut rng);
    model.input_scale = MinMax::fit(&train_set.inputs);
    model.target_scale = MinMax::fit(&train_set.targets.iter().map(|&t| vec![t]).collect::<Vec<_>>());
    let xs: Vec<Vec<f64>> = train_set
        .inputs
        .iter()
        .map(|x| model.input_scale.normalize(x))
        .collect();
    let ys: Vec<f64> = train_set
        .targets
        .iter()
        .map(|&t| model.target_scale.normalize(&[t])[0])
        .collect();

    let eval = |m: &MlpModel| (m.evaluate(&train_set), m.evaluate(&val_set));
    let mut curve = vec![eval(&model)];
    let mut best = (0, curve[0].1, model.params());
    let mut params = model.params();

    for epoch in 1..=config.epochs {
        let (loss, grad) = model.loss_and_gradient(&xs, &ys);
        if !loss.is_finite() {
            return Err(MlpError::NonFinite { epoch });
        }
        for (p, g) in params.iter_mut().zip(&grad) {
            *p -= config.learning_rate * g;
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(MlpError::NonFinite { epoch });
        }
        model.set_params(&params);
        let point = eval(&model);
        if !(point.0.is_finite() && point.1.is_finite()) {
            return Err(MlpError::NonFinite { epoch });
        }
        curve.push(point);
        if point.1 < best.1 {
            best = (epoch, point.1, params.clone());
        } else if epoch - best.0 >= config.patience {
            break;
        }
    }

    model.set_params(&best.2);
    let report = FitReport {
        mse_train: curve[best.0].0,
        mse_val: curve[best.0].1,
        mse_test: model.evaluate(&test_set),
        best_epoch: best.0,
        curve,
    };
    Ok((model, report))
}

/// Trains identical networks on the raw and scrubbed series (concurrently)
/// and returns `(raw, clean)` reports.
pub fn compare_anomaly_effect(
    raw: &ActivitySeries,
    scrubbed: &ScrubbedSeries,
    config: &TrainConfig,
) -> Result<(FitReport, FitReport), MlpError> {
    if raw.is_empty() || scrubbed.values().is_empty() {
        return Err(MlpError::EmptyInput);
    }
    let raw_set = make_supervised(&raw.values, config.window)?;
    let clean_set = make_supervised(scrubbed.values(), config.window)?;
    let (a, b) = std::thread::scope(|s| {
        let h = s.spawn(|| train(&raw_set, config));
        let clean = train(&clean_set, config);
        (h.join().expect("training thread panicked"), clean)
    });
    Ok((a?.1, b?.1))
}

/// Largest rate `config.learning_rate / 2^i` whose training curve has
/// non-increasing train MSE and no divergence.
pub fn find_stable_learning_rate(
    set: &SupervisedSet,
    config: &TrainConfig,
    max_halvings: usize,
) -> Option<f64> {
    let mut lr = config.learning_rate;
    for _ in 0..=max_halvings {
        let cfg = TrainConfig {
            learning_rate: lr,
            patience: usize::MAX,
            ..config.clone()
        };
        if let Ok((_, report)) = train(set, &cfg) {
            if report.curve.windows(2).all(|w| w[1].0 <= w[0].0) {
                return Some(lr);
            }
        }
        lr /= 2.0;
    }
    None
}

pub fn write_fit_report<W: Write>(mut w: W, report: &FitReport) -> io::Result<()> {
    writeln!(w, "epoch,mse_train,mse_val")?;
    for (e, (t, v)) in report.curve.iter().enumerate() {
        writeln!(w, "{e},{t},{v}")?;
    }
    writeln!(
        w,
        "# summary: best_epoch={} mse_train={} mse_val={} mse_test={}",
        report.best_epoch, report.mse_train, report.mse_val, report.mse_test
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn supervised_windows() {
        let s = make_supervised(&[1.0, 2.0, 3.0, 4.0], 2).unwrap();
        assert_eq!(s.inputs, vec![vec![1.0, 2.0], vec![2.0, 3.0]]);
        assert_eq!(s.targets, vec![3.0, 4.0]);
        let c = make_supervised(&[7.0; 10], 3).unwrap();
        assert!(c.targets.iter().all(|&t| t == 7.0));
        assert!(matches!(make_supervised(&[1.0, 2.0], 2), Err(MlpError::TooShort(_))));
        assert!(make_supervised(&[1.0, 2.0], 0).is_err());
    }

    #[test]
    fn mse_examples() {
        assert_eq!(mse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(mse(&[1.0, 2.0], &[3.0, 2.0]).unwrap(), 2.0);
        assert_eq!(mse(&[0.0], &[3.0]).unwrap(), 9.0);
        assert_eq!(mse(&[0.0], &[]).unwrap_err(), MlpError::LengthMismatch(1, 0));
        assert_eq!(mse(&[], &[]).unwrap_err(), MlpError::EmptyInput);
    }

    #[test]
    fn split_sizes_need_every_split() {
        assert_eq!(split_sizes(100, &TrainConfig::default()).unwrap(), (70, 15, 15));
        assert!(matches!(split_sizes(6, &TrainConfig::default()), Err(MlpError::TooShort(_))));
    }

    #[test]
    fn zero_learning_rate_is_a_no_op() {
        let series: Vec<f64> = (0..80).map(|i| (i as f64 * 0.3).sin() * 10.0 + 20.0).collect();
        let set = make_supervised(&series, 4).unwrap();
        let cfg = TrainConfig {
            learning_rate: 0.0,
            epochs: 50,
            window: 4,
            ..TrainConfig::default()
        };
        let (model, report) = train(&set, &cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let initial = MlpModel::init(4, cfg.hidden, &mut rng);
        assert_eq!(model.params(), initial.params());
        assert_eq!(report.best_epoch, 0);
        assert_eq!(report.mse_train, report.curve[0].0);
        assert!(report.curve.iter().all(|p| *p == report.curve[0]));
    }

    #[test]
    fn divergence_is_an_error() {
        let series: Vec<f64> = (0..80).map(|i| (i as f64 * 0.7).sin() * 10.0 + 20.0).collect();
        let set = make_supervised(&series, 4).unwrap();
        let cfg = TrainConfig {
            learning_rate: 1e6,
            epochs: 200,
            ..TrainConfig::default()
        };
        assert!(matches!(train(&set, &cfg), Err(MlpError::NonFinite { .. })));
    }

    #[test]
    fn report_is_consistent_with_curve() {
        let series: Vec<f64> = (0..150).map(|i| (i as f64 * 0.26).sin() * 50.0 + 60.0).collect();
        let set = make_supervised(&series, 6).unwrap();
        let cfg = TrainConfig {
            epochs: 300,
            ..TrainConfig::default()
        };
        let (_, r) = train(&set, &cfg).unwrap();
        assert!(r.curve.len() > r.best_epoch);
        let min_val = r.curve.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        assert_eq!(r.mse_val, min_val);
        assert_eq!(r.mse_val, r.curve[r.best_epoch].1);
        assert!(r.mse_val < r.curve[0].1);
    }

    #[test]
    fn fit_report_csv() {
        let r = FitReport {
            mse_train: 1.0,
            mse_val: 2.0,
            mse_test: 3.0,
            best_epoch: 1,
            curve: vec![(4.0, 5.0), (1.0, 2.0)],
        };
        let mut buf = Vec::new();
        write_fit_report(&mut buf, &r).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "epoch,mse_train,mse_val\n0,4,5\n1,1,2\n\
             # summary: best_epoch=1 mse_train=1 mse_val=2 mse_test=3\n"
        );
    }

    proptest! {
        #[test]
        fn normalization_round_trip(rows in proptest::collection::vec(proptest::collection::vec(-1e4f64..1e4, 3), 1..20)) {
            let s = MinMax::fit(&rows);
            for r in &rows {
                let back = s.denormalize(&s.normalize(r));
                for (a, b) in back.iter().zip(r) {
                    prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
                }
            }
        }
    }
}
