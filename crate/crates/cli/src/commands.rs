use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use rayon::prelude::*;

use cdrsight_core::arima::{
    acf, adf_test_with_table, build_adf_table_with_jobs, default_max_lag, evaluate, fit, forecast,
    one_step_predictions, pacf_from_acf, suggest_order, write_correlogram, write_forecast,
    AdfResult, AdfTable, ArimaModel, ArimaSpec, Stationarity, DEFAULT_SAMPLE_SIZES,
};
use cdrsight_core::cluster::{read_report, write_report};
use cdrsight_core::ingest::{
    read_events, read_rows, write_aggregated, write_events, ParsedRows, ReadOptions,
    AGGREGATED_HEADER, CANONICAL_HEADER, DEFAULT_CRAWDAD_USER,
};
use cdrsight_core::mlp::write_fit_report;
use cdrsight_core::scrub::write_sidecar;
use cdrsight_core::seed::derive_seed;
use cdrsight_core::series::{
    bucketize, bucketize_aggregated, difference, read_series, split_point, write_series,
    ActivityFields, TimeAxis, EVENT_BUCKET_WIDTH_S, DEFAULT_BUCKET_WIDTH_S,
};
use cdrsight_core::synth::{self, Profile, SynthConfig};
use cdrsight_core::{
    compare_anomaly_effect, detect_anomalies, make_anomaly_free, preprocess, ActiveWindow,
    ActivitySeries, AnomalyReason, AnomalyReport, DetectConfig, FitReport, Format, Metric,
    TrainConfig,
};

use crate::config::{usage, RunConfig};
use crate::svg::Chart;
use crate::{Cli, Command, SeriesOpts};

struct Ctx {
    cfg: RunConfig,
    seed: u64,
    jobs: usize,
    svg: bool,
}

pub fn run(cli: Cli) -> Result<()> {
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let jobs = cli.jobs.or(cfg.jobs).unwrap_or(1);
    if jobs == 0 {
        return Err(usage("--jobs must be at least 1"));
    }
    let ctx = Ctx {
        seed: cli.seed.or(cfg.seed).unwrap_or(0),
        jobs,
        svg: cli.svg,
        cfg,
    };
    match cli.command {
        Command::Ingest(a) => ingest(&ctx, a),
        Command::Series(a) => series(&ctx, a),
        Command::Detect(a) => detect(&ctx, a),
        Command::Scrub(a) => scrub(&ctx, a),
        Command::NnCompare(a) => nn_compare(&ctx, a),
        Command::Adf(a) => adf(&ctx, a),
        Command::AdfTable(a) => adf_table(&ctx, a),
        Command::Correlogram(a) => correlogram(&ctx, a),
        Command::Fit(a) => fit_cmd(&ctx, a),
        Command::Forecast(a) => forecast_cmd(&ctx, a),
        Command::Synth(a) => synth_cmd(&ctx, a),
    }
}

// ------------------------------------------------------------------ io

fn open(path: &Path) -> Result<BufReader<File>> {
    let f = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(BufReader::new(f))
}

/// Writes to `path`, or standard output when `None`.
fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => fs::write(p, bytes).with_context(|| format!("cannot write {}", p.display())),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}

fn csv<F>(f: F) -> Result<Vec<u8>>
where
    F: FnOnce(&mut Vec<u8>) -> io::Result<()>,
{
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

/// Status lines go to standard output unless it carries the data.
fn note(data_on_stdout: bool, msg: &str) {
    if data_on_stdout {
        eprintln!("{msg}");
    } else {
        println!("{msg}");
    }
}

impl Ctx {
    fn check_svg(&self, outputs: &[Option<&Path>]) -> Result<()> {
        if self.svg && outputs.iter().all(Option::is_none) {
            return Err(usage("--svg needs an output file to place the plot next to"));
        }
        Ok(())
    }

    fn plot(&self, csv_path: Option<&Path>, chart: impl FnOnce() -> Chart) -> Result<()> {
        if let (true, Some(p)) = (self.svg, csv_path) {
            let target = p.with_extension("svg");
            fs::write(&target, chart().render())
                .with_context(|| format!("cannot write {}", target.display()))?;
        }
        Ok(())
    }

    fn zero_window(&self, flag: &Option<String>) -> Result<Option<ActiveWindow>> {
        match flag {
            Some(s) => Ok(Some(s.parse().map_err(usage)?)),
            None => Ok(self.cfg.zero_window),
        }
    }

    fn detect_config(&self, k: Option<usize>, restarts: Option<usize>, window: &Option<String>) -> Result<DetectConfig> {
        let k = k.or(self.cfg.k).unwrap_or(3);
        let restarts = restarts.or(self.cfg.restarts).unwrap_or(10);
        if k == 0 || restarts == 0 {
            return Err(usage("k and restarts must be at least 1"));
        }
        Ok(DetectConfig {
            k,
            restarts,
            seed: derive_seed(self.seed, "detect"),
            zero_window: self.zero_window(window)?,
            ..DetectConfig::default()
        })
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        Ok(rayon::ThreadPoolBuilder::new().num_threads(self.jobs).build()?)
    }
}

enum InputKind {
    Series,
    Events,
    Aggregated,
}

fn sniff(path: &Path) -> Result<InputKind> {
    let mut reader = open(path)?;
    let mut line = String::new();
    while reader.read_line(&mut line)? > 0 {
        let t = line.trim();
        if !t.is_empty() && !t.starts_with('#') {
            return Ok(match t {
                CANONICAL_HEADER => InputKind::Events,
                AGGREGATED_HEADER => InputKind::Aggregated,
                _ => InputKind::Series,
            });
        }
        line.clear();
    }
    Ok(InputKind::Series)
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Reads a series CSV, or buckets a canonical event or aggregated CSV.
fn load_series(ctx: &Ctx, path: &Path, opts: &SeriesOpts) -> Result<ActivitySeries> {
    let metric = match &opts.metric {
        Some(m) => Some(m.parse::<Metric>().map_err(usage)?),
        None => ctx.cfg.metric,
    };
    let width = opts.bucket_width.or(ctx.cfg.bucket_width_s);
    if width.is_some_and(|w| w <= 0) {
        return Err(usage("bucket width must be positive"));
    }
    let label = stem(path);
    let mut series = match sniff(path)? {
        InputKind::Events => {
            let (events, _) = read_events(open(path)?)?;
            bucketize(
                &events,
                width.unwrap_or(EVENT_BUCKET_WIDTH_S),
                metric.unwrap_or(Metric::EventCount),
            )?
        }
        InputKind::Aggregated => {
            if metric.is_some_and(|m| m != Metric::ActivitySum) {
                return Err(usage("aggregated records only support the activity_sum metric"));
            }
            let rows = match read_rows(open(path)?, Format::TelecomItalia, &ReadOptions::default())? {
                ParsedRows::Aggregated(rows) => preprocess(rows).0,
                ParsedRows::Events(_) => unreachable!("aggregated format yields aggregated rows"),
            };
            bucketize_aggregated(
                &rows,
                width.unwrap_or(DEFAULT_BUCKET_WIDTH_S),
                TimeAxis::default(),
                ActivityFields::default(),
            )?
        }
        InputKind::Series => read_series(
            open(path)?,
            width.unwrap_or(EVENT_BUCKET_WIDTH_S),
            metric.unwrap_or(Metric::EventCount),
            &label,
        )?,
    };
    series.label = label;
    Ok(series)
}

fn index_line(series: &ActivitySeries) -> Vec<(f64, f64)> {
    series
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| (i as f64, *v))
        .collect()
}

// ------------------------------------------------------------ commands

fn ingest(ctx: &Ctx, a: crate::IngestArgs) -> Result<()> {
    let format: Format = match &a.format {
        Some(f) => f.parse().map_err(usage)?,
        None => ctx
            .cfg
            .format
            .ok_or_else(|| usage("--format is required (or set format= in the config)"))?,
    };
    let opts = ReadOptions {
        delimiter: a.delimiter.unwrap_or(','),
        user_id: a
            .user_id
            .or_else(|| ctx.cfg.user_id.clone())
            .unwrap_or_else(|| DEFAULT_CRAWDAD_USER.to_string()),
    };
    let (bytes, report) = match read_rows(open(&a.input)?, format, &opts)? {
        ParsedRows::Events(rows) => {
            let (events, report) = preprocess(rows);
            (csv(|w| write_events(w, &events))?, report)
        }
        ParsedRows::Aggregated(rows) => {
            let (rows, report) = preprocess(rows);
            (csv(|w| write_aggregated(w, &rows))?, report)
        }
    };
    emit(a.output.as_deref(), &bytes)?;
    note(a.output.is_none(), &format!("ingest: {report}"));
    Ok(())
}

fn series(ctx: &Ctx, a: crate::SeriesArgs) -> Result<()> {
    ctx.check_svg(&[a.output.as_deref()])?;
    let s = load_series(ctx, &a.input, &a.series)?;
    emit(a.output.as_deref(), &csv(|w| write_series(w, &s))?)?;
    ctx.plot(a.output.as_deref(), || {
        Chart::new(&format!("activity {}", s.label), "bucket", "activity").line("activity", index_line(&s))
    })
}

fn detection_chart(s: &ActivitySeries, r: &AnomalyReport) -> Chart {
    let marks = |reason| {
        r.indices(reason)
            .into_iter()
            .map(|i| (i as f64, s.values[i]))
            .collect()
    };
    Chart::new(&format!("anomalies {}", s.label), "bucket", "activity")
        .line("activity", index_line(s))
        .points("high activity", marks(AnomalyReason::HighActivityCluster))
        .points("zero activity", marks(AnomalyReason::ZeroActivity))
}

fn summarize(r: &AnomalyReport) -> String {
    format!(
        "{} anomalous buckets ({} high activity, {} zero activity)",
        r.all_indices().len(),
        r.indices(AnomalyReason::HighActivityCluster).len(),
        r.indices(AnomalyReason::ZeroActivity).len()
    )
}

fn detect(ctx: &Ctx, a: crate::DetectArgs) -> Result<()> {
    let cfg = ctx.detect_config(a.k, a.restarts, &a.zero_window)?;
    if a.input.len() > 1 {
        let dir = a
            .out_dir
            .as_ref()
            .ok_or_else(|| usage("several inputs need --out-dir"))?;
        if a.output.is_some() || a.series_output.is_some() {
            return Err(usage("--output and --series-output take a single input"));
        }
        let results: Vec<Result<(PathBuf, ActivitySeries, AnomalyReport)>> = ctx.pool()?.install(|| {
            a.input
                .par_iter()
                .map(|p| {
                    let s = load_series(ctx, p, &a.series)?;
                    let r = detect_anomalies(&s, &cfg)?;
                    Ok((dir.join(format!("{}.anomalies.csv", stem(p))), s, r))
                })
                .collect()
        });
        for res in results {
            let (out, s, r) = res?;
            emit(Some(&out), &csv(|w| write_report(w, &s, &r))?)?;
            ctx.plot(Some(&out), || detection_chart(&s, &r))?;
            println!("{}: {}", out.display(), summarize(&r));
        }
        return Ok(());
    }
    ctx.check_svg(&[a.output.as_deref(), a.series_output.as_deref()])?;
    let s = load_series(ctx, &a.input[0], &a.series)?;
    let r = detect_anomalies(&s, &cfg)?;
    if let Some(p) = &a.series_output {
        emit(Some(p), &csv(|w| write_series(w, &s))?)?;
    }
    emit(a.output.as_deref(), &csv(|w| write_report(w, &s, &r))?)?;
    ctx.plot(a.output.as_deref().or(a.series_output.as_deref()), || detection_chart(&s, &r))?;
    note(a.output.is_none(), &format!("detect: {}", summarize(&r)));
    Ok(())
}

fn scrub(ctx: &Ctx, a: crate::ScrubArgs) -> Result<()> {
    ctx.check_svg(&[a.output.as_deref()])?;
    let s = load_series(ctx, &a.input, &a.series)?;
    let report = read_report(open(&a.report)?, &s)?;
    let clean = make_anomaly_free(&s, &report)?;
    emit(a.output.as_deref(), &csv(|w| write_series(w, &clean.series))?)?;
    if let Some(p) = &a.sidecar {
        emit(Some(p), &csv(|w| write_sidecar(w, &s, &clean))?)?;
    }
    ctx.plot(a.output.as_deref(), || {
        Chart::new(&format!("scrubbed {}", s.label), "bucket", "activity")
            .line("raw", index_line(&s))
            .line("anomaly-free", index_line(&clean.series))
    })?;
    note(
        a.output.is_none(),
        &format!(
            "scrub: replaced {} buckets with {}",
            clean.replaced_indices.len(),
            clean.replacement_value
        ),
    );
    Ok(())
}

fn curve_chart(name: &str, r: &FitReport) -> Chart {
    let pts = |f: fn(&(f64, f64)) -> f64| {
        r.curve
            .iter()
            .enumerate()
            .map(|(e, p)| (e as f64, f(p)))
            .collect()
    };
    Chart::new(&format!("learning curve ({name})"), "epoch", "mse")
        .line("train", pts(|p| p.0))
        .line("validation", pts(|p| p.1))
}

fn nn_compare(ctx: &Ctx, a: crate::NnArgs) -> Result<()> {
    ctx.check_svg(&[a.raw_curve.as_deref(), a.clean_curve.as_deref()])?;
    let c = &ctx.cfg;
    let defaults = TrainConfig::default();
    let train_fraction = a.train_fraction.or(c.train_fraction).unwrap_or(defaults.train_fraction);
    let cfg = TrainConfig {
        hidden: a.hidden.or(c.hidden).unwrap_or(defaults.hidden),
        epochs: a.epochs.or(c.epochs).unwrap_or(defaults.epochs),
        learning_rate: a.learning_rate.or(c.learning_rate).unwrap_or(defaults.learning_rate),
        patience: a.patience.or(c.patience).unwrap_or(defaults.patience),
        window: a.window.or(c.window).unwrap_or(defaults.window),
        train_fraction,
        val_fraction: (1.0 - train_fraction) / 2.0,
        seed: derive_seed(ctx.seed, "mlp"),
    };
    if cfg.window == 0 || cfg.hidden == 0 || cfg.epochs == 0 {
        return Err(usage("window, hidden and epochs must be at least 1"));
    }
    let s = load_series(ctx, &a.input, &a.series)?;
    let report = match &a.report {
        Some(p) => read_report(open(p)?, &s)?,
        None => detect_anomalies(&s, &ctx.detect_config(a.k, None, &a.zero_window)?)?,
    };
    let clean = make_anomaly_free(&s, &report)?;
    let (raw, scrubbed) = compare_anomaly_effect(&s, &clean, &cfg)?;
    for (path, r, name) in [(&a.raw_curve, &raw, "raw"), (&a.clean_curve, &scrubbed, "anomaly-free")] {
        if let Some(p) = path {
            emit(Some(p), &csv(|w| write_fit_report(w, r))?)?;
            ctx.plot(Some(p), || curve_chart(name, r))?;
        }
    }
    println!("mse_test_raw: {}", raw.mse_test);
    println!("mse_test_clean: {}", scrubbed.mse_test);
    println!("mse_raw > mse_clean: {}", raw.mse_test > scrubbed.mse_test);
    Ok(())
}

fn differenced(s: &ActivitySeries, d: usize) -> Result<Vec<f64>> {
    Ok(difference(&s.values, d)?.values)
}

fn adf_lines(path: &Path, r: &AdfResult) -> String {
    format!(
        "input: {}\nstatistic: {}\np_value: {}\nlags_used: {}\nnobs: {}\nregression: {:?}\nconclusion: {:?}\n",
        path.display(),
        r.statistic,
        r.p_value,
        r.lags_used,
        r.nobs,
        r.regression,
        r.conclusion
    )
}

fn adf(ctx: &Ctx, a: crate::AdfArgs) -> Result<()> {
    let custom = match &a.table {
        Some(p) => Some(AdfTable::parse(&fs::read_to_string(p).with_context(|| {
            format!("cannot read {}", p.display())
        })?)?),
        None => None,
    };
    let table = custom.as_ref().unwrap_or_else(|| AdfTable::shipped());
    let lags = a.lags.or(ctx.cfg.lags);
    let results: Vec<Result<String>> = ctx.pool()?.install(|| {
        a.input
            .par_iter()
            .map(|p| {
                let s = load_series(ctx, p, &a.series)?;
                let r = adf_test_with_table(&differenced(&s, a.diff)?, lags, table)?;
                Ok(adf_lines(p, &r))
            })
            .collect()
    });
    let mut out = Vec::new();
    for r in results {
        out.push(r?);
    }
    print!("{}", out.join("\n"));
    Ok(())
}

fn adf_table(ctx: &Ctx, a: crate::AdfTableArgs) -> Result<()> {
    let sizes = a.sizes.unwrap_or_else(|| DEFAULT_SAMPLE_SIZES.to_vec());
    let table = build_adf_table_with_jobs(
        &sizes,
        a.replications,
        derive_seed(ctx.seed, "adf-table"),
        ctx.jobs,
    )?;
    emit(a.output.as_deref(), table.to_text().as_bytes())
}

fn correlogram(ctx: &Ctx, a: crate::CorrelogramArgs) -> Result<()> {
    ctx.check_svg(&[a.acf.as_deref(), a.pacf.as_deref()])?;
    let s = load_series(ctx, &a.input, &a.series)?;
    let d = a.diff.or(ctx.cfg.d).unwrap_or(0);
    let w = differenced(&s, d)?;
    let max_lag = a
        .max_lag
        .or(ctx.cfg.max_lag)
        .unwrap_or_else(|| default_max_lag(w.len()));
    let ac = acf(&w, max_lag)?;
    let pc = pacf_from_acf(&ac)?;
    let acf_csv = csv(|x| write_correlogram(x, &ac.values, 0, ac.conf_bound))?;
    let pacf_csv = csv(|x| write_correlogram(x, &pc.values, 1, pc.conf_bound))?;
    let to_stdout = a.acf.is_none() && a.pacf.is_none();
    if to_stdout {
        emit(None, &acf_csv)?;
    }
    let chart = |name: &str, v: &[f64], first: usize, b: f64| {
        Chart::new(&format!("{name} {}", s.label), "lag", name)
            .stems(name, v.iter().enumerate().skip(first).map(|(k, x)| (k as f64, *x)).collect())
            .hline("+1.96/sqrt(n)", b)
            .hline("-1.96/sqrt(n)", -b)
    };
    if let Some(p) = &a.acf {
        emit(Some(p), &acf_csv)?;
        ctx.plot(Some(p), || chart("acf", &ac.values, 0, ac.conf_bound))?;
    }
    if let Some(p) = &a.pacf {
        emit(Some(p), &pacf_csv)?;
        ctx.plot(Some(p), || chart("pacf", &pc.values, 1, pc.conf_bound))?;
    }
    note(to_stdout, &format!("suggested_order: {}", suggest_order(&ac, &pc, d)));
    Ok(())
}

/// `p,d,q`, `auto`, or the config's p/d/q; `auto` when nothing is given.
fn resolve_spec(ctx: &Ctx, flag: &Option<String>, train: &[f64]) -> Result<ArimaSpec> {
    let c = &ctx.cfg;
    let text = match (flag, c.p, c.d, c.q) {
        (Some(f), ..) => f.clone(),
        (None, Some(p), Some(d), Some(q)) => format!("{p},{d},{q}"),
        (None, None, None, None) => "auto".into(),
        _ => return Err(usage("config must set all of p, d and q")),
    };
    if text.trim() != "auto" {
        return text.parse().map_err(|e| usage(format!("{e}")));
    }
    // difference until the unit-root test rejects, at most twice
    let mut d = 0;
    while d < 2 {
        let w = difference(train, d)?.values;
        let r = cdrsight_core::arima::adf_test(&w, c.lags)?;
        if r.conclusion == Stationarity::Stationary {
            break;
        }
        d += 1;
    }
    let w = difference(train, d)?.values;
    let ac = acf(&w, c.max_lag.unwrap_or_else(|| default_max_lag(w.len())))?;
    Ok(suggest_order(&ac, &pacf_from_acf(&ac)?, d))
}

fn train_fraction(ctx: &Ctx, flag: Option<f64>) -> Result<Option<f64>> {
    match flag.or(ctx.cfg.train_fraction) {
        Some(f) if !(f > 0.0 && f < 1.0) => Err(usage("train fraction must be in (0, 1)")),
        f => Ok(f),
    }
}

fn model_summary(m: &ArimaModel) -> String {
    format!(
        "spec: {}\nc: {}\nphi: {:?}\ntheta: {:?}\nsigma2: {}\nwarnings: {:?}",
        m.spec, m.c, m.phi, m.theta, m.sigma2, m.warnings
    )
}

fn fit_cmd(ctx: &Ctx, a: crate::FitArgs) -> Result<()> {
    let s = load_series(ctx, &a.input, &a.series)?;
    let frac = train_fraction(ctx, a.train_fraction)?.unwrap_or(0.7);
    let k = split_point(s.len(), frac)?;
    let (train, test) = s.values.split_at(k);
    let spec = resolve_spec(ctx, &a.spec, train)?;
    let model = fit(train, spec)?;
    let ev = evaluate(&model, train, test)?;
    if let Some(p) = &a.output {
        emit(Some(p), serde_json::to_string_pretty(&model)?.as_bytes())?;
    }
    println!("{}", model_summary(&model));
    println!("train_len: {}\ntest_len: {}", train.len(), test.len());
    println!("test_mse: {}\ntest_mae: {}", ev.mse, ev.mae);
    Ok(())
}

fn forecast_cmd(ctx: &Ctx, a: crate::ForecastArgs) -> Result<()> {
    ctx.check_svg(&[a.output.as_deref()])?;
    let s = load_series(ctx, &a.input, &a.series)?;
    let frac = train_fraction(ctx, a.train_fraction)?;
    let rolling = match a.mode.as_str() {
        "multi" => false,
        "rolling" => true,
        other => return Err(usage(format!("unknown mode {other:?} (multi, rolling)"))),
    };
    let origin = match (frac, rolling) {
        (Some(f), _) => split_point(s.len(), f)?,
        (None, true) => split_point(s.len(), 0.7)?,
        (None, false) => s.len(),
    };
    let history = &s.values[..origin];
    let model: ArimaModel = match &a.model {
        Some(p) => serde_json::from_str(
            &fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))?,
        )
        .with_context(|| format!("{} is not a model file", p.display()))?,
        None => fit(history, resolve_spec(ctx, &a.spec, history)?)?,
    };
    let (first, predicted) = if rolling {
        (origin, one_step_predictions(&model, &s.values, origin)?)
    } else {
        let default_h = if origin < s.len() { s.len() - origin } else { 24 };
        let h = a.horizon.or(ctx.cfg.horizon).unwrap_or(default_h);
        (origin, forecast(&model, history, h)?)
    };
    let rows: Vec<(i64, Option<f64>, f64)> = predicted
        .iter()
        .enumerate()
        .map(|(i, &f)| (s.bucket_start(first + i), s.values.get(first + i).copied(), f))
        .collect();
    emit(a.output.as_deref(), &csv(|w| write_forecast(w, rows.iter().copied()))?)?;
    ctx.plot(a.output.as_deref(), || {
        Chart::new(&format!("forecast {} {}", s.label, model.spec), "bucket", "activity")
            .line("actual", index_line(&s))
            .line(
                "forecast",
                predicted.iter().enumerate().map(|(i, f)| ((first + i) as f64, *f)).collect(),
            )
    })?;
    let scored: Vec<(f64, f64)> = rows.iter().filter_map(|(_, a, f)| a.map(|a| (a, *f))).collect();
    if !scored.is_empty() {
        let n = scored.len() as f64;
        let mse = scored.iter().map(|(a, f)| (a - f) * (a - f)).sum::<f64>() / n;
        let mae = scored.iter().map(|(a, f)| (a - f).abs()).sum::<f64>() / n;
        note(a.output.is_none(), &format!("forecast: {} mse={mse} mae={mae}", model.spec));
    }
    Ok(())
}

fn synth_cmd(ctx: &Ctx, a: crate::SynthArgs) -> Result<()> {
    ctx.check_svg(&[a.output.as_deref()])?;
    let profile: Profile = a.profile.parse().map_err(usage)?;
    if a.days == 0 || a.users == 0 {
        return Err(usage("days and users must be at least 1"));
    }
    let corpus = synth::generate(&SynthConfig {
        profile,
        seed: derive_seed(ctx.seed, "synth"),
        days: a.days,
        users: a.users,
        ..SynthConfig::default()
    });
    emit(a.output.as_deref(), &csv(|w| write_events(w, &corpus.events))?)?;
    if let Some(p) = &a.truth {
        emit(Some(p), &csv(|w| synth::write_truth(w, &corpus.truth))?)?;
    }
    ctx.plot(a.output.as_deref(), || {
        let s = bucketize(&corpus.events, synth::SYNTH_BUCKET_WIDTH_S, Metric::EventCount)
            .expect("synthetic corpus is non-empty");
        let marks = corpus
            .truth
            .iter()
            .filter_map(|t| s.bucket_of(t.bucket_start).map(|i| (i as f64, s.values[i])))
            .collect();
        Chart::new("synthetic corpus", "hour", "events")
            .line("events", index_line(&s))
            .points("injected anomaly", marks)
    })?;
    note(
        a.output.is_none(),
        &format!(
            "synth: {} events, {} labelled anomalies",
            corpus.events.len(),
            corpus.truth.len()
        ),
    );
    Ok(())
}
