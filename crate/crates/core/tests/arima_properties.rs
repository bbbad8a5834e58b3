use cdrsight_core::arima::{
    acf, adf_test, build_adf_table, default_max_lag, evaluate, fit, forecast, integrate_forecast,
    pacf, simulate_arima, ArimaModel, ArimaSpec, Stationarity,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn white_noise(seed: u64, n: usize) -> Vec<f64> {
    simulate_arima(0.0, &[], &[], 0, 1.0, n, 0, &mut rng(seed))
}

#[test]
fn white_noise_correlograms_stay_inside_bound() {
    let (mut acf_ok, mut pacf_ok) = (0, 0);
    for seed in 0..50 {
        let v = white_noise(seed, 1000);
        let a = acf(&v, 20).unwrap();
        let p = pacf(&v, 20).unwrap();
        let inside = |xs: &[f64], b: f64| xs[1..].iter().filter(|x| x.abs() <= b).count();
        acf_ok += usize::from(inside(&a.values, a.conf_bound) >= 18);
        pacf_ok += usize::from(inside(&p.values, p.conf_bound) >= 18);
    }
    // at 5% per lag, 3+ exceedances out of 20 happen about 8% of the time
    assert!(acf_ok >= 42, "{acf_ok}/50");
    assert!(pacf_ok >= 42, "{pacf_ok}/50");
}

#[test]
fn ar1_pacf_cuts_off_after_one() {
    let y = simulate_arima(0.0, &[0.7], &[], 0, 1.0, 2000, 200, &mut rng(21));
    let p = pacf(&y, 10).unwrap();
    assert!((p.values[1] - 0.7).abs() <= 0.05, "{}", p.values[1]);
    let inside = p.values[2..].iter().filter(|v| v.abs() <= p.conf_bound).count();
    assert!(inside * 10 >= 8 * 9, "{inside}/9");
}

#[test]
fn monte_carlo_table_matches_published_dickey_fuller_values() {
    // Fuller's table, constant-only regression, n = 500: 1% -3.44, 5% -2.87
    let t = build_adf_table(&[500], 100_000, 99).unwrap();
    let q01 = t.quantile(500, 0.01);
    let q05 = t.quantile(500, 0.05);
    let q10 = t.quantile(500, 0.10);
    assert!((q05 + 2.87).abs() <= 0.03, "{q05}");
    assert!((q01 + 3.44).abs() <= 0.04, "{q01}");
    assert!(q01 < q05 && q05 < q10);
}

#[test]
fn adf_conclusions() {
    let walk = simulate_arima(0.0, &[], &[], 1, 1.0, 500, 0, &mut rng(5));
    let r = adf_test(&walk, None).unwrap();
    assert!(r.p_value > 0.05);
    assert_eq!(r.conclusion, Stationarity::NonStationary);
    let r = adf_test(&white_noise(5, 500), None).unwrap();
    assert!(r.p_value <= 0.05);
    assert_eq!(r.conclusion, Stationarity::Stationary);
    assert!((0.0..=1.0).contains(&r.p_value));
}

fn ols_ar1_slope(y: &[f64]) -> f64 {
    let n = (y.len() - 1) as f64;
    let (x, z) = (&y[..y.len() - 1], &y[1..]);
    let mx = x.iter().sum::<f64>() / n;
    let mz = z.iter().sum::<f64>() / n;
    let sxz: f64 = x.iter().zip(z).map(|(a, b)| (a - mx) * (b - mz)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxz / sxx
}

#[test]
fn ar1_estimate_matches_ols() {
    let y = simulate_arima(0.0, &[0.7], &[], 0, 1.0, 2000, 200, &mut rng(7));
    let m = fit(&y, ArimaSpec { p: 1, d: 0, q: 0 }).unwrap();
    assert!((0.62..=0.78).contains(&m.phi[0]));
    assert!((m.phi[0] - ols_ar1_slope(&y)).abs() <= 0.02);
    assert!(m.warnings.is_empty(), "{:?}", m.warnings);
    let mean_sq = m.residuals.iter().map(|e| e * e).sum::<f64>() / m.residuals.len() as f64;
    assert!((m.sigma2 - mean_sq).abs() < 1e-12);
}

#[test]
fn ma1_estimate_agrees_with_moment_inversion() {
    let y = simulate_arima(0.0, &[], &[0.6], 0, 1.0, 5000, 200, &mut rng(8));
    let m = fit(&y, ArimaSpec { p: 0, d: 0, q: 1 }).unwrap();
    let rho = acf(&y, 1).unwrap().values[1];
    // invertible root of rho = theta / (1 + theta^2)
    let moments = (1.0 - (1.0 - 4.0 * rho * rho).sqrt()) / (2.0 * rho);
    assert!((0.52..=0.68).contains(&m.theta[0]), "{}", m.theta[0]);
    assert!((0.52..=0.68).contains(&moments), "{moments}");
}

#[test]
fn parametric_bootstrap_recovers_arma11() {
    let truth = simulate_arima(1.0, &[0.5], &[0.3], 0, 1.0, 5000, 200, &mut rng(9));
    let fitted = fit(&truth, ArimaSpec { p: 1, d: 0, q: 1 }).unwrap();
    let sigma = fitted.sigma2.sqrt();
    let mut ok = 0;
    for seed in 0..20 {
        let y = simulate_arima(
            fitted.c,
            &fitted.phi,
            &fitted.theta,
            0,
            sigma,
            5000,
            200,
            &mut rng(100 + seed),
        );
        let m = fit(&y, fitted.spec).unwrap();
        let close = (m.phi[0] - fitted.phi[0]).abs() <= 0.1
            && (m.theta[0] - fitted.theta[0]).abs() <= 0.1
            && (m.c - fitted.c).abs() <= 0.1;
        ok += usize::from(close);
    }
    assert!(ok >= 18, "{ok}/20");
}

#[test]
fn ar1_beats_naive_on_holdout() {
    let y = simulate_arima(0.0, &[0.7], &[], 0, 1.0, 1000, 200, &mut rng(10));
    let cut = 700;
    let m = fit(&y[..cut], ArimaSpec { p: 1, d: 0, q: 0 }).unwrap();
    let ev = evaluate(&m, &y[..cut], &y[cut..]).unwrap();
    let naive = y[cut..]
        .iter()
        .zip(&y[cut - 1..])
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / (y.len() - cut) as f64;
    assert!(ev.mse <= naive && ev.mse <= 1.2, "{} vs {naive}", ev.mse);
}

#[test]
fn default_lag_is_fifty_for_long_series() {
    assert_eq!(default_max_lag(5000), 50);
}

fn manual(phi: Vec<f64>, theta: Vec<f64>, d: usize, c: f64) -> ArimaModel {
    ArimaModel {
        spec: ArimaSpec {
            p: phi.len(),
            d,
            q: theta.len(),
        },
        c,
        phi,
        theta,
        sigma2: 1.0,
        residuals: Vec::new(),
        css: 0.0,
        intercept: true,
        iterations: 0,
        warnings: Vec::new(),
    }
}

proptest! {
    #[test]
    fn forecasting_differences_then_integrating_matches_direct(
        history in proptest::collection::vec(-50.0f64..50.0, 12..40),
        phi in proptest::collection::vec(-0.6f64..0.6, 0..3),
        theta in proptest::collection::vec(-0.6f64..0.6, 0..3),
        c in -1.0f64..1.0,
        d in 1usize..3,
        horizon in 1usize..12,
    ) {
        let direct = forecast(&manual(phi.clone(), theta.clone(), d, c), &history, horizon).unwrap();
        let mut w = history.clone();
        for _ in 0..d {
            w = w.windows(2).map(|x| x[1] - x[0]).collect();
        }
        let on_diff = forecast(&manual(phi, theta, 0, c), &w, horizon).unwrap();
        let integrated = integrate_forecast(&history, d, &on_diff);
        for (a, b) in direct.iter().zip(&integrated) {
            prop_assert!((a - b).abs() <= 1e-8 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn random_walk_fit_is_differencing(v in proptest::collection::vec(-100.0f64..100.0, 3..50)) {
        let m = fit(&v, ArimaSpec { p: 0, d: 1, q: 0 }).unwrap();
        let diffs: Vec<f64> = v.windows(2).map(|x| x[1] - x[0]).collect();
        prop_assert_eq!(&m.residuals, &diffs);
        let f = forecast(&m, &v, 5).unwrap();
        prop_assert!(f.iter().all(|x| *x == *v.last().unwrap()));
    }
}
