use rand::Rng;
use rand_distr::{Distribution, Normal};

/// Gaussian ARIMA sample path of length `n`. The ARMA part runs `burn`
/// steps before recording and is then integrated `d` times from zero.
#[allow(clippy::too_many_arguments)]
pub fn simulate_arima<R: Rng + ?Sized>(
    c: f64,
    phi: &[f64],
    theta: &[f64],
    d: usize,
    sigma: f64,
    n: usize,
    burn: usize,
    rng: &mut R,
) -> Vec<f64> {
    let noise = Normal::new(0.0, sigma).expect("sigma must be finite and non-negative");
    let total = n + burn;
    let mut w = vec![0.0; total];
    let mut e = vec![0.0; total];
    for t in 0..total {
        e[t] = noise.sample(rng);
        let mut v = c + e[t];
        for (i, f) in phi.iter().enumerate() {
            if t > i {
                v += f * w[t - 1 - i];
            }
        }
        for (j, th) in theta.iter().enumerate() {
            if t > j {
                v += th * e[t - 1 - j];
            }
        }
        w[t] = v;
    }
    let mut out = w.split_off(burn);
    for _ in 0..d {
        let mut acc = 0.0;
        for v in out.iter_mut() {
            acc += *v;
            *v = acc;
        }
    }
    out
}
