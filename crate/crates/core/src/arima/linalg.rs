use nalgebra::{DMatrix, DVector};

/// Ordinary least squares solved through a QR factorization.
#[derive(Debug, Clone, PartialEq)]
pub struct Ols {
    pub coef: Vec<f64>,
    /// Conventional standard errors, `sqrt(s^2 * diag((X'X)^-1))`.
    pub std_err: Vec<f64>,
    pub rss: f64,
    pub dof: usize,
}

/// Returns `None` when the design is rank deficient or has no residual
/// degrees of freedom.
pub fn ols(x: &DMatrix<f64>, y: &DVector<f64>) -> Option<Ols> {
    let (n, k) = x.shape();
    if n <= k || k == 0 {
        return None;
    }
    let qr = x.clone().qr();
    let r = qr.r();
    let max_diag = (0..k).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    if (0..k).any(|i| r[(i, i)].abs() <= 1e-10 * max_diag) || max_diag == 0.0 {
        return None;
    }
    let qty = qr.q().transpose() * y;
    let coef = r.solve_upper_triangular(&qty)?;
    let resid = y - x * &coef;
    let rss = resid.norm_squared();
    let dof = n - k;
    let s2 = rss / dof as f64;
    let r_inv = r.solve_upper_triangular(&DMatrix::identity(k, k))?;
    let std_err = (0..k)
        .map(|j| (s2 * r_inv.row(j).norm_squared()).sqrt())
        .collect();
    Some(Ols {
        coef: coef.iter().copied().collect(),
        std_err,
        rss,
        dof,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let x = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 1.0, 1.0, 1.0, 2.0, 1.0, 3.0]);
        let y = DVector::from_vec(vec![1.0, 3.0, 5.0, 7.0]);
        let fit = ols(&x, &y).unwrap();
        assert!((fit.coef[0] - 1.0).abs() < 1e-12 && (fit.coef[1] - 2.0).abs() < 1e-12);
        assert!(fit.rss < 1e-20);
    }

    #[test]
    fn rank_deficient() {
        let x = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 1.0, 2.0, 1.0, 2.0]);
        assert!(ols(&x, &DVector::from_vec(vec![1.0, 2.0, 3.0])).is_none());
    }
}
