//! Ordinary least squares via the normal equations. The designs here
//! are short and well-scaled (a handful of macro regressors), so a
//! Cholesky solve of `X'X` is adequate.

use crate::error::{Error, Result};
use crate::linalg;
use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

#[derive(Debug, Clone)]
pub struct OlsFit {
    pub coef: Array1<f64>,
    pub fitted: Array1<f64>,
    pub residuals: Array1<f64>,
    pub rss: f64,
    /// `(X'X)^{-1}`, kept because prior parameterization scales it.
    pub xtx_inv: Array2<f64>,
}

pub fn ols(x: ArrayView2<f64>, y: ArrayView1<f64>) -> Result<OlsFit> {
    let n = x.nrows();
    let k = x.ncols();
    if n != y.len() {
        return Err(Error::Alignment(format!(
            "design has {n} rows but response has {} entries",
            y.len()
        )));
    }
    if n < k {
        return Err(Error::SingularDesign(format!(
            "{n} observations for {k} coefficients"
        )));
    }
    let xtx = x.t().dot(&x);
    let xty = x.t().dot(&y);
    let xtx_inv = linalg::inv_spd(xtx.view())
        .ok_or_else(|| Error::SingularDesign(format!("X'X not invertible (k = {k})")))?;
    let coef = xtx_inv.dot(&xty);
    let fitted = x.dot(&coef);
    let residuals = &y.to_owned() - &fitted;
    let rss = residuals.iter().map(|e| e * e).sum();
    Ok(OlsFit {
        coef,
        fitted,
        residuals,
        rss,
        xtx_inv,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::{array, Array2};

    #[test]
    fn exact_line_is_recovered() {
        // y = 2 + 3 x, noiseless.
        let xs = [0.0, 1.0, 2.0, 3.0];
        let mut design = Array2::<f64>::zeros((4, 2));
        for (i, &v) in xs.iter().enumerate() {
            design[[i, 0]] = 1.0;
            design[[i, 1]] = v;
        }
        let y = array![2.0, 5.0, 8.0, 11.0];
        let fit = ols(design.view(), y.view()).unwrap();
        assert_abs_diff_eq!(fit.coef[0], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.coef[1], 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.rss, 0.0, epsilon = 1e-20);
    }

    #[test]
    fn collinear_design_is_rejected() {
        let mut design = Array2::<f64>::zeros((5, 2));
        for i in 0..5 {
            design[[i, 0]] = 1.0;
            design[[i, 1]] = 2.0; // scalar multiple of the first column
        }
        let y = array![1.0, 2.0, 3.0, 4.0, 5.0];
        assert!(matches!(
            ols(design.view(), y.view()),
            Err(Error::SingularDesign(_))
        ));
    }
}
