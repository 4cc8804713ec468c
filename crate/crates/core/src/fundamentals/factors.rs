//! Principal-component fundamentals: the exchange-rate panel's common
//! factors, with each currency's Ω reconstructed from its loadings.

use super::{FundamentalKind, FundamentalSeries, FundamentalSpec};
use crate::dataio::Series;
use crate::error::{Error, Result};
use crate::linalg::jacobi_eigh;
use ndarray::{Array1, Array2};

#[derive(Debug, Clone)]
pub struct FactorModel {
    /// Axis index of factor row 0; callers that window the panel set
    /// this so reconstructed series land on the right dates.
    pub start: usize,
    /// Common factors, T × r.
    pub factors: Array2<f64>,
    /// Per-currency loadings, N × r.
    pub loadings: Array2<f64>,
    /// Fraction of panel variance explained per factor.
    pub shares: Vec<f64>,
    /// Per-currency means removed before extraction.
    pub means: Array1<f64>,
}

/// Principal components of a complete T × N panel (rows are dates).
/// Columns are demeaned first; each factor's loading vector is sign-
/// normalized to a positive sum.
pub fn extract_factors(panel: &Array2<f64>, r: usize) -> Result<FactorModel> {
    let t_len = panel.nrows();
    let n = panel.ncols();
    if r == 0 {
        return Err(Error::Config("factor count must be at least 1".to_string()));
    }
    if r > n.min(t_len) {
        return Err(Error::Config(format!(
            "cannot extract {r} factors from a {t_len} x {n} panel"
        )));
    }
    let means = Array1::from_iter(panel.columns().into_iter().map(|c| c.mean().unwrap()));
    let mut demeaned = panel.clone();
    for (j, mut col) in demeaned.columns_mut().into_iter().enumerate() {
        col -= means[j];
    }
    let cov = demeaned.t().dot(&demeaned);
    let (values, vectors) = jacobi_eigh(cov.view());
    let values = values.mapv(|v| v.max(0.0));
    let total: f64 = values.sum();
    let tol = 1e-12 * values[0].max(f64::MIN_POSITIVE);
    let rank = values.iter().filter(|&&v| v > tol).count();
    if r > rank {
        return Err(Error::SingularDesign(format!(
            "panel has rank {rank}, cannot extract {r} factors"
        )));
    }
    let mut loadings = Array2::<f64>::zeros((n, r));
    for j in 0..r {
        let mut v = vectors.column(j).to_owned();
        if v.sum() < 0.0 {
            v.mapv_inplace(|x| -x);
        }
        loadings.column_mut(j).assign(&v);
    }
    let factors = demeaned.dot(&loadings);
    let shares = (0..r)
        .map(|j| if total > 0.0 { values[j] / total } else { 0.0 })
        .collect();
    Ok(FactorModel {
        start: 0,
        factors,
        loadings,
        shares,
        means,
    })
}

/// Reconstruct one currency's fundamental from the factor model:
/// Ω_it = Σ_r γ_ri f_rt plus the mean removed at extraction.
pub fn factor_fundamental(
    fm: &FactorModel,
    index: usize,
    s: &Series,
) -> Result<FundamentalSeries> {
    let n = fm.loadings.nrows();
    if index >= n {
        return Err(Error::Config(format!(
            "currency index {index} out of range for a {n}-currency factor model"
        )));
    }
    let r = fm.factors.ncols();
    let spec = FundamentalSpec::identity(FundamentalKind::Factor(r));
    let gamma = fm.loadings.row(index);
    let vals: Vec<f64> = (0..fm.factors.nrows())
        .map(|t| fm.factors.row(t).dot(&gamma) + fm.means[index])
        .collect();
    FundamentalSeries::from_omega(spec, Series::new(fm.start, vals), s)
}
