//! Taylor-rule fundamentals: the interest differential regressed on
//! inflation, activity gaps, and the real exchange rate, with the
//! fitted differential (time-varying or constant coefficients) serving
//! as z_t. No intercept enters any variant.

use super::{FundamentalKind, FundamentalSeries, FundamentalSpec, GapSource};
use crate::dataio::{CountrySeries, Series, SeriesPanel};
use crate::error::{Error, Result};
use crate::gibbs::{run_gibbs, GibbsConfig, PosteriorDraws, PriorSpec};
use crate::regress::ols;
use ndarray::{Array1, Array2};

/// Design for one country-vs-base Taylor regression, on the panel axis.
#[derive(Debug, Clone)]
pub struct TaylorRegressors {
    /// Interest differential i − i*, the regression target.
    pub dependent: Series,
    pub columns: Vec<Series>,
    pub names: Vec<&'static str>,
}

impl TaylorRegressors {
    /// First axis index where the target and every column are defined.
    pub fn first_defined(&self) -> usize {
        self.columns
            .iter()
            .map(Series::offset)
            .chain([self.dependent.offset()])
            .max()
            .unwrap_or(0)
    }

    /// One past the last axis index covered by every series.
    pub fn end_defined(&self) -> usize {
        self.columns
            .iter()
            .map(Series::end)
            .chain([self.dependent.end()])
            .min()
            .unwrap_or(0)
    }

    /// Restrict every series to axis indices below `end_exclusive`.
    pub fn truncated(&self, end_exclusive: usize) -> TaylorRegressors {
        TaylorRegressors {
            dependent: self.dependent.truncated(end_exclusive),
            columns: self.columns.iter().map(|c| c.truncated(end_exclusive)).collect(),
            names: self.names.clone(),
        }
    }

    /// Cut every series to exactly `[from, to)`; errors if any series
    /// does not cover the whole range.
    pub fn restricted(&self, from: usize, to: usize) -> Result<TaylorRegressors> {
        let cut = |s: &Series, name: &str| -> Result<Series> {
            let vals = s.slice(from, to).ok_or_else(|| {
                Error::Alignment(format!("column {name} not defined over rows {from}..{to}"))
            })?;
            Ok(Series::new(from, vals.to_vec()))
        };
        Ok(TaylorRegressors {
            dependent: cut(&self.dependent, "dependent")?,
            columns: self
                .columns
                .iter()
                .zip(&self.names)
                .map(|(c, name)| cut(c, name))
                .collect::<Result<Vec<_>>>()?,
            names: self.names.clone(),
        })
    }

    /// Dense (y, X) over exactly `[from, to)` axis indices; errors if
    /// any series has a hole there.
    pub fn materialize(&self, from: usize, to: usize) -> Result<(Array1<f64>, Array2<f64>)> {
        if to <= from {
            return Err(Error::TooShort { need: 1, got: 0 });
        }
        let n = to - from;
        let k = self.columns.len();
        let y_slice = self.dependent.slice(from, to).ok_or_else(|| {
            Error::Alignment(format!(
                "interest differential not defined over rows {from}..{to}"
            ))
        })?;
        let y = Array1::from(y_slice.to_vec());
        let mut x = Array2::<f64>::zeros((n, k));
        for (j, col) in self.columns.iter().enumerate() {
            let vals = col.slice(from, to).ok_or_else(|| {
                Error::Alignment(format!(
                    "column {} not defined over rows {from}..{to}",
                    self.names[j]
                ))
            })?;
            for (i, &v) in vals.iter().enumerate() {
                x[[i, j]] = v;
            }
        }
        Ok((y, x))
    }

    /// Dense design over the full mutual coverage; also returns the
    /// starting axis index.
    pub fn materialize_all(&self) -> Result<(Array1<f64>, Array2<f64>, usize)> {
        let from = self.first_defined();
        let to = self.end_defined();
        let (y, x) = self.materialize(from, to)?;
        Ok((y, x, from))
    }
}

fn gap_series<'a>(c: &'a CountrySeries, source: GapSource, who: &str) -> Result<&'a Series> {
    match source {
        GapSource::Output => Ok(&c.y_gap),
        GapSource::Unemployment => c.u_gap.as_ref().ok_or_else(|| Error::Capability {
            country: who.to_string(),
            requirement: "unemployment gap series".to_string(),
        }),
    }
}

/// Build the regression design for one country against the panel base.
pub fn build_taylor_regressors(
    panel: &SeriesPanel,
    country: &str,
    kind: FundamentalKind,
    gap_source: GapSource,
) -> Result<TaylorRegressors> {
    if !kind.is_taylor() {
        return Err(Error::Config(format!(
            "{} is not a Taylor-rule fundamental",
            kind.token()
        )));
    }
    let home = panel.country(country)?;
    let base = panel.base_country()?;
    let home_gap = gap_series(home, gap_source, country)?;
    let base_gap = gap_series(base, gap_source, "base country")?;
    let dependent = home.i.sub(&base.i);
    let (columns, names): (Vec<Series>, Vec<&'static str>) = match kind {
        FundamentalKind::TrOn => (
            vec![
                home.pi.sub(&base.pi),
                home_gap.sub(base_gap),
                home.q.clone(),
            ],
            vec!["infl_diff", "gap_diff", "real_rate"],
        ),
        FundamentalKind::TrOs => (
            vec![
                home.pi.sub(&base.pi),
                home_gap.sub(base_gap),
                dependent.lag(1),
                home.q.clone(),
            ],
            vec!["infl_diff", "gap_diff", "rate_diff_lag", "real_rate"],
        ),
        FundamentalKind::TrEn => (
            // Foreign blocks enter negated so every fitted coefficient
            // keeps the home-positive sign convention.
            vec![
                home.pi.clone(),
                base.pi.map(|v| -v),
                home_gap.clone(),
                base_gap.map(|v| -v),
                home.q.clone(),
            ],
            vec!["infl_home", "infl_base_neg", "gap_home", "gap_base_neg", "real_rate"],
        ),
        _ => unreachable!(),
    };
    Ok(TaylorRegressors {
        dependent,
        columns,
        names,
    })
}

fn fitted_z(x: &Array2<f64>, coef_rows: impl Fn(usize) -> Array1<f64>) -> Vec<f64> {
    (0..x.nrows())
        .map(|t| {
            let c = coef_rows(t);
            x.row(t).dot(&c)
        })
        .collect()
}

/// Time-varying-coefficient fit over the regressors' full coverage.
/// z_t is the fitted interest differential from the posterior-mean
/// coefficient path; Ω = z + s.
pub fn taylor_fundamental_tvp(
    spec: &FundamentalSpec,
    regs: &TaylorRegressors,
    s: &Series,
    prior: &PriorSpec,
    config: &GibbsConfig,
) -> Result<FundamentalSeries> {
    Ok(taylor_fundamental_tvp_with_draws(spec, regs, s, prior, config)?.0)
}

/// [`taylor_fundamental_tvp`] that also hands back the chain output,
/// for convergence reporting and draw dumps.
pub fn taylor_fundamental_tvp_with_draws(
    spec: &FundamentalSpec,
    regs: &TaylorRegressors,
    s: &Series,
    prior: &PriorSpec,
    config: &GibbsConfig,
) -> Result<(FundamentalSeries, PosteriorDraws)> {
    let (y, x, start) = regs.materialize_all()?;
    let draws = run_gibbs(y.view(), x.view(), prior, config)?;
    let z_vals = fitted_z(&x, |t| draws.posterior_mean_states.row(t).to_owned());
    let fs = FundamentalSeries::from_z(*spec, Series::new(start, z_vals), s)?;
    Ok((fs, draws))
}

/// Constant-coefficient fit of the same regression by least squares.
pub fn taylor_fundamental_ols(
    spec: &FundamentalSpec,
    regs: &TaylorRegressors,
    s: &Series,
) -> Result<FundamentalSeries> {
    let (y, x, start) = regs.materialize_all()?;
    let fit = ols(x.view(), y.view())?;
    let z_vals = fitted_z(&x, |_| fit.coef.clone());
    FundamentalSeries::from_z(*spec, Series::new(start, z_vals), s)
}
