//! Direct h-step out-of-sample forecasting of exchange-rate changes
//! from fundamental deviations, under three approaches: time-varying
//! coefficients, constant single-equation least squares, and a pooled
//! fixed-effect panel. A driftless random walk (predicted change zero)
//! is the benchmark throughout.

mod harness;

pub use harness::{
    final_origin_chains, harness_predictions, run_harness, ChainDump, HarnessCell, SampleSpec,
    WindowSpec,
};

use crate::error::{Error, Result};
use crate::fundamentals::FundamentalSpec;
use crate::gibbs::{run_gibbs, GibbsConfig, PosteriorDraws, PriorSpec};
use crate::regress::ols;
use crate::dataio::Quarter;
use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// The random walk predicts no change at any horizon.
pub const RW_PREDICTION: f64 = 0.0;

/// Currency label attached to aggregated euro-area records.
pub const EURO: &str = "Euro";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Approach {
    #[serde(rename = "tvp")]
    TvpRegression,
    #[serde(rename = "ols")]
    OlsRegression,
    #[serde(rename = "lsdv")]
    PanelLsdv,
}

impl Approach {
    pub fn token(self) -> &'static str {
        match self {
            Approach::TvpRegression => "tvp",
            Approach::OlsRegression => "ols",
            Approach::PanelLsdv => "lsdv",
        }
    }
}

/// Estimation-window regime for the harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Expanding sample from the in-sample start to each origin.
    Recursive,
    /// Fixed-length sample ending at each origin.
    Rolling(usize),
}

/// Identifier for one fundamental × forecasting-approach pairing.
pub fn model_id(fund: &FundamentalSpec, approach: Approach) -> String {
    format!("{}__{}", fund.id(), approach.token())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastRecord {
    pub currency: String,
    /// Quarter the forecast is made from; the target is origin + horizon.
    pub origin: Quarter,
    pub horizon: usize,
    pub model: String,
    /// Predicted h-quarter log exchange-rate change.
    pub predicted: f64,
    /// Realized change s_{origin+h} − s_origin.
    pub realized: f64,
}

fn design_with_intercept(z: &[f64]) -> Array2<f64> {
    let mut x = Array2::<f64>::ones((z.len(), 2));
    for (i, &v) in z.iter().enumerate() {
        x[[i, 1]] = v;
    }
    x
}

/// Time-varying-coefficient forecast: estimate Δs on [1, z] with the
/// chain, then project the terminal posterior-mean coefficients (the
/// state is a martingale, so the last state is the h-step coefficient
/// forecast) onto the origin's deviation.
pub fn tvp_direct_forecast(
    z: &[f64],
    ds: &[f64],
    z_origin: f64,
    prior: &PriorSpec,
    config: &GibbsConfig,
) -> Result<f64> {
    Ok(tvp_direct_forecast_with_draws(z, ds, z_origin, prior, config)?.0)
}

/// Same as [`tvp_direct_forecast`] but also hands back the sampler
/// output so callers can inspect or persist the chain.
pub fn tvp_direct_forecast_with_draws(
    z: &[f64],
    ds: &[f64],
    z_origin: f64,
    prior: &PriorSpec,
    config: &GibbsConfig,
) -> Result<(f64, PosteriorDraws)> {
    if z.len() != ds.len() {
        return Err(Error::Alignment(format!(
            "{} deviations but {} change targets",
            z.len(),
            ds.len()
        )));
    }
    if z.is_empty() {
        return Err(Error::ShortTraining { have: 0, need: 1 });
    }
    let x = design_with_intercept(z);
    let y = Array1::from(ds.to_vec());
    let draws = run_gibbs(y.view(), x.view(), prior, config)?;
    let last = draws.posterior_mean_states.row(x.nrows() - 1);
    let forecast = last[0] + last[1] * z_origin;
    Ok((forecast, draws))
}

/// Constant-coefficient forecast by least squares on [1, z].
pub fn ols_direct_forecast(z: &[f64], ds: &[f64], z_origin: f64) -> Result<f64> {
    if z.len() != ds.len() {
        return Err(Error::Alignment(format!(
            "{} deviations but {} change targets",
            z.len(),
            ds.len()
        )));
    }
    if z.len() < 4 {
        return Err(Error::ShortTraining {
            have: z.len(),
            need: 4,
        });
    }
    let x = design_with_intercept(z);
    let y = Array1::from(ds.to_vec());
    let fit = ols(x.view(), y.view())?;
    Ok(fit.coef[0] + fit.coef[1] * z_origin)
}

/// One country's stacked regression data for the pooled panel.
#[derive(Debug, Clone)]
pub struct PanelMember {
    pub currency: String,
    pub z: Vec<f64>,
    pub ds: Vec<f64>,
    pub z_origin: f64,
}

/// Fixed-effect fit: one intercept per country, one common slope.
#[derive(Debug, Clone)]
pub struct PanelFit {
    pub intercepts: Vec<(String, f64)>,
    pub slope: f64,
}

/// Pooled dummy-variable regression Δs_i = ω_i + β z_i + ε, fit
/// literally with country dummies, plus per-country forecasts
/// ω̂_i + β̂ z_{i,origin}.
pub fn lsdv_panel_forecast(members: &[PanelMember]) -> Result<(PanelFit, Vec<(String, f64)>)> {
    if members.is_empty() {
        return Err(Error::Config("panel forecast needs at least one country".to_string()));
    }
    let n_countries = members.len();
    let mut rows = 0usize;
    for m in members {
        if m.z.len() != m.ds.len() {
            return Err(Error::Alignment(format!(
                "{}: {} deviations but {} change targets",
                m.currency,
                m.z.len(),
                m.ds.len()
            )));
        }
        if m.z.len() < 2 {
            return Err(Error::Capability {
                country: m.currency.clone(),
                requirement: "at least 2 usable forecast pairs".to_string(),
            });
        }
        rows += m.z.len();
    }
    let mut x = Array2::<f64>::zeros((rows, n_countries + 1));
    let mut y = Array1::<f64>::zeros(rows);
    let mut row = 0;
    for (j, m) in members.iter().enumerate() {
        for (i, &zv) in m.z.iter().enumerate() {
            x[[row, j]] = 1.0;
            x[[row, n_countries]] = zv;
            y[row] = m.ds[i];
            row += 1;
        }
    }
    let fit = ols(x.view(), y.view())?;
    let slope = fit.coef[n_countries];
    let intercepts: Vec<(String, f64)> = members
        .iter()
        .enumerate()
        .map(|(j, m)| (m.currency.clone(), fit.coef[j]))
        .collect();
    let forecasts = members
        .iter()
        .enumerate()
        .map(|(j, m)| (m.currency.clone(), fit.coef[j] + slope * m.z_origin))
        .collect();
    Ok((PanelFit { intercepts, slope }, forecasts))
}

/// Collapse euro-area member forecasts into per-member records under a
/// common "Euro" label: the prediction is the unweighted member
/// average at each origin, while each member keeps its own realized
/// change, so pooled evaluation measures the average forecast against
/// every member outcome.
pub fn euro_aggregate(
    records: &[ForecastRecord],
    members: &[String],
) -> Result<Vec<ForecastRecord>> {
    let member_set: std::collections::BTreeSet<&str> =
        members.iter().map(String::as_str).collect();
    let mut groups: BTreeMap<(String, usize, Quarter), Vec<&ForecastRecord>> = BTreeMap::new();
    for r in records {
        if member_set.contains(r.currency.as_str()) {
            groups
                .entry((r.model.clone(), r.horizon, r.origin))
                .or_default()
                .push(r);
        }
    }
    let mut out = Vec::new();
    for ((model, horizon, origin), group) in groups {
        let present: std::collections::BTreeSet<&str> =
            group.iter().map(|r| r.currency.as_str()).collect();
        let missing: Vec<String> = members
            .iter()
            .filter(|m| !present.contains(m.as_str()))
            .cloned()
            .collect();
        if !missing.is_empty() {
            return Err(Error::MissingMembers { origin, missing });
        }
        let mean = group.iter().map(|r| r.predicted).sum::<f64>() / group.len() as f64;
        let mut sorted = group;
        sorted.sort_by(|a, b| a.currency.cmp(&b.currency));
        for r in sorted {
            out.push(ForecastRecord {
                currency: EURO.to_string(),
                origin,
                horizon,
                model: model.clone(),
                predicted: mean,
                realized: r.realized,
            });
        }
    }
    Ok(out)
}
