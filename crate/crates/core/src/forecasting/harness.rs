//! The out-of-sample driver: walk forecast origins through an
//! evaluation window, re-estimate the fundamental and the forecast
//! regression at every origin from data dated no later than the
//! origin, and emit prediction/realization records.

use super::{
    design_with_intercept, lsdv_panel_forecast, model_id, ols_direct_forecast,
    tvp_direct_forecast, tvp_direct_forecast_with_draws, Approach, ForecastRecord, PanelMember,
    Scheme,
};
use crate::dataio::{Quarter, Series, SeriesPanel};
use crate::error::{Error, Result};
use crate::fundamentals::{
    build_taylor_regressors, extract_factors, factor_fundamental, simple_fundamental,
    taylor_fundamental_ols, taylor_fundamental_tvp, taylor_fundamental_tvp_with_draws, Estimation,
    FundamentalKind, FundamentalSpec, TaylorRegressors,
};
use crate::gibbs::{parameterize_priors, GibbsConfig, PosteriorDraws, PriorSpec};
use crate::regress::ols;
use crate::seeding::derive_seed;
use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// An evaluation window: the quarters being forecast (targets) and the
/// currencies participating.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub label: String,
    pub start: Quarter,
    pub end: Quarter,
    pub currencies: Vec<String>,
}

/// Fixed dates that anchor estimation: the prior-training span and the
/// first quarter of the recursive estimation sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleSpec {
    pub training_start: Quarter,
    pub training_len: usize,
    pub insample_start: Quarter,
}

/// Everything one harness cell needs: the data, the model pairing, the
/// window/horizon coordinates, and chain settings.
#[derive(Debug, Clone)]
pub struct HarnessCell<'a> {
    pub panel: &'a SeriesPanel,
    pub fund: FundamentalSpec,
    pub approach: Approach,
    pub window: &'a WindowSpec,
    pub horizon: usize,
    pub scheme: Scheme,
    pub sample: &'a SampleSpec,
    /// Chain settings; the seed field is ignored in favor of per-chain
    /// derivation from `master_seed`.
    pub gibbs: GibbsConfig,
    /// Innovation-scale factor for every prior built here.
    pub tau: f64,
    pub master_seed: u64,
}

struct CellContext<'a> {
    cell: &'a HarnessCell<'a>,
    model: String,
    tr_start: usize,
    /// Inclusive end of the training span.
    tr_end: usize,
    insample: usize,
    /// All non-base panel currencies, sorted; fixes factor-panel column order.
    panel_currencies: Vec<String>,
    /// Identity-computed deviations, full span (simple kinds only).
    simple_z: BTreeMap<String, Series>,
    /// Taylor designs over the full axis (Taylor kinds only).
    taylor: BTreeMap<String, TaylorRegressors>,
    /// Priors for per-origin Taylor chain runs (Taylor + tvp_bayes only).
    taylor_priors: BTreeMap<String, PriorSpec>,
    /// Forecast-regression priors (tvp approach only).
    forecast_priors: BTreeMap<String, PriorSpec>,
}

impl<'a> CellContext<'a> {
    fn new(cell: &'a HarnessCell<'a>) -> Result<Self> {
        cell.fund.validate()?;
        if cell.horizon == 0 {
            return Err(Error::Config("horizon must be at least 1".to_string()));
        }
        if cell.window.currencies.is_empty() {
            return Err(Error::Config(format!(
                "window {} has no currencies",
                cell.window.label
            )));
        }
        let axis = &cell.panel.axis;
        let tr_start = axis.index_of(cell.sample.training_start).ok_or_else(|| {
            Error::Config(format!(
                "training start {} is outside the data span",
                cell.sample.training_start
            ))
        })?;
        if cell.sample.training_len < 2 {
            return Err(Error::Config("training sample must have at least 2 quarters".to_string()));
        }
        let tr_end = tr_start + cell.sample.training_len - 1;
        if tr_end >= axis.len {
            return Err(Error::Config("training sample runs past the data".to_string()));
        }
        let insample = axis.index_of(cell.sample.insample_start).ok_or_else(|| {
            Error::Config(format!(
                "in-sample start {} is outside the data span",
                cell.sample.insample_start
            ))
        })?;
        for c in &cell.window.currencies {
            if c == &cell.panel.base {
                return Err(Error::Config(format!(
                    "window {} includes the base country {c}",
                    cell.window.label
                )));
            }
            cell.panel.country(c)?;
        }
        let panel_currencies = cell.panel.currencies();
        if let FundamentalKind::Factor(_) = cell.fund.kind {
            for c in &cell.window.currencies {
                if !panel_currencies.contains(c) {
                    return Err(Error::Config(format!(
                        "{c} is not part of the factor extraction panel"
                    )));
                }
            }
        }

        let mut simple_z = BTreeMap::new();
        let mut taylor = BTreeMap::new();
        match cell.fund.kind {
            FundamentalKind::Mm | FundamentalKind::Ppp | FundamentalKind::Uirp => {
                for c in &cell.window.currencies {
                    let fs = simple_fundamental(cell.fund.kind, cell.panel, c)?;
                    simple_z.insert(c.clone(), fs.z);
                }
            }
            FundamentalKind::TrOn | FundamentalKind::TrOs | FundamentalKind::TrEn => {
                for c in &cell.window.currencies {
                    taylor.insert(
                        c.clone(),
                        build_taylor_regressors(cell.panel, c, cell.fund.kind, cell.fund.gap_source)?,
                    );
                }
            }
            FundamentalKind::Factor(_) => {}
        }

        let mut ctx = CellContext {
            cell,
            model: model_id(&cell.fund, cell.approach),
            tr_start,
            tr_end,
            insample,
            panel_currencies,
            simple_z,
            taylor,
            taylor_priors: BTreeMap::new(),
            forecast_priors: BTreeMap::new(),
        };
        if ctx.cell.fund.kind.is_taylor() && ctx.cell.fund.estimation == Estimation::TvpBayes {
            for c in &cell.window.currencies {
                let regs = &ctx.taylor[c];
                let (y0, x0) = regs.materialize(ctx.tr_start, ctx.tr_end + 1)?;
                ctx.taylor_priors
                    .insert(c.clone(), parameterize_priors(x0.view(), y0.view(), cell.tau, 0)?);
            }
        }
        if cell.approach == Approach::TvpRegression {
            ctx.forecast_priors = ctx.build_forecast_priors()?;
        }
        Ok(ctx)
    }

    fn axis(&self) -> &crate::dataio::Axis {
        &self.cell.panel.axis
    }

    fn spot(&self, currency: &str) -> Result<&Series> {
        Ok(&self.cell.panel.country(currency)?.s)
    }

    /// Log exchange rates of every panel currency over `[from, to)`,
    /// columns in `panel_currencies` order.
    fn s_matrix(&self, from: usize, to: usize) -> Result<Array2<f64>> {
        let mut m = Array2::<f64>::zeros((to - from, self.panel_currencies.len()));
        for (j, c) in self.panel_currencies.iter().enumerate() {
            let vals = self.spot(c)?.require(self.axis(), c, from, to)?;
            for (i, &v) in vals.iter().enumerate() {
                m[[i, j]] = v;
            }
        }
        Ok(m)
    }

    /// Deviations over the training span, one series per window
    /// currency, built only from training-window information.
    fn training_z(&self) -> Result<BTreeMap<String, Series>> {
        let (a, b) = (self.tr_start, self.tr_end);
        let mut out = BTreeMap::new();
        match self.cell.fund.kind {
            FundamentalKind::Mm | FundamentalKind::Ppp | FundamentalKind::Uirp => {
                for c in &self.cell.window.currencies {
                    let vals = self.simple_z[c].require(self.axis(), c, a, b + 1)?;
                    out.insert(c.clone(), Series::new(a, vals.to_vec()));
                }
            }
            FundamentalKind::TrOn | FundamentalKind::TrOs | FundamentalKind::TrEn => {
                // Training deviations come from a least-squares fit on
                // the training span; the chain prior is built on top.
                for c in &self.cell.window.currencies {
                    let (y0, x0) = self.taylor[c].materialize(a, b + 1)?;
                    let fit = ols(x0.view(), y0.view())?;
                    let vals: Vec<f64> = (0..x0.nrows()).map(|t| x0.row(t).dot(&fit.coef)).collect();
                    out.insert(c.clone(), Series::new(a, vals));
                }
            }
            FundamentalKind::Factor(r) => {
                let matrix = self.s_matrix(a, b + 1)?;
                let mut fm = extract_factors(&matrix, r)?;
                fm.start = a;
                for c in &self.cell.window.currencies {
                    let idx = self.panel_currencies.iter().position(|p| p == c).unwrap();
                    let fs = factor_fundamental(&fm, idx, self.spot(c)?)?;
                    out.insert(c.clone(), fs.z);
                }
            }
        }
        Ok(out)
    }

    fn build_forecast_priors(&self) -> Result<BTreeMap<String, PriorSpec>> {
        let h = self.cell.horizon;
        let ztr = self.training_z()?;
        let mut out = BTreeMap::new();
        for (c, z) in ztr {
            let s = self.spot(&c)?;
            let last = self.tr_end.checked_sub(h).ok_or(Error::ShortTraining {
                have: 0,
                need: 4,
            })?;
            let first = self.tr_start.max(z.offset());
            if last < first {
                return Err(Error::ShortTraining { have: 0, need: 4 });
            }
            let mut zs = Vec::with_capacity(last - first + 1);
            let mut ds = Vec::with_capacity(last - first + 1);
            for t in first..=last {
                zs.push(z.get(t).expect("training coverage checked"));
                let s_t = s.require(self.axis(), &c, t, t + h + 1)?;
                ds.push(s_t[h] - s_t[0]);
            }
            let x = design_with_intercept(&zs);
            let y = Array1::from(ds);
            let prior = parameterize_priors(x.view(), y.view(), self.cell.tau, 0)?;
            out.insert(c, prior);
        }
        Ok(out)
    }

    /// First index of the estimation sample for a given origin.
    fn est_start(&self, origin: usize) -> Result<usize> {
        match self.cell.scheme {
            Scheme::Recursive => Ok(self.insample),
            Scheme::Rolling(len) => {
                if len < 2 {
                    return Err(Error::Config("rolling window must be at least 2 quarters".to_string()));
                }
                (origin + 1).checked_sub(len).ok_or_else(|| {
                    Error::Config(format!(
                        "rolling window of {len} quarters reaches before the data start"
                    ))
                })
            }
        }
    }

    /// Draw-stream seed for a fundamental chain. Horizon-free: the same
    /// origin re-uses the same stream at every forecast horizon.
    fn fundamental_seed(&self, currency: &str, origin_label: &str) -> u64 {
        derive_seed(
            self.cell.master_seed,
            &[
                "fundamental",
                &self.cell.fund.id(),
                &self.cell.window.label,
                currency,
                origin_label,
            ],
        )
    }

    /// Draw-stream seed for a forecast-regression chain.
    fn forecast_seed(&self, currency: &str, h_label: &str, origin_label: &str) -> u64 {
        derive_seed(
            self.cell.master_seed,
            &[
                "forecast",
                &self.model,
                &self.cell.window.label,
                currency,
                h_label,
                origin_label,
            ],
        )
    }

    /// Deviation series per window currency, estimated from data in
    /// `[est_start, origin]` only.
    fn z_at(&self, e0: usize, origin: usize) -> Result<BTreeMap<String, Series>> {
        let mut out = BTreeMap::new();
        match self.cell.fund.kind {
            FundamentalKind::Mm | FundamentalKind::Ppp | FundamentalKind::Uirp => {
                for c in &self.cell.window.currencies {
                    out.insert(c.clone(), self.simple_z[c].clone());
                }
            }
            FundamentalKind::TrOn | FundamentalKind::TrOs | FundamentalKind::TrEn => {
                let origin_label = self.axis().quarter(origin).to_string();
                for c in &self.cell.window.currencies {
                    let regs = &self.taylor[c];
                    let est = e0.max(regs.first_defined());
                    if origin < est {
                        return Err(Error::ShortTraining { have: 0, need: 4 });
                    }
                    let sub = regs.restricted(est, origin + 1)?;
                    let s = self.spot(c)?;
                    let fs = match self.cell.fund.estimation {
                        Estimation::ConstantOls => {
                            taylor_fundamental_ols(&self.cell.fund, &sub, s)?
                        }
                        Estimation::TvpBayes => {
                            let mut config = self.cell.gibbs.clone();
                            config.keep_state_draws = false;
                            config.seed = self.fundamental_seed(c, &origin_label);
                            taylor_fundamental_tvp(
                                &self.cell.fund,
                                &sub,
                                s,
                                &self.taylor_priors[c],
                                &config,
                            )?
                        }
                        Estimation::Identity => unreachable!("validated"),
                    };
                    out.insert(c.clone(), fs.z);
                }
            }
            FundamentalKind::Factor(r) => {
                let matrix = self.s_matrix(e0, origin + 1)?;
                let mut fm = extract_factors(&matrix, r)?;
                fm.start = e0;
                for c in &self.cell.window.currencies {
                    let idx = self.panel_currencies.iter().position(|p| p == c).unwrap();
                    let fs = factor_fundamental(&fm, idx, self.spot(c)?)?;
                    out.insert(c.clone(), fs.z);
                }
            }
        }
        Ok(out)
    }

    /// Regression pairs for one currency at one origin: deviations at t
    /// against realized changes over (t, t+h], for t up to origin − h,
    /// plus the origin deviation that multiplies the fitted line.
    fn pairs(
        &self,
        currency: &str,
        z: &Series,
        e0: usize,
        origin: usize,
    ) -> Result<(Vec<f64>, Vec<f64>, f64)> {
        let h = self.cell.horizon;
        let s = self.spot(currency)?;
        let gap = |idx: usize| Error::DateGap {
            country: currency.to_string(),
            quarter: self.axis().quarter(idx),
        };
        let z_origin = z.get(origin).ok_or_else(|| gap(origin))?;
        let first = e0.max(z.offset());
        let mut zs = Vec::new();
        let mut ds = Vec::new();
        if origin >= first + h {
            for t in first..=(origin - h) {
                let zv = z.get(t).ok_or_else(|| gap(t))?;
                let s_t = s.get(t).ok_or_else(|| gap(t))?;
                let s_th = s.get(t + h).ok_or_else(|| gap(t + h))?;
                zs.push(zv);
                ds.push(s_th - s_t);
            }
        }
        Ok((zs, ds, z_origin))
    }

    /// All per-currency predictions at one origin.
    fn predictions_at(&self, origin: usize) -> Result<Vec<(String, f64)>> {
        let e0 = self.est_start(origin)?;
        let zmap = self.z_at(e0, origin)?;
        let mut currencies: Vec<&String> = self.cell.window.currencies.iter().collect();
        currencies.sort();
        currencies.dedup();
        match self.cell.approach {
            Approach::PanelLsdv => {
                let mut members = Vec::with_capacity(currencies.len());
                for c in &currencies {
                    let (zs, ds, z0) = self.pairs(c, &zmap[c.as_str()], e0, origin)?;
                    members.push(PanelMember {
                        currency: (*c).clone(),
                        z: zs,
                        ds,
                        z_origin: z0,
                    });
                }
                let (_, forecasts) = lsdv_panel_forecast(&members)?;
                Ok(forecasts)
            }
            Approach::OlsRegression => {
                let mut out = Vec::with_capacity(currencies.len());
                for c in &currencies {
                    let (zs, ds, z0) = self.pairs(c, &zmap[c.as_str()], e0, origin)?;
                    out.push(((*c).clone(), ols_direct_forecast(&zs, &ds, z0)?));
                }
                Ok(out)
            }
            Approach::TvpRegression => {
                let origin_label = self.axis().quarter(origin).to_string();
                let h_label = self.cell.horizon.to_string();
                let mut out = Vec::with_capacity(currencies.len());
                for c in &currencies {
                    let (zs, ds, z0) = self.pairs(c, &zmap[c.as_str()], e0, origin)?;
                    let mut config = self.cell.gibbs.clone();
                    config.keep_state_draws = false;
                    config.seed = self.forecast_seed(c, &h_label, &origin_label);
                    let f = tvp_direct_forecast(&zs, &ds, z0, &self.forecast_priors[c.as_str()], &config)?;
                    out.push(((*c).clone(), f));
                }
                Ok(out)
            }
        }
    }

    /// Re-run every sampler chain the cell uses at one origin and keep
    /// the retained draws. Seeds are derived exactly as in the
    /// production pass, so the captured chains equal the ones behind
    /// the published forecasts.
    fn chains_at(&self, origin: usize) -> Result<Vec<ChainDump>> {
        let e0 = self.est_start(origin)?;
        let origin_label = self.axis().quarter(origin).to_string();
        let origin_q = self.axis().quarter(origin);
        let mut dumps = Vec::new();
        let taylor_kind = matches!(
            self.cell.fund.kind,
            FundamentalKind::TrOn | FundamentalKind::TrOs | FundamentalKind::TrEn
        );
        if taylor_kind && matches!(self.cell.fund.estimation, Estimation::TvpBayes) {
            for c in &self.cell.window.currencies {
                let regs = &self.taylor[c];
                let est = e0.max(regs.first_defined());
                if origin < est {
                    return Err(Error::ShortTraining { have: 0, need: 4 });
                }
                let sub = regs.restricted(est, origin + 1)?;
                let s = self.spot(c)?;
                let mut config = self.cell.gibbs.clone();
                config.keep_state_draws = false;
                config.seed = self.fundamental_seed(c, &origin_label);
                let (_, draws) = taylor_fundamental_tvp_with_draws(
                    &self.cell.fund,
                    &sub,
                    s,
                    &self.taylor_priors[c],
                    &config,
                )?;
                dumps.push(ChainDump {
                    role: "fundamental",
                    currency: c.clone(),
                    origin: origin_q,
                    draws,
                });
            }
        }
        if matches!(self.cell.approach, Approach::TvpRegression) {
            let zmap = self.z_at(e0, origin)?;
            let h_label = self.cell.horizon.to_string();
            let mut currencies: Vec<&String> = self.cell.window.currencies.iter().collect();
            currencies.sort();
            currencies.dedup();
            for c in &currencies {
                let (zs, ds, z0) = self.pairs(c, &zmap[c.as_str()], e0, origin)?;
                let mut config = self.cell.gibbs.clone();
                config.keep_state_draws = false;
                config.seed = self.forecast_seed(c, &h_label, &origin_label);
                let (_, draws) = tvp_direct_forecast_with_draws(
                    &zs,
                    &ds,
                    z0,
                    &self.forecast_priors[c.as_str()],
                    &config,
                )?;
                dumps.push(ChainDump {
                    role: "forecast",
                    currency: (*c).clone(),
                    origin: origin_q,
                    draws,
                });
            }
        }
        Ok(dumps)
    }

    /// Axis indices of every forecast origin in the window, oldest first.
    fn window_origins(&self) -> Result<Vec<usize>> {
        let axis = self.axis();
        let w = self.cell.window;
        let h = self.cell.horizon;
        let ws = axis.index_of(w.start).ok_or_else(|| {
            Error::Config(format!("window start {} is outside the data span", w.start))
        })?;
        let we = axis.index_of(w.end).ok_or_else(|| {
            Error::Config(format!("window end {} is outside the data span", w.end))
        })?;
        if we < ws {
            return Err(Error::Config(format!(
                "window {} ends before it starts",
                w.label
            )));
        }
        if ws < h {
            return Err(Error::Config(format!(
                "window targets begin before the data allows a {h}-quarter origin"
            )));
        }
        if matches!(self.cell.scheme, Scheme::Recursive) && ws - h < self.insample {
            return Err(Error::Config(format!(
                "first origin {} precedes the in-sample start {}",
                axis.quarter(ws - h),
                self.cell.sample.insample_start
            )));
        }
        Ok((ws..=we).map(|target| target - h).collect())
    }

    fn realized(&self, currency: &str, origin: usize) -> Result<f64> {
        let h = self.cell.horizon;
        let s = self.spot(currency)?;
        let vals = s.require(self.axis(), currency, origin, origin + h + 1)?;
        Ok(vals[h] - vals[0])
    }
}

/// Run one harness cell over its whole window.
pub fn run_harness(cell: &HarnessCell) -> Result<Vec<ForecastRecord>> {
    let ctx = CellContext::new(cell)?;
    let origins = ctx.window_origins()?;
    let mut records = Vec::new();
    for &origin in &origins {
        let preds = ctx.predictions_at(origin)?;
        for (currency, predicted) in preds {
            let realized = ctx.realized(&currency, origin)?;
            records.push(ForecastRecord {
                currency,
                origin: ctx.axis().quarter(origin),
                horizon: cell.horizon,
                model: ctx.model.clone(),
                predicted,
                realized,
            });
        }
    }
    Ok(records)
}

/// The retained sampler output of one chain, re-run at a forecast
/// origin for inspection.
#[derive(Debug, Clone)]
pub struct ChainDump {
    /// `"fundamental"` for policy-rule chains, `"forecast"` for the
    /// forecast-regression chain.
    pub role: &'static str,
    pub currency: String,
    pub origin: Quarter,
    pub draws: PosteriorDraws,
}

/// Re-run the sampler chains behind the most recent forecast origin of
/// a cell and hand back their retained draws, e.g. for convergence
/// diagnostics. Seeds match [`run_harness`] exactly, so the captured
/// chains equal the ones behind the published records. Cells that use
/// no sampler return an empty list.
pub fn final_origin_chains(cell: &HarnessCell) -> Result<Vec<ChainDump>> {
    let ctx = CellContext::new(cell)?;
    let origins = ctx.window_origins()?;
    let last = *origins.last().expect("validated window is non-empty");
    ctx.chains_at(last)
}

/// Predictions only, at a single origin — everything the cell computes
/// from data dated ≤ origin. Usable on a panel truncated at the
/// origin, which is exactly how the no-look-ahead test exercises it.
pub fn harness_predictions(cell: &HarnessCell, origin: Quarter) -> Result<Vec<(String, f64)>> {
    let ctx = CellContext::new(cell)?;
    let idx = cell
        .panel
        .axis
        .index_of(origin)
        .ok_or_else(|| Error::Config(format!("origin {origin} is outside the data span")))?;
    ctx.predictions_at(idx)
}
