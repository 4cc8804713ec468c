//! The declarative run configuration. One TOML file names the data,
//! the sample layout, the evaluation windows, the model list, and every
//! tuning knob in the pipeline; anything left out falls back to the
//! documented default. The master seed is mandatory — a run is not
//! reproducible without one.

use serde::Deserialize;
use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use tvpfx_core::dataio::{
    EuroConversion, HpModeOption, Quarter, TransformOptions, Variable,
};
use tvpfx_core::error::{Error, Result};
use tvpfx_core::evaluation::DM_THRESHOLD;
use tvpfx_core::forecasting::{model_id, Approach, SampleSpec, Scheme, WindowSpec};
use tvpfx_core::fundamentals::{Estimation, FundamentalKind, FundamentalSpec, GapSource};
use tvpfx_core::gibbs::{GibbsConfig, DEFAULT_TAU};

/// Horizons accepted without `allow_any_horizon`.
const STANDARD_HORIZONS: [usize; 4] = [1, 4, 8, 12];

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub data: DataSection,
    #[serde(default)]
    pub transforms: TransformsSection,
    pub euro: Option<EuroSection>,
    pub sample: SampleSpec,
    pub windows: Vec<WindowSection>,
    pub run: RunSection,
    #[serde(default)]
    pub gibbs: GibbsSection,
    pub models: Vec<ModelSection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    /// Directory holding one CSV per variable (`exchange_rate.csv`,
    /// `interest_rate.csv`, `cpi.csv`, `ip.csv`, `money.csv`, and
    /// optionally `unemployment.csv`), each with a `date` column and
    /// one column per country.
    pub dir: PathBuf,
    pub base_country: String,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TransformsSection {
    /// Trend-filter smoothing weight (default 1600, the quarterly convention).
    pub hp_lambda: Option<f64>,
    /// Scale on quarterly log CPI changes (default 400 = annualized percent).
    pub inflation_annualization: Option<f64>,
    /// Scale on log-level trend gaps (default 100 = percent).
    pub gap_scale: Option<f64>,
    /// `recursive` (default; gaps at t use data through t only) or `full`.
    pub hp_mode: Option<HpModeOption>,
}

impl TransformsSection {
    pub fn to_options(&self) -> TransformOptions {
        let mut o = TransformOptions::default();
        if let Some(v) = self.hp_lambda {
            o.hp_lambda = v;
        }
        if let Some(v) = self.inflation_annualization {
            o.inflation_annualization = v;
        }
        if let Some(v) = self.gap_scale {
            o.gap_scale = v;
        }
        if let Some(v) = self.hp_mode {
            o.hp_mode = v;
        }
        o
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EuroSection {
    /// First quarter at which members trade as the union currency.
    pub cutover: Quarter,
    /// Column of the exchange-rate file carrying the union rate.
    pub rate_column: String,
    /// Member currencies whose forecasts are additionally aggregated
    /// into a union record (leave empty to skip aggregation).
    #[serde(default)]
    pub members: Vec<String>,
    /// Fixed national conversion factors per member country.
    pub factors: BTreeMap<String, f64>,
}

impl EuroSection {
    pub fn conversion(&self) -> EuroConversion {
        EuroConversion {
            cutover: self.cutover,
            rate_column: self.rate_column.clone(),
            factors: self.factors.clone(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSection {
    pub label: String,
    /// First forecast-target quarter.
    pub start: Quarter,
    /// Last forecast-target quarter.
    pub end: Quarter,
    pub currencies: Vec<String>,
    /// Estimation-sample length for this window under the rolling
    /// scheme; falls back to `run.rolling_len`.
    pub rolling_len: Option<usize>,
}

impl WindowSection {
    pub fn to_spec(&self) -> WindowSpec {
        WindowSpec {
            label: self.label.clone(),
            start: self.start,
            end: self.end,
            currencies: self.currencies.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeChoice {
    Recursive,
    Rolling,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    /// Forecast horizons in quarters; the standard set is {1, 4, 8, 12}.
    pub horizons: Vec<usize>,
    pub scheme: SchemeChoice,
    /// Default rolling estimation-sample length (quarters).
    pub rolling_len: Option<usize>,
    /// Master seed; every chain seed is derived from it.
    pub seed: u64,
    pub out_dir: PathBuf,
    /// One-sided critical value for the equal-accuracy counts
    /// (default 1.282, the 10% normal point).
    pub dm_threshold: Option<f64>,
    /// Kernel bandwidth override for the equal-accuracy test
    /// (default: horizon − 1).
    pub dm_bandwidth: Option<usize>,
    /// Permit horizons outside the standard set.
    #[serde(default)]
    pub allow_any_horizon: bool,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GibbsSection {
    /// Sampler sweeps per chain (default 1700).
    pub total_draws: Option<usize>,
    /// Discarded warm-up sweeps (default 300).
    pub burn_in: Option<usize>,
    /// Zero the off-diagonal of every innovation-covariance draw.
    pub diag_q: Option<bool>,
    /// Innovation-scale factor of the coefficient-drift prior
    /// (default 3.5e-6).
    pub tau: Option<f64>,
}

impl GibbsSection {
    pub fn to_config(&self) -> GibbsConfig {
        let mut c = GibbsConfig {
            keep_state_draws: false,
            ..GibbsConfig::default()
        };
        if let Some(v) = self.total_draws {
            c.total_draws = v;
        }
        if let Some(v) = self.burn_in {
            c.burn_in = v;
        }
        if let Some(v) = self.diag_q {
            c.diag_q = v;
        }
        c
    }

    pub fn tau(&self) -> f64 {
        self.tau.unwrap_or(DEFAULT_TAU)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    /// Fundamental token: `tr_on`, `tr_os`, `tr_en`, `mm`, `ppp`,
    /// `uirp`, or `factor<N>`.
    pub fundamental: String,
    /// `tvp_bayes` (default for policy-rule fundamentals),
    /// `constant_ols`, or `none` (forced for the rest).
    pub estimation: Option<Estimation>,
    /// Gap series for policy-rule fundamentals: `output` (default) or
    /// `unemployment`.
    pub gap: Option<GapSource>,
    /// Forecasting approaches to run: any of `tvp`, `ols`, `lsdv`.
    pub approaches: Vec<Approach>,
}

impl ModelSection {
    pub fn to_spec(&self) -> Result<FundamentalSpec> {
        let kind: FundamentalKind = self.fundamental.parse()?;
        let estimation = self.estimation.unwrap_or(if kind.is_taylor() {
            Estimation::TvpBayes
        } else {
            Estimation::Identity
        });
        let spec = FundamentalSpec {
            kind,
            estimation,
            gap_source: self.gap.unwrap_or(GapSource::Output),
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Config(format!("cannot read config {}: {e}", path.display()))
        })?;
        let mut config: RunConfig = toml::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        // Data travels with the config file; output goes where the
        // command runs.
        if config.data.dir.is_relative() {
            if let Some(parent) = path.parent() {
                config.data.dir = parent.join(&config.data.dir);
            }
        }
        config.normalize_and_validate()?;
        Ok(config)
    }

    fn normalize_and_validate(&mut self) -> Result<()> {
        if self.windows.is_empty() {
            return Err(Error::Config("no [[windows]] given".to_string()));
        }
        let mut labels = BTreeSet::new();
        for w in &self.windows {
            if w.label.is_empty() {
                return Err(Error::Config("window label is empty".to_string()));
            }
            if !labels.insert(w.label.clone()) {
                return Err(Error::Config(format!("duplicate window label `{}`", w.label)));
            }
            if w.currencies.is_empty() {
                return Err(Error::Config(format!("window `{}` lists no currencies", w.label)));
            }
        }
        if self.models.is_empty() {
            return Err(Error::Config("no [[models]] given".to_string()));
        }
        let mut seen_models = BTreeSet::new();
        for m in &self.models {
            if m.approaches.is_empty() {
                return Err(Error::Config(format!(
                    "model `{}` lists no approaches",
                    m.fundamental
                )));
            }
            let spec = m.to_spec()?;
            for &a in &m.approaches {
                if !seen_models.insert(model_id(&spec, a)) {
                    return Err(Error::Config(format!(
                        "model `{}` appears twice",
                        model_id(&spec, a)
                    )));
                }
            }
        }
        self.run.horizons.sort_unstable();
        self.run.horizons.dedup();
        if self.run.horizons.is_empty() {
            return Err(Error::Config("run.horizons is empty".to_string()));
        }
        if self.run.horizons[0] == 0 {
            return Err(Error::Config("horizon 0 is not a forecast".to_string()));
        }
        if !self.run.allow_any_horizon {
            for &h in &self.run.horizons {
                if !STANDARD_HORIZONS.contains(&h) {
                    return Err(Error::Config(format!(
                        "horizon {h} is outside the standard set {STANDARD_HORIZONS:?}; \
                         set run.allow_any_horizon = true to use it"
                    )));
                }
            }
        }
        if self.run.scheme == SchemeChoice::Rolling {
            for w in &self.windows {
                if w.rolling_len.or(self.run.rolling_len).is_none() {
                    return Err(Error::Config(format!(
                        "rolling scheme: window `{}` has no rolling_len and \
                         run.rolling_len is unset",
                        w.label
                    )));
                }
            }
        }
        let gibbs = self.gibbs.to_config();
        if gibbs.total_draws <= gibbs.burn_in {
            return Err(Error::Config(format!(
                "gibbs.total_draws ({}) must exceed gibbs.burn_in ({})",
                gibbs.total_draws, gibbs.burn_in
            )));
        }
        let tau = self.gibbs.tau();
        if tau.is_nan() || tau <= 0.0 {
            return Err(Error::Config("gibbs.tau must be positive".to_string()));
        }
        if let Some(t) = self.run.dm_threshold {
            if !t.is_finite() {
                return Err(Error::Config("run.dm_threshold must be finite".to_string()));
            }
        }
        if let Some(e) = &self.euro {
            if e.factors.is_empty() {
                return Err(Error::Config("[euro] lists no conversion factors".to_string()));
            }
            for m in &e.members {
                if !e.factors.contains_key(m) {
                    return Err(Error::Config(format!(
                        "euro member `{m}` has no conversion factor"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Expanded model list in declaration order: one entry per
    /// fundamental × approach pairing.
    pub fn expanded_models(&self) -> Result<Vec<(FundamentalSpec, Approach)>> {
        let mut out = Vec::new();
        for m in &self.models {
            let spec = m.to_spec()?;
            for &a in &m.approaches {
                out.push((spec, a));
            }
        }
        Ok(out)
    }

    /// Estimation scheme for one window.
    pub fn scheme_for(&self, w: &WindowSection) -> Scheme {
        match self.run.scheme {
            SchemeChoice::Recursive => Scheme::Recursive,
            SchemeChoice::Rolling => Scheme::Rolling(
                w.rolling_len
                    .or(self.run.rolling_len)
                    .expect("validated: rolling_len is present"),
            ),
        }
    }

    pub fn dm_threshold(&self) -> f64 {
        self.run.dm_threshold.unwrap_or(DM_THRESHOLD)
    }

    /// Variable-file map following the `<dir>/<variable>.csv`
    /// convention; the unemployment file joins only when present.
    pub fn variable_files(&self) -> Result<BTreeMap<Variable, PathBuf>> {
        let dir = &self.data.dir;
        if !dir.is_dir() {
            return Err(Error::Config(format!(
                "data.dir {} is not a directory",
                dir.display()
            )));
        }
        let mut files = BTreeMap::new();
        let all = [
            Variable::ExchangeRate,
            Variable::InterestRate,
            Variable::Cpi,
            Variable::Ip,
            Variable::Money,
            Variable::Unemployment,
        ];
        for v in all {
            let path = dir.join(format!("{}.csv", v.name()));
            if path.is_file() {
                files.insert(v, path);
            } else if v != Variable::Unemployment {
                return Err(Error::Config(format!("missing data file {}", path.display())));
            }
        }
        Ok(files)
    }

    /// Sorted union of every window's currencies.
    pub fn currency_union(&self) -> Vec<String> {
        let mut set = BTreeSet::new();
        for w in &self.windows {
            set.extend(w.currencies.iter().cloned());
        }
        set.into_iter().collect()
    }
}
