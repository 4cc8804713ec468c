use super::quarter::Quarter;
use super::series::{Axis, Series};
use super::transforms::{
    euro_convert, hp_gap, quarterly_inflation, real_exchange_rate, seasonal_adjust, HpMode,
};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Per-country raw inputs as ingested: levels and rates, untransformed.
#[derive(Clone, Debug)]
pub struct RawCountrySeries {
    pub country: String,
    /// National currency per base-currency unit, end of quarter.
    pub exchange_rate: Series,
    /// Annual percent.
    pub interest_rate: Series,
    pub cpi: Series,
    pub ip: Series,
    pub money: Series,
    /// Percent; not collected everywhere.
    pub unemployment: Option<Series>,
}

impl RawCountrySeries {
    /// Positivity checks for the level variables.
    pub fn validate(&self, axis: &Axis) -> Result<()> {
        for (name, series) in [
            ("exchange_rate", &self.exchange_rate),
            ("cpi", &self.cpi),
            ("ip", &self.ip),
            ("money", &self.money),
        ] {
            for (idx, v) in series.iter_indexed() {
                if v <= 0.0 {
                    return Err(Error::Domain(format!(
                        "{}: {name} must be positive, got {v} at {}",
                        self.country,
                        axis.quarter(idx)
                    )));
                }
            }
        }
        Ok(())
    }

    /// Splice in a currency-union rate from the cutover onward.
    pub fn euro_convert(mut self, factor: f64, cutover_idx: usize, union: &Series) -> Result<Self> {
        self.exchange_rate = euro_convert(&self.exchange_rate, factor, cutover_idx, union)?;
        Ok(self)
    }
}

/// Transformed per-country series, all on the panel axis. Head gaps
/// reflect the trailing transforms (adjustment windows, differencing,
/// filter start-up).
#[derive(Clone, Debug)]
pub struct CountrySeries {
    /// Log exchange rate (zero for the base country).
    pub s: Series,
    /// Interest rate, annual percent, as ingested.
    pub i: Series,
    /// Log CPI, seasonally adjusted.
    pub p: Series,
    /// Inflation from `p`, scaled per the annualization option.
    pub pi: Series,
    /// Output gap from the recursive trend filter, scaled to percent.
    pub y_gap: Series,
    /// Unemployment gap, when the raw series exists.
    pub u_gap: Option<Series>,
    /// Log money, seasonally adjusted.
    pub m: Series,
    /// Log industrial production, seasonally adjusted.
    pub y: Series,
    /// Log real exchange rate: `s + p_base - p`.
    pub q: Series,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct TransformOptions {
    /// Smoothing weight of the trend filter (quarterly convention 1600).
    pub hp_lambda: f64,
    /// Factor applied to quarterly log CPI changes (400 gives annualized
    /// percent, matching annual-percent interest rates).
    pub inflation_annualization: f64,
    /// Factor applied to log-level trend gaps (100 gives percent).
    pub gap_scale: f64,
    /// Trend filtering discipline for gaps.
    pub hp_mode: HpModeOption,
}

/// Serializable stand-in for [`HpMode`].
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum HpModeOption {
    Full,
    Recursive,
}

impl From<HpModeOption> for HpMode {
    fn from(m: HpModeOption) -> HpMode {
        match m {
            HpModeOption::Full => HpMode::Full,
            HpModeOption::Recursive => HpMode::Recursive,
        }
    }
}

impl Default for TransformOptions {
    fn default() -> Self {
        TransformOptions {
            hp_lambda: 1600.0,
            inflation_annualization: 400.0,
            gap_scale: 100.0,
            hp_mode: HpModeOption::Recursive,
        }
    }
}

/// Currency-union conversion: members' exchange rates continue as
/// `factor * union_rate` from the cutover quarter onward.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct EuroConversion {
    pub cutover: Quarter,
    /// Name of the union rate column in the exchange-rate file.
    pub rate_column: String,
    /// Fixed national conversion factors per member country.
    pub factors: BTreeMap<String, f64>,
}

/// The aligned quarterly panel the whole pipeline works from.
#[derive(Clone, Debug)]
pub struct SeriesPanel {
    pub axis: Axis,
    pub base: String,
    pub countries: BTreeMap<String, CountrySeries>,
    pub options: TransformOptions,
}

impl SeriesPanel {
    pub fn country(&self, name: &str) -> Result<&CountrySeries> {
        self.countries
            .get(name)
            .ok_or_else(|| Error::Config(format!("unknown country `{name}`")))
    }

    pub fn base_country(&self) -> Result<&CountrySeries> {
        self.country(&self.base)
    }

    /// Non-base countries, sorted.
    pub fn currencies(&self) -> Vec<String> {
        self.countries
            .keys()
            .filter(|c| **c != self.base)
            .cloned()
            .collect()
    }

    /// Drop all data after `end`. Because every transform is trailing,
    /// this equals rebuilding from raw data cut at `end`.
    pub fn truncated(&self, end: Quarter) -> Result<SeriesPanel> {
        let end_idx = self
            .axis
            .index_of(end)
            .ok_or_else(|| Error::Alignment(format!("{end} is outside the panel span")))?;
        let cut = end_idx + 1;
        let countries = self
            .countries
            .iter()
            .map(|(name, c)| {
                (
                    name.clone(),
                    CountrySeries {
                        s: c.s.truncated(cut),
                        i: c.i.truncated(cut),
                        p: c.p.truncated(cut),
                        pi: c.pi.truncated(cut),
                        y_gap: c.y_gap.truncated(cut),
                        u_gap: c.u_gap.as_ref().map(|u| u.truncated(cut)),
                        m: c.m.truncated(cut),
                        y: c.y.truncated(cut),
                        q: c.q.truncated(cut),
                    },
                )
            })
            .collect();
        Ok(SeriesPanel {
            axis: Axis::new(self.axis.start, cut),
            base: self.base.clone(),
            countries,
            options: self.options,
        })
    }
}

/// Transform a raw panel into model inputs. `union_rates` holds
/// exchange-rate columns that are not countries (the union rate used
/// for conversion); conversion happens before any transform.
pub fn build_panel(
    axis: Axis,
    mut raw: BTreeMap<String, RawCountrySeries>,
    extra_rates: &BTreeMap<String, Series>,
    base: &str,
    options: TransformOptions,
    euro: Option<&EuroConversion>,
) -> Result<SeriesPanel> {
    if !raw.contains_key(base) {
        return Err(Error::Config(format!(
            "base country `{base}` is not in the panel"
        )));
    }
    if let Some(conv) = euro {
        let cutover_idx = axis.index_of(conv.cutover).ok_or_else(|| {
            Error::Config(format!("cutover {} is outside the panel span", conv.cutover))
        })?;
        let union = extra_rates
            .get(&conv.rate_column)
            .cloned()
            .or_else(|| raw.get(&conv.rate_column).map(|r| r.exchange_rate.clone()))
            .ok_or_else(|| Error::MissingColumn {
                file: "exchange_rate".into(),
                column: conv.rate_column.clone(),
            })?;
        for (member, &factor) in &conv.factors {
            let entry = raw.remove(member).ok_or_else(|| {
                Error::Config(format!("conversion member `{member}` is not in the panel"))
            })?;
            raw.insert(member.clone(), entry.euro_convert(factor, cutover_idx, &union)?);
        }
    }

    for country in raw.values() {
        country.validate(&axis)?;
        for (name, series) in [
            ("exchange_rate", &country.exchange_rate),
            ("interest_rate", &country.interest_rate),
            ("cpi", &country.cpi),
            ("ip", &country.ip),
            ("money", &country.money),
        ] {
            if series.end() < axis.len {
                return Err(Error::DateGap {
                    country: format!("{} ({name})", country.country),
                    quarter: axis.quarter(series.end()),
                });
            }
        }
    }

    let hp_mode: HpMode = options.hp_mode.into();
    // Price levels first: the real exchange rate needs the base country's.
    let mut p_by_country: BTreeMap<String, Series> = BTreeMap::new();
    for (name, country) in &raw {
        let p = seasonal_adjust(&country.cpi.map(f64::ln))?;
        p_by_country.insert(name.clone(), p);
    }
    let p_base = p_by_country
        .get(base)
        .expect("base presence checked above")
        .clone();

    let mut countries = BTreeMap::new();
    for (name, country) in &raw {
        let p = p_by_country.remove(name).expect("built for every country");
        let s = if name == base {
            Series::new(0, vec![0.0; axis.len])
        } else {
            country.exchange_rate.map(f64::ln)
        };
        let pi = quarterly_inflation(&p, options.inflation_annualization)?;
        let y = seasonal_adjust(&country.ip.map(f64::ln))?;
        let y_gap = hp_gap(&y, options.hp_lambda, hp_mode)?.map(|g| g * options.gap_scale);
        let u_gap = match &country.unemployment {
            Some(u) => Some(hp_gap(u, options.hp_lambda, hp_mode)?),
            None => None,
        };
        let m = seasonal_adjust(&country.money.map(f64::ln))?;
        let q = real_exchange_rate(&s, &p, &p_base)?;
        countries.insert(
            name.clone(),
            CountrySeries {
                s,
                i: country.interest_rate.clone(),
                p,
                pi,
                y_gap,
                u_gap,
                m,
                y,
                q,
            },
        );
    }
    Ok(SeriesPanel {
        axis,
        base: base.to_string(),
        countries,
        options,
    })
}
