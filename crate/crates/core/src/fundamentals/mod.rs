//! Exchange-rate fundamentals Ω_t and their deviations z_t ≡ Ω_t − s_t:
//! Taylor-rule interest differentials (time-varying or constant
//! coefficients), monetary/price/interest-parity identities, and
//! principal-component factors.

mod factors;
mod simple;
mod taylor;

pub use factors::{extract_factors, factor_fundamental, FactorModel};
pub use simple::simple_fundamental;
pub use taylor::{
    build_taylor_regressors, taylor_fundamental_ols, taylor_fundamental_tvp,
    taylor_fundamental_tvp_with_draws, TaylorRegressors,
};

use crate::dataio::Series;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Which fundamental is being constructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FundamentalKind {
    /// Homogeneous Taylor rule, no interest smoothing: columns
    /// [π−π*, gap−gap*, q].
    TrOn,
    /// Homogeneous Taylor rule with a lagged interest differential:
    /// [π−π*, gap−gap*, (i−i*)_{-1}, q].
    TrOs,
    /// Country-specific coefficients: [π, −π*, gap, −gap*, q].
    TrEn,
    /// Money/income differential: Ω = (m−m*) − (y−y*).
    Mm,
    /// Price-level differential: Ω = p − p*.
    Ppp,
    /// Interest differential: Ω = (i−i*) + s, so z = i − i*.
    Uirp,
    /// First r principal components of the exchange-rate panel.
    Factor(usize),
}

impl FundamentalKind {
    pub fn is_taylor(self) -> bool {
        matches!(self, FundamentalKind::TrOn | FundamentalKind::TrOs | FundamentalKind::TrEn)
    }

    pub fn token(self) -> String {
        match self {
            FundamentalKind::TrOn => "tr_on".to_string(),
            FundamentalKind::TrOs => "tr_os".to_string(),
            FundamentalKind::TrEn => "tr_en".to_string(),
            FundamentalKind::Mm => "mm".to_string(),
            FundamentalKind::Ppp => "ppp".to_string(),
            FundamentalKind::Uirp => "uirp".to_string(),
            FundamentalKind::Factor(r) => format!("factor{r}"),
        }
    }
}

impl std::str::FromStr for FundamentalKind {
    type Err = Error;

    /// Inverse of [`FundamentalKind::token`]: accepts `tr_on`, `tr_os`,
    /// `tr_en`, `mm`, `ppp`, `uirp`, and `factor<R>`.
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "tr_on" => FundamentalKind::TrOn,
            "tr_os" => FundamentalKind::TrOs,
            "tr_en" => FundamentalKind::TrEn,
            "mm" => FundamentalKind::Mm,
            "ppp" => FundamentalKind::Ppp,
            "uirp" => FundamentalKind::Uirp,
            other => {
                let r = other
                    .strip_prefix("factor")
                    .and_then(|n| n.parse::<usize>().ok())
                    .ok_or_else(|| {
                        Error::Config(format!("unknown fundamental `{other}`"))
                    })?;
                FundamentalKind::Factor(r)
            }
        })
    }
}

/// How a Taylor-rule fundamental's coefficients are estimated. The
/// identity kinds (MM, PPP, UIRP, factors) carry `Identity`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimation {
    TvpBayes,
    ConstantOls,
    #[serde(rename = "none")]
    Identity,
}

/// Which activity gap enters a Taylor rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapSource {
    Output,
    Unemployment,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FundamentalSpec {
    pub kind: FundamentalKind,
    pub estimation: Estimation,
    pub gap_source: GapSource,
}

impl FundamentalSpec {
    pub fn taylor(kind: FundamentalKind, estimation: Estimation) -> Self {
        FundamentalSpec {
            kind,
            estimation,
            gap_source: GapSource::Output,
        }
    }

    pub fn identity(kind: FundamentalKind) -> Self {
        FundamentalSpec {
            kind,
            estimation: Estimation::Identity,
            gap_source: GapSource::Output,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind.is_taylor() {
            if self.estimation == Estimation::Identity {
                return Err(Error::Config(format!(
                    "{} needs an estimator (tvp_bayes or constant_ols)",
                    self.kind.token()
                )));
            }
        } else if self.estimation != Estimation::Identity {
            return Err(Error::Config(format!(
                "{} is identity-computed; estimation must be `none`",
                self.kind.token()
            )));
        }
        if let FundamentalKind::Factor(r) = self.kind {
            if r == 0 {
                return Err(Error::Config("factor count must be at least 1".to_string()));
            }
        }
        Ok(())
    }

    /// Stable identifier used in file names and report columns.
    pub fn id(&self) -> String {
        let mut id = self.kind.token();
        if self.kind.is_taylor() && self.gap_source == GapSource::Unemployment {
            id.push_str("_u");
        }
        match self.estimation {
            Estimation::TvpBayes => id.push_str("_tvp"),
            Estimation::ConstantOls => id.push_str("_ols"),
            Estimation::Identity => {}
        }
        id
    }
}

/// A constructed fundamental for one currency: the level Ω and the
/// deviation z = Ω − s, on the panel's date axis.
#[derive(Debug, Clone)]
pub struct FundamentalSeries {
    pub spec: FundamentalSpec,
    pub omega: Series,
    pub z: Series,
}

impl FundamentalSeries {
    /// Assemble from z, enforcing the Ω = z + s identity.
    pub(crate) fn from_z(spec: FundamentalSpec, z: Series, s: &Series) -> Result<Self> {
        let omega = z.add(s);
        if omega.is_empty() {
            return Err(Error::Alignment(format!(
                "deviation series for {} does not overlap the exchange rate",
                spec.id()
            )));
        }
        // Cut z to Ω's span so the two stay index-aligned.
        let vals = z
            .slice(omega.offset(), omega.end())
            .expect("intersection is within z")
            .to_vec();
        let z = Series::new(omega.offset(), vals);
        Ok(FundamentalSeries { spec, omega, z })
    }

    /// Assemble from Ω, deriving z = Ω − s on the overlap.
    pub(crate) fn from_omega(spec: FundamentalSpec, omega: Series, s: &Series) -> Result<Self> {
        let z = omega.sub(s);
        if z.is_empty() {
            return Err(Error::Alignment(format!(
                "fundamental level for {} does not overlap the exchange rate",
                spec.id()
            )));
        }
        let vals = omega
            .slice(z.offset(), z.end())
            .expect("intersection is within omega")
            .to_vec();
        let omega = Series::new(z.offset(), vals);
        Ok(FundamentalSeries { spec, omega, z })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_ids_are_distinct_and_stable() {
        let a = FundamentalSpec::taylor(FundamentalKind::TrOn, Estimation::TvpBayes);
        let b = FundamentalSpec::taylor(FundamentalKind::TrOn, Estimation::ConstantOls);
        let mut c = FundamentalSpec::taylor(FundamentalKind::TrEn, Estimation::TvpBayes);
        c.gap_source = GapSource::Unemployment;
        assert_eq!(a.id(), "tr_on_tvp");
        assert_eq!(b.id(), "tr_on_ols");
        assert_eq!(c.id(), "tr_en_u_tvp");
        assert_eq!(FundamentalSpec::identity(FundamentalKind::Factor(2)).id(), "factor2");
    }

    #[test]
    fn identity_kinds_reject_estimators() {
        let mut spec = FundamentalSpec::identity(FundamentalKind::Ppp);
        spec.estimation = Estimation::ConstantOls;
        assert!(spec.validate().is_err());
        let taylor = FundamentalSpec {
            kind: FundamentalKind::TrOs,
            estimation: Estimation::Identity,
            gap_source: GapSource::Output,
        };
        assert!(taylor.validate().is_err());
        assert!(FundamentalSpec::identity(FundamentalKind::Factor(0))
            .validate()
            .is_err());
    }
}
