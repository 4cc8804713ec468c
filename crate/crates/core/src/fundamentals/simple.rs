//! Identity-computed fundamentals: monetary, price-level, and
//! interest-parity forms need no estimation at all.

use super::{FundamentalKind, FundamentalSeries, FundamentalSpec};
use crate::dataio::SeriesPanel;
use crate::error::{Error, Result};

/// Ω for the three closed-form fundamentals, against the panel base:
/// money/income differential, price differential, or interest
/// differential plus the spot rate (so z is the interest differential).
pub fn simple_fundamental(
    kind: FundamentalKind,
    panel: &SeriesPanel,
    country: &str,
) -> Result<FundamentalSeries> {
    let home = panel.country(country)?;
    let base = panel.base_country()?;
    let spec = FundamentalSpec::identity(kind);
    let z = match kind {
        FundamentalKind::Mm => {
            // Ω = (m − m*) − (y − y*); z = Ω − s.
            let money_diff = home.m.sub(&base.m);
            let income_diff = home.y.sub(&base.y);
            money_diff.sub(&income_diff).sub(&home.s)
        }
        FundamentalKind::Ppp => home.p.sub(&base.p).sub(&home.s),
        FundamentalKind::Uirp => home.i.sub(&base.i),
        other => {
            return Err(Error::Config(format!(
                "{} is not identity-computed",
                other.token()
            )))
        }
    };
    if z.is_empty() {
        return Err(Error::Capability {
            country: country.to_string(),
            requirement: format!("series coverage for {}", kind.token()),
        });
    }
    FundamentalSeries::from_z(spec, z, &home.s)
}
