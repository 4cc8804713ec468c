//! Series transforms applied when a raw panel is turned into model
//! inputs. All of them are trailing (no value depends on later data),
//! which is what keeps the forecast harness free of look-ahead.

use super::series::Series;
use crate::error::{Error, Result};
use crate::linalg::solve_pentadiagonal;

/// Trailing four-quarter mean. The first three positions of the input
/// have no full window and are left undefined.
pub fn seasonal_adjust(x: &Series) -> Result<Series> {
    const W: usize = 4;
    if x.len() < W {
        return Err(Error::TooShort {
            need: W,
            got: x.len(),
        });
    }
    let v = x.values();
    let out = v
        .windows(W)
        .map(|w| w.iter().sum::<f64>() / W as f64)
        .collect();
    Ok(Series::new(x.offset() + W - 1, out))
}

/// First difference of a log index scaled by `annualization`
/// (400 turns quarterly log changes into annualized percent, 1 keeps
/// raw quarterly changes).
pub fn quarterly_inflation(p_log: &Series, annualization: f64) -> Result<Series> {
    if p_log.len() < 2 {
        return Err(Error::TooShort {
            need: 2,
            got: p_log.len(),
        });
    }
    let v = p_log.values();
    let out = v.windows(2).map(|w| (w[1] - w[0]) * annualization).collect();
    Ok(Series::new(p_log.offset() + 1, out))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HpMode {
    /// One filter pass over the whole sample.
    Full,
    /// Expanding-window passes keeping each window's final gap, so the
    /// value at t never sees data after t.
    Recursive,
}

/// Trend component: the minimizer of
/// `sum (x - tau)^2 + lambda * sum (second difference of tau)^2`,
/// found by solving the pentadiagonal normal equations.
pub fn hp_trend(x: &[f64], lambda: f64) -> Vec<f64> {
    let n = x.len();
    if n < 3 {
        // No curvature penalty applies; the trend interpolates.
        return x.to_vec();
    }
    let mut d = vec![1.0; n];
    let mut u1 = vec![0.0; n - 1];
    let mut u2 = vec![0.0; n - 2];
    for j in 0..n - 2 {
        // Row j of the second-difference operator touches j, j+1, j+2
        // with weights 1, -2, 1; accumulate lambda * K'K.
        d[j] += lambda;
        d[j + 1] += 4.0 * lambda;
        d[j + 2] += lambda;
        u1[j] += -2.0 * lambda;
        u1[j + 1] += -2.0 * lambda;
        u2[j] += lambda;
    }
    solve_pentadiagonal(u2.clone(), u1.clone(), d, u1, u2, x.to_vec())
        .expect("penalized normal equations are positive definite")
}

/// Gap: series minus HP trend, in the requested mode.
pub fn hp_gap(x: &Series, lambda: f64, mode: HpMode) -> Result<Series> {
    const MIN: usize = 4;
    if lambda <= 0.0 {
        return Err(Error::Domain(format!(
            "HP smoothing weight must be positive, got {lambda}"
        )));
    }
    if x.len() < MIN {
        return Err(Error::TooShort {
            need: MIN,
            got: x.len(),
        });
    }
    let v = x.values();
    match mode {
        HpMode::Full => {
            let trend = hp_trend(v, lambda);
            let gap = v.iter().zip(&trend).map(|(a, b)| a - b).collect();
            Ok(Series::new(x.offset(), gap))
        }
        HpMode::Recursive => {
            let gap = (MIN..=v.len())
                .map(|t| {
                    let trend = hp_trend(&v[..t], lambda);
                    v[t - 1] - trend[t - 1]
                })
                .collect();
            Ok(Series::new(x.offset() + MIN - 1, gap))
        }
    }
}

/// `q = s + p_base - p_home` over the overlap of the inputs.
pub fn real_exchange_rate(s: &Series, p_home: &Series, p_base: &Series) -> Result<Series> {
    let q = s.add(p_base).sub(p_home);
    if q.is_empty() {
        return Err(Error::Alignment(
            "real exchange rate inputs have no common quarters".into(),
        ));
    }
    Ok(q)
}

/// Extend or overwrite an exchange rate from a currency-union cutover
/// onward: before `cutover_idx` the series is unchanged, from it onward
/// the value is `factor * union_rate`. The legacy series must reach the
/// cutover and the union rate must cover it from there.
pub fn euro_convert(
    fx: &Series,
    factor: f64,
    cutover_idx: usize,
    union_rate: &Series,
) -> Result<Series> {
    if factor <= 0.0 {
        return Err(Error::Domain(format!(
            "conversion factor must be positive, got {factor}"
        )));
    }
    if fx.end() < cutover_idx {
        return Err(Error::Alignment(format!(
            "legacy rate ends {} quarters before the cutover",
            cutover_idx - fx.end()
        )));
    }
    if union_rate.offset() > cutover_idx || union_rate.end() <= cutover_idx {
        return Err(Error::Alignment(
            "union rate does not cover the cutover quarter".into(),
        ));
    }
    let mut values: Vec<f64> = fx
        .slice(fx.offset(), cutover_idx)
        .expect("prefix coverage checked above")
        .to_vec();
    let tail = union_rate
        .slice(cutover_idx, union_rate.end())
        .expect("tail coverage checked above");
    values.extend(tail.iter().map(|&r| factor * r));
    Ok(Series::new(fx.offset(), values))
}
