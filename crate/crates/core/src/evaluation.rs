//! Forecast-accuracy aggregation: root-mean-squared-error ratios
//! against the no-change benchmark, equal-accuracy z-tests with a
//! serial-correlation-robust long-run variance, expanding-sample ratio
//! paths, and cross-currency window summaries.

use crate::error::{Error, Result};
use crate::forecasting::ForecastRecord;
use serde::{Deserialize, Serialize};

/// One-sided 10% normal critical value used by the summary counts.
pub const DM_THRESHOLD: f64 = 1.282;

/// Equal-accuracy test result. Cells with too few forecasts report the
/// ratio only; a non-positive long-run variance is reported, not fatal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DmOutcome {
    Statistic(f64),
    Degenerate,
    Insufficient,
}

impl DmOutcome {
    pub fn value(self) -> Option<f64> {
        match self {
            DmOutcome::Statistic(v) => Some(v),
            _ => None,
        }
    }
}

impl std::fmt::Display for DmOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DmOutcome::Statistic(v) => write!(f, "{v}"),
            DmOutcome::Degenerate => write!(f, "degenerate"),
            DmOutcome::Insufficient => write!(f, "insufficient"),
        }
    }
}

/// Accuracy measures for one currency × model × window × horizon cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalCell {
    pub currency: String,
    pub model: String,
    pub window: String,
    pub horizon: usize,
    /// Model RMSFE over benchmark RMSFE; below one favors the model.
    pub u: f64,
    pub dm: DmOutcome,
    pub n_forecasts: usize,
}

/// Cross-currency roll-up of one window × horizon × model block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowSummary {
    pub n_u_lt_1: usize,
    pub n_dm_gt_threshold: usize,
    pub median_u: f64,
    pub threshold: f64,
}

/// RMSFE ratio of the model against the no-change benchmark:
/// sqrt(mean (pred − real)²) / sqrt(mean real²).
pub fn theil_u(records: &[ForecastRecord]) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::Eval("no forecast records".to_string()));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for r in records {
        num += (r.predicted - r.realized).powi(2);
        den += r.realized.powi(2);
    }
    if den <= 0.0 {
        return Err(Error::Eval(
            "benchmark error is zero: every realized change is zero".to_string(),
        ));
    }
    Ok((num / den).sqrt())
}

/// Bartlett-kernel long-run variance of a demeaned sequence:
/// γ₀ + 2 Σ_{j=1..B} (1 − j/(B+1)) γ_j with γ_j the lag-j
/// autocovariance (n-denominator).
fn bartlett_lrv(d: &[f64], bandwidth: usize) -> f64 {
    let n = d.len();
    let mean = d.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = d.iter().map(|v| v - mean).collect();
    let gamma = |j: usize| -> f64 {
        centered[j..]
            .iter()
            .zip(&centered)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / n as f64
    };
    let mut lrv = gamma(0);
    let b = bandwidth.min(n.saturating_sub(1));
    for j in 1..=b {
        let w = 1.0 - j as f64 / (bandwidth as f64 + 1.0);
        lrv += 2.0 * w * gamma(j);
    }
    lrv
}

/// Equal-accuracy statistic from a per-period loss differential
/// (benchmark loss minus model loss, so positive favors the model):
/// mean(d) / sqrt(LRV(d)/n).
pub fn dm_from_losses(d: &[f64], bandwidth: usize) -> DmOutcome {
    let n = d.len();
    if n < 8 {
        return DmOutcome::Insufficient;
    }
    let mean = d.iter().sum::<f64>() / n as f64;
    let lrv = bartlett_lrv(d, bandwidth);
    if lrv <= 0.0 {
        return if mean == 0.0 {
            DmOutcome::Statistic(0.0)
        } else {
            DmOutcome::Degenerate
        };
    }
    DmOutcome::Statistic(mean / (lrv / n as f64).sqrt())
}

/// Equal-accuracy test with an explicit kernel bandwidth. The loss is
/// squared error; the benchmark predicts no change.
pub fn dm_test_with_bandwidth(records: &[ForecastRecord], bandwidth: usize) -> DmOutcome {
    let d: Vec<f64> = records
        .iter()
        .map(|r| r.realized.powi(2) - (r.realized - r.predicted).powi(2))
        .collect();
    dm_from_losses(&d, bandwidth)
}

/// Equal-accuracy test with the direct-forecast default bandwidth of
/// horizon − 1 (an h-step error overlaps h − 1 neighbors).
pub fn dm_test(records: &[ForecastRecord]) -> Result<DmOutcome> {
    if records.is_empty() {
        return Ok(DmOutcome::Insufficient);
    }
    let h = records[0].horizon;
    if records.iter().any(|r| r.horizon != h) {
        return Err(Error::Eval("mixed horizons in one cell".to_string()));
    }
    Ok(dm_test_with_bandwidth(records, h.saturating_sub(1)))
}

/// Full measures for one cell. Records must share currency, model, and
/// horizon; they are ordered by origin before the serial-correlation
/// adjustment.
pub fn evaluate_cell(window: &str, records: &[ForecastRecord]) -> Result<EvalCell> {
    let first = records
        .first()
        .ok_or_else(|| Error::Eval("no forecast records".to_string()))?;
    for r in records {
        if r.currency != first.currency || r.model != first.model || r.horizon != first.horizon {
            return Err(Error::Eval(format!(
                "cell mixes {}/{}/h={} with {}/{}/h={}",
                first.currency, first.model, first.horizon, r.currency, r.model, r.horizon
            )));
        }
    }
    let mut ordered: Vec<&ForecastRecord> = records.iter().collect();
    ordered.sort_by_key(|a| a.origin);
    let owned: Vec<ForecastRecord> = ordered.into_iter().cloned().collect();
    Ok(EvalCell {
        currency: first.currency.clone(),
        model: first.model.clone(),
        window: window.to_string(),
        horizon: first.horizon,
        u: theil_u(&owned)?,
        dm: dm_test(&owned)?,
        n_forecasts: owned.len(),
    })
}

/// Ratio path over expanding record prefixes: element j uses the first
/// j + 1 records. The final element equals the full-cell ratio.
pub fn recursive_u_series(records: &[ForecastRecord]) -> Result<Vec<f64>> {
    if records.is_empty() {
        return Err(Error::Eval("no forecast records".to_string()));
    }
    for pair in records.windows(2) {
        if pair[1].origin < pair[0].origin {
            return Err(Error::Eval("records are not ordered by origin".to_string()));
        }
    }
    let mut num = 0.0;
    let mut den = 0.0;
    let mut out = Vec::with_capacity(records.len());
    for r in records {
        num += (r.predicted - r.realized).powi(2);
        den += r.realized.powi(2);
        if den <= 0.0 {
            return Err(Error::Eval(
                "benchmark error is zero over a record prefix".to_string(),
            ));
        }
        out.push((num / den).sqrt());
    }
    Ok(out)
}

/// Count and median roll-up across currencies at one window × horizon ×
/// model coordinate. Inequalities are strict on both counts.
pub fn summarize_window(cells: &[EvalCell], threshold: f64) -> Result<WindowSummary> {
    if cells.is_empty() {
        return Err(Error::Eval("no cells to summarize".to_string()));
    }
    let n_u_lt_1 = cells.iter().filter(|c| c.u < 1.0).count();
    let n_dm_gt_threshold = cells
        .iter()
        .filter(|c| matches!(c.dm, DmOutcome::Statistic(v) if v > threshold))
        .count();
    let mut us: Vec<f64> = cells.iter().map(|c| c.u).collect();
    us.sort_by(|a, b| a.partial_cmp(b).expect("ratios are not NaN"));
    let n = us.len();
    let median_u = if n % 2 == 1 {
        us[n / 2]
    } else {
        (us[n / 2 - 1] + us[n / 2]) / 2.0
    };
    Ok(WindowSummary {
        n_u_lt_1,
        n_dm_gt_threshold,
        median_u,
        threshold,
    })
}

/// Aligned-text block with one column per horizon and the three
/// standard rows; medians at or below one carry a `[‡]` marker.
pub fn render_summary_block(title: &str, entries: &[(usize, WindowSummary)]) -> String {
    let threshold = entries.first().map_or(DM_THRESHOLD, |e| e.1.threshold);
    let mut header = vec![String::new()];
    let mut r_u = vec!["No. of U's<1".to_string()];
    let mut r_dm = vec![format!("No. of DM>{threshold}")];
    let mut r_med = vec!["Median U".to_string()];
    for (h, s) in entries {
        header.push(format!("h={h}"));
        r_u.push(s.n_u_lt_1.to_string());
        r_dm.push(s.n_dm_gt_threshold.to_string());
        let marker = if s.median_u <= 1.0 { " [‡]" } else { "" };
        r_med.push(format!("{:.3}{marker}", s.median_u));
    }
    let rows = [&header, &r_u, &r_dm, &r_med];
    let widths: Vec<usize> = (0..header.len())
        .map(|j| rows.iter().map(|r| r[j].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    out.push_str(title);
    out.push('\n');
    for row in rows {
        let mut line = String::new();
        for (j, cell) in row.iter().enumerate() {
            if j == 0 {
                line.push_str(&format!("{cell:<width$}", width = widths[0]));
            } else {
                let pad = widths[j].saturating_sub(cell.chars().count());
                line.push_str("  ");
                for _ in 0..pad {
                    line.push(' ');
                }
                line.push_str(cell);
            }
        }
        while line.ends_with(' ') {
            line.pop();
        }
        out.push_str(&line);
        out.push('\n');
    }
    out
}
