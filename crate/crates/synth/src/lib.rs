//! Synthetic five-country quarterly panel with a known data-generating
//! process: each country sets its policy rate by a common Taylor rule
//! whose coefficients drift as random walks, and every exchange rate
//! responds to its interest differential against the base country, so
//! the differential genuinely forecasts multi-quarter currency moves.
//! The output mirrors the CSV layout the pipeline ingests: one file per
//! variable, a `date` column, one column per country.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

pub const BASE: &str = "US";
pub const COUNTRIES: [&str; 5] = ["US", "CA", "JP", "UK", "SZ"];
pub const START_YEAR: i32 = 1976;
pub const QUARTERS: usize = 120;

/// Default generator seed; the committed fixture files use it.
pub const FIXTURE_SEED: u64 = 20240817;

struct CountryParams {
    name: &'static str,
    mean_inflation: f64,
    neutral_rate: f64,
    /// Exchange-rate level at the first quarter (ignored for the base).
    fx_level: f64,
}

const PARAMS: [CountryParams; 5] = [
    CountryParams { name: "US", mean_inflation: 3.0, neutral_rate: 2.5, fx_level: 1.0 },
    CountryParams { name: "CA", mean_inflation: 3.5, neutral_rate: 3.0, fx_level: 1.2 },
    CountryParams { name: "JP", mean_inflation: 1.0, neutral_rate: 1.0, fx_level: 250.0 },
    CountryParams { name: "UK", mean_inflation: 4.0, neutral_rate: 3.5, fx_level: 0.6 },
    CountryParams { name: "SZ", mean_inflation: 2.0, neutral_rate: 2.0, fx_level: 2.5 },
];

const RHO_INFLATION: f64 = 0.85;
const SD_INFLATION: f64 = 0.5;
const RHO_GAP: f64 = 0.8;
const SD_GAP: f64 = 0.7;
const SD_RATE_NOISE: f64 = 0.2;
/// Random-walk step scales of the shared Taylor coefficients.
const SD_PSI_INFLATION: f64 = 0.010;
const SD_PSI_GAP: f64 = 0.006;
/// Quarterly log FX response per percentage point of rate differential.
const FX_RESPONSE: f64 = 0.005;
const SD_FX_NOISE: f64 = 0.015;
const SD_IP_NOISE: f64 = 0.002;

/// One generated panel, levels as the ingest layer expects them.
pub struct Synthetic {
    /// Quarter labels, `1976Q1` onward.
    pub dates: Vec<String>,
    /// Per-country columns keyed by variable file name; the base
    /// country is absent from `exchange_rate`.
    pub files: BTreeMap<&'static str, BTreeMap<&'static str, Vec<f64>>>,
}

pub fn generate(seed: u64) -> Synthetic {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let std = Normal::new(0.0, 1.0).unwrap();
    let mut draw = move |sd: f64| -> f64 { sd * std.sample(&mut rng) };
    let t_len = QUARTERS;
    let n = PARAMS.len();

    // Shared Taylor coefficients drift as random walks.
    let mut psi_pi = vec![1.5; t_len];
    let mut psi_g = vec![0.5; t_len];
    for t in 1..t_len {
        psi_pi[t] = psi_pi[t - 1] + draw(SD_PSI_INFLATION);
        psi_g[t] = psi_g[t - 1] + draw(SD_PSI_GAP);
    }

    // Macro block per country: inflation and gap are AR(1), the policy
    // rate follows the shared rule, prices cumulate inflation, output
    // carries the gap on a slow trend, money is a drifting walk.
    let mut inflation = vec![vec![0.0; t_len]; n];
    let mut gap = vec![vec![0.0; t_len]; n];
    let mut rate = vec![vec![0.0; t_len]; n];
    let mut cpi = vec![vec![0.0; t_len]; n];
    let mut ip = vec![vec![0.0; t_len]; n];
    let mut money = vec![vec![0.0; t_len]; n];
    for (c, p) in PARAMS.iter().enumerate() {
        let mut pi = p.mean_inflation;
        let mut g = 0.0;
        let mut log_cpi = 100.0_f64.ln();
        let mut log_m = 200.0_f64.ln();
        for t in 0..t_len {
            pi = p.mean_inflation + RHO_INFLATION * (pi - p.mean_inflation) + draw(SD_INFLATION);
            g = RHO_GAP * g + draw(SD_GAP);
            let i = p.neutral_rate + psi_pi[t] * pi + psi_g[t] * g + draw(SD_RATE_NOISE);
            log_cpi += pi / 400.0;
            log_m += 0.01 + draw(0.01);
            inflation[c][t] = pi;
            gap[c][t] = g;
            rate[c][t] = i;
            cpi[c][t] = log_cpi.exp();
            ip[c][t] = (100.0_f64.ln() + 0.005 * t as f64 + g / 100.0 + draw(SD_IP_NOISE)).exp();
            money[c][t] = log_m.exp();
        }
    }

    // Exchange rates: next quarter's log change responds to this
    // quarter's rate differential, plus noise.
    let mut fx = vec![vec![0.0; t_len]; n];
    for (c, p) in PARAMS.iter().enumerate() {
        if p.name == BASE {
            continue;
        }
        let mut s = p.fx_level.ln();
        for t in 0..t_len {
            fx[c][t] = s.exp();
            let differential = rate[c][t] - rate[0][t];
            s += FX_RESPONSE * differential + draw(SD_FX_NOISE);
        }
    }

    let dates = (0..t_len)
        .map(|t| format!("{}Q{}", START_YEAR as usize + t / 4, t % 4 + 1))
        .collect();
    let mut files: BTreeMap<&'static str, BTreeMap<&'static str, Vec<f64>>> = BTreeMap::new();
    let mut put = |file: &'static str, source: &[Vec<f64>], skip_base: bool| {
        let mut columns = BTreeMap::new();
        for (c, p) in PARAMS.iter().enumerate() {
            if skip_base && p.name == BASE {
                continue;
            }
            columns.insert(p.name, source[c].clone());
        }
        files.insert(file, columns);
    };
    put("exchange_rate", &fx, true);
    put("interest_rate", &rate, false);
    put("cpi", &cpi, false);
    put("ip", &ip, false);
    put("money", &money, false);
    Synthetic { dates, files }
}

/// Render one variable file; floats keep their shortest round-trip form.
pub fn render_csv(dates: &[String], columns: &BTreeMap<&'static str, Vec<f64>>) -> String {
    let mut out = String::from("date");
    for name in columns.keys() {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for (t, date) in dates.iter().enumerate() {
        out.push_str(date);
        for column in columns.values() {
            out.push(',');
            out.push_str(&format!("{}", column[t]));
        }
        out.push('\n');
    }
    out
}

/// Write `<variable>.csv` per variable into `dir`, creating it first.
pub fn write_dir(synthetic: &Synthetic, dir: &Path) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    for (file, columns) in &synthetic.files {
        let mut f = std::fs::File::create(dir.join(format!("{file}.csv")))?;
        f.write_all(render_csv(&synthetic.dates, columns).as_bytes())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_is_deterministic() {
        let a = generate(7);
        let b = generate(7);
        for (file, columns) in &a.files {
            assert_eq!(columns, &b.files[file]);
        }
        let c = generate(8);
        assert_ne!(
            a.files["exchange_rate"]["CA"],
            c.files["exchange_rate"]["CA"]
        );
    }

    #[test]
    fn layout_matches_the_ingest_contract() {
        let s = generate(FIXTURE_SEED);
        assert_eq!(s.dates.len(), QUARTERS);
        assert_eq!(s.dates[0], "1976Q1");
        assert_eq!(s.dates[119], "2005Q4");
        assert!(!s.files["exchange_rate"].contains_key("US"));
        assert_eq!(s.files["interest_rate"].len(), 5);
        for columns in s.files.values() {
            for column in columns.values() {
                assert_eq!(column.len(), QUARTERS);
                assert!(column.iter().all(|v| v.is_finite()));
            }
        }
        // Levels that get logged downstream must stay positive.
        for file in ["exchange_rate", "cpi", "ip", "money"] {
            for column in s.files[file].values() {
                assert!(column.iter().all(|&v| v > 0.0));
            }
        }
    }

    #[test]
    fn differentials_move_exchange_rates() {
        // The DGP wires the rate differential into next quarter's FX
        // change; the sample correlation must be visibly positive.
        let s = generate(FIXTURE_SEED);
        let rate = &s.files["interest_rate"];
        let fx = &s.files["exchange_rate"];
        for name in ["CA", "JP", "UK", "SZ"] {
            let d: Vec<f64> = (0..QUARTERS - 1)
                .map(|t| rate[name][t] - rate["US"][t])
                .collect();
            let ds: Vec<f64> = (0..QUARTERS - 1)
                .map(|t| (fx[name][t + 1] / fx[name][t]).ln())
                .collect();
            let mean_d = d.iter().sum::<f64>() / d.len() as f64;
            let mean_ds = ds.iter().sum::<f64>() / ds.len() as f64;
            let mut cov = 0.0;
            let mut var_d = 0.0;
            let mut var_ds = 0.0;
            for t in 0..d.len() {
                cov += (d[t] - mean_d) * (ds[t] - mean_ds);
                var_d += (d[t] - mean_d).powi(2);
                var_ds += (ds[t] - mean_ds).powi(2);
            }
            let corr = cov / (var_d.sqrt() * var_ds.sqrt());
            assert!(corr > 0.2, "{name}: corr {corr}");
        }
    }
}
