//! Randomized invariant checks: algebraic identities, determinism
//! contracts, and ordering laws that must hold for any input, checked
//! over generated cases. Heavier statistical contracts live in the
//! `acceptance` target; oracles come from `common`.

mod common;

use common::{max_abs_diff_vec, restricted_ls};
use ndarray::{Array1, Array2};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::path::PathBuf;

use tvpfx_core::dataio::{
    build_panel, euro_convert, hp_gap, hp_trend, load_panel, real_exchange_rate, seasonal_adjust,
    HpMode, Quarter, Series, SeriesPanel, TransformOptions, Variable,
};
use tvpfx_core::evaluation::{
    dm_from_losses, dm_test_with_bandwidth, recursive_u_series, summarize_window, theil_u,
    DmOutcome, EvalCell,
};
use tvpfx_core::forecasting::{
    run_harness, Approach, ForecastRecord, HarnessCell, SampleSpec, Scheme, WindowSpec,
};
use tvpfx_core::fundamentals::{
    build_taylor_regressors, extract_factors, factor_fundamental, simple_fundamental,
    taylor_fundamental_ols, Estimation, FundamentalKind, FundamentalSpec, GapSource,
};
use tvpfx_core::gibbs::{parameterize_priors, run_gibbs, GibbsConfig, PriorSpec, DEFAULT_TAU};
use tvpfx_core::linalg::JitterPolicy;
use tvpfx_core::regress::ols;
use tvpfx_core::statespace::{carter_kohn_draw, kalman_filter, InitialCondition, StateSpaceModel};

fn quarter(s: &str) -> Quarter {
    s.parse().expect("valid quarter literal")
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

// ---------------------------------------------------------------------
// Data transforms

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn union_conversion_is_multiplicative_and_order_preserving(
        legacy in prop::collection::vec(0.1f64..10.0, 8..30),
        eur in prop::collection::vec(0.1f64..10.0, 8..30),
        factor in 0.1f64..5.0,
        cut_frac in 0.0f64..1.0,
    ) {
        let n = legacy.len().min(eur.len());
        let legacy = Series::new(0, legacy[..n].to_vec());
        let eur = Series::new(0, eur[..n].to_vec());
        let cutover = ((n - 1) as f64 * cut_frac) as usize;
        let out = euro_convert(&legacy, factor, cutover, &eur).unwrap();
        for t in 0..n {
            let got = out.get(t).unwrap();
            if t < cutover {
                prop_assert_eq!(got, legacy.get(t).unwrap());
            } else {
                let e = eur.get(t).unwrap();
                prop_assert!((got / e - factor).abs() <= 8.0 * f64::EPSILON * factor);
            }
        }
        for t in cutover..n {
            for u in cutover..n {
                let (a, b) = (eur.get(t).unwrap(), eur.get(u).unwrap());
                let (x, y) = (out.get(t).unwrap(), out.get(u).unwrap());
                prop_assert_eq!(a < b, x < y);
            }
        }
    }

    #[test]
    fn trend_gap_decomposition_reconstructs_the_series(
        vals in prop::collection::vec(-10.0f64..10.0, 8..50),
        lambda_pick in 0usize..4,
    ) {
        let lambda = [6.25, 129.0, 1600.0, 14400.0][lambda_pick];
        let series = Series::new(0, vals.clone());
        let gap = hp_gap(&series, lambda, HpMode::Full).unwrap();
        let trend = hp_trend(&vals, lambda);
        for (t, &x) in vals.iter().enumerate() {
            let g = gap.get(t).unwrap();
            prop_assert!(rel_close(g + trend[t], x, 1e-12));
        }
    }

    #[test]
    fn expanding_trend_terminal_point_matches_full_sample(
        vals in prop::collection::vec(-10.0f64..10.0, 12..50),
    ) {
        let series = Series::new(3, vals);
        let full = hp_gap(&series, 1600.0, HpMode::Full).unwrap();
        let rec = hp_gap(&series, 1600.0, HpMode::Recursive).unwrap();
        prop_assert_eq!(full.end(), rec.end());
        let last = full.end() - 1;
        prop_assert_eq!(full.get(last).unwrap(), rec.get(last).unwrap());
    }

    #[test]
    fn seasonal_adjustment_commutes_with_level_shifts(
        vals in prop::collection::vec(-10.0f64..10.0, 5..40),
        shift in -50.0f64..50.0,
    ) {
        let base = seasonal_adjust(&Series::new(2, vals.clone()));
        let shifted = seasonal_adjust(&Series::new(2, vals.iter().map(|v| v + shift).collect()));
        prop_assert_eq!(base.offset(), shifted.offset());
        prop_assert_eq!(base.end(), shifted.end());
        for (idx, v) in base.iter_indexed() {
            prop_assert!(rel_close(v + shift, shifted.get(idx).unwrap(), 1e-12));
        }
    }

    #[test]
    fn real_rate_is_antisymmetric_in_the_price_terms(
        s_vals in prop::collection::vec(-2.0f64..2.0, 6..30),
        p_vals in prop::collection::vec(-5.0f64..5.0, 6..30),
        pstar_vals in prop::collection::vec(-5.0f64..5.0, 6..30),
    ) {
        let n = s_vals.len().min(p_vals.len()).min(pstar_vals.len());
        let s = Series::new(0, s_vals[..n].to_vec());
        let p = Series::new(0, p_vals[..n].to_vec());
        let pstar = Series::new(0, pstar_vals[..n].to_vec());
        let q = real_exchange_rate(&s, &p, &pstar);
        let q_swapped = real_exchange_rate(&s, &pstar, &p);
        for (idx, v) in q.iter_indexed() {
            let price_part = v - s.get(idx).unwrap();
            let swapped_part = q_swapped.get(idx).unwrap() - s.get(idx).unwrap();
            prop_assert!(rel_close(price_part, -swapped_part, 1e-12));
        }
    }
}

// ---------------------------------------------------------------------
// Calendar axis

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn quarter_arithmetic_and_ordering(
        y1 in 1950i32..2100,
        q1 in 1u8..=4,
        y2 in 1950i32..2100,
        q2 in 1u8..=4,
        step in -200i64..200,
    ) {
        let a = Quarter::new(y1, q1).unwrap();
        let b = Quarter::new(y2, q2).unwrap();
        // Lexicographic (year, quarter) order.
        prop_assert_eq!(a < b, (y1, q1) < (y2, q2));
        // Year rollover: the quarter after Q4 is Q1 of the next year.
        if q1 == 4 {
            prop_assert_eq!(a + 1, Quarter::new(y1 + 1, 1).unwrap());
        }
        // Shifting is invertible and parse/display round-trips.
        let moved = a + step;
        prop_assert_eq!(moved - step, a);
        let text = moved.to_string();
        prop_assert_eq!(text.parse::<Quarter>().unwrap(), moved);
    }
}

// ---------------------------------------------------------------------
// State space

fn random_system(seed: u64, t_len: usize, k: usize) -> (StateSpaceModel, InitialCondition) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut unit = || rng.gen::<f64>() * 2.0 - 1.0;
    let a = Array2::from_shape_fn((k, k), |_| unit() * 0.6);
    let q = a.dot(&a.t());
    let b = Array2::from_shape_fn((k, k), |_| unit());
    let mut p0 = b.dot(&b.t());
    for i in 0..k {
        p0[[i, i]] += 0.3;
    }
    let model = StateSpaceModel {
        y: Array1::from_shape_fn(t_len, |_| unit() * 2.0),
        h: Array2::from_shape_fn((t_len, k), |_| unit() * 1.5),
        r: 0.2 + unit().abs(),
        q,
    };
    let init = InitialCondition {
        beta0: Array1::from_shape_fn(k, |_| unit()),
        p0,
    };
    (model, init)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn filter_covariances_stay_symmetric(
        seed in 0u64..10_000,
        t_len in 2usize..7,
        k in 1usize..4,
    ) {
        let (model, init) = random_system(seed, t_len, k);
        let out = kalman_filter(&model, &init).unwrap();
        for t in 0..t_len {
            for (name, m) in [("predicted", &out.p_pred[t]), ("filtered", &out.p_filt[t])] {
                for i in 0..k {
                    for j in 0..k {
                        prop_assert!(
                            (m[[i, j]] - m[[j, i]]).abs() <= 1e-12,
                            "{} covariance asymmetric at t={}", name, t
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn backward_sampling_is_seed_reproducible(
        seed in 0u64..10_000,
        chain_seed in 0u64..10_000,
    ) {
        let (model, init) = random_system(seed, 5, 2);
        let filter = kalman_filter(&model, &init).unwrap();
        let policy = JitterPolicy::default();
        let draw = |s: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            carter_kohn_draw(&model, &filter, &policy, &mut rng).unwrap()
        };
        prop_assert_eq!(draw(chain_seed), draw(chain_seed));
    }
}

// ---------------------------------------------------------------------
// Sampler contracts

fn toy_prior(k: usize) -> PriorSpec {
    PriorSpec {
        init: InitialCondition {
            beta0: Array1::zeros(k),
            p0: Array2::eye(k),
        },
        r0: 0.5,
        r_dof: 4,
        q0: Array2::eye(k) * 0.05,
        q_dof: 6,
        tau: 1.0,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn chains_are_deterministic_and_draw_retention_ignores_dumping(
        data_seed in 0u64..10_000,
        chain_seed in 0u64..10_000,
        total in 12usize..40,
        burn_frac in 0.0f64..0.8,
    ) {
        let t_len = 30;
        let k = 2;
        let mut rng = ChaCha8Rng::seed_from_u64(data_seed);
        let h = Array2::from_shape_fn((t_len, k), |_| rng.gen::<f64>() * 2.0 - 1.0);
        let y = Array1::from_shape_fn(t_len, |_| rng.gen::<f64>() * 2.0 - 1.0);
        let burn_in = ((total as f64) * burn_frac) as usize;
        let config = GibbsConfig {
            total_draws: total,
            burn_in,
            seed: chain_seed,
            keep_state_draws: true,
            ..GibbsConfig::default()
        };
        let prior = toy_prior(k);
        let a = run_gibbs(y.view(), h.view(), &prior, &config).unwrap();
        let b = run_gibbs(y.view(), h.view(), &prior, &config).unwrap();
        prop_assert_eq!(&a.r_draws, &b.r_draws);
        prop_assert_eq!(&a.q_draws, &b.q_draws);
        prop_assert_eq!(&a.posterior_mean_states, &b.posterior_mean_states);

        // Retention contract.
        let kept = total - burn_in;
        prop_assert_eq!(a.r_draws.len(), kept);
        prop_assert_eq!(a.q_draws.len(), kept);
        prop_assert_eq!(a.states.len(), kept);
        for q in &a.q_draws {
            prop_assert!((q[[0, 1]] - q[[1, 0]]).abs() <= 1e-12);
            prop_assert!(q[[0, 0]] > 0.0 && q[[1, 1]] > 0.0);
        }
        for &r in &a.r_draws {
            prop_assert!(r > 0.0);
        }

        // Not materializing the state paths must not change the chain.
        let slim = run_gibbs(
            y.view(),
            h.view(),
            &prior,
            &GibbsConfig { keep_state_draws: false, ..config },
        )
        .unwrap();
        prop_assert_eq!(&a.r_draws, &slim.r_draws);
        prop_assert_eq!(&a.posterior_mean_states, &slim.posterior_mean_states);
        prop_assert_eq!(slim.states.len(), 0);
    }
}

/// More data must estimate the observation variance better: the median
/// absolute error of the posterior mean strictly falls from T = 100 to
/// T = 800 over 20 seeds.
#[test]
fn posterior_contraction_in_sample_size() {
    let true_r: f64 = 1.0;
    let run_t = |t_len: usize, seed: u64| -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut unit = || rng.gen::<f64>() * 2.0 - 1.0;
        let h = Array2::from_shape_fn((t_len, 1), |_| 2.0 * unit());
        let mut beta = 0.4;
        let mut y = Array1::<f64>::zeros(t_len);
        for t in 0..t_len {
            beta += 0.1 * unit();
            y[t] = h[[t, 0]] * beta + true_r.sqrt() * gauss(&mut rng);
        }
        let prior = PriorSpec {
            init: InitialCondition {
                beta0: Array1::zeros(1),
                p0: Array2::eye(1),
            },
            r0: 0.1,
            r_dof: 2,
            q0: Array2::from_elem((1, 1), 0.05),
            q_dof: 12,
            tau: 1.0,
        };
        let config = GibbsConfig {
            total_draws: 400,
            burn_in: 100,
            seed,
            keep_state_draws: false,
            ..GibbsConfig::default()
        };
        let draws = run_gibbs(y.view(), h.view(), &prior, &config).unwrap();
        let mean_r = draws.r_draws.iter().sum::<f64>() / draws.r_draws.len() as f64;
        (mean_r - true_r).abs()
    };
    let mut short: Vec<f64> = (0..20).map(|s| run_t(100, 40_000 + s)).collect();
    let mut long: Vec<f64> = (0..20).map(|s| run_t(800, 40_000 + s)).collect();
    short.sort_by(f64::total_cmp);
    long.sort_by(f64::total_cmp);
    let med = |v: &[f64]| (v[9] + v[10]) / 2.0;
    let (m_short, m_long) = (med(&short), med(&long));
    println!("median |R error|: T=100 gives {m_short:.4}, T=800 gives {m_long:.4}");
    assert!(
        m_long < m_short,
        "error did not contract: {m_short:.4} -> {m_long:.4}"
    );
}

fn gauss<R: Rng>(rng: &mut R) -> f64 {
    use rand_distr::{Distribution, StandardNormal};
    <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng)
}

// ---------------------------------------------------------------------
// Fundamentals on the committed fixture panel

fn fixture_panel() -> SeriesPanel {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/synthetic");
    let files: BTreeMap<Variable, PathBuf> = Variable::required()
        .into_iter()
        .map(|v| (v, dir.join(format!("{}.csv", v.name()))))
        .collect();
    let loaded = load_panel(&files, "US").expect("fixture panel loads");
    build_panel(
        loaded.axis,
        loaded.countries,
        &loaded.extra_rates,
        "US",
        TransformOptions::default(),
        None,
    )
    .expect("fixture panel transforms")
}

#[test]
fn deviation_plus_rate_reproduces_the_fundamental() {
    let panel = fixture_panel();
    for ccy in ["CA", "JP", "SZ", "UK"] {
        let s = &panel.country(ccy).unwrap().s;
        let mut all = Vec::new();
        for kind in [FundamentalKind::Mm, FundamentalKind::Ppp, FundamentalKind::Uirp] {
            all.push(simple_fundamental(kind, &panel, ccy).unwrap());
        }
        let spec = FundamentalSpec::taylor(FundamentalKind::TrOn, Estimation::ConstantOls);
        let regs =
            build_taylor_regressors(&panel, ccy, FundamentalKind::TrOn, GapSource::Output).unwrap();
        all.push(taylor_fundamental_ols(&spec, &regs, s).unwrap());
        for fs in &all {
            let mut checked = 0;
            for (idx, omega) in fs.omega.iter_indexed() {
                let z = fs.z.get(idx).unwrap();
                let sv = s.get(idx).unwrap();
                assert!(
                    rel_close(z + sv, omega, 1e-13),
                    "{} {}: z + s = {} but omega = {} at {}",
                    fs.spec.id(),
                    ccy,
                    z + sv,
                    omega,
                    idx
                );
                checked += 1;
            }
            assert!(checked > 0, "{} produced an empty series", fs.spec.id());
        }
    }
}

#[test]
fn factor_fundamental_deviation_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(314);
    let x = Array2::from_shape_fn((30, 4), |_| rng.gen::<f64>() * 2.0 - 1.0);
    let fm = extract_factors(&x, 2).unwrap();
    let s = Series::new(0, x.column(1).to_vec());
    let fs = factor_fundamental(&fm, 1, &s).unwrap();
    for (idx, omega) in fs.omega.iter_indexed() {
        let z = fs.z.get(idx).unwrap();
        assert!(rel_close(z, omega - s.get(idx).unwrap(), 1e-13));
    }
}

/// The homogeneous rule is the equal-coefficients restriction of the
/// country-specific rule: restricted least squares on the wide design
/// must reproduce the narrow design's fitted values.
#[test]
fn homogeneous_rule_is_a_restriction_of_the_country_specific_rule() {
    let panel = fixture_panel();
    for ccy in ["CA", "JP", "SZ", "UK"] {
        let on =
            build_taylor_regressors(&panel, ccy, FundamentalKind::TrOn, GapSource::Output).unwrap();
        let en =
            build_taylor_regressors(&panel, ccy, FundamentalKind::TrEn, GapSource::Output).unwrap();
        let from = on.first_defined().max(en.first_defined());
        let to = on.end_defined().min(en.end_defined());
        let (y_on, x_on) = on.materialize(from, to).unwrap();
        let (y_en, x_en) = en.materialize(from, to).unwrap();
        assert_eq!(y_on, y_en, "dependents differ for {ccy}");

        // Columns are [pi, -pi*, gap, -gap*, q]; equal home/foreign
        // coefficients collapse the design onto [pi-pi*, gap-gap*, q].
        let mut c = Array2::<f64>::zeros((2, 5));
        c[[0, 0]] = 1.0;
        c[[0, 1]] = -1.0;
        c[[1, 2]] = 1.0;
        c[[1, 3]] = -1.0;
        let beta_restricted = restricted_ls(&x_en, &y_en, &c);
        let fitted_restricted = x_en.dot(&beta_restricted);

        let fit = ols(x_on.view(), y_on.view()).unwrap();
        let dev = max_abs_diff_vec(fit.fitted.view(), fitted_restricted.view());
        assert!(dev <= 1e-10, "{ccy}: fitted values differ by {dev:e}");
    }
}

// ---------------------------------------------------------------------
// Forecast harness bookkeeping

#[test]
fn rolling_and_recursive_schemes_emit_matching_record_counts() {
    let panel = fixture_panel();
    let window = WindowSpec {
        label: "S".into(),
        start: quarter("2000Q1"),
        end: quarter("2005Q4"),
        currencies: vec!["CA".into(), "JP".into(), "SZ".into(), "UK".into()],
    };
    let sample = SampleSpec {
        training_start: quarter("1978Q1"),
        training_len: 40,
        insample_start: quarter("1988Q1"),
    };
    for (fund, approach) in [
        (FundamentalSpec::identity(FundamentalKind::Ppp), Approach::OlsRegression),
        (FundamentalSpec::identity(FundamentalKind::Uirp), Approach::PanelLsdv),
    ] {
        let run = |scheme: Scheme| -> Vec<ForecastRecord> {
            run_harness(&HarnessCell {
                panel: &panel,
                fund,
                approach,
                window: &window,
                horizon: 8,
                scheme,
                sample: &sample,
                gibbs: GibbsConfig::default(),
                tau: DEFAULT_TAU,
                master_seed: 7,
            })
            .unwrap()
        };
        let recursive = run(Scheme::Recursive);
        let rolling = run(Scheme::Rolling(40));
        assert_eq!(recursive.len(), rolling.len(), "{}", fund.id());
        assert!(!recursive.is_empty());
        for ccy in ["CA", "JP", "SZ", "UK"] {
            let n_rec = recursive.iter().filter(|r| r.currency == ccy).count();
            let n_rol = rolling.iter().filter(|r| r.currency == ccy).count();
            assert_eq!(n_rec, n_rol, "{} {}", fund.id(), ccy);
        }
    }
}

// ---------------------------------------------------------------------
// Evaluation algebra

fn records_from(pairs: &[(f64, f64)], horizon: usize) -> Vec<ForecastRecord> {
    pairs
        .iter()
        .enumerate()
        .map(|(i, &(predicted, realized))| ForecastRecord {
            currency: "C".into(),
            origin: quarter("1990Q1") + i as i64,
            horizon,
            model: "m".into(),
            predicted,
            realized,
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn accuracy_measures_are_scale_invariant(
        pairs in prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 9..40),
        c in 0.01f64..50.0,
    ) {
        let realized_sq: f64 = pairs.iter().map(|&(_, r)| r * r).sum();
        prop_assume!(realized_sq > 1e-6);
        let base = records_from(&pairs, 4);
        let scaled: Vec<(f64, f64)> = pairs.iter().map(|&(p, r)| (c * p, c * r)).collect();
        let scaled = records_from(&scaled, 4);

        let u0 = theil_u(&base).unwrap();
        let u1 = theil_u(&scaled).unwrap();
        prop_assert!(rel_close(u0, u1, 1e-9));

        match (
            dm_test_with_bandwidth(&base, 3).unwrap(),
            dm_test_with_bandwidth(&scaled, 3).unwrap(),
        ) {
            (DmOutcome::Statistic(a), DmOutcome::Statistic(b)) => {
                prop_assert!(rel_close(a, b, 1e-8), "DM moved: {} vs {}", a, b);
            }
            (a, b) => prop_assert_eq!(a, b),
        }
    }

    #[test]
    fn running_accuracy_series_ends_at_the_full_ratio(
        pairs in prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 1..40),
    ) {
        let realized_sq: f64 = pairs.iter().map(|&(_, r)| r * r).sum();
        prop_assume!(realized_sq > 1e-9);
        let records = records_from(&pairs, 8);
        let series = recursive_u_series(&records).unwrap();
        prop_assert_eq!(series.len(), records.len());
        let full = theil_u(&records).unwrap();
        let last = *series.last().unwrap();
        prop_assert!(
            last == full,
            "running ratio ends at {} but the full ratio is {}", last, full
        );
    }

    #[test]
    fn equal_accuracy_statistic_is_antisymmetric(
        d in prop::collection::vec(-2.0f64..2.0, 9..40),
        bandwidth in 0usize..6,
    ) {
        let neg: Vec<f64> = d.iter().map(|v| -v).collect();
        match (dm_from_losses(&d, bandwidth), dm_from_losses(&neg, bandwidth)) {
            (DmOutcome::Statistic(a), DmOutcome::Statistic(b)) => {
                prop_assert_eq!(a, -b);
            }
            (a, b) => prop_assert_eq!(a, b),
        }
    }

    #[test]
    fn window_summary_ignores_currency_order(
        us in prop::collection::vec(0.01f64..3.0, 1..20),
        dms in prop::collection::vec(-3.0f64..3.0, 1..20),
        rotation in 0usize..20,
    ) {
        let n = us.len().min(dms.len());
        let cells: Vec<EvalCell> = (0..n)
            .map(|i| EvalCell {
                currency: format!("C{i:02}"),
                model: "m".into(),
                window: "A".into(),
                horizon: 8,
                u: us[i],
                dm: DmOutcome::Statistic(dms[i]),
                n_forecasts: 12,
            })
            .collect();
        let mut rotated = cells.clone();
        rotated.rotate_left(rotation % n);
        let a = summarize_window(&cells, 1.282).unwrap();
        let b = summarize_window(&rotated, 1.282).unwrap();
        prop_assert_eq!(a, b);
    }
}

// ---------------------------------------------------------------------
// Prior construction

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn training_prior_scales_with_the_declared_drift_budget(
        seed in 0u64..10_000,
        t0 in 8usize..30,
        horizon in 0usize..3,
    ) {
        let k = 2;
        prop_assume!(t0 >= k + 2 + horizon);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = Array2::from_shape_fn((t0, k), |_| rng.gen::<f64>() * 2.0 - 1.0);
        let y = Array1::from_shape_fn(t0, |_| rng.gen::<f64>() * 2.0 - 1.0);
        let small = parameterize_priors(h.view(), y.view(), 1e-4, horizon);
        let large = parameterize_priors(h.view(), y.view(), 1e-2, horizon);
        let (small, large) = match (small, large) {
            (Ok(a), Ok(b)) => (a, b),
            // Degenerate training fits are rejected, not mis-scaled.
            _ => return Ok(()),
        };
        // The drift prior is linear in tau; everything else is
        // tau-independent.
        for i in 0..k {
            for j in 0..k {
                prop_assert!(rel_close(small.q0[[i, j]] * 100.0, large.q0[[i, j]], 1e-10));
            }
        }
        prop_assert_eq!(small.r0, large.r0);
        prop_assert_eq!(small.r_dof, large.r_dof);
        prop_assert_eq!(small.q_dof, large.q_dof);
        prop_assert_eq!(&small.init.beta0, &large.init.beta0);
        // Effective training size shrinks with the forecast horizon.
        prop_assert_eq!(small.r_dof, t0 - horizon - k);
        prop_assert_eq!(small.q_dof, t0 - horizon);
    }
}
