//! Bayesian estimation of the time-varying-coefficient regression:
//! training-sample prior parameterization, conjugate conditional draws
//! of the observation variance R (inverse-Gamma) and the state
//! innovation covariance Q (inverse-Wishart), the Gibbs loop around the
//! backward state sampler, and chain convergence diagnostics.

use crate::error::{Error, Result};
use crate::linalg::{cholesky_jittered, solve_from_chol, symmetrize, JitterPolicy};
use crate::regress::ols;
use crate::statespace::{carter_kohn_draw, kalman_filter, InitialCondition, StateSpaceModel};
use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, Gamma, StandardNormal};

/// Default innovation-scale factor: the prior expects coefficient
/// drift worth a fraction tau of the training-sample uncertainty per
/// quarter.
pub const DEFAULT_TAU: f64 = 3.5e-6;

/// Training-sample prior for one regression.
#[derive(Debug, Clone)]
pub struct PriorSpec {
    pub init: InitialCondition,
    /// Prior scale for the observation variance.
    pub r0: f64,
    /// Prior degrees of freedom for R (training size minus regressors).
    pub r_dof: usize,
    /// Prior scale matrix for the innovation covariance.
    pub q0: Array2<f64>,
    /// Prior degrees of freedom for Q (training size).
    pub q_dof: usize,
    /// Innovation-scale factor the Q prior was built with.
    pub tau: f64,
}

#[derive(Debug, Clone)]
pub struct GibbsConfig {
    pub total_draws: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub jitter: JitterPolicy,
    /// Zero the off-diagonal of every Q draw.
    pub diag_q: bool,
    /// Retain every post-burn-in state path (memory: D × T × k).
    pub keep_state_draws: bool,
}

impl Default for GibbsConfig {
    fn default() -> Self {
        GibbsConfig {
            total_draws: 1700,
            burn_in: 300,
            seed: 0,
            jitter: JitterPolicy::default(),
            diag_q: false,
            keep_state_draws: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PosteriorDraws {
    /// Retained state paths (empty when `keep_state_draws` is off).
    pub states: Vec<Array2<f64>>,
    pub r_draws: Vec<f64>,
    pub q_draws: Vec<Array2<f64>>,
    /// Per-period mean over retained state draws, T × k.
    pub posterior_mean_states: Array2<f64>,
}

/// Build the prior from a training regression. For a direct h-step
/// regression the target leads the regressors by `horizon` rows, so the
/// usable training size shrinks to `len − horizon` and every degree of
/// freedom shrinks with it.
pub fn parameterize_priors(
    h0: ArrayView2<f64>,
    y0: ArrayView1<f64>,
    tau: f64,
    horizon: usize,
) -> Result<PriorSpec> {
    if h0.nrows() != y0.len() {
        return Err(Error::Alignment(format!(
            "training has {} regressor rows but {} targets",
            h0.nrows(),
            y0.len()
        )));
    }
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(Error::Domain(format!(
            "innovation scale factor must be finite and non-negative, got {tau}"
        )));
    }
    let k = h0.ncols();
    let t0 = y0.len().saturating_sub(horizon);
    if t0 < k + 2 {
        return Err(Error::ShortTraining {
            have: t0,
            need: k + 2,
        });
    }
    // Pair regressors at t with the target at t + horizon.
    let x = h0.slice(ndarray::s![..t0, ..]);
    let y = y0.slice(ndarray::s![horizon..]);
    let fit = ols(x, y)?;
    let sigma0 = fit.rss / (t0 - k) as f64;
    if !(sigma0.is_finite() && sigma0 > 0.0) {
        return Err(Error::DegenerateTraining);
    }
    let p0 = fit.xtx_inv.mapv(|v| v * sigma0);
    let q0 = p0.mapv(|v| v * t0 as f64 * tau);
    Ok(PriorSpec {
        init: InitialCondition {
            beta0: fit.coef,
            p0,
        },
        r0: sigma0,
        r_dof: t0 - k,
        q0,
        q_dof: t0,
        tau,
    })
}

/// Conditional draw of the observation variance given a state path:
/// inverse-Gamma with shape (R_dof + T)/2 and scale (R0 + RSS)/2.
pub fn draw_r<R: Rng>(
    y: ArrayView1<f64>,
    h: ArrayView2<f64>,
    beta_path: &Array2<f64>,
    prior: &PriorSpec,
    rng: &mut R,
) -> Result<f64> {
    let t_len = y.len();
    if h.nrows() != t_len || beta_path.nrows() != t_len {
        return Err(Error::Alignment(format!(
            "observation count {t_len} does not match regressors ({}) or states ({})",
            h.nrows(),
            beta_path.nrows()
        )));
    }
    let mut rss = 0.0;
    for t in 0..t_len {
        let e = y[t] - h.row(t).dot(&beta_path.row(t));
        rss += e * e;
    }
    let theta1 = prior.r0 + rss;
    if !(theta1.is_finite() && theta1 > 0.0) {
        return Err(Error::Domain(
            "observation-variance posterior scale is not positive (zero residuals with a zero prior scale)"
                .to_string(),
        ));
    }
    let shape = (prior.r_dof + t_len) as f64 / 2.0;
    let g = Gamma::new(shape, 2.0 / theta1)
        .map_err(|e| Error::Domain(format!("gamma parameters: {e}")))?
        .sample(rng);
    if !(g.is_finite() && g > 0.0) {
        return Err(Error::Domain("gamma variate underflowed to zero".to_string()));
    }
    Ok(1.0 / g)
}

fn inv_spd_jittered(a: &Array2<f64>, policy: &JitterPolicy) -> Option<Array2<f64>> {
    let (l, _) = cholesky_jittered(a, policy).ok()?;
    let n = l.nrows();
    if (0..n).any(|i| l[[i, i]] == 0.0) {
        return None;
    }
    let mut inv = Array2::<f64>::zeros((n, n));
    for j in 0..n {
        let mut e = Array1::<f64>::zeros(n);
        e[j] = 1.0;
        inv.column_mut(j).assign(&solve_from_chol(&l, e.view()));
    }
    symmetrize(&mut inv);
    Some(inv)
}

/// Conditional draw of the innovation covariance given a state path:
/// inverse-Wishart with scale Q0 + Σ Δβ_t Δβ_t' and T + Q_dof degrees
/// of freedom, sampled by Bartlett decomposition.
pub fn draw_q<R: Rng>(
    beta_path: &Array2<f64>,
    prior: &PriorSpec,
    rng: &mut R,
) -> Result<Array2<f64>> {
    let t_len = beta_path.nrows();
    let k = beta_path.ncols();
    if t_len < 2 {
        return Err(Error::TooShort {
            need: 2,
            got: t_len,
        });
    }
    let mut qbar = prior.q0.clone();
    for t in 1..t_len {
        for i in 0..k {
            let di = beta_path[[t, i]] - beta_path[[t - 1, i]];
            for j in 0..k {
                let dj = beta_path[[t, j]] - beta_path[[t - 1, j]];
                qbar[[i, j]] += di * dj;
            }
        }
    }
    symmetrize(&mut qbar);
    let dof = (t_len + prior.q_dof) as f64;
    let policy = JitterPolicy::default();
    let scale_inv = inv_spd_jittered(&qbar, &policy).ok_or_else(|| {
        Error::Domain("innovation-covariance posterior scale is singular".to_string())
    })?;
    let (ls, _) = cholesky_jittered(&scale_inv, &policy).map_err(|_| {
        Error::Domain("inverted posterior scale lost definiteness".to_string())
    })?;
    // Bartlett factor: chi-square diagonal, standard-normal strict lower
    // triangle, drawn in fixed row-major order for reproducibility.
    let mut a = Array2::<f64>::zeros((k, k));
    for i in 0..k {
        for j in 0..=i {
            if i == j {
                let chi = ChiSquared::new(dof - i as f64)
                    .map_err(|e| Error::Domain(format!("chi-square dof: {e}")))?;
                a[[i, j]] = chi.sample(rng).sqrt();
            } else {
                a[[i, j]] = rng.sample::<f64, _>(StandardNormal);
            }
        }
    }
    let b = ls.dot(&a);
    let w = b.dot(&b.t());
    let mut q = inv_spd_jittered(&w, &policy).ok_or_else(|| {
        Error::Domain("Wishart variate was singular".to_string())
    })?;
    symmetrize(&mut q);
    Ok(q)
}

fn zero_off_diagonal(m: &mut Array2<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                m[[i, j]] = 0.0;
            }
        }
    }
}

/// Run the full chain: backward state draw given (R, Q), then R given
/// the states, then Q given the states, starting from the prior scales.
/// A zero Q0 switches to the constant-coefficient degenerate mode: Q is
/// pinned at zero and never drawn.
pub fn run_gibbs(
    y: ArrayView1<f64>,
    h: ArrayView2<f64>,
    prior: &PriorSpec,
    config: &GibbsConfig,
) -> Result<PosteriorDraws> {
    if config.total_draws == 0 || config.burn_in >= config.total_draws {
        return Err(Error::Config(format!(
            "need burn_in < total_draws, got {} / {}",
            config.burn_in, config.total_draws
        )));
    }
    if !(prior.r0.is_finite() && prior.r0 > 0.0) {
        return Err(Error::Domain(format!(
            "observation-variance prior scale must be positive, got {}",
            prior.r0
        )));
    }
    let kept = config.total_draws - config.burn_in;
    let t_len = y.len();
    let k = h.ncols();
    let q_pinned = prior.q0.iter().all(|&v| v == 0.0);

    let mut q_init = prior.q0.clone();
    if config.diag_q {
        zero_off_diagonal(&mut q_init);
    }
    let mut model = StateSpaceModel {
        y: y.to_owned(),
        h: h.to_owned(),
        r: prior.r0,
        q: q_init,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut states = Vec::with_capacity(if config.keep_state_draws { kept } else { 0 });
    let mut r_draws = Vec::with_capacity(kept);
    let mut q_draws = Vec::with_capacity(kept);
    let mut state_sum = Array2::<f64>::zeros((t_len, k));

    for iter in 0..config.total_draws {
        let wrap = |e: Error| Error::Sampler {
            iter,
            source: Box::new(e),
        };
        let filter = kalman_filter(&model, &prior.init).map_err(wrap)?;
        let path = carter_kohn_draw(&model, &filter, &config.jitter, &mut rng).map_err(wrap)?;
        model.r = draw_r(y, h, &path, prior, &mut rng).map_err(wrap)?;
        if !q_pinned {
            let mut q = draw_q(&path, prior, &mut rng).map_err(wrap)?;
            if config.diag_q {
                zero_off_diagonal(&mut q);
            }
            model.q = q;
        }
        if iter >= config.burn_in {
            state_sum += &path;
            r_draws.push(model.r);
            q_draws.push(model.q.clone());
            if config.keep_state_draws {
                states.push(path);
            }
        }
    }
    let posterior_mean_states = state_sum.mapv(|v| v / kept as f64);
    Ok(PosteriorDraws {
        states,
        r_draws,
        q_draws,
        posterior_mean_states,
    })
}

/// Bartlett-tapered spectral density at frequency zero with a 4% lag
/// window, the long-run variance behind the numerical standard errors.
fn spectral_zero(xs: &[f64]) -> f64 {
    let n = xs.len();
    let mean = xs.iter().sum::<f64>() / n as f64;
    let gamma = |lag: usize| -> f64 {
        let mut acc = 0.0;
        for t in lag..n {
            acc += (xs[t] - mean) * (xs[t - lag] - mean);
        }
        acc / n as f64
    };
    let l = (0.04 * n as f64).floor() as usize;
    let mut s0 = gamma(0);
    for j in 1..=l.min(n.saturating_sub(1)) {
        let w = 1.0 - j as f64 / (l + 1) as f64;
        s0 += 2.0 * w * gamma(j);
    }
    s0.max(0.0)
}

/// Equality-of-means convergence score between the first 10% and last
/// 50% of a chain, standardized by spectral numerical standard errors.
pub fn geweke_diagnostic(chain: &[f64]) -> Result<f64> {
    let n = chain.len();
    if n < 100 {
        return Err(Error::TooShort { need: 100, got: n });
    }
    let n1 = n / 10;
    let n2 = n / 2;
    let seg1 = &chain[..n1];
    let seg2 = &chain[n - n2..];
    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    let var_z = spectral_zero(seg1) / n1 as f64 + spectral_zero(seg2) / n2 as f64;
    if !(var_z.is_finite() && var_z > 0.0) {
        return Err(Error::UndefinedDiagnostic);
    }
    Ok((mean(seg1) - mean(seg2)) / var_z.sqrt())
}

/// Relative numerical efficiency: the i.i.d.-equivalent share of the
/// chain's information, variance / long-run variance.
pub fn rne(chain: &[f64]) -> Result<f64> {
    let n = chain.len();
    if n < 100 {
        return Err(Error::TooShort { need: 100, got: n });
    }
    let s0 = spectral_zero(chain);
    if !(s0.is_finite() && s0 > 0.0) {
        return Err(Error::UndefinedDiagnostic);
    }
    let mean = chain.iter().sum::<f64>() / n as f64;
    let var = chain.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
    Ok(var / s0)
}
