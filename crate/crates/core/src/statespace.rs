//! Linear-Gaussian state space with a random-walk state: scalar
//! observation `y_t = h_t' β_t + e_t`, `e_t ~ N(0, r)`, and state
//! `β_t = β_{t-1} + v_t`, `v_t ~ N(0, Q)`. Forward Kalman filtering and
//! backward joint simulation of the state path.

use crate::error::{Error, Result};
use crate::linalg::{
    cholesky_jittered, is_negligible, solve_matrix_from_chol, symmetrize, JitterPolicy,
};
use ndarray::{Array1, Array2};
use rand::Rng;
use rand_distr::StandardNormal;

#[derive(Debug, Clone)]
pub struct StateSpaceModel {
    /// Observations, length T.
    pub y: Array1<f64>,
    /// Regressors, T × k; row t multiplies the state at t.
    pub h: Array2<f64>,
    /// Observation noise variance.
    pub r: f64,
    /// State innovation covariance, k × k.
    pub q: Array2<f64>,
}

#[derive(Debug, Clone)]
pub struct InitialCondition {
    pub beta0: Array1<f64>,
    pub p0: Array2<f64>,
}

#[derive(Debug, Clone)]
pub struct FilterOutput {
    /// One-step-ahead state means, T × k.
    pub beta_pred: Array2<f64>,
    /// One-step-ahead state covariances.
    pub p_pred: Vec<Array2<f64>>,
    /// Filtered state means, T × k.
    pub beta_filt: Array2<f64>,
    /// Filtered state covariances.
    pub p_filt: Vec<Array2<f64>>,
    /// One-step prediction errors.
    pub innovations: Array1<f64>,
    /// One-step prediction error variances.
    pub innovation_vars: Array1<f64>,
}

impl StateSpaceModel {
    fn check(&self, init: &InitialCondition) -> Result<(usize, usize)> {
        let t = self.y.len();
        let k = self.h.ncols();
        if t == 0 {
            return Err(Error::TooShort { need: 1, got: 0 });
        }
        if self.h.nrows() != t {
            return Err(Error::Alignment(format!(
                "{} observations but {} regressor rows",
                t,
                self.h.nrows()
            )));
        }
        if self.q.nrows() != k || self.q.ncols() != k {
            return Err(Error::Alignment(format!(
                "state dimension {k} but innovation covariance is {}x{}",
                self.q.nrows(),
                self.q.ncols()
            )));
        }
        if init.beta0.len() != k || init.p0.nrows() != k || init.p0.ncols() != k {
            return Err(Error::Alignment(format!(
                "initial condition does not match state dimension {k}"
            )));
        }
        if !self.r.is_finite() || self.r < 0.0 {
            return Err(Error::Domain(format!(
                "observation variance must be finite and non-negative, got {}",
                self.r
            )));
        }
        Ok((t, k))
    }
}

/// Forward pass. Fails with a per-period error when an innovation
/// variance is not strictly positive and finite.
pub fn kalman_filter(model: &StateSpaceModel, init: &InitialCondition) -> Result<FilterOutput> {
    let (t_len, k) = model.check(init)?;
    let mut beta_pred = Array2::<f64>::zeros((t_len, k));
    let mut beta_filt = Array2::<f64>::zeros((t_len, k));
    let mut p_pred = Vec::with_capacity(t_len);
    let mut p_filt = Vec::with_capacity(t_len);
    let mut innovations = Array1::<f64>::zeros(t_len);
    let mut innovation_vars = Array1::<f64>::zeros(t_len);

    let mut beta = init.beta0.clone();
    let mut p = init.p0.clone();
    for t in 0..t_len {
        // Random-walk transition: the prediction reuses the mean and
        // inflates the covariance by Q.
        let bp = beta.clone();
        let mut pp = &p + &model.q;
        symmetrize(&mut pp);

        let h_t = model.h.row(t);
        let ph = pp.dot(&h_t); // k-vector P h'
        let f = h_t.dot(&ph) + model.r;
        if !(f.is_finite() && f > 0.0) {
            return Err(Error::SingularInnovation { t });
        }
        let n = model.y[t] - h_t.dot(&bp);
        let gain = &ph / f;
        let bf = &bp + &(&gain * n);
        let mut pf = pp.clone();
        for i in 0..k {
            for j in 0..k {
                pf[[i, j]] -= gain[i] * ph[j];
            }
        }
        symmetrize(&mut pf);

        beta_pred.row_mut(t).assign(&bp);
        beta_filt.row_mut(t).assign(&bf);
        innovations[t] = n;
        innovation_vars[t] = f;
        p_pred.push(pp);
        p_filt.push(pf);
        beta = bf;
        p = p_filt[t].clone();
    }
    Ok(FilterOutput {
        beta_pred,
        p_pred,
        beta_filt,
        p_filt,
        innovations,
        innovation_vars,
    })
}

fn draw_gaussian<R: Rng>(
    mean: &Array1<f64>,
    cov: &Array2<f64>,
    policy: &JitterPolicy,
    t: usize,
    rng: &mut R,
) -> Result<Array1<f64>> {
    let (l, _) = cholesky_jittered(cov, policy)
        .map_err(|attempts| Error::Indefinite { t, attempts })?;
    let k = mean.len();
    let z = Array1::from_iter((0..k).map(|_| rng.sample::<f64, _>(StandardNormal)));
    Ok(mean + &l.dot(&z))
}

/// Backward sampler: draws the full state path from its joint posterior
/// given the data, using the filter output. The conditioning matrix
/// `G_t = P_{t|t} (P_{t|t} + Q)^{-1}` is formed through a semidefinite
/// solve, so exactly singular covariances (Q = 0, or a degenerate
/// initial condition) collapse to the correct deterministic limits.
pub fn carter_kohn_draw<R: Rng>(
    model: &StateSpaceModel,
    filter: &FilterOutput,
    policy: &JitterPolicy,
    rng: &mut R,
) -> Result<Array2<f64>> {
    let t_len = filter.beta_filt.nrows();
    let k = filter.beta_filt.ncols();
    let mut path = Array2::<f64>::zeros((t_len, k));

    let last = t_len - 1;
    let terminal = draw_gaussian(
        &filter.beta_filt.row(last).to_owned(),
        &filter.p_filt[last],
        policy,
        last,
        rng,
    )?;
    path.row_mut(last).assign(&terminal);

    for t in (0..last).rev() {
        let p = &filter.p_filt[t];
        let mut s = p + &model.q;
        symmetrize(&mut s);
        let (ls, _) = cholesky_jittered(&s, policy)
            .map_err(|attempts| Error::Indefinite { t, attempts })?;
        // Solve S X = P; G = X' satisfies G S = P, i.e. G = P S^{-1}.
        let g = solve_matrix_from_chol(&ls, p).reversed_axes();

        let bf = filter.beta_filt.row(t).to_owned();
        let ahead = path.row(t + 1).to_owned();
        let mean = &bf + &g.dot(&(&ahead - &bf));
        let mut cov = p - &g.dot(p);
        symmetrize(&mut cov);
        // When G → I the subtraction leaves rounding dust whose own
        // scale is meaningless; judge it against S and collapse to the
        // exact degenerate draw.
        let ref_scale = (0..k).map(|i| s[[i, i]].abs()).fold(0.0_f64, f64::max);
        if is_negligible(&cov, ref_scale) {
            cov.fill(0.0);
        }
        let draw = draw_gaussian(&mean, &cov, policy, t, rng)?;
        path.row_mut(t).assign(&draw);
    }
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding::rng_for;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn scalar_model(y: Vec<f64>, r: f64, q: f64) -> StateSpaceModel {
        let t = y.len();
        StateSpaceModel {
            y: Array1::from(y),
            h: Array2::ones((t, 1)),
            r,
            q: array![[q]],
        }
    }

    #[test]
    fn filter_matches_hand_computed_local_level() {
        // One scalar step computed by hand: P_pred = 1 + 0.5,
        // f = 1.5 + 2, K = 1.5/3.5.
        let model = scalar_model(vec![2.0], 2.0, 0.5);
        let init = InitialCondition {
            beta0: array![1.0],
            p0: array![[1.0]],
        };
        let out = kalman_filter(&model, &init).unwrap();
        assert_abs_diff_eq!(out.innovations[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(out.innovation_vars[0], 3.5, epsilon = 1e-15);
        let k = 1.5 / 3.5;
        assert_abs_diff_eq!(out.beta_filt[[0, 0]], 1.0 + k, epsilon = 1e-15);
        assert_abs_diff_eq!(out.p_filt[0][[0, 0]], 1.5 * (1.0 - k), epsilon = 1e-15);
    }

    #[test]
    fn degenerate_initial_state_is_never_updated() {
        // P0 = 0 and Q = 0: the state is known exactly, the gain is zero.
        let model = scalar_model(vec![5.0, -3.0, 0.7], 1.0, 0.0);
        let init = InitialCondition {
            beta0: array![2.0],
            p0: array![[0.0]],
        };
        let out = kalman_filter(&model, &init).unwrap();
        for t in 0..3 {
            assert_abs_diff_eq!(out.beta_filt[[t, 0]], 2.0, epsilon = 1e-15);
            assert_abs_diff_eq!(out.p_filt[t][[0, 0]], 0.0, epsilon = 1e-15);
        }
        let mut rng = rng_for(7, &["ck-degenerate"]);
        let path = carter_kohn_draw(&model, &out, &JitterPolicy::default(), &mut rng).unwrap();
        for t in 0..3 {
            assert_abs_diff_eq!(path[[t, 0]], 2.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn zero_innovation_covariance_gives_flat_sampled_path() {
        // Q = 0 makes the state constant, so the joint draw must be flat.
        let model = scalar_model(vec![1.0, 2.0, 3.0, 2.0], 0.5, 0.0);
        let init = InitialCondition {
            beta0: array![0.0],
            p0: array![[4.0]],
        };
        let out = kalman_filter(&model, &init).unwrap();
        let mut rng = rng_for(11, &["ck-flat"]);
        let path = carter_kohn_draw(&model, &out, &JitterPolicy::default(), &mut rng).unwrap();
        for t in 0..3 {
            assert_abs_diff_eq!(path[[t, 0]], path[[3, 0]], epsilon = 1e-12);
        }
    }

    #[test]
    fn zero_innovation_variance_is_reported_with_period() {
        let model = scalar_model(vec![1.0, 2.0], 0.0, 0.0);
        let init = InitialCondition {
            beta0: array![0.0],
            p0: array![[0.0]],
        };
        let err = kalman_filter(&model, &init).unwrap_err();
        match err {
            Error::SingularInnovation { t } => assert_eq!(t, 0),
            other => panic!("wrong error: {other}"),
        }
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let model = StateSpaceModel {
            y: array![1.0, 2.0],
            h: Array2::ones((2, 2)),
            r: 1.0,
            q: array![[1.0]],
        };
        let init = InitialCondition {
            beta0: array![0.0, 0.0],
            p0: Array2::eye(2),
        };
        assert!(kalman_filter(&model, &init).is_err());
    }
}
