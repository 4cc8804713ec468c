//! Independent reference implementations used to cross-check the
//! library. Everything here is deliberately written the slow, obvious
//! way — dense Gauss–Jordan inverses, explicit joint-Gaussian
//! conditioning, double-sum variance estimators — and shares no code
//! with the crate under test.

#![allow(dead_code)]

use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2};

/// Dense inverse by Gauss–Jordan elimination with partial pivoting.
/// Panics on singular input: oracle fixtures are built well-conditioned.
pub fn gauss_jordan_inverse(a: &Array2<f64>) -> Array2<f64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "inverse needs a square matrix");
    let mut m = Array2::<f64>::zeros((n, 2 * n));
    m.slice_mut(s![.., ..n]).assign(a);
    for i in 0..n {
        m[[i, n + i]] = 1.0;
    }
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if m[[r, col]].abs() > m[[piv, col]].abs() {
                piv = r;
            }
        }
        assert!(m[[piv, col]].abs() > 1e-300, "singular matrix in oracle");
        if piv != col {
            for j in 0..2 * n {
                m.swap([piv, j], [col, j]);
            }
        }
        let d = m[[col, col]];
        for j in 0..2 * n {
            m[[col, j]] /= d;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = m[[r, col]];
            if f != 0.0 {
                for j in 0..2 * n {
                    let v = m[[col, j]];
                    m[[r, j]] -= f * v;
                }
            }
        }
    }
    m.slice(s![.., n..]).to_owned()
}

/// Solve A x = b through the dense inverse.
pub fn gauss_jordan_solve(a: &Array2<f64>, b: &Array1<f64>) -> Array1<f64> {
    gauss_jordan_inverse(a).dot(b)
}

/// Exact conditional moments of a scalar-observation random-walk
/// state-space model, obtained without any filtering recursion: the
/// joint Gaussian of (β_1..β_T, y_1..y_T) is written down explicitly
/// and conditioned by Schur complement.
pub struct JointMoments {
    /// E[β_t | y_1..y_{t-1}] and its covariance.
    pub pred_mean: Vec<Array1<f64>>,
    pub pred_cov: Vec<Array2<f64>>,
    /// E[β_t | y_1..y_t] and its covariance.
    pub filt_mean: Vec<Array1<f64>>,
    pub filt_cov: Vec<Array2<f64>>,
    /// E[β_t | y_1..y_T] and its covariance.
    pub smooth_mean: Vec<Array1<f64>>,
    pub smooth_cov: Vec<Array2<f64>>,
}

/// Build the joint distribution implied by
///   β_t = β_{t-1} + v_t,  v_t ~ N(0, Q),  β_0 ~ N(beta0, P0),
///   y_t = H_t β_t + e_t,  e_t ~ N(0, R),
/// so that E[β_t] = beta0 and Cov(β_t, β_u) = P0 + min(t, u) · Q
/// (states are 1-indexed in that formula). Observations inherit their
/// covariance from the states plus δ_{tu} R.
pub fn joint_gaussian_moments(
    y: ArrayView1<f64>,
    h: ArrayView2<f64>,
    r: f64,
    q: &Array2<f64>,
    beta0: ArrayView1<f64>,
    p0: &Array2<f64>,
) -> JointMoments {
    let t_len = y.len();
    let k = h.ncols();
    assert_eq!(h.nrows(), t_len);

    // Cov(β_t, β_u) blocks, 0-indexed t,u meaning periods t+1, u+1.
    let state_cov = |t: usize, u: usize| -> Array2<f64> {
        let m = (t.min(u) + 1) as f64;
        p0 + &(q * m)
    };

    // Σ_yy and the state–observation cross blocks.
    let mut sigma_yy = Array2::<f64>::zeros((t_len, t_len));
    for t in 0..t_len {
        for u in 0..t_len {
            let c = state_cov(t, u);
            let ht = h.row(t);
            let hu = h.row(u);
            let mut v = 0.0;
            for a in 0..k {
                for b in 0..k {
                    v += ht[a] * c[[a, b]] * hu[b];
                }
            }
            if t == u {
                v += r;
            }
            sigma_yy[[t, u]] = v;
        }
    }
    let mean_y: Array1<f64> = (0..t_len).map(|t| h.row(t).dot(&beta0)).collect();

    // Cov(β_t, y_u) = Cov(β_t, β_u) H_u'.
    let cross = |t: usize, u: usize| -> Array1<f64> { state_cov(t, u).dot(&h.row(u)) };

    let condition = |t: usize, m: usize| -> (Array1<f64>, Array2<f64>) {
        // moments of β_{t+1} given y_1..y_m
        if m == 0 {
            return (beta0.to_owned(), state_cov(t, t));
        }
        let syy = sigma_yy.slice(s![..m, ..m]).to_owned();
        let syy_inv = gauss_jordan_inverse(&syy);
        let mut sby = Array2::<f64>::zeros((k, m));
        for u in 0..m {
            sby.column_mut(u).assign(&cross(t, u));
        }
        let resid: Array1<f64> = (0..m).map(|u| y[u] - mean_y[u]).collect();
        let gain = sby.dot(&syy_inv);
        let mean = &beta0.to_owned() + &gain.dot(&resid);
        let cov = state_cov(t, t) - gain.dot(&sby.t());
        (mean, cov)
    };

    let mut out = JointMoments {
        pred_mean: Vec::with_capacity(t_len),
        pred_cov: Vec::with_capacity(t_len),
        filt_mean: Vec::with_capacity(t_len),
        filt_cov: Vec::with_capacity(t_len),
        smooth_mean: Vec::with_capacity(t_len),
        smooth_cov: Vec::with_capacity(t_len),
    };
    for t in 0..t_len {
        let (pm, pc) = condition(t, t);
        out.pred_mean.push(pm);
        out.pred_cov.push(pc);
        let (fm, fc) = condition(t, t + 1);
        out.filt_mean.push(fm);
        out.filt_cov.push(fc);
        let (sm, sc) = condition(t, t_len);
        out.smooth_mean.push(sm);
        out.smooth_cov.push(sc);
    }
    out
}

/// Dense trend extraction: solve (I + λ D'D) τ = x where D is the
/// (n−2)×n second-difference matrix, using the Gauss–Jordan solver.
pub fn dense_trend_solve(x: &[f64], lambda: f64) -> Vec<f64> {
    let n = x.len();
    assert!(n >= 3);
    let mut d = Array2::<f64>::zeros((n - 2, n));
    for i in 0..n - 2 {
        d[[i, i]] = 1.0;
        d[[i, i + 1]] = -2.0;
        d[[i, i + 2]] = 1.0;
    }
    let mut a = d.t().dot(&d) * lambda;
    for i in 0..n {
        a[[i, i]] += 1.0;
    }
    let b = Array1::from(x.to_vec());
    gauss_jordan_solve(&a, &b).to_vec()
}

pub struct NormalEqFit {
    pub coef: Array1<f64>,
    pub fitted: Array1<f64>,
    pub rss: f64,
}

/// Textbook least squares through the normal equations:
/// (X'X)^{-1} X'y via the dense inverse.
pub fn normal_eq_ols(x: ArrayView2<f64>, y: ArrayView1<f64>) -> NormalEqFit {
    let xtx = x.t().dot(&x);
    let xty = x.t().dot(&y);
    let coef = gauss_jordan_inverse(&xtx).dot(&xty);
    let fitted = x.dot(&coef);
    let rss = y
        .iter()
        .zip(fitted.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    NormalEqFit { coef, fitted, rss }
}

/// Least squares subject to linear restrictions C β = 0, by the
/// standard projection of the unrestricted estimate:
/// β_r = β − (X'X)^{-1} C' [C (X'X)^{-1} C']^{-1} C β.
pub fn restricted_ls(x: ArrayView2<f64>, y: ArrayView1<f64>, c: &Array2<f64>) -> Array1<f64> {
    let xtx_inv = gauss_jordan_inverse(&x.t().dot(&x));
    let beta = xtx_inv.dot(&x.t().dot(&y));
    let middle = gauss_jordan_inverse(&c.dot(&xtx_inv).dot(&c.t()));
    &beta - &xtx_inv.dot(&c.t()).dot(&middle).dot(&c.dot(&beta))
}

/// One panel unit's data for the within-transform reference estimator.
pub struct WithinUnit {
    pub z: Vec<f64>,
    pub ds: Vec<f64>,
}

/// Fixed-effects slope by the within transform: demean each unit's
/// regressor and response around the unit means, then pool.
pub fn within_slope(units: &[WithinUnit]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for u in units {
        let n = u.z.len() as f64;
        let zbar = u.z.iter().sum::<f64>() / n;
        let dbar = u.ds.iter().sum::<f64>() / n;
        for (zv, dv) in u.z.iter().zip(&u.ds) {
            num += (zv - zbar) * (dv - dbar);
            den += (zv - zbar) * (zv - zbar);
        }
    }
    num / den
}

/// Per-unit intercepts implied by the within slope.
pub fn within_intercepts(units: &[WithinUnit], slope: f64) -> Vec<f64> {
    units
        .iter()
        .map(|u| {
            let n = u.z.len() as f64;
            let zbar = u.z.iter().sum::<f64>() / n;
            let dbar = u.ds.iter().sum::<f64>() / n;
            dbar - slope * zbar
        })
        .collect()
}

/// Bartlett-kernel long-run variance as an explicit double sum over
/// all pairs of demeaned observations within the bandwidth.
pub fn bartlett_lrv_double_sum(d: &[f64], bandwidth: usize) -> f64 {
    let n = d.len() as f64;
    let mean = d.iter().sum::<f64>() / n;
    let mut acc = 0.0;
    for s in 0..d.len() {
        for t in 0..d.len() {
            let lag = s.abs_diff(t);
            if lag <= bandwidth {
                let w = 1.0 - lag as f64 / (bandwidth as f64 + 1.0);
                acc += w * (d[s] - mean) * (d[t] - mean);
            }
        }
    }
    acc / n
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn sample_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Pearson correlation of two equal-length slices.
pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let ma = mean(a);
    let mb = mean(b);
    let mut num = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (x, y) in a.iter().zip(b) {
        num += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    num / (va.sqrt() * vb.sqrt())
}

/// Maximum absolute elementwise difference between two matrices.
pub fn max_abs_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    assert_eq!(a.dim(), b.dim());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Maximum absolute elementwise difference between two vectors.
pub fn max_abs_diff_vec(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
