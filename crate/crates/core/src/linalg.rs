//! Dense helpers for the small symmetric systems this crate solves
//! (state dimensions stay below ten, factor panels below a few dozen).
//! Everything is written against `ndarray` directly; no external
//! LAPACK backend is linked.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

/// Relative pivot tolerance: pivots within `REL_TOL * max |diag|` of zero
/// are treated as exactly zero (semidefinite direction).
const REL_TOL: f64 = 1e-12;

/// Escalating diagonal loading applied when a factorization target is
/// numerically indefinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JitterPolicy {
    /// Base loading as a fraction of the mean diagonal.
    pub scale: f64,
    /// Attempts after the initial try; each multiplies the loading by
    /// `escalation`.
    pub max_attempts: u32,
    pub escalation: f64,
}

impl Default for JitterPolicy {
    fn default() -> Self {
        JitterPolicy {
            scale: 1e-12,
            max_attempts: 3,
            escalation: 10.0,
        }
    }
}

/// Lower Cholesky factor of a symmetric positive *semi*definite matrix.
/// Zero pivots produce zero columns, so singular but consistent systems
/// stay solvable. Returns the offending pivot value when the matrix is
/// indefinite beyond tolerance.
pub fn cholesky_psd(a: ArrayView2<f64>) -> Result<Array2<f64>, f64> {
    let n = a.nrows();
    debug_assert_eq!(n, a.ncols());
    let scale = (0..n).map(|i| a[[i, i]].abs()).fold(0.0_f64, f64::max);
    let tol = REL_TOL * scale;
    let mut l = Array2::<f64>::zeros((n, n));
    for j in 0..n {
        let mut d = a[[j, j]];
        for m in 0..j {
            d -= l[[j, m]] * l[[j, m]];
        }
        if d > tol {
            let root = d.sqrt();
            l[[j, j]] = root;
            for i in (j + 1)..n {
                let mut v = a[[i, j]];
                for m in 0..j {
                    v -= l[[i, m]] * l[[j, m]];
                }
                l[[i, j]] = v / root;
            }
        } else if d >= -tol {
            // Semidefinite direction: leave the column zero.
        } else {
            return Err(d);
        }
    }
    Ok(l)
}

/// Strict Cholesky: like [`cholesky_psd`] but rejects zero pivots too.
pub fn cholesky_pd(a: ArrayView2<f64>) -> Option<Array2<f64>> {
    let l = cholesky_psd(a).ok()?;
    if (0..l.nrows()).all(|i| l[[i, i]] > 0.0) {
        Some(l)
    } else {
        None
    }
}

/// Cholesky with escalating diagonal loading on indefiniteness.
/// Returns the factor and the number of loading attempts consumed.
pub fn cholesky_jittered(
    a: &Array2<f64>,
    policy: &JitterPolicy,
) -> Result<(Array2<f64>, u32), u32> {
    if let Ok(l) = cholesky_psd(a.view()) {
        return Ok((l, 0));
    }
    let n = a.nrows();
    let trace: f64 = (0..n).map(|i| a[[i, i]]).sum();
    let base = policy.scale * trace / n as f64;
    let mut work = a.clone();
    let mut added = 0.0;
    for attempt in 1..=policy.max_attempts {
        let load = base * policy.escalation.powi(attempt as i32 - 1);
        let delta = load - added;
        for i in 0..n {
            work[[i, i]] += delta;
        }
        added = load;
        if let Ok(l) = cholesky_psd(work.view()) {
            return Ok((l, attempt));
        }
    }
    Err(policy.max_attempts)
}

/// True when every entry of `a` is negligible against `ref_scale`.
/// Used to collapse the rounding dust left by subtracting nearly-equal
/// covariances into an exact zero matrix.
pub fn is_negligible(a: &Array2<f64>, ref_scale: f64) -> bool {
    a.iter().all(|&v| v.abs() <= REL_TOL * ref_scale)
}

/// Forward substitution `L x = b` where zero pivots force the
/// corresponding solution component to zero (minimum-norm on the
/// factor's range; exact for consistent semidefinite systems).
pub fn solve_lower_psd(l: &Array2<f64>, b: ArrayView1<f64>) -> Array1<f64> {
    let n = l.nrows();
    let mut x = Array1::<f64>::zeros(n);
    for i in 0..n {
        if l[[i, i]] == 0.0 {
            continue;
        }
        let mut v = b[i];
        for j in 0..i {
            v -= l[[i, j]] * x[j];
        }
        x[i] = v / l[[i, i]];
    }
    x
}

/// Backward substitution `L' x = b` with the same zero-pivot rule.
pub fn solve_lower_transpose_psd(l: &Array2<f64>, b: ArrayView1<f64>) -> Array1<f64> {
    let n = l.nrows();
    let mut x = Array1::<f64>::zeros(n);
    for i in (0..n).rev() {
        if l[[i, i]] == 0.0 {
            continue;
        }
        let mut v = b[i];
        for j in (i + 1)..n {
            v -= l[[j, i]] * x[j];
        }
        x[i] = v / l[[i, i]];
    }
    x
}

/// Solve `A x = b` from a precomputed PSD Cholesky factor of `A`.
pub fn solve_from_chol(l: &Array2<f64>, b: ArrayView1<f64>) -> Array1<f64> {
    let y = solve_lower_psd(l, b);
    solve_lower_transpose_psd(l, y.view())
}

/// Column-wise [`solve_from_chol`] for a matrix right-hand side.
pub fn solve_matrix_from_chol(l: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
    let mut out = Array2::<f64>::zeros(b.raw_dim());
    for (j, col) in b.columns().into_iter().enumerate() {
        let x = solve_from_chol(l, col);
        out.column_mut(j).assign(&x);
    }
    out
}

/// Inverse of a symmetric positive definite matrix. `None` when the
/// matrix is singular or indefinite.
pub fn inv_spd(a: ArrayView2<f64>) -> Option<Array2<f64>> {
    let n = a.nrows();
    let l = cholesky_pd(a)?;
    let mut inv = Array2::<f64>::zeros((n, n));
    for j in 0..n {
        let mut e = Array1::<f64>::zeros(n);
        e[j] = 1.0;
        let x = solve_from_chol(&l, e.view());
        inv.column_mut(j).assign(&x);
    }
    // The column-wise solves agree only to rounding; restore symmetry.
    symmetrize(&mut inv);
    Some(inv)
}

pub fn symmetrize(a: &mut Array2<f64>) {
    let n = a.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (a[[i, j]] + a[[j, i]]);
            a[[i, j]] = v;
            a[[j, i]] = v;
        }
    }
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns eigenvalues in descending order with matching eigenvector
/// columns. Intended for the small panels handled here (n ≤ a few dozen).
pub fn jacobi_eigh(a: ArrayView2<f64>) -> (Array1<f64>, Array2<f64>) {
    let n = a.nrows();
    let mut m = a.to_owned();
    symmetrize(&mut m);
    let mut v = Array2::<f64>::eye(n);
    let frob: f64 = m.iter().map(|x| x * x).sum::<f64>().sqrt();
    let stop = (1e-14 * frob).max(f64::MIN_POSITIVE);
    for _sweep in 0..64 {
        let off: f64 = {
            let mut s = 0.0;
            for i in 0..n {
                for j in (i + 1)..n {
                    s += m[[i, j]] * m[[i, j]];
                }
            }
            (2.0 * s).sqrt()
        };
        if off <= stop {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[[p, q]];
                if apq.abs() <= f64::MIN_POSITIVE {
                    continue;
                }
                let theta = (m[[q, q]] - m[[p, p]]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let app = m[[p, p]];
                let aqq = m[[q, q]];
                m[[p, p]] = c * c * app - 2.0 * s * c * apq + s * s * aqq;
                m[[q, q]] = s * s * app + 2.0 * s * c * apq + c * c * aqq;
                m[[p, q]] = 0.0;
                m[[q, p]] = 0.0;
                for i in 0..n {
                    if i == p || i == q {
                        continue;
                    }
                    let aip = m[[i, p]];
                    let aiq = m[[i, q]];
                    m[[i, p]] = c * aip - s * aiq;
                    m[[p, i]] = m[[i, p]];
                    m[[i, q]] = s * aip + c * aiq;
                    m[[q, i]] = m[[i, q]];
                }
                for i in 0..n {
                    let vip = v[[i, p]];
                    let viq = v[[i, q]];
                    v[[i, p]] = c * vip - s * viq;
                    v[[i, q]] = s * vip + c * viq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[[j, j]].partial_cmp(&m[[i, i]]).unwrap());
    let mut values = Array1::<f64>::zeros(n);
    let mut vectors = Array2::<f64>::zeros((n, n));
    for (slot, &i) in order.iter().enumerate() {
        values[slot] = m[[i, i]];
        vectors.column_mut(slot).assign(&v.column(i));
    }
    (values, vectors)
}

/// In-place pentadiagonal solve (banded Gaussian elimination without
/// pivoting; the symmetric positive definite systems built here are
/// safely factorable this way). Bands: `d` main (n), `u1`/`l1` first
/// super/sub (n-1), `u2`/`l2` second super/sub (n-2).
#[allow(clippy::too_many_arguments)]
pub fn solve_pentadiagonal(
    l2: Vec<f64>,
    mut l1: Vec<f64>,
    mut d: Vec<f64>,
    mut u1: Vec<f64>,
    u2: Vec<f64>,
    mut rhs: Vec<f64>,
) -> Option<Vec<f64>> {
    let n = d.len();
    if n == 0 {
        return Some(Vec::new());
    }
    debug_assert!(n < 2 || (u1.len() == n - 1 && l1.len() == n - 1));
    debug_assert!(n < 3 || (u2.len() == n - 2 && l2.len() == n - 2));
    for i in 0..n.saturating_sub(1) {
        if d[i] == 0.0 {
            return None;
        }
        let m1 = l1[i] / d[i];
        d[i + 1] -= m1 * u1[i];
        if i + 2 < n {
            u1[i + 1] -= m1 * u2[i];
        }
        rhs[i + 1] -= m1 * rhs[i];
        if i + 2 < n {
            let m2 = l2[i] / d[i];
            l1[i + 1] -= m2 * u1[i];
            d[i + 2] -= m2 * u2[i];
            rhs[i + 2] -= m2 * rhs[i];
        }
    }
    if d[n - 1] == 0.0 {
        return None;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = rhs[n - 1] / d[n - 1];
    if n >= 2 {
        x[n - 2] = (rhs[n - 2] - u1[n - 2] * x[n - 1]) / d[n - 2];
    }
    for i in (0..n.saturating_sub(2)).rev() {
        x[i] = (rhs[i] - u1[i] * x[i + 1] - u2[i] * x[i + 2]) / d[i];
    }
    Some(x)
}

/// `x' A y` for a symmetric `A`.
pub fn quad_form(x: ArrayView1<f64>, a: &Array2<f64>, y: ArrayView1<f64>) -> f64 {
    let n = x.len();
    let mut acc = 0.0;
    for i in 0..n {
        let mut row = 0.0;
        for j in 0..n {
            row += a[[i, j]] * y[j];
        }
        acc += x[i] * row;
    }
    acc
}
