//! Small dense and banded direct solvers plus BiCGSTAB.
//!
//! Kernel interpolation systems are dense, symmetric positive definite, and
//! tiny (tens of unknowns), so an unblocked Cholesky with one step of
//! iterative refinement is enough. The finite-difference systems are large
//! and indefinite when the coefficient changes sign; they get BiCGSTAB with
//! a banded-LU direct fallback.

use crate::math;
use crate::{invalid, Error, Result};
use alloc::vec;
use alloc::vec::Vec;

/// Outcome of a symmetric positive-definite solve.
pub struct SpdSolution {
    pub x: Vec<f64>,
    /// Diagonal jitter that had to be added for the factorization to
    /// succeed; `0.0` when none was needed.
    pub jitter: f64,
    /// Rough condition estimate from the Cholesky diagonal.
    pub condition_estimate: f64,
}

/// Solves `A x = b` for dense SPD `A` (row-major, `n × n`) by Cholesky.
///
/// If the factorization hits a non-positive pivot, a jitter of
/// `1e-10 · max(diag)` is added to the diagonal and the factorization is
/// retried once. One iterative-refinement step tightens the residual of
/// ill-conditioned kernel systems.
pub fn solve_spd(a: &[f64], n: usize, b: &[f64]) -> Result<SpdSolution> {
    assert_eq!(a.len(), n * n);
    assert_eq!(b.len(), n);
    let scale = (0..n).fold(0.0f64, |m, i| m.max(math::abs(a[i * n + i])));
    let mut jitter = 0.0;
    let factor = loop {
        match cholesky(a, n, jitter) {
            Some(l) => break l,
            None if jitter == 0.0 => jitter = 1e-10 * scale.max(1.0),
            None => {
                return Err(Error::FitFailure {
                    condition_estimate: f64::INFINITY,
                })
            }
        }
    };
    let mut dmin = f64::INFINITY;
    let mut dmax = 0.0f64;
    for i in 0..n {
        let d = factor[i * n + i];
        dmin = dmin.min(d);
        dmax = dmax.max(d);
    }
    let condition_estimate = (dmax / dmin) * (dmax / dmin);

    let mut x = cholesky_solve(&factor, n, b);
    // one refinement step in working precision
    let mut r = b.to_vec();
    for i in 0..n {
        for j in 0..n {
            r[i] -= a[i * n + j] * x[j];
        }
        r[i] -= jitter * x[i];
    }
    let dx = cholesky_solve(&factor, n, &r);
    for i in 0..n {
        x[i] += dx[i];
    }
    Ok(SpdSolution {
        x,
        jitter,
        condition_estimate,
    })
}

/// Lower-triangular Cholesky factor of `A + jitter·I`, or `None` when a
/// pivot is not strictly positive.
fn cholesky(a: &[f64], n: usize, jitter: f64) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            if i == j {
                s += jitter;
            }
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if s <= 0.0 || !s.is_finite() {
                    return None;
                }
                l[i * n + i] = math::sqrt(s);
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Some(l)
}

fn cholesky_solve(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * n + k] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l[k * n + i] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
    x
}

/// Banded LU factorization with partial pivoting (LAPACK `gbtrf` layout).
///
/// Holds `kl` sub- and `kl` superdiagonals plus `kl` extra rows of
/// workspace for pivot fill, so `ldab = 3·kl + 1`.
pub struct BandedLu {
    n: usize,
    kl: usize,
    ldab: usize,
    ab: Vec<f64>,
    piv: Vec<usize>,
}

impl BandedLu {
    /// Builds the band matrix from `(row, col, coeff)` triples and factorizes.
    ///
    /// All entries must satisfy `|row − col| ≤ kl`.
    pub fn factor(n: usize, kl: usize, entries: &[(usize, usize, f64)]) -> Result<Self> {
        let ku = kl;
        let ldab = 2 * kl + ku + 1;
        let mut ab = vec![0.0; ldab * n];
        for &(i, j, v) in entries {
            debug_assert!(i < n && j < n);
            let d = i as isize - j as isize;
            assert!(
                d.unsigned_abs() <= kl,
                "entry ({i},{j}) outside bandwidth {kl}"
            );
            let r = (kl + ku) as isize + d;
            ab[j * ldab + r as usize] += v;
        }
        let mut piv = vec![0usize; n];
        let mut ju = 0usize;
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            // pivot search in column j, rows j..=j+km
            let mut jp = 0;
            let mut pmax = 0.0f64;
            for i in 0..=km {
                let v = math::abs(ab[j * ldab + kl + ku + i]);
                if v > pmax {
                    pmax = v;
                    jp = i;
                }
            }
            piv[j] = j + jp;
            if pmax == 0.0 || !pmax.is_finite() {
                return Err(Error::SolverFailure {
                    residual: f64::INFINITY,
                    iterations: 0,
                    best: Vec::new(),
                });
            }
            ju = ju.max((j + kl + ku).min(n - 1));
            if jp != 0 {
                // swap rows j and j+jp over columns j..=ju
                for c in j..=ju {
                    let r1 = (kl + ku + j) as isize - c as isize;
                    let r2 = r1 + jp as isize;
                    debug_assert!(r1 >= 0 && (r2 as usize) < ldab);
                    ab.swap(c * ldab + r1 as usize, c * ldab + r2 as usize);
                }
            }
            if km > 0 {
                let pivot = ab[j * ldab + kl + ku];
                for i in 1..=km {
                    ab[j * ldab + kl + ku + i] /= pivot;
                }
                for c in j + 1..=ju {
                    let off = (kl + ku + j) as isize - c as isize;
                    let t = ab[c * ldab + off as usize];
                    if t != 0.0 {
                        for i in 1..=km {
                            ab[c * ldab + (off as usize) + i] -=
                                ab[j * ldab + kl + ku + i] * t;
                        }
                    }
                }
            }
        }
        Ok(Self {
            n,
            kl,
            ldab,
            ab,
            piv,
        })
    }

    /// Solves `A x = b` using the stored factorization.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let (n, kl, ldab) = (self.n, self.kl, self.ldab);
        let ku = kl;
        let mut x = b.to_vec();
        for j in 0..n {
            let p = self.piv[j];
            if p != j {
                x.swap(j, p);
            }
            let km = kl.min(n - 1 - j);
            for i in 1..=km {
                x[j + i] -= self.ab[j * ldab + kl + ku + i] * x[j];
            }
        }
        for j in (0..n).rev() {
            x[j] /= self.ab[j * ldab + kl + ku];
            let lo = j.saturating_sub(kl + ku);
            for i in lo..j {
                // element U(i, j) sits at row kl+ku+i-j of column j
                x[i] -= self.ab[j * ldab + kl + ku + i - j] * x[j];
            }
        }
        x
    }
}

/// Sparse matrix-vector product over `(row, col, coeff)` triples.
pub fn spmv(dim: usize, entries: &[(usize, usize, f64)], x: &[f64], out: &mut [f64]) {
    debug_assert_eq!(x.len(), dim);
    debug_assert_eq!(out.len(), dim);
    out.fill(0.0);
    for &(i, j, v) in entries {
        out[i] += v * x[j];
    }
}

pub fn norm2(v: &[f64]) -> f64 {
    math::sqrt(v.iter().map(|x| x * x).sum())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Result of a BiCGSTAB run.
pub struct KrylovOutcome {
    pub x: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Unpreconditioned BiCGSTAB on the triplet matrix, starting from zero.
///
/// Stops when the residual 2-norm drops below `tol_abs`, on breakdown, at
/// `max_iter`, or after 1000 iterations without improving the best residual
/// (stagnation). Always returns the best iterate seen.
pub fn bicgstab(
    dim: usize,
    entries: &[(usize, usize, f64)],
    rhs: &[f64],
    tol_abs: f64,
    max_iter: usize,
) -> KrylovOutcome {
    let mut x = vec![0.0; dim];
    let mut r = rhs.to_vec();
    let rnorm0 = norm2(&r);
    if rnorm0 <= tol_abs {
        return KrylovOutcome {
            x,
            residual: rnorm0,
            iterations: 0,
            converged: true,
        };
    }
    let rhat = r.clone();
    let mut rho = 1.0f64;
    let mut alpha = 1.0f64;
    let mut omega = 1.0f64;
    let mut v = vec![0.0; dim];
    let mut p = vec![0.0; dim];
    let mut s = vec![0.0; dim];
    let mut t = vec![0.0; dim];

    let mut best_x = x.clone();
    let mut best_res = rnorm0;
    let mut since_best = 0usize;
    let mut iterations = 0usize;

    for it in 1..=max_iter {
        iterations = it;
        let rho_next = dot(&rhat, &r);
        if math::abs(rho_next) < 1e-300 {
            break; // breakdown
        }
        let beta = (rho_next / rho) * (alpha / omega);
        rho = rho_next;
        for i in 0..dim {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        spmv(dim, entries, &p, &mut v);
        let denom = dot(&rhat, &v);
        if math::abs(denom) < 1e-300 {
            break;
        }
        alpha = rho / denom;
        for i in 0..dim {
            s[i] = r[i] - alpha * v[i];
        }
        let snorm = norm2(&s);
        if snorm <= tol_abs {
            for i in 0..dim {
                x[i] += alpha * p[i];
            }
            return KrylovOutcome {
                x,
                residual: snorm,
                iterations: it,
                converged: true,
            };
        }
        spmv(dim, entries, &s, &mut t);
        let tt = dot(&t, &t);
        if tt < 1e-300 {
            break;
        }
        omega = dot(&t, &s) / tt;
        if math::abs(omega) < 1e-300 {
            break;
        }
        for i in 0..dim {
            x[i] += alpha * p[i] + omega * s[i];
            r[i] = s[i] - omega * t[i];
        }
        let rnorm = norm2(&r);
        if rnorm < best_res {
            best_res = rnorm;
            best_x.copy_from_slice(&x);
            since_best = 0;
        } else {
            since_best += 1;
        }
        if rnorm <= tol_abs {
            return KrylovOutcome {
                x,
                residual: rnorm,
                iterations: it,
                converged: true,
            };
        }
        if since_best >= 1000 {
            break; // stagnated
        }
        if !rnorm.is_finite() {
            break;
        }
    }
    KrylovOutcome {
        x: best_x,
        residual: best_res,
        iterations,
        converged: false,
    }
}
