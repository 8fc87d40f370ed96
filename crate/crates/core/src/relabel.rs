//! Geometric-difference relabeling and the supporting symmetric linear
//! algebra.
//!
//! The relabeling takes a quantum Gram matrix `K_Q` and a classical Gram
//! matrix `K_C` over the same rows and produces ±1 labels that favor the
//! quantum kernel: the labels are a median threshold of `z = sqrt(K_Q) v`,
//! where `v` is the top eigenvector of `sqrt(K_Q) K_C^{-1} sqrt(K_Q)`.
//! Everything is built on a cyclic Jacobi eigendecomposition so the crate
//! carries no external linear-algebra backend.

use ndarray::Array2;

use crate::error::{Error, Result};

/// Maximum number of Jacobi sweeps before giving up.
const MAX_SWEEPS: usize = 100;

/// Default relative regularization for Gram-matrix inversion.
pub const DEFAULT_LAMBDA_REL: f64 = 1e-10;

/// Full eigendecomposition of a real symmetric matrix.
///
/// Eigenvalues are sorted nonincreasing; `eigenvectors` holds the matching
/// eigenvectors as orthonormal columns.
#[derive(Debug, Clone)]
pub struct EigDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Array2<f64>,
}

fn check_square(a: &Array2<f64>) -> Result<usize> {
    let (r, c) = a.dim();
    if r != c {
        return Err(Error::DimMismatch {
            expected: r,
            got: c,
        });
    }
    Ok(r)
}

fn check_symmetric(a: &Array2<f64>) -> Result<usize> {
    let n = check_square(a)?;
    for i in 0..n {
        for j in (i + 1)..n {
            if (a[[i, j]] - a[[j, i]]).abs() > 1e-10 {
                return Err(Error::invalid(format!(
                    "matrix not symmetric: |a[{i},{j}] - a[{j},{i}]| = {:e}",
                    (a[[i, j]] - a[[j, i]]).abs()
                )));
            }
        }
    }
    Ok(n)
}

/// A reasonable off-diagonal exit tolerance for a given matrix scale.
pub fn default_eig_tol(a: &Array2<f64>) -> f64 {
    let fro = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    1e-12 * (1.0 + fro)
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Iterates row-cyclic Jacobi sweeps until the off-diagonal Frobenius norm
/// drops below `tol`. Fails on non-symmetric input (entries compared at
/// 1e-10) and when `MAX_SWEEPS` sweeps do not converge.
pub fn sym_eig(a: &Array2<f64>, tol: f64) -> Result<EigDecomposition> {
    let n = check_symmetric(a)?;
    if n == 0 {
        return Err(Error::invalid("empty matrix"));
    }

    // Work on flat row-major copies; only the upper triangle of `m` is
    // kept current. `vt` holds the eigenvector matrix transposed so that
    // rotations touch contiguous rows.
    let mut m: Vec<f64> = a.iter().copied().collect();
    let mut vt = vec![0.0f64; n * n];
    for i in 0..n {
        vt[i * n + i] = 1.0;
    }

    let off_norm = |m: &[f64]| -> f64 {
        let mut s = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                s += m[p * n + q] * m[p * n + q];
            }
        }
        s.sqrt()
    };

    let mut converged = false;
    for sweep in 0..MAX_SWEEPS {
        let off = off_norm(&m);
        if off < tol {
            converged = true;
            break;
        }
        // Skip threshold for the first sweeps, as in the classic cyclic
        // scheme; afterwards rotate every non-negligible element.
        let thresh = if sweep < 3 {
            0.2 * off * off / (n * n) as f64
        } else {
            0.0
        };

        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                let g = 100.0 * apq.abs();
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                // Element already negligible at machine precision.
                if sweep > 3 && app.abs() + g == app.abs() && aqq.abs() + g == aqq.abs() {
                    m[p * n + q] = 0.0;
                    continue;
                }
                if apq.abs() <= thresh || apq == 0.0 {
                    continue;
                }

                let theta = 0.5 * (aqq - app) / apq;
                let t = if theta.abs() + g == theta.abs() {
                    // Very large theta: 1/(2 theta) avoids overflow.
                    0.5 / theta
                } else {
                    let s = 1.0 / (theta.abs() + (theta * theta + 1.0).sqrt());
                    if theta < 0.0 {
                        -s
                    } else {
                        s
                    }
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);
                let h = t * apq;

                m[p * n + p] = app - h;
                m[q * n + q] = aqq + h;
                m[p * n + q] = 0.0;

                // Upper-triangle updates in three index ranges.
                for k in 0..p {
                    let akp = m[k * n + p];
                    let akq = m[k * n + q];
                    m[k * n + p] = akp - s * (akq + tau * akp);
                    m[k * n + q] = akq + s * (akp - tau * akq);
                }
                for k in (p + 1)..q {
                    let apk = m[p * n + k];
                    let akq = m[k * n + q];
                    m[p * n + k] = apk - s * (akq + tau * apk);
                    m[k * n + q] = akq + s * (apk - tau * akq);
                }
                for k in (q + 1)..n {
                    let apk = m[p * n + k];
                    let aqk = m[q * n + k];
                    m[p * n + k] = apk - s * (aqk + tau * apk);
                    m[q * n + k] = aqk + s * (apk - tau * aqk);
                }
                // Eigenvector accumulation on rows p, q of V^T.
                let (head, tail) = vt.split_at_mut(q * n);
                let row_p = &mut head[p * n..p * n + n];
                let row_q = &mut tail[..n];
                for k in 0..n {
                    let vp = row_p[k];
                    let vq = row_q[k];
                    row_p[k] = vp - s * (vq + tau * vp);
                    row_q[k] = vq + s * (vp - tau * vq);
                }
            }
        }
    }

    if !converged && off_norm(&m) >= tol {
        return Err(Error::Numerical(format!(
            "jacobi eigendecomposition did not converge in {MAX_SWEEPS} sweeps"
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        m[j * n + j]
            .partial_cmp(&m[i * n + i])
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    let eigenvalues: Vec<f64> = order.iter().map(|&i| m[i * n + i]).collect();
    let mut eigenvectors = Array2::<f64>::zeros((n, n));
    for (col, &src) in order.iter().enumerate() {
        for k in 0..n {
            eigenvectors[[k, col]] = vt[src * n + k];
        }
    }

    Ok(EigDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Symmetric matrix rebuilt as `V diag(f(lambda)) V^T`.
fn rebuild(eig: &EigDecomposition, f: impl Fn(f64) -> f64) -> Array2<f64> {
    let n = eig.eigenvalues.len();
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (col, &lam) in eig.eigenvalues.iter().enumerate() {
        let flam = f(lam);
        for k in 0..n {
            scaled[[k, col]] *= flam;
        }
    }
    scaled.dot(&v.t())
}

/// Principal square root of a PSD matrix.
///
/// Eigenvalues below `floor` are lifted to `floor`; negative round-off
/// eigenvalues are clamped to zero. An eigenvalue below -1e-8 is treated
/// as a genuinely indefinite input and rejected.
pub fn matrix_sqrt_psd(a: &Array2<f64>, floor: f64) -> Result<Array2<f64>> {
    let eig = sym_eig(a, default_eig_tol(a))?;
    if let Some(&min) = eig
        .eigenvalues
        .iter()
        .min_by(|x, y| x.partial_cmp(y).unwrap())
    {
        if min < -1e-8 {
            return Err(Error::Numerical(format!(
                "matrix_sqrt_psd: eigenvalue {min:e} below -1e-8"
            )));
        }
    }
    Ok(rebuild(&eig, |lam| lam.max(floor).max(0.0).sqrt()))
}

/// Spectrally regularized inverse `V diag(1/(lambda_i + lambda_rel*lambda_max)) V^T`.
pub fn regularized_inverse(a: &Array2<f64>, lambda_rel: f64) -> Result<Array2<f64>> {
    let eig = sym_eig(a, default_eig_tol(a))?;
    let lam_max = eig.eigenvalues[0];
    if lam_max <= 0.0 {
        return Err(Error::Numerical(
            "regularized_inverse: all eigenvalues <= 0".into(),
        ));
    }
    let reg = lambda_rel * lam_max;
    Ok(rebuild(&eig, |lam| 1.0 / (lam + reg)))
}

fn quad_form(a: &Array2<f64>, y: &[f64]) -> f64 {
    let n = y.len();
    let mut acc = 0.0;
    for i in 0..n {
        let mut row = 0.0;
        for j in 0..n {
            row += a[[i, j]] * y[j];
        }
        acc += y[i] * row;
    }
    acc
}

/// Geometric-difference objective `(y^T K_Q^{-1} y) / (y^T K_C^{-1} y)`.
///
/// Small values mean the labeling is easy for the quantum kernel relative
/// to the classical one; the relabeler drives this ratio down.
pub fn geometric_objective(kq: &Array2<f64>, kc: &Array2<f64>, y: &[f64]) -> Result<f64> {
    let n = check_square(kq)?;
    let nc = check_square(kc)?;
    if n != nc || n != y.len() {
        return Err(Error::DimMismatch {
            expected: n,
            got: y.len().max(nc),
        });
    }
    if y.iter().any(|&v| v != 1.0 && v != -1.0) {
        return Err(Error::invalid("labels must be +1 or -1"));
    }
    let kq_inv = regularized_inverse(kq, DEFAULT_LAMBDA_REL)?;
    let kc_inv = regularized_inverse(kc, DEFAULT_LAMBDA_REL)?;
    Ok(quad_form(&kq_inv, y) / quad_form(&kc_inv, y))
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Relabel rows to favor the quantum kernel.
///
/// Computes `M = sqrt(K_Q) K_C^{-1} sqrt(K_Q)` (symmetrized), takes the top
/// eigenvector `v`, forms `z = sqrt(K_Q) v`, and assigns +1 where
/// `z_i > median(z)`, -1 otherwise. The eigenvector sign is fixed so that
/// the largest-magnitude entry of `z` is positive.
pub fn geometric_relabel(kq: &Array2<f64>, kc: &Array2<f64>) -> Result<Vec<f64>> {
    let n = check_square(kq)?;
    if check_square(kc)? != n {
        return Err(Error::DimMismatch {
            expected: n,
            got: kc.nrows(),
        });
    }
    let sqrt_kq = matrix_sqrt_psd(kq, 0.0)?;
    let kc_inv = regularized_inverse(kc, DEFAULT_LAMBDA_REL)?;
    let m = sqrt_kq.dot(&kc_inv).dot(&sqrt_kq);
    let m_sym = 0.5 * (&m + &m.t());
    let eig = sym_eig(&m_sym, default_eig_tol(&m_sym))?;
    let v = eig.eigenvectors.column(0);
    let mut z: Vec<f64> = sqrt_kq.dot(&v).to_vec();

    // Sign gauge: make the largest-magnitude entry of z positive.
    let mut imax = 0;
    for (i, zi) in z.iter().enumerate() {
        if zi.abs() > z[imax].abs() {
            imax = i;
        }
    }
    if z[imax] < 0.0 {
        for zi in z.iter_mut() {
            *zi = -*zi;
        }
    }

    let med = median(&z);
    Ok(z.iter().map(|&zi| if zi > med { 1.0 } else { -1.0 }).collect())
}
