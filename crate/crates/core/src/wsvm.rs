//! Weighted soft-margin SVM dual solver.
//!
//! Solves `max_a sum(a) - 1/2 a^T Q a` subject to `sum_i y_i a_i = 0` and
//! `0 <= a_i <= C * gamma_i`, where `Q_ij = y_i y_j K_ij` and `gamma` are
//! coreset coverage weights. The solver is SMO with maximal-violating-pair
//! working-set selection; each accepted pair update solves the two-variable
//! subproblem exactly, so the dual objective never decreases.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qkernel::KernelMatrix;
use crate::relabel::{default_eig_tol, sym_eig};

/// Pair-update budget before the solver reports best-so-far.
pub const MAX_PAIR_UPDATES: usize = 1_000_000;

const TAU: f64 = 1e-12;

/// The weighted dual problem data.
#[derive(Debug, Clone)]
pub struct DualProblem {
    pub gram: Array2<f64>,
    /// Labels in {-1, +1}.
    pub labels: Vec<f64>,
    #[serde(rename = "C")]
    pub c: f64,
    /// Per-sample upper bounds C * gamma_i.
    pub caps: Vec<f64>,
}

impl DualProblem {
    /// Build from a raw Gram matrix. Coverage weights scale the box; unit
    /// weights reproduce a standard C-SVM. A Gram matrix whose smallest
    /// eigenvalue is below -1e-8 gets a diagonal jitter of
    /// 1e-8 * max(diag).
    pub fn new(
        gram: Array2<f64>,
        labels: Vec<f64>,
        c: f64,
        weights: Option<&[u64]>,
    ) -> Result<Self> {
        let n = gram.nrows();
        if gram.ncols() != n {
            return Err(Error::DimMismatch {
                expected: n,
                got: gram.ncols(),
            });
        }
        if labels.len() != n {
            return Err(Error::DimMismatch {
                expected: n,
                got: labels.len(),
            });
        }
        if labels.iter().any(|&y| y != 1.0 && y != -1.0) {
            return Err(Error::invalid("labels must be exactly +1 or -1"));
        }
        if !(c > 0.0) {
            return Err(Error::invalid(format!("C = {c} must be positive")));
        }
        let caps: Vec<f64> = match weights {
            Some(w) => {
                if w.len() != n {
                    return Err(Error::DimMismatch {
                        expected: n,
                        got: w.len(),
                    });
                }
                w.iter().map(|&g| c * g as f64).collect()
            }
            None => vec![c; n],
        };

        let mut gram = gram;
        let eig = sym_eig(&gram, default_eig_tol(&gram))?;
        let min = *eig.eigenvalues.last().expect("nonempty spectrum");
        if min < -1e-8 {
            let max_diag = (0..n).map(|i| gram[[i, i]]).fold(0.0f64, f64::max);
            let jitter = 1e-8 * max_diag.max(1.0);
            for i in 0..n {
                gram[[i, i]] += jitter;
            }
        }
        Ok(DualProblem {
            gram,
            labels,
            c,
            caps,
        })
    }

    pub fn from_kernel(
        km: &KernelMatrix,
        labels: Vec<f64>,
        c: f64,
        weights: Option<&[u64]>,
    ) -> Result<Self> {
        DualProblem::new(km.entries.clone(), labels, c, weights)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    fn q(&self, i: usize, j: usize) -> f64 {
        self.labels[i] * self.labels[j] * self.gram[[i, j]]
    }

    /// Dual objective sum(a) - 1/2 a^T Q a.
    pub fn objective(&self, alpha: &[f64]) -> f64 {
        let n = self.len();
        let mut quad = 0.0;
        for i in 0..n {
            if alpha[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                quad += alpha[i] * alpha[j] * self.q(i, j);
            }
        }
        alpha.iter().sum::<f64>() - 0.5 * quad
    }
}

/// A trained weighted-SVM model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SvmModel {
    pub alpha: Vec<f64>,
    #[serde(rename = "b")]
    pub bias: f64,
    /// Indices with alpha_i > 1e-8.
    pub support_indices: Vec<usize>,
    pub labels: Vec<f64>,
    #[serde(rename = "C")]
    pub c: f64,
    pub caps: Vec<f64>,
    pub dual_objective: f64,
    pub pair_updates: usize,
    /// Set when the iteration cap was hit before reaching tolerance.
    pub violation_flag: bool,
    /// Optional reference to the kernel cache entry used for training.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel_ref: Option<String>,
}

/// Solve the weighted dual with SMO; `tol` bounds the final KKT violation.
pub fn solve_weighted_dual(p: &DualProblem, tol: f64) -> Result<SvmModel> {
    solve_impl(p, tol, &mut |_| {})
}

/// Test hook: reports the objective after every accepted pair update.
#[cfg(test)]
pub(crate) fn solve_traced(p: &DualProblem, tol: f64) -> Result<(SvmModel, Vec<f64>)> {
    let mut trace = Vec::new();
    let model = solve_impl(p, tol, &mut |obj| trace.push(obj))?;
    Ok((model, trace))
}

fn solve_impl(p: &DualProblem, tol: f64, on_update: &mut dyn FnMut(f64)) -> Result<SvmModel> {
    let n = p.len();
    if n == 0 {
        return Err(Error::invalid("empty problem"));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let has_pos = p.labels.iter().any(|&y| y > 0.0);
    let has_neg = p.labels.iter().any(|&y| y < 0.0);
    if !has_pos || !has_neg {
        return Err(Error::invalid(
            "dual problem needs at least one sample of each sign",
        ));
    }

    let mut alpha = vec![0.0f64; n];
    // Gradient of the minimization form 1/2 a^T Q a - sum(a); at a = 0 it
    // is -1 everywhere.
    let mut grad = vec![-1.0f64; n];
    let mut updates = 0usize;
    let mut converged = false;

    while updates < MAX_PAIR_UPDATES {
        // Maximal violating pair.
        let mut i_best: Option<(usize, f64)> = None;
        let mut j_best: Option<(usize, f64)> = None;
        for t in 0..n {
            let score = -p.labels[t] * grad[t];
            let up = (p.labels[t] > 0.0 && alpha[t] < p.caps[t])
                || (p.labels[t] < 0.0 && alpha[t] > 0.0);
            let low = (p.labels[t] < 0.0 && alpha[t] < p.caps[t])
                || (p.labels[t] > 0.0 && alpha[t] > 0.0);
            if up && i_best.map_or(true, |(_, s)| score > s) {
                i_best = Some((t, score));
            }
            if low && j_best.map_or(true, |(_, s)| score < s) {
                j_best = Some((t, score));
            }
        }
        let ((i, m_up), (j, m_low)) = match (i_best, j_best) {
            (Some(a), Some(b)) => (a, b),
            _ => {
                converged = true;
                break;
            }
        };
        if m_up - m_low <= tol {
            converged = true;
            break;
        }

        // Exact two-variable solve with box clipping, per-sample caps.
        let (ci, cj) = (p.caps[i], p.caps[j]);
        let old_i = alpha[i];
        let old_j = alpha[j];
        if p.labels[i] != p.labels[j] {
            // Curvature along the feasible line: Q_ii + Q_jj + 2 Q_ij with
            // Q_ij = y_i y_j K_ij = -K_ij here.
            let quad = (p.gram[[i, i]] + p.gram[[j, j]] - 2.0 * p.gram[[i, j]]).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > ci - cj {
                if alpha[i] > ci {
                    alpha[i] = ci;
                    alpha[j] = ci - diff;
                }
            } else if alpha[j] > cj {
                alpha[j] = cj;
                alpha[i] = cj + diff;
            }
        } else {
            let quad = (p.gram[[i, i]] + p.gram[[j, j]] - 2.0 * p.gram[[i, j]]).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > ci {
                if alpha[i] > ci {
                    alpha[i] = ci;
                    alpha[j] = sum - ci;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > cj {
                if alpha[j] > cj {
                    alpha[j] = cj;
                    alpha[i] = sum - cj;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        let d_i = alpha[i] - old_i;
        let d_j = alpha[j] - old_j;
        if d_i == 0.0 && d_j == 0.0 {
            // The violating pair cannot move at f64 resolution; stop
            // rather than spin.
            converged = true;
            break;
        }
        for t in 0..n {
            grad[t] += p.q(t, i) * d_i + p.q(t, j) * d_j;
        }
        updates += 1;
        on_update(p.objective(&alpha));
    }

    let bias = compute_bias(p, &alpha);
    let support_indices: Vec<usize> = (0..n).filter(|&i| alpha[i] > 1e-8).collect();
    Ok(SvmModel {
        dual_objective: p.objective(&alpha),
        alpha,
        bias,
        support_indices,
        labels: p.labels.clone(),
        c: p.c,
        caps: p.caps.clone(),
        pair_updates: updates,
        violation_flag: !converged,
        kernel_ref: None,
    })
}

/// Bias from free support vectors, falling back to the midpoint of the
/// KKT-feasible interval, then to zero for fully degenerate boxes.
fn compute_bias(p: &DualProblem, alpha: &[f64]) -> f64 {
    let n = p.len();
    let u: Vec<f64> = (0..n)
        .map(|k| {
            (0..n)
                .map(|j| alpha[j] * p.labels[j] * p.gram[[k, j]])
                .sum::<f64>()
        })
        .collect();

    let free_eps = 1e-8;
    let mut free_sum = 0.0;
    let mut free_count = 0usize;
    for k in 0..n {
        if p.caps[k] > free_eps && alpha[k] > free_eps && alpha[k] < p.caps[k] - free_eps {
            free_sum += p.labels[k] - u[k];
            free_count += 1;
        }
    }
    if free_count > 0 {
        return free_sum / free_count as f64;
    }

    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for k in 0..n {
        if p.caps[k] <= free_eps {
            continue; // box is a point; no KKT constraint on b
        }
        let at_lower = alpha[k] <= free_eps;
        let at_upper = alpha[k] >= p.caps[k] - free_eps;
        if at_lower {
            if p.labels[k] > 0.0 {
                lo = lo.max(1.0 - u[k]);
            } else {
                hi = hi.min(-1.0 - u[k]);
            }
        } else if at_upper {
            if p.labels[k] > 0.0 {
                hi = hi.min(1.0 - u[k]);
            } else {
                lo = lo.max(-1.0 - u[k]);
            }
        }
    }
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => 0.5 * (lo + hi),
        (true, false) => lo,
        (false, true) => hi,
        (false, false) => 0.0,
    }
}

/// sum_i alpha_i y_i K(x, x_i) + b for a precomputed kernel row.
pub fn decision_function(m: &SvmModel, kernel_row: &[f64]) -> Result<f64> {
    if kernel_row.len() != m.alpha.len() {
        return Err(Error::DimMismatch {
            expected: m.alpha.len(),
            got: kernel_row.len(),
        });
    }
    let mut acc = m.bias;
    for i in 0..m.alpha.len() {
        if m.alpha[i] != 0.0 {
            acc += m.alpha[i] * m.labels[i] * kernel_row[i];
        }
    }
    Ok(acc)
}

/// Signed prediction per row; a decision value of exactly zero goes to +1.
pub fn predict(m: &SvmModel, rows: &[Vec<f64>]) -> Result<Vec<f64>> {
    rows.iter()
        .map(|r| decision_function(m, r).map(|v| if v >= 0.0 { 1.0 } else { -1.0 }))
        .collect()
}

/// Per-sample KKT residuals of a trained model against its problem.
#[derive(Debug, Clone, Serialize)]
pub struct KktReport {
    pub per_sample: Vec<f64>,
    pub max_violation: f64,
    pub equality_residual: f64,
}

pub fn kkt_report(m: &SvmModel, p: &DualProblem) -> KktReport {
    let n = p.len();
    let eps = 1e-8;
    let mut per_sample = Vec::with_capacity(n);
    for k in 0..n {
        let fk: f64 = (0..n)
            .map(|j| m.alpha[j] * p.labels[j] * p.gram[[k, j]])
            .sum::<f64>()
            + m.bias;
        let margin = p.labels[k] * fk;
        let residual = if p.caps[k] <= eps {
            0.0 // variable fixed by a zero-width box
        } else if m.alpha[k] <= eps {
            (1.0 - margin).max(0.0)
        } else if m.alpha[k] >= p.caps[k] - eps {
            (margin - 1.0).max(0.0)
        } else {
            (margin - 1.0).abs()
        };
        per_sample.push(residual);
    }
    let equality_residual = m
        .alpha
        .iter()
        .zip(p.labels.iter())
        .map(|(a, y)| a * y)
        .sum::<f64>()
        .abs();
    let max_violation = per_sample.iter().copied().fold(0.0, f64::max);
    KktReport {
        per_sample,
        max_violation,
        equality_residual,
    }
}

/// One-vs-rest multi-class wrapper: one binary machine per class over a
/// shared Gram matrix; prediction is the argmax decision value.
#[derive(Debug, Clone)]
pub struct MultiSvm {
    pub machines: Vec<SvmModel>,
}

pub fn train_one_vs_rest(
    gram: &Array2<f64>,
    labels: &[usize],
    n_classes: usize,
    c: f64,
    weights: Option<&[u64]>,
    tol: f64,
) -> Result<MultiSvm> {
    let mut machines = Vec::with_capacity(n_classes);
    for class in 0..n_classes {
        let binary: Vec<f64> = labels
            .iter()
            .map(|&l| if l == class { 1.0 } else { -1.0 })
            .collect();
        let problem = DualProblem::new(gram.clone(), binary, c, weights)?;
        machines.push(solve_weighted_dual(&problem, tol)?);
    }
    Ok(MultiSvm { machines })
}

impl MultiSvm {
    /// Argmax head over shared kernel rows.
    pub fn predict(&self, kernel_row: &[f64]) -> Result<usize> {
        let mut best = 0usize;
        let mut best_val = f64::NEG_INFINITY;
        for (c, m) in self.machines.iter().enumerate() {
            let v = decision_function(m, kernel_row)?;
            if v > best_val {
                best_val = v;
                best = c;
            }
        }
        Ok(best)
    }
}
