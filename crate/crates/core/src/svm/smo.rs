use alloc::vec;
use alloc::vec::Vec;

use super::kernel::KernelCache;
use crate::dataset::Dataset;

const TAU: f64 = 1e-12;

/// Result of one SMO run on already-standardized rows.
#[derive(Debug, Clone)]
pub struct SmoSolution {
    pub alpha: Vec<f64>,
    /// Offset in `f(x) = sum_i a_i y_i K(x_i, x) - rho`.
    pub rho: f64,
    /// Gradient of `1/2 a'Qa - e'a` at the solution.
    pub gradient: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Dual objective after every update, when tracing is enabled.
    pub objective_trace: Vec<f64>,
    pub cache_hits: u64,
    pub cache_misses: u64,
}

impl SmoSolution {
    /// Dual objective `sum a - 1/2 a'Qa`, from the maintained gradient.
    pub fn objective(&self) -> f64 {
        objective_from_gradient(&self.alpha, &self.gradient)
    }

    /// Decision values `f(x_i)` on the training rows.
    pub fn training_decisions(&self, data: &Dataset) -> Vec<f64> {
        self.gradient
            .iter()
            .enumerate()
            .map(|(i, g)| data.label(i).sign() * (g + 1.0) - self.rho)
            .collect()
    }
}

fn objective_from_gradient(alpha: &[f64], grad: &[f64]) -> f64 {
    0.5 * alpha.iter().zip(grad).map(|(a, g)| a * (1.0 - g)).sum::<f64>()
}

/// Dual objective computed directly from a kernel function.
pub fn dual_objective(alpha: &[f64], data: &Dataset, kernel: impl Fn(&[f64], &[f64]) -> f64) -> f64 {
    let n = data.len();
    let mut quad = 0.0;
    for i in 0..n {
        if alpha[i] == 0.0 {
            continue;
        }
        for j in 0..n {
            if alpha[j] == 0.0 {
                continue;
            }
            quad += alpha[i] * alpha[j] * data.label(i).sign() * data.label(j).sign() * kernel(data.row(i), data.row(j));
        }
    }
    alpha.iter().sum::<f64>() - 0.5 * quad
}

/// SMO with the maximal-violating-pair working set.
#[derive(Debug, Clone, Copy)]
pub struct SmoSolver {
    pub c: f64,
    pub gamma: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub cache_rows: usize,
    pub trace_objective: bool,
}

impl SmoSolver {
    pub fn solve(&self, data: &Dataset) -> SmoSolution {
        let n = data.len();
        let c = self.c;
        let y: Vec<f64> = data.labels().iter().map(|l| l.sign()).collect();
        let mut alpha = vec![0.0; n];
        let mut grad = vec![-1.0; n];
        let mut cache = KernelCache::new(data, self.gamma, self.cache_rows);
        let mut trace = Vec::new();
        let mut iterations = 0;
        let mut converged = false;

        let in_up = |a: f64, y: f64| (y > 0.0 && a < c) || (y < 0.0 && a > 0.0);
        let in_low = |a: f64, y: f64| (y > 0.0 && a > 0.0) || (y < 0.0 && a < c);
        // Set membership only changes for the pair just updated.
        let mut up: Vec<bool> = y.iter().map(|&yt| in_up(0.0, yt)).collect();
        let mut low: Vec<bool> = y.iter().map(|&yt| in_low(0.0, yt)).collect();

        while iterations < self.max_iter {
            // i maximizes -y G over I_up, j minimizes it over I_low.
            let mut g_max = f64::NEG_INFINITY;
            let mut g_min = f64::INFINITY;
            let mut i = usize::MAX;
            let mut j = usize::MAX;
            for (t, (((&yt, &gt), &is_up), &is_low)) in y.iter().zip(&grad).zip(&up).zip(&low).enumerate() {
                let v = -yt * gt;
                if is_up && v > g_max {
                    g_max = v;
                    i = t;
                }
                if is_low && v < g_min {
                    g_min = v;
                    j = t;
                }
            }
            if i == usize::MAX || j == usize::MAX || g_max - g_min < self.tol {
                converged = true;
                break;
            }
            iterations += 1;

            let (ki, kj) = cache.pair(i, j);
            let kij = ki[j];
            let (old_ai, old_aj) = (alpha[i], alpha[j]);
            // RBF diagonal is 1.
            if y[i] != y[j] {
                let mut quad = 2.0 + 2.0 * kij;
                if quad <= 0.0 {
                    quad = TAU;
                }
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
                if diff > 0.0 {
                    if alpha[i] > c {
                        alpha[i] = c;
                        alpha[j] = c - diff;
                    }
                } else if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = c + diff;
                }
            } else {
                let mut quad = 2.0 - 2.0 * kij;
                if quad <= 0.0 {
                    quad = TAU;
                }
                let delta = (grad[i] - grad[j]) / quad;
                let sum = alpha[i] + alpha[j];
                alpha[i] -= delta;
                alpha[j] += delta;
                if sum > c {
                    if alpha[i] > c {
                        alpha[i] = c;
                        alpha[j] = sum - c;
                    }
                } else if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = sum;
                }
                if sum > c {
                    if alpha[j] > c {
                        alpha[j] = c;
                        alpha[i] = sum - c;
                    }
                } else if alpha[i] < 0.0 {
                    alpha[i] = 0.0;
                    alpha[j] = sum;
                }
            }

            let (si, sj) = (y[i] * (alpha[i] - old_ai), y[j] * (alpha[j] - old_aj));
            for ((g, &yt), (&kit, &kjt)) in grad.iter_mut().zip(&y).zip(ki.iter().zip(kj)) {
                *g += yt * (si * kit + sj * kjt);
            }
            for t in [i, j] {
                up[t] = in_up(alpha[t], y[t]);
                low[t] = in_low(alpha[t], y[t]);
            }
            if self.trace_objective {
                trace.push(objective_from_gradient(&alpha, &grad));
            }
        }

        let rho = compute_rho(&alpha, &grad, &y, c);
        SmoSolution {
            alpha,
            rho,
            gradient: grad,
            iterations,
            converged,
            objective_trace: trace,
            cache_hits: cache.hits(),
            cache_misses: cache.misses(),
        }
    }
}

/// Average `y G` over free multipliers, or the midpoint of the feasible
/// interval when every multiplier sits at a bound.
fn compute_rho(alpha: &[f64], grad: &[f64], y: &[f64], c: f64) -> f64 {
    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    let mut free = 0usize;
    let mut sum_free = 0.0;
    for t in 0..alpha.len() {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            sum_free += yg;
        }
    }
    if free > 0 {
        sum_free / free as f64
    } else {
        (ub + lb) / 2.0
    }
}
