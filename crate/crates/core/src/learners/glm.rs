//! Weighted least squares and IRLS logistic regression on dense designs.
//!
//! Designs passed in here already include the intercept column.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Outcome of a linear solve: coefficients plus a flag for designs that were
/// not full rank (solved by minimum-norm pseudoinverse instead).
pub struct LinearFit {
    pub coef: Vec<f64>,
    pub singular: bool,
}

/// Weighted least squares via the normal equations, with an SVD minimum-norm
/// fallback when `X'WX` is (numerically) singular.
pub fn weighted_least_squares(x: &DMatrix<f64>, y: &[f64], w: &[f64]) -> LinearFit {
    let p = x.ncols();
    let mut xtwx = DMatrix::<f64>::zeros(p, p);
    let mut xtwy = DVector::<f64>::zeros(p);
    accumulate_normal_equations(x, y, w, &mut xtwx, &mut xtwy);
    solve_normal_equations(x, y, w, &xtwx, &xtwy)
}

fn accumulate_normal_equations(
    x: &DMatrix<f64>,
    y: &[f64],
    w: &[f64],
    xtwx: &mut DMatrix<f64>,
    xtwy: &mut DVector<f64>,
) {
    let (n, p) = (x.nrows(), x.ncols());
    for i in 0..n {
        let wi = w[i];
        for a in 0..p {
            let xa = x[(i, a)] * wi;
            xtwy[a] += xa * y[i];
            for b in a..p {
                xtwx[(a, b)] += xa * x[(i, b)];
            }
        }
    }
    for a in 0..p {
        for b in 0..a {
            xtwx[(a, b)] = xtwx[(b, a)];
        }
    }
}

fn solve_normal_equations(
    x: &DMatrix<f64>,
    y: &[f64],
    w: &[f64],
    xtwx: &DMatrix<f64>,
    xtwy: &DVector<f64>,
) -> LinearFit {
    let p = xtwx.nrows();
    if let Some(chol) = xtwx.clone().cholesky() {
        let l = chol.l();
        let max_diag = (0..p).map(|i| l[(i, i)]).fold(0.0f64, f64::max);
        let min_diag = (0..p).map(|i| l[(i, i)]).fold(f64::INFINITY, f64::min);
        if min_diag > 1e-10 * max_diag.max(1e-300) {
            let beta = chol.solve(xtwy);
            return LinearFit {
                coef: beta.iter().copied().collect(),
                singular: false,
            };
        }
    }
    // Minimum-norm solution on the sqrt-weighted design.
    let n = x.nrows();
    let mut xs = x.clone();
    let mut ys = DVector::<f64>::zeros(n);
    for i in 0..n {
        let s = w[i].sqrt();
        ys[i] = s * y[i];
        for j in 0..p {
            xs[(i, j)] *= s;
        }
    }
    let svd = xs.svd(true, true);
    let beta = svd
        .solve(&ys, 1e-10)
        .unwrap_or_else(|_| DVector::zeros(p));
    LinearFit {
        coef: beta.iter().copied().collect(),
        singular: true,
    }
}

pub fn expit(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

fn bernoulli_loglik(x: &DMatrix<f64>, y: &[f64], w: &[f64], beta: &[f64]) -> f64 {
    let n = x.nrows();
    let mut ll = 0.0;
    for i in 0..n {
        let mut eta = 0.0;
        for j in 0..x.ncols() {
            eta += x[(i, j)] * beta[j];
        }
        // y log(mu) + (1-y) log(1-mu), written to stay finite for large |eta|
        ll += w[i] * (y[i] * eta - softplus(eta));
    }
    ll
}

fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x
    } else if x < -30.0 {
        0.0
    } else {
        (1.0 + x.exp()).ln()
    }
}

pub struct LogisticFit {
    pub coef: Vec<f64>,
    pub singular: bool,
    pub iterations: usize,
}

/// IRLS for the Bernoulli log-likelihood with the logit link, accepting
/// responses anywhere in [0, 1]. Step-halving is applied whenever a full
/// Newton step would decrease the likelihood. Converges when the score
/// `||X'W(y - mu)||_inf` drops below `1e-8 * max(1, sum w)`.
pub fn irls_logistic(x: &DMatrix<f64>, y: &[f64], w: &[f64]) -> Result<LogisticFit> {
    let (n, p) = (x.nrows(), x.ncols());
    let mut beta = vec![0.0f64; p];
    let scale = w.iter().sum::<f64>().max(1.0);
    let tol = 1e-8 * scale;
    let mut ll = bernoulli_loglik(x, y, w, &beta);
    let mut singular = false;
    let max_iter = 100;
    for iter in 0..max_iter {
        let mut mu = vec![0.0f64; n];
        let mut score = vec![0.0f64; p];
        for i in 0..n {
            let mut eta = 0.0;
            for j in 0..p {
                eta += x[(i, j)] * beta[j];
            }
            mu[i] = expit(eta);
            let r = w[i] * (y[i] - mu[i]);
            for j in 0..p {
                score[j] += x[(i, j)] * r;
            }
        }
        let score_norm = score.iter().fold(0.0f64, |m, s| m.max(s.abs()));
        if score_norm < tol {
            return Ok(LogisticFit {
                coef: beta,
                singular,
                iterations: iter,
            });
        }
        // Newton direction from the weighted normal equations.
        let mut info = DMatrix::<f64>::zeros(p, p);
        for i in 0..n {
            let wi = w[i] * (mu[i] * (1.0 - mu[i])).max(1e-10);
            for a in 0..p {
                let xa = x[(i, a)] * wi;
                for b in a..p {
                    info[(a, b)] += xa * x[(i, b)];
                }
            }
        }
        for a in 0..p {
            for b in 0..a {
                info[(a, b)] = info[(b, a)];
            }
        }
        let score_v = DVector::from_column_slice(&score);
        let delta = match info.clone().cholesky() {
            Some(chol) => chol.solve(&score_v),
            None => {
                singular = true;
                let svd = info.svd(true, true);
                svd.solve(&score_v, 1e-10)
                    .unwrap_or_else(|_| DVector::zeros(p))
            }
        };
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let cand: Vec<f64> = (0..p).map(|j| beta[j] + step * delta[j]).collect();
            let cand_ll = bernoulli_loglik(x, y, w, &cand);
            if cand_ll >= ll - 1e-12 * ll.abs().max(1.0) {
                beta = cand;
                ll = cand_ll;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            return Err(Error::NonConvergence {
                what: "IRLS logistic regression",
                iterations: iter,
                criterion: score_norm,
                last_iterate: beta,
            });
        }
    }
    // Final score check after the iteration cap.
    let mut score = vec![0.0f64; p];
    for i in 0..n {
        let mut eta = 0.0;
        for j in 0..p {
            eta += x[(i, j)] * beta[j];
        }
        let r = w[i] * (y[i] - expit(eta));
        for j in 0..p {
            score[j] += x[(i, j)] * r;
        }
    }
    let score_norm = score.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    if score_norm < tol {
        return Ok(LogisticFit {
            coef: beta,
            singular,
            iterations: max_iter,
        });
    }
    Err(Error::NonConvergence {
        what: "IRLS logistic regression",
        iterations: max_iter,
        criterion: score_norm,
        last_iterate: beta,
    })
}
