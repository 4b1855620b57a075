//! Multivariate adaptive regression splines: forward hinge-pair growth,
//! backward elimination under generalized cross-validation.
//!
//! The forward pass keeps an orthonormal basis of the current model columns
//! (in sqrt-weight space), so scoring a candidate hinge pair costs one
//! Gram-Schmidt sweep instead of a refit. Knot candidates sit on a quantile
//! grid per variable. The backward pass works on the Gram matrix, so each
//! subset evaluation is a small Cholesky solve.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MarsParams {
    /// Maximum number of basis functions including the intercept.
    pub max_terms: usize,
    /// Maximum interaction degree (2 allows pairwise hinge products).
    pub max_degree: usize,
    /// GCV cost per knot (Friedman's d).
    pub gcv_penalty: f64,
    /// Quantile-grid size for candidate knots per variable.
    pub knot_grid_size: usize,
}

impl Default for MarsParams {
    fn default() -> Self {
        Self {
            max_terms: 21,
            max_degree: 2,
            gcv_penalty: 3.0,
            knot_grid_size: 40,
        }
    }
}

/// One hinge factor: `max(0, x - knot)` when `positive`, else `max(0, knot - x)`.
#[derive(Debug, Clone, Copy)]
pub struct Hinge {
    pub var: usize,
    pub knot: f64,
    pub positive: bool,
}

impl Hinge {
    #[inline]
    fn eval(&self, x: f64) -> f64 {
        let d = if self.positive { x - self.knot } else { self.knot - x };
        if d > 0.0 {
            d
        } else {
            0.0
        }
    }
}

/// Product of hinge factors; an empty product is the intercept.
#[derive(Debug, Clone, Default)]
pub struct BasisFunction {
    pub factors: Vec<Hinge>,
}

impl BasisFunction {
    fn degree(&self) -> usize {
        self.factors.len()
    }

    fn uses_var(&self, var: usize) -> bool {
        self.factors.iter().any(|h| h.var == var)
    }

    fn eval_row(&self, row: &[f64]) -> f64 {
        self.factors.iter().map(|h| h.eval(row[h.var])).product()
    }
}

#[derive(Debug, Clone)]
pub struct MarsModel {
    pub basis: Vec<BasisFunction>,
    pub coef: Vec<f64>,
    pub n_vars: usize,
}

impl MarsModel {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.basis
            .iter()
            .zip(&self.coef)
            .map(|(b, c)| c * b.eval_row(row))
            .sum()
    }
}

/// Quantile grid of candidate knots for one column (deduplicated, sorted).
fn knot_grid(values: &[f64], grid_size: usize) -> Vec<f64> {
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    sorted.dedup();
    if sorted.len() <= grid_size {
        return sorted;
    }
    let m = grid_size;
    let mut out = Vec::with_capacity(m);
    for j in 0..m {
        let idx = (j as f64 / (m - 1) as f64 * (sorted.len() - 1) as f64).round() as usize;
        out.push(sorted[idx]);
    }
    out.dedup();
    out
}

struct Forward {
    xcols: Vec<Vec<f64>>,
    n: usize,
    basis: Vec<BasisFunction>,
    /// Basis columns in sqrt-weight space.
    cols: Vec<Vec<f64>>,
    /// Orthonormalized basis columns (same span as `cols`).
    ortho: Vec<Vec<f64>>,
    residual: Vec<f64>,
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        s += a[i] * b[i];
    }
    s
}

/// Scratch buffers reused across candidate evaluations.
struct Scratch {
    c1: Vec<f64>,
    c2: Vec<f64>,
    u1: Vec<f64>,
    u2: Vec<f64>,
}

impl Forward {
    /// Basis column for `parent * hinge`, in sqrt-weight space.
    fn hinge_column_into(&self, parent: usize, hinge: Hinge, out: &mut [f64]) {
        let parent_col = &self.cols[parent];
        let xv = &self.xcols[hinge.var];
        for i in 0..self.n {
            let p = parent_col[i];
            out[i] = if p != 0.0 { p * hinge.eval(xv[i]) } else { 0.0 };
        }
    }

    /// Squared-error reduction from adding the hinge pair in `scratch.c1/c2`.
    fn pair_gain(&self, scratch: &mut Scratch) -> f64 {
        let tol = 1e-10;
        let Scratch { c1, c2, u1, u2 } = scratch;
        u1.copy_from_slice(c1);
        let norm1_raw = dot(c1, c1);
        for q in &self.ortho {
            let proj = dot(q, u1);
            for i in 0..self.n {
                u1[i] -= proj * q[i];
            }
        }
        let n1 = dot(u1, u1);
        let ok1 = n1 > tol * norm1_raw.max(1e-300);
        let mut gain = 0.0;
        if ok1 {
            let c = dot(u1, &self.residual);
            gain += c * c / n1;
        }
        u2.copy_from_slice(c2);
        let norm2_raw = dot(c2, c2);
        for q in &self.ortho {
            let proj = dot(q, u2);
            for i in 0..self.n {
                u2[i] -= proj * q[i];
            }
        }
        if ok1 {
            let proj = dot(u1, u2) / n1;
            for i in 0..self.n {
                u2[i] -= proj * u1[i];
            }
        }
        let n2 = dot(u2, u2);
        if n2 > tol * norm2_raw.max(1e-300) {
            let c = dot(u2, &self.residual);
            gain += c * c / n2;
        }
        gain
    }

    fn push_column(&mut self, col: Vec<f64>, bf: BasisFunction) {
        let mut u = col.clone();
        for q in &self.ortho {
            let proj = dot(q, &u);
            for i in 0..self.n {
                u[i] -= proj * q[i];
            }
        }
        let norm = dot(&u, &u).sqrt();
        if norm <= 1e-12 {
            return;
        }
        for v in &mut u {
            *v /= norm;
        }
        let proj = dot(&u, &self.residual);
        for i in 0..self.n {
            self.residual[i] -= proj * u[i];
        }
        self.ortho.push(u);
        self.cols.push(col);
        self.basis.push(bf);
    }
}

/// Fits a MARS model minimizing weighted squared error.
pub fn fit_mars(
    xcols: &[Vec<f64>],
    y: &[f64],
    w: &[f64],
    params: &MarsParams,
) -> MarsModel {
    let n = y.len();
    let n_vars = xcols.len();
    let sw: Vec<f64> = w.iter().map(|v| v.sqrt()).collect();
    let knots: Vec<Vec<f64>> = xcols
        .iter()
        .map(|c| knot_grid(c, params.knot_grid_size))
        .collect();

    let ones: Vec<f64> = sw.clone();
    let ytilde: Vec<f64> = y.iter().zip(&sw).map(|(v, s)| v * s).collect();
    let mut fwd = Forward {
        xcols: xcols.to_vec(),
        n,
        basis: vec![BasisFunction::default()],
        cols: vec![ones.clone()],
        ortho: Vec::new(),
        residual: ytilde.clone(),
    };
    // Orthonormalize the intercept and absorb it into the residual.
    {
        let norm = dot(&ones, &ones).sqrt();
        let q: Vec<f64> = ones.iter().map(|v| v / norm).collect();
        let proj = dot(&q, &fwd.residual);
        for i in 0..n {
            fwd.residual[i] -= proj * q[i];
        }
        fwd.ortho.push(q);
    }
    let tss = dot(&fwd.residual, &fwd.residual);
    let gain_floor = 1e-12 * tss.max(1e-300);

    let mut scratch = Scratch {
        c1: vec![0.0; n],
        c2: vec![0.0; n],
        u1: vec![0.0; n],
        u2: vec![0.0; n],
    };
    while fwd.basis.len() + 1 < params.max_terms.max(1) {
        let mut best: Option<(f64, usize, Hinge)> = None;
        for parent in 0..fwd.basis.len() {
            if fwd.basis[parent].degree() >= params.max_degree {
                continue;
            }
            for var in 0..n_vars {
                if fwd.basis[parent].uses_var(var) {
                    continue;
                }
                for &knot in &knots[var] {
                    let hp = Hinge {
                        var,
                        knot,
                        positive: true,
                    };
                    let hm = Hinge {
                        var,
                        knot,
                        positive: false,
                    };
                    fwd.hinge_column_into(parent, hp, &mut scratch.c1);
                    fwd.hinge_column_into(parent, hm, &mut scratch.c2);
                    let gain = fwd.pair_gain(&mut scratch);
                    if gain > best.as_ref().map_or(gain_floor, |b| b.0) {
                        best = Some((gain, parent, hp));
                    }
                }
            }
        }
        let Some((_, parent, hp)) = best else { break };
        let hm = Hinge {
            positive: false,
            ..hp
        };
        for hinge in [hp, hm] {
            if fwd.basis.len() >= params.max_terms {
                break;
            }
            let mut col = vec![0.0; n];
            fwd.hinge_column_into(parent, hinge, &mut col);
            let mut bf = fwd.basis[parent].clone();
            bf.factors.push(hinge);
            fwd.push_column(col, bf);
        }
    }

    // Backward elimination on the Gram matrix, tracking the GCV-best subset.
    let m = fwd.basis.len();
    let total_w: f64 = w.iter().sum();
    let mut gram = DMatrix::<f64>::zeros(m, m);
    let mut cty = DVector::<f64>::zeros(m);
    for a in 0..m {
        cty[a] = dot(&fwd.cols[a], &ytilde);
        for b in a..m {
            let g = dot(&fwd.cols[a], &fwd.cols[b]);
            gram[(a, b)] = g;
            gram[(b, a)] = g;
        }
    }
    let yty = dot(&ytilde, &ytilde);
    let rss_of = |subset: &[usize]| -> Option<(f64, Vec<f64>)> {
        let k = subset.len();
        let mut g = DMatrix::<f64>::zeros(k, k);
        let mut b = DVector::<f64>::zeros(k);
        for (ai, &a) in subset.iter().enumerate() {
            b[ai] = cty[a];
            for (bi, &bb) in subset.iter().enumerate() {
                g[(ai, bi)] = gram[(a, bb)];
            }
        }
        // small ridge keeps near-collinear bases solvable
        for i in 0..k {
            g[(i, i)] += 1e-10 * gram[(subset[i], subset[i])].max(1e-300);
        }
        let chol = g.cholesky()?;
        let beta = chol.solve(&b);
        let rss = (yty - beta.dot(&b)).max(0.0);
        Some((rss, beta.iter().copied().collect()))
    };
    let gcv = |rss: f64, k: usize| -> f64 {
        let c = k as f64 + params.gcv_penalty * (k as f64 - 1.0) / 2.0;
        let denom = 1.0 - c / total_w;
        if denom <= 0.0 {
            f64::INFINITY
        } else {
            rss / total_w / (denom * denom)
        }
    };

    let mut current: Vec<usize> = (0..m).collect();
    let (mut best_subset, mut best_gcv) = {
        let (rss, _) = rss_of(&current).unwrap_or((yty, vec![]));
        (current.clone(), gcv(rss, current.len()))
    };
    while current.len() > 1 {
        let mut best_drop: Option<(f64, usize)> = None;
        for pos in 0..current.len() {
            if current[pos] == 0 {
                continue; // keep the intercept
            }
            let mut cand = current.clone();
            cand.remove(pos);
            if let Some((rss, _)) = rss_of(&cand) {
                if best_drop.map_or(true, |(r, _)| rss < r) {
                    best_drop = Some((rss, pos));
                }
            }
        }
        let Some((rss, pos)) = best_drop else { break };
        current.remove(pos);
        let g = gcv(rss, current.len());
        if g < best_gcv {
            best_gcv = g;
            best_subset = current.clone();
        }
    }

    let (_, coef) = rss_of(&best_subset).unwrap_or((yty, vec![0.0; best_subset.len()]));
    MarsModel {
        basis: best_subset
            .iter()
            .map(|&i| fwd.basis[i].clone())
            .collect(),
        coef,
        n_vars,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cols_from_rows(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let d = rows[0].len();
        (0..d)
            .map(|j| rows.iter().map(|r| r[j]).collect())
            .collect()
    }

    #[test]
    fn recovers_noiseless_hinge() {
        let n = 200;
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| vec![i as f64 / (n - 1) as f64])
            .collect();
        let y: Vec<f64> = rows.iter().map(|r| (r[0] - 0.5).max(0.0)).collect();
        let w = vec![1.0; n];
        let model = fit_mars(&cols_from_rows(&rows), &y, &w, &MarsParams::default());
        let mse: f64 = rows
            .iter()
            .zip(&y)
            .map(|(r, &t)| (model.predict_row(r) - t).powi(2))
            .sum::<f64>()
            / n as f64;
        assert!(mse < 1e-6, "training MSE {mse} too large");
    }

    #[test]
    fn max_terms_one_is_weighted_mean() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let y: Vec<f64> = (0..10).map(|i| (i * i) as f64).collect();
        let w: Vec<f64> = (1..=10).map(|i| i as f64).collect();
        let params = MarsParams {
            max_terms: 1,
            ..Default::default()
        };
        let model = fit_mars(&cols_from_rows(&rows), &y, &w, &params);
        assert_eq!(model.basis.len(), 1);
        let wmean = y.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() / w.iter().sum::<f64>();
        assert!((model.predict_row(&rows[3]) - wmean).abs() < 1e-10);
    }

    #[test]
    fn captures_quadratic_with_interaction() {
        // y = x0^2 + x0^2 * x1 on a deterministic grid; MARS with degree 2
        // should get close even though the truth is smooth.
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for i in 0..300 {
            let x0 = -2.0 + 4.0 * (i as f64) / 299.0;
            let x1 = (i % 2) as f64;
            rows.push(vec![x0, x1]);
            y.push(x0 * x0 + x0 * x0 * x1);
        }
        let w = vec![1.0; rows.len()];
        let model = fit_mars(&cols_from_rows(&rows), &y, &w, &MarsParams::default());
        let mse: f64 = rows
            .iter()
            .zip(&y)
            .map(|(r, &t)| (model.predict_row(r) - t).powi(2))
            .sum::<f64>()
            / rows.len() as f64;
        let var: f64 = {
            let mean = y.iter().sum::<f64>() / y.len() as f64;
            y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / y.len() as f64
        };
        assert!(
            mse < 0.02 * var,
            "MARS failed to capture quadratic structure: mse={mse}, var={var}"
        );
    }
}
