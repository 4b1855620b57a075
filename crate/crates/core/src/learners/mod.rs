//! Base prediction learners: sample mean, main-terms GLM (identity or logit
//! link), and multivariate adaptive regression splines.
//!
//! Design matrices are passed without an intercept column; every learner
//! handles its own intercept. The treatment indicator is just another column,
//! so counterfactual predictions are made by forcing that column to 1 or 0
//! before calling [`predict`].

pub mod glm;
pub mod mars;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use glm::{expit, logit};
pub use mars::{MarsModel, MarsParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Link {
    Identity,
    Logit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnerKind {
    Mean,
    Glm,
    Mars,
}

/// Specification of one learner in a library.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LearnerSpec {
    pub kind: LearnerKind,
    pub link: Link,
    pub mars: MarsParams,
}

impl LearnerSpec {
    pub fn mean(link: Link) -> Self {
        Self {
            kind: LearnerKind::Mean,
            link,
            mars: MarsParams::default(),
        }
    }

    pub fn glm(link: Link) -> Self {
        Self {
            kind: LearnerKind::Glm,
            link,
            mars: MarsParams::default(),
        }
    }

    pub fn mars(link: Link) -> Self {
        Self {
            kind: LearnerKind::Mars,
            link,
            mars: MarsParams::default(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            LearnerKind::Mean => "mean",
            LearnerKind::Glm => "glm",
            LearnerKind::Mars => "mars",
        }
    }

    /// Standard library for the configured link: mean, main-terms GLM, MARS.
    pub fn default_library(link: Link) -> Vec<LearnerSpec> {
        vec![Self::mean(link), Self::glm(link), Self::mars(link)]
    }
}

/// Predictions from MARS under a logit-link library are pinned into this
/// range so downstream logit transforms stay finite.
pub const PROB_CLAMP: (f64, f64) = (0.005, 0.995);

#[derive(Debug, Clone)]
enum Model {
    Mean {
        value: f64,
    },
    Glm {
        link: Link,
        /// Intercept first, then one coefficient per design column.
        coef: Vec<f64>,
    },
    Mars {
        model: MarsModel,
        truncate: bool,
    },
}

/// A fitted learner; prediction is deterministic given the fit.
#[derive(Debug, Clone)]
pub struct FittedLearner {
    pub spec: LearnerSpec,
    model: Model,
    /// Rows and design columns seen at training time.
    pub n: usize,
    pub p: usize,
    /// True when a rank-deficient design was solved by minimum-norm fallback.
    pub singular: bool,
}

fn validate_inputs(x: &DMatrix<f64>, y: &[f64], w: &[f64], link: Link) -> Result<()> {
    if x.nrows() == 0 || x.nrows() != y.len() || y.len() != w.len() {
        return Err(Error::DimensionMismatch {
            expected: x.nrows(),
            found: y.len().min(w.len()),
        });
    }
    for (i, v) in y.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFiniteValue {
                index: i,
                field: "response",
            });
        }
        if link == Link::Logit && !(0.0..=1.0).contains(v) {
            return Err(Error::NonBinaryOutcome {
                index: i,
                value: *v,
            });
        }
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteValue {
            index: 0,
            field: "design",
        });
    }
    Ok(())
}

fn with_intercept(x: &DMatrix<f64>) -> DMatrix<f64> {
    let (n, p) = (x.nrows(), x.ncols());
    let mut out = DMatrix::<f64>::zeros(n, p + 1);
    for i in 0..n {
        out[(i, 0)] = 1.0;
        for j in 0..p {
            out[(i, j + 1)] = x[(i, j)];
        }
    }
    out
}

fn matrix_columns(x: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..x.ncols())
        .map(|j| x.column(j).iter().copied().collect())
        .collect()
}

/// Fits one learner on `(X, y)` with observation weights `w`.
pub fn fit(spec: &LearnerSpec, x: &DMatrix<f64>, y: &[f64], w: &[f64]) -> Result<FittedLearner> {
    validate_inputs(x, y, w, spec.link)?;
    let (n, p) = (x.nrows(), x.ncols());
    let model = match spec.kind {
        LearnerKind::Mean => {
            let sw: f64 = w.iter().sum();
            let value = y.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
            Model::Mean { value }
        }
        LearnerKind::Glm => {
            let xd = with_intercept(x);
            match spec.link {
                Link::Identity => {
                    let fit = glm::weighted_least_squares(&xd, y, w);
                    if fit.singular {
                        return Ok(FittedLearner {
                            spec: *spec,
                            model: Model::Glm {
                                link: spec.link,
                                coef: fit.coef,
                            },
                            n,
                            p,
                            singular: true,
                        });
                    }
                    Model::Glm {
                        link: spec.link,
                        coef: fit.coef,
                    }
                }
                Link::Logit => {
                    let fit = glm::irls_logistic(&xd, y, w)?;
                    if fit.singular {
                        return Ok(FittedLearner {
                            spec: *spec,
                            model: Model::Glm {
                                link: spec.link,
                                coef: fit.coef,
                            },
                            n,
                            p,
                            singular: true,
                        });
                    }
                    Model::Glm {
                        link: spec.link,
                        coef: fit.coef,
                    }
                }
            }
        }
        LearnerKind::Mars => {
            let model = mars::fit_mars(&matrix_columns(x), y, w, &spec.mars);
            Model::Mars {
                model,
                truncate: spec.link == Link::Logit,
            }
        }
    };
    Ok(FittedLearner {
        spec: *spec,
        model,
        n,
        p,
        singular: false,
    })
}

/// Predicts for every row of `x`; column count must match training.
pub fn predict(fit: &FittedLearner, x: &DMatrix<f64>) -> Result<Vec<f64>> {
    if x.ncols() != fit.p {
        return Err(Error::DimensionMismatch {
            expected: fit.p,
            found: x.ncols(),
        });
    }
    let n = x.nrows();
    let out = match &fit.model {
        Model::Mean { value } => vec![*value; n],
        Model::Glm { link, coef } => {
            let mut out = Vec::with_capacity(n);
            for i in 0..n {
                let mut eta = coef[0];
                for j in 0..fit.p {
                    eta += coef[j + 1] * x[(i, j)];
                }
                out.push(match link {
                    Link::Identity => eta,
                    Link::Logit => expit(eta),
                });
            }
            out
        }
        Model::Mars { model, truncate } => {
            let mut row = vec![0.0; fit.p];
            let mut out = Vec::with_capacity(n);
            for i in 0..n {
                for j in 0..fit.p {
                    row[j] = x[(i, j)];
                }
                let mut v = model.predict_row(&row);
                if *truncate {
                    v = v.clamp(PROB_CLAMP.0, PROB_CLAMP.1);
                }
                out.push(v);
            }
            out
        }
    };
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn mat(rows: &[&[f64]]) -> DMatrix<f64> {
        DMatrix::from_row_slice(rows.len(), rows[0].len(), &rows.concat())
    }

    #[test]
    fn mean_learner_is_constant() {
        let x = mat(&[&[0.0], &[1.0], &[2.0]]);
        let f = fit(&LearnerSpec::mean(Link::Identity), &x, &[1.0, 2.0, 3.0], &[1.0; 3]).unwrap();
        assert_eq!(predict(&f, &x).unwrap(), vec![2.0, 2.0, 2.0]);
    }

    #[test]
    fn glm_identity_recovers_exact_line() {
        let n = 20;
        let x = DMatrix::from_fn(n, 1, |i, _| i as f64 / 7.0);
        let y: Vec<f64> = (0..n).map(|i| 1.0 + 2.0 * (i as f64 / 7.0)).collect();
        let f = fit(&LearnerSpec::glm(Link::Identity), &x, &y, &vec![1.0; n]).unwrap();
        let pred = predict(&f, &mat(&[&[3.0]])).unwrap();
        assert_abs_diff_eq!(pred[0], 7.0, epsilon = 1e-10);
        assert!(!f.singular);
    }

    #[test]
    fn glm_identity_weights_match_row_duplication() {
        let x = mat(&[&[0.1], &[0.9], &[1.7], &[2.2]]);
        let y = [0.3, 1.1, 2.0, 2.6];
        let w = [2.0, 1.0, 3.0, 1.0];
        let f_w = fit(&LearnerSpec::glm(Link::Identity), &x, &y, &w).unwrap();
        // duplicate rows according to weights
        let mut rows = Vec::new();
        let mut yy = Vec::new();
        for i in 0..4 {
            for _ in 0..w[i] as usize {
                rows.push(vec![x[(i, 0)]]);
                yy.push(y[i]);
            }
        }
        let xd = DMatrix::from_fn(rows.len(), 1, |i, _| rows[i][0]);
        let f_d = fit(&LearnerSpec::glm(Link::Identity), &xd, &yy, &vec![1.0; yy.len()]).unwrap();
        let grid = mat(&[&[0.0], &[1.0]]);
        let pw = predict(&f_w, &grid).unwrap();
        let pd = predict(&f_d, &grid).unwrap();
        assert_abs_diff_eq!(pw[0], pd[0], epsilon = 1e-10);
        assert_abs_diff_eq!(pw[1], pd[1], epsilon = 1e-10);
    }

    #[test]
    fn glm_identity_residuals_orthogonal() {
        let x = mat(&[
            &[0.2, 1.0],
            &[1.4, 0.0],
            &[-0.3, 1.0],
            &[0.9, 0.0],
            &[2.2, 1.0],
            &[-1.0, 0.0],
        ]);
        let y = [0.5, 2.0, -0.1, 1.4, 3.3, -1.2];
        let w = vec![1.0; 6];
        let f = fit(&LearnerSpec::glm(Link::Identity), &x, &y, &w).unwrap();
        let pred = predict(&f, &x).unwrap();
        let scale: f64 = y.iter().map(|v| v.abs()).fold(1.0, f64::max);
        // intercept and both columns
        let resid: Vec<f64> = (0..6).map(|i| y[i] - pred[i]).collect();
        let mut worst: f64 = resid.iter().sum::<f64>().abs();
        for j in 0..2 {
            let d: f64 = (0..6).map(|i| x[(i, j)] * resid[i]).sum();
            worst = worst.max(d.abs());
        }
        assert!(worst < 1e-8 * scale, "orthogonality violated: {worst}");
    }

    #[test]
    fn glm_singular_design_flags_and_still_fits() {
        // second column duplicates the first
        let x = mat(&[&[1.0, 1.0], &[2.0, 2.0], &[3.0, 3.0], &[4.0, 4.0]]);
        let y = [2.0, 4.0, 6.0, 8.0];
        let f = fit(&LearnerSpec::glm(Link::Identity), &x, &y, &[1.0; 4]).unwrap();
        assert!(f.singular);
        let pred = predict(&f, &x).unwrap();
        for i in 0..4 {
            assert_abs_diff_eq!(pred[i], y[i], epsilon = 1e-6);
        }
    }

    #[test]
    fn glm_logit_saturated_two_by_two() {
        // cells: x=0 with 2/5 successes, x=1 with 4/5
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for i in 0..5 {
            rows.push(vec![0.0]);
            y.push(if i < 2 { 1.0 } else { 0.0 });
            rows.push(vec![1.0]);
            y.push(if i < 4 { 1.0 } else { 0.0 });
        }
        let x = DMatrix::from_fn(rows.len(), 1, |i, _| rows[i][0]);
        let f = fit(&LearnerSpec::glm(Link::Logit), &x, &y, &vec![1.0; y.len()]).unwrap();
        let pred = predict(&f, &mat(&[&[0.0], &[1.0]])).unwrap();
        assert_abs_diff_eq!(pred[0], 0.4, epsilon = 1e-9);
        assert_abs_diff_eq!(pred[1], 0.8, epsilon = 1e-9);
    }

    #[test]
    fn glm_logit_matches_reference_mle() {
        // Frozen reference fit (statsmodels GLM, Binomial) on the mixed-model
        // toy data; columns are (a, w), intercept added internally.
        let a = [
            1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0,
            1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
        ];
        let wv = [
            -0.802, -1.324, -0.248, 0.42, 1.136, 0.11, -0.553, -0.785, 0.749, 1.635, 0.273,
            -1.233, -0.958, 1.6, 0.203, -1.732, -0.084, -1.163, -0.629, -0.488, -0.713, 0.553,
            -0.063, -0.589, 0.41, 0.83,
        ];
        let y = [
            1.0, 0.0, 0.0, 1.0, 1.0, 1.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.0, 1.0,
            0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 1.0, 0.0,
        ];
        let n = y.len();
        let x = DMatrix::from_fn(n, 2, |i, j| if j == 0 { a[i] } else { wv[i] });
        let f = fit(&LearnerSpec::glm(Link::Logit), &x, &y, &vec![1.0; n]).unwrap();
        match &f.model {
            Model::Glm { coef, .. } => {
                assert_abs_diff_eq!(coef[0], -0.1614856658, epsilon = 1e-7);
                assert_abs_diff_eq!(coef[1], 1.3141908558, epsilon = 1e-7);
                assert_abs_diff_eq!(coef[2], 1.9804972563, epsilon = 1e-7);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn logit_rejects_out_of_range_response() {
        let x = mat(&[&[0.0], &[1.0]]);
        let err = fit(&LearnerSpec::glm(Link::Logit), &x, &[0.5, 1.5], &[1.0; 2]).unwrap_err();
        assert!(matches!(err, Error::NonBinaryOutcome { .. }));
    }

    #[test]
    fn predict_checks_dimensions() {
        let x = mat(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let f = fit(&LearnerSpec::glm(Link::Identity), &x, &[1.0, 2.0], &[1.0; 2]).unwrap();
        let err = predict(&f, &mat(&[&[1.0]])).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn mars_logit_link_truncates() {
        let n = 50;
        let x = DMatrix::from_fn(n, 1, |i, _| i as f64);
        let y: Vec<f64> = (0..n).map(|i| if i < 25 { 0.0 } else { 1.0 }).collect();
        let f = fit(&LearnerSpec::mars(Link::Logit), &x, &y, &vec![1.0; n]).unwrap();
        let grid = DMatrix::from_fn(200, 1, |i, _| i as f64 - 80.0);
        for v in predict(&f, &grid).unwrap() {
            assert!((PROB_CLAMP.0..=PROB_CLAMP.1).contains(&v));
        }
    }
}
