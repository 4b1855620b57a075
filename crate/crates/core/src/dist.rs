//! Quantiles and tail probabilities used for Wald-type inference.

use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

pub fn normal_quantile(p: f64) -> f64 {
    Normal::new(0.0, 1.0).unwrap().inverse_cdf(p)
}

pub fn normal_sf(x: f64) -> f64 {
    1.0 - Normal::new(0.0, 1.0).unwrap().cdf(x)
}

pub fn t_quantile(p: f64, df: f64) -> f64 {
    StudentsT::new(0.0, 1.0, df).unwrap().inverse_cdf(p)
}

/// Upper tail P(T > x) for Student's t with `df` degrees of freedom.
pub fn t_sf(x: f64, df: f64) -> f64 {
    let d = StudentsT::new(0.0, 1.0, df).unwrap();
    // sf via the symmetric lower tail to keep precision for large |x|
    if x >= 0.0 {
        d.cdf(-x)
    } else {
        1.0 - d.cdf(x)
    }
}
