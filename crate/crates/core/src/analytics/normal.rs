//! Standard normal distribution function.

use libm::erfc;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// `Phi(x)`, via `erfc` so that the lower tail keeps full relative accuracy.
pub fn cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// `1 - Phi(x)` without cancellation.
pub fn sf(x: f64) -> f64 {
    cdf(-x)
}

/// `ln Phi(x)`, finite far into the lower tail.
pub fn ln_cdf(x: f64) -> f64 {
    if x > -35.0 {
        return cdf(x).ln();
    }
    // Asymptotic Mills-ratio expansion; the next term is below 1e-15 here.
    let z2 = x * x;
    let inv = 1.0 / z2;
    let series = 1.0
        + inv
            * (-1.0 + inv * (3.0 + inv * (-15.0 + inv * (105.0 + inv * (-945.0 + inv * 10395.0)))));
    -0.5 * z2 - (-x).ln() - 0.5 * (2.0 * PI).ln() + series.ln()
}
