//! Adaptive Simpson quadrature.

use crate::error::{Error, Result};

const MAX_DEPTH: u32 = 48;

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
///
/// The interval is first cut into `panels` equal pieces so that narrow
/// features are not missed by the coarsest Simpson estimate.
pub fn adaptive_simpson<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    tol: f64,
    panels: usize,
) -> Result<f64> {
    if b <= a {
        return Ok(0.0);
    }
    let panels = panels.max(1);
    let width = (b - a) / panels as f64;
    let mut total = 0.0;
    for i in 0..panels {
        let lo = a + width * i as f64;
        let hi = if i + 1 == panels { b } else { lo + width };
        let flo = f(lo);
        let fhi = f(hi);
        let mid = 0.5 * (lo + hi);
        let fmid = f(mid);
        let whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
        total += refine(
            &mut f,
            lo,
            hi,
            flo,
            fmid,
            fhi,
            whole,
            tol / panels as f64,
            MAX_DEPTH,
        )?;
    }
    Ok(total)
}

#[allow(clippy::too_many_arguments)]
fn refine<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if !delta.is_finite() {
        return Err(Error::Quadrature(format!(
            "non-finite integrand on [{}, {}]",
            a, b
        )));
    }
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 || m <= a || m >= b {
        return Err(Error::Quadrature(format!(
            "tolerance {:e} not reached on [{}, {}]",
            tol, a, b
        )));
    }
    Ok(refine(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)?
        + refine(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomials_and_transcendentals() {
        let v = adaptive_simpson(|x| x * x * x, 0.0, 2.0, 1e-12, 1).unwrap();
        assert_relative_eq!(v, 4.0, epsilon = 1e-12);
        let v = adaptive_simpson(f64::sin, 0.0, std::f64::consts::PI, 1e-10, 4).unwrap();
        assert_relative_eq!(v, 2.0, epsilon = 1e-10);
        let v = adaptive_simpson(|x: f64| (-x).exp(), 0.0, 40.0, 1e-10, 8).unwrap();
        assert_relative_eq!(v, 1.0 - (-40.0f64).exp(), epsilon = 1e-10);
    }

    #[test]
    fn sqrt_endpoint() {
        let v = adaptive_simpson(f64::sqrt, 0.0, 1.0, 1e-8, 1).unwrap();
        assert_relative_eq!(v, 2.0 / 3.0, epsilon = 1e-8);
    }

    #[test]
    fn nan_integrand_fails() {
        assert!(adaptive_simpson(|_| f64::NAN, 0.0, 1.0, 1e-8, 1).is_err());
    }

    #[test]
    fn empty_interval() {
        assert_eq!(adaptive_simpson(|x| x, 1.0, 1.0, 1e-8, 1).unwrap(), 0.0);
    }
}
