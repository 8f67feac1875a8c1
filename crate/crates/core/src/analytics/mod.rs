//! Closed forms and quadrature for the limit problems: the fluid value and
//! fluid control cost, the diffusion constants, laws of reflected Brownian
//! motion, and the Brownian cost of a linear control.

pub mod normal;
pub mod quadrature;

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::schedules::CumulativeControl;

use quadrature::adaptive_simpson;

/// Absolute tolerance of the inner (space) integral in [`rbm_mean`].
pub const RBM_MEAN_TOL: f64 = 1e-8;
/// Absolute tolerance of the outer (time) integral in [`linear_bop_cost`].
pub const BOP_TIME_TOL: f64 = 1e-6;
/// Tail mass below which the space integral is truncated.
const TAIL_CUTOFF: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct FluidSummary {
    /// Fluid completion time `p alpha / mu`.
    pub tau_bar: f64,
    /// Fluid optimal value.
    pub v_bar: f64,
    /// Fluid optimal control.
    pub lambda_star: CumulativeControl,
}

/// Fluid value `cw (p alpha - mu H)^2 / (2 mu) + co (tau_bar - H)` and the
/// control attaining it.
pub fn fluid_summary(params: &ModelParams) -> Result<FluidSummary> {
    params.require_overloaded()?;
    let excess = params.p * params.alpha - params.mu * params.horizon;
    let tau_bar = params.tau_bar();
    Ok(FluidSummary {
        tau_bar,
        v_bar: params.cw * excess * excess / (2.0 * params.mu)
            + params.co * (tau_bar - params.horizon),
        lambda_star: CumulativeControl::fluid_optimal(params)?,
    })
}

/// Fluid cost of a cumulative control with mass `alpha`.
///
/// The fluid queue `q = Gamma_1(p lambda - mu t)` is propagated exactly over
/// the linear pieces and jumps of the control, and waiting is measured as
/// `int q(t) dt`. The overage is `q(H) / mu`.
pub fn fop_cost(params: &ModelParams, control: &CumulativeControl) -> Result<f64> {
    params.require_overloaded()?;
    if (control.total() - params.alpha).abs() > 1e-12 * params.alpha.max(1.0) {
        return Err(Error::MassMismatch {
            expected: params.alpha,
            found: control.total(),
        });
    }
    if (control.horizon() - params.horizon).abs() > 0.0 {
        return Err(Error::domain(
            "control horizon differs from the model horizon",
        ));
    }
    let p = params.p;
    let mu = params.mu;
    // An atom at 0 arrives before anything is served.
    let mut q = p * control.knots()[0].1;
    let mut area = 0.0;
    for ((t0, v0), (t1, v1)) in control.segments() {
        if t1 == t0 {
            q += p * (v1 - v0);
            continue;
        }
        let dt = t1 - t0;
        let slope = p * (v1 - v0) / dt - mu;
        let end = q + slope * dt;
        if end >= 0.0 {
            area += 0.5 * (q + end) * dt;
            q = end;
        } else {
            // Drains to zero and is held there by the regulator.
            area += q * q / (2.0 * -slope);
            q = 0.0;
        }
    }
    q += p * control.terminal_mass();
    area += q * q / (2.0 * mu);
    Ok(params.cw * area + params.co * q / mu)
}

/// Second-order constants of the diffusion-scale problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionConstants {
    /// `sqrt(mu (1 - p) + mu cs2)`.
    pub sigma: f64,
    /// `cw (tau_bar - H) + co / mu`.
    pub tilde_co: f64,
    /// `-sigma sqrt(cw / (2 c~o))`.
    pub beta_star: f64,
    /// `sigma sqrt(2 cw c~o)`.
    pub v_star: f64,
    /// `sqrt(cw (p(1-p) + mu^3 cs2 / mu^2) / (2 c~o))`, the summary-level
    /// drift constant whose no-show term lacks the `mu / p` time change.
    pub c_star_legacy: f64,
}

pub fn diffusion_constants(params: &ModelParams) -> Result<DiffusionConstants> {
    params.require_overloaded()?;
    if !(params.cw > 0.0) {
        return Err(Error::domain(
            "the diffusion drift needs a positive waiting cost",
        ));
    }
    let sigma = diffusion_sigma(params);
    if sigma == 0.0 {
        return Err(Error::DegenerateNoise);
    }
    let tilde_co = tilde_co(params);
    let cw = params.cw;
    let (mu, p) = (params.mu, params.p);
    let service_variance = params.cs2 / (mu * mu);
    Ok(DiffusionConstants {
        sigma,
        tilde_co,
        beta_star: -sigma * (cw / (2.0 * tilde_co)).sqrt(),
        v_star: sigma * (2.0 * cw * tilde_co).sqrt(),
        c_star_legacy: (cw * (p * (1.0 - p) + mu.powi(3) * service_variance) / (2.0 * tilde_co))
            .sqrt(),
    })
}

fn diffusion_sigma(params: &ModelParams) -> f64 {
    // (mu/p) p (1-p) + mu cs2
    (params.mu * (1.0 - params.p) + params.mu * params.cs2).sqrt()
}

fn tilde_co(params: &ModelParams) -> f64 {
    params.cw * (params.tau_bar() - params.horizon) + params.co / params.mu
}

/// Coefficients of the Brownian control problem: noise level, holding cost
/// and effective idleness cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BopCoefficients {
    pub sigma: f64,
    pub cw: f64,
    pub tilde_co: f64,
}

impl BopCoefficients {
    /// Unlike [`diffusion_constants`], a zero `sigma` is allowed here.
    pub fn from_params(params: &ModelParams) -> Result<Self> {
        params.require_overloaded()?;
        Ok(BopCoefficients {
            sigma: diffusion_sigma(params),
            cw: params.cw,
            tilde_co: tilde_co(params),
        })
    }

    pub fn with_sigma(self, sigma: f64) -> Self {
        BopCoefficients { sigma, ..self }
    }

    /// `E Q_t` for the reflected process with drift `beta`; the noiseless
    /// case is `(beta t)^+`.
    pub fn mean_queue(&self, t: f64, beta: f64) -> Result<f64> {
        if self.sigma == 0.0 {
            return Ok((beta * t).max(0.0));
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        rbm_mean(t, beta, self.sigma)
    }

    /// `(cw / H) int_0^H E Q_t dt + (c~o / H)(E Q_H - beta H)` for `U(t) = beta t`.
    pub fn linear_cost(&self, beta: f64, horizon: f64) -> Result<f64> {
        if !(horizon > 0.0) {
            return Err(Error::domain("horizon must be positive"));
        }
        if !beta.is_finite() {
            return Err(Error::domain("drift must be finite"));
        }
        if self.sigma == 0.0 {
            // Q = (beta t)^+ and L = (-beta t)^+.
            let hold = if beta > 0.0 {
                beta * horizon * horizon / 2.0
            } else {
                0.0
            };
            let push = (-beta * horizon).max(0.0);
            return Ok(self.cw * hold / horizon + self.tilde_co * push / horizon);
        }
        // t = u^2 turns the sqrt(t) start of E Q_t into a smooth integrand.
        let mut failure = None;
        let integral = adaptive_simpson(
            |u| match self.mean_queue(u * u, beta) {
                Ok(m) => 2.0 * u * m,
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NAN
                }
            },
            0.0,
            horizon.sqrt(),
            BOP_TIME_TOL,
            8,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        let end = self.mean_queue(horizon, beta)?;
        Ok(self.cw * integral? / horizon + self.tilde_co * (end - beta * horizon) / horizon)
    }

    /// `cw sigma^2 / (2|beta|) + c~o |beta|`.
    pub fn drift_tradeoff(&self, beta: f64) -> Result<f64> {
        if !(beta < 0.0) {
            return Err(Error::domain("drift must be negative"));
        }
        Ok(self.cw * self.sigma * self.sigma / (2.0 * -beta) + self.tilde_co * -beta)
    }
}

fn check_rbm_args(t: f64, sigma: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain(format!("time must be positive, got {}", t)));
    }
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::domain(format!(
            "sigma must be positive, got {}",
            sigma
        )));
    }
    Ok(())
}

/// `P(Q_t > y)` for RBM started at 0, both terms computed without cancellation.
fn rbm_survival(t: f64, y: f64, beta: f64, sigma: f64) -> f64 {
    let s = sigma * t.sqrt();
    let upper = normal::sf((y - beta * t) / s);
    let reflected = (2.0 * beta * y / (sigma * sigma) + normal::ln_cdf((-y - beta * t) / s)).exp();
    (upper + reflected).min(1.0)
}

/// `P(Q_t <= y)` for a reflected Brownian motion with drift `beta` and
/// diffusion coefficient `sigma`, started at 0:
/// `Phi((y - beta t)/(sigma sqrt t)) - exp(2 beta y / sigma^2) Phi((-y - beta t)/(sigma sqrt t))`.
pub fn rbm_cdf(t: f64, y: f64, beta: f64, sigma: f64) -> Result<f64> {
    check_rbm_args(t, sigma)?;
    if !(y >= 0.0) {
        return Err(Error::domain("level must be non-negative"));
    }
    Ok((1.0 - rbm_survival(t, y, beta, sigma)).clamp(0.0, 1.0))
}

/// `E Q_t = int_0^inf P(Q_t > y) dy` by adaptive Simpson.
///
/// The range is cut where the survival bound falls below `1e-12`: the
/// Gaussian term beyond `sigma sqrt(t)` times about 7.5 standard deviations,
/// and for `beta < 0` the exponential factor `exp(2 beta y / sigma^2)`.
pub fn rbm_mean(t: f64, beta: f64, sigma: f64) -> Result<f64> {
    check_rbm_args(t, sigma)?;
    if !beta.is_finite() {
        return Err(Error::domain("drift must be finite"));
    }
    let s = sigma * t.sqrt();
    let z = (2.0 * (1.0 / TAIL_CUTOFF).ln()).sqrt() + 0.1;
    let upper = if beta >= 0.0 {
        beta * t + s * z
    } else {
        let exp_cut = sigma * sigma * (1.0 / TAIL_CUTOFF).ln() / (2.0 * -beta);
        (s * z).max((-beta * t).min(exp_cut))
    };
    adaptive_simpson(
        |y| rbm_survival(t, y, beta, sigma),
        0.0,
        upper,
        RBM_MEAN_TOL,
        16,
    )
}

/// Stationary mean `sigma^2 / (2|beta|)` of RBM with negative drift.
pub fn rbm_stationary_mean(beta: f64, sigma: f64) -> Result<f64> {
    if !(beta < 0.0) {
        return Err(Error::domain("stationary law needs a negative drift"));
    }
    Ok(sigma * sigma / (2.0 * -beta))
}

/// Large-horizon cost of drift `beta`: `cw sigma^2 / (2|beta|) + c~o |beta|`.
pub fn drift_tradeoff(beta: f64, params: &ModelParams) -> Result<f64> {
    BopCoefficients::from_params(params)?.drift_tradeoff(beta)
}

/// Horizon-normalized Brownian cost of the linear control `U(t) = beta t`
/// over `[0, horizon]`.
pub fn linear_bop_cost(beta: f64, horizon: f64, params: &ModelParams) -> Result<f64> {
    BopCoefficients::from_params(params)?.linear_cost(beta, horizon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ServiceLaw;
    use approx::assert_relative_eq;

    fn p0() -> ModelParams {
        ModelParams {
            alpha: 2.0,
            p: 0.8,
            mu: 1.0,
            horizon: 1.0,
            cs2: 1.0,
            service_law: ServiceLaw::Exponential,
            cw: 1.0,
            co: 1.0,
        }
    }

    #[test]
    fn fluid_values() {
        let f = fluid_summary(&p0()).unwrap();
        assert_relative_eq!(f.tau_bar, 1.6, epsilon = 1e-15);
        assert_relative_eq!(f.v_bar, 0.78, epsilon = 1e-15);
        let other = ModelParams {
            alpha: 3.0,
            p: 0.5,
            cw: 2.0,
            ..p0()
        };
        assert_relative_eq!(fluid_summary(&other).unwrap().v_bar, 0.75, epsilon = 1e-15);
        let critical = ModelParams {
            alpha: 1.25 + 1e-9,
            ..p0()
        };
        assert!(fluid_summary(&critical).unwrap().v_bar < 1e-8);
        let light = ModelParams { alpha: 1.0, ..p0() };
        assert!(matches!(
            fluid_summary(&light),
            Err(Error::NotOverloaded { .. })
        ));
    }

    #[test]
    fn fop_cost_hand_cases() {
        let params = p0();
        let star = CumulativeControl::fluid_optimal(&params).unwrap();
        assert_relative_eq!(fop_cost(&params, &star).unwrap(), 0.78, epsilon = 1e-12);

        let uniform = CumulativeControl::new(vec![(0.0, 0.0), (1.0, 2.0)], 1.0, 2.0).unwrap();
        assert_relative_eq!(fop_cost(&params, &uniform).unwrap(), 1.08, epsilon = 1e-12);

        let atom = CumulativeControl::new(vec![(0.0, 2.0), (1.0, 2.0)], 1.0, 2.0).unwrap();
        assert_relative_eq!(fop_cost(&params, &atom).unwrap(), 1.88, epsilon = 1e-12);

        let wrong_mass = CumulativeControl::new(vec![(0.0, 0.0), (1.0, 1.0)], 1.0, 1.5).unwrap();
        assert!(matches!(
            fop_cost(&params, &wrong_mass),
            Err(Error::MassMismatch { .. })
        ));
    }

    #[test]
    fn fop_cost_with_idle_then_burst() {
        // Nothing until 0.5, then an atom of 1 (q jumps to 0.8) draining at rate 1
        // over [0.5, 1), then the remaining 1 at H: q(H) = 0.3 + 0.8 = 1.1.
        let params = p0();
        let c = CumulativeControl::new(
            vec![(0.0, 0.0), (0.5, 0.0), (0.5, 1.0), (1.0, 1.0)],
            1.0,
            2.0,
        )
        .unwrap();
        let expected = 0.5 * (0.8 + 0.3) * 0.5 + 1.1 * 1.1 / 2.0 + 1.1;
        assert_relative_eq!(fop_cost(&params, &c).unwrap(), expected, epsilon = 1e-12);
    }

    #[test]
    fn diffusion_constants_p0() {
        let dc = diffusion_constants(&p0()).unwrap();
        assert_relative_eq!(dc.sigma, 1.2f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(dc.tilde_co, 1.6, epsilon = 1e-15);
        assert_relative_eq!(dc.beta_star, -0.612_372_435_695_794_5, epsilon = 1e-15);
        assert_relative_eq!(dc.v_star, 1.959_591_794_226_542_5, epsilon = 1e-14);
        assert_relative_eq!(dc.c_star_legacy, 0.602_079_728_939_614_8, epsilon = 1e-15);
        assert_relative_eq!(
            dc.v_star,
            -2.0 * dc.tilde_co * dc.beta_star,
            epsilon = 1e-14
        );
    }

    #[test]
    fn diffusion_constants_homogeneity() {
        let base = diffusion_constants(&p0()).unwrap();
        let k = 3.5;
        let scaled = diffusion_constants(&ModelParams {
            cw: k,
            co: k,
            ..p0()
        })
        .unwrap();
        assert_relative_eq!(scaled.beta_star, base.beta_star, epsilon = 1e-14);
        assert_relative_eq!(scaled.v_star, k * base.v_star, epsilon = 1e-13);
    }

    #[test]
    fn diffusion_constants_errors() {
        let det = ModelParams {
            p: 1.0,
            cs2: 0.0,
            service_law: ServiceLaw::Deterministic,
            alpha: 2.0,
            ..p0()
        };
        assert!(matches!(
            diffusion_constants(&det),
            Err(Error::DegenerateNoise)
        ));
        let light = ModelParams { alpha: 1.0, ..p0() };
        assert!(matches!(
            diffusion_constants(&light),
            Err(Error::NotOverloaded { .. })
        ));
    }

    #[test]
    fn rbm_cdf_values() {
        for &(t, b, s) in &[(1.0, -1.0, 2.0), (0.3, 0.5, 0.7), (50.0, -0.2, 1.0)] {
            assert_eq!(rbm_cdf(t, 0.0, b, s).unwrap(), 0.0);
            assert!(rbm_cdf(t, 1e6, b, s).unwrap() > 1.0 - 1e-15);
        }
        // Folded normal: 2 Phi(1) - 1.
        assert_relative_eq!(
            rbm_cdf(1.0, 1.0, 0.0, 1.0).unwrap(),
            0.682_689_492_137_085_9,
            epsilon = 1e-15
        );
        assert!(rbm_cdf(0.0, 1.0, 0.0, 1.0).is_err());
        assert!(rbm_cdf(1.0, 1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn rbm_cdf_survives_large_positive_drift() {
        // exp(2 beta y / sigma^2) alone overflows here.
        let v = rbm_cdf(400.0, 400.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(v, 0.490_032_664_811_698_7, max_relative = 1e-12);
    }

    #[test]
    fn rbm_mean_values() {
        let m = rbm_mean(1.0, 0.0, 1.0).unwrap();
        assert_relative_eq!(m, (2.0 / std::f64::consts::PI).sqrt(), epsilon = 1e-8);
        let m = rbm_mean(200.0, -1.0, 2f64.sqrt()).unwrap();
        assert_relative_eq!(m, 1.0, epsilon = 1e-4);
        let m = rbm_mean(5.0, -1.0, 1e-3).unwrap();
        assert!(m < 1e-5, "{}", m);
    }

    #[test]
    fn stationary_mean() {
        assert_relative_eq!(
            rbm_stationary_mean(-1.0, 2f64.sqrt()).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        assert_relative_eq!(
            rbm_stationary_mean(-0.612_372_435_695_794_5, 1.2f64.sqrt()).unwrap(),
            0.979_795_897_113_271_2,
            epsilon = 1e-14
        );
        let a = rbm_stationary_mean(-0.7, 1.3).unwrap();
        let b = rbm_stationary_mean(-0.7, 2.6).unwrap();
        assert_relative_eq!(b, 4.0 * a, epsilon = 1e-14);
        assert!(rbm_stationary_mean(0.0, 1.0).is_err());
    }

    #[test]
    fn tradeoff_values() {
        let params = p0();
        let dc = diffusion_constants(&params).unwrap();
        assert_relative_eq!(
            drift_tradeoff(dc.beta_star, &params).unwrap(),
            dc.v_star,
            epsilon = 1e-14
        );
        assert_relative_eq!(drift_tradeoff(-1.0, &params).unwrap(), 2.2, epsilon = 1e-14);
        assert!(drift_tradeoff(-1e-12, &params).unwrap() > 1e11);
        assert!(drift_tradeoff(0.0, &params).is_err());
    }

    #[test]
    fn noiseless_linear_cost() {
        let coeffs = BopCoefficients::from_params(&p0()).unwrap().with_sigma(0.0);
        assert_relative_eq!(
            coeffs.linear_cost(-0.5, 1.0).unwrap(),
            0.5 * 1.6,
            epsilon = 1e-15
        );
        assert_relative_eq!(
            coeffs.linear_cost(-0.5, 7.0).unwrap(),
            0.5 * 1.6,
            epsilon = 1e-15
        );
    }
}
