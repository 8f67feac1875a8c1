mod common;

use common::*;
use noshow_sched::analytics::{linear_bop_cost, BopCoefficients};
use noshow_sched::bop::{bop_cost_mc, sample_bm, skorohod_map, GridPath, PiecewiseLinearControl};
use noshow_sched::RngPolicy;
use proptest::prelude::*;

fn max_step(x: &[f64]) -> f64 {
    x.windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn reflection_is_complementary(seed in any::<u64>(), drift in -3.0f64..1.0, sigma in 0.0f64..2.0) {
        let dt = 1.0 / 256.0;
        let bm = sample_bm(sigma, 1.0, dt, &mut RngPolicy::new(seed).substream(1)).unwrap();
        let x = GridPath::new(dt, bm.values.iter().enumerate().map(|(k, v)| v + drift * k as f64 * dt).collect()).unwrap();
        let (q, l) = skorohod_map(&x);
        let osc = max_step(&x.values);
        prop_assert!(q.values.iter().all(|&v| v >= 0.0));
        prop_assert!(l.values.windows(2).all(|w| w[1] >= w[0]));
        prop_assert_eq!(l.values[0], (-x.values[0]).max(0.0));
        for k in 1..x.len() {
            let dl = l.values[k] - l.values[k - 1];
            if dl > 0.0 {
                prop_assert!(q.values[k] <= 2.0 * osc);
            }
        }
    }

    #[test]
    fn reflection_is_two_lipschitz(xs in prop::collection::vec((-2.0f64..2.0, -0.5f64..0.5), 2..300)) {
        let a = GridPath::new(0.01, xs.iter().map(|p| p.0).collect()).unwrap();
        let b = GridPath::new(0.01, xs.iter().map(|p| p.0 + p.1).collect()).unwrap();
        let sup = xs.iter().map(|p| p.1.abs()).fold(0.0, f64::max);
        let (qa, _) = skorohod_map(&a);
        let (qb, _) = skorohod_map(&b);
        let gap = qa.values.iter().zip(&qb.values).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
        prop_assert!(gap <= 2.0 * sup + 1e-12);
    }
}

#[test]
fn reflected_brownian_mean_matches_folded_normal() {
    let sigma = SIGMA;
    let dt = 1.0 / 4096.0;
    let rng = RngPolicy::new(808);
    let reps = 100_000;
    let picks = [1024usize, 2048, 4096];
    let rows = rng
        .replicate(reps, |_, r| {
            let (q, _) = skorohod_map(&sample_bm(sigma, 1.0, dt, r)?);
            Ok(picks.map(|k| q.values[k]))
        })
        .unwrap();
    for (j, &k) in picks.iter().enumerate() {
        let t = k as f64 * dt;
        let vals: Vec<f64> = rows.iter().map(|r| r[j]).collect();
        let mean = vals.iter().sum::<f64>() / reps as f64;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
        let se = (var / reps as f64).sqrt();
        let exact = sigma * (2.0 * t / std::f64::consts::PI).sqrt();
        // Grid reflection misses the excursions below the grid minimum, which
        // lowers the mean by about 0.5826 sigma sqrt(dt); that bias is
        // allowed on top of 3 stderr.
        let bias = 0.5826 * sigma * dt.sqrt();
        assert!(
            (mean - exact).abs() <= 3.0 * se + bias,
            "t={} {} vs {} (se {})",
            t,
            mean,
            exact,
            se
        );
    }
}

#[test]
fn zero_drift_cost_matches_closed_form() {
    let coeffs = BopCoefficients::from_params(&p0()).unwrap();
    let control = PiecewiseLinearControl::linear(0.0, 1.0).unwrap();
    let e = bop_cost_mc(&control, &coeffs, 1.0 / 16384.0, 5_000, &RngPolicy::new(41)).unwrap();
    assert!(
        (e.mean - ZERO_DRIFT_COST).abs() <= 0.03 * ZERO_DRIFT_COST + 3.0 * e.stderr,
        "{:?}",
        e
    );
}

#[test]
fn optimal_drift_cost_matches_quadrature() {
    let params = p0();
    let coeffs = BopCoefficients::from_params(&params).unwrap();
    let control = PiecewiseLinearControl::linear(BETA_STAR, 1.0).unwrap();
    let e = bop_cost_mc(
        &control,
        &coeffs,
        1.0 / 16384.0,
        20_000,
        &RngPolicy::new(42),
    )
    .unwrap();
    let exact = linear_bop_cost(BETA_STAR, 1.0, &params).unwrap();
    assert!(
        (e.mean - exact).abs() <= 0.03 * exact + 3.0 * e.stderr,
        "{:?} vs {}",
        e,
        exact
    );
}

#[test]
fn noiseless_control_cost_is_exact() {
    let coeffs = BopCoefficients::from_params(&p0()).unwrap().with_sigma(0.0);
    let control = PiecewiseLinearControl::linear(-0.25, 1.0).unwrap();
    let e = bop_cost_mc(&control, &coeffs, 1.0 / 16384.0, 10, &RngPolicy::new(0)).unwrap();
    assert_eq!(e.mean, 0.25 * TILDE_CO);
    assert_eq!(e.stderr, 0.0);
}

#[test]
fn terminal_jump_is_read_at_horizon() {
    // Noiseless U = jump of 1 at H: Q(H) = 1, L = 0, and the trapezoid
    // charges half a cell.
    let coeffs = BopCoefficients::from_params(&p0()).unwrap().with_sigma(0.0);
    let control = PiecewiseLinearControl::new(vec![(0.0, 0.0), (1.0, 0.0)], 1.0).unwrap();
    let dt = 0.125;
    let e = bop_cost_mc(&control, &coeffs, dt, 2, &RngPolicy::new(0)).unwrap();
    assert_eq!(e.mean, 0.5 * dt);
}
