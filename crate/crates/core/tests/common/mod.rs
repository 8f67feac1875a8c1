#![allow(dead_code, clippy::excessive_precision)]

use noshow_sched::{ModelParams, ServiceLaw};

/// Reference parameter set: alpha 2, p 0.8, mu 1, H 1, exponential service,
/// unit costs.
pub fn p0() -> ModelParams {
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

pub fn deterministic() -> ModelParams {
    ModelParams {
        p: 1.0,
        cs2: 0.0,
        service_law: ServiceLaw::Deterministic,
        ..p0()
    }
}

pub const V_BAR: f64 = 0.78;
pub const SIGMA: f64 = 1.095_445_115_010_332_2;
pub const TILDE_CO: f64 = 1.6;
pub const BETA_STAR: f64 = -0.612_372_435_695_794_5;
pub const V_STAR: f64 = 1.959_591_794_226_542_5;
pub const STATIONARY_MEAN: f64 = 0.979_795_897_113_271_2;

/// `(cw / H) int_0^H E|X_t| dt + (c~o / H) E|X_H|` at H = 1, evaluated in
/// high precision from `E|X_t| = sigma sqrt(2t/pi)`.
pub const ZERO_DRIFT_COST: f64 = 1.981_154_487_473_636_7;

/// Linear-drift Brownian cost at the optimal drift for several horizons,
/// evaluated in high precision.
pub const LINEAR_COST_AT_BETA_STAR: [(f64, f64); 6] = [
    (1.0, 2.407_692_060_854_370_2),
    (2.0, 2.146_942_674_169_427_1),
    (10.0, 1.965_779_982_582_898_1),
    (50.0, 1.959_592_393_572_016_1),
    (200.0, 1.959_591_794_226_542_5),
    (1000.0, 1.959_591_794_226_542_5),
];

pub fn parse_csv(text: &str) -> (String, Vec<Vec<f64>>) {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().expect("header").to_string();
    let rows = lines
        .map(|l| {
            l.split(',')
                .map(|f| f.parse().expect("numeric field"))
                .collect()
        })
        .collect();
    (header, rows)
}
