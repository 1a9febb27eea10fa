//! Closed-form cost thresholds.

use serde::{Deserialize, Serialize};

use crate::params::{ModelParams, Side};

/// (c0, c_tau): random advertising with k = 0 pays below c0; c_tau bounds
/// the targeted benchmark. c0 uses the beliefs of the x = 1 equilibrium.
pub fn benchmark_thresholds(params: &ModelParams) -> (f64, f64) {
    (c0_at(params, 0.0), c_tau(params))
}

/// c0 with the uninformed posterior `rho` that L's candidate is moderate.
pub fn c0_at(params: &ModelParams, rho: f64) -> f64 {
    (1.0 - params.sigma_l) * (2.0 - 3.0 * params.m) * (1.0 - rho) / 16.0
}

pub fn c_tau(params: &ModelParams) -> f64 {
    let (m, s) = (params.m, params.sigma_l);
    (2.0 - 3.0 * m - s * m) / 4.0
}

/// Displayed random-advertising threshold for k >= 1.
pub fn c_star_displayed(params: &ModelParams, rho: f64) -> f64 {
    let n = params.beta_k(Side::Left) + 1.0;
    (2.0 - 3.0 * params.m) * (1.0 - params.sigma_l) * n * (1.0 - rho) / 16.0
}

/// One-sided opponent targeting against a silent rival.
pub fn c_hat(params: &ModelParams) -> f64 {
    (2.0 - 3.0 * params.m) * (1.0 - params.sigma_l) / 4.0
}

/// Opponent targeting when both parties may target.
pub fn c_hat_bar(params: &ModelParams) -> f64 {
    c_tau(params)
}

/// Network richness beyond which random advertising is preferred to
/// opponent targeting: where the random-advertising threshold overtakes
/// `c_hat_bar`.
pub fn kbeta_bar(params: &ModelParams, rho: f64) -> f64 {
    let (m, s) = (params.m, params.sigma_l);
    let a = 2.0 - 3.0 * m;
    let num = a * ((2.0 + (1.0 - rho) * s) + (1.0 + rho)) - 4.0 * m * s;
    num / (a * (1.0 - rho) * (1.0 - s))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mixing {
    pub zeta: f64,
    /// false when the printed value leaves [0, 1]
    pub in_range: bool,
}

/// Mixing probability between the two pure strategies, as printed.
pub fn mixing_probability(params: &ModelParams) -> Mixing {
    let (m, c) = (params.m, params.c);
    let zeta = (1.0 - m + 2.0 * c) / (1.0 - 2.0 * m);
    Mixing { zeta, in_range: (0.0..=1.0).contains(&zeta) }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub c0: f64,
    pub c_tau: f64,
    pub c_star: f64,
    pub c_hat_bar: f64,
    pub c_bar: f64,
    pub kbeta_bar: f64,
    pub zeta: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(sigma: f64, m: f64) -> ModelParams {
        ModelParams { m, sigma_l: sigma, sigma_r: sigma, tau: 0.01, ..ModelParams::baseline() }
    }

    #[test]
    fn benchmark_values() {
        let (c0, ct) = benchmark_thresholds(&p(0.5, 0.2));
        assert!((c0 - 0.04375).abs() < 1e-12);
        assert!((ct - 0.325).abs() < 1e-12);
        assert!(benchmark_thresholds(&p(1.0, 0.2)).0.abs() < 1e-15);
        assert!((c_hat_bar(&p(0.5, 0.2)) - 0.325).abs() < 1e-12);
    }

    #[test]
    fn ordering_on_grid() {
        for i in 1..10 {
            for j in 1..=24 {
                let (c0, ct) = benchmark_thresholds(&p(i as f64 / 10.0, j as f64 / 100.0));
                assert!(c0 < ct && c0 >= 0.0);
            }
        }
    }

    #[test]
    fn kbeta_bar_footnote() {
        let v = kbeta_bar(&p(0.5, 0.2), 0.2);
        assert!((v - 4.64 / 0.56).abs() < 1e-12);
        // it is the crossing of the random-advertising threshold with c_hat_bar
        let q = ModelParams { k: 1, beta_l: 0.5, beta_r: 0.5, ..p(0.5, 0.2) };
        let n_minus_1 = v;
        let c_star = (2.0 - 0.6) * 0.5 * (n_minus_1 + 1.0) * 0.8 / 16.0;
        assert!((c_star - c_hat_bar(&q)).abs() < 1e-12);
    }

    #[test]
    fn zeta_is_printed_value() {
        let z = mixing_probability(&ModelParams { c: 0.05, ..p(0.5, 0.2) });
        assert!((z.zeta - 1.5).abs() < 1e-12);
        assert!(!z.in_range);
        // never reaches 1 for positive c
        for j in 1..24 {
            for c in [1e-6, 0.01, 0.1] {
                let z = mixing_probability(&ModelParams { c, ..p(0.5, j as f64 / 100.0) });
                assert!(z.zeta > 1.0);
            }
        }
        let z = mixing_probability(&ModelParams { c: 1e-9, ..p(0.5, 1e-9) });
        assert!((z.zeta - 1.0).abs() < 1e-8);
    }
}
