//! Random advertising by the moderate type, symmetric equilibrium.
//!
//! A moderate facing an extremist gains (1/16)(2-3m)(1-rho) per unit of the
//! informed fraction; in the (m, m) state both moderates play the same
//! intensity and the race stays even. Voters form beliefs under the
//! candidate equilibrium, so rho = P(moderate | silence) at x*.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::belief::silence_posterior;
use crate::params::{CandidateType, ModelParams, Party, Side};
use crate::profile::{Advertising, StrategyProfile};
use crate::strategy::outcome::{informed_fraction, party_utility_with, ExposureLaw};
use crate::strategy::thresholds::c0_at;

pub const MAX_ITER: usize = 10_000;
pub const TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("fixed-point iteration did not converge in {iterations} steps (last step {step:e})")]
    NoConvergence { iterations: usize, step: f64 },
    #[error("parameters violate the solver's assumption: {0}")]
    Assumption(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomAd {
    pub x: f64,
    pub advertise: bool,
    /// Uninformed posterior that a party is moderate, at x.
    pub rho: f64,
    /// |FOC| at an interior x, 0 at a corner.
    pub residual: f64,
    pub iterations: usize,
}

/// P(moderate | silent) for the uninformed voter under intensity x.
pub fn uninformed_posterior(params: &ModelParams, x: f64) -> f64 {
    silence_posterior(params.sigma_l, x, params.beta_k(Side::Left) + 1.0, 0.0)
}

/// Marginal benefit minus marginal cost of intensity at x, beliefs at rho.
pub fn foc(params: &ModelParams, rho: f64, x: f64) -> f64 {
    let n = params.beta_k(Side::Left) + 1.0;
    (1.0 - params.sigma_l) * (2.0 - 3.0 * params.m) * (1.0 - rho) * n * (1.0 - x).powf(n - 1.0) / 16.0 - params.c
}

/// Optimal intensity when voters hold belief rho.
pub fn best_response(params: &ModelParams, rho: f64) -> f64 {
    let bk = params.beta_k(Side::Left);
    let scale = (1.0 - params.sigma_l) * (2.0 - 3.0 * params.m) * (1.0 - rho) * (bk + 1.0) / 16.0;
    if scale <= params.c {
        return 0.0;
    }
    (1.0 - (params.c / scale).powf(1.0 / bk)).clamp(0.0, 1.0)
}

/// Symmetric random-advertising equilibrium. With k = 0 the payoff is
/// linear in x and the rule is bang-bang at c0.
pub fn solve_random_ad(params: &ModelParams) -> Result<RandomAd, SolveError> {
    solve_random_ad_capped(params, MAX_ITER)
}

pub fn solve_random_ad_capped(params: &ModelParams, max_iter: usize) -> Result<RandomAd, SolveError> {
    if !params.is_symmetric() {
        return Err(SolveError::Assumption("symmetric sigma and beta"));
    }
    if params.k == 0 {
        let advertise = params.c <= c0_at(params, uninformed_posterior(params, 1.0));
        let x = if advertise { 1.0 } else { 0.0 };
        return Ok(RandomAd { x, advertise, rho: uninformed_posterior(params, x), residual: 0.0, iterations: 0 });
    }
    // The map x -> best_response(rho(x)) is increasing, so iterating from
    // x = 1 descends monotonically to the largest equilibrium.
    let damping = 0.5;
    let mut x = 1.0;
    let mut iterations = 0;
    loop {
        let next = best_response(params, uninformed_posterior(params, x));
        let step = next - x;
        x += damping * step;
        if next == 0.0 && x < TOL {
            x = 0.0;
            break;
        }
        iterations += 1;
        if step.abs() < TOL * 1e-3 {
            break;
        }
        if iterations >= max_iter {
            return Err(SolveError::NoConvergence { iterations, step: step.abs() });
        }
    }
    let x = polish(params, x);
    let rho = uninformed_posterior(params, x);
    if x <= 0.0 {
        return Ok(RandomAd { x: 0.0, advertise: false, rho, residual: 0.0, iterations });
    }
    let residual = foc(params, rho, x).abs();
    let advertise = participates(params, rho, x);
    Ok(RandomAd { x, advertise, rho, residual, iterations })
}

/// Bisection on x - best_response(rho(x)) near the iterate.
fn polish(params: &ModelParams, x: f64) -> f64 {
    let g = |x: f64| x - best_response(params, uninformed_posterior(params, x));
    if g(x) == 0.0 || x <= 0.0 {
        return x.max(0.0);
    }
    let w = 1e-6;
    let (mut a, mut b) = ((x - w).max(0.0), (x + w).min(1.0));
    if g(a) > 0.0 || g(b) < 0.0 {
        return x;
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if g(mid) < 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

/// c x < (1-rho)(2-3m+sigma m)(1-(1-x)^(beta k+1))/16, as printed.
pub fn participates(params: &ModelParams, rho: f64, x: f64) -> bool {
    let (m, s) = (params.m, params.sigma_l);
    let gamma = informed_fraction(x, params.k, params.beta_l);
    params.c * x < (1.0 - rho) * (2.0 - 3.0 * m + s * m) * gamma / 16.0
}

/// Payoff of L's moderate when both moderates advertise at x and voters
/// believe the intensity is `x_believed`.
pub fn random_ad_payoff(params: &ModelParams, x_believed: f64, x: f64) -> f64 {
    party_utility_with(
        &StrategyProfile::symmetric_random(x),
        &StrategyProfile::symmetric_random(x_believed),
        Party::L,
        CandidateType::Moderate,
        params,
        ExposureLaw::MeanField,
    )
}

/// U(advertise the extremist at x_e) - U(stay silent) for L's extremist,
/// R and voter beliefs as in `baseline`. Negative everywhere: revealing an
/// extremist only costs votes and money.
pub fn extremist_ad_gap(params: &ModelParams, baseline: &StrategyProfile, x_e: f64) -> f64 {
    let mut played = *baseline;
    played.party_mut(Party::L).extremist = Advertising::random(x_e);
    let u = |prof: &StrategyProfile| {
        party_utility_with(prof, baseline, Party::L, CandidateType::Extremist, params, ExposureLaw::MeanField)
    };
    u(&played) - u(baseline)
}
