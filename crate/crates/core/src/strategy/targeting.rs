//! Group-targeted advertising and the technology regime.

use serde::{Deserialize, Serialize};

use crate::params::{CandidateType, ModelParams, Party, Side};
use crate::profile::{Advertising, PartyStrategy, StrategyProfile, Technology};
use crate::strategy::outcome::{informed_fraction, party_utility_with, ExposureLaw};
use crate::strategy::random_ad::{solve_random_ad, uninformed_posterior, SolveError};
use crate::strategy::thresholds::{c_hat_bar, c_star_displayed, kbeta_bar};

/// Points of the x_R grid on which own-side targeting is checked.
pub const OWN_SIDE_GRID: usize = 999;

/// Left side minus right side of the condition under which L would rather
/// target its own supporters than advertise at random, as printed; own-side
/// targeting is dominated where this is <= 0.
pub fn own_side_margin(params: &ModelParams, x_r: f64) -> f64 {
    let (m, s) = (params.m, params.sigma_r);
    let n = params.beta_k(Side::Right) + 1.0;
    let rho_me = 1.0 - uninformed_posterior(params, x_r);
    let gamma = informed_fraction(x_r, params.k, params.beta_r);
    let u_n = (1.0 - x_r).powf(n);
    (1.0 - s) * ((rho_me * gamma / 8.0 - 0.5) * ((2.0 - 3.0 * m) / 2.0))
        + s * (rho_me * (1.0 - 2.0 * u_n) / 8.0) * (1.0 - 2.0 * m)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetingAnalysis {
    /// own_side_margin <= 0 on the whole x_R grid
    pub own_side_dominated: bool,
    pub worst_margin: f64,
    pub c_hat_bar: f64,
    pub kbeta_bar: f64,
    /// Uninformed posterior at the random-advertising equilibrium, where
    /// kbeta_bar and c_star are evaluated.
    pub rho: f64,
    pub c_star: f64,
    pub x_star: f64,
    pub regime: Technology,
}

pub fn targeting_analysis(params: &ModelParams) -> Result<TargetingAnalysis, SolveError> {
    let mut worst = f64::NEG_INFINITY;
    for j in 1..=OWN_SIDE_GRID {
        let x_r = j as f64 / (OWN_SIDE_GRID + 1) as f64;
        worst = worst.max(own_side_margin(params, x_r));
    }
    let eq = solve_random_ad(params)?;
    let rho = uninformed_posterior(params, eq.x);
    let kb = kbeta_bar(params, rho);
    let c_star = c_star_displayed(params, rho);
    let regime = classify(params.beta_k(Side::Left), params.c, kb, c_star, c_hat_bar(params));
    Ok(TargetingAnalysis {
        own_side_dominated: worst <= 0.0,
        worst_margin: worst,
        c_hat_bar: c_hat_bar(params),
        kbeta_bar: kb,
        rho,
        c_star,
        x_star: eq.x,
        regime,
    })
}

/// Random above the richness threshold while c < c*, opponent targeting
/// below it while c < c_hat_bar, no advertising otherwise.
pub fn classify(beta_k: f64, c: f64, kbeta_bar: f64, c_star: f64, c_hat_bar: f64) -> Technology {
    if beta_k >= kbeta_bar {
        if c < c_star {
            return Technology::Random;
        }
    } else if c < c_hat_bar {
        return Technology::TargetOpponentSide;
    }
    Technology::None
}

pub fn predict_regime(params: &ModelParams) -> Result<Technology, SolveError> {
    Ok(targeting_analysis(params)?.regime)
}

/// Symmetric profile both moderates play in a regime; extremists stay silent.
pub fn regime_profile(regime: Technology, x_star: f64) -> StrategyProfile {
    match regime {
        Technology::None | Technology::TargetOwnSide => StrategyProfile::silent(),
        Technology::Random => StrategyProfile::symmetric_random(x_star),
        Technology::TargetOpponentSide => StrategyProfile::symmetric(Advertising::target_opponent()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TechnologyPayoff {
    pub technology: Technology,
    pub intensity: f64,
    pub utility: f64,
}

/// Expected payoff of L's moderate for each technology when R keeps playing
/// `baseline` and voters hold beliefs formed under `baseline`. Random is
/// reported at its best intensity on a grid of `grid + 1` points.
pub fn technology_payoffs(params: &ModelParams, baseline: &StrategyProfile, grid: usize) -> [TechnologyPayoff; 4] {
    let eval = |ad: Advertising| {
        let played = baseline.with(Party::L, PartyStrategy { moderate: ad, ..*baseline.party(Party::L) });
        party_utility_with(&played, baseline, Party::L, CandidateType::Moderate, params, ExposureLaw::MeanField)
    };
    let mut random = TechnologyPayoff { technology: Technology::Random, intensity: 0.0, utility: f64::NEG_INFINITY };
    for j in 0..=grid {
        let x = j as f64 / grid.max(1) as f64;
        let u = eval(Advertising::random(x));
        if u > random.utility {
            random = TechnologyPayoff { technology: Technology::Random, intensity: x, utility: u };
        }
    }
    let one = |t: Technology, ad: Advertising| TechnologyPayoff { technology: t, intensity: ad.intensity, utility: eval(ad) };
    [
        one(Technology::None, Advertising::NONE),
        random,
        one(Technology::TargetOwnSide, Advertising::target_own()),
        one(Technology::TargetOpponentSide, Advertising::target_opponent()),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::State;
    use crate::strategy::outcome::{vote_share_with, win_probability};

    #[test]
    fn baseline_analysis() {
        let p = ModelParams::baseline();
        let a = targeting_analysis(&p).unwrap();
        assert!(a.own_side_dominated);
        assert!((a.c_hat_bar - 0.325).abs() < 1e-12);
        assert!(a.kbeta_bar > 0.0);
        // beta k = 1 is far below the richness threshold
        assert_eq!(a.regime, Technology::TargetOpponentSide);
    }

    #[test]
    fn kbeta_bar_at_rho_point_two() {
        let p = ModelParams::baseline();
        assert!((kbeta_bar(&p, 0.2) - 4.64 / 0.56).abs() < 1e-12);
    }

    #[test]
    fn classification_cells() {
        assert_eq!(classify(10.0, 0.01, 8.0, 0.1, 0.3), Technology::Random);
        assert_eq!(classify(10.0, 0.2, 8.0, 0.1, 0.3), Technology::None);
        assert_eq!(classify(1.0, 0.2, 8.0, 0.1, 0.3), Technology::TargetOpponentSide);
        assert_eq!(classify(1.0, 0.4, 8.0, 0.1, 0.3), Technology::None);
    }

    #[test]
    fn own_side_targeting_leaves_even_odds() {
        let p = ModelParams::baseline();
        let x = solve_random_ad(&p).unwrap().x;
        for baseline in [StrategyProfile::silent(), StrategyProfile::symmetric_random(x)] {
            let played = baseline.with(Party::L, PartyStrategy::moderate(Advertising::target_own()));
            for state in State::ALL.into_iter().filter(|s| s.left == CandidateType::Moderate) {
                let mu = vote_share_with(&played, &baseline, state, &p, ExposureLaw::MeanField);
                assert!((win_probability(mu, &p) - 0.5).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn payoffs_cover_all_technologies() {
        let p = ModelParams::baseline();
        let pay = technology_payoffs(&p, &StrategyProfile::silent(), 100);
        let techs: Vec<_> = pay.iter().map(|t| t.technology).collect();
        assert_eq!(techs, Technology::ALL.to_vec());
        assert!(pay[2].utility <= pay[0].utility);
    }
}
