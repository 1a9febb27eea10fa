//! Vote shares, win probabilities and party payoffs.

use serde::{Deserialize, Serialize};

use crate::belief::{indifferent_from_marginals, silence_posterior};
use crate::params::{CandidateType, ModelParams, Party, Side, State};
use crate::profile::StrategyProfile;

/// How network echo enters the probability that a voter learns a
/// moderate's type when her side is reached with probability `d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ExposureLaw {
    /// 1 - (1-d)^(beta k + 1): aligned senders counted fractionally.
    MeanField,
    /// 1 - (1-d)(1 - beta d)^k: each of k links aligned with probability
    /// beta, independently; the expectation of the per-link network.
    PerLink,
}

/// Share of voters informed about a moderate advertised with intensity x.
pub fn informed_fraction(x: f64, k: u32, beta: f64) -> f64 {
    if k == 0 || beta == 0.0 {
        return x;
    }
    1.0 - (1.0 - x).powf(beta * k as f64 + 1.0)
}

pub fn knowledge_prob(d: f64, k: u32, beta: f64, law: ExposureLaw) -> f64 {
    match law {
        ExposureLaw::MeanField => informed_fraction(d, k, beta),
        ExposureLaw::PerLink => 1.0 - (1.0 - d) * (1.0 - beta * d).powi(k as i32),
    }
}

/// Probability that an election with L vote share `mu_star` is won by L.
pub fn win_probability(mu_star: f64, params: &ModelParams) -> f64 {
    let m = params.m;
    if mu_star < 0.5 - m {
        0.0
    } else if mu_star > 0.5 + m {
        1.0
    } else {
        0.5 + (mu_star - 0.5) / (2.0 * m)
    }
}

/// Expected L vote share of a unit-density electorate in `state`.
pub fn vote_share(profile: &StrategyProfile, state: State, params: &ModelParams) -> f64 {
    vote_share_with(profile, profile, state, params, ExposureLaw::MeanField)
}

/// Vote share when `played` generates the ads and voters form beliefs
/// under `believed`.
///
/// Each voter learns a moderate from her own ad or from an aligned sender
/// of her side, an extremist only from her own ad; otherwise she holds the
/// silence posterior. Knowledge is enumerated per side and the measure of
/// that side left of each indifferent voter is added up.
pub fn vote_share_with(
    played: &StrategyProfile,
    believed: &StrategyProfile,
    state: State,
    params: &ModelParams,
    law: ExposureLaw,
) -> f64 {
    let mut share = 0.0;
    for side in Side::BOTH {
        let beta = params.beta(side);
        // (probability, P(moderate)) per party
        let mut branches = [[(0.0, 0.0); 3]; 2];
        for party in Party::BOTH {
            let (know_m, know_e) = match state.of(party) {
                CandidateType::Moderate => {
                    let d = played.exposure(party, CandidateType::Moderate, side);
                    (knowledge_prob(d, params.k, beta, law), 0.0)
                }
                CandidateType::Extremist => (0.0, played.exposure(party, CandidateType::Extremist, side)),
            };
            let silent = silence_posterior(
                believed.prior(party, params),
                believed.exposure(party, CandidateType::Moderate, side),
                params.beta_k(side) + 1.0,
                believed.exposure(party, CandidateType::Extremist, side),
            );
            branches[party.index()] = [(know_m, 1.0), (know_e, 0.0), (1.0 - know_m - know_e, silent)];
        }
        for &(w_l, p_l) in &branches[0] {
            if w_l <= 0.0 {
                continue;
            }
            for &(w_r, p_r) in &branches[1] {
                if w_r <= 0.0 {
                    continue;
                }
                let i_star = indifferent_from_marginals(p_l, p_r, params.m);
                let mass = match side {
                    Side::Left => i_star.clamp(0.0, 0.5),
                    Side::Right => i_star.clamp(0.5, 1.0) - 0.5,
                };
                share += w_l * w_r * mass;
            }
        }
    }
    share
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateOutcome {
    pub state: State,
    pub vote_share_l: f64,
    pub win_prob_l: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElectionOutcome {
    pub vote_share_l: f64,
    pub win_prob_l: f64,
    pub per_state: Vec<StateOutcome>,
}

/// Outcomes per state and their prior-weighted averages.
pub fn election_outcome(profile: &StrategyProfile, params: &ModelParams) -> ElectionOutcome {
    let mut out = ElectionOutcome { vote_share_l: 0.0, win_prob_l: 0.0, per_state: Vec::with_capacity(4) };
    for state in State::ALL {
        let mu = vote_share(profile, state, params);
        let pi = win_probability(mu, params);
        let w = state_weight(profile, params, state);
        out.vote_share_l += w * mu;
        out.win_prob_l += w * pi;
        out.per_state.push(StateOutcome { state, vote_share_l: mu, win_prob_l: pi });
    }
    out
}

fn state_weight(profile: &StrategyProfile, params: &ModelParams, state: State) -> f64 {
    let w = |party: Party| {
        let s = profile.prior(party, params);
        match state.of(party) {
            CandidateType::Moderate => s,
            CandidateType::Extremist => 1.0 - s,
        }
    };
    w(Party::L) * w(Party::R)
}

/// Expected payoff of `party` with a candidate of type `own_type`: win
/// probability times the ideological gain of winning, plus the payoff of
/// losing, averaged over the opponent's type, net of advertising cost.
pub fn party_utility(profile: &StrategyProfile, party: Party, own_type: CandidateType, params: &ModelParams) -> f64 {
    party_utility_with(profile, profile, party, own_type, params, ExposureLaw::MeanField)
}

pub fn party_utility_with(
    played: &StrategyProfile,
    believed: &StrategyProfile,
    party: Party,
    own_type: CandidateType,
    params: &ModelParams,
    law: ExposureLaw,
) -> f64 {
    let opp = party.other();
    let sigma_opp = played.prior(opp, params);
    let e = params.e();
    let t_own = params.type_value(own_type);
    let mut u = 0.0;
    for t_opp in CandidateType::BOTH {
        let w = match t_opp {
            CandidateType::Moderate => sigma_opp,
            CandidateType::Extremist => 1.0 - sigma_opp,
        };
        if w == 0.0 {
            continue;
        }
        let state = match party {
            Party::L => State::new(own_type, t_opp),
            Party::R => State::new(t_opp, own_type),
        };
        let pi_l = win_probability(vote_share_with(played, believed, state, params, law), params);
        let pi = if party == Party::L { pi_l } else { 1.0 - pi_l };
        u += w * state_payoff(pi, t_own, params.type_value(t_opp), e);
    }
    u - params.c * played.party(party).ad(own_type).spend()
}

/// Payoff given the win probability: own type value t_own, opponent's t_opp.
pub fn state_payoff(pi: f64, t_own: f64, t_opp: f64, e: f64) -> f64 {
    pi * (1.0 - t_opp - t_own) + (e - (1.0 - t_opp))
}
