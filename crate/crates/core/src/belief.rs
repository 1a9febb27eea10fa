//! Voter information, Bayesian beliefs, the indifferent voter and the voting rule.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::params::{CandidateType, ModelParams, Party, Side, State};
use crate::profile::StrategyProfile;

/// What a voter saw of one party's advertising. `SawExtremist` only occurs
/// off the equilibrium path, when an extremist is advertised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Observation {
    SawModerate,
    SawExtremist,
    Nothing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Message {
    M,
    Empty,
}

impl Message {
    pub fn from_bool(informative: bool) -> Message {
        if informative {
            Message::M
        } else {
            Message::Empty
        }
    }

    pub fn is_m(self) -> bool {
        self == Message::M
    }
}

/// Messages about (L, R).
pub type MessagePair = (Message, Message);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("message vectors have lengths {0} and {1}; they must match")]
    MessageLength(usize, usize),
    #[error("effective source count {0} must be at least 1")]
    SourceCount(f64),
    #[error("observation {obs:?} about party {party:?} has probability zero under the profile")]
    ImpossibleObservation { party: Party, obs: Observation },
    #[error("an M message about party {0:?} is impossible: its moderate never advertises")]
    ImpossibleMessage(Party),
}

/// A voter's information: one ad observation per party plus the messages
/// received from credible senders, one slot per sender.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InfoSet {
    pub obs_l: Observation,
    pub obs_r: Observation,
    pub msgs_l: Vec<Message>,
    pub msgs_r: Vec<Message>,
}

impl InfoSet {
    pub fn new(
        obs_l: Observation,
        obs_r: Observation,
        msgs_l: Vec<Message>,
        msgs_r: Vec<Message>,
    ) -> Result<InfoSet, ModelError> {
        if msgs_l.len() != msgs_r.len() {
            return Err(ModelError::MessageLength(msgs_l.len(), msgs_r.len()));
        }
        Ok(InfoSet { obs_l, obs_r, msgs_l, msgs_r })
    }

    /// All slots empty, `k` senders.
    pub fn uninformed(k: usize) -> InfoSet {
        InfoSet::observed(Observation::Nothing, Observation::Nothing, k)
    }

    pub fn observed(obs_l: Observation, obs_r: Observation, k: usize) -> InfoSet {
        InfoSet { obs_l, obs_r, msgs_l: vec![Message::Empty; k], msgs_r: vec![Message::Empty; k] }
    }

    pub fn k(&self) -> usize {
        self.msgs_l.len()
    }

    pub fn obs(&self, party: Party) -> Observation {
        match party {
            Party::L => self.obs_l,
            Party::R => self.obs_r,
        }
    }

    pub fn msgs(&self, party: Party) -> &[Message] {
        match party {
            Party::L => &self.msgs_l,
            Party::R => &self.msgs_r,
        }
    }

    pub fn heard_m(&self, party: Party) -> bool {
        self.msgs(party).iter().any(|m| m.is_m())
    }
}

/// Posterior over the four states, stored as a product of marginals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Belief {
    pub rho_mm: f64,
    pub rho_me: f64,
    pub rho_em: f64,
    pub rho_ee: f64,
}

impl Belief {
    /// Joint belief from P(L moderate) and P(R moderate).
    pub fn from_marginals(p_l: f64, p_r: f64) -> Belief {
        let b = Belief {
            rho_mm: p_l * p_r,
            rho_me: p_l * (1.0 - p_r),
            rho_em: (1.0 - p_l) * p_r,
            rho_ee: (1.0 - p_l) * (1.0 - p_r),
        };
        b.normalized()
    }

    pub fn point(state: State) -> Belief {
        let p = |t| if t == CandidateType::Moderate { 1.0 } else { 0.0 };
        Belief::from_marginals(p(state.left), p(state.right))
    }

    fn normalized(self) -> Belief {
        let s = self.rho_mm + self.rho_me + self.rho_em + self.rho_ee;
        Belief {
            rho_mm: self.rho_mm / s,
            rho_me: self.rho_me / s,
            rho_em: self.rho_em / s,
            rho_ee: self.rho_ee / s,
        }
    }

    pub fn prob(&self, state: State) -> f64 {
        use CandidateType::*;
        match (state.left, state.right) {
            (Moderate, Moderate) => self.rho_mm,
            (Moderate, Extremist) => self.rho_me,
            (Extremist, Moderate) => self.rho_em,
            (Extremist, Extremist) => self.rho_ee,
        }
    }

    /// P(party runs a moderate).
    pub fn moderate(&self, party: Party) -> f64 {
        match party {
            Party::L => self.rho_mm + self.rho_me,
            Party::R => self.rho_mm + self.rho_em,
        }
    }

    pub fn total(&self) -> f64 {
        self.rho_mm + self.rho_me + self.rho_em + self.rho_ee
    }

    pub fn mirrored(&self) -> Belief {
        Belief::from_marginals(self.moderate(Party::R), self.moderate(Party::L))
    }
}

/// P(moderate) after `n` independent silent sources, each reaching with
/// probability `x_m` when the candidate is moderate. `x_e` is the direct
/// reach of an extremist ad (messages never carry extremist news).
/// `n` may be any nonnegative exponent; `n = 0` returns the prior.
pub fn silence_posterior(prior: f64, x_m: f64, n: f64, x_e: f64) -> f64 {
    let a = prior * (1.0 - x_m).powf(n);
    let b = (1.0 - prior) * (1.0 - x_e);
    let den = a + b;
    if den <= 0.0 {
        // silence has probability zero under the profile
        prior
    } else {
        a / den
    }
}

/// Bayes posterior of a voter on `side` holding `info`, with `n_l`, `n_r`
/// effective sources per party (direct exposure counts as one).
pub fn posterior(
    info: &InfoSet,
    side: Side,
    strategies: &StrategyProfile,
    params: &ModelParams,
    n_l: f64,
    n_r: f64,
) -> Result<Belief, ModelError> {
    let mut marg = [0.0; 2];
    for (party, n) in [(Party::L, n_l), (Party::R, n_r)] {
        if !(n >= 1.0) {
            return Err(ModelError::SourceCount(n));
        }
        let x_m = strategies.exposure(party, CandidateType::Moderate, side);
        let x_e = strategies.exposure(party, CandidateType::Extremist, side);
        let obs = info.obs(party);
        marg[party.index()] = match obs {
            Observation::SawModerate if x_m <= 0.0 => {
                return Err(ModelError::ImpossibleObservation { party, obs })
            }
            Observation::SawExtremist if x_e <= 0.0 => {
                return Err(ModelError::ImpossibleObservation { party, obs })
            }
            Observation::SawModerate => 1.0,
            Observation::SawExtremist => 0.0,
            Observation::Nothing if info.heard_m(party) => {
                if !strategies.advertises_moderate(party) {
                    return Err(ModelError::ImpossibleMessage(party));
                }
                1.0
            }
            Observation::Nothing => silence_posterior(strategies.prior(party, params), x_m, n, x_e),
        };
    }
    Ok(Belief::from_marginals(marg[0], marg[1]))
}

/// Bliss point of the indifferent voter.
pub fn indifferent_voter(belief: &Belief, params: &ModelParams) -> f64 {
    indifferent_from_marginals(belief.moderate(Party::L), belief.moderate(Party::R), params.m)
}

/// i* = 1/2 + (E t_L - E t_R)/2 with t in {m/2, m}.
#[inline]
pub fn indifferent_from_marginals(p_l: f64, p_r: f64, m: f64) -> f64 {
    let e = m / 2.0;
    let t_l = p_l * m + (1.0 - p_l) * e;
    let t_r = p_r * m + (1.0 - p_r) * e;
    0.5 + 0.5 * (t_l - t_r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Vote {
    VoteL,
    VoteR,
}

/// Threshold rule; a voter exactly at i* votes L.
pub fn vote(i: f64, belief: &Belief, params: &ModelParams) -> Vote {
    if i <= indifferent_voter(belief, params) {
        Vote::VoteL
    } else {
        Vote::VoteR
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VoterClass {
    PartisanL,
    IndependentL,
    IndependentR,
    PartisanR,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub class: VoterClass,
    pub alpha_l: f64,
    pub alpha_r: f64,
}

/// Ex-post group cutoffs from the uninformed voter's belief.
///
/// alpha_l is the indifferent voter who knows R is moderate but has heard
/// nothing about L, so the relevant moderate probability is L's marginal;
/// alpha_r mirrors it with R's marginal.
pub fn ex_post_cutoffs(belief_uninformed: &Belief, params: &ModelParams) -> (f64, f64) {
    let q = params.m / 4.0;
    let alpha_l = 0.5 - q * (1.0 - belief_uninformed.moderate(Party::L));
    let alpha_r = 0.5 + q * (1.0 - belief_uninformed.moderate(Party::R));
    (alpha_l, alpha_r)
}

/// Boundaries belong to the independent classes; i = 1/2 counts as L.
pub fn classify_voter(i: f64, belief_uninformed: &Belief, params: &ModelParams) -> Classification {
    let (alpha_l, alpha_r) = ex_post_cutoffs(belief_uninformed, params);
    let class = if i < alpha_l {
        VoterClass::PartisanL
    } else if i <= 0.5 {
        VoterClass::IndependentL
    } else if i <= alpha_r {
        VoterClass::IndependentR
    } else {
        VoterClass::PartisanR
    };
    Classification { class, alpha_l, alpha_r }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params() -> ModelParams {
        ModelParams::baseline()
    }

    #[test]
    fn silent_voter_after_one_source() {
        let prof = StrategyProfile::symmetric_random(0.5);
        let b = posterior(&InfoSet::uninformed(0), Side::Left, &prof, &params(), 1.0, 1.0).unwrap();
        assert!((b.moderate(Party::L) - 1.0 / 3.0).abs() < 1e-15);
        assert!((b.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn observation_is_perfect() {
        let prof = StrategyProfile::symmetric_random(0.5);
        let info = InfoSet::observed(Observation::SawModerate, Observation::Nothing, 2);
        let b = posterior(&info, Side::Right, &prof, &params(), 2.0, 2.0).unwrap();
        assert_eq!(b.moderate(Party::L), 1.0);
    }

    #[test]
    fn no_advertising_keeps_prior() {
        let prof = StrategyProfile::silent();
        let b = posterior(&InfoSet::uninformed(1), Side::Left, &prof, &params(), 3.0, 1.0).unwrap();
        assert_eq!(b.moderate(Party::L), 0.5);
        assert_eq!(b.moderate(Party::R), 0.5);
    }

    #[test]
    fn impossible_signals_are_rejected() {
        let prof = StrategyProfile::random(0.0, 0.4);
        let info = InfoSet::observed(Observation::SawModerate, Observation::Nothing, 0);
        assert!(matches!(
            posterior(&info, Side::Left, &prof, &params(), 1.0, 1.0),
            Err(ModelError::ImpossibleObservation { party: Party::L, .. })
        ));
        let mut info = InfoSet::uninformed(1);
        info.msgs_l[0] = Message::M;
        assert!(matches!(
            posterior(&info, Side::Left, &prof, &params(), 1.0, 1.0),
            Err(ModelError::ImpossibleMessage(Party::L))
        ));
        assert!(matches!(
            posterior(&InfoSet::uninformed(0), Side::Left, &prof, &params(), 0.5, 1.0),
            Err(ModelError::SourceCount(_))
        ));
        assert!(InfoSet::new(Observation::Nothing, Observation::Nothing, vec![], vec![Message::M]).is_err());
    }

    #[test]
    fn credible_message_reveals_moderate() {
        let prof = StrategyProfile::symmetric_random(0.3);
        let mut info = InfoSet::uninformed(2);
        info.msgs_r[1] = Message::M;
        let b = posterior(&info, Side::Left, &prof, &params(), 2.0, 2.0).unwrap();
        assert_eq!(b.moderate(Party::R), 1.0);
        assert!(b.moderate(Party::L) < 0.5);
    }

    #[test]
    fn indifferent_voter_examples() {
        let p = params();
        assert_eq!(indifferent_voter(&Belief::point(State::ALL[0]), &p), 0.5);
        let b = Belief::from_marginals(1.0 / 3.0, 1.0);
        let i = indifferent_voter(&b, &p);
        assert!((i - (0.5 - 0.05 * 2.0 / 3.0)).abs() < 1e-15);
        assert_eq!(vote(0.48, &b, &p), Vote::VoteR);
        assert_eq!(vote(0.3, &Belief::point(State::ALL[0]), &p), Vote::VoteL);
        assert_eq!(vote(i, &b, &p), Vote::VoteL);
        assert_eq!(indifferent_voter(&Belief::from_marginals(0.7, 0.7), &p), 0.5);
    }

    #[test]
    fn classification_examples() {
        let p = params();
        let b = Belief::from_marginals(1.0 / 3.0, 1.0 / 3.0);
        let c = classify_voter(0.45, &b, &p);
        assert_eq!(c.class, VoterClass::PartisanL);
        assert!((c.alpha_l - 0.466_666_666_666_666_7).abs() < 1e-12);
        assert!((c.alpha_r - 0.533_333_333_333_333_3).abs() < 1e-12);
        assert_eq!(classify_voter(0.48, &b, &p).class, VoterClass::IndependentL);
        assert_eq!(classify_voter(0.52, &b, &p).class, VoterClass::IndependentR);
        assert_eq!(classify_voter(0.6, &b, &p).class, VoterClass::PartisanR);
        assert_eq!(classify_voter(c.alpha_l, &b, &p).class, VoterClass::IndependentL);
        let full = Belief::from_marginals(1.0, 1.0);
        let c = classify_voter(0.4, &full, &p);
        assert_eq!((c.alpha_l, c.alpha_r), (0.5, 0.5));
    }

    #[test]
    fn benchmark_cutoffs() {
        // k = 0 with x = 1: silence means extremist, cutoffs at 1/2 -+ m/4
        let p = params();
        let prof = StrategyProfile::symmetric_random(1.0);
        let b = posterior(&InfoSet::uninformed(0), Side::Left, &prof, &p, 1.0, 1.0).unwrap();
        let (a_l, a_r) = ex_post_cutoffs(&b, &p);
        assert!((a_l - 0.45).abs() < 1e-15 && (a_r - 0.55).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn beliefs_normalized(p_l in 0.0..=1.0f64, p_r in 0.0..=1.0f64) {
            let b = Belief::from_marginals(p_l, p_r);
            prop_assert!((b.total() - 1.0).abs() <= 1e-12);
            for s in State::ALL {
                prop_assert!((0.0..=1.0).contains(&b.prob(s)));
            }
        }

        #[test]
        fn silence_is_bad_news(sigma in 0.01..0.99f64, x in 0.0..0.99f64, dx in 0.0..0.01f64, n in 1.0..10.0f64, dn in 0.0..3.0f64) {
            let base = silence_posterior(sigma, x, n, 0.0);
            prop_assert!(silence_posterior(sigma, x + dx, n, 0.0) <= base + 1e-15);
            prop_assert!(silence_posterior(sigma, x, n + dn, 0.0) <= base + 1e-15);
        }

        #[test]
        fn indifferent_voter_range_and_mirror(p_l in 0.0..=1.0f64, p_r in 0.0..=1.0f64, m in 0.01..0.24f64) {
            let p = ModelParams { m, tau: 0.01, ..ModelParams::baseline() };
            let b = Belief::from_marginals(p_l, p_r);
            let i = indifferent_voter(&b, &p);
            prop_assert!(i >= 0.5 - m / 4.0 - 1e-15 && i <= 0.5 + m / 4.0 + 1e-15);
            let j = indifferent_voter(&b.mirrored(), &p);
            prop_assert!((i + j - 1.0).abs() < 1e-12);
        }

        #[test]
        fn vote_switches_once(p_l in 0.0..=1.0f64, p_r in 0.0..=1.0f64) {
            let p = params();
            let b = Belief::from_marginals(p_l, p_r);
            let mut switches = 0;
            let mut last = vote(0.0005, &b, &p);
            for j in 1..1000 {
                let v = vote((j as f64 + 0.5) / 1000.0, &b, &p);
                if v != last { switches += 1; last = v; }
            }
            prop_assert_eq!(switches, 1);
        }
    }
}
