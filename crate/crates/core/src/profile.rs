//! Advertising strategies of both parties.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::params::{CandidateType, ModelParams, Party, Side};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Technology {
    None,
    Random,
    TargetOwnSide,
    TargetOpponentSide,
}

impl Technology {
    pub const ALL: [Technology; 4] = [
        Technology::None,
        Technology::Random,
        Technology::TargetOwnSide,
        Technology::TargetOpponentSide,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Technology::None => "none",
            Technology::Random => "random",
            Technology::TargetOwnSide => "target_own",
            Technology::TargetOpponentSide => "target_opponent",
        }
    }
}

/// Advertising action of one candidate type. `intensity` is the reach
/// probability for `Random` and is ignored otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Advertising {
    pub technology: Technology,
    pub intensity: f64,
}

impl Advertising {
    pub const NONE: Advertising = Advertising { technology: Technology::None, intensity: 0.0 };

    pub fn random(x: f64) -> Advertising {
        Advertising { technology: Technology::Random, intensity: x }
    }

    pub fn target_own() -> Advertising {
        Advertising { technology: Technology::TargetOwnSide, intensity: 1.0 }
    }

    pub fn target_opponent() -> Advertising {
        Advertising { technology: Technology::TargetOpponentSide, intensity: 1.0 }
    }

    pub fn of(technology: Technology, x: f64) -> Advertising {
        match technology {
            Technology::None => Advertising::NONE,
            Technology::Random => Advertising::random(x),
            Technology::TargetOwnSide => Advertising::target_own(),
            Technology::TargetOpponentSide => Advertising::target_opponent(),
        }
    }

    /// Probability that a voter on `side` sees the ad of `party`.
    pub fn reach(&self, party: Party, side: Side) -> f64 {
        match self.technology {
            Technology::None => 0.0,
            Technology::Random => self.intensity,
            Technology::TargetOwnSide => {
                if side == party.home_side() {
                    1.0
                } else {
                    0.0
                }
            }
            Technology::TargetOpponentSide => {
                if side == party.home_side() {
                    0.0
                } else {
                    1.0
                }
            }
        }
    }

    /// Advertising spend in units of the unit cost: the intensity for
    /// random reach, one for a targeted campaign.
    pub fn spend(&self) -> f64 {
        match self.technology {
            Technology::None => 0.0,
            Technology::Random => self.intensity,
            Technology::TargetOwnSide | Technology::TargetOpponentSide => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartyStrategy {
    pub moderate: Advertising,
    pub extremist: Advertising,
    /// Probability of fielding a moderate; `None` means the prior in the params.
    pub select_moderate: Option<f64>,
}

impl PartyStrategy {
    pub const SILENT: PartyStrategy = PartyStrategy {
        moderate: Advertising::NONE,
        extremist: Advertising::NONE,
        select_moderate: None,
    };

    pub fn moderate(ad: Advertising) -> PartyStrategy {
        PartyStrategy { moderate: ad, ..PartyStrategy::SILENT }
    }

    pub fn ad(&self, t: CandidateType) -> &Advertising {
        match t {
            CandidateType::Moderate => &self.moderate,
            CandidateType::Extremist => &self.extremist,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProfileError {
    #[error("intensity {value} for party {party:?} must lie in [0, 1]")]
    Intensity { party: Party, value: f64 },
    #[error("selection probability {value} for party {party:?} must lie in [0, 1]")]
    Selection { party: Party, value: f64 },
}

/// Type-contingent advertising of both parties.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrategyProfile {
    pub left: PartyStrategy,
    pub right: PartyStrategy,
}

impl Default for StrategyProfile {
    fn default() -> Self {
        StrategyProfile::silent()
    }
}

impl StrategyProfile {
    pub fn silent() -> StrategyProfile {
        StrategyProfile { left: PartyStrategy::SILENT, right: PartyStrategy::SILENT }
    }

    /// Both moderates advertise at random with intensity `x`.
    pub fn symmetric_random(x: f64) -> StrategyProfile {
        StrategyProfile::random(x, x)
    }

    pub fn random(x_l: f64, x_r: f64) -> StrategyProfile {
        StrategyProfile {
            left: PartyStrategy::moderate(Advertising::random(x_l)),
            right: PartyStrategy::moderate(Advertising::random(x_r)),
        }
    }

    pub fn symmetric(ad: Advertising) -> StrategyProfile {
        StrategyProfile { left: PartyStrategy::moderate(ad), right: PartyStrategy::moderate(ad) }
    }

    pub fn party(&self, party: Party) -> &PartyStrategy {
        match party {
            Party::L => &self.left,
            Party::R => &self.right,
        }
    }

    pub fn party_mut(&mut self, party: Party) -> &mut PartyStrategy {
        match party {
            Party::L => &mut self.left,
            Party::R => &mut self.right,
        }
    }

    pub fn with(mut self, party: Party, strategy: PartyStrategy) -> StrategyProfile {
        *self.party_mut(party) = strategy;
        self
    }

    pub fn with_selection(mut self, sigma: f64) -> StrategyProfile {
        self.left.select_moderate = Some(sigma);
        self.right.select_moderate = Some(sigma);
        self
    }

    /// Prior probability that `party` runs a moderate.
    pub fn prior(&self, party: Party, params: &ModelParams) -> f64 {
        self.party(party).select_moderate.unwrap_or_else(|| params.sigma(party))
    }

    /// Probability that a voter on `side` is directly reached by the ad of
    /// `party` when its candidate has type `t`.
    pub fn exposure(&self, party: Party, t: CandidateType, side: Side) -> f64 {
        self.party(party).ad(t).reach(party, side)
    }

    /// Whether the moderate of `party` reaches anyone at all.
    pub fn advertises_moderate(&self, party: Party) -> bool {
        Side::BOTH.iter().any(|&s| self.exposure(party, CandidateType::Moderate, s) > 0.0)
    }

    pub fn mirrored(&self) -> StrategyProfile {
        StrategyProfile { left: self.right, right: self.left }
    }

    pub fn validate(&self) -> Result<(), ProfileError> {
        for party in Party::BOTH {
            let st = self.party(party);
            for ad in [st.moderate, st.extremist] {
                if !(0.0..=1.0).contains(&ad.intensity) {
                    return Err(ProfileError::Intensity { party, value: ad.intensity });
                }
            }
            if let Some(s) = st.select_moderate {
                if !(0.0..=1.0).contains(&s) {
                    return Err(ProfileError::Selection { party, value: s });
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use CandidateType::*;

    #[test]
    fn targeted_reach_is_side_specific() {
        let p = StrategyProfile::silent().with(Party::L, PartyStrategy::moderate(Advertising::target_opponent()));
        assert_eq!(p.exposure(Party::L, Moderate, Side::Right), 1.0);
        assert_eq!(p.exposure(Party::L, Moderate, Side::Left), 0.0);
        assert_eq!(p.exposure(Party::L, Extremist, Side::Right), 0.0);
        let own = StrategyProfile::silent().with(Party::R, PartyStrategy::moderate(Advertising::target_own()));
        assert_eq!(own.exposure(Party::R, Moderate, Side::Right), 1.0);
        assert_eq!(own.exposure(Party::R, Moderate, Side::Left), 0.0);
    }

    #[test]
    fn validation() {
        assert!(StrategyProfile::symmetric_random(1.2).validate().is_err());
        assert!(StrategyProfile::symmetric_random(0.3).with_selection(-0.1).validate().is_err());
        assert!(StrategyProfile::symmetric_random(0.3).validate().is_ok());
    }

    #[test]
    fn prior_override() {
        let params = ModelParams::baseline();
        let p = StrategyProfile::symmetric_random(0.3).with_selection(0.8);
        assert_eq!(p.prior(Party::L, &params), 0.8);
        assert_eq!(StrategyProfile::silent().prior(Party::R, &params), 0.5);
    }
}
