//! Model primitives: parties, sides, candidate types, states and parameters.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Party {
    L,
    R,
}

impl Party {
    pub const BOTH: [Party; 2] = [Party::L, Party::R];

    pub fn other(self) -> Party {
        match self {
            Party::L => Party::R,
            Party::R => Party::L,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Party::L => 0,
            Party::R => 1,
        }
    }

    /// The side of the ideological line whose voters lean toward this party.
    pub fn home_side(self) -> Side {
        match self {
            Party::L => Side::Left,
            Party::R => Side::Right,
        }
    }
}

/// Ideological side of a voter: `Left` for bliss points below 1/2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Left, Side::Right];

    pub fn of(i: f64) -> Side {
        if i < 0.5 {
            Side::Left
        } else {
            Side::Right
        }
    }

    pub fn other(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Side::Left => 0,
            Side::Right => 1,
        }
    }

    pub fn leans_to(self) -> Party {
        match self {
            Side::Left => Party::L,
            Side::Right => Party::R,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CandidateType {
    Moderate,
    Extremist,
}

impl CandidateType {
    pub const BOTH: [CandidateType; 2] = [CandidateType::Moderate, CandidateType::Extremist];
}

/// A realized pair of candidate types, theta = (t_L, t_R).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct State {
    pub left: CandidateType,
    pub right: CandidateType,
}

impl State {
    pub const ALL: [State; 4] = [
        State::new(CandidateType::Moderate, CandidateType::Moderate),
        State::new(CandidateType::Moderate, CandidateType::Extremist),
        State::new(CandidateType::Extremist, CandidateType::Moderate),
        State::new(CandidateType::Extremist, CandidateType::Extremist),
    ];

    pub const fn new(left: CandidateType, right: CandidateType) -> State {
        State { left, right }
    }

    pub fn of(&self, party: Party) -> CandidateType {
        match party {
            Party::L => self.left,
            Party::R => self.right,
        }
    }

    pub fn mirrored(&self) -> State {
        State::new(self.right, self.left)
    }

    pub fn label(&self) -> &'static str {
        use CandidateType::*;
        match (self.left, self.right) {
            (Moderate, Moderate) => "mm",
            (Moderate, Extremist) => "me",
            (Extremist, Moderate) => "em",
            (Extremist, Extremist) => "ee",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("m = {0} must lie in (0, 1/2)")]
    ModerateOutOfRange(f64),
    #[error("tau = {0} must be positive")]
    TauNotPositive(f64),
    #[error("m = {m} must be below 1/4 - tau/2 = {bound} (tau = {tau})")]
    DistributionConstraint { m: f64, tau: f64, bound: f64 },
    #[error("{name} = {value} must lie in [0, 1]")]
    PriorOutOfRange { name: &'static str, value: f64 },
    #[error("c = {0} must be positive")]
    CostNotPositive(f64),
    #[error("{name} = {value} must lie in (0, 1)")]
    HomophilyOutOfRange { name: &'static str, value: f64 },
    #[error("parameter {0} is not finite")]
    NotFinite(&'static str),
}

/// All model primitives. The extremist position is always `m / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub m: f64,
    pub sigma_l: f64,
    pub sigma_r: f64,
    pub tau: f64,
    pub c: f64,
    pub k: u32,
    pub z: u32,
    pub beta_l: f64,
    pub beta_r: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams::baseline()
    }
}

impl ModelParams {
    /// m = 0.2, sigma = 0.5, tau = 0.05, c = 0.02, k = 2, beta = 0.5.
    pub fn baseline() -> ModelParams {
        ModelParams {
            m: 0.2,
            sigma_l: 0.5,
            sigma_r: 0.5,
            tau: 0.05,
            c: 0.02,
            k: 2,
            z: 0,
            beta_l: 0.5,
            beta_r: 0.5,
        }
    }

    pub fn symmetric(m: f64, sigma: f64, tau: f64, c: f64, k: u32, beta: f64) -> ModelParams {
        ModelParams {
            m,
            sigma_l: sigma,
            sigma_r: sigma,
            tau,
            c,
            k,
            z: 0,
            beta_l: beta,
            beta_r: beta,
        }
    }

    pub fn validated(self) -> Result<ModelParams, ParamError> {
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        let named = [
            ("m", self.m),
            ("sigma_l", self.sigma_l),
            ("sigma_r", self.sigma_r),
            ("tau", self.tau),
            ("c", self.c),
            ("beta_l", self.beta_l),
            ("beta_r", self.beta_r),
        ];
        for (name, v) in named {
            if !v.is_finite() {
                return Err(ParamError::NotFinite(name));
            }
        }
        if !(self.m > 0.0 && self.m < 0.5) {
            return Err(ParamError::ModerateOutOfRange(self.m));
        }
        if self.tau <= 0.0 {
            return Err(ParamError::TauNotPositive(self.tau));
        }
        let bound = 0.25 - self.tau / 2.0;
        if self.m >= bound {
            return Err(ParamError::DistributionConstraint { m: self.m, tau: self.tau, bound });
        }
        for (name, value) in [("sigma_l", self.sigma_l), ("sigma_r", self.sigma_r)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(ParamError::PriorOutOfRange { name, value });
            }
        }
        if self.c <= 0.0 {
            return Err(ParamError::CostNotPositive(self.c));
        }
        for (name, value) in [("beta_l", self.beta_l), ("beta_r", self.beta_r)] {
            if !(value > 0.0 && value < 1.0) {
                return Err(ParamError::HomophilyOutOfRange { name, value });
            }
        }
        Ok(())
    }

    pub fn e(&self) -> f64 {
        self.m / 2.0
    }

    pub fn is_symmetric(&self) -> bool {
        self.sigma_l == self.sigma_r && self.beta_l == self.beta_r
    }

    pub fn sigma(&self, party: Party) -> f64 {
        match party {
            Party::L => self.sigma_l,
            Party::R => self.sigma_r,
        }
    }

    pub fn beta(&self, side: Side) -> f64 {
        match side {
            Side::Left => self.beta_l,
            Side::Right => self.beta_r,
        }
    }

    /// beta * k for the given side, the expected number of aligned senders.
    pub fn beta_k(&self, side: Side) -> f64 {
        self.beta(side) * self.k as f64
    }

    /// Distance of a candidate type from the center-side end: m or e.
    pub fn type_value(&self, t: CandidateType) -> f64 {
        match t {
            CandidateType::Moderate => self.m,
            CandidateType::Extremist => self.e(),
        }
    }

    /// Enacted policy if `party` wins with a candidate of type `t`.
    pub fn policy(&self, party: Party, t: CandidateType) -> f64 {
        match party {
            Party::L => self.type_value(t),
            Party::R => 1.0 - self.type_value(t),
        }
    }

    /// The same economy with the parties' labels exchanged.
    pub fn mirrored(&self) -> ModelParams {
        ModelParams {
            sigma_l: self.sigma_r,
            sigma_r: self.sigma_l,
            beta_l: self.beta_r,
            beta_r: self.beta_l,
            ..*self
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn baseline_is_valid() {
        assert!(ModelParams::baseline().validate().is_ok());
        assert_eq!(ModelParams::baseline().e(), 0.1);
    }

    #[test]
    fn distribution_constraint_is_cited() {
        let p = ModelParams { m: 0.3, tau: 0.05, ..ModelParams::baseline() };
        let err = p.validate().unwrap_err();
        assert!(matches!(err, ParamError::DistributionConstraint { .. }));
        assert!(err.to_string().contains("1/4 - tau/2"));
    }

    #[test]
    fn rejects_bad_homophily_and_cost() {
        let p = ModelParams { beta_l: 1.0, ..ModelParams::baseline() };
        assert!(matches!(p.validate(), Err(ParamError::HomophilyOutOfRange { name: "beta_l", .. })));
        let p = ModelParams { c: 0.0, ..ModelParams::baseline() };
        assert!(matches!(p.validate(), Err(ParamError::CostNotPositive(_))));
        let p = ModelParams { sigma_r: f64::NAN, ..ModelParams::baseline() };
        assert!(matches!(p.validate(), Err(ParamError::NotFinite("sigma_r"))));
    }

    #[test]
    fn policies() {
        let p = ModelParams::baseline();
        assert_eq!(p.policy(Party::L, CandidateType::Moderate), 0.2);
        assert_eq!(p.policy(Party::R, CandidateType::Extremist), 0.9);
        assert_eq!(Side::of(0.5), Side::Right);
        assert_eq!(Side::of(0.49), Side::Left);
    }
}
