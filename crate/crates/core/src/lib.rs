//! Two-party election with informative advertising and one-step voter
//! cheap talk on homophilous networks: beliefs, echo-chamber cutoffs,
//! party solvers and Monte Carlo validation.

pub mod belief;
pub mod communication;
pub mod params;
pub mod profile;
pub mod simulation;
pub mod strategy;

pub use belief::{Belief, InfoSet, Message, Observation, Vote, VoterClass};
pub use params::{CandidateType, ModelParams, Party, Side, State};
pub use profile::{Advertising, PartyStrategy, StrategyProfile, Technology};
