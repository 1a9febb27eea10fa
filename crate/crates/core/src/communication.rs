//! One-step cheap talk between a sender and a receiver.
//!
//! The sender acts as if the receiver's vote decides the election. She
//! knows what she saw; for a party she did not observe she forms the
//! silence posterior with her own link's weight `beta` as exponent. The
//! receiver may still learn a moderate's type from her other sources (her
//! ad plus the other senders, `beta (k-1) + 1` of them), and if she stays
//! uninformed she uses the posterior with `beta k + 1` silent sources.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::belief::{
    indifferent_from_marginals, silence_posterior, InfoSet, Message, MessagePair, Observation,
};
use crate::params::{CandidateType, ModelParams, Party, Side};
use crate::profile::StrategyProfile;

const TIE: f64 = 1e-12;

/// Sender information sets, as (saw L moderate, saw R moderate).
pub const CANONICAL_INFO: [[bool; 2]; 4] = [[true, true], [true, false], [false, true], [false, false]];

/// Message pairs in tie-break order: fewer M first, then L before R.
const PAIRS: [[bool; 2]; 4] = [[false, false], [true, false], [false, true], [true, true]];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CommError {
    #[error("claim M about party {0:?}, whose moderate never advertises")]
    NeverAdvertised(Party),
    #[error("sender observation {0:?} is outside the message space")]
    ExtremistObservation(Observation),
    #[error("sender saw a moderate of party {0:?} that is not advertised on her side")]
    ImpossibleObservation(Party),
    #[error("the communication stage needs k >= 1, got {0}")]
    NoSenders(u32),
    #[error("bliss point {0} must lie in (0, 1)")]
    BlissOutOfRange(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SenderContext {
    pub s: f64,
    pub info: InfoSet,
    pub r: f64,
    pub strategies: StrategyProfile,
    pub params: ModelParams,
    /// The receiver's total number of senders.
    pub k: u32,
    pub beta: f64,
}

impl SenderContext {
    fn checked(&self) -> Result<(Channel, [bool; 2]), CommError> {
        if self.k < 1 {
            return Err(CommError::NoSenders(self.k));
        }
        for v in [self.s, self.r] {
            if !(v > 0.0 && v < 1.0) {
                return Err(CommError::BlissOutOfRange(v));
            }
        }
        let ch = Channel::new(&self.params, &self.strategies, Side::of(self.s), Side::of(self.r), self.k, self.beta);
        let mut obs = [false; 2];
        for party in Party::BOTH {
            match self.info.obs(party) {
                Observation::SawExtremist => return Err(CommError::ExtremistObservation(Observation::SawExtremist)),
                Observation::SawModerate => {
                    if !ch.sender_sees[party.index()] {
                        return Err(CommError::ImpossibleObservation(party));
                    }
                    obs[party.index()] = true;
                }
                Observation::Nothing => {}
            }
        }
        Ok((ch, obs))
    }
}

fn to_bits(pair: MessagePair) -> [bool; 2] {
    [pair.0.is_m(), pair.1.is_m()]
}

fn to_pair(bits: [bool; 2]) -> MessagePair {
    (Message::from_bool(bits[0]), Message::from_bool(bits[1]))
}

/// Pivotal-receiver expected payoff of sending `pair`.
pub fn sender_payoff(ctx: &SenderContext, pair: MessagePair) -> Result<f64, CommError> {
    let (ch, obs) = ctx.checked()?;
    ch.payoff(ctx.s, ctx.r, obs, to_bits(pair))
}

/// Payoff-maximizing pair; ties go to the truthful pair, then to fewer M.
pub fn best_message(ctx: &SenderContext) -> Result<MessagePair, CommError> {
    let (ch, obs) = ctx.checked()?;
    Ok(to_pair(ch.best_message(ctx.s, ctx.r, obs)))
}

/// Truthful reporting is optimal for the sender's actual information and
/// for every other information set she could have had; otherwise the
/// receiver cannot rely on the report.
pub fn ic_truthful(ctx: &SenderContext) -> Result<bool, CommError> {
    let (ch, obs) = ctx.checked()?;
    Ok(ch.truthful_for(ctx.s, ctx.r, obs) && ch.ic_truthful(ctx.s, ctx.r))
}

/// Precomputed sender-receiver game for given sides and profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Channel {
    /// Sender's P(moderate) for a party she did not observe.
    sender_belief: [f64; 2],
    /// P(receiver learns a moderate from her other sources).
    learn: [f64; 2],
    /// Indifferent voter by receiver knowledge [knows L][knows R].
    istar: [[f64; 2]; 2],
    advertised: [bool; 2],
    sender_sees: [bool; 2],
    m: f64,
}

impl Channel {
    pub fn new(
        params: &ModelParams,
        profile: &StrategyProfile,
        sender_side: Side,
        receiver_side: Side,
        k: u32,
        beta: f64,
    ) -> Channel {
        let k = k as f64;
        let n_other = (beta * (k - 1.0) + 1.0).max(1.0);
        let n_recv = beta * k + 1.0;
        let mut sender_belief = [0.0; 2];
        let mut learn = [0.0; 2];
        let mut recv_silent = [0.0; 2];
        let mut advertised = [false; 2];
        let mut sender_sees = [false; 2];
        for party in Party::BOTH {
            let j = party.index();
            let prior = profile.prior(party, params);
            let xs = profile.exposure(party, CandidateType::Moderate, sender_side);
            let xs_e = profile.exposure(party, CandidateType::Extremist, sender_side);
            let xr = profile.exposure(party, CandidateType::Moderate, receiver_side);
            let xr_e = profile.exposure(party, CandidateType::Extremist, receiver_side);
            sender_belief[j] = silence_posterior(prior, xs, beta, xs_e);
            learn[j] = 1.0 - (1.0 - xr).powf(n_other);
            recv_silent[j] = silence_posterior(prior, xr, n_recv, xr_e);
            advertised[j] = profile.advertises_moderate(party);
            sender_sees[j] = xs > 0.0;
        }
        let mut istar = [[0.0; 2]; 2];
        for (kl, row) in istar.iter_mut().enumerate() {
            for (kr, v) in row.iter_mut().enumerate() {
                let p_l = if kl == 1 { 1.0 } else { recv_silent[0] };
                let p_r = if kr == 1 { 1.0 } else { recv_silent[1] };
                *v = indifferent_from_marginals(p_l, p_r, params.m);
            }
        }
        Channel { sender_belief, learn, istar, advertised, sender_sees, m: params.m }
    }

    /// Receiver's indifferent voter by what she knows about (L, R).
    pub fn istar(&self, knows_l: bool, knows_r: bool) -> f64 {
        self.istar[knows_l as usize][knows_r as usize]
    }

    pub fn sender_can_observe(&self, party: Party) -> bool {
        self.sender_sees[party.index()]
    }

    pub fn payoff(&self, s: f64, r: f64, obs: [bool; 2], pair: [bool; 2]) -> Result<f64, CommError> {
        for party in Party::BOTH {
            if pair[party.index()] && !self.advertised[party.index()] {
                return Err(CommError::NeverAdvertised(party));
            }
        }
        Ok(self.payoff_unchecked(s, r, obs, pair))
    }

    #[inline]
    fn payoff_unchecked(&self, s: f64, r: f64, obs: [bool; 2], pair: [bool; 2]) -> f64 {
        let e = self.m / 2.0;
        let types = [self.m, e];
        let mut total = 0.0;
        for (il, &t_l) in types.iter().enumerate() {
            let b_l = if obs[0] { 1.0 } else { self.sender_belief[0] };
            let w_l = if il == 0 { b_l } else { 1.0 - b_l };
            if w_l == 0.0 {
                continue;
            }
            // learning is only possible about a moderate
            let learn_l = if il == 0 { self.learn[0] } else { 0.0 };
            for (ir, &t_r) in types.iter().enumerate() {
                let b_r = if obs[1] { 1.0 } else { self.sender_belief[1] };
                let w_r = if ir == 0 { b_r } else { 1.0 - b_r };
                if w_r == 0.0 {
                    continue;
                }
                let learn_r = if ir == 0 { self.learn[1] } else { 0.0 };
                let u_l = -(s - t_l).abs();
                let u_r = -(s - (1.0 - t_r)).abs();
                let mut acc = 0.0;
                for ll in [false, true] {
                    let p_ll = if ll { learn_l } else { 1.0 - learn_l };
                    if p_ll == 0.0 {
                        continue;
                    }
                    for lr in [false, true] {
                        let p_lr = if lr { learn_r } else { 1.0 - learn_r };
                        if p_lr == 0.0 {
                            continue;
                        }
                        let kl = pair[0] || ll;
                        let kr = pair[1] || lr;
                        let u = if r <= self.istar(kl, kr) { u_l } else { u_r };
                        acc += p_ll * p_lr * u;
                    }
                }
                total += w_l * w_r * acc;
            }
        }
        total
    }

    /// Best pair for a sender with observations `obs`.
    pub fn best_message(&self, s: f64, r: f64, obs: [bool; 2]) -> [bool; 2] {
        let mut vals = [f64::NEG_INFINITY; 4];
        let mut best = f64::NEG_INFINITY;
        for (v, pair) in vals.iter_mut().zip(PAIRS) {
            if (pair[0] && !self.advertised[0]) || (pair[1] && !self.advertised[1]) {
                continue;
            }
            *v = self.payoff_unchecked(s, r, obs, pair);
            best = best.max(*v);
        }
        let near = |v: f64| v >= best - TIE;
        if let Some(i) = PAIRS.iter().position(|&p| p == obs) {
            if near(vals[i]) {
                return obs;
            }
        }
        for (v, pair) in vals.iter().zip(PAIRS) {
            if near(*v) {
                return pair;
            }
        }
        unreachable!("the empty pair is always admissible")
    }

    pub fn truthful_for(&self, s: f64, r: f64, obs: [bool; 2]) -> bool {
        self.best_message(s, r, obs) == obs
    }

    /// Whether `obs` can occur for this sender under the profile.
    pub fn possible(&self, obs: [bool; 2]) -> bool {
        (!obs[0] || self.sender_sees[0]) && (!obs[1] || self.sender_sees[1])
    }

    /// Joint credibility: truthful for every possible information set.
    pub fn ic_truthful(&self, s: f64, r: f64) -> bool {
        CANONICAL_INFO.iter().all(|&obs| !self.possible(obs) || self.truthful_for(s, r, obs))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChamberSide {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EchoChamber {
    pub q_l: f64,
    pub q_r: f64,
    pub side: ChamberSide,
}

impl EchoChamber {
    /// Open interval of the chamber.
    pub fn interval(&self) -> (f64, f64) {
        match self.side {
            ChamberSide::Left => (self.q_l, 0.5),
            ChamberSide::Right => (0.5, self.q_r),
        }
    }

    pub fn contains(&self, i: f64) -> bool {
        let (a, b) = self.interval();
        i > a && i < b
    }
}

/// Cutoffs for random advertising with intensities `x_l`, `x_r`.
pub fn echo_cutoffs(params: &ModelParams, x_l: f64, x_r: f64) -> (EchoChamber, EchoChamber) {
    let k = params.k as f64;
    let quarter = params.m / 4.0;
    let width = |sigma: f64, x: f64, beta: f64| {
        (1.0 - sigma) / (1.0 - sigma + sigma * (1.0 - x).powf(beta * k + 1.0))
    };
    let q_l = 0.5 - quarter * width(params.sigma_l, x_l, params.beta_l);
    let q_r = 0.5 + quarter * width(params.sigma_r, x_r, params.beta_r);
    (
        EchoChamber { q_l, q_r, side: ChamberSide::Left },
        EchoChamber { q_l, q_r, side: ChamberSide::Right },
    )
}

/// Cutoffs for any profile: the indifferent voter on each side who knows the
/// opponent is moderate but heard nothing about her own party.
pub fn profile_cutoffs(params: &ModelParams, profile: &StrategyProfile) -> (f64, f64) {
    let silent = |party: Party, side: Side| {
        silence_posterior(
            profile.prior(party, params),
            profile.exposure(party, CandidateType::Moderate, side),
            params.beta_k(side) + 1.0,
            profile.exposure(party, CandidateType::Extremist, side),
        )
    };
    let q_l = indifferent_from_marginals(silent(Party::L, Side::Left), 1.0, params.m);
    let q_r = indifferent_from_marginals(1.0, silent(Party::R, Side::Right), params.m);
    (q_l, q_r)
}

/// Analytic credibility: partisan receivers, or both inside the same chamber.
pub fn analytic_truthful(s: f64, r: f64, q_l: f64, q_r: f64) -> bool {
    r < q_l || r > q_r || (s > q_l && s < 0.5 && r > q_l && r < 0.5) || (s > 0.5 && s < q_r && r > 0.5 && r < q_r)
}

/// Brute-force truthful region on a cell-centered (s, r) grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TruthfulRegion {
    pub n: usize,
    /// bit j set when the sender with `CANONICAL_INFO[j]` reports truthfully
    /// (impossible information sets count as truthful).
    cells: Vec<u8>,
}

impl TruthfulRegion {
    pub fn step(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn center(&self, i: usize) -> f64 {
        (i as f64 + 0.5) / self.n as f64
    }

    fn bits(&self, i_s: usize, i_r: usize) -> u8 {
        self.cells[i_s * self.n + i_r]
    }

    pub fn truthful(&self, i_s: usize, i_r: usize, info: usize) -> bool {
        self.bits(i_s, i_r) & (1 << info) != 0
    }

    pub fn joint(&self, i_s: usize, i_r: usize) -> bool {
        self.bits(i_s, i_r) == 0b1111
    }

    /// Cells (s, r, info index) where reporting is truthful.
    pub fn cells(&self) -> impl Iterator<Item = (f64, f64, usize)> + '_ {
        (0..self.n).flat_map(move |a| {
            (0..self.n).flat_map(move |b| {
                (0..4).filter(move |&j| self.truthful(a, b, j)).map(move |j| (self.center(a), self.center(b), j))
            })
        })
    }

    pub fn joint_count(&self) -> usize {
        self.cells.iter().filter(|&&b| b == 0b1111).count()
    }

    /// Disagreements with the analytic classification, skipping cells whose
    /// closed extent in s or r contains 1/2 or a cutoff.
    pub fn mismatches(&self, q_l: f64, q_r: f64) -> RegionComparison {
        let h = self.step() / 2.0;
        let touches = |v: f64| [q_l, 0.5, q_r].iter().any(|&c| (v - c).abs() <= h);
        let mut cmp = RegionComparison::default();
        for a in 0..self.n {
            let s = self.center(a);
            if touches(s) {
                continue;
            }
            for b in 0..self.n {
                let r = self.center(b);
                if touches(r) {
                    continue;
                }
                cmp.compared += 1;
                if self.joint(a, b) != analytic_truthful(s, r, q_l, q_r) {
                    cmp.mismatches += 1;
                }
            }
        }
        cmp
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionComparison {
    pub compared: usize,
    pub mismatches: usize,
}

/// Evaluates the sender game on every grid cell for each canonical sender
/// information set. Rows are computed in parallel; the result does not
/// depend on scheduling.
pub fn map_truthful_region(params: &ModelParams, strategies: &StrategyProfile, grid_step: f64) -> TruthfulRegion {
    assert!(grid_step > 0.0 && grid_step <= 0.01, "grid_step must lie in (0, 0.01]");
    let n = (1.0 / grid_step - 1e-9).ceil() as usize;
    let mut channels = [[None; 2]; 2];
    for ss in Side::BOTH {
        for rs in Side::BOTH {
            channels[ss.index()][rs.index()] =
                Some(Channel::new(params, strategies, ss, rs, params.k, params.beta(rs)));
        }
    }
    let center = |i: usize| (i as f64 + 0.5) / n as f64;
    let cells: Vec<u8> = (0..n)
        .into_par_iter()
        .flat_map_iter(|a| {
            let s = center(a);
            let channels = &channels;
            (0..n).map(move |b| {
                let r = center(b);
                let ch = channels[Side::of(s).index()][Side::of(r).index()].as_ref().unwrap();
                let mut bits = 0u8;
                for (j, &obs) in CANONICAL_INFO.iter().enumerate() {
                    if !ch.possible(obs) || ch.truthful_for(s, r, obs) {
                        bits |= 1 << j;
                    }
                }
                bits
            })
        })
        .collect();
    TruthfulRegion { n, cells }
}
