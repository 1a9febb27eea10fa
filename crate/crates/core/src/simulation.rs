//! Monte Carlo election: candidate types, ad exposure, one round of
//! sender-to-receiver messages on homophilous links, and finite-electorate
//! votes.
//!
//! Every trial owns a ChaCha stream keyed by (seed, trial index), so runs
//! are reproducible and independent of thread scheduling. Draws consume a
//! fixed number of uniforms per voter regardless of the profile, which makes
//! estimates under different profiles paired (common random numbers).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::belief::{indifferent_from_marginals, silence_posterior};
use crate::communication::{profile_cutoffs, Channel};
use crate::params::{CandidateType, ModelParams, ParamError, Party, Side, State};
use crate::profile::{Advertising, PartyStrategy, ProfileError, StrategyProfile, Technology};
use crate::strategy::outcome::{state_payoff, win_probability};
use crate::strategy::random_ad::SolveError;
use crate::strategy::targeting::targeting_analysis;

pub const MIN_VOTERS: usize = 100;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("n_trials must be at least 1")]
    NoTrials,
    #[error("n_voters = {0} is below the minimum of {MIN_VOTERS}")]
    TooFewVoters(usize),
    #[error("independent mass w = {0} must lie in (0, 1]")]
    BadMass(f64),
    #[error("grid step {0} must lie in (0, 0.05]")]
    BadGridStep(f64),
    #[error("voter at {bliss} saw an ad of {party:?} that cannot reach her under the profile")]
    ImpossibleExposure { bliss: f64, party: Party },
}

/// Electorate used to stand in for the continuum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Population {
    /// Bliss points uniform on [0, 1].
    Uniform,
    /// Partisan blocs of mass (1-w)/2 each and independents uniform on
    /// [mu - tau, mu + tau], mu drawn per trial. `w` defaults to 2 tau.
    Band { w: Option<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordLevel {
    Summary,
    PerTrial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_trials: u64,
    pub n_voters: usize,
    pub seed: u64,
    pub params: ModelParams,
    /// Strategies that generate the ads.
    pub profile: StrategyProfile,
    /// Strategies voters believe are played; defaults to `profile`.
    pub beliefs: Option<StrategyProfile>,
    /// Fixed candidate types, or None to draw them from the priors.
    pub state: Option<State>,
    pub population: Population,
    pub record_level: RecordLevel,
}

impl SimConfig {
    pub fn new(params: ModelParams, profile: StrategyProfile) -> SimConfig {
        SimConfig {
            n_trials: 10_000,
            n_voters: MIN_VOTERS,
            seed: 0,
            params,
            profile,
            beliefs: None,
            state: None,
            population: Population::Uniform,
            record_level: RecordLevel::Summary,
        }
    }

    pub fn believed(&self) -> &StrategyProfile {
        self.beliefs.as_ref().unwrap_or(&self.profile)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.n_trials == 0 {
            return Err(SimError::NoTrials);
        }
        if self.n_voters < MIN_VOTERS {
            return Err(SimError::TooFewVoters(self.n_voters));
        }
        self.params.validate()?;
        self.profile.validate()?;
        self.believed().validate()?;
        if let Population::Band { w: Some(w) } = self.population {
            if !(w > 0.0 && w <= 1.0) {
                return Err(SimError::BadMass(w));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkDraw {
    pub aligned: bool,
    pub sender: f64,
    /// Sender directly reached by each party's ad.
    pub sender_sees: [bool; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoterDraw {
    pub bliss: f64,
    pub sees: [bool; 2],
    /// Empty for voters whose vote no information can change.
    pub links: Vec<LinkDraw>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialDraw {
    pub theta: State,
    pub mu: f64,
    pub voters: Vec<VoterDraw>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub theta: State,
    pub mu: f64,
    pub vote_share_l: f64,
    /// Piecewise win map applied to this trial's vote share.
    pub win_prob_l: f64,
    /// Majority winner given the drawn median (band electorate).
    pub l_wins: bool,
    /// Share of swing voters who end up knowing L's candidate is moderate.
    pub informed_l: Option<f64>,
}

/// Precomputed per-configuration quantities shared by all trials.
#[derive(Debug, Clone)]
pub struct Simulator {
    config: SimConfig,
    channels: [[Channel; 2]; 2],
    /// silence posterior [side][party]
    silent: [[f64; 2]; 2],
    q_l: f64,
    q_r: f64,
    /// Voters outside [lo, hi] vote the same under any information.
    lo: f64,
    hi: f64,
}

impl Simulator {
    pub fn new(config: SimConfig) -> Result<Simulator, SimError> {
        config.validate()?;
        let p = &config.params;
        let believed = *config.believed();
        let ch = |s: Side, r: Side| Channel::new(p, &believed, s, r, p.k, p.beta(r));
        let channels = [
            [ch(Side::Left, Side::Left), ch(Side::Left, Side::Right)],
            [ch(Side::Right, Side::Left), ch(Side::Right, Side::Right)],
        ];
        let mut silent = [[0.0; 2]; 2];
        for side in Side::BOTH {
            for party in Party::BOTH {
                silent[side.index()][party.index()] = silence_posterior(
                    believed.prior(party, p),
                    believed.exposure(party, CandidateType::Moderate, side),
                    p.beta_k(side) + 1.0,
                    believed.exposure(party, CandidateType::Extremist, side),
                );
            }
        }
        let (q_l, q_r) = profile_cutoffs(p, &believed);
        let lo = indifferent_from_marginals(0.0, 1.0, p.m);
        let hi = indifferent_from_marginals(1.0, 0.0, p.m);
        Ok(Simulator { config, channels, silent, q_l, q_r, lo, hi })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    fn rng(&self, trial: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        rng.set_stream(trial);
        rng
    }

    fn support(&self, mu: f64) -> (f64, f64) {
        match self.config.population {
            Population::Uniform => (0.0, 1.0),
            Population::Band { .. } => (mu - self.config.params.tau, mu + self.config.params.tau),
        }
    }

    fn independent_mass(&self) -> f64 {
        match self.config.population {
            Population::Uniform => 1.0,
            Population::Band { w } => w.unwrap_or(2.0 * self.config.params.tau),
        }
    }

    /// Ex-post group of a voter: partisan or echo chamber on her side.
    fn group(&self, i: f64) -> (f64, f64) {
        if i < self.q_l {
            (0.0, self.q_l)
        } else if i < 0.5 {
            (self.q_l, 0.5)
        } else if i <= self.q_r {
            (0.5, self.q_r)
        } else {
            (self.q_r, 1.0)
        }
    }

    /// Draw trial `trial`; `state` overrides the configured one.
    pub fn draw(&self, trial: u64, state: Option<State>) -> TrialDraw {
        let mut rng = self.rng(trial);
        let p = &self.config.params;
        let played = &self.config.profile;
        let mut types = [CandidateType::Moderate; 2];
        for party in Party::BOTH {
            let u: f64 = rng.gen();
            if u >= played.prior(party, p) {
                types[party.index()] = CandidateType::Extremist;
            }
        }
        let theta = state.or(self.config.state).unwrap_or(State::new(types[0], types[1]));
        let mu = 0.5 - p.m / 4.0 + rng.gen::<f64>() * p.m / 2.0;
        let (lo_s, hi_s) = self.support(mu);
        let sees = |rng: &mut ChaCha8Rng, i: f64| {
            let side = Side::of(i);
            let mut out = [false; 2];
            for party in Party::BOTH {
                let u: f64 = rng.gen();
                out[party.index()] = u < played.exposure(party, theta.of(party), side);
            }
            out
        };
        let voters = (0..self.config.n_voters)
            .map(|_| {
                let bliss = lo_s + rng.gen::<f64>() * (hi_s - lo_s);
                let own = sees(&mut rng, bliss);
                let mut links = Vec::new();
                if bliss > self.lo && bliss <= self.hi {
                    let beta = p.beta(Side::of(bliss));
                    let (a, b) = self.group(bliss);
                    for _ in 0..p.k {
                        let aligned = rng.gen::<f64>() < beta;
                        let (a, b) = if aligned { (a, b) } else { (1.0 - b, 1.0 - a) };
                        let (a, b) = intersect((a, b), (lo_s, hi_s));
                        let sender = a + rng.gen::<f64>() * (b - a);
                        links.push(LinkDraw { aligned, sender, sender_sees: sees(&mut rng, sender) });
                    }
                }
                VoterDraw { bliss, sees: own, links }
            })
            .collect();
        TrialDraw { theta, mu, voters }
    }

    /// Message stage, beliefs and votes for one draw.
    pub fn run(&self, draw: &TrialDraw) -> Result<TrialResult, SimError> {
        let p = &self.config.params;
        let played = &self.config.profile;
        let theta = draw.theta;
        let moderate = [theta.left == CandidateType::Moderate, theta.right == CandidateType::Moderate];
        let check = |i: f64, seen: [bool; 2]| {
            for party in Party::BOTH {
                if seen[party.index()] && played.exposure(party, theta.of(party), Side::of(i)) <= 0.0 {
                    return Err(SimError::ImpossibleExposure { bliss: i, party });
                }
            }
            Ok(())
        };
        let mut votes_l = 0usize;
        let (mut swing, mut informed) = (0usize, 0usize);
        for v in &draw.voters {
            check(v.bliss, v.sees)?;
            let side = Side::of(v.bliss);
            let mut knows = [v.sees[0] && moderate[0], v.sees[1] && moderate[1]];
            let revealed_e = [v.sees[0] && !moderate[0], v.sees[1] && !moderate[1]];
            for link in &v.links {
                check(link.sender, link.sender_sees)?;
                let obs = [link.sender_sees[0] && moderate[0], link.sender_sees[1] && moderate[1]];
                // a credible sender is truthful, so only news the receiver lacks matters
                if !((obs[0] && !knows[0]) || (obs[1] && !knows[1])) {
                    continue;
                }
                let ch = &self.channels[Side::of(link.sender).index()][side.index()];
                if ch.ic_truthful(link.sender, v.bliss) {
                    let msg = ch.best_message(link.sender, v.bliss, obs);
                    knows[0] |= msg[0];
                    knows[1] |= msg[1];
                }
            }
            if !v.links.is_empty() || (v.bliss > self.lo && v.bliss <= self.hi) {
                swing += 1;
                informed += knows[0] as usize;
            }
            let belief = |j: usize| {
                if knows[j] {
                    1.0
                } else if revealed_e[j] {
                    0.0
                } else {
                    self.silent[side.index()][j]
                }
            };
            let i_star = indifferent_from_marginals(belief(0), belief(1), p.m);
            if v.bliss <= i_star {
                votes_l += 1;
            }
        }
        let frac = votes_l as f64 / draw.voters.len() as f64;
        let vote_share_l = match self.config.population {
            Population::Uniform => frac,
            Population::Band { .. } => {
                let w = self.independent_mass();
                (1.0 - w) / 2.0 + w * frac
            }
        };
        Ok(TrialResult {
            theta,
            mu: draw.mu,
            vote_share_l,
            win_prob_l: win_probability(vote_share_l, p),
            l_wins: vote_share_l >= 0.5,
            informed_l: (moderate[0] && swing > 0).then(|| informed as f64 / swing as f64),
        })
    }

    pub fn trial(&self, trial: u64) -> Result<TrialResult, SimError> {
        self.run(&self.draw(trial, None))
    }

    /// Expected payoff of `party` with an `own_type` candidate in one trial,
    /// averaging over the opponent's type on paired draws.
    pub fn utility_trial(&self, trial: u64, party: Party, own_type: CandidateType) -> Result<f64, SimError> {
        let p = &self.config.params;
        let played = &self.config.profile;
        let sigma_opp = played.prior(party.other(), p);
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
            let r = self.run(&self.draw(trial, Some(state)))?;
            let pi = if party == Party::L { r.win_prob_l } else { 1.0 - r.win_prob_l };
            u += w * state_payoff(pi, p.type_value(own_type), p.type_value(t_opp), p.e());
        }
        Ok(u - p.c * played.party(party).ad(own_type).spend())
    }
}

fn intersect(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    let (lo, hi) = (a.0.max(b.0), a.1.min(b.1));
    if hi > lo {
        (lo, hi)
    } else {
        a
    }
}

/// One trial under `profile` (voters believe it is played), default
/// uniform electorate.
pub fn run_trial(draw: &TrialDraw, profile: &StrategyProfile, params: &ModelParams) -> Result<TrialResult, SimError> {
    let mut config = SimConfig::new(*params, *profile);
    config.n_voters = draw.voters.len().max(MIN_VOTERS);
    Simulator::new(config)?.run(draw)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub n: u64,
    /// true when n = 1 and the standard error is reported as 0
    pub degenerate: bool,
}

impl Estimate {
    pub fn from_samples(xs: &[f64]) -> Estimate {
        let n = xs.len();
        let mean = xs.iter().sum::<f64>() / n as f64;
        if n < 2 {
            return Estimate { mean, std_error: 0.0, n: n as u64, degenerate: true };
        }
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
        Estimate { mean, std_error: (var / n as f64).sqrt(), n: n as u64, degenerate: false }
    }

    /// |mean - value| <= z standard errors.
    pub fn brackets(&self, value: f64, z: f64) -> bool {
        (self.mean - value).abs() <= z * self.std_error
    }

    pub fn interval(&self, z: f64) -> (f64, f64) {
        (self.mean - z * self.std_error, self.mean + z * self.std_error)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    VoteShare,
    /// Piecewise map applied to each trial's vote share.
    WinProb,
    /// Majority winner against the drawn median.
    MajorityWin,
    InformedFraction,
    PartyUtility { party: Party, own_type: CandidateType },
}

fn samples(sim: &Simulator, quantity: Quantity) -> Result<Vec<f64>, SimError> {
    let n = sim.config.n_trials;
    let per: Vec<Result<Option<f64>, SimError>> = (0..n)
        .into_par_iter()
        .map(|t| match quantity {
            Quantity::PartyUtility { party, own_type } => sim.utility_trial(t, party, own_type).map(Some),
            _ => {
                let r = sim.trial(t)?;
                Ok(match quantity {
                    Quantity::VoteShare => Some(r.vote_share_l),
                    Quantity::WinProb => Some(r.win_prob_l),
                    Quantity::MajorityWin => Some(r.l_wins as u8 as f64),
                    Quantity::InformedFraction => r.informed_l,
                    Quantity::PartyUtility { .. } => unreachable!(),
                })
            }
        })
        .collect();
    let mut out = Vec::with_capacity(per.len());
    for r in per {
        if let Some(x) = r? {
            out.push(x);
        }
    }
    Ok(out)
}

pub fn estimate(config: &SimConfig, quantity: Quantity) -> Result<Estimate, SimError> {
    let sim = Simulator::new(config.clone())?;
    let xs = samples(&sim, quantity)?;
    Ok(Estimate::from_samples(&xs))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSummary {
    pub vote_share: Estimate,
    pub win_prob: Estimate,
    pub majority_win: Estimate,
    pub records: Option<Vec<TrialResult>>,
}

/// All per-trial estimates from one pass over the trials.
pub fn simulate(config: &SimConfig) -> Result<SimSummary, SimError> {
    let sim = Simulator::new(config.clone())?;
    let results: Vec<TrialResult> =
        (0..config.n_trials).into_par_iter().map(|t| sim.trial(t)).collect::<Result<_, _>>()?;
    let pick = |f: fn(&TrialResult) -> f64| Estimate::from_samples(&results.iter().map(f).collect::<Vec<_>>());
    Ok(SimSummary {
        vote_share: pick(|r| r.vote_share_l),
        win_prob: pick(|r| r.win_prob_l),
        majority_win: pick(|r| r.l_wins as u8 as f64),
        records: (config.record_level == RecordLevel::PerTrial).then_some(results),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub technology: Technology,
    pub intensity: f64,
    pub utility: Estimate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Match,
    Mismatch,
    /// the two best technologies' confidence intervals overlap
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestResponseCheck {
    pub predicted: Technology,
    /// Best candidate per technology, in `Technology::ALL` order.
    pub candidates: Vec<Candidate>,
    pub best: Technology,
    pub runner_up: Technology,
    /// 95% intervals of the best and runner-up do not overlap
    pub separated: bool,
    pub verdict: Verdict,
}

pub const CI_Z: f64 = 1.96;

/// Simulated payoff of L's moderate under each technology, with R and the
/// voters' beliefs fixed at `base.profile`; Random is searched over the
/// positive intensities of a grid with step `grid_step`.
pub fn best_response_check(base: &SimConfig, grid_step: f64) -> Result<BestResponseCheck, SimError> {
    if !(grid_step > 0.0 && grid_step <= 0.05) {
        return Err(SimError::BadGridStep(grid_step));
    }
    let predicted = targeting_analysis(&base.params)?.regime;
    let baseline = base.profile;
    let eval = |ad: Advertising| -> Result<Estimate, SimError> {
        let mut config = base.clone();
        config.beliefs = Some(baseline);
        config.profile = baseline.with(Party::L, PartyStrategy { moderate: ad, ..*baseline.party(Party::L) });
        estimate(&config, Quantity::PartyUtility { party: Party::L, own_type: CandidateType::Moderate })
    };
    let steps = (1.0 / grid_step).round() as usize;
    let mut candidates = Vec::with_capacity(4);
    for tech in Technology::ALL {
        let c = match tech {
            Technology::Random => {
                let mut best: Option<Candidate> = None;
                // x = 0 is the None technology
                for j in 1..=steps {
                    let x = (j as f64 * grid_step).min(1.0);
                    let u = eval(Advertising::random(x))?;
                    if best.is_none_or(|b| u.mean > b.utility.mean) {
                        best = Some(Candidate { technology: tech, intensity: x, utility: u });
                    }
                }
                best.expect("grid has at least one point")
            }
            _ => {
                let ad = Advertising::of(tech, 1.0);
                Candidate { technology: tech, intensity: ad.intensity, utility: eval(ad)? }
            }
        };
        candidates.push(c);
    }
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| candidates[b].utility.mean.total_cmp(&candidates[a].utility.mean));
    let (top, second) = (&candidates[order[0]], &candidates[order[1]]);
    let separated = top.utility.interval(CI_Z).0 > second.utility.interval(CI_Z).1;
    let verdict = if !separated {
        Verdict::Inconclusive
    } else if top.technology == predicted {
        Verdict::Match
    } else {
        Verdict::Mismatch
    };
    Ok(BestResponseCheck {
        predicted,
        best: top.technology,
        runner_up: second.technology,
        candidates,
        separated,
        verdict,
    })
}
