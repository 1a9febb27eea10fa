//! Analytic and simulation pipelines for one scenario point.

use echolab::communication::profile_cutoffs;
use echolab::simulation::{simulate, Estimate, SimError};
use echolab::strategy::{
    benchmark_thresholds, c_bar, c_hat_bar, election_outcome, mixing_probability, solve_candidate_selection, solve_random_ad,
    targeting_analysis, vote_share_with, win_probability, ExposureLaw, SelectionRegime, SolveError,
};
use echolab::{CandidateType, ModelParams, Party, State, StrategyProfile};
use serde::Serialize;
use thiserror::Error;

use crate::config::{ProfileSpec, Scenario};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
/// Simulated means must lie within this many standard errors.
pub const Z_BRACKET: f64 = 3.0;
pub const RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub seed: Option<u64>,
    pub version: &'static str,
    pub scenario_hash: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct StateRow {
    pub state: &'static str,
    pub vote_share_l: f64,
    pub win_prob_l: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Analytic {
    pub q_l: f64,
    pub q_r: f64,
    pub c0: f64,
    pub c_tau: f64,
    pub c_star: Option<f64>,
    pub c_hat_bar: f64,
    pub kbeta_bar: Option<f64>,
    pub c_bar: f64,
    pub c_bar_valid: bool,
    pub zeta: f64,
    pub zeta_in_range: bool,
    pub x_star: Option<f64>,
    pub advertise: Option<bool>,
    pub x_residual: Option<f64>,
    pub regime: Option<&'static str>,
    pub own_side_dominated: Option<bool>,
    /// solver fields are None for asymmetric parameters; selection fields
    /// also when k = 0 or the system has no interior root
    pub sigma_star: Option<f64>,
    pub selection_x: Option<f64>,
    pub selection_regime: Option<&'static str>,
    pub selection_residual: Option<f64>,
    pub vote_share_l: f64,
    pub win_prob_l: f64,
    pub per_state: Vec<StateRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Simulated {
    pub vote_share: Estimate,
    pub win_prob: Estimate,
    pub majority_win: Estimate,
    /// closed forms under the per-link exposure law the simulator realizes
    pub closed_vote_share: f64,
    pub closed_win_prob: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub value: f64,
    pub target: f64,
    /// allowed |value - target|
    pub margin: f64,
}

impl Check {
    fn within(name: &'static str, value: f64, target: f64, margin: f64) -> Check {
        Check { name, pass: (value - target).abs() <= margin, value, target, margin }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunResult {
    pub scenario: String,
    pub point: usize,
    /// swept parameter values of this point
    pub assignments: Vec<(String, f64)>,
    pub provenance: Provenance,
    pub params: ModelParams,
    pub profile: StrategyProfile,
    pub analytic: Analytic,
    pub simulation: Option<Simulated>,
    pub checks: Vec<Check>,
}

impl RunResult {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failed(&self) -> Vec<&'static str> {
        self.checks.iter().filter(|c| !c.pass).map(|c| c.name).collect()
    }
}

/// Profile of a point: explicit, or both moderates at the random-ad
/// equilibrium (silent when it does not pay).
pub fn resolve_profile(spec: &ProfileSpec, params: &ModelParams) -> Result<StrategyProfile, SolveError> {
    Ok(match spec {
        ProfileSpec::Explicit(p) => *p,
        ProfileSpec::Solve => {
            let eq = solve_random_ad(params)?;
            if eq.advertise {
                StrategyProfile::symmetric_random(eq.x)
            } else {
                StrategyProfile::silent()
            }
        }
    })
}

fn analytic(params: &ModelParams, profile: &StrategyProfile, checks: &mut Vec<Check>) -> Result<Analytic, RunError> {
    let (q_l, q_r) = profile_cutoffs(params, profile);
    let (c0, c_tau) = benchmark_thresholds(params);
    let cb = c_bar(params);
    let zeta = mixing_probability(params);
    checks.push(Check { name: "threshold_order", pass: c0 < c_tau, value: c0, target: c_tau, margin: 0.0 });
    // the equilibrium solvers assume symmetric parties
    let (eq, ta) = match (solve_random_ad(params), targeting_analysis(params)) {
        (Ok(eq), Ok(ta)) => (Some(eq), Some(ta)),
        (Err(SolveError::Assumption(_)), _) => (None, None),
        (Err(e), _) | (_, Err(e)) => return Err(e.into()),
    };
    if let Some(eq) = eq.filter(|eq| eq.x > 0.0 && eq.x < 1.0) {
        checks.push(Check::within("random_ad_foc", eq.residual, 0.0, RESIDUAL_TOL));
    }
    let (mut sigma_star, mut selection_x, mut selection_regime, mut selection_residual) = (None, None, None, None);
    if let Ok(sel) = solve_candidate_selection(params) {
        sigma_star = Some(sel.sigma);
        selection_x = Some(sel.x);
        selection_regime = Some(match sel.regime {
            SelectionRegime::AllExtremist => "all_extremist",
            SelectionRegime::Mixed => "mixed",
        });
        if sel.regime == SelectionRegime::Mixed {
            let r = sel.residuals[0].abs().max(sel.residuals[1].abs());
            selection_residual = Some(r);
            checks.push(Check::within("selection_residual", r, 0.0, RESIDUAL_TOL));
            checks.push(Check::within("selection_indifference", sel.indifference, 0.0, 1e-8));
        }
    }
    let out = election_outcome(profile, params);
    Ok(Analytic {
        q_l,
        q_r,
        c0,
        c_tau,
        c_star: ta.map(|t| t.c_star),
        c_hat_bar: c_hat_bar(params),
        kbeta_bar: ta.map(|t| t.kbeta_bar),
        c_bar: cb.value,
        c_bar_valid: cb.valid,
        zeta: zeta.zeta,
        zeta_in_range: zeta.in_range,
        x_star: eq.map(|e| e.x),
        advertise: eq.map(|e| e.advertise),
        x_residual: eq.map(|e| e.residual),
        regime: ta.map(|t| t.regime.name()),
        own_side_dominated: ta.map(|t| t.own_side_dominated),
        sigma_star,
        selection_x,
        selection_regime,
        selection_residual,
        vote_share_l: out.vote_share_l,
        win_prob_l: out.win_prob_l,
        per_state: out
            .per_state
            .iter()
            .map(|s| StateRow { state: s.state.label(), vote_share_l: s.vote_share_l, win_prob_l: s.win_prob_l })
            .collect(),
    })
}

/// Prior-weighted closed-form vote share and win probability under the
/// per-link law, for a fixed state or averaged over states.
pub fn closed_forms(params: &ModelParams, profile: &StrategyProfile, state: Option<State>) -> (f64, f64) {
    let one = |s: State| {
        let mu = vote_share_with(profile, profile, s, params, ExposureLaw::PerLink);
        (mu, win_probability(mu, params))
    };
    match state {
        Some(s) => one(s),
        None => {
            let (mut mu, mut pi) = (0.0, 0.0);
            for s in State::ALL {
                let w = prior_weight(params, profile, s);
                let (a, b) = one(s);
                mu += w * a;
                pi += w * b;
            }
            (mu, pi)
        }
    }
}

fn prior_weight(params: &ModelParams, profile: &StrategyProfile, s: State) -> f64 {
    Party::BOTH
        .iter()
        .map(|&p| {
            let sigma = profile.prior(p, params);
            if s.of(p) == CandidateType::Moderate {
                sigma
            } else {
                1.0 - sigma
            }
        })
        .product()
}

pub fn run_point(scenario: &Scenario, point: usize, assignments: Vec<(String, f64)>) -> Result<RunResult, RunError> {
    let params = scenario.params;
    let profile = resolve_profile(&scenario.profile, &params)?;
    let mut checks = Vec::new();
    let analytic = analytic(&params, &profile, &mut checks)?;
    let simulation = match &scenario.sim {
        None => None,
        Some(base) => {
            let mut cfg = base.clone();
            cfg.params = params;
            cfg.profile = profile;
            let sum = simulate(&cfg)?;
            let (mu, pi) = closed_forms(&params, &profile, cfg.state);
            checks.push(Check::within("sim_vote_share", sum.vote_share.mean, mu, Z_BRACKET * sum.vote_share.std_error));
            checks.push(Check::within("sim_win_prob", sum.win_prob.mean, pi, Z_BRACKET * sum.win_prob.std_error));
            Some(Simulated {
                vote_share: sum.vote_share,
                win_prob: sum.win_prob,
                majority_win: sum.majority_win,
                closed_vote_share: mu,
                closed_win_prob: pi,
            })
        }
    };
    Ok(RunResult {
        scenario: scenario.name.clone(),
        point,
        assignments,
        provenance: Provenance {
            seed: scenario.sim.as_ref().map(|s| s.seed),
            version: VERSION,
            scenario_hash: scenario.hash.clone(),
        },
        params,
        profile,
        analytic,
        simulation,
        checks,
    })
}
