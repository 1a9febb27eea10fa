//! Candidate selection: parties pick a moderate with probability sigma and
//! advertise him at random with intensity x.
//!
//! Unknowns (sigma, x) solve
//!   F1 = (1-sigma) n (1-p) u^(n-1) - 16c/(2-3m) = 0
//!   F2 = (1-p)(1-u^n) - (4m + 16cx)/(2-3m)     = 0
//! with u = 1-x, n = beta k + 1 and p = sigma u^n / (sigma u^n + 1 - sigma)
//! the uninformed posterior. F2 is the indifference between the two types.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::params::{CandidateType, ModelParams, Party, Side};
use crate::profile::StrategyProfile;
use crate::strategy::outcome::party_utility;

const TOL: f64 = 1e-10;
const SCAN: usize = 4000;
const NEWTON_ITER: usize = 100;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SelectionError {
    #[error("the selection game needs k >= 1 and symmetric parameters")]
    Assumption,
    #[error("no root of the selection system found (best residual {residual:e})")]
    NoConvergence { residual: f64 },
    #[error("the selection system's root ({sigma}, {x}) lies outside the unit square")]
    OutsideUnitSquare { sigma: f64, x: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SelectionRegime {
    AllExtremist,
    Mixed,
}

/// Cost threshold above which both parties field extremists.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CBar {
    pub value: f64,
    pub p_low: f64,
    /// false when p_low leaves [0, 1] or the printed value is not positive
    pub valid: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CandidateSelection {
    pub sigma: f64,
    pub x: f64,
    pub regime: SelectionRegime,
    pub c_bar: CBar,
    pub residuals: [f64; 2],
    /// U(moderate) - U(extremist) from the party payoff
    pub indifference: f64,
}

fn k_rhs(params: &ModelParams) -> f64 {
    16.0 * params.c / (2.0 - 3.0 * params.m)
}

/// p_low solves 16c/(2-3m) = (1 + beta k) p^(beta k), found by bisection.
pub fn c_bar(params: &ModelParams) -> CBar {
    let bk = params.beta_k(Side::Left);
    let target = k_rhs(params);
    let f = |p: f64| (1.0 + bk) * p.powf(bk) - target;
    let in_range = f(0.0) <= 0.0 && f(1.0) >= 0.0;
    let p_low = if in_range {
        let (mut a, mut b) = (0.0, 1.0);
        while b - a > 1e-13 {
            let mid = 0.5 * (a + b);
            if f(mid) < 0.0 {
                a = mid;
            } else {
                b = mid;
            }
        }
        0.5 * (a + b)
    } else {
        (target / (1.0 + bk)).powf(1.0 / bk)
    };
    let value = (2.0 - 7.0 * params.m) * (1.0 + bk) / (16.0 * (1.0 - bk * (1.0 - p_low)));
    CBar { value, p_low, valid: in_range && value > 0.0 && value.is_finite() }
}

pub fn residuals(params: &ModelParams, sigma: f64, x: f64) -> [f64; 2] {
    let n = params.beta_k(Side::Left) + 1.0;
    let u = 1.0 - x;
    let un = u.powf(n);
    let one_minus_p = (1.0 - sigma) / (sigma * un + 1.0 - sigma);
    let a = 2.0 - 3.0 * params.m;
    [
        (1.0 - sigma) * n * one_minus_p * u.powf(n - 1.0) - k_rhs(params),
        one_minus_p * (1.0 - un) - (4.0 * params.m + 16.0 * params.c * x) / a,
    ]
}

/// sigma solving F1 at fixed x: with s = 1 - sigma and a = u^n,
/// n u^(n-1) s^2 - K(1-a) s - K a = 0.
fn sigma_on_f1(params: &ModelParams, x: f64) -> f64 {
    let n = params.beta_k(Side::Left) + 1.0;
    let u = 1.0 - x;
    let a = u.powf(n);
    let b = n * u.powf(n - 1.0);
    let k = k_rhs(params);
    let s = (k * (1.0 - a) + (k * k * (1.0 - a) * (1.0 - a) + 4.0 * b * k * a).sqrt()) / (2.0 * b);
    1.0 - s
}

pub fn solve_candidate_selection(params: &ModelParams) -> Result<CandidateSelection, SelectionError> {
    if params.k == 0 || !params.is_symmetric() {
        return Err(SelectionError::Assumption);
    }
    let cb = c_bar(params);
    if cb.valid && params.c >= cb.value {
        return Ok(CandidateSelection {
            sigma: 0.0,
            x: 0.0,
            regime: SelectionRegime::AllExtremist,
            c_bar: cb,
            residuals: [0.0; 2],
            indifference: 0.0,
        });
    }
    let (sigma, x) = match newton_multistart(params) {
        Some(root) => root,
        None => reduced_scan(params)?,
    };
    if !(sigma > 0.0 && sigma < 1.0 && x > 0.0 && x < 1.0) {
        return Err(SelectionError::OutsideUnitSquare { sigma, x });
    }
    let profile = StrategyProfile::symmetric_random(x).with_selection(sigma);
    let indifference = party_utility(&profile, Party::L, CandidateType::Moderate, params)
        - party_utility(&profile, Party::L, CandidateType::Extremist, params);
    Ok(CandidateSelection {
        sigma,
        x,
        regime: SelectionRegime::Mixed,
        c_bar: cb,
        residuals: residuals(params, sigma, x),
        indifference,
    })
}

fn norm(r: [f64; 2]) -> f64 {
    r[0].abs().max(r[1].abs())
}

/// Damped Newton with a finite-difference Jacobian and backtracking,
/// kept inside the open unit square.
fn newton(params: &ModelParams, mut z: [f64; 2]) -> Option<[f64; 2]> {
    let inside = |z: [f64; 2]| z.iter().all(|&v| v > 0.0 && v < 1.0);
    let mut r = residuals(params, z[0], z[1]);
    for _ in 0..NEWTON_ITER {
        if norm(r) < TOL * 1e-2 {
            return Some(z);
        }
        let h = 1e-7;
        let r0 = residuals(params, z[0] + h, z[1]);
        let r1 = residuals(params, z[0], z[1] + h);
        let j = [[(r0[0] - r[0]) / h, (r1[0] - r[0]) / h], [(r0[1] - r[1]) / h, (r1[1] - r[1]) / h]];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det.abs() < 1e-300 || !det.is_finite() {
            return None;
        }
        let d = [(j[1][1] * r[0] - j[0][1] * r[1]) / det, (j[0][0] * r[1] - j[1][0] * r[0]) / det];
        let mut t = 1.0;
        loop {
            let cand = [z[0] - t * d[0], z[1] - t * d[1]];
            if inside(cand) {
                let rc = residuals(params, cand[0], cand[1]);
                if norm(rc) < norm(r) {
                    z = cand;
                    r = rc;
                    break;
                }
            }
            t *= 0.5;
            if t < 1e-12 {
                return (norm(r) < TOL).then_some(z);
            }
        }
    }
    (norm(r) < TOL).then_some(z)
}

fn newton_multistart(params: &ModelParams) -> Option<(f64, f64)> {
    let starts = [[0.5, 0.5], [0.7, 0.7], [0.3, 0.3], [0.8, 0.5], [0.5, 0.8], [0.2, 0.8], [0.9, 0.9]];
    let mut best: Option<[f64; 2]> = None;
    for s in starts {
        if let Some(z) = newton(params, s) {
            // prefer the root with the most advertising
            if best.is_none_or(|b| z[1] > b[1] + 1e-9) {
                best = Some(z);
            }
        }
    }
    best.map(|z| (z[0], z[1]))
}

/// Along the curve F1 = 0, scan x for sign changes of F2 and bisect.
fn reduced_scan(params: &ModelParams) -> Result<(f64, f64), SelectionError> {
    let g = |x: f64| residuals(params, sigma_on_f1(params, x), x)[1];
    let mut best_res = f64::INFINITY;
    let mut root = None;
    let mut prev = (0.0, f64::NAN);
    for j in 1..SCAN {
        let x = j as f64 / SCAN as f64;
        let v = g(x);
        best_res = best_res.min(v.abs());
        if prev.1.is_finite() && v.is_finite() && prev.1.signum() != v.signum() {
            let (mut a, mut b) = (prev.0, x);
            let fa = prev.1;
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if g(mid).signum() == fa.signum() {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            let x = 0.5 * (a + b);
            root = Some((sigma_on_f1(params, x), x));
        }
        prev = (x, v);
    }
    let (sigma, x) = root.ok_or(SelectionError::NoConvergence { residual: best_res })?;
    if norm(residuals(params, sigma, x)) >= TOL {
        if sigma > 0.0 && sigma < 1.0 {
            return Err(SelectionError::NoConvergence { residual: norm(residuals(params, sigma, x)) });
        }
        return Err(SelectionError::OutsideUnitSquare { sigma, x });
    }
    Ok((sigma, x))
}
