//! Acceptance suite: one `PASS`/`FAIL` line per criterion. Runs without the
//! libtest harness so every line is printed; exits nonzero if any fails.

use std::process::Command;
use std::time::{Duration, Instant};

use echolab::communication::{echo_cutoffs, map_truthful_region, profile_cutoffs};
use echolab::simulation::{best_response_check, estimate, simulate, Quantity, SimConfig, Verdict};
use echolab::strategy::{
    benchmark_thresholds, c_bar, extremist_ad_gap, informed_fraction, random_ad_payoff, regime_profile,
    solve_candidate_selection, solve_random_ad, targeting_analysis, vote_share_with, win_probability,
    ExposureLaw, SelectionRegime,
};
use echolab::strategy::party_utility;
use echolab::{Advertising, CandidateType, ModelParams, Party, PartyStrategy, State, StrategyProfile};
use harness::pipeline::closed_forms;

/// (m, sigma, k, beta, c, gain)
type Counterexample = (f64, f64, u32, f64, f64, f64);

fn report(n: u32, title: &str, pass: bool, detail: String) {
    println!("criterion {n:>2} {} {title}: {detail}", if pass { "PASS" } else { "FAIL" });
}

fn sym(m: f64, sigma: f64, c: f64, k: u32, beta: f64) -> ModelParams {
    ModelParams::symmetric(m, sigma, 0.01, c, k, beta).validated().unwrap()
}

/// Right cutoff written out by hand.
fn q_r_by_hand(m: f64, sigma: f64, k: f64, beta: f64, x: f64) -> f64 {
    let rho_den = (1.0 - sigma) + sigma * (1.0 - x).powf(beta * k + 1.0);
    0.5 + (m / 4.0) * (1.0 - sigma) / rho_den
}

fn c01_echo_chamber_oracle() -> bool {
    let start = Instant::now();
    let mut worst = 0;
    let mut compared = 0;
    for k in [1, 2, 5] {
        for beta in [0.3, 0.8] {
            let p = sym(0.2, 0.5, 0.02, k, beta);
            let prof = StrategyProfile::symmetric_random(0.5);
            let (q_l, q_r) = profile_cutoffs(&p, &prof);
            let cmp = map_truthful_region(&p, &prof, 1e-3).mismatches(q_l, q_r);
            worst = worst.max(cmp.mismatches);
            compared += cmp.compared;
        }
    }
    let elapsed = start.elapsed();
    let pass = worst == 0 && elapsed < Duration::from_secs(120);
    report(1, "echo-chamber map", pass, format!("{compared} cells, max mismatches {worst}, {elapsed:.1?}"));
    pass
}

fn c02_cutoff_values() -> bool {
    let p = ModelParams::baseline();
    let at = |x: f64| profile_cutoffs(&p, &StrategyProfile::symmetric_random(x)).1;
    let oracle_half = q_r_by_hand(0.2, 0.5, 2.0, 0.5, 0.5);
    let oracle_zero = q_r_by_hand(0.2, 0.5, 2.0, 0.5, 0.0);
    let closed = echo_cutoffs(&p, 0.5, 0.5).1.q_r;
    let errs = [
        (at(0.5) - 0.54).abs(),
        (oracle_half - 0.54).abs(),
        (closed - 0.54).abs(),
        (at(0.0) - 0.525).abs(),
        (oracle_zero - 0.525).abs(),
        (echo_cutoffs(&p, 0.0, 0.0).1.q_r - 0.525).abs(),
    ];
    let worst = errs.iter().cloned().fold(0.0, f64::max);
    let pass = worst < 1e-12;
    report(2, "cutoff values", pass, format!("q_r(0.5) = {:.15}, q_r(0) = {:.15}, max error {worst:.1e}", at(0.5), at(0.0)));
    pass
}

fn c03_monotonicity() -> bool {
    let ks = [0u32, 1, 2, 5, 10];
    let betas = [0.1, 0.3, 0.5, 0.7, 0.9];
    let xs = [0.0, 0.25, 0.5, 0.75, 1.0];
    let q = |i: usize, j: usize, l: usize| {
        let p = sym(0.2, 0.5, 0.02, ks[i], betas[j]);
        profile_cutoffs(&p, &StrategyProfile::symmetric_random(xs[l]))
    };
    let mut violations = 0;
    let mut pairs = 0;
    for i in 0..5 {
        for j in 0..5 {
            for l in 0..5 {
                let here = q(i, j, l);
                for next in [(i + 1, j, l), (i, j + 1, l), (i, j, l + 1)] {
                    if next.0 > 4 || next.1 > 4 || next.2 > 4 {
                        continue;
                    }
                    let there = q(next.0, next.1, next.2);
                    pairs += 1;
                    if there.1 < here.1 || there.0 > here.0 {
                        violations += 1;
                    }
                }
            }
        }
    }
    let pass = violations == 0;
    report(3, "cutoff monotonicity", pass, format!("{pairs} neighbouring pairs, {violations} violations"));
    pass
}

fn c04_threshold_ordering() -> bool {
    let mut violations = 0;
    let mut points = 0;
    for i in 1..=9 {
        for j in 0..20 {
            let (sigma, m) = (i as f64 / 10.0, 0.05 + j as f64 / 100.0);
            let (c0, ct) = benchmark_thresholds(&sym(m, sigma, 0.02, 2, 0.5));
            points += 1;
            let oracle = ((1.0 - sigma) * (2.0 - 3.0 * m) / 16.0, (2.0 - 3.0 * m - sigma * m) / 4.0);
            if !(c0 < ct) || (c0 - oracle.0).abs() > 1e-12 || (ct - oracle.1).abs() > 1e-12 {
                violations += 1;
            }
        }
    }
    let (c0, ct) = benchmark_thresholds(&sym(0.2, 0.5, 0.02, 2, 0.5));
    let pass = violations == 0 && (c0 - 0.04375).abs() < 1e-12 && (ct - 0.325).abs() < 1e-12;
    report(4, "threshold ordering", pass, format!("{points} points, {violations} violations, c0 = {c0}, c_tau = {ct}"));
    pass
}

fn c05_extremist_ads_never_pay() -> bool {
    let mut violations = 0;
    let mut checked = 0;
    let mut largest = f64::NEG_INFINITY;
    for i in 0..10 {
        for j in 0..10 {
            let (sigma, m) = (0.05 + 0.1 * i as f64, 0.02 + 0.02 * j as f64);
            let p = sym(m, sigma, 0.02, 2, 0.5);
            let x = solve_random_ad(&p).unwrap().x;
            for base in [StrategyProfile::silent(), StrategyProfile::symmetric_random(x)] {
                for e in 1..=10 {
                    let gap = extremist_ad_gap(&p, &base, e as f64 / 10.0);
                    largest = largest.max(gap);
                    checked += 1;
                    if !(gap < 0.0) {
                        violations += 1;
                    }
                }
            }
        }
    }
    let pass = violations == 0;
    report(5, "extremist advertising dominated", pass, format!("{checked} cases, {violations} violations, largest gap {largest:.3e}"));
    pass
}

fn c06_random_ad_best_response() -> bool {
    let start = Instant::now();
    let points = [
        sym(0.2, 0.5, 0.02, 2, 0.5),
        sym(0.2, 0.5, 0.005, 2, 0.5),
        sym(0.2, 0.5, 0.05, 5, 0.8),
        sym(0.1, 0.3, 0.01, 1, 0.3),
        sym(0.15, 0.7, 0.02, 10, 0.9),
        sym(0.05, 0.5, 0.1, 2, 0.5),
        sym(0.2, 0.2, 0.03, 3, 0.6),
        sym(0.2, 0.5, 0.2, 2, 0.5),
    ];
    let mut worst = f64::NEG_INFINITY;
    for p in &points {
        let sol = solve_random_ad(p).unwrap();
        let best = random_ad_payoff(p, sol.x, sol.x);
        for j in 0..=1000 {
            worst = worst.max(random_ad_payoff(p, sol.x, j as f64 / 1000.0) - best);
        }
    }
    let elapsed = start.elapsed();
    let pass = worst <= 1e-9 && elapsed < Duration::from_secs(30);
    report(6, "random-ad best response", pass, format!("8 points, max grid gain {worst:.2e}, {elapsed:.1?}"));
    pass
}

fn c07_monte_carlo_agreement() -> bool {
    let start = Instant::now();
    let mut bad = Vec::new();
    let mut mf_gap: f64 = 0.0;
    for k in [0, 1, 2, 5] {
        for beta in [0.2, 0.5, 0.9] {
            let p = sym(0.2, 0.5, 0.02, k, beta);
            let prof = StrategyProfile::symmetric_random(0.5);
            let mut cfg = SimConfig::new(p, prof);
            cfg.n_trials = 100_000;
            cfg.seed = 7;
            let s = simulate(&cfg).unwrap();
            let (mu, pi) = closed_forms(&p, &prof, None);
            if !s.vote_share.brackets(mu, 3.0) || !s.win_prob.brackets(pi, 3.0) {
                bad.push(format!("k={k} beta={beta}"));
            }
            for st in State::ALL {
                let a = vote_share_with(&prof, &prof, st, &p, ExposureLaw::MeanField);
                let b = vote_share_with(&prof, &prof, st, &p, ExposureLaw::PerLink);
                mf_gap = mf_gap.max((a - b).abs()).max((win_probability(a, &p) - win_probability(b, &p)).abs());
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = bad.is_empty() && elapsed < Duration::from_secs(300);
    report(
        7,
        "Monte Carlo agreement",
        pass,
        format!("12 scenarios, outside 3 SE: {bad:?}, {elapsed:.1?}; mean-field vs per-link closed-form gap up to {mf_gap:.3e}"),
    );
    pass
}

fn c08_regime_diagram() -> bool {
    // (k, beta, c): three expected Random, three TargetOpponentSide, three None
    let points = [
        (20, 0.5, 0.01),
        (20, 0.5, 0.05),
        (12, 0.9, 0.02),
        (2, 0.5, 0.02),
        (1, 0.3, 0.2),
        (2, 0.5, 0.1),
        (2, 0.5, 0.4),
        (20, 0.5, 0.4),
        (5, 0.5, 0.4),
    ];
    let mut matched = 0;
    let mut lines = Vec::new();
    for (k, beta, c) in points {
        let p = ModelParams { c, k, beta_l: beta, beta_r: beta, ..ModelParams::baseline() }.validated().unwrap();
        let ta = targeting_analysis(&p).unwrap();
        let mut cfg = SimConfig::new(p, regime_profile(ta.regime, ta.x_star));
        cfg.n_trials = 2000;
        cfg.n_voters = 1000;
        cfg.seed = 11;
        let chk = best_response_check(&cfg, 0.05).unwrap();
        if chk.verdict == Verdict::Match {
            matched += 1;
        }
        lines.push(format!(
            "bk={:.1} c={c}: predicted {} simulated {} ({:?})",
            p.beta_k(echolab::Side::Left),
            chk.predicted.name(),
            chk.best.name(),
            chk.verdict
        ));
    }
    let pass = matched == points.len();
    report(8, "regime diagram", pass, format!("{matched}/{} separated matches", points.len()));
    for l in &lines {
        println!("    {l}");
    }
    pass
}

fn c09_own_side_targeting_dominated() -> bool {
    // L's moderate targets her own side or stays silent, with voters
    // anticipating the choice, against each opponent behavior.
    let opponents = ["silent", "target_own", "target_opponent", "random x*"];
    let mut violations = [0usize; 4];
    let mut example: [Option<Counterexample>; 4] = [None; 4];
    let mut checked = 0;
    for i in 1..=9 {
        for m in [0.05, 0.1, 0.15, 0.2] {
            for (k, beta) in [(1, 0.3), (2, 0.5), (5, 0.8), (20, 0.5)] {
                for c in [0.005, 0.02, 0.05, 0.1, 0.2, 0.4] {
                    let sigma = i as f64 / 10.0;
                    let p = sym(m, sigma, c, k, beta);
                    let x = solve_random_ad(&p).unwrap().x;
                    let bases = [
                        StrategyProfile::silent(),
                        StrategyProfile::symmetric(Advertising::target_own()),
                        StrategyProfile::symmetric(Advertising::target_opponent()),
                        StrategyProfile::symmetric_random(x),
                    ];
                    for (j, base) in bases.iter().enumerate() {
                        let with_l = |ad: Advertising| base.with(Party::L, PartyStrategy { moderate: ad, ..*base.party(Party::L) });
                        let own = party_utility(&with_l(Advertising::target_own()), Party::L, CandidateType::Moderate, &p);
                        let none = party_utility(&with_l(Advertising::NONE), Party::L, CandidateType::Moderate, &p);
                        checked += 1;
                        if own > none + 1e-12 {
                            violations[j] += 1;
                            example[j].get_or_insert((m, sigma, k, beta, c, own - none));
                        }
                    }
                }
            }
        }
    }
    let pass = violations.iter().all(|&v| v == 0);
    let by_opp: Vec<String> = opponents.iter().zip(violations).map(|(o, v)| format!("{o}: {v}")).collect();
    report(9, "own-side targeting dominated", pass, format!("{checked} cases, violations by opponent behavior [{}]", by_opp.join(", ")));
    for (o, e) in opponents.iter().zip(example) {
        if let Some((m, sigma, k, beta, c, gain)) = e {
            println!("    vs {o}: m={m} sigma={sigma} k={k} beta={beta} c={c} gains {gain:.3e}");
        }
    }
    if let Some((m, sigma, k, beta, c, _)) = example[2] {
        // Monte Carlo confirmation of the first counterexample
        let p = sym(m, sigma, c, k, beta);
        let base = StrategyProfile::symmetric(Advertising::target_opponent());
        let sim = |ad: Advertising| {
            let mut cfg = SimConfig::new(p, base.with(Party::L, PartyStrategy { moderate: ad, ..*base.party(Party::L) }));
            cfg.n_trials = 20_000;
            cfg.n_voters = 1000;
            cfg.seed = 3;
            estimate(&cfg, Quantity::PartyUtility { party: Party::L, own_type: CandidateType::Moderate }).unwrap()
        };
        let (own, none) = (sim(Advertising::target_own()), sim(Advertising::NONE));
        println!(
            "    simulated vs target_opponent: own {:.5} +- {:.5}, none {:.5} +- {:.5}",
            own.mean, own.std_error, none.mean, none.std_error
        );
    }
    pass
}

fn c10_mixed_selection() -> bool {
    let mut worst_res: f64 = 0.0;
    let mut worst_ind: f64 = 0.0;
    let mut mixed = 0;
    for (m, k, beta, c) in [(0.2, 2, 0.5, 0.005), (0.1, 2, 0.5, 0.01), (0.1, 1, 0.8, 0.02), (0.05, 2, 0.5, 0.01), (0.15, 5, 0.5, 0.01)] {
        let s = solve_candidate_selection(&sym(m, 0.5, c, k, beta)).unwrap();
        if s.regime == SelectionRegime::Mixed {
            mixed += 1;
        }
        worst_res = worst_res.max(s.residuals[0].abs()).max(s.residuals[1].abs());
        worst_ind = worst_ind.max(s.indifference.abs());
    }
    let mut extremist_cases = 0;
    let mut extremist_misses = 0;
    for m in [0.05, 0.1, 0.15, 0.2] {
        for (k, beta) in [(1, 0.3), (2, 0.5), (5, 0.8)] {
            for c in [0.01, 0.05, 0.1, 0.15, 0.2, 0.3] {
                let p = sym(m, 0.5, c, k, beta);
                let cb = c_bar(&p);
                if cb.valid && c >= cb.value {
                    extremist_cases += 1;
                    if solve_candidate_selection(&p).map(|s| s.regime) != Ok(SelectionRegime::AllExtremist) {
                        extremist_misses += 1;
                    }
                }
            }
        }
    }
    let pass = mixed == 5 && worst_res < 1e-10 && worst_ind < 1e-8 && extremist_cases > 0 && extremist_misses == 0;
    report(
        10,
        "mixed candidate selection",
        pass,
        format!(
            "{mixed}/5 mixed, residual {worst_res:.1e}, indifference {worst_ind:.1e}; c >= c_bar: {extremist_cases} cases, {extremist_misses} misses"
        ),
    );
    pass
}

fn c11_benchmark_reduction() -> bool {
    let mut exact = true;
    for j in 0..=100 {
        let x = j as f64 / 100.0;
        for beta in [0.0, 0.3, 0.9] {
            exact &= informed_fraction(x, 0, beta) == x;
        }
    }
    let mut rule = true;
    for sigma in [0.3, 0.5, 0.8] {
        for m in [0.1, 0.2] {
            let c0 = (1.0 - sigma) * (2.0 - 3.0 * m) / 16.0;
            for (c, want) in [(c0 * 0.5, 1.0), (c0 - 1e-9, 1.0), (c0 + 1e-9, 0.0), (c0 * 2.0, 0.0)] {
                let sol = solve_random_ad(&sym(m, sigma, c, 0, 0.5)).unwrap();
                rule &= sol.x == want && sol.advertise == (want == 1.0);
            }
        }
    }
    let pass = exact && rule;
    report(11, "k = 0 benchmark", pass, format!("informed fraction exact: {exact}, bang-bang at c0: {rule}"));
    pass
}

fn c12_deterministic_output() -> bool {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("det.toml");
    std::fs::write(
        &cfg,
        "name = \"det\"\n[params]\nm = 0.2\nsigma = 0.5\nk = 2\nbeta = 0.5\n[profile]\nsource = \"solve\"\n[sim]\ntrials = 2000\nvoters = 200\nseed = 42\n",
    )
    .unwrap();
    let run = |out: &str, format: &str| {
        let out = dir.path().join(out);
        let status = Command::new(env!("CARGO_BIN_EXE_echolab"))
            .args(["run", cfg.to_str().unwrap(), "--out-dir", out.to_str().unwrap(), "--format", format, "--seed", "9"])
            .status()
            .unwrap();
        assert!(status.code().is_some());
        std::fs::read(out.join(format!("det.{format}"))).unwrap()
    };
    let csv_same = run("a", "csv") == run("b", "csv");
    let json_same = run("c", "json") == run("d", "json");
    let pass = csv_same && json_same;
    report(12, "deterministic output", pass, format!("csv identical: {csv_same}, json identical: {json_same}"));
    pass
}

fn main() {
    let criteria: [(&str, fn() -> bool); 12] = [
        ("echo-chamber map", c01_echo_chamber_oracle),
        ("cutoff values", c02_cutoff_values),
        ("cutoff monotonicity", c03_monotonicity),
        ("threshold ordering", c04_threshold_ordering),
        ("extremist advertising dominated", c05_extremist_ads_never_pay),
        ("random-ad best response", c06_random_ad_best_response),
        ("Monte Carlo agreement", c07_monte_carlo_agreement),
        ("regime diagram", c08_regime_diagram),
        ("own-side targeting dominated", c09_own_side_targeting_dominated),
        ("mixed candidate selection", c10_mixed_selection),
        ("k = 0 benchmark", c11_benchmark_reduction),
        ("deterministic output", c12_deterministic_output),
    ];
    let mut failed = Vec::new();
    for (i, (title, run)) in criteria.into_iter().enumerate() {
        let n = i as u32 + 1;
        match std::panic::catch_unwind(run) {
            Ok(true) => {}
            Ok(false) => failed.push(n),
            Err(_) => {
                report(n, title, false, "panicked".into());
                failed.push(n);
            }
        }
    }
    println!("acceptance: {}/12 criteria pass; failing: {failed:?}", 12 - failed.len());
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
