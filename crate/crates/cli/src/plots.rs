//! Plot-ready tables: credibility map over (s, r), technology regimes over
//! (beta k, c), and cost thresholds along m or sigma.

use std::path::{Path, PathBuf};

use echolab::communication::{map_truthful_region, CANONICAL_INFO};
use echolab::simulation::{best_response_check, SimError};
use echolab::strategy::{benchmark_thresholds, regime_profile, targeting_analysis, technology_payoffs, SolveError};
use echolab::Side;
use thiserror::Error;

use crate::config::{CurveAxis, Scenario};
use crate::output::{write_file, Cell, Format, Table};
use crate::pipeline::RunResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    ChamberMap,
    RegimeDiagram,
    ThresholdCurves,
}

impl PlotKind {
    pub const ALL: [PlotKind; 3] = [PlotKind::ChamberMap, PlotKind::RegimeDiagram, PlotKind::ThresholdCurves];

    pub fn file_stem(self) -> &'static str {
        match self {
            PlotKind::ChamberMap => "chamber_map",
            PlotKind::RegimeDiagram => "regime_diagram",
            PlotKind::ThresholdCurves => "threshold_curves",
        }
    }
}

#[derive(Debug, Error)]
pub enum PlotError {
    #[error("{kind} needs `{field}` in the scenario")]
    Missing { kind: &'static str, field: &'static str },
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub fn info_label(j: usize) -> &'static str {
    match CANONICAL_INFO[j] {
        [true, true] => "both",
        [true, false] => "left",
        [false, true] => "right",
        [false, false] => "none",
    }
}

pub fn chamber_map(result: &RunResult, step: f64) -> Table {
    let region = map_truthful_region(&result.params, &result.profile, step);
    let mut t = Table::new(&["s", "r", "info", "truthful"]);
    for a in 0..region.n {
        for b in 0..region.n {
            for j in 0..CANONICAL_INFO.len() {
                t.push(vec![
                    region.center(a).into(),
                    region.center(b).into(),
                    info_label(j).into(),
                    region.truthful(a, b, j).into(),
                ]);
            }
        }
    }
    t
}

pub fn regime_diagram(result: &RunResult, scenario: &Scenario) -> Result<Table, PlotError> {
    let spec = scenario
        .plots
        .regime_diagram
        .as_ref()
        .ok_or(PlotError::Missing { kind: "regime diagram", field: "plots.regime_diagram" })?;
    let sim = scenario.sim.as_ref().ok_or(PlotError::Missing { kind: "regime diagram", field: "sim" })?;
    let mut t = Table::new(&[
        "k", "beta_k", "c", "kbeta_bar", "c_star", "c_hat_bar", "predicted", "analytic_best", "analytic_intensity", "simulated_best",
        "separated", "verdict",
    ]);
    for &k in &spec.k {
        for &c in &spec.c {
            let params = echolab::ModelParams { k, c, ..result.params };
            let ta = targeting_analysis(&params)?;
            let baseline = regime_profile(ta.regime, ta.x_star);
            let analytic = technology_payoffs(&params, &baseline, 100)
                .into_iter()
                .filter(|p| p.technology != echolab::Technology::Random || p.intensity > 0.0)
                .max_by(|a, b| a.utility.total_cmp(&b.utility))
                .expect("four technologies");
            let mut cfg = sim.clone();
            cfg.params = params;
            cfg.profile = baseline;
            cfg.state = None;
            let chk = best_response_check(&cfg, spec.grid_step)?;
            t.push(vec![
                k.into(),
                params.beta_k(Side::Left).into(),
                c.into(),
                ta.kbeta_bar.into(),
                ta.c_star.into(),
                ta.c_hat_bar.into(),
                ta.regime.name().into(),
                analytic.technology.name().into(),
                analytic.intensity.into(),
                chk.best.name().into(),
                chk.separated.into(),
                format!("{:?}", chk.verdict).to_lowercase().into(),
            ]);
        }
    }
    Ok(t)
}

pub fn threshold_curves(result: &RunResult, scenario: &Scenario) -> Result<Table, PlotError> {
    let spec = scenario
        .plots
        .threshold_curves
        .as_ref()
        .ok_or(PlotError::Missing { kind: "threshold curves", field: "plots.threshold_curves" })?;
    let axis = match spec.axis {
        CurveAxis::M => "m",
        CurveAxis::Sigma => "sigma",
    };
    let mut t = Table::new(&["axis", "value", "c0", "c_tau", "c_star", "c_hat_bar"]);
    for &v in &spec.values {
        let mut p = result.params;
        match spec.axis {
            CurveAxis::M => p.m = v,
            CurveAxis::Sigma => (p.sigma_l, p.sigma_r) = (v, v),
        }
        let (c0, c_tau) = benchmark_thresholds(&p);
        let c_star = targeting_analysis(&p).ok().map(|a| a.c_star);
        t.push(vec![axis.into(), v.into(), c0.into(), c_tau.into(), Cell::from(c_star), echolab::strategy::c_hat_bar(&p).into()]);
    }
    Ok(t)
}

pub fn plot_table(result: &RunResult, scenario: &Scenario, kind: PlotKind) -> Result<Table, PlotError> {
    match kind {
        PlotKind::ChamberMap => {
            let step = scenario
                .plots
                .chamber_map
                .ok_or(PlotError::Missing { kind: "chamber map", field: "plots.chamber_map" })?;
            Ok(chamber_map(result, step))
        }
        PlotKind::RegimeDiagram => regime_diagram(result, scenario),
        PlotKind::ThresholdCurves => threshold_curves(result, scenario),
    }
}

/// Writes `<dir>/<scenario>_<kind>.<ext>` and returns its path.
pub fn emit_plot_data(
    result: &RunResult,
    scenario: &Scenario,
    kind: PlotKind,
    dir: &Path,
    format: Format,
) -> Result<PathBuf, PlotError> {
    let table = plot_table(result, scenario, kind)?;
    let path = dir.join(format!("{}_{}.{}", result.scenario, kind.file_stem(), format.ext()));
    write_file(&path, &table.encode(format)?)?;
    Ok(path)
}

/// Plot kinds the scenario asks for.
pub fn requested(scenario: &Scenario) -> Vec<PlotKind> {
    let p = &scenario.plots;
    PlotKind::ALL
        .into_iter()
        .filter(|k| match k {
            PlotKind::ChamberMap => p.chamber_map.is_some(),
            PlotKind::RegimeDiagram => p.regime_diagram.is_some(),
            PlotKind::ThresholdCurves => p.threshold_curves.is_some(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_scenario;
    use crate::pipeline::run_point;

    #[test]
    fn chamber_map_shape() {
        let s = parse_scenario("name = \"c\"\n[plots]\nchamber_map = 0.01\n").unwrap();
        let r = run_point(&s, 0, vec![]).unwrap();
        let t = plot_table(&r, &s, PlotKind::ChamberMap).unwrap();
        assert_eq!(t.columns.len(), 4);
        assert_eq!(t.rows.len(), 100 * 100 * 4);
    }

    #[test]
    fn missing_block_is_named() {
        let s = parse_scenario("name = \"c\"\n").unwrap();
        let r = run_point(&s, 0, vec![]).unwrap();
        let err = plot_table(&r, &s, PlotKind::ThresholdCurves).unwrap_err().to_string();
        assert!(err.contains("plots.threshold_curves"), "{err}");
    }

    #[test]
    fn threshold_curves_ordered() {
        let s = parse_scenario(
            "name = \"t\"\n[params]\ntau = 0.01\n[plots]\nthreshold_curves = { axis = \"sigma\", values = [0.1, 0.3, 0.5, 0.7, 0.9] }\n",
        )
        .unwrap();
        let r = run_point(&s, 0, vec![]).unwrap();
        let t = plot_table(&r, &s, PlotKind::ThresholdCurves).unwrap();
        for row in &t.rows {
            let (Cell::F(c0), Cell::F(ct)) = (&row[2], &row[3]) else { panic!() };
            assert!(c0 < ct);
        }
    }
}
