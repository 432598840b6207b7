//! Continuous-dependence and mesh-refinement studies.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::solver::{
    backward_induction_oracle, solve_picard, PicardConfig, PicardReport, Scenario, ScenarioSpec, SolutionQuad,
    TerminalSpec,
};
use crate::tree::AdaptedProcess;

#[derive(Debug, Clone, PartialEq)]
pub struct DependenceRow {
    pub eps: f64,
    /// `E|xi^1 - xi^2|^2`
    pub e_xi_hat_sq: f64,
    /// `E sup|Y^1 - Y^2|^2 + E sup|K^1 - K^2|^2 + E sum |Z^1 - Z^2|^2 dt`
    pub lhs: f64,
    /// `lhs / e_xi_hat_sq`, or 0 when the perturbation vanishes.
    pub ratio: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DependenceReport {
    pub rows: Vec<DependenceRow>,
    /// Largest ratio over the rows.
    pub c_hat: f64,
    pub base_converged: bool,
}

impl DependenceReport {
    /// Largest over smallest ratio among rows with a nonzero perturbation.
    pub fn ratio_spread(&self) -> Option<f64> {
        let r: Vec<f64> = self.rows.iter().filter(|r| r.e_xi_hat_sq > 0.0).map(|r| r.ratio).collect();
        let lo = r.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = r.iter().copied().fold(0.0, f64::max);
        (!r.is_empty() && lo > 0.0).then(|| hi / lo)
    }
}

fn mean(v: impl Iterator<Item = f64>, count: usize) -> f64 {
    v.sum::<f64>() / count as f64
}

fn expected_sup_sq(scenario: &Scenario, a: &AdaptedProcess, b: &AdaptedProcess) -> f64 {
    let tree = scenario.tree();
    let n = tree.depth();
    mean(
        (0..tree.num_paths()).map(|w| {
            (0..=n)
                .map(|k| {
                    let d = a.at(k, w) - b.at(k, w);
                    d * d
                })
                .fold(0.0, f64::max)
        }),
        tree.num_paths(),
    )
}

/// `E sup|dY|^2 + E sup|dK|^2 + E sum |dZ|^2 dt` between two solutions on the same tree.
pub fn dependence_lhs(scenario: &Scenario, a: &SolutionQuad, b: &SolutionQuad) -> f64 {
    let tree = scenario.tree();
    let dt = tree.grid().dt();
    let z: f64 = (0..tree.depth())
        .map(|k| {
            let (za, zb) = (a.z.level(k), b.z.level(k));
            mean(za.iter().zip(zb).map(|(x, y)| (x - y) * (x - y)), za.len()) * dt
        })
        .sum();
    expected_sup_sq(scenario, &a.y, &b.y) + expected_sup_sq(scenario, &a.k(), &b.k()) + z
}

/// Solves with `xi` and with `xi + eps * delta` for every `eps` and compares.
pub fn dependence_study(
    scenario: &Scenario,
    delta: &TerminalSpec,
    eps_list: &[f64],
    cfg: &PicardConfig,
) -> Result<DependenceReport> {
    let tree = scenario.tree();
    let shift = delta.eval(tree);
    let (lo, hi) = (scenario.barriers().lower().last(), scenario.barriers().upper().last());
    let mut perturbed = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        if !eps.is_finite() {
            return Err(Error::InvalidConfig("perturbation sizes must be finite"));
        }
        let xi: Vec<f64> = scenario.terminal().iter().zip(&shift).map(|(x, d)| x + eps * d).collect();
        if let Some((path, &value)) = xi.iter().enumerate().find(|(_, &v)| !(lo..=hi).contains(&v)) {
            return Err(Error::PerturbationOutside { eps, path, value });
        }
        perturbed.push((eps, scenario.with_terminal_values(xi)?));
    }

    let base = solve_picard(scenario, cfg)?;
    let mut rows = Vec::with_capacity(perturbed.len());
    for (eps, other) in perturbed {
        let sol: PicardReport = solve_picard(&other, cfg)?;
        let e_xi_hat_sq =
            mean(scenario.terminal().iter().zip(other.terminal()).map(|(a, b)| (a - b) * (a - b)), tree.num_paths());
        let lhs = dependence_lhs(scenario, &base.solution, &sol.solution);
        let ratio = if e_xi_hat_sq > 0.0 { lhs / e_xi_hat_sq } else { 0.0 };
        rows.push(DependenceRow { eps, e_xi_hat_sq, lhs, ratio, converged: sol.converged });
    }
    let c_hat = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    Ok(DependenceReport { rows, c_hat, base_converged: base.converged })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub steps: usize,
    /// `max over nodes |Y_picard - Y_oracle|`
    pub sup_error: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Picard solution against the backward-induction oracle on each mesh.
pub fn convergence_study(spec: &ScenarioSpec, steps: &[usize], cfg: &PicardConfig) -> Result<Vec<ConvergenceRow>> {
    steps
        .iter()
        .map(|&n| {
            let s = spec.build(n)?;
            let oracle = backward_induction_oracle(&s)?;
            let report = solve_picard(&s, cfg)?;
            Ok(ConvergenceRow {
                steps: n,
                sup_error: report.solution.y.max_abs_diff(&oracle.y),
                iterations: report.iterations,
                converged: report.converged,
            })
        })
        .collect()
}

/// `e_{i+1} <= max(slack * e_i, floor)` for consecutive entries; the floor
/// keeps rounding-level errors from counting as growth.
pub fn errors_non_increasing(errors: &[f64], slack: f64, floor: f64) -> bool {
    errors.windows(2).all(|w| w[1] <= (slack * w[0]).max(floor))
}
