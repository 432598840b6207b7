//! The Picard map and its fixed-point iteration.
//!
//! One application of the map takes `(Y, Z, K^l, K^u)` and:
//!
//! 1. freezes the driver at the current iterate, `f_k = f(t_k, Y_k, Z_k, K_k)`;
//! 2. builds on each path the remainder
//!    `m_k = xi + sum_{i>=k} f_i dt - sum_{i>=k} Z_i dW_{i+1}`;
//! 3. reflects `m`, read backward in time, between the time-reversed
//!    barriers with the Skorohod map, which yields a path-by-path reflected
//!    value and nondecreasing one-sided pushes;
//! 4. projects the pushes and the reflected value back onto the filtration
//!    and reads off the new `Z` from the martingale part.
//!
//! The pushes are projected with the dual predictable projection by default
//! (increments known one step ahead). With the dual optional projection the
//! discrete map keeps a whole family of fixed points, because the split of a
//! push between the two children of a node is left free.

use alloc::vec::Vec;

use super::contraction::{contraction_constants, ContractionConstants};
use super::quad::{distance_parts, DistanceParts, SolutionQuad};
use super::residual::{residual_check, ResidualReport};
use super::scenario::Scenario;
use crate::error::{Error, Result};
use crate::grid::{reverse_in_time, DiscretePath};
use crate::skorohod::{step_projection_oracle, xi_max_formula};
use crate::tree::{
    dual_optional_projection, dual_predictable_projection, martingale_representation, optional_projection,
    AdaptedProcess, PathTree, RawProcess,
};

/// How the raw one-sided pushes are made adapted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KProjection {
    #[default]
    Predictable,
    Optional,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardConfig {
    /// Exponential time weight in the distance.
    pub alpha: f64,
    /// Weight of the `K` part of the distance.
    pub beta: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Constant of the maximal inequality used in the contraction estimate.
    pub bdg_constant: f64,
    pub projection: KProjection,
}

impl Default for PicardConfig {
    fn default() -> Self {
        Self {
            alpha: 5.0,
            beta: 1.0,
            gamma1: 1.0,
            gamma2: 1.0,
            tol: 1e-9,
            max_iter: 50,
            bdg_constant: 4.0,
            projection: KProjection::Predictable,
        }
    }
}

impl PicardConfig {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.alpha, self.beta, self.gamma1, self.gamma2, self.tol, self.bdg_constant];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("Picard parameters must be finite"));
        }
        if self.alpha < 0.0 || self.beta <= 0.0 {
            return Err(Error::InvalidConfig("need alpha >= 0 and beta > 0"));
        }
        if self.gamma1 <= 0.0 || self.gamma2 <= 0.0 {
            return Err(Error::InvalidConfig("need gamma1 > 0 and gamma2 > 0"));
        }
        if self.tol <= 0.0 || self.max_iter == 0 {
            return Err(Error::InvalidConfig("need tol > 0 and max_iter >= 1"));
        }
        if self.bdg_constant < 0.0 {
            return Err(Error::InvalidConfig("need bdg_constant >= 0"));
        }
        Ok(())
    }
}

/// Image of one Picard step together with the path-by-path quantities it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiStep {
    pub quad: SolutionQuad,
    /// Reflected value `Y_hat_k(omega)` before projection.
    pub raw_y: RawProcess,
    /// Raw nondecreasing pushes before projection.
    pub raw_kl: RawProcess,
    pub raw_ku: RawProcess,
    /// Largest gap between the oracle's regulator and the max formula's.
    pub max_formula_gap: f64,
}

fn driver_values(scenario: &Scenario, quad: &SolutionQuad) -> AdaptedProcess {
    let tree = scenario.tree();
    let grid = tree.grid();
    let f = scenario.driver();
    let k = quad.k();
    AdaptedProcess::from_fn(tree, |lvl, p| {
        f.eval(grid.time(lvl), quad.y.node(lvl, p), quad.z.node(lvl, p), k.node(lvl, p))
    })
}

fn remainder(tree: &PathTree, xi: f64, z: &AdaptedProcess, fvals: &AdaptedProcess, omega: usize) -> Vec<f64> {
    let n = tree.depth();
    let dt = tree.grid().dt();
    let mut m = alloc::vec![0.0; n + 1];
    m[n] = xi;
    for k in (0..n).rev() {
        m[k] = m[k + 1] + fvals.at(k, omega) * dt - z.at(k, omega) * tree.increment(k, omega);
    }
    m
}

/// Remainder `m_k = xi + sum_{i>=k} f_i dt - sum_{i>=k} Z_i dW_{i+1}` on path `omega`,
/// with the driver frozen at `quad`.
pub fn remainder_path(scenario: &Scenario, quad: &SolutionQuad, omega: usize) -> Result<DiscretePath> {
    let tree = scenario.tree();
    if omega >= tree.num_paths() {
        return Err(Error::IndexOrder { k: omega, m: tree.num_paths() - 1, depth: tree.depth() });
    }
    let fvals = driver_values(scenario, quad);
    DiscretePath::new(*tree.grid(), remainder(tree, scenario.terminal()[omega], &quad.z, &fvals, omega))
}

/// One application of the Picard map.
pub fn phi_step(scenario: &Scenario, quad: &SolutionQuad, projection: KProjection) -> Result<PhiStep> {
    let tree = scenario.tree();
    let n = tree.depth();
    let dt = tree.grid().dt();
    if quad.depth() != n {
        return Err(Error::LengthMismatch { expected: n, found: quad.depth() });
    }
    let fvals = driver_values(scenario, quad);
    let reversed = scenario.barriers().reversed();

    let paths = tree.num_paths();
    let mut ys = Vec::with_capacity(paths);
    let mut kls = Vec::with_capacity(paths);
    let mut kus = Vec::with_capacity(paths);
    let mut max_formula_gap: f64 = 0.0;
    for w in 0..paths {
        let m = DiscretePath::new(*tree.grid(), remainder(tree, scenario.terminal()[w], &quad.z, &fvals, w))?;
        let x = reverse_in_time(&m);
        let out = step_projection_oracle(&x, &reversed)?;
        let xi = xi_max_formula(&x, &reversed)?;
        for (r, c) in out.regulator.values().iter().zip(xi.values()) {
            max_formula_gap = max_formula_gap.max((r + c).abs());
        }
        let (el, eu) = (out.eta_l.values(), out.eta_u.values());
        ys.push((0..=n).map(|k| out.reflected.get(n - k)).collect::<Vec<_>>());
        kls.push((0..=n).map(|k| el[n] - el[n - k]).collect::<Vec<_>>());
        kus.push((0..=n).map(|k| eu[n] - eu[n - k]).collect::<Vec<_>>());
    }
    let take = |v: &mut Vec<Vec<f64>>| {
        let mut it = core::mem::take(v).into_iter();
        RawProcess::from_paths(n, |_| it.next().unwrap_or_default())
    };
    let raw_y = take(&mut ys)?;
    let raw_kl = take(&mut kls)?;
    let raw_ku = take(&mut kus)?;

    let project = |a: &RawProcess| match projection {
        KProjection::Predictable => dual_predictable_projection(tree, a, true),
        KProjection::Optional => dual_optional_projection(tree, a, true),
    };
    let kl = project(&raw_kl)?;
    let ku = project(&raw_ku)?;
    let y = optional_projection(tree, &raw_y)?;

    // Y_k + K_k + sum_{i<k} f_i dt is a martingale; its increments give Z.
    let mut m = y.zip_with(&kl, |a, b| a + b).zip_with(&ku, |a, b| a - b);
    for k in 0..n {
        add_to_descendants(&mut m, k, fvals.level(k), dt);
    }
    let z = martingale_representation(tree, &m)?;
    Ok(PhiStep { quad: SolutionQuad { y, z, kl, ku }, raw_y, raw_kl, raw_ku, max_formula_gap })
}

// Adds `scale * v[p]` at every strict descendant of each level-`k` node `p`.
fn add_to_descendants(m: &mut AdaptedProcess, k: usize, v: &[f64], scale: f64) {
    let mask = (1 << k) - 1;
    for lvl in k + 1..=m.depth() {
        for (q, x) in m.level_mut(lvl).iter_mut().enumerate() {
            *x += v[q & mask] * scale;
        }
    }
}

/// One application of the Picard map; the image only.
pub fn phi_iterate(scenario: &Scenario, quad: &SolutionQuad, cfg: &PicardConfig) -> Result<SolutionQuad> {
    Ok(phi_step(scenario, quad, cfg.projection)?.quad)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PicardReport {
    pub solution: SolutionQuad,
    pub converged: bool,
    pub iterations: usize,
    /// `d_n = dist(Phi^n, Phi^{n-1})`, `n = 1, 2, ...`
    pub distances: Vec<f64>,
    /// Squared pieces of each distance.
    pub parts: Vec<DistanceParts>,
    /// `d_n / d_{n-1}` for `n >= 2` (0 when `d_{n-1} = 0`); `None` for `n = 1`.
    pub ratios: Vec<Option<f64>>,
    /// Exponential fit `d_n ~ C q^n` over the positive distances: `(q, R^2)`.
    pub geometric_fit: Option<(f64, f64)>,
    /// All measured ratios are at most 1.
    pub empirical_contraction: bool,
    pub constants: ContractionConstants,
    pub residuals: ResidualReport,
    /// `max |K_raw - K|` over all `(k, omega)` at the last step.
    pub adaptedness_gap: f64,
    /// `max |E[K_raw_k | F_k] - K_k|` at the last step.
    pub projection_gap: f64,
    pub max_formula_gap: f64,
}

pub fn solve_picard(scenario: &Scenario, cfg: &PicardConfig) -> Result<PicardReport> {
    solve_picard_from(scenario, cfg, SolutionQuad::zeros(scenario.tree().depth()))
}

pub fn solve_picard_from(scenario: &Scenario, cfg: &PicardConfig, init: SolutionQuad) -> Result<PicardReport> {
    cfg.validate()?;
    let tree = scenario.tree();
    let grid = *tree.grid();
    let mut current = init;
    let mut distances = Vec::new();
    let mut parts = Vec::new();
    let mut converged = false;
    let mut last = None;
    for _ in 0..cfg.max_iter {
        let step = phi_step(scenario, &current, cfg.projection)?;
        let p = distance_parts(&step.quad, &current, &grid, cfg.alpha);
        let d = p.combine(cfg.beta);
        distances.push(d);
        parts.push(p);
        current = step.quad.clone();
        last = Some(step);
        if d < cfg.tol {
            converged = true;
            break;
        }
    }
    let step = last.expect("max_iter >= 1");

    let raw_k = step.raw_kl.zip_with(&step.raw_ku, |l, u| l - u);
    let k = current.k();
    let adaptedness_gap = (0..=tree.depth())
        .flat_map(|lvl| (0..tree.num_paths()).map(move |w| (lvl, w)))
        .fold(0.0, |acc: f64, (lvl, w)| acc.max((raw_k.at(lvl, w) - k.at(lvl, w)).abs()));
    let projection_gap = optional_projection(tree, &raw_k)?.max_abs_diff(&k);

    let ratios = ratios(&distances);
    let empirical_contraction = ratios.iter().flatten().all(|&r| r <= 1.0);
    Ok(PicardReport {
        residuals: residual_check(scenario, &current)?,
        solution: current,
        converged,
        iterations: distances.len(),
        geometric_fit: geometric_fit(&distances),
        ratios,
        distances,
        parts,
        empirical_contraction,
        constants: contraction_constants(scenario.driver().l1(), scenario.driver().l2(), grid.horizon(), cfg),
        adaptedness_gap,
        projection_gap,
        max_formula_gap: step.max_formula_gap,
    })
}

pub fn ratios(distances: &[f64]) -> Vec<Option<f64>> {
    (0..distances.len())
        .map(|i| (i > 0).then(|| if distances[i - 1] == 0.0 { 0.0 } else { distances[i] / distances[i - 1] }))
        .collect()
}

/// Least-squares line through `(n, ln d_n)`; returns `(e^slope, R^2)`.
pub fn geometric_fit(distances: &[f64]) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> =
        distances.iter().enumerate().filter(|(_, &d)| d > 0.0).map(|(i, &d)| ((i + 1) as f64, libm::log(d))).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Some((libm::exp(slope), r2))
}
