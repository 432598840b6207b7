//! Extended Skorohod map on a time-dependent interval `[alpha, beta]`.
//!
//! Three independent routes compute the same regulator functional `Xi`:
//!
//! - [`xi_max_formula`]: the explicit max/min formula, with the positive part
//!   applied to the initial term only;
//! - [`xi_slaby`]: the branch formula driven by the first hitting times of the
//!   two barriers and the functionals [`h_functional`] / [`j_functional`];
//! - [`step_projection_oracle`]: step-by-step clamping of the reflected path.
//!
//! The reflected path is `Gamma(x) = x - Xi(x)` and the regulator is
//! `eta = -Xi = eta^l - eta^u`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::{sup_norm_distance, BarrierPair, DiscretePath};

/// Absolute tolerance for comparing the three routes.
pub const CROSS_CHECK_TOL: f64 = 1e-12;

/// First strictly positive grid indices at which `x` reaches each barrier.
/// `None` stands for "never" (`+infinity`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HittingTimes {
    pub lower: Option<usize>,
    pub upper: Option<usize>,
}

impl HittingTimes {
    /// `T^beta < T_alpha`, with `None` ordered last.
    pub fn upper_first(&self) -> bool {
        match (self.upper, self.lower) {
            (Some(u), Some(l)) => u < l,
            (Some(_), None) => true,
            _ => false,
        }
    }

    /// `T_alpha < T^beta`, with `None` ordered last.
    pub fn lower_first(&self) -> bool {
        match (self.lower, self.upper) {
            (Some(l), Some(u)) => l < u,
            (Some(_), None) => true,
            _ => false,
        }
    }
}

/// Reflected path, regulator functional and the regulator's flat-off split.
#[derive(Debug, Clone, PartialEq)]
pub struct EsmOutput {
    /// `y = x - xi`
    pub reflected: DiscretePath,
    pub xi: DiscretePath,
    /// `eta = -xi`
    pub regulator: DiscretePath,
    /// Nondecreasing, increases only where `y` sits on the lower barrier.
    pub eta_l: DiscretePath,
    /// Nondecreasing, increases only where `y` sits on the upper barrier.
    pub eta_u: DiscretePath,
}

fn check_grid(x: &DiscretePath, b: &BarrierPair) -> Result<()> {
    x.ensure_same_grid(b.lower())
}

pub fn hitting_times(x: &DiscretePath, b: &BarrierPair) -> Result<HittingTimes> {
    check_grid(x, b)?;
    let (alpha, beta) = (b.lower().values(), b.upper().values());
    let x = x.values();
    if !(alpha[0] < x[0] && x[0] < beta[0]) {
        return Err(Error::StartOutside { x0: x[0], lower: alpha[0], upper: beta[0] });
    }
    let lower = (1..x.len()).find(|&k| alpha[k] - x[k] >= 0.0);
    let upper = (1..x.len()).find(|&k| x[k] - beta[k] >= 0.0);
    Ok(HittingTimes { lower, upper })
}

/// `H(x)_t = max_{s<=t} [ (x_s - beta_s) min min_{s<=r<=t} (x_r - alpha_r) ]`.
pub fn h_functional(x: &DiscretePath, b: &BarrierPair, t: usize) -> Result<f64> {
    check_grid(x, b)?;
    let (alpha, beta, x) = (b.lower().values(), b.upper().values(), x.values());
    let mut inner = f64::INFINITY;
    let mut best = f64::NEG_INFINITY;
    for s in (0..=t).rev() {
        inner = inner.min(x[s] - alpha[s]);
        best = best.max((x[s] - beta[s]).min(inner));
    }
    Ok(best)
}

/// `J(x)_t = min_{s<=t} [ (x_s - alpha_s) max max_{s<=r<=t} (x_r - beta_r) ]`.
pub fn j_functional(x: &DiscretePath, b: &BarrierPair, t: usize) -> Result<f64> {
    check_grid(x, b)?;
    let (alpha, beta, x) = (b.lower().values(), b.upper().values(), x.values());
    let mut inner = f64::NEG_INFINITY;
    let mut best = f64::INFINITY;
    for s in (0..=t).rev() {
        inner = inner.max(x[s] - beta[s]);
        best = best.min((x[s] - alpha[s]).max(inner));
    }
    Ok(best)
}

// Both H and J satisfy G_t = min(max(G_{t-1}, x_t - beta_t), x_t - alpha_t); they
// differ only in the starting value.
fn running_clamp(x: &[f64], alpha: &[f64], beta: &[f64], start: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.len());
    let mut g = start;
    out.push(g);
    for k in 1..x.len() {
        g = g.max(x[k] - beta[k]).min(x[k] - alpha[k]);
        out.push(g);
    }
    out
}

/// `H(x)_t` for every `t`, in one pass.
pub fn h_path(x: &DiscretePath, b: &BarrierPair) -> Result<DiscretePath> {
    check_grid(x, b)?;
    let (alpha, beta, xv) = (b.lower().values(), b.upper().values(), x.values());
    Ok(DiscretePath::from_raw(*x.grid(), running_clamp(xv, alpha, beta, xv[0] - beta[0])))
}

/// `J(x)_t` for every `t`, in one pass.
pub fn j_path(x: &DiscretePath, b: &BarrierPair) -> Result<DiscretePath> {
    check_grid(x, b)?;
    let (alpha, beta, xv) = (b.lower().values(), b.upper().values(), x.values());
    Ok(DiscretePath::from_raw(*x.grid(), running_clamp(xv, alpha, beta, xv[0] - alpha[0])))
}

/// Regulator functional from the explicit max formula
///
/// `Xi_t = max{ (x_0 - beta_0)^+ min min_{r<=t}(x_r - alpha_r),
///              max_{s<=t} [ (x_s - beta_s) min min_{s<=r<=t}(x_r - alpha_r) ] }`.
///
/// Evaluated with running extrema, one pass over the grid.
pub fn xi_max_formula(x: &DiscretePath, b: &BarrierPair) -> Result<DiscretePath> {
    check_grid(x, b)?;
    let (alpha, beta, x_vals) = (b.lower().values(), b.upper().values(), x.values());
    let mut out = Vec::with_capacity(x_vals.len());
    let mut first = f64::max(x_vals[0] - beta[0], 0.0);
    let mut sup_term = f64::NEG_INFINITY;
    for k in 0..x_vals.len() {
        let below = x_vals[k] - alpha[k];
        let above = x_vals[k] - beta[k];
        first = first.min(below);
        sup_term = sup_term.max(above).min(below);
        out.push(first.max(sup_term));
    }
    Ok(DiscretePath::from_raw(*x.grid(), out))
}

/// Regulator functional from the hitting-time branch formula
///
/// `Xi_t = 1{T^beta < T_alpha} 1{t >= T^beta} H(x)_t + 1{T_alpha < T^beta} 1{t >= T_alpha} J(x)_t`.
///
/// Requires `x_0` strictly inside `(alpha_0, beta_0)`.
pub fn xi_slaby(x: &DiscretePath, b: &BarrierPair) -> Result<DiscretePath> {
    let hits = hitting_times(x, b)?;
    let mut out = alloc::vec![0.0; x.len()];
    if hits.upper_first() {
        let start = hits.upper.unwrap_or(usize::MAX);
        let h = h_path(x, b)?;
        out[start..].copy_from_slice(&h.values()[start..]);
    } else if hits.lower_first() {
        let start = hits.lower.unwrap_or(usize::MAX);
        let j = j_path(x, b)?;
        out[start..].copy_from_slice(&j.values()[start..]);
    }
    Ok(DiscretePath::from_raw(*x.grid(), out))
}

/// Reflect `x` by clamping one step at a time.
///
/// `y_0 = clamp(x_0)`, then `y_k = clamp(y_{k-1} + x_k - x_{k-1})`; the amount
/// removed above `beta` goes to `eta^u`, the amount added below `alpha` to
/// `eta^l`. When clamping, `y_k` is set to the barrier value itself, so the
/// flat-off sums are exactly zero.
pub fn step_projection_oracle(x: &DiscretePath, b: &BarrierPair) -> Result<EsmOutput> {
    check_grid(x, b)?;
    let (alpha, beta, xv) = (b.lower().values(), b.upper().values(), x.values());
    let n = xv.len();
    let mut y = Vec::with_capacity(n);
    let mut eta_l = Vec::with_capacity(n);
    let mut eta_u = Vec::with_capacity(n);
    let (mut acc_l, mut acc_u) = (0.0, 0.0);
    let mut prev_y = 0.0;
    for k in 0..n {
        let pre = if k == 0 { xv[0] } else { prev_y + (xv[k] - xv[k - 1]) };
        let yk = if pre > beta[k] {
            acc_u += pre - beta[k];
            beta[k]
        } else if pre < alpha[k] {
            acc_l += alpha[k] - pre;
            alpha[k]
        } else {
            pre
        };
        y.push(yk);
        eta_l.push(acc_l);
        eta_u.push(acc_u);
        prev_y = yk;
    }
    let grid = *x.grid();
    let xi: Vec<f64> = xv.iter().zip(&y).map(|(a, b)| a - b).collect();
    let regulator = eta_l.iter().zip(&eta_u).map(|(l, u)| l - u).collect();
    Ok(EsmOutput {
        reflected: DiscretePath::from_raw(grid, y),
        xi: DiscretePath::from_raw(grid, xi),
        regulator: DiscretePath::from_raw(grid, regulator),
        eta_l: DiscretePath::from_raw(grid, eta_l),
        eta_u: DiscretePath::from_raw(grid, eta_u),
    })
}

/// `Gamma(x) = x - Xi(x)` with `Xi` from the max formula; the one-sided split
/// of the regulator comes from the step-projection oracle.
pub fn esm_gamma(x: &DiscretePath, b: &BarrierPair) -> Result<EsmOutput> {
    let xi = xi_max_formula(x, b)?;
    let oracle = step_projection_oracle(x, b)?;
    let grid = *x.grid();
    let reflected = x.values().iter().zip(xi.values()).map(|(a, c)| a - c).collect();
    let regulator = xi.values().iter().map(|v| -v).collect();
    Ok(EsmOutput {
        reflected: DiscretePath::from_raw(grid, reflected),
        xi,
        regulator: DiscretePath::from_raw(grid, regulator),
        eta_l: oracle.eta_l,
        eta_u: oracle.eta_u,
    })
}

/// Jordan decomposition of a path's increments (with `p_{-1} = 0`) into
/// cumulative positive and negative variation.
pub fn jordan_decomposition(p: &DiscretePath) -> (DiscretePath, DiscretePath) {
    let (mut pos, mut neg) = (0.0, 0.0);
    let mut pos_path = Vec::with_capacity(p.len());
    let mut neg_path = Vec::with_capacity(p.len());
    for d in p.increments() {
        if d > 0.0 {
            pos += d;
        } else {
            neg -= d;
        }
        pos_path.push(pos);
        neg_path.push(neg);
    }
    (DiscretePath::from_raw(*p.grid(), pos_path), DiscretePath::from_raw(*p.grid(), neg_path))
}

/// Flat-off residuals `(sum_k (beta_k - y_k) d eta^u_k, sum_k (y_k - alpha_k) d eta^l_k)`.
///
/// Both vanish for a genuine Skorohod solution; a regulator that charges the
/// interior shows up as a strictly positive value.
pub fn check_skorohod_conditions(out: &EsmOutput, b: &BarrierPair) -> Result<(f64, f64)> {
    check_grid(&out.reflected, b)?;
    let y = out.reflected.values();
    let (alpha, beta) = (b.lower().values(), b.upper().values());
    let du = out.eta_u.increments();
    let dl = out.eta_l.increments();
    let upper = (0..y.len()).map(|k| (beta[k] - y[k]) * du[k]).sum();
    let lower = (0..y.len()).map(|k| (y[k] - alpha[k]) * dl[k]).sum();
    Ok((upper, lower))
}

/// Total variation of the regulator, `eta^l_N + eta^u_N`.
pub fn regulator_variation(out: &EsmOutput) -> f64 {
    out.eta_l.last() + out.eta_u.last()
}

/// `||x - x'|| - ||Gamma(x) - Gamma(x')||`; nonnegative up to rounding.
pub fn lipschitz_gap(x: &DiscretePath, x_other: &DiscretePath, b: &BarrierPair) -> Result<f64> {
    let input = sup_norm_distance(x, x_other)?;
    let gx = esm_gamma(x, b)?;
    let gy = esm_gamma(x_other, b)?;
    Ok(input - sup_norm_distance(&gx.reflected, &gy.reflected)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{BarrierSpec, TimeGrid};

    fn unit(n: usize) -> (TimeGrid, BarrierPair) {
        let g = TimeGrid::uniform(1.0, n).unwrap();
        (g, BarrierPair::constant(g, 0.0, 1.0).unwrap())
    }

    fn path(g: TimeGrid, v: &[f64]) -> DiscretePath {
        DiscretePath::new(g, v.to_vec()).unwrap()
    }

    #[test]
    fn hitting_times_monotone_paths() {
        let (g, b) = unit(3);
        let up = path(g, &[0.5, 0.75, 1.0, 1.25]);
        assert_eq!(hitting_times(&up, &b).unwrap(), HittingTimes { lower: None, upper: Some(2) });
        let down = path(g, &[0.5, 0.25, 0.0, -0.25]);
        assert_eq!(hitting_times(&down, &b).unwrap(), HittingTimes { lower: Some(2), upper: None });
        let flat = DiscretePath::constant(g, 0.5).unwrap();
        assert_eq!(hitting_times(&flat, &b).unwrap(), HittingTimes { lower: None, upper: None });
    }

    #[test]
    fn start_on_barrier_is_rejected() {
        let (g, b) = unit(2);
        let x = path(g, &[1.0, 0.5, 0.5]);
        assert!(matches!(hitting_times(&x, &b), Err(Error::StartOutside { .. })));
        assert!(matches!(xi_slaby(&x, &b), Err(Error::StartOutside { .. })));
        // the max formula and the oracle still accept it
        assert!(xi_max_formula(&x, &b).is_ok());
        assert!(step_projection_oracle(&x, &b).is_ok());
    }

    #[test]
    fn h_and_j_examples() {
        let (g, b) = unit(4);
        let ramp = path(g, &[0.0, 0.5, 1.0, 1.5, 2.0]);
        assert_eq!(h_functional(&ramp, &b, 4).unwrap(), 1.0);
        assert_eq!(h_functional(&ramp, &b, 0).unwrap(), -1.0);
        let down = path(g, &[1.0, 0.5, 0.0, -0.5, -1.0]);
        assert_eq!(j_functional(&down, &b, 4).unwrap(), -1.0);
        assert_eq!(j_functional(&down, &b, 0).unwrap(), 1.0);
        let flat = DiscretePath::constant(g, 0.5).unwrap();
        for t in 0..=4 {
            assert_eq!(h_functional(&flat, &b, t).unwrap(), -0.5);
            assert_eq!(j_functional(&flat, &b, t).unwrap(), 0.5);
        }
    }

    #[test]
    fn path_versions_match_scalar_versions() {
        let (g, b) = unit(6);
        let x = path(g, &[0.3, 1.4, 0.9, -0.6, 0.2, 1.1, 0.7]);
        let h = h_path(&x, &b).unwrap();
        let j = j_path(&x, &b).unwrap();
        for t in 0..=6 {
            assert_eq!(h.get(t), h_functional(&x, &b, t).unwrap());
            assert_eq!(j.get(t), j_functional(&x, &b, t).unwrap());
        }
    }

    #[test]
    fn monotone_ramp_regulator() {
        let (g, b) = unit(4);
        let ramp = path(g, &[0.0, 0.5, 1.0, 1.5, 2.0]);
        let xi = xi_max_formula(&ramp, &b).unwrap();
        assert_eq!(xi.values(), &[0.0, 0.0, 0.0, 0.5, 1.0]);
        let out = esm_gamma(&ramp, &b).unwrap();
        assert_eq!(out.reflected.values(), &[0.0, 0.5, 1.0, 1.0, 1.0]);
        assert_eq!(out.eta_u.values(), &[0.0, 0.0, 0.0, 0.5, 1.0]);
        assert!(out.eta_l.values().iter().all(|&v| v == 0.0));
        assert_eq!(check_skorohod_conditions(&out, &b).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn slaby_branches() {
        let (g, b) = unit(4);
        let up = path(g, &[0.5, 0.75, 1.0, 1.5, 2.0]);
        assert_eq!(xi_slaby(&up, &b).unwrap(), xi_max_formula(&up, &b).unwrap());

        let down = path(g, &[0.5, 0.25, 0.0, -0.5, -1.0]);
        let xi = xi_slaby(&down, &b).unwrap();
        let oracle = step_projection_oracle(&down, &b).unwrap();
        assert_eq!(xi.values(), oracle.xi.values());
        assert_eq!(down.get(4) - xi.get(4), 0.0);

        let inside = path(g, &[0.5, 0.6, 0.4, 0.7, 0.2]);
        assert!(xi_slaby(&inside, &b).unwrap().values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn interior_path_is_not_reflected() {
        let (g, b) = unit(4);
        let x = path(g, &[0.5, 0.6, 0.4, 0.7, 0.2]);
        let out = esm_gamma(&x, &b).unwrap();
        assert_eq!(out.reflected, x);
        let oracle = step_projection_oracle(&x, &b).unwrap();
        assert_eq!(oracle.reflected, x);
        assert!(oracle.regulator.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn oracle_clamps_the_initial_point() {
        let (g, b) = unit(2);
        let x = path(g, &[1.5, 1.0, 2.0]);
        let out = step_projection_oracle(&x, &b).unwrap();
        assert_eq!(out.reflected.values(), &[1.0, 0.5, 1.0]);
        assert_eq!(out.eta_u.values(), &[0.5, 0.5, 1.0]);
        assert_eq!(xi_max_formula(&x, &b).unwrap().values(), out.xi.values());
    }

    #[test]
    fn residual_detects_interior_charging() {
        let (g, b) = unit(2);
        let x = path(g, &[0.5, 0.5, 0.5]);
        let mut out = step_projection_oracle(&x, &b).unwrap();
        out.eta_u = path(g, &[0.0, 0.25, 0.25]);
        out.eta_l = path(g, &[0.0, 0.0, 0.1]);
        let (upper, lower) = check_skorohod_conditions(&out, &b).unwrap();
        assert!(upper > 0.0 && lower > 0.0);
        assert_eq!(upper, 0.5 * 0.25);
    }

    #[test]
    fn jordan_split_matches_oracle() {
        let g = TimeGrid::uniform(1.0, 6).unwrap();
        let b = BarrierPair::from_specs(
            &BarrierSpec::Affine { a: -0.2, b: 0.1 },
            &BarrierSpec::Sinusoid { a: 0.6, b: 0.2, c: 4.0 },
            g,
        )
        .unwrap();
        let x = path(g, &[0.1, 1.2, 0.4, -0.9, -0.3, 0.9, 0.2]);
        let out = step_projection_oracle(&x, &b).unwrap();
        let (pos, neg) = jordan_decomposition(&out.regulator);
        for k in 0..=6 {
            assert!((pos.get(k) - out.eta_l.get(k)).abs() < 1e-12);
            assert!((neg.get(k) - out.eta_u.get(k)).abs() < 1e-12);
        }
    }

    #[test]
    fn lipschitz_gap_identity_and_shift() {
        let (g, b) = unit(4);
        let x = path(g, &[0.5, 0.6, 0.4, 0.7, 0.2]);
        assert_eq!(lipschitz_gap(&x, &x, &b).unwrap(), 0.0);
        let shifted = x.map(|v| v + 0.05).unwrap();
        assert!(lipschitz_gap(&x, &shifted, &b).unwrap() >= -CROSS_CHECK_TOL);
    }
}
