//! Classical backward induction for drivers that do not depend on `k`:
//!
//! `Ybar_k = E[Y_{k+1} | F_k] + f(t_k, E[Y_{k+1} | F_k], Z_k, 0) dt`, `Y_k = clamp(Ybar_k, L_k, U_k)`,
//!
//! with `Z_k` the node difference of `Y_{k+1}` and the clamped amount booked
//! as the increment of `K^l` or `K^u` over `(t_k, t_{k+1}]`.

use alloc::vec::Vec;

use super::quad::SolutionQuad;
use super::scenario::Scenario;
use crate::error::{Error, Result};
use crate::tree::AdaptedProcess;

pub fn backward_induction_oracle(scenario: &Scenario) -> Result<SolutionQuad> {
    if !scenario.driver().ignores_k() {
        return Err(Error::UnsupportedDriver { l2: scenario.driver().kind().lipschitz().1 });
    }
    Ok(induct(scenario))
}

/// The same induction with the `k` argument of the driver frozen at zero.
/// Only meant as a starting point for the Picard iteration.
pub fn warm_start_quad(scenario: &Scenario) -> SolutionQuad {
    induct(scenario)
}

fn induct(scenario: &Scenario) -> SolutionQuad {
    let tree = scenario.tree();
    let n = tree.depth();
    let grid = tree.grid();
    let dt = grid.dt();
    let h2 = 2.0 * tree.sqrt_dt();
    let f = scenario.driver();
    let (lo, hi) = (scenario.barriers().lower().values(), scenario.barriers().upper().values());

    let mut y = AdaptedProcess::zeros(n);
    let mut z = AdaptedProcess::zeros(n);
    y.level_mut(n).copy_from_slice(scenario.terminal());
    // pushes over (t_k, t_{k+1}], one value per level-k node
    let mut push_l: Vec<Vec<f64>> = (0..n).map(|k| alloc::vec![0.0; 1 << k]).collect();
    let mut push_u = push_l.clone();
    for k in (0..n).rev() {
        let half = 1 << k;
        let next = y.level(k + 1).to_vec();
        for p in 0..half {
            let (down, up) = (next[p], next[p + half]);
            let e = 0.5 * (up + down);
            let zk = (up - down) / h2;
            let ybar = e + f.eval(grid.time(k), e, zk, 0.0) * dt;
            let yk = if ybar < lo[k] {
                push_l[k][p] = lo[k] - ybar;
                lo[k]
            } else if ybar > hi[k] {
                push_u[k][p] = ybar - hi[k];
                hi[k]
            } else {
                ybar
            };
            y.level_mut(k)[p] = yk;
            z.level_mut(k)[p] = zk;
        }
    }
    let mut kl = AdaptedProcess::zeros(n);
    let mut ku = AdaptedProcess::zeros(n);
    for k in 1..=n {
        let parent_half = 1 << (k - 1);
        let (pl, pu) = (kl.level(k - 1).to_vec(), ku.level(k - 1).to_vec());
        for p in 0..1 << k {
            let parent = p % parent_half;
            kl.level_mut(k)[p] = pl[parent] + push_l[k - 1][parent];
            ku.level_mut(k)[p] = pu[parent] + push_u[k - 1][parent];
        }
    }
    SolutionQuad { y, z, kl, ku }
}
