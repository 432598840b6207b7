//! Exact finite model of a Brownian driver: the full binary random-walk tree.
//!
//! A path `omega` is an integer in `0..2^N`; bit `j` of `omega` is the sign of
//! the increment `dW_{j+1}` (1 = up, `+sqrt(dt)`; 0 = down, `-sqrt(dt)`). The
//! node of `omega` at time `k` is its prefix `omega mod 2^k`, so the children
//! of node `p` at level `k` are `p` (down) and `p + 2^k` (up) at level `k + 1`,
//! and every path has probability `2^-N`.
//!
//! Conditional expectations are computed by repeated pairwise averaging of
//! sibling nodes, always in the same order, so results are bit-stable.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::TimeGrid;

/// Default maximum depth: `2^16` paths.
pub const DEFAULT_DEPTH_CAP: usize = 16;

/// Tolerance for the martingale check in [`martingale_representation`].
pub const MARTINGALE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathTree {
    grid: TimeGrid,
    sqrt_dt: f64,
}

impl PathTree {
    pub fn new(grid: TimeGrid) -> Result<Self> {
        Self::with_cap(grid, DEFAULT_DEPTH_CAP)
    }

    pub fn with_cap(grid: TimeGrid, cap: usize) -> Result<Self> {
        // also keep 2^N addressable
        let cap = cap.min(usize::BITS as usize - 2);
        if grid.steps() > cap {
            return Err(Error::DepthExceeded { depth: grid.steps(), cap });
        }
        Ok(Self { grid, sqrt_dt: grid.sqrt_dt() })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn depth(&self) -> usize {
        self.grid.steps()
    }

    pub fn num_paths(&self) -> usize {
        1 << self.depth()
    }

    pub fn path_probability(&self) -> f64 {
        1.0 / self.num_paths() as f64
    }

    pub fn sqrt_dt(&self) -> f64 {
        self.sqrt_dt
    }

    /// Node of `omega` at level `k`.
    pub fn prefix(k: usize, omega: usize) -> usize {
        omega & ((1 << k) - 1)
    }

    /// `dW_{step+1}(omega)` for `step` in `0..N`.
    pub fn increment(&self, step: usize, omega: usize) -> f64 {
        if (omega >> step) & 1 == 1 {
            self.sqrt_dt
        } else {
            -self.sqrt_dt
        }
    }

    /// `W_k(omega)`; depends only on the first `k` increments.
    pub fn brownian(&self, k: usize, omega: usize) -> f64 {
        let ups = Self::prefix(k, omega).count_ones() as f64;
        (2.0 * ups - k as f64) * self.sqrt_dt
    }

    /// `W_N` on every path, indexed by `omega`.
    pub fn terminal_brownian(&self) -> Vec<f64> {
        (0..self.num_paths()).map(|w| self.brownian(self.depth(), w)).collect()
    }

    /// `W` as an adapted process.
    pub fn brownian_process(&self) -> AdaptedProcess {
        AdaptedProcess::from_fn(self, |k, p| self.brownian(k, p))
    }
}

fn level_offset(k: usize) -> usize {
    (1 << k) - 1
}

/// One value per tree node: `2^k` values at level `k`, `k = 0..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptedProcess {
    depth: usize,
    data: Vec<f64>,
}

impl AdaptedProcess {
    pub fn zeros(depth: usize) -> Self {
        Self { depth, data: alloc::vec![0.0; level_offset(depth + 1)] }
    }

    pub fn from_fn(tree: &PathTree, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut out = Self::zeros(tree.depth());
        for k in 0..=tree.depth() {
            for (p, v) in out.level_mut(k).iter_mut().enumerate() {
                *v = f(k, p);
            }
        }
        out
    }

    /// Builds a process from per-level node values; level `k` must hold `2^k` entries.
    pub fn from_levels(levels: Vec<Vec<f64>>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::LengthMismatch { expected: 1, found: 0 });
        }
        let depth = levels.len() - 1;
        let mut out = Self::zeros(depth);
        for (k, level) in levels.into_iter().enumerate() {
            if level.len() != 1 << k {
                return Err(Error::LengthMismatch { expected: 1 << k, found: level.len() });
            }
            out.level_mut(k).copy_from_slice(&level);
        }
        Ok(out)
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn level(&self, k: usize) -> &[f64] {
        &self.data[level_offset(k)..level_offset(k + 1)]
    }

    pub fn level_mut(&mut self, k: usize) -> &mut [f64] {
        &mut self.data[level_offset(k)..level_offset(k + 1)]
    }

    pub fn node(&self, k: usize, p: usize) -> f64 {
        self.data[level_offset(k) + p]
    }

    /// Value at time `k` along path `omega`.
    pub fn at(&self, k: usize, omega: usize) -> f64 {
        self.node(k, PathTree::prefix(k, omega))
    }

    /// The values along one path, `k = 0..=N`.
    pub fn along(&self, omega: usize) -> Vec<f64> {
        (0..=self.depth).map(|k| self.at(k, omega)).collect()
    }

    pub fn zip_with(&self, other: &Self, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        debug_assert_eq!(self.depth, other.depth);
        Self { depth: self.depth, data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect() }
    }

    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Self {
        Self { depth: self.depth, data: self.data.iter().map(|&a| f(a)).collect() }
    }

    /// Largest absolute node-wise difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data.iter().zip(&other.data).fold(0.0, |m, (a, b)| f64::max(m, libm::fabs(a - b)))
    }

    /// `E[X_k]` (nodes at level `k` are equally likely).
    pub fn expectation(&self, k: usize) -> f64 {
        average_down(self.level(k).to_vec(), k, 0)[0]
    }

    /// Raw view: the same values indexed by `(k, omega)`.
    pub fn to_raw(&self) -> RawProcess {
        RawProcess::from_fn_depth(self.depth, |k, w| self.at(k, w))
    }
}

/// One value per `(k, omega)`; not required to be adapted.
#[derive(Debug, Clone, PartialEq)]
pub struct RawProcess {
    depth: usize,
    // path-major: data[omega * (N + 1) + k]
    data: Vec<f64>,
}

impl RawProcess {
    pub fn zeros(depth: usize) -> Self {
        Self { depth, data: alloc::vec![0.0; (depth + 1) << depth] }
    }

    pub fn from_fn(tree: &PathTree, f: impl FnMut(usize, usize) -> f64) -> Self {
        Self::from_fn_depth(tree.depth(), f)
    }

    fn from_fn_depth(depth: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut out = Self::zeros(depth);
        for w in 0..(1usize << depth) {
            for k in 0..=depth {
                out.data[w * (depth + 1) + k] = f(k, w);
            }
        }
        out
    }

    /// Builds a process path by path; each path must have `N + 1` values.
    pub fn from_paths(depth: usize, mut path: impl FnMut(usize) -> Vec<f64>) -> Result<Self> {
        let mut data = Vec::with_capacity((depth + 1) << depth);
        for w in 0..(1usize << depth) {
            let p = path(w);
            if p.len() != depth + 1 {
                return Err(Error::LengthMismatch { expected: depth + 1, found: p.len() });
            }
            data.extend_from_slice(&p);
        }
        Ok(Self { depth, data })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn at(&self, k: usize, omega: usize) -> f64 {
        self.data[omega * (self.depth + 1) + k]
    }

    pub fn path(&self, omega: usize) -> &[f64] {
        let n = self.depth + 1;
        &self.data[omega * n..(omega + 1) * n]
    }

    /// `X_k(omega)` for all `omega`.
    pub fn time_slice(&self, k: usize) -> Vec<f64> {
        (0..(1usize << self.depth)).map(|w| self.at(k, w)).collect()
    }

    pub fn zip_with(&self, other: &Self, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        debug_assert_eq!(self.depth, other.depth);
        Self { depth: self.depth, data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect() }
    }
}

/// Average sibling pairs from `from` down to `to`: `v[p] = (v[p] + v[p + 2^j]) / 2`.
pub(crate) fn average_down(mut values: Vec<f64>, from: usize, to: usize) -> Vec<f64> {
    debug_assert_eq!(values.len(), 1 << from);
    for j in (to..from).rev() {
        let half = 1 << j;
        for p in 0..half {
            values[p] = 0.5 * (values[p] + values[p + half]);
        }
        values.truncate(half);
    }
    values
}

/// `E[Y | F_k]` for an `F_N`-measurable `Y` given on every path (`2^N` values).
pub fn condition_on(tree: &PathTree, values: &[f64], k: usize) -> Result<Vec<f64>> {
    if values.len() != tree.num_paths() {
        return Err(Error::LengthMismatch { expected: tree.num_paths(), found: values.len() });
    }
    if k > tree.depth() {
        return Err(Error::IndexOrder { k, m: tree.depth(), depth: tree.depth() });
    }
    Ok(average_down(values.to_vec(), tree.depth(), k))
}

/// `E[X_m | F_k]`, one value per level-`k` node.
pub fn conditional_expectation(tree: &PathTree, x: &RawProcess, m: usize, k: usize) -> Result<Vec<f64>> {
    let depth = tree.depth();
    if m > depth || k > m {
        return Err(Error::IndexOrder { k, m, depth });
    }
    if x.depth() != depth {
        return Err(Error::LengthMismatch { expected: depth, found: x.depth() });
    }
    condition_on(tree, &x.time_slice(m), k)
}

/// `E[Y_j | F_k]` for an adapted `Y`, `k <= j`.
pub fn condition_adapted(y: &AdaptedProcess, j: usize, k: usize) -> Result<Vec<f64>> {
    if k > j || j > y.depth() {
        return Err(Error::IndexOrder { k, m: j, depth: y.depth() });
    }
    Ok(average_down(y.level(j).to_vec(), j, k))
}

/// Optional projection `X^b_k = E[X_k | F_k]`.
pub fn optional_projection(tree: &PathTree, x: &RawProcess) -> Result<AdaptedProcess> {
    let mut out = AdaptedProcess::zeros(tree.depth());
    for k in 0..=tree.depth() {
        let level = conditional_expectation(tree, x, k, k)?;
        out.level_mut(k).copy_from_slice(&level);
    }
    Ok(out)
}

fn check_monotone(a: &RawProcess) -> Result<()> {
    for w in 0..(1usize << a.depth()) {
        let p = a.path(w);
        for k in 1..p.len() {
            let increment = p[k] - p[k - 1];
            if increment < 0.0 || increment.is_nan() {
                return Err(Error::NotMonotone { index: k, path: w, increment });
            }
        }
    }
    Ok(())
}

/// Dual optional projection: `A^o_0 = E[A_0 | F_0]` and
/// `A^o_k - A^o_{k-1} = E[A_k - A_{k-1} | F_k]`.
///
/// Satisfies `E[sum_k X_k dA^o_k] = E[sum_k X^b_k dA_k]` for every bounded
/// raw `X`. With `nondecreasing` set, the input is checked path by path.
pub fn dual_optional_projection(tree: &PathTree, a: &RawProcess, nondecreasing: bool) -> Result<AdaptedProcess> {
    if nondecreasing {
        check_monotone(a)?;
    }
    let depth = tree.depth();
    let mut out = AdaptedProcess::zeros(depth);
    out.level_mut(0)[0] = conditional_expectation(tree, a, 0, 0)?[0];
    for k in 1..=depth {
        let inc: Vec<f64> = (0..tree.num_paths()).map(|w| a.at(k, w) - a.at(k - 1, w)).collect();
        let cond = condition_on(tree, &inc, k)?;
        let parent_half = 1 << (k - 1);
        let prev = out.level(k - 1).to_vec();
        for (p, v) in out.level_mut(k).iter_mut().enumerate() {
            *v = prev[p % parent_half] + cond[p];
        }
    }
    Ok(out)
}

/// Dual predictable projection (compensator): `A^p_0 = E[A_0 | F_0]` and
/// `A^p_k - A^p_{k-1} = E[A_k - A_{k-1} | F_{k-1}]`.
///
/// Its increments are known one step ahead, the discrete counterpart of a
/// continuous increasing process. It satisfies the same duality against
/// predictable test processes.
pub fn dual_predictable_projection(tree: &PathTree, a: &RawProcess, nondecreasing: bool) -> Result<AdaptedProcess> {
    if nondecreasing {
        check_monotone(a)?;
    }
    let depth = tree.depth();
    let mut out = AdaptedProcess::zeros(depth);
    out.level_mut(0)[0] = conditional_expectation(tree, a, 0, 0)?[0];
    for k in 1..=depth {
        let inc: Vec<f64> = (0..tree.num_paths()).map(|w| a.at(k, w) - a.at(k - 1, w)).collect();
        let cond = condition_on(tree, &inc, k - 1)?;
        let parent_half = 1 << (k - 1);
        let prev = out.level(k - 1).to_vec();
        for (p, v) in out.level_mut(k).iter_mut().enumerate() {
            let parent = p % parent_half;
            *v = prev[parent] + cond[parent];
        }
    }
    Ok(out)
}

/// `Z_k = (M_{k+1}(up) - M_{k+1}(down)) / (2 sqrt(dt))` at every node, so that
/// `M_k = M_0 + sum_{j<k} Z_j dW_{j+1}` on every path. `Z_N` is set to zero.
pub fn martingale_representation(tree: &PathTree, m: &AdaptedProcess) -> Result<AdaptedProcess> {
    let depth = tree.depth();
    let h2 = 2.0 * tree.sqrt_dt();
    let mut z = AdaptedProcess::zeros(depth);
    for k in 0..depth {
        let half = 1 << k;
        let next = m.level(k + 1);
        let here = m.level(k);
        for p in 0..half {
            let (down, up) = (next[p], next[p + half]);
            let defect = 0.5 * (up + down) - here[p];
            let scale = 1.0 + libm::fabs(here[p]).max(libm::fabs(up)).max(libm::fabs(down));
            if libm::fabs(defect) > MARTINGALE_TOL * scale {
                return Err(Error::NotAMartingale { level: k, node: p, defect });
            }
            z.level_mut(k)[p] = (up - down) / h2;
        }
    }
    Ok(z)
}

/// `I_k(omega) = sum_{j<k} Z_j(omega) dW_{j+1}(omega)`.
pub fn stochastic_integral(tree: &PathTree, z: &AdaptedProcess) -> RawProcess {
    let depth = tree.depth();
    RawProcess::from_paths(depth, |w| {
        let mut acc = 0.0;
        let mut out = Vec::with_capacity(depth + 1);
        out.push(0.0);
        for j in 0..depth {
            acc += z.at(j, w) * tree.increment(j, w);
            out.push(acc);
        }
        out
    })
    .expect("paths have N + 1 entries")
}
