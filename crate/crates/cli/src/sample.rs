//! Seeded random paths for the sweep commands.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rbsde_core::{BarrierPair, DiscretePath, Result, TimeGrid};

/// Piecewise-linear zigzag started strictly inside the barriers, with
/// increments uniform in `±amplitude` times the local gap, so that most paths
/// reach both barriers.
pub fn zigzag(rng: &mut ChaCha8Rng, b: &BarrierPair, amplitude: f64) -> Result<DiscretePath> {
    let (lo, hi) = (b.lower().values(), b.upper().values());
    let mut x = Vec::with_capacity(lo.len());
    x.push(lo[0] + (hi[0] - lo[0]) * rng.random_range(0.05..0.95));
    for k in 1..lo.len() {
        let step = (hi[k] - lo[k]) * amplitude * rng.random_range(-1.0..1.0);
        x.push(x[k - 1] + step);
    }
    DiscretePath::new(*b.grid(), x)
}

/// `x` plus independent uniform noise of size `noise` times the local gap.
pub fn perturb(rng: &mut ChaCha8Rng, x: &DiscretePath, b: &BarrierPair, noise: f64) -> Result<DiscretePath> {
    let gap = b.upper().zip_with(b.lower(), |u, l| u - l)?;
    let values = x.values().iter().zip(gap.values()).map(|(v, g)| v + g * noise * rng.random_range(-1.0..1.0));
    DiscretePath::new(*x.grid(), values.collect())
}

/// Random walk `x_{k+1} = x_k + drift dt ± sqrt(dt)` from `start`.
pub fn random_walk(rng: &mut ChaCha8Rng, grid: TimeGrid, start: f64, drift: f64) -> Result<DiscretePath> {
    let (dt, h) = (grid.dt(), grid.sqrt_dt());
    let mut x = Vec::with_capacity(grid.len());
    x.push(start);
    for k in 1..grid.len() {
        let step = if rng.random_bool(0.5) { h } else { -h };
        x.push(x[k - 1] + drift * dt + step);
    }
    DiscretePath::new(grid, x)
}
