//! Discrete local times and the local-time reconstruction of `K`.
//!
//! For a reflected path `L <= Y <= U` driven by `dY = -f dt + Z dW - dK`, the
//! reflection process is recovered from the local times of `Y - L` and
//! `U - Y` at zero, the driver on the boundary sets and the finite-variation
//! parts of the barriers:
//!
//! `K_t = - int (1{Y=L} + 1{Y=U}) f dr - int 1{Y=U} dA^U - int 1{Y=L} dA^L + L^{U-Y}_t - L^{Y-L}_t`.
//!
//! Boundary indicators become `1{|distance| <= eps}`. Barriers here are
//! deterministic, so `A^L`, `A^U` are the barrier paths themselves and their
//! increments are the barrier increments.
//!
//! The solver never consumes these estimates; they are diagnostics checked
//! against the Skorohod regulator.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::{BarrierPair, DiscretePath};

/// Containment tolerance for `L <= Y <= U`.
pub const CONTAINMENT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocalTimeSource {
    Tanaka,
    Occupation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalTimeEstimate {
    pub path: DiscretePath,
    pub eps: f64,
    pub source: LocalTimeSource,
}

impl LocalTimeEstimate {
    /// Largest decrease between consecutive indices; local time should not decrease.
    pub fn max_decrease(&self) -> f64 {
        self.path.values().windows(2).fold(0.0, |m, w| f64::max(m, w[0] - w[1]))
    }

    pub fn is_nondecreasing(&self, tol: f64) -> bool {
        self.max_decrease() <= tol
    }
}

/// Default boundary width `sqrt(dt)`.
pub fn default_eps(path: &DiscretePath) -> f64 {
    path.grid().sqrt_dt()
}

fn negative_part(v: f64) -> f64 {
    f64::max(-v, 0.0)
}

/// Tanaka estimate of the local time of `S` at zero:
/// `L_k = S_k^- - S_0^- + sum_{j<k} 1{S_j <= eps} (S_{j+1} - S_j)`.
pub fn tanaka_local_time(s: &DiscretePath, eps: f64) -> Result<LocalTimeEstimate> {
    if eps.is_nan() || eps < 0.0 {
        return Err(Error::InvalidConfig("local-time threshold eps must be >= 0"));
    }
    let v = s.values();
    let s0 = negative_part(v[0]);
    let mut sum = 0.0;
    let mut out = Vec::with_capacity(v.len());
    out.push(negative_part(v[0]) - s0);
    for k in 1..v.len() {
        if v[k - 1] <= eps {
            sum += v[k] - v[k - 1];
        }
        out.push(negative_part(v[k]) - s0 + sum);
    }
    Ok(LocalTimeEstimate { path: DiscretePath::new(*s.grid(), out)?, eps, source: LocalTimeSource::Tanaka })
}

/// Occupation-time estimate for a nonnegative `S`:
/// `L_k = (1 / (2 eps)) sum_{j<k} 1{S_j < eps} dt`, normalised like the Tanaka estimate.
pub fn occupation_local_time(s: &DiscretePath, eps: f64) -> Result<LocalTimeEstimate> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::InvalidConfig("occupation estimate needs eps > 0"));
    }
    let dt = s.grid().dt();
    let v = s.values();
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(v.len());
    out.push(0.0);
    for k in 1..v.len() {
        if v[k - 1].abs() < eps {
            acc += dt / (2.0 * eps);
        }
        out.push(acc);
    }
    Ok(LocalTimeEstimate { path: DiscretePath::new(*s.grid(), out)?, eps, source: LocalTimeSource::Occupation })
}

/// One-sided reconstructions `(K^l, K^u)`:
///
/// `K^l = - sum 1{Y near L} f dt - sum 1{Y near L} dA^L - L^{Y-L}`,
/// `K^u =   sum 1{Y near U} f dt + sum 1{Y near U} dA^U - L^{U-Y}`.
///
/// The indicator is evaluated at the left end of each step.
pub fn kl_ku_from_local_times(
    y: &DiscretePath,
    b: &BarrierPair,
    fvals: &DiscretePath,
    eps: f64,
) -> Result<(DiscretePath, DiscretePath)> {
    y.ensure_same_grid(b.lower())?;
    y.ensure_same_grid(fvals)?;
    let (lo, hi, yv, f) = (b.lower().values(), b.upper().values(), y.values(), fvals.values());
    for (index, &value) in yv.iter().enumerate() {
        if value < lo[index] - CONTAINMENT_TOL || value > hi[index] + CONTAINMENT_TOL {
            return Err(Error::OutsideBarriers { index, value });
        }
    }
    let below = y.zip_with(b.lower(), |a, l| a - l)?;
    let above = b.upper().zip_with(y, |u, a| u - a)?;
    let lt_lower = tanaka_local_time(&below, eps)?;
    let lt_upper = tanaka_local_time(&above, eps)?;

    let dt = y.grid().dt();
    let n = yv.len();
    let mut kl = Vec::with_capacity(n);
    let mut ku = Vec::with_capacity(n);
    let (mut drift_l, mut drift_u) = (0.0, 0.0);
    kl.push(-lt_lower.path.get(0));
    ku.push(-lt_upper.path.get(0));
    for k in 1..n {
        let j = k - 1;
        if below.get(j).abs() <= eps {
            drift_l += f[j] * dt + (lo[k] - lo[j]);
        }
        if above.get(j).abs() <= eps {
            drift_u += f[j] * dt + (hi[k] - hi[j]);
        }
        kl.push(-drift_l - lt_lower.path.get(k));
        ku.push(drift_u - lt_upper.path.get(k));
    }
    Ok((DiscretePath::new(*y.grid(), kl)?, DiscretePath::new(*y.grid(), ku)?))
}

/// `K = K^l - K^u` from [`kl_ku_from_local_times`].
pub fn k_from_local_times(y: &DiscretePath, b: &BarrierPair, fvals: &DiscretePath, eps: f64) -> Result<DiscretePath> {
    let (kl, ku) = kl_ku_from_local_times(y, b, fvals, eps)?;
    kl.zip_with(&ku, |l, u| l - u)
}

/// Pooled relative error `sqrt(sum (a - b)^2 / sum b^2)` over many paths.
///
/// Pooling keeps the measure finite on paths whose reference is identically
/// zero; it is 0 when estimate and reference both vanish everywhere.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RelativeRmse {
    err: f64,
    norm: f64,
}

impl RelativeRmse {
    pub fn add(&mut self, estimate: &DiscretePath, reference: &DiscretePath) -> Result<()> {
        estimate.ensure_same_grid(reference)?;
        for (a, b) in estimate.values().iter().zip(reference.values()) {
            self.err += (a - b) * (a - b);
            self.norm += b * b;
        }
        Ok(())
    }

    pub fn value(&self) -> f64 {
        if self.err == 0.0 {
            0.0
        } else {
            libm::sqrt(self.err / self.norm)
        }
    }
}
