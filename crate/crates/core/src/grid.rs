//! Uniform time grids, paths sampled on them, and barrier pairs.
//!
//! Paths are plain value sequences. No interpolation happens anywhere in the
//! crate: every sup/inf is an index-wise max/min over grid points.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Uniform grid `t_k = k * T / N`, `k = 0..=N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    horizon: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn uniform(horizon: f64, steps: usize) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) || steps == 0 {
            return Err(Error::InvalidGrid { horizon, steps });
        }
        Ok(Self { horizon, steps })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Number of steps `N`.
    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Number of grid points, `N + 1`.
    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    pub fn sqrt_dt(&self) -> f64 {
        libm::sqrt(self.dt())
    }

    pub fn time(&self, k: usize) -> f64 {
        // exact endpoint, no accumulated rounding
        if k == self.steps {
            self.horizon
        } else {
            k as f64 * self.dt()
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.time(k)).collect()
    }
}

/// Real values on the points of a [`TimeGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretePath {
    grid: TimeGrid,
    values: Vec<f64>,
}

impl DiscretePath {
    pub fn new(grid: TimeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch { expected: grid.len(), found: values.len() });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: TimeGrid, mut f: impl FnMut(usize, f64) -> f64) -> Result<Self> {
        let values = (0..grid.len()).map(|k| f(k, grid.time(k))).collect();
        Self::new(grid, values)
    }

    pub fn constant(grid: TimeGrid, c: f64) -> Result<Self> {
        Self::new(grid, alloc::vec![c; grid.len()])
    }

    pub fn zeros(grid: TimeGrid) -> Self {
        Self { grid, values: alloc::vec![0.0; grid.len()] }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, k: usize) -> f64 {
        self.values[k]
    }

    pub fn first(&self) -> f64 {
        self.values[0]
    }

    pub fn last(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// Elementwise combination of two paths on the same grid.
    pub fn zip_with(&self, other: &Self, mut f: impl FnMut(f64, f64) -> f64) -> Result<Self> {
        self.ensure_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Self::new(self.grid, values)
    }

    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Result<Self> {
        Self::new(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn ensure_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Index-wise increments `p_k - p_{k-1}`, with the convention `p_{-1} = 0`.
    pub fn increments(&self) -> Vec<f64> {
        let mut prev = 0.0;
        self.values
            .iter()
            .map(|&v| {
                let d = v - prev;
                prev = v;
                d
            })
            .collect()
    }

    /// Total variation `sum_k |p_k - p_{k-1}|` over `k >= 1`.
    pub fn total_variation(&self) -> f64 {
        self.values.windows(2).map(|w| libm::fabs(w[1] - w[0])).sum()
    }

    pub(crate) fn from_raw(grid: TimeGrid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }
}

/// `max_k |p_k - q_k|`.
pub fn sup_norm_distance(p: &DiscretePath, q: &DiscretePath) -> Result<f64> {
    p.ensure_same_grid(q)?;
    Ok(p.values.iter().zip(&q.values).fold(0.0, |m, (&a, &b)| f64::max(m, libm::fabs(a - b))))
}

/// Output index `j` holds the input value at index `N - j`.
pub fn reverse_in_time(p: &DiscretePath) -> DiscretePath {
    let mut values = p.values.clone();
    values.reverse();
    DiscretePath::from_raw(p.grid, values)
}

/// Parametric deterministic barrier, sampled at grid times.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BarrierSpec {
    Constant(f64),
    /// `a + b t`
    Affine {
        a: f64,
        b: f64,
    },
    /// `a + b sin(c t)`
    Sinusoid {
        a: f64,
        b: f64,
        c: f64,
    },
}

impl BarrierSpec {
    /// Builds a spec from the `{kind, params}` form used in scenario files.
    pub fn from_parts(kind: &str, params: &[f64]) -> Result<Self> {
        let spec = match (kind, params) {
            ("constant", [c]) => Self::Constant(*c),
            ("affine", [a, b]) => Self::Affine { a: *a, b: *b },
            ("sinusoid", [a, b, c]) => Self::Sinusoid { a: *a, b: *b, c: *c },
            ("constant", _) => return Err(Error::BarrierParams { kind: "constant", reason: "expects 1 parameter" }),
            ("affine", _) => return Err(Error::BarrierParams { kind: "affine", reason: "expects 2 parameters" }),
            ("sinusoid", _) => return Err(Error::BarrierParams { kind: "sinusoid", reason: "expects 3 parameters" }),
            _ => {
                return Err(Error::BarrierParams {
                    kind: "unknown",
                    reason: "kind must be constant, affine or sinusoid",
                })
            }
        };
        if spec.params().iter().any(|p| !p.is_finite()) {
            return Err(Error::BarrierParams { kind: spec.kind(), reason: "parameters must be finite" });
        }
        Ok(spec)
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Constant(_) => "constant",
            Self::Affine { .. } => "affine",
            Self::Sinusoid { .. } => "sinusoid",
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match *self {
            Self::Constant(c) => alloc::vec![c],
            Self::Affine { a, b } => alloc::vec![a, b],
            Self::Sinusoid { a, b, c } => alloc::vec![a, b, c],
        }
    }

    pub fn value_at(&self, t: f64) -> f64 {
        match *self {
            Self::Constant(c) => c,
            Self::Affine { a, b } => a + b * t,
            Self::Sinusoid { a, b, c } => a + b * libm::sin(c * t),
        }
    }

    pub fn eval(&self, grid: TimeGrid) -> Result<DiscretePath> {
        DiscretePath::from_fn(grid, |_, t| self.value_at(t))
    }
}

/// Lower and upper barrier on a common grid with `min_k (U_k - L_k) > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct BarrierPair {
    lower: DiscretePath,
    upper: DiscretePath,
    gap: f64,
}

impl BarrierPair {
    pub fn new(lower: DiscretePath, upper: DiscretePath) -> Result<Self> {
        lower.ensure_same_grid(&upper)?;
        let mut gap = f64::INFINITY;
        for (index, (&l, &u)) in lower.values().iter().zip(upper.values()).enumerate() {
            let g = u - l;
            if g <= 0.0 {
                return Err(Error::BarrierGap { index, gap: g });
            }
            gap = gap.min(g);
        }
        Ok(Self { lower, upper, gap })
    }

    pub fn from_specs(lower: &BarrierSpec, upper: &BarrierSpec, grid: TimeGrid) -> Result<Self> {
        Self::new(lower.eval(grid)?, upper.eval(grid)?)
    }

    /// Constant barriers `[lo, hi]`.
    pub fn constant(grid: TimeGrid, lo: f64, hi: f64) -> Result<Self> {
        Self::new(DiscretePath::constant(grid, lo)?, DiscretePath::constant(grid, hi)?)
    }

    pub fn lower(&self) -> &DiscretePath {
        &self.lower
    }

    pub fn upper(&self) -> &DiscretePath {
        &self.upper
    }

    pub fn gap(&self) -> f64 {
        self.gap
    }

    pub fn grid(&self) -> &TimeGrid {
        self.lower.grid()
    }

    /// The same barriers read on the reversed clock: `alpha_j = L_{N-j}`, `beta_j = U_{N-j}`.
    pub fn reversed(&self) -> Self {
        Self { lower: reverse_in_time(&self.lower), upper: reverse_in_time(&self.upper), gap: self.gap }
    }

    pub fn contains(&self, k: usize, value: f64) -> bool {
        self.lower.get(k) <= value && value <= self.upper.get(k)
    }
}
