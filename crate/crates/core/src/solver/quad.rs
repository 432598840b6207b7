use crate::grid::TimeGrid;
use crate::tree::AdaptedProcess;

/// `(Y, Z, K^l, K^u)` on the tree; `K = K^l - K^u`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionQuad {
    pub y: AdaptedProcess,
    pub z: AdaptedProcess,
    pub kl: AdaptedProcess,
    pub ku: AdaptedProcess,
}

impl SolutionQuad {
    pub fn zeros(depth: usize) -> Self {
        let z = AdaptedProcess::zeros(depth);
        Self { y: z.clone(), z: z.clone(), kl: z.clone(), ku: z }
    }

    pub fn depth(&self) -> usize {
        self.y.depth()
    }

    pub fn k(&self) -> AdaptedProcess {
        self.kl.zip_with(&self.ku, |l, u| l - u)
    }
}

/// Squared pieces of the Picard distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceParts {
    /// `sum_{k<N} e^{alpha t_k} E|dY_k|^2 dt`
    pub y: f64,
    /// `sum_{k<N} e^{alpha t_k} E|dZ_k|^2 dt`
    pub z: f64,
    /// `max_{k<=N} E|dK_k|^2`
    pub k: f64,
}

impl DistanceParts {
    /// `sqrt(y + z + beta k)`
    pub fn combine(&self, beta: f64) -> f64 {
        libm::sqrt(self.y + self.z + beta * self.k)
    }
}

fn mean_sq_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64
}

pub fn distance_parts(a: &SolutionQuad, b: &SolutionQuad, grid: &TimeGrid, alpha: f64) -> DistanceParts {
    let n = grid.steps();
    let dt = grid.dt();
    let (mut y, mut z) = (0.0, 0.0);
    for k in 0..n {
        let w = libm::exp(alpha * grid.time(k)) * dt;
        y += w * mean_sq_diff(a.y.level(k), b.y.level(k));
        z += w * mean_sq_diff(a.z.level(k), b.z.level(k));
    }
    let (ka, kb) = (a.k(), b.k());
    let k = (0..=n).map(|k| mean_sq_diff(ka.level(k), kb.level(k))).fold(0.0, f64::max);
    DistanceParts { y, z, k }
}

/// Weighted distance `sqrt(||dY||_a^2 + ||dZ||_a^2 + beta ||dK||_inf^2)`.
pub fn picard_distance(a: &SolutionQuad, b: &SolutionQuad, grid: &TimeGrid, alpha: f64, beta: f64) -> f64 {
    distance_parts(a, b, grid, alpha).combine(beta)
}
