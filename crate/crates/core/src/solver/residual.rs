use super::quad::SolutionQuad;
use super::scenario::Scenario;
use crate::error::{Error, Result};

/// How far a candidate `(Y, Z, K^l, K^u)` is from solving the reflected equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualReport {
    /// `max |Y_k - (xi + sum_{i>=k} f_i dt - sum_{i>=k} Z_i dW_{i+1} + K_N - K_k)|`
    pub equation: f64,
    /// Largest excursion of `Y` outside `[L, U]`.
    pub containment: f64,
    /// `max_omega sum_k |Y_k - L_k| dK^l_{k+1}`
    pub flat_off_lower: f64,
    /// `max_omega sum_k |U_k - Y_k| dK^u_{k+1}`
    pub flat_off_upper: f64,
    /// `max_omega (K^l_N + K^u_N)`
    pub regulator_variation: f64,
    /// Smallest increment of `K^l`, `K^u` (and their initial values); negative
    /// means not nondecreasing.
    pub min_increment: f64,
}

impl ResidualReport {
    pub fn flat_off(&self) -> f64 {
        self.flat_off_lower.max(self.flat_off_upper)
    }

    /// Equation residual below `10 dt (1 + L1 + L2)`, exact containment,
    /// flat-off below `1e-9 max(1, variation)`, monotone pushes.
    pub fn passes(&self, dt: f64, l1: f64, l2: f64) -> bool {
        self.equation <= 10.0 * dt * (1.0 + l1 + l2)
            && self.containment == 0.0
            && self.flat_off() <= 1e-9 * self.regulator_variation.max(1.0)
            && self.min_increment >= 0.0
    }
}

pub fn residual_check(scenario: &Scenario, q: &SolutionQuad) -> Result<ResidualReport> {
    let tree = scenario.tree();
    let n = tree.depth();
    if q.depth() != n {
        return Err(Error::LengthMismatch { expected: n, found: q.depth() });
    }
    let grid = tree.grid();
    let dt = grid.dt();
    let f = scenario.driver();
    let (lo, hi) = (scenario.barriers().lower().values(), scenario.barriers().upper().values());
    let k = q.k();

    let mut report = ResidualReport {
        equation: 0.0,
        containment: 0.0,
        flat_off_lower: 0.0,
        flat_off_upper: 0.0,
        regulator_variation: 0.0,
        min_increment: q.kl.node(0, 0).min(q.ku.node(0, 0)),
    };
    for w in 0..tree.num_paths() {
        let (y, z) = (q.y.along(w), q.z.along(w));
        let (kl, ku, kk) = (q.kl.along(w), q.ku.along(w), k.along(w));
        // rhs_k built backward from xi; the K part is added separately
        let mut tail = scenario.terminal()[w];
        let mut worst = (y[n] - tail).abs();
        for i in (0..n).rev() {
            tail += f.eval(grid.time(i), y[i], z[i], kk[i]) * dt - z[i] * tree.increment(i, w);
            worst = worst.max((y[i] - (tail + kk[n] - kk[i])).abs());
        }
        report.equation = report.equation.max(worst);

        let (mut fl, mut fu) = (0.0, 0.0);
        for i in 0..=n {
            report.containment = report.containment.max(lo[i] - y[i]).max(y[i] - hi[i]);
            if i < n {
                let (dl, du) = (kl[i + 1] - kl[i], ku[i + 1] - ku[i]);
                report.min_increment = report.min_increment.min(dl).min(du);
                fl += (y[i] - lo[i]).abs() * dl.abs();
                fu += (hi[i] - y[i]).abs() * du.abs();
            }
        }
        report.flat_off_lower = report.flat_off_lower.max(fl);
        report.flat_off_upper = report.flat_off_upper.max(fu);
        report.regulator_variation = report.regulator_variation.max(kl[n] + ku[n]);
    }
    Ok(report)
}
