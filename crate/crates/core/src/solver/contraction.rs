//! Sufficient conditions for the Picard map to contract, as stated in closed
//! form and as recomputed from the same estimate.
//!
//! The estimate bounds the squared distance of two images by
//! `c_yz (||dY||^2 + ||dZ||^2) + c_k beta ||dK||^2`, with
//!
//! `c_yz = 2 L1 / gamma1 + 45 beta (T L1^2 + C_b)`,
//! `c_k  = 2 L2 (e^{alpha T} - 1) / (alpha beta gamma2) + 45 T L2^2`,
//!
//! and contraction follows once both are below `1/2`. Minimising over the
//! free weights (`gamma_i = 2 / L_i`) gives the `l*_bound` fields. The
//! `*_printed` fields reproduce the closed-form smallness conditions as
//! published, which are not equivalent. Neither is necessary: the measured
//! distance ratios of the iteration are the authoritative verdict.

use super::picard::PicardConfig;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContractionConstants {
    pub l1: f64,
    pub l2: f64,
    pub horizon: f64,
    pub alpha: f64,
    pub beta: f64,
    pub bdg_constant: f64,
    /// `c_yz` at `gamma1 = 2 / L1`.
    pub yz_coefficient: f64,
    /// `c_k` at `gamma2 = 2 / L2`.
    pub k_coefficient: f64,
    /// `c_yz` at the configured `gamma1`.
    pub yz_coefficient_at_config: f64,
    /// `c_k` at the configured `gamma2`.
    pub k_coefficient_at_config: f64,
    /// `L1 < sqrt((1/2 - C_b) / (45 T beta))`; `None` for a negative radicand.
    pub l1_bound_printed: Option<f64>,
    /// `L2 < sqrt((5 beta / 2) / (e^{5T} + 225 beta - 1))`.
    pub l2_bound_printed: Option<f64>,
    /// `L1 < sqrt((1/2 - 45 beta C_b) / (1 + 45 T beta))`.
    pub l1_bound: Option<f64>,
    /// `L2 < sqrt((alpha beta / 2) / (e^{alpha T} - 1 + 45 alpha beta T))`.
    pub l2_bound: Option<f64>,
}

fn bound(numerator: f64, denominator: f64) -> Option<f64> {
    let r = numerator / denominator;
    (r >= 0.0 && r.is_finite()).then(|| libm::sqrt(r))
}

fn below(l: f64, b: Option<f64>) -> bool {
    b.is_some_and(|b| l < b)
}

impl ContractionConstants {
    pub fn printed_condition_holds(&self) -> bool {
        below(self.l1, self.l1_bound_printed) && below(self.l2, self.l2_bound_printed)
    }

    pub fn condition_holds(&self) -> bool {
        self.yz_coefficient < 0.5 && self.k_coefficient < 0.5
    }
}

pub fn contraction_constants(l1: f64, l2: f64, horizon: f64, cfg: &PicardConfig) -> ContractionConstants {
    let (t, alpha, beta, cb) = (horizon, cfg.alpha, cfg.beta, cfg.bdg_constant);
    let growth = if alpha == 0.0 { t } else { (libm::exp(alpha * t) - 1.0) / alpha };
    let yz_tail = 45.0 * beta * (t * l1 * l1 + cb);
    let k_tail = 45.0 * t * l2 * l2;
    let yz_at = |g: f64| 2.0 * l1 / g + yz_tail;
    let k_at = |g: f64| 2.0 * l2 * growth / (beta * g) + k_tail;
    ContractionConstants {
        l1,
        l2,
        horizon,
        alpha,
        beta,
        bdg_constant: cb,
        yz_coefficient: l1 * l1 + yz_tail,
        k_coefficient: l2 * l2 * growth / beta + k_tail,
        yz_coefficient_at_config: yz_at(cfg.gamma1),
        k_coefficient_at_config: k_at(cfg.gamma2),
        l1_bound_printed: bound(0.5 - cb, 45.0 * t * beta),
        l2_bound_printed: bound(0.5 * 5.0 * beta, libm::exp(5.0 * t) + 225.0 * beta - 1.0),
        l1_bound: bound(0.5 - 45.0 * beta * cb, 1.0 + 45.0 * t * beta),
        l2_bound: bound(0.5 * beta, growth + 45.0 * beta * t),
    }
}
