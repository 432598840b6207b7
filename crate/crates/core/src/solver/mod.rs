//! Doubly reflected BSDE with resistance: `-dY = f(t, Y, Z, K) dt - Z dW + dK`,
//! `L <= Y <= U`, `K = K^l - K^u` with each part increasing only on its barrier.

pub mod contraction;
pub mod driver;
pub mod oracle;
pub mod picard;
pub mod quad;
pub mod residual;
pub mod scenario;

pub use contraction::{contraction_constants, ContractionConstants};
pub use driver::{DriverKind, DriverSpec, TerminalFn, TerminalSpec};
pub use oracle::{backward_induction_oracle, warm_start_quad};
pub use picard::{
    phi_iterate, phi_step, remainder_path, solve_picard, solve_picard_from, KProjection, PhiStep, PicardConfig,
    PicardReport,
};
pub use quad::{distance_parts, picard_distance, DistanceParts, SolutionQuad};
pub use residual::{residual_check, ResidualReport};
pub use scenario::{validate_scenario, Scenario, ScenarioSpec};
