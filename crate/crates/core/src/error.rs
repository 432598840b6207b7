use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid time grid: horizon {horizon}, steps {steps} (need horizon > 0 and steps >= 1)")]
    InvalidGrid { horizon: f64, steps: usize },

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("paths live on different time grids")]
    GridMismatch,

    #[error("barrier gap {gap} is not positive at index {index}")]
    BarrierGap { index: usize, gap: f64 },

    #[error("invalid barrier parameters for {kind}: {reason}")]
    BarrierParams { kind: &'static str, reason: &'static str },

    #[error("path starts at {x0}, not strictly inside ({lower}, {upper})")]
    StartOutside { x0: f64, lower: f64, upper: f64 },

    #[error("tree depth {depth} exceeds cap {cap}")]
    DepthExceeded { depth: usize, cap: usize },

    #[error("index order violated: conditioning index {k} must not exceed {m} (depth {depth})")]
    IndexOrder { k: usize, m: usize, depth: usize },

    #[error("process is not nondecreasing at index {index} on path {path} (increment {increment})")]
    NotMonotone { index: usize, path: usize, increment: f64 },

    #[error("process is not a martingale at level {level}, node {node} (defect {defect})")]
    NotAMartingale { level: usize, node: usize, defect: f64 },

    #[error("value {value} at index {index} lies outside the barriers")]
    OutsideBarriers { index: usize, value: f64 },

    #[error("terminal value {value} on path {path} lies outside [{lower}, {upper}]")]
    TerminalOutside { path: usize, value: f64, lower: f64, upper: f64 },

    #[error("perturbation eps = {eps} pushes the terminal value on path {path} to {value}, outside the barriers")]
    PerturbationOutside { eps: f64, path: usize, value: f64 },

    #[error("declared Lipschitz constants (L1 = {declared_l1}, L2 = {declared_l2}) do not dominate the driver's (L1 = {true_l1}, L2 = {true_l2})")]
    DriverLipschitz { declared_l1: f64, declared_l2: f64, true_l1: f64, true_l2: f64 },

    #[error("driver depends on k (L2 = {l2}); the backward-induction oracle needs L2 = 0")]
    UnsupportedDriver { l2: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
}
