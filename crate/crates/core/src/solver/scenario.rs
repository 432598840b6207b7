use alloc::vec::Vec;

use super::driver::{DriverSpec, TerminalSpec};
use crate::error::{Error, Result};
use crate::grid::{BarrierPair, BarrierSpec, TimeGrid};
use crate::tree::PathTree;

/// A validated problem instance on a fixed tree.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    tree: PathTree,
    barriers: BarrierPair,
    driver: DriverSpec,
    terminal: Vec<f64>,
}

/// Builds a scenario from a terminal specification.
pub fn validate_scenario(
    tree: PathTree,
    barriers: BarrierPair,
    driver: DriverSpec,
    terminal: &TerminalSpec,
) -> Result<Scenario> {
    let xi = terminal.eval(&tree);
    Scenario::from_terminal_values(tree, barriers, driver, xi)
}

impl Scenario {
    /// `xi` holds one value per path; each must lie in `[L_T, U_T]`.
    pub fn from_terminal_values(
        tree: PathTree,
        barriers: BarrierPair,
        driver: DriverSpec,
        xi: Vec<f64>,
    ) -> Result<Self> {
        if barriers.grid() != tree.grid() {
            return Err(Error::GridMismatch);
        }
        if xi.len() != tree.num_paths() {
            return Err(Error::LengthMismatch { expected: tree.num_paths(), found: xi.len() });
        }
        // re-check in case the driver was assembled by hand
        let driver = DriverSpec::new(driver.kind(), driver.l1(), driver.l2())?;
        let (lower, upper) = (barriers.lower().last(), barriers.upper().last());
        for (path, &value) in xi.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFinite { index: path });
            }
            if value < lower || value > upper {
                return Err(Error::TerminalOutside { path, value, lower, upper });
            }
        }
        Ok(Self { tree, barriers, driver, terminal: xi })
    }

    /// Same tree, barriers and driver with a new terminal value.
    pub fn with_terminal_values(&self, xi: Vec<f64>) -> Result<Self> {
        Self::from_terminal_values(self.tree, self.barriers.clone(), self.driver, xi)
    }

    pub fn tree(&self) -> &PathTree {
        &self.tree
    }

    pub fn grid(&self) -> &TimeGrid {
        self.tree.grid()
    }

    pub fn barriers(&self) -> &BarrierPair {
        &self.barriers
    }

    pub fn driver(&self) -> &DriverSpec {
        &self.driver
    }

    /// `xi(omega)` for every path.
    pub fn terminal(&self) -> &[f64] {
        &self.terminal
    }
}

/// Mesh-independent description, instantiated at any number of steps.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub horizon: f64,
    pub lower: BarrierSpec,
    pub upper: BarrierSpec,
    pub driver: DriverSpec,
    pub terminal: TerminalSpec,
}

impl ScenarioSpec {
    pub fn build(&self, steps: usize) -> Result<Scenario> {
        self.build_with_cap(steps, crate::tree::DEFAULT_DEPTH_CAP)
    }

    pub fn build_with_cap(&self, steps: usize, cap: usize) -> Result<Scenario> {
        let grid = TimeGrid::uniform(self.horizon, steps)?;
        let tree = PathTree::with_cap(grid, cap)?;
        let barriers = BarrierPair::from_specs(&self.lower, &self.upper, grid)?;
        validate_scenario(tree, barriers, self.driver, &self.terminal)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::driver::TerminalFn;

    fn spec(terminal: TerminalSpec) -> ScenarioSpec {
        ScenarioSpec {
            horizon: 1.0,
            lower: BarrierSpec::Constant(-0.4),
            upper: BarrierSpec::Constant(0.4),
            driver: DriverSpec::zero(),
            terminal,
        }
    }

    #[test]
    fn terminal_must_be_inside() {
        let ok = spec(TerminalSpec::OfTerminalW { g: TerminalFn::Clamp { lo: -0.4, hi: 0.4 }, scale: 1.0 });
        assert!(ok.build(6).is_ok());
        let bad = spec(TerminalSpec::OfTerminalW { g: TerminalFn::Identity, scale: 1.0 });
        assert!(matches!(bad.build(6), Err(Error::TerminalOutside { .. })));
    }

    #[test]
    fn depth_cap_enforced() {
        let s = spec(TerminalSpec::Constant(0.0));
        assert!(matches!(s.build_with_cap(5, 4), Err(Error::DepthExceeded { .. })));
    }

    #[test]
    fn wrong_length_rejected() {
        let s = spec(TerminalSpec::Constant(0.0)).build(3).unwrap();
        assert!(matches!(s.with_terminal_values(vec![0.0; 7]), Err(Error::LengthMismatch { .. })));
    }
}
