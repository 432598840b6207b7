use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::tree::PathTree;

/// Catalog of drivers `f(t, y, z, k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DriverKind {
    Zero,
    Constant(f64),
    /// `a + b_y y + b_z z + b_k k`
    Affine {
        a: f64,
        b_y: f64,
        b_z: f64,
        b_k: f64,
    },
    /// `scale * tanh(y + z + k)`
    BoundedNonlinear {
        scale: f64,
    },
}

impl DriverKind {
    /// Smallest `(L1, L2)` with `|f - f'| <= L1 (|dy| + |dz|) + L2 |dk|`.
    pub fn lipschitz(&self) -> (f64, f64) {
        match *self {
            Self::Zero | Self::Constant(_) => (0.0, 0.0),
            Self::Affine { b_y, b_z, b_k, .. } => (b_y.abs().max(b_z.abs()), b_k.abs()),
            Self::BoundedNonlinear { scale } => (scale.abs(), scale.abs()),
        }
    }

    fn params(&self) -> Vec<f64> {
        match *self {
            Self::Zero => Vec::new(),
            Self::Constant(c) => alloc::vec![c],
            Self::Affine { a, b_y, b_z, b_k } => alloc::vec![a, b_y, b_z, b_k],
            Self::BoundedNonlinear { scale } => alloc::vec![scale],
        }
    }
}

/// A driver together with its declared Lipschitz constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriverSpec {
    kind: DriverKind,
    l1: f64,
    l2: f64,
}

impl DriverSpec {
    /// Rejects declared constants that do not dominate the driver's own.
    pub fn new(kind: DriverKind, l1: f64, l2: f64) -> Result<Self> {
        if kind.params().iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidConfig("driver parameters must be finite"));
        }
        if !(l1 >= 0.0 && l2 >= 0.0 && l1.is_finite() && l2.is_finite()) {
            return Err(Error::InvalidConfig("Lipschitz constants must be finite and >= 0"));
        }
        let (true_l1, true_l2) = kind.lipschitz();
        if true_l1 > l1 || true_l2 > l2 {
            return Err(Error::DriverLipschitz { declared_l1: l1, declared_l2: l2, true_l1, true_l2 });
        }
        Ok(Self { kind, l1, l2 })
    }

    /// Declares the driver's own constants.
    pub fn tight(kind: DriverKind) -> Self {
        let (l1, l2) = kind.lipschitz();
        Self { kind, l1, l2 }
    }

    pub fn zero() -> Self {
        Self::tight(DriverKind::Zero)
    }

    /// `kind` is one of `zero`, `constant`, `affine`, `bounded_nonlinear`.
    /// Missing constants default to the driver's own.
    pub fn from_parts(kind: &str, params: &[f64], l1: Option<f64>, l2: Option<f64>) -> Result<Self> {
        let kind = match (kind, params) {
            ("zero", []) => DriverKind::Zero,
            ("constant", [c]) => DriverKind::Constant(*c),
            ("affine", [a, b_y, b_z, b_k]) => DriverKind::Affine { a: *a, b_y: *b_y, b_z: *b_z, b_k: *b_k },
            ("bounded_nonlinear", [scale]) => DriverKind::BoundedNonlinear { scale: *scale },
            ("zero" | "constant" | "affine" | "bounded_nonlinear", _) => {
                return Err(Error::InvalidConfig(
                    "driver parameter count: zero takes 0, constant 1, affine 4, bounded_nonlinear 1",
                ))
            }
            _ => return Err(Error::InvalidConfig("driver kind must be zero, constant, affine or bounded_nonlinear")),
        };
        let (t1, t2) = kind.lipschitz();
        Self::new(kind, l1.unwrap_or(t1), l2.unwrap_or(t2))
    }

    pub fn kind(&self) -> DriverKind {
        self.kind
    }

    pub fn l1(&self) -> f64 {
        self.l1
    }

    pub fn l2(&self) -> f64 {
        self.l2
    }

    /// True when `f` does not depend on `k`.
    pub fn ignores_k(&self) -> bool {
        self.kind.lipschitz().1 == 0.0
    }

    pub fn eval(&self, _t: f64, y: f64, z: f64, k: f64) -> f64 {
        match self.kind {
            DriverKind::Zero => 0.0,
            DriverKind::Constant(c) => c,
            DriverKind::Affine { a, b_y, b_z, b_k } => a + b_y * y + b_z * z + b_k * k,
            DriverKind::BoundedNonlinear { scale } => scale * libm::tanh(y + z + k),
        }
    }
}

/// Functions of `W_T` available as terminal values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TerminalFn {
    Identity,
    /// `a + b w`
    Affine {
        a: f64,
        b: f64,
    },
    /// `min(max(w, lo), hi)`
    Clamp {
        lo: f64,
        hi: f64,
    },
    /// `amplitude * sin(frequency * w)`
    Sin {
        amplitude: f64,
        frequency: f64,
    },
}

impl TerminalFn {
    pub fn apply(&self, w: f64) -> f64 {
        match *self {
            Self::Identity => w,
            Self::Affine { a, b } => a + b * w,
            Self::Clamp { lo, hi } => w.max(lo).min(hi),
            Self::Sin { amplitude, frequency } => amplitude * libm::sin(frequency * w),
        }
    }
}

/// Terminal value `xi`, an `F_T`-measurable function of the Brownian path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TerminalSpec {
    Constant(f64),
    /// `scale * g(W_T)`
    OfTerminalW {
        g: TerminalFn,
        scale: f64,
    },
    /// `scale * max_{k<=N} W_k`
    RunningMax {
        scale: f64,
    },
}

impl TerminalSpec {
    /// `kind` is one of `constant`, `identity`, `affine`, `clamp`, `sin`,
    /// `running_max`; `scale` multiplies every kind except `constant`.
    pub fn from_parts(kind: &str, params: &[f64], scale: f64) -> Result<Self> {
        let of = |g| Self::OfTerminalW { g, scale };
        let spec = match (kind, params) {
            ("constant", [c]) => Self::Constant(*c),
            ("identity", []) => of(TerminalFn::Identity),
            ("affine", [a, b]) => of(TerminalFn::Affine { a: *a, b: *b }),
            ("clamp", [lo, hi]) if lo <= hi => of(TerminalFn::Clamp { lo: *lo, hi: *hi }),
            ("clamp", [_, _]) => return Err(Error::InvalidConfig("clamp terminal needs lo <= hi")),
            ("sin", [amplitude, frequency]) => of(TerminalFn::Sin { amplitude: *amplitude, frequency: *frequency }),
            ("running_max", []) => Self::RunningMax { scale },
            ("constant" | "identity" | "affine" | "clamp" | "sin" | "running_max", _) => {
                return Err(Error::InvalidConfig(
                    "terminal parameter count: constant 1, identity 0, affine 2, clamp 2, sin 2, running_max 0",
                ))
            }
            _ => {
                return Err(Error::InvalidConfig(
                    "terminal kind must be constant, identity, affine, clamp, sin or running_max",
                ))
            }
        };
        if !scale.is_finite() || params.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidConfig("terminal parameters must be finite"));
        }
        Ok(spec)
    }

    /// `xi(omega)` on every path of the tree.
    pub fn eval(&self, tree: &PathTree) -> Vec<f64> {
        let n = tree.depth();
        (0..tree.num_paths())
            .map(|w| match *self {
                Self::Constant(c) => c,
                Self::OfTerminalW { g, scale } => scale * g.apply(tree.brownian(n, w)),
                Self::RunningMax { scale } => {
                    scale * (0..=n).map(|k| tree.brownian(k, w)).fold(f64::NEG_INFINITY, f64::max)
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TimeGrid;

    #[test]
    fn declared_constants_must_dominate() {
        let kind = DriverKind::Affine { a: 0.0, b_y: 0.1, b_z: -0.3, b_k: 0.2 };
        assert_eq!(kind.lipschitz(), (0.3, 0.2));
        assert!(DriverSpec::new(kind, 0.3, 0.2).is_ok());
        assert!(matches!(DriverSpec::new(kind, 0.2, 0.2), Err(Error::DriverLipschitz { .. })));
        assert!(matches!(DriverSpec::new(kind, 0.3, 0.1), Err(Error::DriverLipschitz { .. })));
        assert!(DriverSpec::new(DriverKind::Zero, -1.0, 0.0).is_err());
    }

    #[test]
    fn bounded_nonlinear_lipschitz_holds() {
        let d = DriverSpec::tight(DriverKind::BoundedNonlinear { scale: -0.7 });
        let pts = [(0.1, -0.4, 2.0), (1.5, 0.3, -0.2), (-3.0, 0.0, 0.5), (0.0, 0.0, 0.0)];
        for &(y, z, k) in &pts {
            for &(y2, z2, k2) in &pts {
                let lhs = (d.eval(0.0, y, z, k) - d.eval(0.0, y2, z2, k2)).abs();
                let rhs = d.l1() * ((y - y2).abs() + (z - z2).abs()) + d.l2() * (k - k2).abs();
                assert!(lhs <= rhs + 1e-15);
            }
        }
        assert!(d.eval(0.0, 100.0, 0.0, 0.0).abs() <= 0.7);
    }

    #[test]
    fn parsing() {
        let d = DriverSpec::from_parts("affine", &[0.0, 0.0, 0.0, -0.05], None, None).unwrap();
        assert_eq!((d.l1(), d.l2()), (0.0, 0.05));
        assert!(!d.ignores_k());
        assert!(DriverSpec::from_parts("constant", &[], None, None).is_err());
        assert!(DriverSpec::from_parts("cubic", &[1.0], None, None).is_err());
        assert!(DriverSpec::from_parts("zero", &[], Some(1.0), Some(2.0)).unwrap().ignores_k());
    }

    #[test]
    fn terminal_values() {
        let tree = PathTree::new(TimeGrid::uniform(1.0, 4).unwrap()).unwrap();
        let w = tree.terminal_brownian();
        assert_eq!(TerminalSpec::from_parts("identity", &[], 1.0).unwrap().eval(&tree), w);
        let clamp = TerminalSpec::from_parts("clamp", &[-0.4, 0.4], 1.0).unwrap().eval(&tree);
        assert!(clamp.iter().all(|v| v.abs() <= 0.4));
        let c = TerminalSpec::Constant(2.0).eval(&tree);
        assert!(c.iter().all(|&v| v == 2.0));
        // all-up path: running max is W_N
        let rm = TerminalSpec::RunningMax { scale: 1.0 }.eval(&tree);
        assert_eq!(rm[15], w[15]);
        assert_eq!(rm[0], 0.0);
        assert!(TerminalSpec::from_parts("clamp", &[1.0, -1.0], 1.0).is_err());
        assert!(TerminalSpec::from_parts("sin", &[1.0], 1.0).is_err());
    }
}
