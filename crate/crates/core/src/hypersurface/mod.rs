//! Critical points of `dist_Y|_X` for `X = Z(p)` or `X = ℝⁿ` and `Y = Z(q)`
//! or a finite set, with their indices `(k, ι)`.

mod classify;
mod seeds;
mod solve;
mod system;

use serde::{Deserialize, Serialize};

use crate::poly::Poly;

pub use classify::{
    classify, curvatures, hessian_dist_point, hessian_dist_sheet, planar_index, point_target_index,
    IndexVerdict,
};
pub use solve::{bottlenecks, solve_critical_points, SolveDiagnostics, SolveOptions, SolveOutcome};
pub use system::{assemble_critical_system, CriticalSystem, Layout};

/// The set `X` the distance is restricted to.
#[derive(Clone, Debug, PartialEq)]
pub enum Domain {
    Surface(Poly),
    Ambient(usize),
}

impl Domain {
    pub fn dim(&self) -> usize {
        match self {
            Domain::Surface(p) => p.nvars(),
            Domain::Ambient(n) => *n,
        }
    }

    /// Dimension of `X` itself.
    pub fn manifold_dim(&self) -> usize {
        match self {
            Domain::Surface(p) => p.nvars() - 1,
            Domain::Ambient(n) => *n,
        }
    }

    pub fn poly(&self) -> Option<&Poly> {
        match self {
            Domain::Surface(p) => Some(p),
            Domain::Ambient(_) => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Flag {
    /// More than `n+1` witnesses at `x`.
    Capped,
    /// Some `λᵢ` is numerically zero.
    BoundaryDegenerate,
    /// `x` is a focal point of a witness (`1 − rκ ≈ 0`).
    Focal,
    /// Condition 1 or 2 of nondegeneracy fails.
    Degenerate,
    /// Solves the algebraic system but the witnesses are not globally nearest.
    AlgebraicOnly,
}

impl Flag {
    /// Flags that make a run's census unreliable.
    pub fn is_degeneracy(self) -> bool {
        !matches!(self, Flag::AlgebraicOnly)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub x: Vec<f64>,
    pub value: f64,
    pub witnesses: Vec<Vec<f64>>,
    pub lambdas: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mu: Option<f64>,
    /// `x − yᵢ = σᵢ∇q(yᵢ)`; empty for finite targets.
    pub sigmas: Vec<f64>,
    pub k: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub iota: Option<usize>,
    pub nondegenerate: bool,
    pub residual: f64,
    pub validated: bool,
    #[serde(default)]
    pub flags: Vec<Flag>,
}

impl CriticalPoint {
    pub fn has_flag(&self, f: Flag) -> bool {
        self.flags.contains(&f)
    }

    pub(crate) fn add_flag(&mut self, f: Flag) {
        if !self.flags.contains(&f) {
            self.flags.push(f);
            self.flags.sort();
        }
    }

    /// Counted in the index census.
    pub fn is_clean(&self) -> bool {
        self.validated && self.nondegenerate && self.iota.is_some() && self.flags.is_empty()
    }
}
