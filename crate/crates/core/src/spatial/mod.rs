//! Spatial grids and discretization matrices `A` with their boundary
//! contributions.

mod elliptic;
mod finance;
mod grid;
mod presets;
mod riesz;
pub(crate) mod stencil;

pub use elliptic::build_elliptic_1d;
pub use finance::{build_heston, build_sabr, payoff_call, HestonParams, SabrParams};
pub use grid::{make_stretched_grid, Grid1D, Grid2D, GridKind};
pub use presets::{GridSpec, Model, Preset, SetId};
pub use riesz::build_riesz_1d;

use crate::linalg::SparseMatrix;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    Elliptic1d,
    Riesz1d,
    Heston,
    Sabr,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpatialGrid {
    OneD(Grid1D),
    TwoD(Grid2D),
}

/// Time-dependent boundary value.
#[derive(Clone)]
pub enum Datum {
    Constant(f64),
    Function(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl Datum {
    pub fn at(&self, t: f64) -> f64 {
        match self {
            Datum::Constant(c) => *c,
            Datum::Function(f) => f(t),
        }
    }
}

impl fmt::Debug for Datum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Datum::Constant(c) => write!(f, "Constant({c})"),
            Datum::Function(_) => f.write_str("Function(..)"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BoundaryTerm {
    pub row: usize,
    pub weight: f64,
    pub datum: Datum,
}

/// The part of `du/dt = A u + g(t)` coming from eliminated boundary values.
#[derive(Debug, Clone, Default)]
pub struct BoundarySource {
    terms: Vec<BoundaryTerm>,
}

impl BoundarySource {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, row: usize, weight: f64, datum: Datum) {
        if weight != 0.0 {
            self.terms.push(BoundaryTerm { row, weight, datum });
        }
    }

    pub fn terms(&self) -> &[BoundaryTerm] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Adds `scale · g(t)` into `out`.
    pub fn add_to(&self, t: f64, scale: f64, out: &mut [f64]) {
        for term in &self.terms {
            out[term.row] += scale * term.weight * term.datum.at(t);
        }
    }

    pub fn eval(&self, t: f64, n: usize) -> Vec<f64> {
        let mut g = vec![0.0; n];
        self.add_to(t, 1.0, &mut g);
        g
    }
}

/// Scalar profile `d(t)` multiplying the whole spatial operator.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum TimeFactor {
    #[default]
    Constant,
    /// `d(t) = e^{−rt}`
    Discount { rate: f64 },
}

impl TimeFactor {
    pub fn at(&self, t: f64) -> f64 {
        match *self {
            TimeFactor::Constant => 1.0,
            TimeFactor::Discount { rate } => (-rate * t).exp(),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, TimeFactor::Constant | TimeFactor::Discount { rate: 0.0 })
    }
}

/// An assembled semi-discrete problem `du/dt = d(t)(A u + g(t)) + f`.
#[derive(Debug, Clone)]
pub struct SpatialProblem {
    pub kind: OperatorKind,
    pub parameters: BTreeMap<String, f64>,
    pub grid: SpatialGrid,
    pub matrix: SparseMatrix,
    pub boundary_source: BoundarySource,
    pub time_factor: TimeFactor,
}

impl SpatialProblem {
    pub fn n_unknowns(&self) -> usize {
        self.matrix.nrows()
    }

    /// Coordinates of unknown `k`: `[x]` in 1D, `[s, v]` in 2D.
    pub fn point(&self, k: usize) -> Vec<f64> {
        match &self.grid {
            SpatialGrid::OneD(g) => vec![g.interior()[k]],
            SpatialGrid::TwoD(g) => {
                let (i, j) = g.node_of(k);
                vec![g.s_nodes()[i], g.v_nodes()[j]]
            }
        }
    }

    pub fn grid_2d(&self) -> Option<&Grid2D> {
        match &self.grid {
            SpatialGrid::TwoD(g) => Some(g),
            SpatialGrid::OneD(_) => None,
        }
    }
}
