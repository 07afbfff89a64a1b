//! Parameter sets I–V.

use super::{build_heston, build_sabr, payoff_call, Grid2D, GridKind, HestonParams, SabrParams, SpatialProblem};
use crate::error::{Error, Result};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SetId {
    I,
    II,
    III,
    IV,
    V,
}

impl SetId {
    pub const ALL: [SetId; 5] = [SetId::I, SetId::II, SetId::III, SetId::IV, SetId::V];

    pub fn name(self) -> &'static str {
        match self {
            SetId::I => "I",
            SetId::II => "II",
            SetId::III => "III",
            SetId::IV => "IV",
            SetId::V => "V",
        }
    }
}

impl fmt::Display for SetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SetId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_uppercase();
        let t = t.strip_prefix("SET").unwrap_or(&t).trim_start_matches(['-', '_', ' ']);
        match t {
            "I" | "1" => Ok(SetId::I),
            "II" | "2" => Ok(SetId::II),
            "III" | "3" => Ok(SetId::III),
            "IV" | "4" => Ok(SetId::IV),
            "V" | "5" => Ok(SetId::V),
            _ => Err(Error::UnknownPreset(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Model {
    Heston(HestonParams),
    Sabr(SabrParams),
}

/// How the `(s, v)` grid is laid out for a given `N_t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub kind: GridKind,
    /// sinh stretch strength around `s = K`.
    pub s_strength: f64,
    /// sinh stretch strength towards `v = 0`.
    pub v_strength: f64,
}

impl GridSpec {
    pub const UNIFORM: GridSpec = GridSpec { kind: GridKind::Uniform, s_strength: 0.0, v_strength: 0.0 };
    pub const DEFAULT_STRENGTH: f64 = 5.0;

    pub fn stretched(s_strength: f64, v_strength: f64) -> Self {
        GridSpec { kind: GridKind::Stretched, s_strength, v_strength }
    }

    /// The default nonuniform layout.
    pub fn nonuniform() -> Self {
        Self::stretched(Self::DEFAULT_STRENGTH, Self::DEFAULT_STRENGTH)
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        Self::UNIFORM
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Preset {
    pub id: SetId,
    pub model: Model,
    pub t_final: f64,
    pub strike: f64,
    pub s0: f64,
    pub v0: f64,
    pub s_max: f64,
    pub v_max: f64,
    /// Coarsest `N_t` of the refinement sequence, doubled at each level.
    pub base_nt: usize,
}

impl Preset {
    pub fn get(id: SetId) -> Self {
        match id {
            SetId::I => Preset {
                id,
                model: Model::Heston(HestonParams { kappa: 1.5, eta: 0.04, sigma: 0.3, r: 0.025, rho: -0.9 }),
                t_final: 1.0,
                strike: 100.0,
                s0: 100.0,
                v0: 0.5,
                s_max: 800.0,
                v_max: 4.0,
                base_nt: 48,
            },
            SetId::II => Preset {
                id,
                model: Model::Heston(HestonParams { kappa: 0.6067, eta: 0.0707, sigma: 0.2928, r: 0.03, rho: -0.7571 }),
                t_final: 3.0,
                strike: 100.0,
                s0: 100.0,
                v0: 0.2,
                s_max: 800.0,
                v_max: 4.0,
                base_nt: 50,
            },
            SetId::III => Preset {
                id,
                model: Model::Sabr(SabrParams { beta: 0.5, sigma: 0.4, r: 0.0, rho: 0.0 }),
                t_final: 2.0,
                strike: 0.5,
                s0: 0.5,
                v0: 0.5,
                s_max: 24.0,
                v_max: 3.0,
                base_nt: 48,
            },
            SetId::IV => Preset {
                id,
                model: Model::Sabr(SabrParams { beta: 0.5, sigma: 0.8, r: 0.0, rho: -0.6 }),
                t_final: 10.0,
                strike: 0.07,
                s0: 0.07,
                v0: 0.4,
                s_max: 4.0,
                v_max: 2.0,
                base_nt: 48,
            },
            SetId::V => Preset {
                id,
                model: Model::Sabr(SabrParams { beta: 0.45, sigma: 0.4, r: 0.03, rho: -0.65 }),
                t_final: 2.0,
                strike: 0.5,
                s0: 0.5,
                v0: 0.2,
                s_max: 23.0,
                v_max: 3.0,
                base_nt: 48,
            },
        }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        Ok(Self::get(name.parse()?))
    }

    /// `N_t` at refinement level `level` (0 = coarsest).
    pub fn level_nt(&self, level: u32) -> usize {
        self.base_nt << level
    }

    /// Grid with `N_s = n_s` and `N_v = n_v` intervals.
    pub fn grid_with(&self, n_s: usize, n_v: usize, spec: GridSpec) -> Result<Grid2D> {
        match spec.kind {
            GridKind::Uniform => Grid2D::uniform(self.s_max, self.v_max, n_s, n_v),
            GridKind::Stretched => {
                Grid2D::stretched(self.s_max, self.v_max, n_s, n_v, self.strike, spec.s_strength, spec.v_strength)
            }
        }
    }

    /// Grid with `N_s = N_t` and `N_v = N_t / 2` intervals.
    pub fn grid(&self, n_t: usize, spec: GridSpec) -> Result<Grid2D> {
        if n_t < 6 || !n_t.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!("N_t = {n_t} must be even and at least 6")));
        }
        self.grid_with(n_t, n_t / 2, spec)
    }

    pub fn problem_on(&self, grid: &Grid2D) -> Result<SpatialProblem> {
        match self.model {
            Model::Heston(p) => build_heston(p, self.strike, grid),
            Model::Sabr(p) => build_sabr(p, self.strike, grid),
        }
    }

    pub fn initial_value(&self, grid: &Grid2D) -> Result<Vec<f64>> {
        payoff_call(grid, self.strike)
    }

    pub fn rate(&self) -> f64 {
        match self.model {
            Model::Heston(p) => p.r,
            Model::Sabr(p) => p.r,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_names() {
        assert_eq!("III".parse::<SetId>().unwrap(), SetId::III);
        assert_eq!("set-2".parse::<SetId>().unwrap(), SetId::II);
        assert_eq!("set_v".parse::<SetId>().unwrap(), SetId::V);
        assert!("VI".parse::<SetId>().is_err());
    }

    #[test]
    fn dofs_convention() {
        let p = Preset::get(SetId::I);
        let g = p.grid(48, GridSpec::UNIFORM).unwrap();
        assert_eq!(48 * g.n_unknowns(), 55_296);
        let p = Preset::get(SetId::II);
        let g = p.grid(50, GridSpec::UNIFORM).unwrap();
        assert_eq!(50 * g.n_unknowns(), 62_500);
    }
}
