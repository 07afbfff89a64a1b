//! Heston and SABR pricing operators on `[0, S_max] × [0, V_max]`.
//!
//! Boundary treatment for a European call:
//! `u(0, v) = 0` and `u(s, V_max) = s` are eliminated,
//! `u_s(S_max, v) = 1` is imposed through a mirrored ghost node,
//! and the `v = 0` line keeps the degenerate PDE with a one-sided `u_v`.

use super::stencil::{first, forward_first, second};
use super::{BoundarySource, Datum, Grid2D, OperatorKind, SpatialGrid, SpatialProblem, TimeFactor};
use crate::error::{Error, Result};
use crate::linalg::SparseMatrix;
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HestonParams {
    pub kappa: f64,
    pub eta: f64,
    pub sigma: f64,
    pub r: f64,
    pub rho: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SabrParams {
    pub beta: f64,
    pub sigma: f64,
    pub r: f64,
    pub rho: f64,
}

/// Coefficients of `a_ss u_ss + a_sv u_sv + a_vv u_vv + b_s u_s + b_v u_v − c u`.
struct Coefficients<'a> {
    a_ss: &'a dyn Fn(f64, f64) -> f64,
    a_sv: &'a dyn Fn(f64, f64) -> f64,
    a_vv: &'a dyn Fn(f64, f64) -> f64,
    b_s: &'a dyn Fn(f64, f64) -> f64,
    b_v: &'a dyn Fn(f64, f64) -> f64,
    c: f64,
}

fn assemble(coef: &Coefficients<'_>, grid: &Grid2D) -> Result<(SparseMatrix, BoundarySource)> {
    let s = grid.s_nodes();
    let v = grid.v_nodes();
    let (ns, nv) = grid.intervals();
    if nv < 3 {
        return Err(Error::InvalidGrid(format!("the v = 0 stencil needs at least 3 v-intervals, got {nv}")));
    }
    let n = grid.n_unknowns();
    let mut trip: Vec<(usize, usize, f64)> = Vec::with_capacity(9 * n);
    let mut source = BoundarySource::new();

    for i in 1..=ns {
        let neumann = i == ns;
        let hsm = s[i] - s[i - 1];
        // the ghost node mirrors the last cell
        let hsp = if neumann { hsm } else { s[i + 1] - s[i] };
        for j in 0..nv {
            let row = grid.index(i, j);
            let (si, vj) = (s[i], v[j]);
            // local[a][b] couples to node (i + a − 1, j + b − 1)
            let mut local = [[0.0f64; 4]; 3];
            let mut constant = 0.0;

            let ass = (coef.a_ss)(si, vj);
            let asv = (coef.a_sv)(si, vj);
            let avv = (coef.a_vv)(si, vj);
            let bs = (coef.b_s)(si, vj);
            let bv = (coef.b_v)(si, vj);

            let ws2 = second(hsm, hsp);
            let ws1 = first(hsm, hsp);
            if neumann {
                // u_ghost = u_{i−1} + 2h·1, the drift sees u_s = 1 directly
                local[0][1] += ass * (ws2[0] + ws2[2]);
                local[1][1] += ass * ws2[1];
                constant += ass * ws2[2] * 2.0 * hsm + bs;
            } else {
                for (a, w) in [0, 1, 2].into_iter().zip(ws2) {
                    local[a][1] += ass * w;
                }
                for (a, w) in [0, 1, 2].into_iter().zip(ws1) {
                    local[a][1] += bs * w;
                }
            }

            if j == 0 {
                if avv != 0.0 || asv != 0.0 {
                    return Err(Error::InvalidParameter("second v-derivatives must vanish on v = 0".into()));
                }
                let wv = forward_first(v[1] - v[0], v[2] - v[1]);
                for (b, w) in wv.into_iter().enumerate() {
                    local[1][b + 1] += bv * w;
                }
            } else {
                let (hvm, hvp) = (v[j] - v[j - 1], v[j + 1] - v[j]);
                let wv2 = second(hvm, hvp);
                let wv1 = first(hvm, hvp);
                for b in 0..3 {
                    local[1][b] += avv * wv2[b] + bv * wv1[b];
                }
                if !neumann && asv != 0.0 {
                    for a in 0..3 {
                        for b in 0..3 {
                            local[a][b] += asv * ws1[a] * wv1[b];
                        }
                    }
                }
            }
            local[1][1] -= coef.c;

            for a in 0..3 {
                for b in 0..4 {
                    let w = local[a][b];
                    if w == 0.0 {
                        continue;
                    }
                    let ii = i + a - 1;
                    let jj = j + b - 1;
                    if ii == 0 {
                        continue;
                    }
                    if jj == nv {
                        constant += w * s[ii];
                        continue;
                    }
                    trip.push((row, grid.index(ii, jj), w));
                }
            }
            if constant != 0.0 {
                source.push(row, 1.0, Datum::Constant(constant));
            }
        }
    }
    Ok((SparseMatrix::from_triplets(n, n, trip)?, source))
}

fn check_grid_domain(grid: &Grid2D) -> Result<()> {
    let (ns, _) = grid.intervals();
    if ns < 2 {
        return Err(Error::InvalidGrid("need at least 2 s-intervals".into()));
    }
    Ok(())
}

pub fn build_heston(p: HestonParams, strike: f64, grid: &Grid2D) -> Result<SpatialProblem> {
    if !(p.rho.abs() <= 1.0) || !(p.sigma > 0.0) || !(p.kappa > 0.0) {
        return Err(Error::InvalidParameter(format!("invalid Heston parameters {p:?}")));
    }
    check_grid_domain(grid)?;
    let coef = Coefficients {
        a_ss: &|s, v| 0.5 * v * s * s,
        a_sv: &|s, v| p.sigma * s * v * p.rho,
        a_vv: &|_, v| 0.5 * p.sigma * p.sigma * v,
        b_s: &|s, _| p.r * s,
        b_v: &|_, v| p.kappa * (p.eta - v),
        c: p.r,
    };
    let (matrix, boundary_source) = assemble(&coef, grid)?;
    let parameters = BTreeMap::from([
        ("kappa".to_string(), p.kappa),
        ("eta".to_string(), p.eta),
        ("sigma".to_string(), p.sigma),
        ("r".to_string(), p.r),
        ("rho".to_string(), p.rho),
        ("K".to_string(), strike),
    ]);
    Ok(SpatialProblem {
        kind: OperatorKind::Heston,
        parameters,
        grid: SpatialGrid::TwoD(grid.clone()),
        matrix,
        boundary_source,
        time_factor: TimeFactor::Constant,
    })
}

/// SABR operator at `D = 1`; the whole operator is scaled by `d(t) = e^{−rt}`.
pub fn build_sabr(p: SabrParams, strike: f64, grid: &Grid2D) -> Result<SpatialProblem> {
    if !(p.beta > 0.0 && p.beta <= 1.0) || !(p.sigma > 0.0) || !(p.rho.abs() <= 1.0) {
        return Err(Error::InvalidParameter(format!("invalid SABR parameters {p:?}")));
    }
    check_grid_domain(grid)?;
    let coef = Coefficients {
        a_ss: &|s, v| 0.5 * v * v * s.powf(2.0 * p.beta),
        a_sv: &|s, v| p.rho * p.sigma * s.powf(p.beta) * v * v,
        a_vv: &|_, v| 0.5 * p.sigma * p.sigma * v * v,
        b_s: &|s, _| p.r * s,
        b_v: &|_, _| 0.0,
        c: p.r,
    };
    let (matrix, boundary_source) = assemble(&coef, grid)?;
    let parameters = BTreeMap::from([
        ("beta".to_string(), p.beta),
        ("sigma".to_string(), p.sigma),
        ("r".to_string(), p.r),
        ("rho".to_string(), p.rho),
        ("K".to_string(), strike),
    ]);
    Ok(SpatialProblem {
        kind: OperatorKind::Sabr,
        parameters,
        grid: SpatialGrid::TwoD(grid.clone()),
        matrix,
        boundary_source,
        time_factor: if p.r == 0.0 { TimeFactor::Constant } else { TimeFactor::Discount { rate: p.r } },
    })
}

/// `max(0, s − K)` at every unknown.
pub fn payoff_call(grid: &Grid2D, strike: f64) -> Result<Vec<f64>> {
    if !(strike > 0.0) {
        return Err(Error::InvalidParameter(format!("strike must be positive, got {strike}")));
    }
    Ok((0..grid.n_unknowns())
        .map(|k| {
            let (i, _) = grid.node_of(k);
            (grid.s_nodes()[i] - strike).max(0.0)
        })
        .collect())
}
