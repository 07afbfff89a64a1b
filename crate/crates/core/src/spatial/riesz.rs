use super::{BoundarySource, Grid1D, GridKind, OperatorKind, SpatialGrid, SpatialProblem};
use crate::error::{Error, Result};
use crate::linalg::{Definiteness, SparseMatrix};
use statrs::function::gamma::gamma;
use std::collections::BTreeMap;

/// Fractional centred-difference coefficients `g_0..g_{n-1}` of order `beta`.
pub(crate) fn riesz_coefficients(beta: f64, n: usize) -> Vec<f64> {
    let mut g = Vec::with_capacity(n);
    let g0 = gamma(beta + 1.0) / gamma(beta / 2.0 + 1.0).powi(2);
    if n > 0 {
        g.push(g0);
    }
    for k in 1..n {
        let prev = g[k - 1];
        g.push((1.0 - (beta + 1.0) / (beta / 2.0 + k as f64)) * prev);
    }
    g
}

/// `Σ_j κ_j ∂^{β_j}u/∂|x|^{β_j}` with homogeneous Dirichlet data.
pub fn build_riesz_1d(terms: &[(f64, f64)], grid: &Grid1D) -> Result<SpatialProblem> {
    if grid.kind() != GridKind::Uniform {
        return Err(Error::InvalidGrid("the fractional scheme needs a uniform grid".into()));
    }
    if terms.is_empty() {
        return Err(Error::InvalidParameter("at least one fractional term is required".into()));
    }
    let n = grid.n_interior();
    let h = grid.nodes()[1] - grid.nodes()[0];
    let mut band = vec![0.0; n];
    let mut parameters = BTreeMap::new();
    for (idx, &(beta, kappa)) in terms.iter().enumerate() {
        if !(beta > 1.0 && beta < 2.0) {
            return Err(Error::InvalidParameter(format!("fractional order {beta} outside (1, 2)")));
        }
        if !(kappa > 0.0) {
            return Err(Error::InvalidParameter(format!("coefficient {kappa} must be positive")));
        }
        let scale = -kappa * h.powf(-beta);
        for (b, g) in band.iter_mut().zip(riesz_coefficients(beta, n)) {
            *b += scale * g;
        }
        parameters.insert(format!("beta_{idx}"), beta);
        parameters.insert(format!("kappa_{idx}"), kappa);
    }
    let trip = (0..n).flat_map(|i| {
        let band = &band;
        (0..n).map(move |j| (i, j, band[i.abs_diff(j)]))
    });
    let matrix = SparseMatrix::from_triplets(n, n, trip)?.with_definiteness(Definiteness::NegativeSemidefinite);
    Ok(SpatialProblem {
        kind: OperatorKind::Riesz1d,
        parameters,
        grid: SpatialGrid::OneD(grid.clone()),
        matrix,
        boundary_source: BoundarySource::new(),
        time_factor: Default::default(),
    })
}
