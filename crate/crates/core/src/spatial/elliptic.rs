use super::{BoundarySource, Datum, Grid1D, GridKind, OperatorKind, SpatialGrid, SpatialProblem};
use crate::error::{Error, Result};
use crate::linalg::{Definiteness, SparseMatrix};
use std::collections::BTreeMap;

/// `(a u_x)_x + b u_x − c0 u` on `grid` with Dirichlet values at both ends.
///
/// The diffusion term is in flux form with `a` sampled at cell midpoints,
/// so `b ≡ 0` gives an exactly symmetric matrix on uniform grids.
pub fn build_elliptic_1d(
    a: impl Fn(f64) -> f64,
    b: impl Fn(f64) -> f64,
    c0: impl Fn(f64) -> f64,
    grid: &Grid1D,
    left: Datum,
    right: Datum,
) -> Result<SpatialProblem> {
    let x = grid.nodes();
    let n = grid.n_interior();
    for &xi in x {
        if !(a(xi) > 0.0) {
            return Err(Error::InvalidParameter(format!("diffusivity must be positive, a({xi}) = {}", a(xi))));
        }
    }
    let mut trip = Vec::with_capacity(3 * n);
    let mut source = BoundarySource::new();
    let mut no_drift = true;
    let mut c_nonneg = true;
    // one spacing on uniform grids so rounding cannot break symmetry
    let h_uniform = (grid.kind() == GridKind::Uniform).then(|| (x[n + 1] - x[0]) / (n + 1) as f64);
    for k in 0..n {
        let i = k + 1;
        let (hm, hp) = h_uniform.map_or((x[i] - x[i - 1], x[i + 1] - x[i]), |h| (h, h));
        let am = a(0.5 * (x[i - 1] + x[i]));
        let ap = a(0.5 * (x[i] + x[i + 1]));
        let scale = 2.0 / (hm + hp);
        let bi = b(x[i]);
        let ci = c0(x[i]);
        no_drift &= bi == 0.0;
        c_nonneg &= ci >= 0.0;
        let [dm, d0, dp] = super::stencil::first(hm, hp);
        let wm = scale * am / hm + bi * dm;
        let wp = scale * ap / hp + bi * dp;
        let w0 = -scale * (am / hm + ap / hp) + bi * d0 - ci;
        trip.push((k, k, w0));
        if k > 0 {
            trip.push((k, k - 1, wm));
        } else {
            source.push(k, wm, left.clone());
        }
        if k + 1 < n {
            trip.push((k, k + 1, wp));
        } else {
            source.push(k, wp, right.clone());
        }
    }
    let mut matrix = SparseMatrix::from_triplets(n, n, trip)?;
    if no_drift && c_nonneg && matrix.flags().symmetric {
        matrix = matrix.with_definiteness(Definiteness::NegativeSemidefinite);
    }
    Ok(SpatialProblem {
        kind: OperatorKind::Elliptic1d,
        parameters: BTreeMap::new(),
        grid: SpatialGrid::OneD(grid.clone()),
        matrix,
        boundary_source: source,
        time_factor: Default::default(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dense_eig;

    fn laplace(n: usize) -> SpatialProblem {
        let g = Grid1D::uniform(0.0, 1.0, n).unwrap();
        build_elliptic_1d(|_| 1.0, |_| 0.0, |_| 0.0, &g, Datum::Constant(0.0), Datum::Constant(0.0)).unwrap()
    }

    #[test]
    fn laplacian_stencil() {
        let p = laplace(3);
        let a = p.matrix.to_dense();
        let expect = [[-32.0, 16.0, 0.0], [16.0, -32.0, 16.0], [0.0, 16.0, -32.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(a[(i, j)], expect[i][j]);
            }
        }
        assert!(p.matrix.flags().symmetric);
        assert_eq!(p.matrix.flags().definiteness, Definiteness::NegativeSemidefinite);
    }

    #[test]
    fn closed_form_spectrum() {
        let p = laplace(3);
        let ev = dense_eig(&p.matrix.to_dense(), false).unwrap().values;
        let h: f64 = 0.25;
        let mut expect: Vec<f64> =
            (1..=3).map(|k| 2.0 / (h * h) * ((k as f64 * std::f64::consts::PI * h).cos() - 1.0)).collect();
        expect.sort_by(f64::total_cmp);
        for (l, e) in ev.iter().zip(&expect) {
            assert!((l.re - e).abs() < 1e-10 && l.im.abs() < 1e-10);
        }
    }

    #[test]
    fn reaction_shift() {
        let g = Grid1D::uniform(0.0, 1.0, 3).unwrap();
        let p = build_elliptic_1d(|_| 1.0, |_| 0.0, |_| 1.0, &g, Datum::Constant(0.0), Datum::Constant(0.0)).unwrap();
        let q = laplace(3);
        for i in 0..3 {
            assert_eq!(p.matrix.get(i, i), q.matrix.get(i, i) - 1.0);
        }
    }

    #[test]
    fn rejects_nonpositive_diffusion() {
        let g = Grid1D::uniform(0.0, 1.0, 3).unwrap();
        let r = build_elliptic_1d(|x| x - 0.5, |_| 0.0, |_| 0.0, &g, Datum::Constant(0.0), Datum::Constant(0.0));
        assert!(matches!(r, Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn dirichlet_data_enter_source() {
        let g = Grid1D::uniform(0.0, 1.0, 3).unwrap();
        let p = build_elliptic_1d(|_| 1.0, |_| 0.0, |_| 0.0, &g, Datum::Constant(1.0), Datum::Constant(2.0)).unwrap();
        assert_eq!(p.boundary_source.eval(0.0, 3), vec![16.0, 0.0, 32.0]);
    }
}
