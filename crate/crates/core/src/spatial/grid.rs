use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridKind {
    Uniform,
    Stretched,
}

/// A 1D grid including both boundary nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D {
    nodes: Vec<f64>,
    kind: GridKind,
}

fn check_nodes(nodes: &[f64], a: f64, b: f64) -> Result<()> {
    if nodes.len() < 2 {
        return Err(Error::InvalidGrid("a grid needs at least two nodes".into()));
    }
    if nodes.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidGrid("nodes must be strictly increasing".into()));
    }
    if nodes[0] != a || nodes[nodes.len() - 1] != b {
        return Err(Error::InvalidGrid("end nodes must equal the domain endpoints".into()));
    }
    Ok(())
}

fn uniform_nodes(a: f64, b: f64, intervals: usize) -> Vec<f64> {
    let h = (b - a) / intervals as f64;
    let mut nodes: Vec<f64> = (0..=intervals).map(|i| a + i as f64 * h).collect();
    nodes[intervals] = b;
    nodes
}

/// Nodes `c + d·sinh(ξ)` with `d = (b − a)/strength`, smallest spacing next
/// to `center`. When `center` is interior it is itself a node: `ξ` is uniform
/// on either side of 0 with the intervals split in proportion. Strength 0
/// gives a uniform grid.
fn sinh_nodes(a: f64, b: f64, intervals: usize, center: f64, strength: f64) -> Vec<f64> {
    if strength == 0.0 {
        return uniform_nodes(a, b, intervals);
    }
    let d = (b - a) / strength;
    let xa = ((a - center) / d).asinh();
    let xb = ((b - center) / d).asinh();
    let left = ((intervals as f64 * -xa / (xb - xa)).round() as usize).min(intervals);
    let left = if center > a && center < b { left.clamp(1, intervals - 1) } else { left };
    let xi: Vec<f64> =
        if left == 0 || left == intervals {
            (0..=intervals).map(|i| xa + (xb - xa) * i as f64 / intervals as f64).collect()
        } else {
            let right = intervals - left;
            (0..=intervals)
                .map(|i| {
                    if i <= left {
                        xa * (left - i) as f64 / left as f64
                    } else {
                        xb * (i - left) as f64 / right as f64
                    }
                })
                .collect()
        };
    let mut nodes: Vec<f64> = xi.iter().map(|&x| center + d * x.sinh()).collect();
    if left > 0 && left < intervals {
        nodes[left] = center;
    }
    nodes[0] = a;
    nodes[intervals] = b;
    nodes
}

impl Grid1D {
    /// Uniform grid on `[a, b]` with `n_interior` interior nodes.
    pub fn uniform(a: f64, b: f64, n_interior: usize) -> Result<Self> {
        if !(b > a) || n_interior == 0 {
            return Err(Error::InvalidGrid(format!("bad uniform grid on [{a}, {b}] with {n_interior} nodes")));
        }
        Ok(Self { nodes: uniform_nodes(a, b, n_interior + 1), kind: GridKind::Uniform })
    }

    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        let (a, b) = (*nodes.first().unwrap_or(&0.0), *nodes.last().unwrap_or(&0.0));
        check_nodes(&nodes, a, b)?;
        let h = (b - a) / (nodes.len() - 1) as f64;
        let uniform =
            nodes.iter().enumerate().all(|(i, x)| (x - (a + i as f64 * h)).abs() <= 1e-14 * (b - a).abs().max(1.0));
        Ok(Self { nodes, kind: if uniform { GridKind::Uniform } else { GridKind::Stretched } })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn interior(&self) -> &[f64] {
        &self.nodes[1..self.nodes.len() - 1]
    }

    pub fn n_interior(&self) -> usize {
        self.nodes.len() - 2
    }

    pub fn intervals(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn spacings(&self) -> Vec<f64> {
        self.nodes.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

/// Clustered 1D grid on `[a, b]` with the given number of intervals.
pub fn make_stretched_grid(a: f64, b: f64, intervals: usize, center: f64, strength: f64) -> Result<Grid1D> {
    if intervals < 3 {
        return Err(Error::InvalidGrid(format!("need at least 4 nodes, got {}", intervals + 1)));
    }
    if !(b > a) || !(a..=b).contains(&center) || !(strength >= 0.0) {
        return Err(Error::InvalidGrid(format!("bad stretch on [{a}, {b}] around {center} with strength {strength}")));
    }
    let nodes = sinh_nodes(a, b, intervals, center, strength);
    check_nodes(&nodes, a, b)?;
    let kind = if strength == 0.0 { GridKind::Uniform } else { GridKind::Stretched };
    Ok(Grid1D { nodes, kind })
}

/// Tensor grid on `[0, S_max] × [0, V_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid2D {
    s_nodes: Vec<f64>,
    v_nodes: Vec<f64>,
    kind: GridKind,
}

impl Grid2D {
    pub fn uniform(s_max: f64, v_max: f64, n_s: usize, n_v: usize) -> Result<Self> {
        Self::stretched(s_max, v_max, n_s, n_v, 0.0, 0.0, 0.0)
    }

    /// Clusters s-nodes around `s_center` and v-nodes towards `v = 0`, with
    /// one stretch strength per axis.
    pub fn stretched(
        s_max: f64,
        v_max: f64,
        n_s: usize,
        n_v: usize,
        s_center: f64,
        s_strength: f64,
        v_strength: f64,
    ) -> Result<Self> {
        let s = make_stretched_grid(0.0, s_max, n_s, s_center, s_strength)?;
        let v = make_stretched_grid(0.0, v_max, n_v, 0.0, v_strength)?;
        let kind = if s.kind == GridKind::Uniform && v.kind == GridKind::Uniform {
            GridKind::Uniform
        } else {
            GridKind::Stretched
        };
        Ok(Self { s_nodes: s.nodes, v_nodes: v.nodes, kind })
    }

    pub fn from_nodes(s_nodes: Vec<f64>, v_nodes: Vec<f64>) -> Result<Self> {
        let s = Grid1D::from_nodes(s_nodes)?;
        let v = Grid1D::from_nodes(v_nodes)?;
        if s.nodes[0] != 0.0 || v.nodes[0] != 0.0 {
            return Err(Error::InvalidGrid("both axes must start at zero".into()));
        }
        let kind = if s.kind == GridKind::Uniform && v.kind == GridKind::Uniform {
            GridKind::Uniform
        } else {
            GridKind::Stretched
        };
        Ok(Self { s_nodes: s.nodes, v_nodes: v.nodes, kind })
    }

    pub fn s_nodes(&self) -> &[f64] {
        &self.s_nodes
    }

    pub fn v_nodes(&self) -> &[f64] {
        &self.v_nodes
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn s_max(&self) -> f64 {
        self.s_nodes[self.s_nodes.len() - 1]
    }

    pub fn v_max(&self) -> f64 {
        self.v_nodes[self.v_nodes.len() - 1]
    }

    /// Interval counts `(N_s, N_v)`.
    pub fn intervals(&self) -> (usize, usize) {
        (self.s_nodes.len() - 1, self.v_nodes.len() - 1)
    }

    /// Unknowns are `s_1..=s_{N_s}` by `v_0..v_{N_v − 1}`, v running fastest.
    pub fn n_unknowns(&self) -> usize {
        let (ns, nv) = self.intervals();
        ns * nv
    }

    /// Index of the unknown at node `(i, j)`, `1 ≤ i ≤ N_s`, `0 ≤ j < N_v`.
    pub fn index(&self, i: usize, j: usize) -> usize {
        (i - 1) * (self.v_nodes.len() - 1) + j
    }

    /// Node position of unknown `k`.
    pub fn node_of(&self, k: usize) -> (usize, usize) {
        let nv = self.v_nodes.len() - 1;
        (k / nv + 1, k % nv)
    }
}
