//! Price extraction at `(S₀, V₀)`, the relative error measure and
//! fine-grid reference prices with a plain-text disk cache.

use crate::aao::assemble;
use crate::error::{Error, Result};
use crate::spatial::{make_stretched_grid, Grid2D, Preset, SetId};
use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

/// A terminal slice over the unknowns of `grid`.
///
/// Nodes on the eliminated boundaries take the call values `u(0, v) = 0`
/// and `u(s, V_max) = s`.
#[derive(Debug, Clone, Copy)]
pub struct PriceQuery<'a> {
    pub s0: f64,
    pub v0: f64,
    pub grid: &'a Grid2D,
    pub terminal_slice: &'a [f64],
}

fn nodal_value(grid: &Grid2D, slice: &[f64], i: usize, j: usize) -> f64 {
    let (_, nv) = grid.intervals();
    if i == 0 {
        0.0
    } else if j == nv {
        grid.s_nodes()[i]
    } else {
        slice[grid.index(i, j)]
    }
}

/// Cell index `c` with `nodes[c] ≤ x ≤ nodes[c + 1]`.
fn locate(nodes: &[f64], x: f64) -> usize {
    let c = nodes.partition_point(|&t| t <= x);
    c.saturating_sub(1).min(nodes.len() - 2)
}

/// Bilinear interpolation of the slice at `(s0, v0)`.
pub fn price_at(q: &PriceQuery<'_>) -> Result<f64> {
    let g = q.grid;
    if q.terminal_slice.len() != g.n_unknowns() {
        return Err(Error::DimensionMismatch { expected: g.n_unknowns(), found: q.terminal_slice.len() });
    }
    let (s, v) = (g.s_nodes(), g.v_nodes());
    if !(q.s0 >= 0.0 && q.s0 <= g.s_max() && q.v0 >= 0.0 && q.v0 <= g.v_max()) {
        return Err(Error::OutsideDomain { s: q.s0, v: q.v0 });
    }
    let i = locate(s, q.s0);
    let j = locate(v, q.v0);
    let ts = (q.s0 - s[i]) / (s[i + 1] - s[i]);
    let tv = (q.v0 - v[j]) / (v[j + 1] - v[j]);
    let f = |a, b| nodal_value(g, q.terminal_slice, a, b);
    Ok((1.0 - ts) * (1.0 - tv) * f(i, j)
        + ts * (1.0 - tv) * f(i + 1, j)
        + (1.0 - ts) * tv * f(i, j + 1)
        + ts * tv * f(i + 1, j + 1))
}

/// `|price − reference| / |reference|`.
pub fn relative_error(price: f64, reference: f64) -> Result<f64> {
    if reference == 0.0 {
        return Err(Error::InvalidParameter("reference price is zero".into()));
    }
    Ok((price - reference).abs() / reference.abs())
}

/// Solves a preset by sequential CN and returns the price at `(S₀, V₀)`.
pub fn sequential_price(preset: &Preset, grid: &Grid2D, n_t: usize) -> Result<f64> {
    let problem = preset.problem_on(grid)?;
    let u0 = preset.initial_value(grid)?;
    let sys = assemble(&problem, preset.t_final, n_t, None, &u0)?;
    let last = sys.solve_sequential_final()?;
    price_at(&PriceQuery { s0: preset.s0, v0: preset.v0, grid, terminal_slice: &last })
}

/// One sequential solve used to build a reference value. Both axes are
/// sinh-stretched so that `s = K` and `v = V₀` are grid nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceMesh {
    pub n_s: usize,
    pub n_v: usize,
    pub n_t: usize,
    pub s_strength: f64,
    pub v_strength: f64,
}

impl ReferenceMesh {
    pub fn grid(&self, preset: &Preset) -> Result<Grid2D> {
        let s = make_stretched_grid(0.0, preset.s_max, self.n_s, preset.strike, self.s_strength)?;
        let v = make_stretched_grid(0.0, preset.v_max, self.n_v, preset.v0, self.v_strength)?;
        Grid2D::from_nodes(s.nodes().to_vec(), v.nodes().to_vec())
    }

    fn refined(&self) -> Self {
        Self { n_s: 2 * self.n_s, n_v: 2 * self.n_v, n_t: 2 * self.n_t, ..*self }
    }
}

/// Reference price: Richardson extrapolation `(4p_fine − p_coarse)/3` over
/// two meshes, the fine one twice as dense in every direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceSpec {
    pub coarse: ReferenceMesh,
    pub fine: ReferenceMesh,
}

/// Largest number of spatial unknowns a reference solve may use.
pub const REFERENCE_UNKNOWN_CAP: usize = 200_000;

/// Level used when none is requested.
pub const DEFAULT_REFERENCE_LEVEL: u32 = 1;

impl ReferenceSpec {
    /// Meshes for `level`; the coarse mesh is `2^level·(128 × 64 × 64)`.
    pub fn for_level(id: SetId, level: u32) -> Self {
        let s_strength = match id {
            SetId::I | SetId::II => 4.0,
            SetId::III | SetId::IV | SetId::V => 8.0,
        };
        let coarse =
            ReferenceMesh { n_s: 128 << level, n_v: 64 << level, n_t: 64 << level, s_strength, v_strength: 3.0 };
        Self { coarse, fine: coarse.refined() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferencePrice {
    pub preset: SetId,
    pub level: u32,
    pub price: f64,
    pub coarse_price: f64,
    pub fine_price: f64,
    pub spec: ReferenceSpec,
}

fn mesh_price(preset: &Preset, mesh: &ReferenceMesh) -> Result<f64> {
    let unknowns = mesh.n_s * mesh.n_v;
    if unknowns > REFERENCE_UNKNOWN_CAP {
        return Err(Error::OracleCap { size: unknowns, cap: REFERENCE_UNKNOWN_CAP });
    }
    sequential_price(preset, &mesh.grid(preset)?, mesh.n_t)
}

/// Computes a reference price without touching the cache.
pub fn compute_reference(preset: &Preset, level: u32) -> Result<ReferencePrice> {
    let spec = ReferenceSpec::for_level(preset.id, level);
    let coarse_price = mesh_price(preset, &spec.coarse)?;
    let fine_price = mesh_price(preset, &spec.fine)?;
    Ok(ReferencePrice {
        preset: preset.id,
        level,
        price: (4.0 * fine_price - coarse_price) / 3.0,
        coarse_price,
        fine_price,
        spec,
    })
}

/// Reference prices stored one record per line as `key=value` pairs.
#[derive(Debug, Clone)]
pub struct ReferenceCache {
    path: PathBuf,
}

fn record_key(id: SetId, level: u32) -> String {
    format!("{id}:{level}")
}

fn format_record(r: &ReferencePrice) -> String {
    let (c, f) = (r.spec.coarse, r.spec.fine);
    format!(
        "preset={} level={} price={:e} coarse_price={:e} fine_price={:e} coarse_mesh={}x{}x{} fine_mesh={}x{}x{} s_strength={} v_strength={}",
        r.preset,
        r.level,
        r.price,
        r.coarse_price,
        r.fine_price,
        c.n_s,
        c.n_v,
        c.n_t,
        f.n_s,
        f.n_v,
        f.n_t,
        c.s_strength,
        c.v_strength
    )
}

fn parse_record(line: &str) -> Option<(String, ReferencePrice)> {
    let fields: BTreeMap<&str, &str> = line.split_whitespace().filter_map(|kv| kv.split_once('=')).collect();
    let preset: SetId = fields.get("preset")?.parse().ok()?;
    let level: u32 = fields.get("level")?.parse().ok()?;
    let spec = ReferenceSpec::for_level(preset, level);
    let mesh = |key: &str| -> Option<(usize, usize, usize)> {
        let mut it = fields.get(key)?.split('x').map(|x| x.parse::<usize>().ok());
        Some((it.next()??, it.next()??, it.next()??))
    };
    // records computed with different meshes are stale
    if mesh("coarse_mesh")? != (spec.coarse.n_s, spec.coarse.n_v, spec.coarse.n_t)
        || mesh("fine_mesh")? != (spec.fine.n_s, spec.fine.n_v, spec.fine.n_t)
        || fields.get("s_strength")?.parse::<f64>().ok()? != spec.coarse.s_strength
        || fields.get("v_strength")?.parse::<f64>().ok()? != spec.coarse.v_strength
    {
        return None;
    }
    Some((
        record_key(preset, level),
        ReferencePrice {
            preset,
            level,
            price: fields.get("price")?.parse().ok()?,
            coarse_price: fields.get("coarse_price")?.parse().ok()?,
            fine_price: fields.get("fine_price")?.parse().ok()?,
            spec,
        },
    ))
}

impl ReferenceCache {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        Self { path: path.into() }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    fn load(&self) -> Result<BTreeMap<String, ReferencePrice>> {
        match fs::read_to_string(&self.path) {
            Ok(text) => Ok(text.lines().filter_map(parse_record).collect()),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(BTreeMap::new()),
            Err(e) => Err(Error::Io(format!("{}: {e}", self.path.display()))),
        }
    }

    pub fn lookup(&self, id: SetId, level: u32) -> Result<Option<ReferencePrice>> {
        Ok(self.load()?.remove(&record_key(id, level)))
    }

    /// Stores `r`, replacing any older record for the same key. The file is
    /// rewritten through a temporary file and a rename.
    pub fn store(&self, r: &ReferencePrice) -> Result<()> {
        let io = |e: std::io::Error| Error::Io(format!("{}: {e}", self.path.display()));
        let mut records = self.load()?;
        records.insert(record_key(r.preset, r.level), r.clone());
        if let Some(dir) = self.path.parent() {
            if !dir.as_os_str().is_empty() {
                fs::create_dir_all(dir).map_err(io)?;
            }
        }
        let tmp = self.path.with_extension(format!("tmp{}", std::process::id()));
        {
            let mut f = fs::File::create(&tmp).map_err(io)?;
            for rec in records.values() {
                writeln!(f, "{}", format_record(rec)).map_err(io)?;
            }
            f.sync_all().map_err(io)?;
        }
        fs::rename(&tmp, &self.path).map_err(io)
    }
}

/// Cached reference price for `preset` at `level`.
pub fn reference_price(preset: &Preset, level: u32, cache: Option<&ReferenceCache>) -> Result<ReferencePrice> {
    if let Some(c) = cache {
        if let Some(hit) = c.lookup(preset.id, level)? {
            return Ok(hit);
        }
    }
    let r = compute_reference(preset, level)?;
    if let Some(c) = cache {
        c.store(&r)?;
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid2D {
        Grid2D::uniform(8.0, 4.0, 8, 4).unwrap()
    }

    #[test]
    fn node_query_is_exact() {
        let g = grid();
        let slice: Vec<f64> = (0..g.n_unknowns()).map(|k| k as f64 * 0.5).collect();
        let p = price_at(&PriceQuery { s0: 3.0, v0: 2.0, grid: &g, terminal_slice: &slice }).unwrap();
        assert_eq!(p, slice[g.index(3, 2)]);
    }

    #[test]
    fn reproduces_bilinear_functions() {
        let g = grid();
        let f = |s: f64, v: f64| 2.0 * s + 0.5 * v - 0.25 * s * v + 1.0;
        let slice: Vec<f64> = (0..g.n_unknowns())
            .map(|k| {
                let (i, j) = g.node_of(k);
                f(g.s_nodes()[i], g.v_nodes()[j])
            })
            .collect();
        let p = price_at(&PriceQuery { s0: 2.3, v0: 1.7, grid: &g, terminal_slice: &slice }).unwrap();
        assert!((p - f(2.3, 1.7)).abs() < 1e-13);
        let c = vec![3.0; g.n_unknowns()];
        let p = price_at(&PriceQuery { s0: 4.4, v0: 0.3, grid: &g, terminal_slice: &c }).unwrap();
        assert!((p - 3.0).abs() < 1e-14);
    }

    #[test]
    fn outside_is_rejected() {
        let g = grid();
        let c = vec![0.0; g.n_unknowns()];
        assert!(matches!(
            price_at(&PriceQuery { s0: 9.0, v0: 0.3, grid: &g, terminal_slice: &c }),
            Err(Error::OutsideDomain { .. })
        ));
    }

    #[test]
    fn error_measure() {
        assert_eq!(relative_error(1.0, 1.0).unwrap(), 0.0);
        assert!((relative_error(1.1, 1.0).unwrap() - 0.1).abs() < 1e-15);
        assert!(relative_error(1.0, 0.0).is_err());
    }

    #[test]
    fn cache_roundtrip() {
        let dir = std::env::temp_dir().join(format!("cnpint-cache-test-{}", std::process::id()));
        let cache = ReferenceCache::new(dir.join("refs.txt"));
        let spec = ReferenceSpec::for_level(SetId::II, 0);
        let r = ReferencePrice { preset: SetId::II, level: 0, price: 1.25, coarse_price: 1.0, fine_price: 1.2, spec };
        cache.store(&r).unwrap();
        assert_eq!(cache.lookup(SetId::II, 0).unwrap(), Some(r));
        assert_eq!(cache.lookup(SetId::I, 0).unwrap(), None);
        std::fs::remove_dir_all(dir).unwrap();
    }
}
