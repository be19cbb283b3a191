//! The cell system `U(R,n)` and the sequence-space norms.
//!
//! Every coefficient `(R, n)` owns a time-domain cell: an anisotropic ball
//! around `e_{R,n} = π δ_R^{-1}(n + 1/2)` of measure exactly `1/|R|` (the
//! membership radius is scaled so the anisotropic unit ball has volume one,
//! which turns the usual `≍` between `|U(R,n)|` and `|R|^{-1}` into an
//! equality and makes the discrete m-norm an exact `p = q` section of the
//! integrated f-norm). The m-norm is the closed-form mixed norm; the f-norm
//! integrates the cell-indicator stack over space.

use crate::anisotropy::{quasi_norm, unit_ball_volume, Anisotropy};
use crate::covering::{Covering, CoveringSpec, FreqRect};
use crate::error::{Error, Result};
use crate::transform::CoefficientSet;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Smoothness/integrability parameters of one sequence norm.
/// `q = f64::INFINITY` selects the sup form.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NormParams {
    pub s: f64,
    pub p: f64,
    pub q: f64,
    pub alpha: f64,
    pub nu: f64,
}

impl NormParams {
    pub fn new(s: f64, p: f64, q: f64, spec: &CoveringSpec) -> Result<Self> {
        if !(p > 0.0) || !(q > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "norm exponents must be positive: p = {p}, q = {q}"
            )));
        }
        Ok(Self {
            s,
            p,
            q,
            alpha: spec.alpha(),
            nu: spec.aniso().nu(),
        })
    }

    /// The p-space coefficient weight exponent `s/ν + 1/2 - 1/p`.
    pub fn weight_exponent(&self) -> f64 {
        self.s / self.nu + 0.5 - 1.0 / self.p
    }
}

/// Membership radius making the cell measure exactly `|R|^{-1}`:
/// the anisotropic unit ball has the Euclidean unit-ball volume `V_d`
/// independently of the anisotropy, so radius `V_d^{-1/ν}` normalizes it.
pub fn cell_radius(aniso: &Anisotropy) -> f64 {
    unit_ball_volume(aniso.dim()).powf(-1.0 / aniso.nu())
}

/// One cell `U(R,n)` with its center and membership data.
#[derive(Debug, Clone)]
pub struct Cell {
    pub delta: Vec<f64>,
    pub n: Vec<u32>,
    pub center: Vec<f64>,
    pub radius: f64,
    pub rect_measure: f64,
}

/// Construct the cell of `(R, n)`: center `e_{R,n} = π δ_R^{-1} (n + 1/2)`,
/// membership `|δ_R x - π(n + 1/2)|_a < r` with the unit-volume radius.
pub fn cell(rect: &FreqRect, n: &[u32], aniso: &Anisotropy) -> Cell {
    let delta = rect.delta();
    let center = delta
        .iter()
        .zip(n)
        .map(|(&len, &ni)| PI * (ni as f64 + 0.5) / len)
        .collect();
    Cell {
        delta,
        n: n.to_vec(),
        center,
        radius: cell_radius(aniso),
        rect_measure: rect.measure,
    }
}

impl Cell {
    pub fn contains(&self, x: &[f64], aniso: &Anisotropy) -> bool {
        let mut z = Vec::with_capacity(x.len());
        for i in 0..x.len() {
            let zi = self.delta[i] * x[i] - PI * (self.n[i] as f64 + 0.5);
            // Quick box rejection: the ball sits inside |z_i| <= r^{a_i}.
            if zi.abs() > self.radius.powf(aniso.exponents()[i]) {
                return false;
            }
            z.push(zi);
        }
        quasi_norm(&z, aniso) < self.radius
    }

    /// Exact measure `|U(R,n)| = 1/|R|`.
    pub fn measure(&self) -> f64 {
        1.0 / self.rect_measure
    }

    /// Bounding box of the cell in time coordinates.
    pub fn bbox(&self, aniso: &Anisotropy) -> Vec<(f64, f64)> {
        self.center
            .iter()
            .zip(self.delta.iter().zip(aniso.exponents()))
            .map(|(&c, (&len, &ai))| {
                let h = self.radius.powf(ai) / len;
                (c - h, c + h)
            })
            .collect()
    }

    /// Extent along dimension `i`.
    pub fn extent(&self, i: usize, aniso: &Anisotropy) -> f64 {
        2.0 * self.radius.powf(aniso.exponents()[i]) / self.delta[i]
    }
}

/// The discrete mixed norm, adopted as an exact definition:
/// `( Σ_R |R|^{(s/ν + 1/2 - 1/p) q} (Σ_n |s_{R,n}|^p)^{q/p} )^{1/q}`,
/// with the sup over tiles when `q = ∞`. Entries are consumed in their
/// stored (sorted) order, grouped by tile.
pub fn m_norm(covering: &Covering, coeffs: &CoefficientSet, params: &NormParams) -> Result<f64> {
    let e = params.weight_exponent();
    let entries = coeffs.entries();
    let mut acc = 0.0_f64;
    let mut sup = 0.0_f64;
    let mut begin = 0usize;
    while begin < entries.len() {
        let (j, k) = (entries[begin].0.j, entries[begin].0.k);
        let mut end = begin;
        let mut inner = 0.0_f64;
        while end < entries.len() && entries[end].0.j == j && entries[end].0.k == k {
            inner += entries[end].1.norm().powf(params.p);
            end += 1;
        }
        let measure = covering.rect(j, k)?.measure;
        if params.q.is_infinite() {
            sup = sup.max(measure.powf(e) * inner.powf(1.0 / params.p));
        } else {
            acc += measure.powf(e * params.q) * inner.powf(params.q / params.p);
        }
        begin = end;
    }
    Ok(if params.q.is_infinite() {
        sup
    } else {
        acc.powf(1.0 / params.q)
    })
}

/// A coefficient stack prepared for spatial evaluation: per tile, the cells
/// and weights `|R|^{s/ν + 1/2} |s_{R,n}|`.
pub struct CellStack {
    aniso: Anisotropy,
    /// Per tile: (cells with weights).
    tiles: Vec<Vec<(Cell, f64)>>,
    q: f64,
}

impl CellStack {
    pub fn build(
        covering: &Covering,
        coeffs: &CoefficientSet,
        params: &NormParams,
    ) -> Result<Self> {
        let aniso = covering.spec().aniso().clone();
        let mut tiles: Vec<Vec<(Cell, f64)>> = Vec::new();
        let entries = coeffs.entries();
        let mut begin = 0usize;
        while begin < entries.len() {
            let (j, k) = (entries[begin].0.j, entries[begin].0.k);
            let rect = covering.rect(j, k)?;
            let wr = rect.measure.powf(params.s / params.nu + 0.5);
            let mut group = Vec::new();
            while begin < entries.len() && entries[begin].0.j == j && entries[begin].0.k == k {
                let (idx, c) = &entries[begin];
                let w = wr * c.norm();
                if w != 0.0 {
                    group.push((cell(rect, &idx.n, &aniso), w));
                }
                begin += 1;
            }
            if !group.is_empty() {
                tiles.push(group);
            }
        }
        Ok(Self {
            aniso,
            tiles,
            q: params.q,
        })
    }

    pub fn is_empty(&self) -> bool {
        self.tiles.is_empty()
    }

    /// Pointwise stack value `( Σ_R (Σ_n w 1_U(x))^q )^{1/q}`
    /// (sup over tiles when `q = ∞`).
    pub fn value_at(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0_f64;
        let mut sup = 0.0_f64;
        for tile in &self.tiles {
            let mut s = 0.0;
            for (cell, w) in tile {
                if cell.contains(x, &self.aniso) {
                    s += w;
                }
            }
            if s > 0.0 {
                if self.q.is_infinite() {
                    sup = sup.max(s);
                } else {
                    acc += s.powf(self.q);
                }
            }
        }
        if self.q.is_infinite() {
            sup
        } else if acc > 0.0 {
            acc.powf(1.0 / self.q)
        } else {
            0.0
        }
    }

    fn bbox(&self) -> Vec<(f64, f64)> {
        let d = self.aniso.dim();
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for tile in &self.tiles {
            for (cell, _) in tile {
                for (i, (a, b)) in cell.bbox(&self.aniso).into_iter().enumerate() {
                    lo[i] = lo[i].min(a);
                    hi[i] = hi[i].max(b);
                }
            }
        }
        lo.into_iter().zip(hi).collect()
    }

    fn min_extent(&self) -> f64 {
        let mut m = f64::INFINITY;
        for tile in &self.tiles {
            for (cell, _) in tile {
                for i in 0..self.aniso.dim() {
                    m = m.min(cell.extent(i, &self.aniso));
                }
            }
        }
        m
    }
}

/// Pointwise square-function value at `x` from a finite coefficient set:
/// `( Σ_R (Σ_n |R|^{s/ν + 1/2} |s_{R,n}| 1_{U(R,n)}(x))^q )^{1/q}`.
pub fn square_function_eval(
    covering: &Covering,
    coeffs: &CoefficientSet,
    s: f64,
    q: f64,
    x: &[f64],
) -> Result<f64> {
    let params = NormParams::new(s, 1.0, q, covering.spec())?;
    let stack = CellStack::build(covering, coeffs, &params)?;
    Ok(stack.value_at(x))
}

/// Diagnostics of one f-norm integration.
#[derive(Debug, Clone, Serialize)]
pub struct FNormReport {
    pub value: f64,
    pub leaves: u64,
    /// Estimated relative error from unresolved boundary leaves.
    pub boundary_rel_error: f64,
    /// Set when the depth budget cannot resolve the smallest cell.
    pub unresolved_cells: bool,
    pub exact: bool,
}

/// Spatial integration controls for the f-norm.
#[derive(Debug, Clone, Copy)]
pub struct SpatialQuad {
    /// Nodes across each cell extent in the initial uniform refinement.
    pub min_nodes_per_cell: usize,
    /// Extra bisection levels along cell boundaries.
    pub max_extra_depth: u32,
}

impl Default for SpatialQuad {
    fn default() -> Self {
        Self {
            min_nodes_per_cell: 8,
            max_extra_depth: 10,
        }
    }
}

/// The integrated sequence norm
/// `‖s‖ = ( ∫ (Σ_R (Σ_n |R|^{s/ν} |s_{R,n}| 1̃_{U(R,n)}(x))^q)^{p/q} dx )^{1/p}`.
///
/// In one dimension the integral is evaluated exactly by an endpoint sweep.
/// In higher dimensions an adaptive box subdivision refines along cell
/// boundaries; the reported boundary error bounds the miss.
pub fn f_norm(
    covering: &Covering,
    coeffs: &CoefficientSet,
    params: &NormParams,
    quad: &SpatialQuad,
) -> Result<FNormReport> {
    if !params.p.is_finite() {
        return Err(Error::InvalidArgument("f-norm requires finite p".into()));
    }
    let stack = CellStack::build(covering, coeffs, params)?;
    if stack.is_empty() {
        return Ok(FNormReport {
            value: 0.0,
            leaves: 0,
            boundary_rel_error: 0.0,
            unresolved_cells: false,
            exact: true,
        });
    }
    if covering.spec().dim() == 1 {
        return Ok(sweep_1d(&stack, params));
    }
    Ok(boxtree_integrate(&stack, params, quad))
}

/// Exact 1-d evaluation: cells are intervals, the integrand is piecewise
/// constant between their endpoints.
fn sweep_1d(stack: &CellStack, params: &NormParams) -> FNormReport {
    #[derive(Clone, Copy)]
    struct Event {
        x: f64,
        tile: usize,
        delta: f64,
    }
    let mut events = Vec::new();
    for (t, tile) in stack.tiles.iter().enumerate() {
        for (cell, w) in tile {
            let (lo, hi) = cell.bbox(&stack.aniso)[0];
            events.push(Event {
                x: lo,
                tile: t,
                delta: *w,
            });
            events.push(Event {
                x: hi,
                tile: t,
                delta: -*w,
            });
        }
    }
    events.sort_by(|a, b| a.x.partial_cmp(&b.x).unwrap());
    let mut per_tile = vec![0.0_f64; stack.tiles.len()];
    let mut integral = 0.0_f64;
    let mut prev_x = events[0].x;
    let mut i = 0usize;
    while i < events.len() {
        let x = events[i].x;
        if x > prev_x {
            // Integrand over [prev_x, x).
            let mut acc = 0.0_f64;
            let mut sup = 0.0_f64;
            for &s in &per_tile {
                if s > 0.0 {
                    if params.q.is_infinite() {
                        sup = sup.max(s);
                    } else {
                        acc += s.powf(params.q);
                    }
                }
            }
            let g = if params.q.is_infinite() {
                sup
            } else if acc > 0.0 {
                acc.powf(1.0 / params.q)
            } else {
                0.0
            };
            if g > 0.0 {
                integral += g.powf(params.p) * (x - prev_x);
            }
            prev_x = x;
        }
        while i < events.len() && events[i].x == x {
            per_tile[events[i].tile] += events[i].delta;
            i += 1;
        }
    }
    FNormReport {
        value: integral.powf(1.0 / params.p),
        leaves: events.len() as u64,
        boundary_rel_error: 0.0,
        unresolved_cells: false,
        exact: true,
    }
}

#[derive(Clone, Copy, PartialEq)]
enum BoxClass {
    Outside,
    Inside,
    Straddle,
}

/// Exact box-vs-cell classification. In the gauge coordinates
/// `z = δ_R x - π(n + 1/2)` the box stays axis-aligned and the quasi-norm is
/// monotone in each `|z_i|`, so its min over the box is attained at the
/// componentwise clamp of 0 into the box and its max at the far corner.
fn classify(cell: &Cell, aniso: &Anisotropy, lo: &[f64], hi: &[f64]) -> BoxClass {
    let d = lo.len();
    let mut z_near = vec![0.0f64; d];
    let mut z_far = vec![0.0f64; d];
    for i in 0..d {
        let shift = PI * (cell.n[i] as f64 + 0.5);
        let zlo = cell.delta[i] * lo[i] - shift;
        let zhi = cell.delta[i] * hi[i] - shift;
        z_near[i] = if zlo > 0.0 {
            zlo
        } else if zhi < 0.0 {
            zhi
        } else {
            0.0
        };
        z_far[i] = if zlo.abs() > zhi.abs() { zlo } else { zhi };
    }
    if quasi_norm(&z_near, aniso) >= cell.radius {
        BoxClass::Outside
    } else if quasi_norm(&z_far, aniso) < cell.radius {
        BoxClass::Inside
    } else {
        BoxClass::Straddle
    }
}

fn boxtree_integrate(stack: &CellStack, params: &NormParams, quad: &SpatialQuad) -> FNormReport {
    let bbox = stack.bbox();
    let min_ext = stack.min_extent();
    let root_ext = bbox.iter().map(|&(a, b)| b - a).fold(0.0_f64, f64::max);
    // Depth that puts `min_nodes_per_cell` leaves across the smallest cell.
    let base_depth = ((root_ext * quad.min_nodes_per_cell as f64 / min_ext)
        .log2()
        .ceil() as i64)
        .max(0) as u32;
    let depth_limit = base_depth + quad.max_extra_depth;
    let unresolved = base_depth > 40;

    struct Walker<'a> {
        stack: &'a CellStack,
        params: &'a NormParams,
        depth_limit: u32,
        leaves: u64,
        boundary_err: f64,
    }

    struct Frame {
        // (tile, cell index) still straddling this box.
        pending: Vec<(usize, usize)>,
        // Per-tile weight already fully inside.
        base: Vec<(usize, f64)>,
    }

    impl Walker<'_> {
        fn integrand(&self, per_tile: &[(usize, f64)]) -> f64 {
            let q = self.params.q;
            if q.is_infinite() {
                per_tile.iter().map(|&(_, s)| s).fold(0.0, f64::max)
            } else {
                let acc: f64 = per_tile.iter().map(|&(_, s)| s.powf(q)).sum();
                if acc > 0.0 {
                    acc.powf(1.0 / q)
                } else {
                    0.0
                }
            }
        }

        fn value_with_point(&self, frame: &Frame, x: &[f64]) -> f64 {
            let mut per: Vec<(usize, f64)> = frame.base.clone();
            for &(t, c) in &frame.pending {
                let (cell, w) = &self.stack.tiles[t][c];
                if cell.contains(x, &self.stack.aniso) {
                    match per.binary_search_by(|&(pt, _)| pt.cmp(&t)) {
                        Ok(pos) => per[pos].1 += w,
                        Err(pos) => per.insert(pos, (t, *w)),
                    }
                }
            }
            self.integrand(&per)
        }

        fn walk(&mut self, lo: &[f64], hi: &[f64], frame: &Frame, depth: u32) -> f64 {
            let d = lo.len();
            let vol: f64 = lo.iter().zip(hi).map(|(a, b)| b - a).product();
            if frame.pending.is_empty() {
                self.leaves += 1;
                let g = self.integrand(&frame.base);
                return if g > 0.0 {
                    g.powf(self.params.p) * vol
                } else {
                    0.0
                };
            }
            if depth >= self.depth_limit {
                // Midpoint value; bound the miss by the corner spread.
                self.leaves += 1;
                let mid: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect();
                let g_mid = self.value_with_point(frame, &mid);
                let mut g_lo = g_mid;
                let mut g_hi = g_mid;
                let mut corner = vec![0.0; d];
                for mask in 0..(1usize << d) {
                    for i in 0..d {
                        corner[i] = if mask & (1 << i) != 0 { hi[i] } else { lo[i] };
                    }
                    let g = self.value_with_point(frame, &corner);
                    g_lo = g_lo.min(g);
                    g_hi = g_hi.max(g);
                }
                let p = self.params.p;
                self.boundary_err += (g_hi.powf(p) - g_lo.powf(p)) * vol;
                return if g_mid > 0.0 {
                    g_mid.powf(p) * vol
                } else {
                    0.0
                };
            }
            // Split every axis at the midpoint and classify children.
            let mid: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect();
            let mut total = 0.0;
            let mut clo = vec![0.0; d];
            let mut chi = vec![0.0; d];
            for mask in 0..(1usize << d) {
                for i in 0..d {
                    if mask & (1 << i) != 0 {
                        clo[i] = mid[i];
                        chi[i] = hi[i];
                    } else {
                        clo[i] = lo[i];
                        chi[i] = mid[i];
                    }
                }
                let mut child = Frame {
                    pending: Vec::new(),
                    base: frame.base.clone(),
                };
                for &(t, c) in &frame.pending {
                    let (cell, w) = &self.stack.tiles[t][c];
                    match classify(cell, &self.stack.aniso, &clo, &chi) {
                        BoxClass::Outside => {}
                        BoxClass::Inside => {
                            match child.base.binary_search_by(|&(pt, _)| pt.cmp(&t)) {
                                Ok(pos) => child.base[pos].1 += w,
                                Err(pos) => child.base.insert(pos, (t, *w)),
                            }
                        }
                        BoxClass::Straddle => child.pending.push((t, c)),
                    }
                }
                total += self.walk(&clo, &chi, &child, depth + 1);
            }
            total
        }
    }

    let mut walker = Walker {
        stack,
        params,
        depth_limit,
        leaves: 0,
        boundary_err: 0.0,
    };
    let lo: Vec<f64> = bbox.iter().map(|&(a, _)| a).collect();
    let hi: Vec<f64> = bbox.iter().map(|&(_, b)| b).collect();
    let mut pending = Vec::new();
    for (t, tile) in stack.tiles.iter().enumerate() {
        for c in 0..tile.len() {
            pending.push((t, c));
        }
    }
    let frame = Frame {
        pending,
        base: Vec::new(),
    };
    let integral = walker.walk(&lo, &hi, &frame, 0);
    let value = integral.powf(1.0 / params.p);
    let rel = if integral > 0.0 {
        walker.boundary_err / integral
    } else {
        0.0
    };
    FNormReport {
        value,
        leaves: walker.leaves,
        boundary_rel_error: rel,
        unresolved_cells: unresolved,
        exact: false,
    }
}

/// Discrete Lorentz norm `‖s‖_{ℓ_{τ,r}}`: sort by decreasing magnitude, then
/// `( Σ_k (k^{1/τ} |s_k|)^r / k )^{1/r}`, with `sup_k k^{1/τ} |s_k|` at
/// `r = ∞`. Rearrangement-based, hence permutation invariant.
pub fn lorentz_norm(values: &[f64], tau: f64, r: f64) -> f64 {
    let mut sorted: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    if r.is_infinite() {
        sorted
            .iter()
            .enumerate()
            .map(|(k, &v)| ((k + 1) as f64).powf(1.0 / tau) * v)
            .fold(0.0, f64::max)
    } else {
        sorted
            .iter()
            .enumerate()
            .map(|(k, &v)| {
                let kf = (k + 1) as f64;
                (kf.powf(1.0 / tau) * v).powf(r) / kf
            })
            .sum::<f64>()
            .powf(1.0 / r)
    }
}

/// Overlap count `Σ_n 1_{U(R,n)}(x)` for one tile at one point.
pub fn cell_overlap_count(rect: &FreqRect, aniso: &Anisotropy, x: &[f64], n_max: u32) -> usize {
    let d = aniso.dim();
    let mut n = vec![0u32; d];
    let mut count = 0;
    loop {
        if cell(rect, &n, aniso).contains(x, aniso) {
            count += 1;
        }
        let mut c = d;
        while c > 0 {
            n[c - 1] += 1;
            if n[c - 1] <= n_max {
                break;
            }
            n[c - 1] = 0;
            c -= 1;
        }
        if c == 0 {
            break;
        }
    }
    count
}
