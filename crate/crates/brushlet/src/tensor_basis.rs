//! Tensor-product brushlets on frequency rectangles and their projections.

use crate::brushlet1d::{brushlet_freq_eval, project_axis, Bell, RampProfile};
use crate::covering::{Covering, FreqRect};
use crate::error::{Error, Result};
use crate::grid::{GridFunction, SampledAxis};
use serde::{Deserialize, Serialize};

/// Index of one tensor brushlet: the tile `R_k^j` and the cosine multi-index.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BrushIndex {
    pub j: u32,
    pub k: usize,
    pub n: Vec<u32>,
}

impl BrushIndex {
    pub fn new(j: u32, k: usize, n: Vec<u32>) -> Self {
        Self { j, k, n }
    }
}

/// Bell windows of a tile, one per dimension.
pub fn bells_for_rect(rect: &FreqRect, ramp: &RampProfile) -> Result<Vec<Bell>> {
    rect.intervals
        .iter()
        .map(|iv| Bell::from_interval(iv, ramp.clone()))
        .collect()
}

/// Frequency-side tensor brushlet value `ŵ_{R,n}(ξ) = Π_i ŵ_{n_i, I_i}(ξ_i)`.
pub fn brushlet_nd_freq_eval(
    rect: &FreqRect,
    n: &[u32],
    xi: &[f64],
    ramp: &RampProfile,
) -> Result<f64> {
    if n.len() != rect.dim() || xi.len() != rect.dim() {
        return Err(Error::InvalidArgument(
            "dimension mismatch in brushlet eval".into(),
        ));
    }
    let mut prod = 1.0;
    for i in 0..rect.dim() {
        let iv = &rect.intervals[i];
        let (lo, hi) = iv.support();
        if xi[i] <= lo || xi[i] >= hi {
            return Ok(0.0);
        }
        let bell = Bell::from_interval(iv, ramp.clone())?;
        prod *= brushlet_freq_eval(&bell, n[i], xi[i]);
    }
    Ok(prod)
}

/// Rectangle projection `P_R` as `d` sequential univariate interval
/// projections, one along each axis. The tensorized reflection sandwich is
/// separable, so the axis-by-axis application is exact.
pub fn project_rect(rect: &FreqRect, ramp: &RampProfile, f: &GridFunction) -> Result<GridFunction> {
    if f.dim() != rect.dim() {
        return Err(Error::InvalidArgument(
            "grid/rect dimension mismatch".into(),
        ));
    }
    let bells = bells_for_rect(rect, ramp)?;
    let mut g = f.clone();
    for (dim, bell) in bells.iter().enumerate() {
        g = project_axis(bell, &g, dim)?;
    }
    Ok(g)
}

/// The pair of window intervals behind the layer projection: the full ring
/// interval `A_j^i` with extreme cutoffs and the inner interval `B_j^i` with
/// inner cutoffs.
pub fn layer_window_bells(
    covering: &Covering,
    j: u32,
    ramp: &RampProfile,
) -> Result<(Vec<Bell>, Vec<Bell>)> {
    if j == 0 {
        return Err(Error::InvalidArgument(
            "layer_window_bells needs j >= 1; layer 0 is a single tile".into(),
        ));
    }
    let spec = covering.spec();
    let beta = spec.beta();
    let mut outer = Vec::with_capacity(spec.dim());
    let mut inner = Vec::with_capacity(spec.dim());
    for (i, &ai) in spec.aniso().exponents().iter().enumerate() {
        let ci = spec.cutoff_fracs()[i];
        let hi = ((j + 1) as f64).powf(ai * beta);
        let eps_hi = ci * ((j + 1) as f64).powf(ai * (beta - 1.0));
        outer.push(Bell::new(-hi, hi, eps_hi, eps_hi, ramp.clone())?);
        let lo = (j as f64).powf(ai * beta);
        let eps_lo = ci * (j as f64).powf(ai * (beta - 1.0));
        inner.push(Bell::new(-lo, lo, eps_lo, eps_lo, ramp.clone())?);
    }
    Ok((outer, inner))
}

/// Orthogonal projection onto the span of layer `j`:
/// `P_{W_j} = ⊗_i P_{A_j^i} - ⊗_i P_{B_j^i}` for `j >= 1`, and the low-pass
/// tile projection for `j = 0`. Equals the sum of `P_R` over the layer.
pub fn layer_projection(
    covering: &Covering,
    j: u32,
    ramp: &RampProfile,
    f: &GridFunction,
) -> Result<GridFunction> {
    if j == 0 {
        let rect = covering.rect(0, 1)?;
        return project_rect(rect, ramp, f);
    }
    let (outer, inner) = layer_window_bells(covering, j, ramp)?;
    let mut pa = f.clone();
    for (dim, bell) in outer.iter().enumerate() {
        pa = project_axis(bell, &pa, dim)?;
    }
    let mut pb = f.clone();
    for (dim, bell) in inner.iter().enumerate() {
        pb = project_axis(bell, &pb, dim)?;
    }
    pa.axpy(num_complex::Complex64::new(-1.0, 0.0), &pb);
    Ok(pa)
}

/// All brushlet indices whose tile support meets `[-L, L]^d`, with cosine
/// indices `n` componentwise `<= n_max`, in deterministic order
/// (layer, tile, then lexicographic `n`).
pub fn enumerate_active(covering: &Covering, bound: f64, n_max: u32) -> Result<Vec<BrushIndex>> {
    if !(bound > 0.0) {
        return Err(Error::InvalidArgument(
            "frequency bound must be positive".into(),
        ));
    }
    let spec = covering.spec();
    let d = spec.dim();
    let beta = spec.beta();
    let mut out = Vec::new();
    for j in 0..=covering.j_max() {
        if j >= 1 {
            // Every tile of layer j has at least one outer dimension, whose
            // support starts at j^{a_i β} - c_i j^{a_i (β-1)}; once that
            // exceeds the bound in every dimension the layer (and all later
            // ones) cannot intersect the box.
            let reach = spec
                .aniso()
                .exponents()
                .iter()
                .zip(spec.cutoff_fracs())
                .map(|(&ai, &ci)| {
                    (j as f64).powf(ai * beta) - ci * (j as f64).powf(ai * (beta - 1.0))
                })
                .fold(f64::INFINITY, f64::min);
            if reach > bound {
                return Ok(out);
            }
        }
        for rect in covering.layer(j)? {
            if !rect.support_intersects_box(bound) {
                continue;
            }
            let mut n = vec![0u32; d];
            loop {
                out.push(BrushIndex::new(j, rect.index, n.clone()));
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
        }
    }
    Err(Error::InvalidArgument(format!(
        "covering built to j_max = {} is too shallow for bound {bound}",
        covering.j_max()
    )))
}

/// Knot-aligned axes carrying the corridor-boundary windows `±m^{a_i β}`,
/// `m = 1..=j_hi+1`, with their cutoff radii `c_i m^{a_i (β-1)}`. These are
/// the only knots the layer projections `P_{W_j}`, `j <= j_hi`, touch, and
/// their windows never overlap, so compositions across layers stay exact.
///
/// Interior subdivision knots of different layers can sit arbitrarily close
/// to each other, so a single axis cannot host exact windows for tiles of
/// two different layers; per-tile work uses [`axes_for_tiles`] instead.
pub fn axes_for_layer_windows(
    covering: &Covering,
    j_hi: u32,
    target: f64,
) -> Result<Vec<SampledAxis>> {
    let spec = covering.spec();
    let beta = spec.beta();
    let mut axes = Vec::with_capacity(spec.dim());
    for (i, &ai) in spec.aniso().exponents().iter().enumerate() {
        let ci = spec.cutoff_fracs()[i];
        let mut knots = Vec::new();
        for m in 1..=(j_hi + 1) {
            let r = (m as f64).powf(ai * beta);
            let eps = ci * (m as f64).powf(ai * (beta - 1.0));
            knots.push((r, eps));
            knots.push((-r, eps));
        }
        let r_top = ((j_hi + 1) as f64).powf(ai * beta);
        let eps_top = ci * ((j_hi + 1) as f64).powf(ai * (beta - 1.0));
        let bound = r_top + 2.0 * eps_top;
        axes.push(SampledAxis::knot_aligned(&knots, -bound, bound, target)?);
    }
    Ok(axes)
}

/// Knot-aligned axes carrying every subdivision knot of one layer (plus the
/// low-pass knots), for exact per-tile projections within that layer.
pub fn axes_for_tiles(covering: &Covering, j: u32, target: f64) -> Result<Vec<SampledAxis>> {
    let spec = covering.spec();
    let d = spec.dim();
    let mut axes = Vec::with_capacity(d);
    for i in 0..d {
        let mut knots = Vec::new();
        for iv in covering.corridor(j, i)? {
            knots.push((iv.left, iv.eps_left));
            knots.push((iv.right, iv.eps_right));
        }
        let lo = knots
            .iter()
            .map(|&(k, e)| k - 2.0 * e)
            .fold(f64::INFINITY, f64::min);
        let hi = knots
            .iter()
            .map(|&(k, e)| k + 2.0 * e)
            .fold(f64::NEG_INFINITY, f64::max);
        axes.push(SampledAxis::knot_aligned(&knots, lo, hi, target)?);
    }
    Ok(axes)
}
