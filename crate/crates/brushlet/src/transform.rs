//! Analysis operator `C_W` (coefficients by frequency-domain quadrature) and
//! synthesis operator `R_W` (coefficient-weighted sums back onto a grid).
//!
//! Everything works on the frequency side: the brushlets are compactly
//! supported there, so truncation in the tile index is exact and only the
//! cosine index needs a tail policy. Inner products use per-dimension
//! Gauss-Legendre panels split at the bell transition edges, so every
//! integrand piece is smooth. Separable inputs (products of univariate
//! factors) factor the tensor quadrature into one pass per dimension.

use crate::brushlet1d::{Bell, RampProfile};
use crate::covering::Covering;
use crate::error::{Error, Result};
use crate::grid::{GridFunction, SampledAxis};
use crate::quad;
use crate::tensor_basis::{bells_for_rect, enumerate_active, BrushIndex};
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

/// A frequency-domain test function.
pub trait FreqFn: Sync {
    fn dim(&self) -> usize;
    fn eval(&self, xi: &[f64]) -> Complex64;
    /// Per-dimension factor of a product function, if separable.
    fn factor(&self, _dim: usize, _xi: f64) -> Option<Complex64> {
        None
    }
    fn is_separable(&self) -> bool {
        false
    }
    /// Points where smoothness degrades, per dimension.
    fn breakpoints(&self, _dim: usize) -> Vec<f64> {
        Vec::new()
    }
    /// Extra oscillation rate (radians per frequency unit), per dimension.
    fn osc_rate(&self, _dim: usize) -> f64 {
        0.0
    }
    /// Exact squared L2 norm over the full space, when known.
    fn energy(&self) -> Option<f64> {
        None
    }
}

/// Centered separable Gaussian `Π_i a^{1/d} exp(-ξ_i² / (2 σ_i²))`.
#[derive(Debug, Clone)]
pub struct GaussianFreq {
    pub sigma: Vec<f64>,
    pub amplitude: f64,
}

impl GaussianFreq {
    pub fn new(sigma: Vec<f64>) -> Self {
        Self {
            sigma,
            amplitude: 1.0,
        }
    }
}

impl FreqFn for GaussianFreq {
    fn dim(&self) -> usize {
        self.sigma.len()
    }

    fn eval(&self, xi: &[f64]) -> Complex64 {
        let mut v = self.amplitude;
        for (x, s) in xi.iter().zip(&self.sigma) {
            v *= (-x * x / (2.0 * s * s)).exp();
        }
        Complex64::new(v, 0.0)
    }

    fn factor(&self, dim: usize, xi: f64) -> Option<Complex64> {
        let s = self.sigma[dim];
        let a = self.amplitude.powf(1.0 / self.dim() as f64);
        Some(Complex64::new(a * (-xi * xi / (2.0 * s * s)).exp(), 0.0))
    }

    fn is_separable(&self) -> bool {
        true
    }

    fn energy(&self) -> Option<f64> {
        let mut e = self.amplitude * self.amplitude;
        for s in &self.sigma {
            e *= s * PI.sqrt();
        }
        Some(e)
    }
}

/// One tensor brushlet `ŵ_{R,n}` as an analytic test function.
pub struct BasisElementFn {
    bells: Vec<Bell>,
    n: Vec<u32>,
}

impl BasisElementFn {
    pub fn new(covering: &Covering, idx: &BrushIndex, ramp: &RampProfile) -> Result<Self> {
        let rect = covering.rect(idx.j, idx.k)?;
        Ok(Self {
            bells: bells_for_rect(rect, ramp)?,
            n: idx.n.clone(),
        })
    }
}

impl FreqFn for BasisElementFn {
    fn dim(&self) -> usize {
        self.bells.len()
    }

    fn eval(&self, xi: &[f64]) -> Complex64 {
        let mut v = 1.0;
        for (i, bell) in self.bells.iter().enumerate() {
            v *= crate::brushlet1d::brushlet_freq_eval(bell, self.n[i], xi[i]);
        }
        Complex64::new(v, 0.0)
    }

    fn factor(&self, dim: usize, xi: f64) -> Option<Complex64> {
        Some(Complex64::new(
            crate::brushlet1d::brushlet_freq_eval(&self.bells[dim], self.n[dim], xi),
            0.0,
        ))
    }

    fn is_separable(&self) -> bool {
        true
    }

    fn breakpoints(&self, dim: usize) -> Vec<f64> {
        self.bells[dim].breakpoints().to_vec()
    }

    fn osc_rate(&self, dim: usize) -> f64 {
        PI * (self.n[dim] as f64 + 0.5) / self.bells[dim].len()
    }

    fn energy(&self) -> Option<f64> {
        Some(1.0)
    }
}

/// Linear combination of test functions (generic, not separable).
pub struct LinCombFn {
    pub terms: Vec<(Complex64, Box<dyn FreqFn>)>,
}

impl FreqFn for LinCombFn {
    fn dim(&self) -> usize {
        self.terms[0].1.dim()
    }

    fn eval(&self, xi: &[f64]) -> Complex64 {
        self.terms.iter().map(|(c, f)| c * f.eval(xi)).sum()
    }

    fn breakpoints(&self, dim: usize) -> Vec<f64> {
        let mut b = Vec::new();
        for (_, f) in &self.terms {
            b.extend(f.breakpoints(dim));
        }
        b
    }

    fn osc_rate(&self, dim: usize) -> f64 {
        self.terms
            .iter()
            .map(|(_, f)| f.osc_rate(dim))
            .fold(0.0, f64::max)
    }
}

/// Grid samples used as a function via cubic tensor interpolation.
pub struct GridInterpFn<'a> {
    grid: &'a GridFunction,
}

impl<'a> GridInterpFn<'a> {
    pub fn new(grid: &'a GridFunction) -> Self {
        Self { grid }
    }
}

impl FreqFn for GridInterpFn<'_> {
    fn dim(&self) -> usize {
        self.grid.dim()
    }

    fn eval(&self, xi: &[f64]) -> Complex64 {
        let d = self.grid.dim();
        let mut stencils = Vec::with_capacity(d);
        for i in 0..d {
            match self.grid.axis(i).interp_weights(xi[i]) {
                Some(sw) => stencils.push(sw),
                None => return Complex64::ZERO,
            }
        }
        let sizes = self.grid.sizes();
        let mut acc = Complex64::ZERO;
        let mut pick = vec![0usize; d];
        loop {
            let mut w = 1.0;
            let mut flat = 0usize;
            for i in 0..d {
                let (idx, ws) = &stencils[i];
                w *= ws[pick[i]];
                flat = flat * sizes[i] + idx[pick[i]];
            }
            acc += w * self.grid.values()[flat];
            let mut c = d;
            while c > 0 {
                pick[c - 1] += 1;
                if pick[c - 1] < 4 {
                    break;
                }
                pick[c - 1] = 0;
                c -= 1;
            }
            if c == 0 {
                break;
            }
        }
        acc
    }
}

/// Finite coefficient set: the image of the analysis operator.
#[derive(Debug, Clone)]
pub struct CoefficientSet {
    entries: Vec<(BrushIndex, Complex64)>,
    fingerprint: String,
}

impl CoefficientSet {
    /// Entries must be unique; they are kept sorted by index.
    pub fn new(covering: &Covering, mut entries: Vec<(BrushIndex, Complex64)>) -> Result<Self> {
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        for w in entries.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidArgument(format!(
                    "duplicate coefficient index {:?}",
                    w[0].0
                )));
            }
        }
        Ok(Self {
            entries,
            fingerprint: covering.spec().fingerprint(),
        })
    }

    pub fn entries(&self) -> &[(BrushIndex, Complex64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn get(&self, idx: &BrushIndex) -> Option<Complex64> {
        self.entries
            .binary_search_by(|(i, _)| i.cmp(idx))
            .ok()
            .map(|p| self.entries[p].1)
    }

    /// `Σ |c|²`.
    pub fn energy(&self) -> f64 {
        self.entries.iter().map(|(_, c)| c.norm_sqr()).sum()
    }

    pub fn add(&self, other: &CoefficientSet) -> Result<CoefficientSet> {
        if self.fingerprint != other.fingerprint {
            return Err(Error::InvalidArgument(
                "coefficient sets belong to different coverings".into(),
            ));
        }
        let mut merged = self.entries.clone();
        for (idx, c) in &other.entries {
            match merged.binary_search_by(|(i, _)| i.cmp(idx)) {
                Ok(p) => merged[p].1 += c,
                Err(p) => merged.insert(p, (idx.clone(), *c)),
            }
        }
        Ok(CoefficientSet {
            entries: merged,
            fingerprint: self.fingerprint.clone(),
        })
    }

    pub fn max_abs_diff(&self, other: &CoefficientSet) -> f64 {
        let mut worst = 0.0_f64;
        for (idx, c) in &self.entries {
            let o = other.get(idx).unwrap_or(Complex64::ZERO);
            worst = worst.max((c - o).norm());
        }
        for (idx, c) in &other.entries {
            if self.get(idx).is_none() {
                worst = worst.max(c.norm());
            }
        }
        worst
    }
}

/// Per-dimension quadrature nodes resolving the bell transitions (at least
/// `oversample` points per cutoff length) and the cosine oscillation.
fn rect_dim_nodes(
    bell: &Bell,
    extra_breaks: &[f64],
    extra_rate: f64,
    n_max: u32,
    oversample: usize,
) -> Vec<(f64, f64)> {
    let (lo, hi) = bell.support();
    let mut breaks = bell.breakpoints().to_vec();
    breaks.extend_from_slice(extra_breaks);
    let order = oversample.clamp(6, 48);
    let rate = PI * (n_max as f64 + 0.5) / bell.len() + extra_rate;
    let lambda = if rate > 0.0 {
        2.0 * PI / rate
    } else {
        f64::INFINITY
    };
    let cut = bell.eps_left().min(bell.eps_right());
    let piece = cut.min(lambda * order as f64 / 8.0);
    let mut nodes = Vec::new();
    for (a, b) in quad::split_at_breakpoints(lo, hi, &breaks) {
        nodes.extend(quad::panel_nodes(a, b, piece, order));
    }
    nodes
}

/// Analysis operator: coefficients `⟨f, w_{R,n}⟩ = ⟨f̂, ŵ_{R,n}⟩` for every
/// active index, by per-tile tensor quadrature over the bell support.
///
/// `bound` truncates the tile set to those meeting `[-bound, bound]^d`,
/// `n_max` caps each cosine index, and `oversample >= 4` sets the number of
/// quadrature points per cutoff length.
pub fn analyze(
    f: &dyn FreqFn,
    covering: &Covering,
    ramp: &RampProfile,
    bound: f64,
    n_max: u32,
    oversample: usize,
) -> Result<CoefficientSet> {
    if oversample < 4 {
        return Err(Error::InvalidArgument(
            "analysis oversampling must be at least 4".into(),
        ));
    }
    if f.dim() != covering.spec().dim() {
        return Err(Error::InvalidArgument(
            "function/covering dimension mismatch".into(),
        ));
    }
    let active = enumerate_active(covering, bound, n_max)?;
    let d = covering.spec().dim();

    // Group by tile; indices arrive sorted (j, k, then n).
    let mut groups: Vec<(u32, usize, usize, usize)> = Vec::new();
    let mut begin = 0usize;
    while begin < active.len() {
        let (j, k) = (active[begin].j, active[begin].k);
        let mut end = begin;
        while end < active.len() && active[end].j == j && active[end].k == k {
            end += 1;
        }
        groups.push((j, k, begin, end));
        begin = end;
    }

    let results: Result<Vec<Vec<(BrushIndex, Complex64)>>> = groups
        .par_iter()
        .map(|&(j, k, begin, end)| {
            let rect = covering.rect(j, k)?;
            let bells = bells_for_rect(rect, ramp)?;
            let slice = &active[begin..end];
            if f.is_separable() {
                analyze_tile_separable(f, &bells, slice, n_max, oversample)
            } else {
                analyze_tile_generic(f, &bells, slice, d, n_max, oversample, j, k)
            }
        })
        .collect();

    let mut entries = Vec::with_capacity(active.len());
    for group in results? {
        entries.extend(group);
    }
    CoefficientSet::new(covering, entries)
}

/// Separable input: one quadrature pass per dimension, coefficients are
/// products of the per-dimension integrals.
fn analyze_tile_separable(
    f: &dyn FreqFn,
    bells: &[Bell],
    slice: &[BrushIndex],
    n_max: u32,
    oversample: usize,
) -> Result<Vec<(BrushIndex, Complex64)>> {
    let mut per_dim: Vec<Vec<Complex64>> = Vec::with_capacity(bells.len());
    for (i, bell) in bells.iter().enumerate() {
        let nodes = rect_dim_nodes(bell, &f.breakpoints(i), f.osc_rate(i), n_max, oversample);
        let norm = (2.0 / bell.len()).sqrt();
        let mut vals = vec![Complex64::ZERO; n_max as usize + 1];
        for &(x, w) in &nodes {
            let b = bell.eval(x);
            if b == 0.0 {
                continue;
            }
            let fv = f.factor(i, x).expect("separable function provides factors");
            let base = w * b * norm;
            let theta = PI * (x - bell.alpha()) / bell.len();
            for (n, v) in vals.iter_mut().enumerate() {
                *v += fv * (base * ((n as f64 + 0.5) * theta).cos());
            }
        }
        per_dim.push(vals);
    }
    Ok(slice
        .iter()
        .map(|idx| {
            let mut c = Complex64::ONE;
            for (i, &ni) in idx.n.iter().enumerate() {
                c *= per_dim[i][ni as usize];
            }
            (idx.clone(), c)
        })
        .collect())
}

/// Generic input: dense tensor quadrature contracted one axis at a time.
#[allow(clippy::too_many_arguments)]
fn analyze_tile_generic(
    f: &dyn FreqFn,
    bells: &[Bell],
    slice: &[BrushIndex],
    d: usize,
    n_max: u32,
    oversample: usize,
    j: u32,
    k: usize,
) -> Result<Vec<(BrushIndex, Complex64)>> {
    let mut node_lists = Vec::with_capacity(d);
    let mut total: usize = 1;
    for (i, bell) in bells.iter().enumerate() {
        let nodes = rect_dim_nodes(bell, &f.breakpoints(i), f.osc_rate(i), n_max, oversample);
        total = total.saturating_mul(nodes.len());
        node_lists.push(nodes);
    }
    if total > 20_000_000 {
        return Err(Error::QuadratureBudget(format!(
            "tile ({j},{k}) needs {total} tensor quadrature nodes"
        )));
    }
    let n_count = n_max as usize + 1;
    // Weight matrices W_i[n][node] = w * bell * norm * cos.
    let weights: Vec<Vec<f64>> = bells
        .iter()
        .zip(&node_lists)
        .map(|(bell, nodes)| {
            let norm = (2.0 / bell.len()).sqrt();
            let mut m = vec![0.0; n_count * nodes.len()];
            for (t, &(x, w)) in nodes.iter().enumerate() {
                let b = bell.eval(x);
                let theta = PI * (x - bell.alpha()) / bell.len();
                for n in 0..n_count {
                    m[n * nodes.len() + t] = w * b * norm * ((n as f64 + 0.5) * theta).cos();
                }
            }
            m
        })
        .collect();

    // f on the tensor node grid, row-major, last dimension fastest.
    let mut tensor = vec![Complex64::ZERO; total];
    let mut pick = vec![0usize; d];
    let mut x = vec![0.0; d];
    for v in tensor.iter_mut() {
        for i in 0..d {
            x[i] = node_lists[i][pick[i]].0;
        }
        *v = f.eval(&x);
        let mut c = d;
        while c > 0 {
            pick[c - 1] += 1;
            if pick[c - 1] < node_lists[c - 1].len() {
                break;
            }
            pick[c - 1] = 0;
            c -= 1;
        }
    }

    // Contract the leading axis each round, appending the produced n axis at
    // the back: (m_0, ..., m_{d-1}) -> (m_1, ..., m_{d-1}, n_0) -> ... so the
    // final layout is (n_0, ..., n_{d-1}) row-major.
    for dim in 0..d {
        let nodes = node_lists[dim].len();
        let rest = tensor.len() / nodes;
        let w = &weights[dim];
        let mut next = vec![Complex64::ZERO; rest * n_count];
        for n in 0..n_count {
            let row = &w[n * nodes..(n + 1) * nodes];
            for (t, &wv) in row.iter().enumerate() {
                if wv == 0.0 {
                    continue;
                }
                let src = &tensor[t * rest..(t + 1) * rest];
                for r in 0..rest {
                    next[r * n_count + n] += src[r] * wv;
                }
            }
        }
        tensor = next;
    }
    let n_strides: Vec<usize> = (0..d).map(|i| n_count.pow((d - 1 - i) as u32)).collect();
    Ok(slice
        .iter()
        .map(|idx| {
            let flat: usize = idx
                .n
                .iter()
                .zip(&n_strides)
                .map(|(&ni, &s)| ni as usize * s)
                .sum();
            (idx.clone(), tensor[flat])
        })
        .collect())
}

/// Analysis of sampled grid data through cubic interpolation.
pub fn analyze_grid(
    grid: &GridFunction,
    covering: &Covering,
    ramp: &RampProfile,
    bound: f64,
    n_max: u32,
    oversample: usize,
) -> Result<CoefficientSet> {
    for ax in grid.axes() {
        if !ax.covers(-bound, bound) {
            return Err(Error::InsufficientCoverage(format!(
                "grid axis [{}, {}] does not cover [-{bound}, {bound}]",
                ax.lo(),
                ax.hi()
            )));
        }
    }
    let f = GridInterpFn::new(grid);
    analyze(&f, covering, ramp, bound, n_max, oversample)
}

/// Synthesis operator: `Σ c_{R,n} ŵ_{R,n}(ξ)` at every node of the target
/// axes. Per tile, the cosine sums run through the Clenshaw recurrence for
/// `Σ_n c_n cos((n+1/2)θ)` along each dimension.
pub fn synthesize(
    coeffs: &CoefficientSet,
    covering: &Covering,
    ramp: &RampProfile,
    axes: Vec<SampledAxis>,
) -> Result<GridFunction> {
    let d = covering.spec().dim();
    if axes.len() != d {
        return Err(Error::InvalidArgument(
            "axis/covering dimension mismatch".into(),
        ));
    }
    let mut out = GridFunction::zeros(axes);
    let sizes = out.sizes();

    let entries = coeffs.entries();
    let mut begin = 0usize;
    while begin < entries.len() {
        let (j, k) = (entries[begin].0.j, entries[begin].0.k);
        let mut end = begin;
        let mut n_hi = 0u32;
        while end < entries.len() && entries[end].0.j == j && entries[end].0.k == k {
            n_hi = n_hi.max(entries[end].0.n.iter().copied().max().unwrap_or(0));
            end += 1;
        }
        let rect = covering.rect(j, k)?;
        let bells = bells_for_rect(rect, ramp)?;
        let n_count = n_hi as usize + 1;

        // Dense coefficient tensor over (n_0, ..., n_{d-1}).
        let mut tensor = vec![Complex64::ZERO; n_count.pow(d as u32)];
        for (idx, c) in &entries[begin..end] {
            let mut flat = 0usize;
            for &ni in &idx.n {
                flat = flat * n_count + ni as usize;
            }
            tensor[flat] = *c;
        }

        // Support nodes per dimension: (axis index, theta, bell * norm).
        let mut support: Vec<Vec<(usize, f64, f64)>> = Vec::with_capacity(d);
        for (i, bell) in bells.iter().enumerate() {
            let (lo, hi) = bell.support();
            let pts = out.axis(i).points();
            let mut list = Vec::new();
            for (t, &x) in pts.iter().enumerate() {
                if x > lo && x < hi {
                    let b = bell.eval(x);
                    if b != 0.0 {
                        list.push((
                            t,
                            PI * (x - bell.alpha()) / bell.len(),
                            b * (2.0 / bell.len()).sqrt(),
                        ));
                    }
                }
            }
            support.push(list);
        }
        if support.iter().any(|s| s.is_empty()) {
            begin = end;
            continue;
        }

        // Clenshaw-contract dimension 0 first: (n_0, rest) -> (x_0, rest).
        let mut lead = 1usize;
        for i in 0..d {
            let rest = tensor.len() / (lead * n_count);
            let nodes = &support[i];
            let mut next = vec![Complex64::ZERO; lead * nodes.len() * rest];
            for l in 0..lead {
                let src = &tensor[l * n_count * rest..(l + 1) * n_count * rest];
                for (xi, &(_, theta, bw)) in nodes.iter().enumerate() {
                    let two_cos = 2.0 * theta.cos();
                    let half = (0.5 * theta).cos() * bw;
                    let dst_base = (l * nodes.len() + xi) * rest;
                    for r in 0..rest {
                        let mut b1 = Complex64::ZERO;
                        let mut b2 = Complex64::ZERO;
                        for kk in (0..n_count).rev() {
                            let b0 = src[kk * rest + r] + two_cos * b1 - b2;
                            b2 = b1;
                            b1 = b0;
                        }
                        next[dst_base + r] = (b1 - b2) * half;
                    }
                }
            }
            tensor = next;
            lead *= nodes.len();
        }

        // Scatter into the output grid.
        let mut pick = vec![0usize; d];
        for v in tensor.iter() {
            let mut flat = 0usize;
            for i in 0..d {
                flat = flat * sizes[i] + support[i][pick[i]].0;
            }
            out.values_mut()[flat] += v;
            let mut c = d;
            while c > 0 {
                pick[c - 1] += 1;
                if pick[c - 1] < support[c - 1].len() {
                    break;
                }
                pick[c - 1] = 0;
                c -= 1;
            }
        }
        begin = end;
    }
    Ok(out)
}

/// Energy bookkeeping of one analysis run.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ParsevalReport {
    pub energy_f: f64,
    pub energy_coeffs: f64,
    pub ratio: f64,
}

/// Compares `Σ |c|²` against `‖f̂‖²`. The ratio tends to 1 as the truncation
/// grows and, being a Bessel sum for an orthonormal system, never exceeds 1
/// beyond quadrature tolerance. A zero function reports ratio 1 by
/// convention.
pub fn parseval_report(
    f: &dyn FreqFn,
    coeffs: &CoefficientSet,
    bound: f64,
    oversample: usize,
) -> ParsevalReport {
    let energy_f = f
        .energy()
        .unwrap_or_else(|| quad_energy(f, bound, oversample));
    let energy_coeffs = coeffs.energy();
    let ratio = if energy_f == 0.0 && energy_coeffs == 0.0 {
        1.0
    } else {
        energy_coeffs / energy_f
    };
    ParsevalReport {
        energy_f,
        energy_coeffs,
        ratio,
    }
}

/// `‖f̂‖²` over `[-bound, bound]^d` by quadrature.
fn quad_energy(f: &dyn FreqFn, bound: f64, oversample: usize) -> f64 {
    let d = f.dim();
    if f.is_separable() {
        let mut e = 1.0;
        for i in 0..d {
            let mut acc = 0.0;
            for (a, b) in quad::split_at_breakpoints(-bound, bound, &f.breakpoints(i)) {
                let rate = f.osc_rate(i).max(1.0);
                let piece = (2.0 * PI / rate) * oversample as f64 / 8.0;
                for (x, w) in quad::panel_nodes(a, b, piece, oversample.clamp(6, 48)) {
                    acc += w * f.factor(i, x).unwrap().norm_sqr();
                }
            }
            e *= acc;
        }
        e
    } else {
        // Midpoint tensor rule; adequate for smooth test inputs.
        let n = 128usize;
        let h = 2.0 * bound / n as f64;
        let mut acc = 0.0;
        let mut pick = vec![0usize; d];
        let mut x = vec![0.0; d];
        loop {
            for i in 0..d {
                x[i] = -bound + (pick[i] as f64 + 0.5) * h;
            }
            acc += f.eval(&x).norm_sqr();
            let mut c = d;
            while c > 0 {
                pick[c - 1] += 1;
                if pick[c - 1] < n {
                    break;
                }
                pick[c - 1] = 0;
                c -= 1;
            }
            if c == 0 {
                break;
            }
        }
        acc * h.powi(d as i32)
    }
}

const GRID_MAGIC: &[u8; 8] = b"BRGRID01";

/// Binary grid export: magic, u32 header length, JSON header
/// `{bounds, counts}`, then interleaved re/im little-endian f64 samples.
/// Uniform axes only.
pub fn grid_to_binary(grid: &GridFunction) -> Result<Vec<u8>> {
    let mut bounds = Vec::new();
    let mut counts = Vec::new();
    for ax in grid.axes() {
        let (lo, hi, _) = ax.uniform_meta().ok_or_else(|| {
            Error::InvalidArgument("binary grid export requires uniform axes".into())
        })?;
        bounds.push([lo, hi]);
        counts.push(ax.len());
    }
    let header = serde_json::to_vec(&serde_json::json!({
        "bounds": bounds,
        "counts": counts,
    }))?;
    let mut out = Vec::with_capacity(16 + header.len() + 16 * grid.values().len());
    out.extend_from_slice(GRID_MAGIC);
    out.extend_from_slice(&(header.len() as u32).to_le_bytes());
    out.extend_from_slice(&header);
    for v in grid.values() {
        out.extend_from_slice(&v.re.to_le_bytes());
        out.extend_from_slice(&v.im.to_le_bytes());
    }
    Ok(out)
}

pub fn grid_from_binary(bytes: &[u8]) -> Result<GridFunction> {
    if bytes.len() < 12 || &bytes[..8] != GRID_MAGIC {
        return Err(Error::InvalidArgument("not a grid file".into()));
    }
    let hlen = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let header: serde_json::Value = serde_json::from_slice(&bytes[12..12 + hlen])?;
    let bounds = header["bounds"]
        .as_array()
        .ok_or_else(|| Error::InvalidArgument("bad bounds".into()))?;
    let counts = header["counts"]
        .as_array()
        .ok_or_else(|| Error::InvalidArgument("bad counts".into()))?;
    let mut axes = Vec::new();
    for (b, c) in bounds.iter().zip(counts) {
        let lo = b[0].as_f64().unwrap();
        let hi = b[1].as_f64().unwrap();
        let n = c.as_u64().unwrap() as usize;
        axes.push(SampledAxis::uniform(lo, hi, n)?);
    }
    let mut grid = GridFunction::zeros(axes);
    let data = &bytes[12 + hlen..];
    let expected = grid.values().len() * 16;
    if data.len() != expected {
        return Err(Error::InvalidArgument(format!(
            "grid payload holds {} bytes, expected {expected}",
            data.len()
        )));
    }
    for (t, v) in grid.values_mut().iter_mut().enumerate() {
        let re = f64::from_le_bytes(data[16 * t..16 * t + 8].try_into().unwrap());
        let im = f64::from_le_bytes(data[16 * t + 8..16 * t + 16].try_into().unwrap());
        *v = Complex64::new(re, im);
    }
    Ok(grid)
}

/// JSON export: `{spec: fingerprint, entries: [{j, k, n, re, im}]}`.
pub fn coefficients_to_json(coeffs: &CoefficientSet) -> serde_json::Value {
    let entries: Vec<serde_json::Value> = coeffs
        .entries()
        .iter()
        .map(|(idx, c)| {
            serde_json::json!({
                "j": idx.j, "k": idx.k, "n": idx.n, "re": c.re, "im": c.im,
            })
        })
        .collect();
    serde_json::json!({
        "spec": coeffs.fingerprint(),
        "entries": entries,
    })
}

pub fn coefficients_from_json(
    covering: &Covering,
    value: &serde_json::Value,
) -> Result<CoefficientSet> {
    let spec = value["spec"]
        .as_str()
        .ok_or_else(|| Error::InvalidArgument("missing spec fingerprint".into()))?;
    if spec != covering.spec().fingerprint() {
        return Err(Error::InvalidArgument(
            "coefficient file belongs to a different covering".into(),
        ));
    }
    let entries = value["entries"]
        .as_array()
        .ok_or_else(|| Error::InvalidArgument("missing entries".into()))?;
    let mut out = Vec::with_capacity(entries.len());
    for e in entries {
        let j = e["j"]
            .as_u64()
            .ok_or_else(|| Error::InvalidArgument("bad j".into()))? as u32;
        let k = e["k"]
            .as_u64()
            .ok_or_else(|| Error::InvalidArgument("bad k".into()))? as usize;
        let n: Vec<u32> = e["n"]
            .as_array()
            .ok_or_else(|| Error::InvalidArgument("bad n".into()))?
            .iter()
            .map(|v| v.as_u64().unwrap_or(0) as u32)
            .collect();
        let re = e["re"].as_f64().unwrap_or(0.0);
        let im = e["im"].as_f64().unwrap_or(0.0);
        out.push((BrushIndex::new(j, k, n), Complex64::new(re, im)));
    }
    CoefficientSet::new(covering, out)
}
