//! Sampled frequency grids.
//!
//! A [`SampledAxis`] is a sorted point set along one frequency axis. Two
//! flavors exist: plain uniform axes (the export/synthesis carrier), and
//! knot-aligned axes whose points are mirror-symmetric (by index) inside a
//! window around each registered knot. The projection operators only ever
//! read function values at reflections `2κ - ξ` with `ξ` inside the cutoff
//! window of a knot `κ`, so on a knot-aligned axis every such read is an
//! exact index flip and the projection algebra holds at machine precision.
//! On uniform axes, reflections land on nodes when the knot sits on the grid
//! (or half-grid); otherwise cubic interpolation is used.

use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// A symmetric sample window around one knot.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Zone {
    pub knot: f64,
    pub eps: f64,
    /// First point index of the window; the window holds `2w + 1` points at
    /// offsets `m * eps / w`, `m = -w..=w`, so index `start + w` is the knot.
    pub start: usize,
    pub half: usize,
}

impl Zone {
    pub fn len(&self) -> usize {
        2 * self.half + 1
    }

    pub fn mirror(&self, i: usize) -> usize {
        self.start + (self.len() - 1) - (i - self.start)
    }

    pub fn contains_index(&self, i: usize) -> bool {
        i >= self.start && i < self.start + self.len()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampledAxis {
    points: Vec<f64>,
    zones: Vec<Zone>,
    uniform: Option<(f64, f64, f64)>, // (lo, hi, step)
}

impl SampledAxis {
    /// Uniform axis with `count >= 2` points; spacing `(hi-lo)/(count-1)`.
    pub fn uniform(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if count < 2 || !(hi > lo) {
            return Err(Error::InvalidArgument(format!(
                "uniform axis needs count >= 2 and hi > lo, got [{lo}, {hi}] x {count}"
            )));
        }
        let step = (hi - lo) / (count - 1) as f64;
        let points = (0..count)
            .map(|i| {
                if i + 1 == count {
                    hi
                } else {
                    lo + i as f64 * step
                }
            })
            .collect();
        Ok(Self {
            points,
            zones: Vec::new(),
            uniform: Some((lo, hi, step)),
        })
    }

    /// Axis covering `[lo, hi]` with a symmetric window of halfwidth `eps`
    /// around each `(knot, eps)` pair and uniform fill elsewhere. Windows
    /// must not overlap (touching is fine); the target spacing bounds the
    /// node distance inside windows and fill segments alike.
    pub fn knot_aligned(knots: &[(f64, f64)], lo: f64, hi: f64, target: f64) -> Result<Self> {
        if !(hi > lo) || !(target > 0.0) {
            return Err(Error::InvalidArgument(
                "bad knot_aligned axis bounds".into(),
            ));
        }
        let mut ks: Vec<(f64, f64)> = knots.to_vec();
        ks.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        ks.dedup_by(|a, b| {
            if (a.0 - b.0).abs() <= 1e-9 * (1.0 + b.0.abs()) {
                b.1 = b.1.max(a.1);
                true
            } else {
                false
            }
        });
        for w in ks.windows(2) {
            if w[0].0 + w[0].1 > w[1].0 - w[1].1 + 1e-12 * (1.0 + w[1].0.abs()) {
                return Err(Error::InvalidArgument(format!(
                    "knot windows overlap: {} + {} vs {} - {}",
                    w[0].0, w[0].1, w[1].0, w[1].1
                )));
            }
        }
        for &(k, e) in &ks {
            if !(e > 0.0) || k - e < lo - 1e-12 || k + e > hi + 1e-12 {
                return Err(Error::InvalidArgument(format!(
                    "knot window [{} ± {}] escapes the axis range [{lo}, {hi}]",
                    k, e
                )));
            }
        }

        let mut points: Vec<f64> = Vec::new();
        let mut zones: Vec<Zone> = Vec::new();
        let fill = |a: f64, b: f64, points: &mut Vec<f64>| {
            // Interior fill points, endpoints excluded.
            if b - a <= 1e-14 {
                return;
            }
            let n = ((b - a) / target).ceil().max(1.0) as usize;
            let h = (b - a) / n as f64;
            for m in 1..n {
                points.push(a + m as f64 * h);
            }
        };
        let mut cursor = lo;
        points.push(lo);
        for &(k, e) in &ks {
            fill(cursor, k - e, &mut points);
            let half = ((e / target).ceil() as usize).max(4);
            let step = e / half as f64;
            let start = points.len();
            // Window endpoints are shared with the fill boundaries; keep one
            // copy: drop a previously pushed point equal to k - e.
            if let Some(&last) = points.last() {
                if (last - (k - e)).abs() <= 1e-12 * (1.0 + last.abs()) {
                    points.pop();
                }
            }
            let start = start.min(points.len());
            for m in -(half as i64)..=(half as i64) {
                points.push(k + m as f64 * step);
            }
            zones.push(Zone {
                knot: k,
                eps: e,
                start,
                half,
            });
            cursor = k + e;
        }
        fill(cursor, hi, &mut points);
        if (points.last().copied().unwrap_or(lo) - hi).abs() > 1e-12 * (1.0 + hi.abs()) {
            points.push(hi);
        }
        Ok(Self {
            points,
            zones,
            uniform: None,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn lo(&self) -> f64 {
        self.points[0]
    }

    pub fn hi(&self) -> f64 {
        *self.points.last().unwrap()
    }

    pub fn is_uniform(&self) -> bool {
        self.uniform.is_some()
    }

    /// (lo, hi, step) of a uniform axis.
    pub fn uniform_meta(&self) -> Option<(f64, f64, f64)> {
        self.uniform
    }

    /// The registered window at `knot` with halfwidth at least `eps`.
    pub fn zone_for(&self, knot: f64, eps: f64) -> Option<&Zone> {
        let tol = 1e-9 * (1.0 + knot.abs());
        self.zones
            .iter()
            .find(|z| (z.knot - knot).abs() <= tol && z.eps >= eps * (1.0 - 1e-9))
    }

    /// Offset of point `i` from the knot of the zone containing it, computed
    /// from the window construction (exactly antisymmetric under mirror).
    pub fn zone_offset(&self, z: &Zone, i: usize) -> f64 {
        let m = i as i64 - (z.start + z.half) as i64;
        m as f64 * (z.eps / z.half as f64)
    }

    /// Cubic (4-point Lagrange) interpolation weights at `x`.
    pub fn interp_weights(&self, x: f64) -> Option<([usize; 4], [f64; 4])> {
        let n = self.points.len();
        if n < 4 || x < self.lo() - 1e-12 || x > self.hi() + 1e-12 {
            return None;
        }
        let seg = self.points.partition_point(|&p| p <= x).saturating_sub(1);
        let i0 = seg.saturating_sub(1).min(n - 4);
        let xs = [
            self.points[i0],
            self.points[i0 + 1],
            self.points[i0 + 2],
            self.points[i0 + 3],
        ];
        let mut w = [0.0; 4];
        for a in 0..4 {
            let mut num = 1.0;
            let mut den = 1.0;
            for b in 0..4 {
                if a != b {
                    num *= x - xs[b];
                    den *= xs[a] - xs[b];
                }
            }
            w[a] = num / den;
        }
        Some(([i0, i0 + 1, i0 + 2, i0 + 3], w))
    }

    pub fn covers(&self, lo: f64, hi: f64) -> bool {
        self.lo() <= lo + 1e-12 * (1.0 + lo.abs()) && self.hi() >= hi - 1e-12 * (1.0 + hi.abs())
    }
}

/// Samples of a frequency-domain function on a tensor grid of axes.
/// Values are row-major with the last axis fastest.
#[derive(Debug, Clone)]
pub struct GridFunction {
    axes: Vec<SampledAxis>,
    values: Vec<Complex64>,
}

impl GridFunction {
    pub fn zeros(axes: Vec<SampledAxis>) -> Self {
        let total: usize = axes.iter().map(|a| a.len()).product();
        Self {
            axes,
            values: vec![Complex64::ZERO; total],
        }
    }

    pub fn from_fn(axes: Vec<SampledAxis>, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let mut g = Self::zeros(axes);
        let d = g.axes.len();
        let mut idx = vec![0usize; d];
        let mut xi = vec![0.0f64; d];
        for flat in 0..g.values.len() {
            for t in 0..d {
                xi[t] = g.axes[t].points()[idx[t]];
            }
            g.values[flat] = f(&xi);
            let mut c = d;
            while c > 0 {
                idx[c - 1] += 1;
                if idx[c - 1] < g.axes[c - 1].len() {
                    break;
                }
                idx[c - 1] = 0;
                c -= 1;
            }
        }
        g
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[SampledAxis] {
        &self.axes
    }

    pub fn axis(&self, dim: usize) -> &SampledAxis {
        &self.axes[dim]
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.len()).collect()
    }

    /// `(start, stride)` pairs enumerating all 1-d lines along `dim`.
    pub fn lines(&self, dim: usize) -> Vec<(usize, usize)> {
        let sizes = self.sizes();
        let stride: usize = sizes[dim + 1..].iter().product();
        let block = stride * sizes[dim];
        let blocks = self.values.len() / block;
        let mut out = Vec::with_capacity(blocks * stride);
        for b in 0..blocks {
            for s in 0..stride {
                out.push((b * block + s, stride));
            }
        }
        out
    }

    pub fn l2_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &GridFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn axpy(&mut self, c: Complex64, other: &GridFunction) {
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += c * b;
        }
    }

    pub fn scale(&mut self, c: Complex64) {
        for v in &mut self.values {
            *v *= c;
        }
    }
}
