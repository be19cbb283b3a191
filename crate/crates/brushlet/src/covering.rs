//! Explicit anisotropic α-covering of the frequency space.
//!
//! The frequency plane is carved into corridors
//! `K_j = { ξ : j^β <= |ξ|_{a,∞} < (j+1)^β }` and each corridor is tiled by
//! rectangles built from per-dimension interval subdivisions: the outer ring
//! `[-(j+1)^{a_i β}, (j+1)^{a_i β})` minus the inner box splits into
//! `⌈j^{a_i - 1}⌉` equal pieces per side, and the inner box
//! `[-j^{a_i β}, j^{a_i β})` into `⌈j^{a_i}⌉` equal pieces. Layer `j` keeps
//! every product rectangle except the all-inner ones, which belong to lower
//! layers. Every knot carries a cutoff radius, shared exactly by the two
//! intervals meeting there, so bell windows built later are compatible by
//! construction.

use crate::anisotropy::{bracket, quasi_norm, quasi_norm_inf, Anisotropy};
use crate::error::{Error, Result};
use rand::RngExt;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

/// Parameters of one α-covering.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoveringSpec {
    alpha: f64,
    beta: f64,
    aniso: Anisotropy,
    /// Per-dimension cutoff fraction c_i ∈ (0, 1/2).
    cutoff_fracs: Vec<f64>,
    /// Inflation constant for the expanded covering, > max(1, c6).
    c7: f64,
}

impl CoveringSpec {
    /// Covering with the default admissible cutoff fractions.
    ///
    /// The default is `c_i = min(0.49, c_{i,1} / (2 (1 + 2^{a_i (β-1)})))`.
    /// With cutoffs `c_i j^{a_i(β-1)}` at inner knots and
    /// `c_i (j+1)^{a_i(β-1)}` at the extremes, the worst interval has
    /// `ε + ε' <= c_i (1 + 2^{a_i(β-1)}) j^{a_i(β-1)} <= |I| / 2`,
    /// so the cutoff conditions hold with a factor-2 margin for every layer.
    pub fn new(alpha: f64, aniso: Anisotropy) -> Result<Self> {
        let beta = Self::beta_of(alpha)?;
        let cutoffs = aniso
            .exponents()
            .iter()
            .map(|&ai| {
                let ci1 = (0.5_f64).min(ai * beta / 2.0);
                (0.49_f64).min(ci1 / (2.0 * (1.0 + (2.0_f64).powf(ai * (beta - 1.0)))))
            })
            .collect();
        Self::with_cutoffs(alpha, aniso, cutoffs)
    }

    /// Covering with explicit cutoff fractions, validated for admissibility.
    pub fn with_cutoffs(alpha: f64, aniso: Anisotropy, cutoff_fracs: Vec<f64>) -> Result<Self> {
        let beta = Self::beta_of(alpha)?;
        if cutoff_fracs.len() != aniso.dim() {
            return Err(Error::InvalidCovering(format!(
                "expected {} cutoff fractions, got {}",
                aniso.dim(),
                cutoff_fracs.len()
            )));
        }
        for (i, (&ci, &ai)) in cutoff_fracs.iter().zip(aniso.exponents()).enumerate() {
            if !(ci > 0.0 && ci < 0.5) {
                return Err(Error::InvalidCovering(format!(
                    "cutoff c[{i}] = {ci} outside (0, 1/2)"
                )));
            }
            let ci1 = (0.5_f64).min(ai * beta / 2.0);
            let bound = ci1 / (1.0 + (2.0_f64).powf(ai * (beta - 1.0)));
            if ci > bound {
                return Err(Error::InvalidCovering(format!(
                    "cutoff c[{i}] = {ci} exceeds the admissibility bound {bound}; \
                     eps_left + eps_right <= |I| would fail on some interval"
                )));
            }
        }
        let c6 = {
            let m = aniso
                .exponents()
                .iter()
                .map(|&ai| (2.0_f64).max((2.0_f64).powf(ai * beta - 1.0)))
                .fold(0.0_f64, f64::max);
            0.5 * m
        };
        Ok(Self {
            alpha,
            beta,
            aniso,
            cutoff_fracs,
            c7: 2.0 * (1.0_f64).max(c6),
        })
    }

    fn beta_of(alpha: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&alpha) {
            return Err(Error::InvalidCovering(format!(
                "alpha = {alpha} outside [0, 1)"
            )));
        }
        Ok(1.0 / (1.0 - alpha))
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn aniso(&self) -> &Anisotropy {
        &self.aniso
    }

    pub fn dim(&self) -> usize {
        self.aniso.dim()
    }

    pub fn cutoff_fracs(&self) -> &[f64] {
        &self.cutoff_fracs
    }

    pub fn c7(&self) -> f64 {
        self.c7
    }

    /// Interval-length constants of the covering lemma, part (a):
    /// `c_{i,1} = min(1/2, a_i β / 2)` and
    /// `c_{i,2} = max(2, a_i β 2^{a_i β - 1})`.
    ///
    /// The upper constant follows from the mean-value bound
    /// `(j+1)^{a_i β} - j^{a_i β} <= a_i β (j+1)^{a_i β - 1}` together with
    /// `((j+1)/j)^{a_i β - 1} <= 2^{a_i β - 1}`; the `a_i β` factor is
    /// required (at j = 1 the outer interval has length `2^{a_i β} - 1`,
    /// which exceeds `2` whenever `a_i β > log2 3`).
    pub fn interval_constants(&self, dim: usize) -> (f64, f64) {
        let ai = self.aniso.exponents()[dim];
        (
            (0.5_f64).min(ai * self.beta / 2.0),
            (2.0_f64).max(ai * self.beta * (2.0_f64).powf(ai * self.beta - 1.0)),
        )
    }

    /// Rectangle-measure constants of part (b): products of the part (a) pair.
    pub fn measure_constants(&self) -> (f64, f64) {
        let mut c3 = 1.0;
        let mut c4 = 1.0;
        for i in 0..self.dim() {
            let (a, b) = self.interval_constants(i);
            c3 *= a;
            c4 *= b;
        }
        (c3, c4)
    }

    /// Affine-inclusion constants of part (c):
    /// `c5 = min_i c_{i,1} / 2`, `c6 = max_i c_{i,2} / 2`.
    pub fn affine_constants(&self) -> (f64, f64) {
        let mut c5 = f64::INFINITY;
        let mut c6 = 0.0_f64;
        for i in 0..self.dim() {
            let (a, b) = self.interval_constants(i);
            c5 = c5.min(0.5 * a);
            c6 = c6.max(0.5 * b);
        }
        (c5, c6)
    }

    /// Stable fingerprint of the covering parameters (FNV-1a over the
    /// canonical JSON encoding); used to validate coefficient imports.
    pub fn fingerprint(&self) -> String {
        let txt = serde_json::to_string(self).expect("spec serializes");
        let mut h: u64 = 0xcbf29ce484222325;
        for b in txt.as_bytes() {
            h ^= *b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
        format!("{h:016x}")
    }
}

/// Position of an interval inside its corridor subdivision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IntervalKind {
    OuterNegative,
    Inner,
    OuterPositive,
}

/// One half-open interval `[left, right)` of a corridor subdivision,
/// with the cutoff radii assigned to its two knots.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CutInterval {
    pub left: f64,
    pub right: f64,
    pub eps_left: f64,
    pub eps_right: f64,
    pub kind: IntervalKind,
    pub layer: u32,
    pub dim: usize,
    /// Index within the ordered per-dimension subdivision of this layer.
    pub slot: usize,
}

impl CutInterval {
    pub fn len(&self) -> f64 {
        self.right - self.left
    }

    pub fn is_empty(&self) -> bool {
        self.right <= self.left
    }

    /// Half-open membership.
    pub fn contains(&self, xi: f64) -> bool {
        self.left <= xi && xi < self.right
    }

    /// Support of the bell window attached to this interval.
    pub fn support(&self) -> (f64, f64) {
        (self.left - self.eps_left, self.right + self.eps_right)
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.left + self.right)
    }
}

/// One frequency tile `R_k^j` with its affine data.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FreqRect {
    pub layer: u32,
    /// 1-based position in the layer ordering.
    pub index: usize,
    pub intervals: Vec<CutInterval>,
    pub center: Vec<f64>,
    pub measure: f64,
    /// Diagonal of the affine map `T_k^j`, `j^{(β-1) a_i}` (1 for layer 0).
    pub affine_scale: Vec<f64>,
}

impl FreqRect {
    pub fn dim(&self) -> usize {
        self.intervals.len()
    }

    pub fn contains(&self, xi: &[f64]) -> bool {
        self.intervals.iter().zip(xi).all(|(iv, &x)| iv.contains(x))
    }

    /// Interval lengths as the diagonal `δ_R`.
    pub fn delta(&self) -> Vec<f64> {
        self.intervals.iter().map(|iv| iv.len()).collect()
    }

    /// Does the bell support of this tile meet the box `[-L, L]^d`?
    pub fn support_intersects_box(&self, bound: f64) -> bool {
        self.intervals.iter().all(|iv| {
            let (lo, hi) = iv.support();
            lo < bound && hi > -bound
        })
    }

    /// Image of `c [-1,1]^d` under the affine map `T_k^j`.
    pub fn affine_box(&self, c: f64) -> Vec<(f64, f64)> {
        self.center
            .iter()
            .zip(&self.affine_scale)
            .map(|(&m, &s)| (m - c * s, m + c * s))
            .collect()
    }

    /// Inscribed/circumscribed anisotropic ball radii about the center.
    pub fn ball_radii(&self, aniso: &Anisotropy) -> (f64, f64) {
        let h: Vec<f64> = self.intervals.iter().map(|iv| 0.5 * iv.len()).collect();
        let r_in = h
            .iter()
            .zip(aniso.exponents())
            .map(|(&hi, &ai)| hi.powf(1.0 / ai))
            .fold(f64::INFINITY, f64::min);
        let r_out = quasi_norm(&h, aniso);
        (r_in, r_out)
    }
}

/// Ceiling that tolerates floating error of ~1e-9 around integers, so
/// `⌈j^{a}⌉` is stable when `j^a` is integral but computed inexactly.
fn ceil_robust(t: f64) -> usize {
    let r = t.round();
    let v = if (t - r).abs() < 1e-9 { r } else { t.ceil() };
    v as usize
}

/// Number of outer intervals per side and inner intervals for layer `j`.
pub fn subdivision_counts(j: u32, dim: usize, spec: &CoveringSpec) -> (usize, usize) {
    let ai = spec.aniso().exponents()[dim];
    let jf = j as f64;
    (ceil_robust(jf.powf(ai - 1.0)), ceil_robust(jf.powf(ai)))
}

/// `|K_j| = |A_j| - |B_j|` without materializing the layer.
pub fn layer_tile_count(j: u32, spec: &CoveringSpec) -> usize {
    if j == 0 {
        return 1;
    }
    let mut all = 1usize;
    let mut inner = 1usize;
    for i in 0..spec.dim() {
        let (n_out, n_in) = subdivision_counts(j, i, spec);
        all = all.saturating_mul(2 * n_out + n_in);
        inner = inner.saturating_mul(n_in);
    }
    all - inner
}

/// The calibrated subdivision of corridor layer `j >= 1` along one dimension.
///
/// Returns `2 ⌈j^{a_i-1}⌉ + ⌈j^{a_i}⌉` contiguous half-open intervals tiling
/// `[-(j+1)^{a_i β}, (j+1)^{a_i β})`, ordered by left endpoint. Cutoff radii
/// are `c_i j^{a_i(β-1)}` at every inner knot and `c_i (j+1)^{a_i(β-1)}` at
/// the two extreme knots. Knots are mirror-symmetric to the last bit and
/// adjacent intervals share endpoints exactly.
pub fn corridor_intervals(j: u32, dim: usize, spec: &CoveringSpec) -> Result<Vec<CutInterval>> {
    if j == 0 {
        return Err(Error::InvalidArgument(
            "corridor_intervals requires j >= 1; layer 0 is the low-pass block".into(),
        ));
    }
    let ai = spec.aniso().exponents()[dim];
    let beta = spec.beta();
    let ci = spec.cutoff_fracs()[dim];
    let jf = j as f64;
    let lo = jf.powf(ai * beta);
    let hi = ((j + 1) as f64).powf(ai * beta);
    let (n_out, n_in) = subdivision_counts(j, dim, spec);
    let eps_in = ci * jf.powf(ai * (beta - 1.0));
    let eps_ext = ci * ((j + 1) as f64).powf(ai * (beta - 1.0));

    // Positive outer knots, with the extreme pinned to `hi` exactly.
    let len_out = (hi - lo) / n_out as f64;
    let mut pos = Vec::with_capacity(n_out + 1);
    for k in 0..n_out {
        pos.push(lo + k as f64 * len_out);
    }
    pos.push(hi);

    // Inner knots, symmetric by construction.
    let len_in = 2.0 * lo / n_in as f64;
    let mut inner = vec![0.0; n_in + 1];
    for k in 0..=n_in {
        if 2 * k < n_in {
            inner[k] = -lo + k as f64 * len_in;
        } else if 2 * k == n_in {
            inner[k] = 0.0;
        } else {
            inner[k] = -(-lo + (n_in - k) as f64 * len_in);
        }
    }
    inner[0] = -lo;
    inner[n_in] = lo;

    let mut out = Vec::with_capacity(2 * n_out + n_in);
    let mut slot = 0;
    let mut push =
        |left: f64, right: f64, el: f64, er: f64, kind: IntervalKind, slot: &mut usize| {
            out.push(CutInterval {
                left,
                right,
                eps_left: el,
                eps_right: er,
                kind,
                layer: j,
                dim,
                slot: *slot,
            });
            *slot += 1;
        };
    for k in 0..n_out {
        // Negative side mirrors the positive knots.
        let left = -pos[n_out - k];
        let right = -pos[n_out - k - 1];
        let el = if k == 0 { eps_ext } else { eps_in };
        push(
            left,
            right,
            el,
            eps_in,
            IntervalKind::OuterNegative,
            &mut slot,
        );
    }
    for k in 0..n_in {
        push(
            inner[k],
            inner[k + 1],
            eps_in,
            eps_in,
            IntervalKind::Inner,
            &mut slot,
        );
    }
    for k in 0..n_out {
        let er = if k == n_out - 1 { eps_ext } else { eps_in };
        push(
            pos[k],
            pos[k + 1],
            eps_in,
            er,
            IntervalKind::OuterPositive,
            &mut slot,
        );
    }
    Ok(out)
}

/// The single low-pass interval `[-1, 1)` with cutoff radii `c_i`.
pub fn low_pass_interval(dim: usize, spec: &CoveringSpec) -> CutInterval {
    let ci = spec.cutoff_fracs()[dim];
    CutInterval {
        left: -1.0,
        right: 1.0,
        eps_left: ci,
        eps_right: ci,
        kind: IntervalKind::Inner,
        layer: 0,
        dim,
        slot: 0,
    }
}

/// Layer `j` of the covering: all product rectangles of the corridor
/// subdivision except the all-inner ones, ordered lexicographically by the
/// tuple of per-dimension interval left endpoints. Layer 0 is `[-1,1)^d`.
pub fn build_layer(j: u32, spec: &CoveringSpec) -> Result<Vec<FreqRect>> {
    let d = spec.dim();
    if j == 0 {
        let intervals: Vec<CutInterval> = (0..d).map(|i| low_pass_interval(i, spec)).collect();
        return Ok(vec![FreqRect {
            layer: 0,
            index: 1,
            center: vec![0.0; d],
            measure: (2.0_f64).powi(d as i32),
            affine_scale: vec![1.0; d],
            intervals,
        }]);
    }
    let per_dim: Vec<Vec<CutInterval>> = (0..d)
        .map(|i| corridor_intervals(j, i, spec))
        .collect::<Result<_>>()?;
    let scale: Vec<f64> = spec
        .aniso()
        .exponents()
        .iter()
        .map(|&ai| (j as f64).powf((spec.beta() - 1.0) * ai))
        .collect();

    let mut rects = Vec::new();
    let mut idx = vec![0usize; d];
    let mut k = 0usize;
    loop {
        let all_inner = (0..d).all(|i| per_dim[i][idx[i]].kind == IntervalKind::Inner);
        if !all_inner {
            let intervals: Vec<CutInterval> = (0..d).map(|i| per_dim[i][idx[i]].clone()).collect();
            let center: Vec<f64> = intervals.iter().map(|iv| iv.midpoint()).collect();
            let measure: f64 = intervals.iter().map(|iv| iv.len()).product();
            k += 1;
            rects.push(FreqRect {
                layer: j,
                index: k,
                intervals,
                center,
                measure,
                affine_scale: scale.clone(),
            });
        }
        // Odometer over per-dimension slots: last dimension fastest, so the
        // emitted order is lexicographic in the left-endpoint tuples.
        let mut carry = d;
        while carry > 0 {
            idx[carry - 1] += 1;
            if idx[carry - 1] < per_dim[carry - 1].len() {
                break;
            }
            idx[carry - 1] = 0;
            carry -= 1;
        }
        if carry == 0 {
            break;
        }
    }
    Ok(rects)
}

/// A covering materialized up to a fixed layer.
#[derive(Debug, Clone)]
pub struct Covering {
    spec: CoveringSpec,
    layers: Vec<Vec<FreqRect>>,
    corridors: Vec<Vec<Vec<CutInterval>>>,
}

impl Covering {
    pub fn build(spec: CoveringSpec, j_max: u32) -> Result<Self> {
        let mut layers = Vec::with_capacity(j_max as usize + 1);
        let mut corridors = Vec::with_capacity(j_max as usize + 1);
        for j in 0..=j_max {
            layers.push(build_layer(j, &spec)?);
            if j == 0 {
                corridors.push(vec![
                    (0..spec.dim())
                        .map(|i| low_pass_interval(i, &spec))
                        .collect();
                    1
                ]);
            } else {
                let per_dim: Vec<Vec<CutInterval>> = (0..spec.dim())
                    .map(|i| corridor_intervals(j, i, &spec))
                    .collect::<Result<_>>()?;
                corridors.push(per_dim);
            }
        }
        Ok(Self {
            spec,
            layers,
            corridors,
        })
    }

    pub fn spec(&self) -> &CoveringSpec {
        &self.spec
    }

    pub fn j_max(&self) -> u32 {
        self.layers.len() as u32 - 1
    }

    pub fn layer(&self, j: u32) -> Result<&[FreqRect]> {
        self.layers
            .get(j as usize)
            .map(|v| v.as_slice())
            .ok_or(Error::OutsideRange {
                requested: j,
                j_max: self.j_max(),
            })
    }

    /// Tile `R_k^j` by 1-based index.
    pub fn rect(&self, j: u32, k: usize) -> Result<&FreqRect> {
        let layer = self.layer(j)?;
        layer.get(k - 1).ok_or_else(|| {
            Error::InvalidArgument(format!(
                "layer {j} has {} tiles, asked for k = {k}",
                layer.len()
            ))
        })
    }

    /// Per-dimension corridor subdivision of layer `j` (layer 0: low-pass).
    pub fn corridor(&self, j: u32, dim: usize) -> Result<&[CutInterval]> {
        self.corridors
            .get(j as usize)
            .map(|v| v[dim].as_slice())
            .ok_or(Error::OutsideRange {
                requested: j,
                j_max: self.j_max(),
            })
    }

    /// Locate the unique tile containing `ξ`.
    ///
    /// The layer comes from `j^β <= |ξ|_{a,∞} < (j+1)^β` (layer 0 when the
    /// max-form norm is < 1), the slot from per-dimension interval search.
    /// Half-open conventions make membership unambiguous.
    pub fn locate(&self, xi: &[f64]) -> Result<(u32, usize)> {
        let spec = &self.spec;
        if xi.len() != spec.dim() {
            return Err(Error::InvalidArgument(
                "dimension mismatch in locate".into(),
            ));
        }
        let r = quasi_norm_inf(xi, spec.aniso());
        if r < 1.0 {
            return Ok((0, 1));
        }
        let mut j = r.powf(1.0 - spec.alpha()).floor() as i64;
        // Guard against floating error at corridor boundaries.
        while j >= 1 && (j as f64).powf(spec.beta()) > r {
            j -= 1;
        }
        while ((j + 1) as f64).powf(spec.beta()) <= r {
            j += 1;
        }
        if j < 1 {
            return Ok((0, 1));
        }
        let j = j as u32;
        if j > self.j_max() {
            return Err(Error::OutsideRange {
                requested: j,
                j_max: self.j_max(),
            });
        }
        let d = spec.dim();
        let mut slots = vec![0usize; d];
        for i in 0..d {
            let ivs = self.corridor(j, i)?;
            let pos = ivs.partition_point(|iv| iv.right <= xi[i]);
            if pos >= ivs.len() || !ivs[pos].contains(xi[i]) {
                return Err(Error::InvalidArgument(format!(
                    "point {:?} escapes the layer-{j} subdivision in dim {i}",
                    xi
                )));
            }
            slots[i] = pos;
        }
        let k = self.rank_in_layer(j, &slots)?;
        Ok((j, k))
    }

    /// 1-based position of the slot tuple within the layer ordering,
    /// counting lexicographically and skipping all-inner tuples.
    fn rank_in_layer(&self, j: u32, slots: &[usize]) -> Result<usize> {
        let d = self.spec.dim();
        let mut sizes = Vec::with_capacity(d);
        let mut inner_lo = Vec::with_capacity(d);
        let mut inner_hi = Vec::with_capacity(d);
        for i in 0..d {
            let (n_out, n_in) = subdivision_counts(j, i, &self.spec);
            sizes.push(2 * n_out + n_in);
            inner_lo.push(n_out);
            inner_hi.push(n_out + n_in);
        }
        // Lexicographic rank within the full product.
        let mut rank_full: usize = 0;
        for i in 0..d {
            rank_full = rank_full * sizes[i] + slots[i];
        }
        // Number of all-inner tuples strictly before this one.
        let mut inner_before: usize = 0;
        let mut prefix_inner = true;
        for i in 0..d {
            if !prefix_inner {
                break;
            }
            let below = slots[i]
                .saturating_sub(inner_lo[i])
                .min(inner_hi[i] - inner_lo[i]);
            let mut tail: usize = 1;
            for t in (i + 1)..d {
                tail *= inner_hi[t] - inner_lo[t];
            }
            inner_before += below * tail;
            prefix_inner = slots[i] >= inner_lo[i] && slots[i] < inner_hi[i];
        }
        if prefix_inner {
            return Err(Error::InvalidArgument(format!(
                "all-inner tuple {slots:?} does not belong to layer {j}"
            )));
        }
        Ok(rank_full - inner_before + 1)
    }
}

/// Outcome of the covering verification suite.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoveringReport {
    pub j_max: u32,
    pub layers_checked: u32,
    pub intervals_checked: u64,
    pub violations: Vec<String>,
    /// Observed range of `|R|^{1/ν} / ⟨x⟩^α` over sampled tiles and points.
    pub geometric_ratio: (f64, f64),
    /// Observed range of `|R|^{1/ν} / |x|_a^α`.
    pub geometric_ratio_quasi: (f64, f64),
    /// Bounded-overlap count of the c7-inflated covering (sampled layers).
    pub overlap_n0: usize,
    /// Max circumscribed/inscribed anisotropic ball ratio (upper bound).
    pub eccentricity_k: f64,
    pub locate_checks: usize,
}

impl CoveringReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Verify partition exactness, the lemma bounds with their closed-form
/// constants, cutoff consistency, the α-covering geometric relation, bounded
/// overlap, eccentricity, and locate-based disjointness.
pub fn verify_alpha_covering(
    spec: &CoveringSpec,
    j_max: u32,
    samples: usize,
    seed: u64,
) -> Result<CoveringReport> {
    if j_max < 1 {
        return Err(Error::InvalidArgument(
            "verify_alpha_covering needs j_max >= 1".into(),
        ));
    }
    let mut violations: Vec<String> = Vec::new();
    let push_violation = |msg: String, violations: &mut Vec<String>| {
        if violations.len() < 64 {
            violations.push(msg);
        }
    };
    let d = spec.dim();
    let beta = spec.beta();
    let (c5, c6) = spec.affine_constants();
    let (c3, c4) = spec.measure_constants();
    let mut intervals_checked: u64 = 0;

    let mut prev_extreme: Vec<Option<(f64, f64)>> = vec![None; d]; // (knot, eps)
    for i in 0..d {
        prev_extreme[i] = Some((1.0, spec.cutoff_fracs()[i]));
    }
    for j in 1..=j_max {
        let jf = j as f64;
        let mut layer_min = 1.0_f64;
        let mut layer_max = 1.0_f64;
        for i in 0..d {
            let ivs = corridor_intervals(j, i, spec)?;
            let ai = spec.aniso().exponents()[i];
            let (ci1, ci2) = spec.interval_constants(i);
            let unit = jf.powf(ai * (beta - 1.0));
            let width = 2.0 * ((j + 1) as f64).powf(ai * beta);
            let total: f64 = ivs.iter().map(|iv| iv.len()).sum();
            if ((total - width) / width).abs() > 1e-12 {
                push_violation(
                    format!(
                        "layer {j} dim {i}: interval lengths sum {total} != corridor width {width}"
                    ),
                    &mut violations,
                );
            }
            let mut dim_min = f64::INFINITY;
            let mut dim_max = 0.0_f64;
            for (t, iv) in ivs.iter().enumerate() {
                intervals_checked += 1;
                let len = iv.len();
                dim_min = dim_min.min(len);
                dim_max = dim_max.max(len);
                if len < ci1 * unit * (1.0 - 1e-12) || len > ci2 * unit * (1.0 + 1e-12) {
                    push_violation(
                        format!("lemma(a) violated at (j={j}, dim={i}, slot={t}): |I| = {len}"),
                        &mut violations,
                    );
                }
                // Lemma (c) reduces to a per-interval two-sided bound.
                if 2.0 * c5 * unit > len * (1.0 + 1e-12) || len > 2.0 * c6 * unit * (1.0 + 1e-12) {
                    push_violation(
                        format!("lemma(c) violated at (j={j}, dim={i}, slot={t})"),
                        &mut violations,
                    );
                }
                if iv.eps_left + iv.eps_right > len * (1.0 + 1e-12) {
                    push_violation(
                        format!("cutoff condition eps+eps' <= |I| violated at (j={j}, dim={i}, slot={t})"),
                        &mut violations,
                    );
                }
                if t + 1 < ivs.len() {
                    let next = &ivs[t + 1];
                    if iv.right != next.left {
                        push_violation(
                            format!("adjacency not exact at (j={j}, dim={i}, slot={t})"),
                            &mut violations,
                        );
                    }
                    if iv.eps_right != next.eps_left {
                        push_violation(
                            format!("cutoff mismatch at shared knot (j={j}, dim={i}, slot={t})"),
                            &mut violations,
                        );
                    }
                }
            }
            layer_min *= dim_min;
            layer_max *= dim_max;
            // Nesting across corridors: B_{j+1}^i = A_j^i exactly, and the
            // shared knot |ξ| = j^{a_i β} carries the same cutoff radius seen
            // from both layers.
            let (n_out, _) = subdivision_counts(j, i, spec);
            if let Some((prev_knot, prev_eps)) = prev_extreme[i] {
                let inner_first = &ivs[n_out];
                if inner_first.left != -prev_knot {
                    push_violation(
                        format!(
                            "nesting broken at layer {j} dim {i}: {} vs {}",
                            inner_first.left, -prev_knot
                        ),
                        &mut violations,
                    );
                }
                if inner_first.eps_left != prev_eps {
                    push_violation(
                        format!("cross-corridor cutoff mismatch at layer {j} dim {i}"),
                        &mut violations,
                    );
                }
            }
            let extreme = ((j + 1) as f64).powf(ai * beta);
            let eps_ext = spec.cutoff_fracs()[i] * ((j + 1) as f64).powf(ai * (beta - 1.0));
            prev_extreme[i] = Some((extreme, eps_ext));
        }
        let unit_nu = jf.powf(spec.aniso().nu() * (beta - 1.0));
        if layer_min < c3 * unit_nu * (1.0 - 1e-12) || layer_max > c4 * unit_nu * (1.0 + 1e-12) {
            push_violation(
                format!("lemma(b) violated at layer {j}: measures in [{layer_min}, {layer_max}]"),
                &mut violations,
            );
        }
    }

    // Sampled checks: geometric relation, overlap, eccentricity, locate.
    // The materialized depth is capped by cumulative tile count, so high
    // dimensions and large β stay affordable.
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut geo = (f64::INFINITY, 0.0_f64);
    let mut geo_q = (f64::INFINITY, 0.0_f64);
    let mut ecc: f64 = 0.0;
    let mut j_detail = 1;
    let mut cumulative = 1usize;
    for j in 1..=j_max.min(16) {
        cumulative = cumulative.saturating_add(layer_tile_count(j, spec));
        if cumulative > 50_000 {
            break;
        }
        j_detail = j;
    }
    let covering = Covering::build(spec.clone(), j_detail)?;
    let alpha = spec.alpha();
    let nu = spec.aniso().nu();
    for j in 1..=j_detail {
        let layer = covering.layer(j)?;
        let step = (layer.len() / 64).max(1);
        for rect in layer.iter().step_by(step) {
            let (r_in, r_out) = rect.ball_radii(spec.aniso());
            ecc = ecc.max(r_out / r_in);
            for _ in 0..4 {
                let x: Vec<f64> = rect
                    .intervals
                    .iter()
                    .map(|iv| rng.random_range(iv.left..iv.right))
                    .collect();
                let m = rect.measure.powf(1.0 / nu);
                let rb = m / bracket(&x, spec.aniso()).powf(alpha);
                let rq = m / quasi_norm(&x, spec.aniso()).powf(alpha);
                geo = (geo.0.min(rb), geo.1.max(rb));
                geo_q = (geo_q.0.min(rq), geo_q.1.max(rq));
            }
        }
    }

    // Bounded overlap of the c7-inflated tiles, sampled over nearby layers.
    let mut n0: usize = 0;
    let j_overlap = j_detail.min(8);
    for j in 1..=j_overlap {
        let layer = covering.layer(j)?;
        let step = (layer.len() / 16).max(1);
        for rect in layer.iter().step_by(step) {
            let b = rect.affine_box(spec.c7());
            let mut count = 0usize;
            for jn in j.saturating_sub(1)..=(j + 1).min(j_overlap) {
                for other in covering.layer(jn)? {
                    let ob = other.affine_box(spec.c7());
                    let hit = b
                        .iter()
                        .zip(&ob)
                        .all(|((l1, r1), (l2, r2))| l1 < r2 && l2 < r1);
                    if hit {
                        count += 1;
                    }
                }
            }
            n0 = n0.max(count);
        }
    }

    // Disjointness through locate: every random point lands in exactly one
    // tile of its layer.
    let mut locate_checks = 0usize;
    let bound: Vec<f64> = spec
        .aniso()
        .exponents()
        .iter()
        .map(|&ai| ((j_detail + 1) as f64).powf(ai * beta))
        .collect();
    for _ in 0..samples {
        let xi: Vec<f64> = bound.iter().map(|&b| rng.random_range(-b..b)).collect();
        match covering.locate(&xi) {
            Ok((j, k)) => {
                let rect = covering.rect(j, k)?;
                if !rect.contains(&xi) {
                    push_violation(
                        format!("locate returned non-containing tile for {xi:?}"),
                        &mut violations,
                    );
                }
                let holders = covering
                    .layer(j)?
                    .iter()
                    .filter(|r| r.contains(&xi))
                    .count();
                if holders != 1 {
                    push_violation(
                        format!("point {xi:?} contained in {holders} tiles of layer {j}"),
                        &mut violations,
                    );
                }
                locate_checks += 1;
            }
            Err(Error::OutsideRange { .. }) => {}
            Err(e) => push_violation(format!("locate failed: {e}"), &mut violations),
        }
    }

    Ok(CoveringReport {
        j_max,
        layers_checked: j_max,
        intervals_checked,
        violations,
        geometric_ratio: geo,
        geometric_ratio_quasi: geo_q,
        overlap_n0: n0,
        eccentricity_k: ecc,
        locate_checks,
    })
}

/// JSON document for one layer of the tiling.
pub fn layer_to_json(covering: &Covering, j: u32) -> Result<serde_json::Value> {
    let layer = covering.layer(j)?;
    let tiles: Vec<serde_json::Value> = layer
        .iter()
        .map(|r| {
            serde_json::json!({
                "j": r.layer,
                "k": r.index,
                "intervals": r.intervals.iter().map(|iv| {
                    serde_json::json!([iv.left, iv.right, iv.eps_left, iv.eps_right])
                }).collect::<Vec<_>>(),
                "center": r.center,
                "measure": r.measure,
            })
        })
        .collect();
    Ok(serde_json::json!({
        "layer": j,
        "count": layer.len(),
        "tiles": tiles,
    }))
}

/// SVG rendering of a d=2 tiling: corridor outlines thick, sub-grid thin.
/// Coordinates are in raw frequency units (the viewBox carries the scale),
/// so corner values can be read off the file directly.
pub fn tiling_svg(covering: &Covering, j_max: u32) -> Result<String> {
    let spec = covering.spec();
    if spec.dim() != 2 {
        return Err(Error::InvalidArgument("SVG export requires d = 2".into()));
    }
    let a = spec.aniso().exponents();
    let beta = spec.beta();
    let wx = ((j_max + 1) as f64).powf(a[0] * beta);
    let wy = ((j_max + 1) as f64).powf(a[1] * beta);
    let margin = 0.02 * wx.max(wy);
    let thin = 0.0008 * wx.max(wy);
    let thick = 5.0 * thin;
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" height=\"{:.0}\" \
         viewBox=\"{:.6} {:.6} {:.6} {:.6}\">\n",
        (720.0 * wy / wx).round(),
        -wx - margin,
        -wy - margin,
        2.0 * (wx + margin),
        2.0 * (wy + margin),
    ));
    // SVG's y axis points down; emit y = -ξ₂ so the listed magnitudes match
    // the frequency coordinates.
    for j in 1..=j_max {
        for rect in covering.layer(j)? {
            svg.push_str(&format!(
                "  <rect x=\"{:.9}\" y=\"{:.9}\" width=\"{:.9}\" height=\"{:.9}\" \
                 fill=\"none\" stroke=\"#888\" stroke-width=\"{thin:.6}\"/>\n",
                rect.intervals[0].left,
                -rect.intervals[1].right,
                rect.intervals[0].len(),
                rect.intervals[1].len(),
            ));
        }
    }
    // Corridor outlines on top: the boxes A_j for j = 0..j_max.
    for j in 0..=j_max {
        let bx = ((j + 1) as f64).powf(a[0] * beta);
        let by = ((j + 1) as f64).powf(a[1] * beta);
        svg.push_str(&format!(
            "  <rect x=\"{:.9}\" y=\"{:.9}\" width=\"{:.9}\" height=\"{:.9}\" \
             fill=\"none\" stroke=\"#000\" stroke-width=\"{thick:.6}\"/>\n",
            -bx,
            -by,
            2.0 * bx,
            2.0 * by,
        ));
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn fig1_spec() -> CoveringSpec {
        // β = 1.1 corresponds to α = 1 - 1/β.
        let alpha = 1.0 - 1.0 / 1.1;
        let aniso = Anisotropy::new(vec![3.0_f64.sqrt(), 1.5]).unwrap();
        CoveringSpec::new(alpha, aniso).unwrap()
    }

    #[test]
    fn fig1_layer3_geometry() {
        let spec = fig1_spec();
        assert_relative_eq!(spec.beta(), 1.1, max_relative = 1e-14);
        let (n_out_1, n_in_1) = subdivision_counts(3, 0, &spec);
        let (n_out_2, n_in_2) = subdivision_counts(3, 1, &spec);
        assert_eq!((n_out_1, n_in_1), (3, 7));
        assert_eq!((n_out_2, n_in_2), (2, 6));

        let d1 = corridor_intervals(3, 0, &spec).unwrap();
        let d2 = corridor_intervals(3, 1, &spec).unwrap();
        // Corridor corner coordinates.
        let lo1 = 3.0_f64.powf(1.1 * 3.0_f64.sqrt());
        let hi1 = 4.0_f64.powf(1.1 * 3.0_f64.sqrt());
        assert_relative_eq!(lo1, 8.110321686, max_relative = 1e-9);
        assert_relative_eq!(hi1, 14.03066786, max_relative = 1e-8);
        assert_relative_eq!(3.0_f64.powf(1.65), 6.127030896, max_relative = 1e-9);
        assert_relative_eq!(4.0_f64.powf(1.65), 9.849155307, max_relative = 1e-9);
        assert_relative_eq!(d1[0].left, -hi1, max_relative = 1e-12);
        assert_relative_eq!(d1.last().unwrap().right, hi1, max_relative = 1e-12);
        // Sub-grid steps.
        assert_relative_eq!(d1[3].len(), 2.0 * lo1 / 7.0, max_relative = 1e-12);
        assert_relative_eq!(d1[3].len(), 2.317234767, max_relative = 1e-8);
        assert_relative_eq!(d2[2].len(), 2.042343632, max_relative = 1e-8);
        assert_relative_eq!(d1[0].len(), 1.973448725, max_relative = 1e-8);
        assert_relative_eq!(d2[0].len(), 1.861062206, max_relative = 1e-8);
    }

    #[test]
    fn layer3_counts_match_enumeration() {
        let spec = fig1_spec();
        // |A_3| = 13 * 10, |B_3| = 7 * 6, |K_3| = 130 - 42 = 88.
        let layer = build_layer(3, &spec).unwrap();
        assert_eq!(layer.len(), 88);
        // Independent oracle: direct enumeration over the product.
        let d1 = corridor_intervals(3, 0, &spec).unwrap();
        let d2 = corridor_intervals(3, 1, &spec).unwrap();
        assert_eq!(d1.len() * d2.len(), 130);
        let mut count = 0;
        for a in &d1 {
            for b in &d2 {
                if !(a.kind == IntervalKind::Inner && b.kind == IntervalKind::Inner) {
                    count += 1;
                }
            }
        }
        assert_eq!(count, 88);
        // No tile is all-inner.
        assert!(layer
            .iter()
            .all(|r| r.intervals.iter().any(|iv| iv.kind != IntervalKind::Inner)));
    }

    #[test]
    fn layer0_is_low_pass_box() {
        let spec = fig1_spec();
        let layer = build_layer(0, &spec).unwrap();
        assert_eq!(layer.len(), 1);
        let r = &layer[0];
        assert_eq!(r.index, 1);
        assert_relative_eq!(r.measure, 4.0);
        assert!(r
            .intervals
            .iter()
            .all(|iv| iv.left == -1.0 && iv.right == 1.0));
        assert!(r.affine_scale.iter().all(|&s| s == 1.0));
    }

    #[test]
    fn locate_examples() {
        let spec = fig1_spec();
        let covering = Covering::build(spec, 6).unwrap();
        assert_eq!(covering.locate(&[0.0, 0.0]).unwrap(), (0, 1));
        // |ξ|_{a,∞} = 8.5^{1/√3} ≈ 3.44 lands in layer 3.
        let (j, k) = covering.locate(&[8.5, 0.0]).unwrap();
        assert_eq!(j, 3);
        let rect = covering.rect(j, k).unwrap();
        assert!(rect.contains(&[8.5, 0.0]));
        // A knot point belongs to the interval it starts (half-open rule).
        let lo1 = 3.0_f64.powf(1.1 * 3.0_f64.sqrt());
        let (j, k) = covering.locate(&[lo1, 0.0]).unwrap();
        assert_eq!(j, 3);
        let rect = covering.rect(j, k).unwrap();
        assert_eq!(rect.intervals[0].left, lo1);
        // Out of range is signaled.
        let far = [1e6, 0.0];
        assert!(matches!(
            covering.locate(&far),
            Err(Error::OutsideRange { .. })
        ));
    }

    #[test]
    fn locate_rank_against_scan() {
        let spec = fig1_spec();
        let covering = Covering::build(spec, 4).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for _ in 0..500 {
            let xi = [rng.random_range(-13.0..13.0), rng.random_range(-9.5..9.5)];
            if let Ok((j, k)) = covering.locate(&xi) {
                let scan = covering
                    .layer(j)
                    .unwrap()
                    .iter()
                    .position(|r| r.contains(&xi))
                    .map(|p| p + 1);
                assert_eq!(scan, Some(k), "rank mismatch at {xi:?}");
            }
        }
    }

    #[test]
    fn ordering_is_deterministic() {
        let spec = fig1_spec();
        let a = build_layer(3, &spec).unwrap();
        let b = build_layer(3, &spec).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.index, y.index);
            assert_eq!(x.center, y.center);
        }
        // Lexicographic by left endpoints.
        for w in a.windows(2) {
            let key = |r: &FreqRect| r.intervals.iter().map(|iv| iv.left).collect::<Vec<f64>>();
            assert!(key(&w[0]) < key(&w[1]));
        }
    }

    #[test]
    fn alpha_zero_is_uniform() {
        let spec = CoveringSpec::new(0.0, Anisotropy::isotropic(2)).unwrap();
        let report = verify_alpha_covering(&spec, 8, 500, 3).unwrap();
        assert!(report.ok(), "{:?}", report.violations);
        // β = 1: every interval has length-independent scale j^0 = 1, so all
        // measures sit inside the constant band [c3, c4].
        let (c3, c4) = spec.measure_constants();
        for j in 1..=5 {
            for rect in build_layer(j, &spec).unwrap() {
                assert!(rect.measure >= c3 - 1e-12 && rect.measure <= c4 + 1e-12);
            }
        }
    }

    #[test]
    fn verification_suite_fig1() {
        let spec = fig1_spec();
        let report = verify_alpha_covering(&spec, 24, 2000, 11).unwrap();
        assert!(report.ok(), "{:?}", report.violations);
        assert!(report.geometric_ratio.0 > 0.0);
        assert!(report.geometric_ratio.1.is_finite());
        assert!(report.overlap_n0 >= 1);
        assert!(report.eccentricity_k.is_finite());
    }

    #[test]
    fn spec_rejects_inadmissible_cutoffs() {
        let aniso = Anisotropy::new(vec![2.0, 1.0]).unwrap();
        assert!(CoveringSpec::with_cutoffs(0.5, aniso.clone(), vec![0.49, 0.49]).is_err());
        assert!(CoveringSpec::with_cutoffs(0.5, aniso, vec![0.01, 0.01]).is_ok());
    }

    #[test]
    fn svg_and_json_exports() {
        let spec = fig1_spec();
        let covering = Covering::build(spec, 3).unwrap();
        let svg = tiling_svg(&covering, 3).unwrap();
        assert!(svg.contains("<svg"));
        assert!(svg.matches("<rect").count() > 90);
        let json = layer_to_json(&covering, 3).unwrap();
        assert_eq!(json["count"], 88);
    }
}
