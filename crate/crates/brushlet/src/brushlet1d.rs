//! Univariate brushlet machinery: ramp, bell, local cosine evaluation, the
//! central bell in time, and the interval projection operator.

use crate::covering::CutInterval;
use crate::error::{Error, Result};
use crate::grid::{GridFunction, SampledAxis};
use crate::quad;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_4, PI};

/// Smooth ramp `ρ` with `ρ(ξ) = 0` for `ξ <= -1`, `ρ(ξ) = 1` for `ξ >= 1`
/// and the exact complementarity `ρ(ξ)² + ρ(-ξ)² = 1`.
///
/// Realized as `ρ(ξ) = sin(π/4 (1 + θ(ξ)))` with `θ` an odd polynomial
/// transition of selectable smoothness: `θ(ξ) = 2 S_N((1+ξ)/2) - 1` where
/// `S_N` is the degree `2N+1` polynomial with `C^N` contact at 0 and 1
/// (N = 3 gives the default degree-7 transition `t⁴(35 - 84t + 70t² - 20t³)`).
/// Oddness is enforced structurally, so the complementarity identity holds
/// to machine precision.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RampProfile {
    order: u32,
    #[serde(skip)]
    coeffs: Vec<f64>,
}

impl RampProfile {
    pub fn new(order: u32) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidArgument("ramp order must be >= 1".into()));
        }
        Ok(Self {
            order,
            coeffs: Self::smoothstep_coeffs(order),
        })
    }

    /// Coefficients of `S_N(t) = Σ_k c_k t^{N+1+k}` with
    /// `c_k = (-1)^k (2N+1) C(2N,N) C(N,k) / (N+1+k)`. These are integers
    /// (exact in f64 for the orders used here), so `S_N(1/2) = 1/2` holds
    /// exactly and the transition is odd to the last bit.
    fn smoothstep_coeffs(order: u32) -> Vec<f64> {
        let n = order as u64;
        let binom = |top: u64, k: u64| -> f64 {
            let mut b = 1.0_f64;
            for i in 0..k {
                b = b * (top - i) as f64 / (i + 1) as f64;
            }
            b
        };
        let lead = (2 * n + 1) as f64 * binom(2 * n, n);
        (0..=n)
            .map(|k| {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                sign * lead * binom(n, k) / (n + 1 + k) as f64
            })
            .collect()
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    fn smoothstep(&self, t: f64) -> f64 {
        let coeffs = if self.coeffs.is_empty() {
            // Deserialized profiles carry only the order.
            Self::smoothstep_coeffs(self.order)
        } else {
            self.coeffs.clone()
        };
        let mut acc = 0.0;
        for &c in coeffs.iter().rev() {
            acc = acc * t + c;
        }
        acc * t.powi(self.order as i32 + 1)
    }

    /// Odd transition: `θ(±1) = ±1`, `C^order` at the ends.
    pub fn theta(&self, xi: f64) -> f64 {
        let u = xi.abs().min(1.0);
        let v = 2.0 * self.smoothstep(0.5 * (1.0 + u)) - 1.0;
        if xi < 0.0 {
            -v
        } else {
            v
        }
    }

    /// `ρ(ξ)`.
    pub fn eval(&self, xi: f64) -> f64 {
        if xi <= -1.0 {
            0.0
        } else if xi >= 1.0 {
            1.0
        } else {
            (FRAC_PI_4 * (1.0 + self.theta(xi))).sin()
        }
    }
}

impl Default for RampProfile {
    fn default() -> Self {
        Self::new(3).expect("default ramp order is valid")
    }
}

/// `ρ(ξ)` under the given profile.
pub fn ramp_eval(xi: f64, profile: &RampProfile) -> f64 {
    profile.eval(xi)
}

/// Bell window over one interval: value 1 on the core
/// `[α+ε, α'-ε']`, smooth transitions of halfwidth ε, ε' at the knots,
/// support `[α-ε, α'+ε']`.
#[derive(Debug, Clone)]
pub struct Bell {
    alpha: f64,
    alpha_prime: f64,
    eps_left: f64,
    eps_right: f64,
    ramp: RampProfile,
}

impl Bell {
    pub fn new(
        alpha: f64,
        alpha_prime: f64,
        eps_left: f64,
        eps_right: f64,
        ramp: RampProfile,
    ) -> Result<Self> {
        if !(alpha_prime > alpha) || !(eps_left > 0.0) || !(eps_right > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "degenerate bell [{alpha}, {alpha_prime}) with eps ({eps_left}, {eps_right})"
            )));
        }
        if eps_left + eps_right > (alpha_prime - alpha) * (1.0 + 1e-12) {
            return Err(Error::InvalidArgument(format!(
                "cutoff radii {eps_left} + {eps_right} exceed the interval length {}",
                alpha_prime - alpha
            )));
        }
        Ok(Self {
            alpha,
            alpha_prime,
            eps_left,
            eps_right,
            ramp,
        })
    }

    pub fn from_interval(iv: &CutInterval, ramp: RampProfile) -> Result<Self> {
        Self::new(iv.left, iv.right, iv.eps_left, iv.eps_right, ramp)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn alpha_prime(&self) -> f64 {
        self.alpha_prime
    }

    pub fn eps_left(&self) -> f64 {
        self.eps_left
    }

    pub fn eps_right(&self) -> f64 {
        self.eps_right
    }

    pub fn len(&self) -> f64 {
        self.alpha_prime - self.alpha
    }

    pub fn ramp(&self) -> &RampProfile {
        &self.ramp
    }

    pub fn support(&self) -> (f64, f64) {
        (
            self.alpha - self.eps_left,
            self.alpha_prime + self.eps_right,
        )
    }

    /// Integration breakpoints: the four transition edges.
    pub fn breakpoints(&self) -> [f64; 4] {
        [
            self.alpha - self.eps_left,
            self.alpha + self.eps_left,
            self.alpha_prime - self.eps_right,
            self.alpha_prime + self.eps_right,
        ]
    }

    pub fn eval(&self, xi: f64) -> f64 {
        self.ramp.eval((xi - self.alpha) / self.eps_left)
            * self.ramp.eval((self.alpha_prime - xi) / self.eps_right)
    }

    /// Bell value at signed offset `o = ξ - α` inside the left transition
    /// window (`|o| <= ε`); the right factor is exactly 1 there.
    fn eval_left_offset(&self, o: f64) -> f64 {
        self.ramp.eval(o / self.eps_left)
    }

    /// Bell value at signed offset `o = ξ - α'` inside the right transition
    /// window (`|o| <= ε'`); the left factor is exactly 1 there.
    fn eval_right_offset(&self, o: f64) -> f64 {
        self.ramp.eval(-o / self.eps_right)
    }
}

/// Frequency-side brushlet
/// `ŵ_{I,n}(ξ) = sqrt(2/|I|) b_I(ξ) cos(π (n+1/2) (ξ-α)/|I|)`.
pub fn brushlet_freq_eval(bell: &Bell, n: u32, xi: f64) -> f64 {
    let len = bell.len();
    (2.0 / len).sqrt() * bell.eval(xi) * (PI * (n as f64 + 0.5) * (xi - bell.alpha()) / len).cos()
}

/// Frequency-side central bell `ĝ_I(u) = ρ(|I| u / ε) ρ(|I| (1-u) / ε')`,
/// supported on `[-ε/|I|, 1 + ε'/|I|]`. It depends on the ratios
/// `ε/|I|` and `ε'/|I|` only.
pub fn central_bell_freq_eval(bell: &Bell, u: f64) -> f64 {
    let len = bell.len();
    bell.ramp.eval(len * u / bell.eps_left) * bell.ramp.eval(len * (1.0 - u) / bell.eps_right)
}

/// Time-side central bell `g_I(x) = (2π)^{-1/2} ∫ ĝ_I(u) e^{iux} du`
/// by panel quadrature over the compact support, refined until the relative
/// change drops below `1e-9`.
pub fn central_bell_time_eval(bell: &Bell, x: f64) -> Result<Complex64> {
    let len = bell.len();
    let lo = -bell.eps_left / len;
    let hi = 1.0 + bell.eps_right / len;
    let breaks = [-lo, bell.eps_left / len, 1.0 - bell.eps_right / len];
    let pieces = quad::split_at_breakpoints(lo, hi, &breaks);
    let mut prev = Complex64::ZERO;
    // Oscillation wavelength of e^{iux} in u is 2π/|x|.
    let osc = if x.abs() > 1.0 {
        2.0 * PI / x.abs()
    } else {
        f64::INFINITY
    };
    let mut max_len = osc.min(0.5);
    for pass in 0..14 {
        let mut acc = Complex64::ZERO;
        for &(a, b) in &pieces {
            for (u, w) in quad::panel_nodes(a, b, max_len, 16) {
                let g = central_bell_freq_eval(bell, u);
                acc += Complex64::from_polar(1.0, u * x) * g * w;
            }
        }
        acc /= (2.0 * PI).sqrt();
        if pass > 0 && (acc - prev).norm() <= 1e-9 * (1.0 + acc.norm()) {
            return Ok(acc);
        }
        prev = acc;
        max_len *= 0.5;
    }
    Err(Error::QuadratureNonConvergence(format!(
        "central bell at x = {x} did not settle to 1e-9"
    )))
}

/// How a reflection `ξ -> 2κ - ξ` is realized on a given axis.
enum ReflectPlan {
    /// Index mirror inside a registered knot window.
    Mirror { start: usize, len: usize },
    /// Uniform axis with the knot on the grid or half-grid:
    /// reflected index is `s - i`.
    UniformMirror { s: i64 },
    /// Cubic interpolation at the reflected point.
    Interpolate,
}

struct KnotPlan {
    /// Node index range `[first, last]` with `|ξ - κ| < ε`.
    first: usize,
    last: usize,
    knot: f64,
    plan: ReflectPlan,
}

/// Precomputed data to apply one interval projection along an axis.
pub struct AxisProjection {
    bell_values: Vec<f64>,
    left: KnotPlan,
    right: KnotPlan,
}

impl AxisProjection {
    /// Build the plan; fails if the axis does not cover the bell support.
    pub fn new(axis: &SampledAxis, bell: &Bell) -> Result<Self> {
        let (slo, shi) = bell.support();
        if !axis.covers(slo, shi) {
            return Err(Error::InsufficientCoverage(format!(
                "bell support [{slo}, {shi}] vs axis [{}, {}]",
                axis.lo(),
                axis.hi()
            )));
        }
        let pts = axis.points();
        let n = pts.len();

        let mut bell_values = vec![0.0; n];
        // Zone-offset evaluation keeps transition values exactly
        // antisymmetric under the index mirror.
        let zl = axis.zone_for(bell.alpha(), bell.eps_left()).cloned();
        let zr = axis.zone_for(bell.alpha_prime(), bell.eps_right()).cloned();
        for i in 0..n {
            let xi = pts[i];
            let mut handled = false;
            if let Some(z) = &zl {
                if z.contains_index(i) {
                    let o = axis.zone_offset(z, i);
                    if o.abs() <= bell.eps_left() {
                        bell_values[i] = bell.eval_left_offset(o);
                        handled = true;
                    }
                }
            }
            if !handled {
                if let Some(z) = &zr {
                    if z.contains_index(i) {
                        let o = axis.zone_offset(z, i);
                        if o.abs() <= bell.eps_right() {
                            bell_values[i] = bell.eval_right_offset(o);
                            handled = true;
                        }
                    }
                }
            }
            if !handled {
                bell_values[i] = bell.eval(xi);
            }
        }

        let make_plan = |knot: f64, eps: f64, zone: Option<&crate::grid::Zone>| -> KnotPlan {
            let first = pts.partition_point(|&p| p <= knot - eps);
            let last = pts.partition_point(|&p| p < knot + eps).saturating_sub(1);
            let plan = if let Some(z) = zone {
                ReflectPlan::Mirror {
                    start: z.start,
                    len: z.len(),
                }
            } else if let Some((lo, _, step)) = axis.uniform_meta() {
                let s = 2.0 * (knot - lo) / step;
                let sr = s.round();
                if (s - sr).abs() <= 1e-9 {
                    ReflectPlan::UniformMirror { s: sr as i64 }
                } else {
                    ReflectPlan::Interpolate
                }
            } else {
                ReflectPlan::Interpolate
            };
            KnotPlan {
                first,
                last,
                knot,
                plan,
            }
        };

        Ok(Self {
            left: make_plan(bell.alpha(), bell.eps_left(), zl.as_ref()),
            right: make_plan(bell.alpha_prime(), bell.eps_right(), zr.as_ref()),
            bell_values,
        })
    }

    /// Apply to one line of values (stride access).
    pub fn apply_line(
        &self,
        axis: &SampledAxis,
        bell: &Bell,
        input: &[Complex64],
        start: usize,
        stride: usize,
        out: &mut [Complex64],
    ) {
        let n = axis.len();
        let read = |j: usize| input[start + j * stride];
        for i in 0..n {
            let b = self.bell_values[i];
            let mut acc = if b != 0.0 {
                b * read(i)
            } else {
                Complex64::ZERO
            };
            if b != 0.0 {
                if i >= self.left.first && i <= self.left.last {
                    let (bw, fw) = self.reflected(axis, bell, &self.left, i, true, &read);
                    acc += bw * fw;
                }
                if i >= self.right.first && i <= self.right.last {
                    let (bw, fw) = self.reflected(axis, bell, &self.right, i, false, &read);
                    acc -= bw * fw;
                }
                out[start + i * stride] = b * acc;
            } else {
                out[start + i * stride] = Complex64::ZERO;
            }
        }
    }

    fn reflected(
        &self,
        axis: &SampledAxis,
        bell: &Bell,
        kp: &KnotPlan,
        i: usize,
        is_left: bool,
        read: &dyn Fn(usize) -> Complex64,
    ) -> (f64, Complex64) {
        match kp.plan {
            ReflectPlan::Mirror { start, len } => {
                let j = start + (len - 1) - (i - start);
                (self.bell_values[j], read(j))
            }
            ReflectPlan::UniformMirror { s } => {
                let j = s - i as i64;
                if j < 0 || j as usize >= axis.len() {
                    (0.0, Complex64::ZERO)
                } else {
                    let j = j as usize;
                    (self.bell_values[j], read(j))
                }
            }
            ReflectPlan::Interpolate => {
                let x = 2.0 * kp.knot - axis.points()[i];
                let bw = if is_left {
                    bell.eval_left_offset(x - kp.knot)
                } else {
                    bell.eval_right_offset(x - kp.knot)
                };
                match axis.interp_weights(x) {
                    Some((idx, w)) => {
                        let mut v = Complex64::ZERO;
                        for t in 0..4 {
                            v += w[t] * read(idx[t]);
                        }
                        (bw, v)
                    }
                    None => (0.0, Complex64::ZERO),
                }
            }
        }
    }
}

/// Orthogonal projection onto the brushlet span of one interval, applied to
/// a sampled univariate function:
/// `(P_I f)(ξ) = b(ξ) [ b(ξ) f(ξ) + b(2α-ξ) f(2α-ξ) - b(2α'-ξ) f(2α'-ξ) ]`.
pub fn project_interval(bell: &Bell, f: &GridFunction) -> Result<GridFunction> {
    if f.dim() != 1 {
        return Err(Error::InvalidArgument(
            "project_interval expects a univariate sampled function".into(),
        ));
    }
    project_axis(bell, f, 0)
}

/// Apply the interval projection along one axis of a multivariate grid.
pub fn project_axis(bell: &Bell, f: &GridFunction, dim: usize) -> Result<GridFunction> {
    let axis = f.axis(dim).clone();
    let plan = AxisProjection::new(&axis, bell)?;
    let mut out = GridFunction::zeros(f.axes().to_vec());
    let input = f.values();
    let lines = f.lines(dim);
    let out_values = out.values_mut();
    for (start, stride) in lines {
        plan.apply_line(&axis, bell, input, start, stride, out_values);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::SampledAxis;
    use approx::assert_relative_eq;
    use rand::RngExt;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn default_ramp() -> RampProfile {
        RampProfile::default()
    }

    #[test]
    fn ramp_endpoint_and_center_values() {
        let r = default_ramp();
        assert_eq!(r.eval(-1.0), 0.0);
        assert_eq!(r.eval(1.0), 1.0);
        assert_eq!(r.eval(-3.0), 0.0);
        assert_eq!(r.eval(5.0), 1.0);
        assert_relative_eq!(r.eval(0.0), 0.5_f64.sqrt(), max_relative = 1e-15);
    }

    #[test]
    fn ramp_matches_degree7_transition() {
        // S_3(t) = t^4 (35 - 84 t + 70 t^2 - 20 t^3).
        let r = default_ramp();
        for t in [0.0_f64, 0.13, 0.5, 0.77, 1.0] {
            let direct = t.powi(4) * (35.0 - 84.0 * t + 70.0 * t * t - 20.0 * t * t * t);
            assert_relative_eq!(
                r.smoothstep(t),
                direct,
                max_relative = 1e-13,
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn ramp_identity_many_points_and_orders() {
        for order in [1, 3, 5, 7] {
            let r = RampProfile::new(order).unwrap();
            let n = 10_000;
            for i in 0..n {
                let xi = -1.5 + 3.0 * (i as f64 + 0.5) / n as f64;
                let s = r.eval(xi).powi(2) + r.eval(-xi).powi(2);
                assert!((s - 1.0).abs() <= 1e-14, "order {order}, xi {xi}: {s}");
            }
        }
    }

    fn wide_bell() -> Bell {
        Bell::new(1.0, 4.0, 0.5, 0.75, default_ramp()).unwrap()
    }

    #[test]
    fn bell_plateau_and_support() {
        let b = wide_bell();
        assert_eq!(b.eval(2.0), 1.0);
        assert_eq!(b.eval(3.2), 1.0);
        assert_eq!(b.eval(0.4), 0.0);
        assert_eq!(b.eval(4.8), 0.0);
        assert_relative_eq!(b.eval(1.0), 0.5_f64.sqrt(), max_relative = 1e-14);
        assert!(Bell::new(0.0, 1.0, 0.6, 0.6, default_ramp()).is_err());
    }

    #[test]
    fn brushlet_value_at_left_knot() {
        let b = wide_bell();
        for n in [0u32, 3, 7] {
            let v = brushlet_freq_eval(&b, n, b.alpha());
            assert_relative_eq!(v, 1.0 / b.len().sqrt(), max_relative = 1e-13);
        }
        assert_eq!(brushlet_freq_eval(&b, 2, -1.0), 0.0);
    }

    #[test]
    fn brushlet_l2_normalized() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        for _ in 0..20 {
            let alpha = rng.random_range(-3.0..3.0);
            let len = rng.random_range(0.5..4.0);
            let el = rng.random_range(0.05..0.3) * len;
            let er = rng.random_range(0.05..0.3) * len;
            let n = rng.random_range(0..10u32);
            let b = Bell::new(alpha, alpha + len, el, er, default_ramp()).unwrap();
            let (lo, hi) = b.support();
            let lambda = 2.0 * len / (n as f64 + 1.0);
            let mut acc = 0.0;
            for (a, c) in quad::split_at_breakpoints(lo, hi, &b.breakpoints()) {
                for (x, w) in quad::panel_nodes(a, c, lambda.min(el.min(er)), 16) {
                    acc += w * brushlet_freq_eval(&b, n, x).powi(2);
                }
            }
            assert!((acc - 1.0).abs() < 1e-8, "norm^2 = {acc}");
        }
    }

    #[test]
    fn central_bell_inversion_at_origin() {
        let b = wide_bell();
        let g0 = central_bell_time_eval(&b, 0.0).unwrap();
        // Independent route: plain high-order quadrature of ĝ.
        let len = b.len();
        let lo = -b.eps_left() / len;
        let hi = 1.0 + b.eps_right() / len;
        let mut direct = 0.0;
        for (a, c) in
            quad::split_at_breakpoints(lo, hi, &[b.eps_left() / len, 1.0 - b.eps_right() / len])
        {
            direct += quad::integrate_panel(a, c, 32, |u| central_bell_freq_eval(&b, u));
        }
        direct /= (2.0 * PI).sqrt();
        assert!((g0.re - direct).abs() < 1e-9, "{} vs {direct}", g0.re);
        assert!(g0.im.abs() < 1e-9);
    }

    #[test]
    fn central_bell_decay() {
        let b = wide_bell();
        let mut sup = 0.0_f64;
        let mut x = 10.0;
        while x <= 100.0 {
            let g = central_bell_time_eval(&b, x).unwrap().norm();
            sup = sup.max(g * (1.0 + x).powi(3));
            x *= 1.6;
        }
        assert!(sup.is_finite() && sup > 0.0);
        // The weighted sup stays modest: the bell is C^3, so |g| decays
        // faster than (1+|x|)^{-3}.
        assert!(sup < 1e3, "weighted sup {sup}");
    }

    #[test]
    fn central_bell_depends_on_ratios_only() {
        // Intervals related by dilation share ε/|I| ratios, hence the bell.
        let b1 = Bell::new(0.0, 2.0, 0.3, 0.5, default_ramp()).unwrap();
        let b2 = Bell::new(5.0, 11.0, 0.9, 1.5, default_ramp()).unwrap();
        for x in [0.0, 0.7, 2.3, -4.1] {
            let g1 = central_bell_time_eval(&b1, x).unwrap();
            let g2 = central_bell_time_eval(&b2, x).unwrap();
            assert!((g1 - g2).norm() < 1e-9);
        }
    }

    fn axis_for(bells: &[&Bell], lo: f64, hi: f64, target: f64) -> SampledAxis {
        let mut knots = Vec::new();
        for b in bells {
            knots.push((b.alpha(), b.eps_left()));
            knots.push((b.alpha_prime(), b.eps_right()));
        }
        SampledAxis::knot_aligned(&knots, lo, hi, target).unwrap()
    }

    fn random_grid(axis: &SampledAxis, seed: u64) -> GridFunction {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut g = GridFunction::zeros(vec![axis.clone()]);
        for v in g.values_mut() {
            *v = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        }
        g
    }

    #[test]
    fn projection_fixes_own_brushlets() {
        let b = wide_bell();
        let axis = axis_for(&[&b], -1.0, 6.0, 0.05);
        for n in [0u32, 4] {
            let w = GridFunction::from_fn(vec![axis.clone()], |x| {
                Complex64::new(brushlet_freq_eval(&b, n, x[0]), 0.0)
            });
            let pw = project_interval(&b, &w).unwrap();
            assert!(pw.max_abs_diff(&w) < 1e-12);
        }
    }

    #[test]
    fn projection_identity_on_core_support() {
        // f supported in the plateau is untouched.
        let b = wide_bell();
        let axis = axis_for(&[&b], -1.0, 6.0, 0.02);
        let f = GridFunction::from_fn(vec![axis.clone()], |x| {
            let t = (x[0] - 2.5) / 0.5;
            Complex64::new(
                (-t * t).exp() * if (x[0] - 2.5).abs() < 0.6 { 1.0 } else { 0.0 },
                0.0,
            )
        });
        let pf = project_interval(&b, &f).unwrap();
        assert!(pf.max_abs_diff(&f) < 1e-12);
    }

    #[test]
    fn projection_idempotent_and_adjacent_annihilation() {
        let ramp = default_ramp();
        // Adjacent compatible intervals share the knot and its radius.
        let bi = Bell::new(0.0, 2.0, 0.4, 0.5, ramp.clone()).unwrap();
        let bj = Bell::new(2.0, 5.0, 0.5, 0.6, ramp.clone()).unwrap();
        let axis = axis_for(&[&bi, &bj], -1.0, 6.0, 0.05);
        let f = random_grid(&axis, 17);
        let pi = project_interval(&bi, &f).unwrap();
        let pii = project_interval(&bi, &pi).unwrap();
        assert!(pii.max_abs_diff(&pi) < 1e-13 * (1.0 + pi.max_abs()));
        let pj_pi = project_interval(&bj, &pi).unwrap();
        assert!(pj_pi.max_abs() < 1e-13, "P_J P_I = {}", pj_pi.max_abs());
        let pi_pj = project_interval(&bi, &project_interval(&bj, &f).unwrap()).unwrap();
        assert!(pi_pj.max_abs() < 1e-13);
    }

    #[test]
    fn projection_addition_rule_and_local_identity() {
        let ramp = default_ramp();
        let bi = Bell::new(0.0, 2.0, 0.4, 0.5, ramp.clone()).unwrap();
        let bj = Bell::new(2.0, 5.0, 0.5, 0.6, ramp.clone()).unwrap();
        let bu = Bell::new(0.0, 5.0, 0.4, 0.6, ramp.clone()).unwrap();
        let axis = axis_for(&[&bi, &bj], -1.0, 6.0, 0.05);
        let f = random_grid(&axis, 23);
        let mut sum = project_interval(&bi, &f).unwrap();
        let pj = project_interval(&bj, &f).unwrap();
        sum.axpy(Complex64::ONE, &pj);
        let pu = project_interval(&bu, &f).unwrap();
        assert!(sum.max_abs_diff(&pu) < 1e-13 * (1.0 + f.max_abs()));
        // (P_I + P_J) f = f on [α_I + ε_I, α'_J - ε'_J].
        for (i, &x) in axis.points().iter().enumerate() {
            if x >= 0.4 && x <= 4.4 {
                let d = (sum.values()[i] - f.values()[i]).norm();
                assert!(d < 1e-13, "local identity off by {d} at {x}");
            }
        }
    }

    #[test]
    fn projection_nested_identities() {
        // I = [-a, a), J = [-b, b), cutoffs < (b-a)/2: P_I P_J = P_J P_I = P_I.
        let ramp = default_ramp();
        let bi = Bell::new(-1.0, 1.0, 0.3, 0.3, ramp.clone()).unwrap();
        let bj = Bell::new(-3.0, 3.0, 0.4, 0.4, ramp.clone()).unwrap();
        let axis = axis_for(&[&bi, &bj], -4.0, 4.0, 0.05);
        let f = random_grid(&axis, 29);
        let pi = project_interval(&bi, &f).unwrap();
        let pj = project_interval(&bj, &f).unwrap();
        let pipj = project_interval(&bi, &pj).unwrap();
        let pjpi = project_interval(&bj, &pi).unwrap();
        let scale = 1.0 + f.max_abs();
        assert!(pipj.max_abs_diff(&pi) < 1e-13 * scale);
        assert!(pjpi.max_abs_diff(&pi) < 1e-13 * scale);
    }

    #[test]
    fn projection_on_uniform_axis_with_grid_knots() {
        // Knots at integers on a step-1/8 grid: reflections land on nodes.
        let ramp = default_ramp();
        let b = Bell::new(-1.0, 2.0, 0.25, 0.25, ramp).unwrap();
        let axis = SampledAxis::uniform(-4.0, 4.0, 65).unwrap();
        let f = random_grid(&axis, 31);
        let p = project_interval(&b, &f).unwrap();
        let pp = project_interval(&b, &p).unwrap();
        assert!(pp.max_abs_diff(&p) < 1e-13 * (1.0 + p.max_abs()));
    }

    #[test]
    fn projection_cubic_fallback_on_smooth_data() {
        // Knot at an irrational point of a uniform grid: cubic interpolation
        // carries the reflections; idempotence holds to interpolation order.
        let ramp = default_ramp();
        let k = 2.0_f64.sqrt();
        let b = Bell::new(k, k + 2.0, 0.3, 0.3, ramp).unwrap();
        let axis = SampledAxis::uniform(0.0, 5.0, 2001).unwrap();
        let f = GridFunction::from_fn(vec![axis.clone()], |x| {
            Complex64::new((-0.5 * (x[0] - 2.0).powi(2)).exp(), (0.9 * x[0]).sin())
        });
        let p = project_interval(&b, &f).unwrap();
        let pp = project_interval(&b, &p).unwrap();
        assert!(pp.max_abs_diff(&p) < 5e-8, "{}", pp.max_abs_diff(&p));
    }

    #[test]
    fn projection_requires_coverage() {
        let b = wide_bell();
        let axis = SampledAxis::uniform(0.0, 2.0, 33).unwrap();
        let f = GridFunction::zeros(vec![axis]);
        assert!(matches!(
            project_interval(&b, &f),
            Err(Error::InsufficientCoverage(_))
        ));
    }

    #[test]
    fn univariate_gram_over_a_moderate_covering() {
        // Adjacent compatible intervals of moderate length ratio; the whole
        // family {w_{I,n}, n <= 12} must be orthonormal under quadrature.
        let ramp = default_ramp();
        let knots = [-2.0, -0.5, 0.6, 2.1, 4.0, 6.5];
        let eps = [0.3, 0.35, 0.25, 0.4, 0.5, 0.45];
        let bells: Vec<Bell> = knots
            .windows(2)
            .enumerate()
            .map(|(i, w)| Bell::new(w[0], w[1], eps[i], eps[i + 1], ramp.clone()).unwrap())
            .collect();
        let n_hi = 12u32;
        let mut worst = 0.0_f64;
        for (ia, ba) in bells.iter().enumerate() {
            for (ib, bb) in bells.iter().enumerate().skip(ia) {
                let (alo, ahi) = ba.support();
                let (blo, bhi) = bb.support();
                let lo = alo.max(blo);
                let hi = ahi.min(bhi);
                if hi <= lo {
                    continue;
                }
                let mut breaks = ba.breakpoints().to_vec();
                breaks.extend_from_slice(&bb.breakpoints());
                for na in 0..=n_hi {
                    for nb in 0..=n_hi {
                        if ia == ib && nb < na {
                            continue;
                        }
                        let rate = PI * (na as f64 + 0.5) / ba.len()
                            + PI * (nb as f64 + 0.5) / bb.len();
                        let piece = (2.0 * PI / rate * 2.0)
                            .min(eps.iter().cloned().fold(f64::INFINITY, f64::min));
                        let mut acc = 0.0;
                        for (a, b) in quad::split_at_breakpoints(lo, hi, &breaks) {
                            for (x, w) in quad::panel_nodes(a, b, piece, 16) {
                                acc += w
                                    * brushlet_freq_eval(ba, na, x)
                                    * brushlet_freq_eval(bb, nb, x);
                            }
                        }
                        let target = if ia == ib && na == nb { 1.0 } else { 0.0 };
                        worst = worst.max((acc - target).abs());
                    }
                }
            }
        }
        assert!(worst < 1e-8, "univariate Gram deviation {worst}");
    }
}
