//! Anisotropic quasi-norm, max-form norm, bracket, and dilation.
//!
//! All geometry in this crate is measured against a fixed anisotropy
//! `a ∈ [1,∞)^d`. The dilation `t^a x = (t^{a_1} x_1, …, t^{a_d} x_d)`
//! replaces the usual scalar scaling, and the quasi-norm `|x|_a` is the
//! unique `t > 0` with `|t^{-a} x| = 1` (Euclidean norm). Everything else
//! here is derived from those two definitions.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// A fixed anisotropy vector with cached derived quantities.
///
/// Invariants: every exponent is `>= 1` and finite, so the homogeneous
/// dimension `nu = sum(a_i)` satisfies `nu >= d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Anisotropy {
    a: Vec<f64>,
    nu: f64,
    gamma_min: f64,
    gamma_max: f64,
}

impl Anisotropy {
    pub fn new(a: Vec<f64>) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::InvalidAnisotropy("empty exponent vector".into()));
        }
        for (i, &ai) in a.iter().enumerate() {
            if !ai.is_finite() || ai < 1.0 {
                return Err(Error::InvalidAnisotropy(format!(
                    "exponent a[{i}] = {ai} must be finite and >= 1"
                )));
            }
        }
        let nu = a.iter().sum();
        let gamma_min = a.iter().cloned().fold(f64::INFINITY, f64::min);
        let gamma_max = a.iter().cloned().fold(0.0_f64, f64::max);
        Ok(Self {
            a,
            nu,
            gamma_min,
            gamma_max,
        })
    }

    /// Isotropic case `a = (1, …, 1)`.
    pub fn isotropic(d: usize) -> Self {
        Self::new(vec![1.0; d]).expect("isotropic exponents are valid")
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn exponents(&self) -> &[f64] {
        &self.a
    }

    /// Homogeneous dimension `nu = a_1 + … + a_d`.
    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn gamma_min(&self) -> f64 {
        self.gamma_min
    }

    pub fn gamma_max(&self) -> f64 {
        self.gamma_max
    }

    /// The extended anisotropy `(1, a_1, …, a_d)` used by the bracket.
    pub fn extended(&self) -> Anisotropy {
        let mut ext = Vec::with_capacity(self.a.len() + 1);
        ext.push(1.0);
        ext.extend_from_slice(&self.a);
        Anisotropy::new(ext).expect("extension preserves validity")
    }
}

/// Componentwise anisotropic dilation `t^a x`.
///
/// Rejects non-positive `t`; the dilation group is only defined for `t > 0`.
pub fn dilate(t: f64, aniso: &Anisotropy, x: &[f64]) -> Result<Vec<f64>> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "dilation parameter t = {t} must be positive and finite"
        )));
    }
    check_dim(aniso, x)?;
    Ok(x.iter()
        .zip(aniso.exponents())
        .map(|(&xi, &ai)| t.powf(ai) * xi)
        .collect())
}

/// Max-form norm `|x|_{a,∞} = max_i |x_i|^{1/a_i}`.
pub fn quasi_norm_inf(x: &[f64], aniso: &Anisotropy) -> f64 {
    x.iter()
        .zip(aniso.exponents())
        .map(|(&xi, &ai)| xi.abs().powf(1.0 / ai))
        .fold(0.0, f64::max)
}

/// Anisotropic quasi-norm `|x|_a`: the unique `t > 0` with `|t^{-a} x| = 1`,
/// and `0` for `x = 0`.
///
/// The solver normalizes by `m = |x|_{a,∞}` so the residual
/// `F(s) = sum_i (x_i / m^{a_i})^2 s^{-2 a_i}` has all terms in `[0,1]` and a
/// root `s` in `[1, d^{1/(2 gamma_min)}]`. Newton iteration runs on
/// `G(u) = log F(e^u)`, which is convex and strictly decreasing, so the
/// iteration converges monotonically from `u = 0`. The normalization keeps
/// every intermediate bounded; overflow of `t^{a_i}` cannot occur.
pub fn quasi_norm(x: &[f64], aniso: &Anisotropy) -> f64 {
    let m = quasi_norm_inf(x, aniso);
    if m == 0.0 || !m.is_finite() {
        return m;
    }
    // y_i = x_i / m^{a_i}; all |y_i| <= 1 with equality in at least one slot.
    let y2: Vec<f64> = x
        .iter()
        .zip(aniso.exponents())
        .map(|(&xi, &ai)| {
            let yi = xi.abs().powf(1.0 / ai) / m;
            yi.powf(2.0 * ai)
        })
        .collect();
    let mut u = 0.0_f64;
    for _ in 0..64 {
        let mut f = 0.0;
        let mut fw = 0.0;
        for (&y2i, &ai) in y2.iter().zip(aniso.exponents()) {
            let term = y2i * (-2.0 * ai * u).exp();
            f += term;
            fw += ai * term;
        }
        if f <= 0.0 {
            break;
        }
        let g = f.ln();
        // G'(u) = -2 * (weighted mean of a_i) ∈ [-2 gamma_max, -2 gamma_min].
        let gp = -2.0 * fw / f;
        let step = g / gp;
        u -= step;
        if step.abs() <= 1e-16 * (1.0 + u.abs()) {
            break;
        }
    }
    m * u.exp()
}

/// Anisotropic bracket `⟨x⟩ = |(1, x)|_{(1, a)}`, always `>= 1`.
pub fn bracket(x: &[f64], aniso: &Anisotropy) -> f64 {
    let mut ext_x = Vec::with_capacity(x.len() + 1);
    ext_x.push(1.0);
    ext_x.extend_from_slice(x);
    quasi_norm(&ext_x, &aniso.extended())
}

/// Volume of the anisotropic unit ball `B_a(0,1) = {x : |x|_a < 1}`.
///
/// In anisotropic polar coordinates `x = r^a u`, `dx = r^{nu-1} (sum a_i u_i^2) dσ(u) dr`,
/// so the volume integrates to `(1/nu) * nu * ω_{d-1}/d = ω_{d-1}/d`: the
/// Euclidean unit-ball volume, independent of the anisotropy.
pub fn unit_ball_volume(d: usize) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        2 => std::f64::consts::PI,
        _ => unit_ball_volume(d - 2) * 2.0 * std::f64::consts::PI / d as f64,
    }
}

fn check_dim(aniso: &Anisotropy, x: &[f64]) -> Result<()> {
    if aniso.dim() != x.len() {
        return Err(Error::InvalidArgument(format!(
            "dimension mismatch: anisotropy has d = {}, vector has d = {}",
            aniso.dim(),
            x.len()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::RngExt;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    /// Independent oracle: bracketing bisection on the strictly decreasing
    /// map t ↦ |t^{-a} x|.
    pub(crate) fn quasi_norm_bisect(x: &[f64], aniso: &Anisotropy) -> f64 {
        let norm_at = |t: f64| -> f64 {
            x.iter()
                .zip(aniso.exponents())
                .map(|(&xi, &ai)| (xi / t.powf(ai)).powi(2))
                .sum::<f64>()
                .sqrt()
        };
        if x.iter().all(|&v| v == 0.0) {
            return 0.0;
        }
        let mut lo = 1e-12;
        let mut hi = 1e12;
        while norm_at(lo) < 1.0 {
            lo *= 0.5;
        }
        while norm_at(hi) > 1.0 {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if norm_at(mid) > 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn dilate_identity_and_scaling() {
        let a = Anisotropy::isotropic(2);
        let x = [3.0, 4.0];
        assert_eq!(dilate(1.0, &a, &x).unwrap(), vec![3.0, 4.0]);
        assert_eq!(dilate(2.0, &a, &x).unwrap(), vec![6.0, 8.0]);

        let a21 = Anisotropy::new(vec![2.0, 1.0]).unwrap();
        let r = dilate(4.0, &a21, &[1.0, 1.0]).unwrap();
        assert_relative_eq!(r[0], 16.0, max_relative = 1e-15);
        assert_relative_eq!(r[1], 4.0, max_relative = 1e-15);
    }

    #[test]
    fn dilate_rejects_nonpositive_t() {
        let a = Anisotropy::isotropic(2);
        assert!(dilate(0.0, &a, &[1.0, 1.0]).is_err());
        assert!(dilate(-1.0, &a, &[1.0, 1.0]).is_err());
    }

    #[test]
    fn quasi_norm_euclidean_case() {
        let a = Anisotropy::isotropic(2);
        assert_relative_eq!(quasi_norm(&[3.0, 4.0], &a), 5.0, max_relative = 1e-13);
    }

    #[test]
    fn quasi_norm_single_coordinate() {
        let a = Anisotropy::new(vec![2.0, 1.0]).unwrap();
        assert_relative_eq!(quasi_norm(&[4.0, 0.0], &a), 2.0, max_relative = 1e-13);
        assert_eq!(quasi_norm(&[0.0, 0.0], &a), 0.0);
    }

    #[test]
    fn quasi_norm_matches_bisection_oracle() {
        // Root of u^2 + u = 1 with u = t^{-2}: t ≈ 1.27202.
        let a = Anisotropy::new(vec![2.0, 1.0]).unwrap();
        let x = [1.0, 1.0];
        let expect = quasi_norm_bisect(&x, &a);
        assert_relative_eq!(expect, 1.2720196495140690, max_relative = 1e-12);
        assert_relative_eq!(quasi_norm(&x, &a), expect, max_relative = 1e-13);
    }

    #[test]
    fn quasi_norm_inf_values() {
        let a21 = Anisotropy::new(vec![2.0, 1.0]).unwrap();
        assert_relative_eq!(quasi_norm_inf(&[4.0, 0.0], &a21), 2.0);
        let a31 = Anisotropy::new(vec![3.0, 1.0]).unwrap();
        assert_relative_eq!(quasi_norm_inf(&[8.0, 2.0], &a31), 2.0);
        assert_eq!(quasi_norm_inf(&[0.0, 0.0], &a31), 0.0);
    }

    #[test]
    fn bracket_values() {
        let a = Anisotropy::isotropic(2);
        assert_relative_eq!(bracket(&[0.0, 0.0], &a), 1.0, max_relative = 1e-13);
        assert_relative_eq!(
            bracket(&[3.0, 4.0], &a),
            26.0_f64.sqrt(),
            max_relative = 1e-13
        );
        // Root of u^2 + 2u = 1 with u = t^{-2}: t ≈ 1.55377.
        let a21 = Anisotropy::new(vec![2.0, 1.0]).unwrap();
        let ext = a21.extended();
        let expect = quasi_norm_bisect(&[1.0, 1.0, 1.0], &ext);
        assert_relative_eq!(expect, 1.5537739740300374, max_relative = 1e-10);
        assert_relative_eq!(bracket(&[1.0, 1.0], &a21), expect, max_relative = 1e-13);
    }

    #[test]
    fn homogeneity_and_root_residual() {
        let aniso = Anisotropy::new(vec![1.7320508075688772, 1.5]).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(31);
        for _ in 0..1000 {
            let x: Vec<f64> = (0..2).map(|_| rng.random_range(-50.0..50.0)).collect();
            let t: f64 = rng.random_range(0.01..100.0);
            let q = quasi_norm(&x, &aniso);
            if q == 0.0 {
                continue;
            }
            let scaled = dilate(t, &aniso, &x).unwrap();
            let lhs = quasi_norm(&scaled, &aniso);
            assert!(
                (lhs - t * q).abs() <= 1e-10 * t * q,
                "homogeneity violated: {lhs} vs {}",
                t * q
            );
            let unit = dilate(1.0 / q, &aniso, &x).unwrap();
            let r: f64 = unit.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((r - 1.0).abs() <= 1e-12, "root residual {r}");
        }
    }

    #[test]
    fn norm_equivalence_ratio_bounds() {
        let d = 2;
        let aniso = Anisotropy::new(vec![2.0, 1.0]).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(32);
        let mut lo = f64::INFINITY;
        let mut hi = 0.0_f64;
        for _ in 0..10_000 {
            let x: Vec<f64> = (0..d).map(|_| rng.random_range(-100.0..100.0)).collect();
            let q = quasi_norm(&x, &aniso);
            let qi = quasi_norm_inf(&x, &aniso);
            if qi == 0.0 {
                continue;
            }
            let ratio = q / qi;
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
        assert!(lo >= 1.0 / d as f64, "lower ratio {lo}");
        assert!(hi <= d as f64, "upper ratio {hi}");
        // d = 1: the two norms agree exactly.
        let a1 = Anisotropy::new(vec![1.5]).unwrap();
        for x in [[0.3], [7.0], [-2.5]] {
            assert_relative_eq!(
                quasi_norm(&x, &a1),
                quasi_norm_inf(&x, &a1),
                max_relative = 1e-13
            );
        }
    }

    #[test]
    fn bracket_equivalence_and_submultiplicativity() {
        let aniso = Anisotropy::new(vec![1.7320508075688772, 1.5]).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(33);
        let mut ratio_lo = f64::INFINITY;
        let mut ratio_hi = 0.0_f64;
        let mut sup_small = 0.0_f64;
        let mut sup_large = 0.0_f64;
        for i in 0..10_000 {
            let x: Vec<f64> = (0..2).map(|_| rng.random_range(-40.0..40.0)).collect();
            let y: Vec<f64> = (0..2).map(|_| rng.random_range(-40.0..40.0)).collect();
            let bx = bracket(&x, &aniso);
            let ratio = bx / (1.0 + quasi_norm(&x, &aniso));
            ratio_lo = ratio_lo.min(ratio);
            ratio_hi = ratio_hi.max(ratio);
            let s: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
            let sub = bracket(&s, &aniso) / (bx * bracket(&y, &aniso));
            if i < 5000 {
                sup_small = sup_small.max(sub);
            }
            sup_large = sup_large.max(sub);
        }
        assert!(ratio_lo > 0.1 && ratio_hi < 10.0, "{ratio_lo} {ratio_hi}");
        assert!(sup_large.is_finite());
        // Enlarging the sample can only grow the observed supremum.
        assert!(sup_large >= sup_small);
    }

    #[test]
    fn bracket_tail_integrable() {
        // Radially refined quadrature of ⟨x⟩^{-tau}, tau = nu + 1, over the
        // growing anisotropic boxes {|x_i| <= B^{a_i}}: each dyadic shell is
        // sampled at a resolution proportional to its extent. The cumulative
        // estimates must settle (successive values differ by < 1e-3).
        let aniso = Anisotropy::new(vec![2.0, 1.0]).unwrap();
        let tau = aniso.nu() + 1.0;
        let shell = |b_lo: f64, b_hi: f64| -> f64 {
            let ext: Vec<f64> = aniso.exponents().iter().map(|&a| b_hi.powf(a)).collect();
            let inner: Vec<f64> = aniso.exponents().iter().map(|&a| b_lo.powf(a)).collect();
            let n = 192;
            let hx = 2.0 * ext[0] / n as f64;
            let hy = 2.0 * ext[1] / n as f64;
            let mut acc = 0.0;
            for i in 0..n {
                let x = -ext[0] + (i as f64 + 0.5) * hx;
                for jj in 0..n {
                    let y = -ext[1] + (jj as f64 + 0.5) * hy;
                    if b_lo > 0.0 && x.abs() < inner[0] && y.abs() < inner[1] {
                        continue;
                    }
                    acc += bracket(&[x, y], &aniso).powf(-tau) * hx * hy;
                }
            }
            acc
        };
        let mut cumulative = shell(0.0, 1.0);
        let mut values = vec![cumulative];
        let mut b = 1.0;
        for _ in 0..14 {
            cumulative += shell(b, 2.0 * b);
            values.push(cumulative);
            b *= 2.0;
        }
        let n = values.len();
        assert!(
            values[n - 1] - values[n - 2] < 1e-3,
            "tail not settled: {} vs {}",
            values[n - 2],
            values[n - 1]
        );
        // Monotone growth toward the limit.
        assert!(values.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn unit_ball_volume_matches_quadrature() {
        // Counting oracle for |B_a(0,1)|: midpoint grid over [-1,1]^2.
        let aniso = Anisotropy::new(vec![2.0, 1.0]).unwrap();
        let n = 2000;
        let h = 2.0 / n as f64;
        let mut acc = 0.0;
        for i in 0..n {
            let x = -1.0 + (i as f64 + 0.5) * h;
            for jj in 0..n {
                let y = -1.0 + (jj as f64 + 0.5) * h;
                if quasi_norm(&[x, y], &aniso) < 1.0 {
                    acc += h * h;
                }
            }
        }
        assert_relative_eq!(acc, unit_ball_volume(2), max_relative = 2e-3);
        assert_relative_eq!(unit_ball_volume(3), 4.0 * std::f64::consts::PI / 3.0);
    }
}
