//! Gauss-Legendre quadrature with panel splitting.
//!
//! Integrands in this crate are piecewise smooth with known breakpoints
//! (bell transition edges) and known oscillation scales (the cosine index),
//! so fixed-order rules on short enough panels reach near machine accuracy.

use std::sync::OnceLock;

const MAX_ORDER: usize = 64;

/// Nodes and weights of the n-point rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// Newton iteration on the Legendre polynomial P_n; standard
    /// Chebyshev-angle initial guesses converge in a few steps.
    fn compute(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut pp = 0.0;
            for _ in 0..100 {
                // Evaluate P_n(x) and P_n'(x) by the three-term recurrence.
                let mut p0 = 1.0;
                let mut p1 = x;
                for k in 2..=n {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                pp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / pp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            let w = 2.0 / ((1.0 - x * x) * pp * pp);
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }
}

/// Cached rule of the given order (1..=64).
pub fn gauss_rule(order: usize) -> &'static GaussRule {
    static CACHE: OnceLock<Vec<OnceLock<GaussRule>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| (0..=MAX_ORDER).map(|_| OnceLock::new()).collect());
    let order = order.clamp(1, MAX_ORDER);
    cache[order].get_or_init(|| GaussRule::compute(order))
}

/// Integrate `f` over `[a, b]` with an `order`-point rule.
pub fn integrate_panel<F: FnMut(f64) -> f64>(a: f64, b: f64, order: usize, mut f: F) -> f64 {
    let rule = gauss_rule(order);
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut acc = 0.0;
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        acc += w * f(c + h * x);
    }
    acc * h
}

/// Quadrature nodes and weights over `[a, b]` split so that no piece is
/// longer than `max_len`, each piece carrying `order` points.
pub fn panel_nodes(a: f64, b: f64, max_len: f64, order: usize) -> Vec<(f64, f64)> {
    if b <= a {
        return Vec::new();
    }
    let pieces = ((b - a) / max_len).ceil().max(1.0) as usize;
    let h = (b - a) / pieces as f64;
    let rule = gauss_rule(order);
    let mut out = Vec::with_capacity(pieces * order);
    for p in 0..pieces {
        let lo = a + p as f64 * h;
        let c = lo + 0.5 * h;
        let half = 0.5 * h;
        for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
            out.push((c + half * x, w * half));
        }
    }
    out
}

/// Split `[lo, hi]` at the interior breakpoints, dropping empty pieces.
pub fn split_at_breakpoints(lo: f64, hi: f64, breaks: &[f64]) -> Vec<(f64, f64)> {
    let mut pts: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|&x| x > lo && x < hi)
        .collect();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    let mut out = Vec::with_capacity(pts.len() + 1);
    let mut prev = lo;
    for x in pts {
        if x > prev {
            out.push((prev, x));
            prev = x;
        }
    }
    if hi > prev {
        out.push((prev, hi));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        // n-point Gauss is exact through degree 2n-1.
        let v = integrate_panel(-1.0, 1.0, 8, |x| x.powi(14));
        assert_relative_eq!(v, 2.0 / 15.0, max_relative = 1e-14);
        let v = integrate_panel(0.0, 3.0, 4, |x| 5.0 * x.powi(7) - x);
        assert_relative_eq!(v, 5.0 * 3.0_f64.powi(8) / 8.0 - 4.5, max_relative = 1e-13);
    }

    #[test]
    fn known_nodes_order_5() {
        let r = gauss_rule(5);
        assert_relative_eq!(r.nodes[4], 0.9061798459386640, max_relative = 1e-14);
        assert_relative_eq!(r.weights[2], 128.0 / 225.0, max_relative = 1e-14);
    }

    #[test]
    fn oscillatory_with_panels() {
        // ∫_0^{2π} cos(40 x) x dx with wavelength-limited panels.
        let nodes = panel_nodes(0.0, 2.0 * std::f64::consts::PI, 0.1, 16);
        let acc: f64 = nodes.iter().map(|&(x, w)| w * (40.0 * x).cos() * x).sum();
        assert!(acc.abs() < 1e-12, "got {acc}");
    }

    #[test]
    fn breakpoint_split() {
        let parts = split_at_breakpoints(0.0, 1.0, &[0.25, 0.5, 1.5, -0.5, 0.25]);
        assert_eq!(parts, vec![(0.0, 0.25), (0.25, 0.5), (0.5, 1.0)]);
    }
}
