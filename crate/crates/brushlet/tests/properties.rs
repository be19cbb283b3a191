//! Property-based invariants.

use brushlet::anisotropy::{bracket, dilate, quasi_norm, quasi_norm_inf, Anisotropy};
use brushlet::covering::{Covering, CoveringSpec};
use brushlet::seqnorm::{lorentz_norm, m_norm, NormParams};
use brushlet::tensor_basis::BrushIndex;
use brushlet::transform::CoefficientSet;
use num_complex::Complex64;
use proptest::prelude::*;

fn aniso_strategy(d: usize) -> impl Strategy<Value = Anisotropy> {
    prop::collection::vec(1.0..3.0f64, d).prop_map(|a| Anisotropy::new(a).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn quasi_norm_is_homogeneous(
        aniso in aniso_strategy(3),
        x in prop::collection::vec(-100.0..100.0f64, 3),
        t in 0.01..50.0f64,
    ) {
        let q = quasi_norm(&x, &aniso);
        prop_assume!(q > 1e-9);
        let scaled = dilate(t, &aniso, &x).unwrap();
        let lhs = quasi_norm(&scaled, &aniso);
        prop_assert!((lhs - t * q).abs() <= 1e-10 * t * q);
        // The defining residual: |q^{-a} x| = 1.
        let unit = dilate(1.0 / q, &aniso, &x).unwrap();
        let r: f64 = unit.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!((r - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn norm_equivalence_bounds(
        aniso in aniso_strategy(3),
        x in prop::collection::vec(-100.0..100.0f64, 3),
    ) {
        let q = quasi_norm(&x, &aniso);
        let qi = quasi_norm_inf(&x, &aniso);
        prop_assume!(qi > 1e-12);
        let ratio = q / qi;
        prop_assert!(ratio >= 1.0 - 1e-12 && ratio <= 3.0 + 1e-12);
        // The bracket dominates both 1 and the quasi-norm.
        let b = bracket(&x, &aniso);
        prop_assert!(b >= 1.0 - 1e-12);
        prop_assert!(b >= q * (1.0 - 1e-12) || q <= 1.0);
    }

    #[test]
    fn lorentz_norm_is_permutation_invariant(
        mut values in prop::collection::vec(-10.0..10.0f64, 2..40),
        tau in 0.3..3.0f64,
        r in 0.3..3.0f64,
        swap_a in any::<prop::sample::Index>(),
        swap_b in any::<prop::sample::Index>(),
    ) {
        let before = lorentz_norm(&values, tau, r);
        let (i, j) = (swap_a.index(values.len()), swap_b.index(values.len()));
        values.swap(i, j);
        prop_assert_eq!(before, lorentz_norm(&values, tau, r));
        // tau = r = p collapses to plain ℓ_p.
        let p = tau;
        let lp: f64 = values.iter().map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p);
        let collapsed = lorentz_norm(&values, p, p);
        prop_assert!((collapsed - lp).abs() <= 1e-10 * (1.0 + lp));
    }

    #[test]
    fn m_norm_is_absolutely_homogeneous(
        scale in 0.01..100.0f64,
        seeds in prop::collection::vec((0..3u32, 1..8usize, 0..4u32, -1.0..1.0f64), 1..24),
        s in -1.0..1.0f64,
        p in 0.5..3.0f64,
        q in 0.5..3.0f64,
    ) {
        let alpha = 1.0 - 1.0 / 1.1;
        let aniso = Anisotropy::new(vec![3.0_f64.sqrt(), 1.5]).unwrap();
        let covering = Covering::build(CoveringSpec::new(alpha, aniso).unwrap(), 3).unwrap();
        let mut entries = Vec::new();
        let mut seen = std::collections::BTreeSet::new();
        for (j, k, n, v) in seeds {
            let layer = covering.layer(j).unwrap();
            let k = 1 + (k - 1) % layer.len();
            let idx = BrushIndex::new(j, k, vec![n, n / 2]);
            if seen.insert(idx.clone()) {
                entries.push((idx, Complex64::new(v, 0.3 * v)));
            }
        }
        let set = CoefficientSet::new(&covering, entries).unwrap();
        let params = NormParams::new(s, p, q, covering.spec()).unwrap();
        let base = m_norm(&covering, &set, &params).unwrap();
        let scaled_set = CoefficientSet::new(
            &covering,
            set.entries()
                .iter()
                .map(|(i, c)| (i.clone(), scale * c))
                .collect(),
        )
        .unwrap();
        let scaled = m_norm(&covering, &scaled_set, &params).unwrap();
        prop_assert!((scaled - scale * base).abs() <= 1e-10 * (1.0 + scale * base));
    }
}
