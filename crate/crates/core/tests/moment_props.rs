use argprin_core::contour::ClosedCurve;
use argprin_core::moments::{complex_moments, disc_extension, dbar_planar, moments_equiv_extension, PlanarGrid};
use argprin_core::scalar::cis;
use argprin_core::C64;
use proptest::prelude::*;

fn complex_in(r: f64) -> impl Strategy<Value = C64> {
    (-r..r, -r..r).prop_map(|(a, b)| C64::new(a, b))
}

fn poly() -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec(complex_in(1.0), 1..=6)
}

fn horner(c: &[C64], z: C64) -> C64 {
    c.iter().rev().fold(C64::new(0.0, 0.0), |acc, a| acc * z + a)
}

fn circle(center: C64, r: f64) -> ClosedCurve<f64> {
    ClosedCurve::sample_planar(128, move |p: f64| center + cis(p) * r).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn holomorphic_data_has_vanishing_moments(p in poly(), center in complex_in(0.5), r in 0.3..1.5f64) {
        let c = circle(center, r);
        let f: Vec<C64> = c.coord(0).iter().map(|&z| horner(&p, z) * (z * 0.5).exp()).collect();
        let m = complex_moments(&c, &f, 6).unwrap();
        prop_assert!(m.max_abs < 1e-10, "max moment {}", m.max_abs);
        prop_assert!(disc_extension(&c, &f).unwrap().extends);
    }

    #[test]
    fn moments_and_extension_agree(p in poly(), q in poly(), m in 1u32..4, center in complex_in(0.5), r in 0.3..1.5f64) {
        prop_assume!(q.iter().any(|a| a.norm() > 0.1));
        let c = circle(center, r);
        let f: Vec<C64> = c.coord(0).iter().map(|&z| horner(&p, z) + horner(&q, z) * z.conj().powu(m)).collect();
        let e = moments_equiv_extension(&c, &f, 8).unwrap();
        prop_assert!(e.consistent);
        let g: Vec<C64> = c.coord(0).iter().map(|&z| horner(&p, z)).collect();
        let h = moments_equiv_extension(&c, &g, 8).unwrap();
        prop_assert!(h.consistent && h.moments.vanish && h.extension.extends);
    }

    #[test]
    fn dbar_of_holomorphic_polynomials_is_small(p in poly(), a in complex_in(1.0)) {
        let g = PlanarGrid::square(-1.0, 1.0, 41);
        let v: Vec<C64> = g.points().into_iter().map(|z| horner(&p, z) + a * (z * 0.7).sin()).collect();
        let r = dbar_planar(&g, &v, None).unwrap();
        let worst = r.iter().map(|s| s.value).fold(0.0, f64::max);
        prop_assert!(worst < 1e-6, "max |∂̄f| = {worst}");
    }

    #[test]
    fn dbar_recovers_the_antiholomorphic_part(p in poly(), q in poly()) {
        // ∂̄(p(z) + q(z)·z̄) = q(z); the stencil error is O(h⁴) here since nothing cancels.
        let worst = |count: usize| {
            let g = PlanarGrid::square(-1.0, 1.0, count);
            let pts = g.points();
            let v: Vec<C64> = pts.iter().map(|&z| horner(&p, z) + horner(&q, z) * z.conj()).collect();
            dbar_planar(&g, &v, None)
                .unwrap()
                .iter()
                .filter(|s| pts[s.index].norm() <= 0.8)
                .map(|s| (s.value - horner(&q, pts[s.index]).norm()).abs())
                .fold(0.0, f64::max)
        };
        let (coarse, fine) = (worst(41), worst(81));
        prop_assert!(coarse < 1e-3, "error {coarse}");
        prop_assert!(fine <= coarse / 8.0 + 1e-12, "{coarse} → {fine}");
    }
}
