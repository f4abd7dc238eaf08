use maxsurf::elliptic::{complete_k, incomplete_f, jacobi_sn_cn_dn, Modulus};
use maxsurf::families::{cncn, snsn, sncn};
use maxsurf::genmat::{act_raw, from_factors, is_generating, FactorVectors, GeneratingMatrix};
use maxsurf::profiles::ProfileInit;
use maxsurf::surface::{ImplicitGraph, ImplicitSurface, Surface};
use proptest::prelude::*;

fn factor() -> impl Strategy<Value = f64> {
    prop_oneof![-3.0..3.0f64, Just(0.0)]
}

fn factors() -> impl Strategy<Value = FactorVectors> {
    (factor(), factor(), factor(), factor(), factor(), factor())
        .prop_filter("nonzero factors", |(a, b, c, d, e, f)| {
            a * a + b * b + c * c > 1e-2 && d * d + e * e + f * f > 1e-2
        })
        .prop_map(|(p1, q1, r1, p2, q2, r2)| FactorVectors { p1, q1, r1, p2, q2, r2 })
}

fn rel(a: f64, b: f64, scale: f64) -> f64 {
    (a - b).abs() / scale.max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn jacobi_identities(k in 0.0..0.999f64, t in -20.0..20.0f64) {
        let m = Modulus::new(k).unwrap();
        let (s, c, d) = jacobi_sn_cn_dn(t, m);
        prop_assert!((s * s + c * c - 1.0).abs() <= 1e-12);
        prop_assert!((d * d + k * k * s * s - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn incomplete_integral_inverts_sn(k in 0.01..0.99f64, frac in 0.0..0.999f64) {
        let m = Modulus::new(k).unwrap();
        let t = frac * complete_k(m).unwrap();
        let s = jacobi_sn_cn_dn(t, m).0;
        prop_assert!((incomplete_f(s, m).unwrap() - t).abs() <= 1e-9);
    }

    #[test]
    fn factor_products_generate(f in factors()) {
        let g = from_factors(f).unwrap();
        prop_assert!(is_generating(g.entries(), 1e-12));
        let theta = g.theta().unwrap();
        let s = g.scale().powi(3);
        for p in g.row_products().into_iter().chain(g.column_products()) {
            prop_assert!(rel(p, theta, s) <= 1e-12);
        }
    }

    #[test]
    fn action_preserves_invariants(f in factors(), l1 in 0.1..10.0f64, l2 in 0.1..10.0f64) {
        let g = from_factors(f).unwrap();
        let h = g.act(l1, l2).unwrap();
        prop_assert!(is_generating(&act_raw(l1, l2, g.entries()), 1e-12));
        let (t0, t1) = (g.theta().unwrap(), h.theta().unwrap());
        prop_assert!(rel(t0, t1, t0.abs().max(g.scale().powi(3) * 1e-6)) <= 1e-10);
        let (d0, d1) = (g.discriminant().unwrap(), h.discriminant().unwrap());
        prop_assert!(rel(d0, d1, d0.abs().max(g.scale().powi(2) * 1e-6)) <= 1e-10);
        // sparse matrices have several equivalences, so check the recovered one acts correctly
        let (m1, m2) = g.equivalence(&h).unwrap();
        let image = act_raw(m1, m2, g.entries());
        for (r, s) in image.iter().flatten().zip(h.entries().iter().flatten()) {
            prop_assert!(rel(*r, *s, h.scale()) <= 1e-9);
        }
    }
}

fn product(s: &Surface) -> &ImplicitSurface {
    s.as_product().unwrap()
}

const TOP: ProfileInit = ProfileInit::AtTurningPoint { delta: -1.0 };

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // rescaling by the action rescales the three profiles and leaves u unchanged
    #[test]
    fn equivalent_matrices_give_the_same_graph(
        l1 in 0.2..5.0f64, l2 in 0.2..5.0f64, fx in 0.05..0.95f64, fy in 0.05..0.95f64, which in 0usize..3
    ) {
        let (entry, inits) = match which {
            0 => (snsn(0.8, 0.8).unwrap(), [ProfileInit::AtZero; 3]),
            1 => (sncn(0.8, 0.8).unwrap(), [ProfileInit::AtZero, TOP, TOP]),
            _ => (cncn(0.8, 0.8).unwrap(), [TOP, TOP, ProfileInit::AtZero]),
        };
        let s = product(&entry.surface);
        let g = s.generating_matrix().act(l1, l2).unwrap();
        let t = ImplicitSurface::build_from_matrix(&g, Some(inits)).unwrap();
        let w = entry.window;
        let (x, y) = (w.x0 + fx * (w.x1 - w.x0), w.y0 + fy * (w.y1 - w.y0));
        let (a, b) = (s.evaluate(x, y, None), t.evaluate(x, y, None));
        prop_assert_eq!(a.is_ok(), b.is_ok());
        if let (Ok(a), Ok(b)) = (a, b) {
            prop_assert!((a.z - b.z).abs() <= 1e-9, "{} vs {}", a.z, b.z);
        }
    }

    #[test]
    fn gradient_matches_central_differences(fx in 0.05..0.95f64, fy in 0.05..0.95f64, which in 0usize..3) {
        let entry = [snsn, sncn, cncn][which](0.8, 0.8).unwrap();
        let w = entry.window;
        let (x, y) = (w.x0 + fx * (w.x1 - w.x0), w.y0 + fy * (w.y1 - w.y0));
        let s = &entry.surface;
        let e = s.evaluate(x, y, None).unwrap();
        let Some((zx, zy)) = e.grad else { return Ok(()) };
        // stay clear of the singular set where u is only Lipschitz
        prop_assume!(s.special_points(&w).iter().all(|p| (p.x0 - x).hypot(p.y0 - y) > 0.05));
        let h = 1e-5;
        let u = |x: f64, y: f64| s.evaluate(x, y, Some(e.z)).unwrap().z;
        let dx = (u(x + h, y) - u(x - h, y)) / (2.0 * h);
        let dy = (u(x, y + h) - u(x, y - h)) / (2.0 * h);
        prop_assert!((dx - zx).abs() <= 1e-5 * (1.0 + zx.abs()), "{dx} vs {zx}");
        prop_assert!((dy - zy).abs() <= 1e-5 * (1.0 + zy.abs()), "{dy} vs {zy}");
    }
}

#[test]
fn unequal_moduli_keep_the_generating_property() {
    for (k, m) in [(0.3, 0.7), (0.9, 0.2), (0.5, 0.5)] {
        for e in [snsn(k, m), sncn(k, m), cncn(k, m)] {
            let e = e.unwrap();
            let g: &GeneratingMatrix = product(&e.surface).generating_matrix();
            assert!(is_generating(g.entries(), 1e-12), "{}", e.name);
            assert!((g.discriminant().unwrap() - 0.25).abs() <= 1e-12, "{}", e.name);
        }
    }
}
