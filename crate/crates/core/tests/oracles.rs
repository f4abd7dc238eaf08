use maxsurf::families::build_catalog;
use maxsurf::profiles::{integrate_profile_numeric, solve_profile, ProfileInit};
use maxsurf::surface::{ImplicitGraph, Surface};

const INITS: [ProfileInit; 3] =
    [ProfileInit::AtZero, ProfileInit::AtTurningPoint { delta: -1.0 }, ProfileInit::AtTurningPoint { delta: 1.0 }];

/// Every profile row of every matrix in the catalog, under every admissible start,
/// agrees with an RK4 integration of `f'' = 2 f (c f^2 - b)` over one period.
#[test]
fn closed_forms_match_rk4() {
    let mut compared = 0;
    for entry in build_catalog().unwrap() {
        let Surface::Product(s) = &entry.surface else { continue };
        for p in [s.phi(), s.psi(), s.zeta()] {
            let q = p.coeffs();
            for init in INITS {
                let Ok(exact) = solve_profile(q, init) else { continue };
                let span = exact.period().unwrap_or(2.0);
                let numeric = integrate_profile_numeric(q, init, span).unwrap();
                let mut worst = 0.0f64;
                for i in 0..=400 {
                    let t = -span + 2.0 * span * i as f64 / 400.0;
                    let (a, b) = (exact.value(t), numeric.value(t));
                    if a.is_finite() && a.abs() < 1e3 {
                        worst = worst.max((a - b).abs());
                    }
                }
                assert!(worst <= 1e-8, "{} {:?} {:?}: {worst:e}", entry.name, q, init);
                compared += 1;
            }
        }
    }
    assert!(compared >= 15, "only {compared} rows compared");
}

/// Halving the stencil step divides the finite-difference residual by about four.
#[test]
fn stencil_residual_is_second_order() {
    let mut measured = 0;
    for entry in build_catalog().unwrap() {
        let w = entry.window;
        let g = &entry.surface;
        let specials = g.special_points(&w);
        let mut ratios = Vec::new();
        for (fx, fy) in [(0.31, 0.17), (0.62, 0.41), (0.13, 0.77), (0.83, 0.59)] {
            let (x, y) = (w.x0 + fx * (w.x1 - w.x0), w.y0 + fy * (w.y1 - w.y0));
            if specials.iter().any(|p| (p.x0 - x).hypot(p.y0 - y) < 0.2) {
                continue;
            }
            let (Ok(r1), Ok(r2)) = (g.pde_residual_fd(x, y, 2e-2), g.pde_residual_fd(x, y, 1e-2)) else { continue };
            // residuals at round-off level carry no rate information
            if r1.abs() > 1e-9 {
                ratios.push(r1 / r2);
            }
        }
        for r in ratios {
            assert!((3.0..=5.0).contains(&r), "{}: ratio {r}", entry.name);
            measured += 1;
        }
    }
    assert!(measured >= 10, "only {measured} ratios measured");
}
