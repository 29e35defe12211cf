use copoly_core::deloc::{f_of_rho, solve_deloc, u_of_x, v_of_y, DelocParams};
use copoly_core::entropy::{kappa_star, A_STAR};
use copoly_core::oracle::deloc_grid_sup;
use proptest::prelude::*;

fn solve(alpha: f64, beta: f64, rho: f64) -> copoly_core::deloc::DelocSolution {
    solve_deloc(DelocParams::new(alpha, beta, rho).unwrap()).unwrap()
}

fn f(alpha: f64, beta: f64, rho: f64) -> f64 {
    f_of_rho(DelocParams::new(alpha, beta, rho).unwrap()).unwrap()
}

const ALPHAS: [f64; 5] = [0.25, 0.5, 1.0, 1.5, 2.0];
const BETAS: [f64; 5] = [-0.5, -0.25, 0.0, 0.25, 0.5];
const RHOS: [f64; 3] = [0.3, 0.5, 0.7];

#[test]
fn solver_matches_dense_grid_on_75_points() {
    for &a in &ALPHAS {
        for &b in &BETAS {
            for &r in &RHOS {
                let s = solve(a, b, r);
                let (g, gx, gy) = deloc_grid_sup(a, b, r, 50.0);
                assert!((s.f - g).abs() < 1e-5, "({a},{b},{r}): solver {} at ({}, {}), grid {g} at ({gx}, {gy})", s.f, s.x_bar, s.y_bar);
                assert!(g <= s.f + 1e-12);
            }
        }
    }
}

#[test]
fn half_density_example() {
    let s = solve(1.0, 0.0, 0.5);
    let (g, _, _) = deloc_grid_sup(1.0, 0.0, 0.5, 50.0);
    assert!((s.f - g).abs() < 1e-5);
    assert!(2.0 < s.y_bar && s.y_bar < A_STAR && A_STAR < s.x_bar);
}

#[test]
fn residuals_and_identity_on_grid() {
    for &a in &ALPHAS {
        for &b in &BETAS {
            for &r in &RHOS {
                let s = solve(a, b, r);
                assert!(s.residual1.abs() < 1e-10 && s.residual2.abs() < 1e-10, "{s:?}");
                let lhs = u_of_x(s.x_bar, a).unwrap() - v_of_y(s.y_bar, b).unwrap();
                // the weights pair ρ with ȳ: u(x̄) - x̄-slope = (1-ρ) log((x̄-2)/(ȳ-2)) / x̄
                let log_ratio = ((s.x_bar - 2.0) / (s.y_bar - 2.0)).ln();
                let rhs = ((1.0 - r) / s.x_bar + r / s.y_bar) * log_ratio;
                assert!((lhs - rhs).abs() < 1e-9, "({a},{b},{r}): {lhs} vs {rhs}");
                let swapped = (r / s.x_bar + (1.0 - r) / s.y_bar) * log_ratio;
                if r == 0.5 {
                    assert!((lhs - swapped).abs() < 1e-9);
                } else if a != b {
                    assert!((lhs - swapped).abs() > 1e-4);
                }
                // at the optimum F is also the slope of x u(x) at x̄
                let slope = 0.5 * a + 0.5 * (s.x_bar / (s.x_bar - 2.0)).ln();
                assert!((s.f - slope).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn maximisers_are_ordered_around_a_star() {
    for &a in &ALPHAS {
        for &b in &BETAS {
            if a <= b {
                continue;
            }
            for &r in &RHOS {
                let s = solve(a, b, r);
                assert!(2.0 < s.y_bar && s.y_bar < A_STAR && A_STAR < s.x_bar, "{s:?}");
                assert!(u_of_x(s.x_bar, a).unwrap() > v_of_y(s.y_bar, b).unwrap());
            }
        }
    }
}

#[test]
fn equal_energies_give_a_star() {
    for t in [-1.0, 0.0, 0.3, 2.0] {
        for r in [0.1, 0.5, 0.9] {
            let s = solve(t, t, r);
            assert_eq!((s.x_bar, s.y_bar), (A_STAR, A_STAR));
            assert!((s.f - (0.5 * t + kappa_star())).abs() < 1e-15);
        }
    }
}

#[test]
fn monotone_in_rho_and_c() {
    let h = 1e-4;
    for c in [0.3, 1.0, 2.5] {
        for r in [0.2, 0.5, 0.8] {
            let (s0, s1) = (solve(c, 0.0, r), solve(c, 0.0, r + h));
            assert!(s1.x_bar < s0.x_bar && s1.y_bar < s0.y_bar, "rho: {s0:?} {s1:?}");
            assert!(s1.f > s0.f);
            let s2 = solve(c + h, 0.0, r);
            assert!(s2.x_bar > s0.x_bar && s2.y_bar < s0.y_bar, "C: {s0:?} {s2:?}");
        }
    }
}

#[test]
fn limits_in_rho() {
    let c = 5f64.ln();
    let s = solve(c, 0.0, 1.0 - 1e-8);
    assert!((s.y_bar - 25.0 / 12.0).abs() < 1e-4, "{s:?}");
    assert!((s.x_bar - A_STAR).abs() < 1e-4);
    let c = 2.0 * 5f64.ln();
    let s = solve(c, 0.0, 1e-8);
    assert!((s.y_bar - 2.0 / (1.0 - (-c).exp())).abs() < 1e-3, "{s:?}");
    assert!(s.x_bar > 1e3);
    // below log 5 the ρ ↓ 0 limit is finite: x̄ → 10Δ/(5Δ - 1), ȳ → a*
    let c: f64 = 0.5;
    let d = (-c).exp();
    let s = solve(c, 0.0, 1e-8);
    assert!((s.x_bar - 10.0 * d / (5.0 * d - 1.0)).abs() < 1e-3, "{s:?}");
    assert!((s.y_bar - A_STAR).abs() < 1e-3);
}

#[test]
fn closed_form_ends() {
    assert_eq!(f(1.3, 0.2, 1.0), 0.65 + kappa_star());
    assert_eq!(f(1.3, 0.2, 0.0), 0.1 + kappa_star());
    // interior values approach the ends
    assert!((f(1.3, 0.2, 1.0 - 1e-9) - f(1.3, 0.2, 1.0)).abs() < 1e-6);
    assert!((f(1.3, 0.2, 1e-9) - f(1.3, 0.2, 0.0)).abs() < 1e-6);
}

#[test]
fn symmetries_on_grid() {
    for &a in &ALPHAS {
        for &b in &BETAS {
            for &r in &RHOS {
                assert!((f(a, b, r) - f(b, a, 1.0 - r)).abs() < 1e-10);
                assert!((f(a, b, r) - (0.5 * (a + b) + f(-b, -a, r))).abs() < 1e-10);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn solver_dominates_random_points(a in -3.0f64..3.0, b in -3.0f64..3.0, r in 0.01f64..0.99, x in 2.0f64..40.0, y in 2.0f64..40.0) {
        let p = DelocParams::new(a, b, r).unwrap();
        let s = solve_deloc(p).unwrap();
        let v = copoly_core::deloc::deloc_objective(&p, x, y).unwrap();
        prop_assert!(v <= s.f + 1e-12, "{v} > {}", s.f);
    }

    #[test]
    fn f_between_the_pure_phases(a in -3.0f64..3.0, b in -3.0f64..3.0, r in 0.0f64..=1.0) {
        let v = f(a, b, r);
        let lo = 0.5 * a.min(b) + kappa_star();
        let hi = 0.5 * a.max(b) + kappa_star();
        prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
    }
}
