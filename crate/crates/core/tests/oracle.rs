use copoly_core::entropy::{kappa_hat_value, kappa_value};
use copoly_core::oracle::{
    count_bridges, count_paths, count_upper_bridges, ln_biguint, quenched_interface_logz, verify_kacomb_asymptotics,
    PathCountQuery, QuenchedInterfaceQuery,
};
use copoly_core::rng::monomer_sequence;
use copoly_core::Label;
use num_bigint::BigUint;
use proptest::prelude::*;

#[derive(Clone, Copy, PartialEq)]
enum Step {
    E,
    N,
    S,
}

/// Exhaustive walk over every bridge; returns (number of paths, Z).
fn enumerate(alpha: f64, beta: f64, l: i64, omega: &[Label]) -> (u64, f64) {
    fn go(
        t: usize,
        x: i64,
        y: i64,
        last: Step,
        acc: f64,
        ctx: &(f64, f64, i64, &[Label]),
        out: &mut (u64, f64),
    ) {
        let (alpha, beta, l, omega) = *ctx;
        let left = (omega.len() - t) as i64;
        if left == 0 {
            if x == l && y == 0 {
                out.0 += 1;
                out.1 += acc.exp();
            }
            return;
        }
        if (l - x) + y.abs() > left {
            return;
        }
        let energy = |y0: i64, y1: i64| {
            let upper = y0.max(y1) >= 1;
            match (omega[t], upper) {
                (Label::A, true) => alpha,
                (Label::B, false) => beta,
                _ => 0.0,
            }
        };
        if x < l {
            go(t + 1, x + 1, y, Step::E, acc + energy(y, y), ctx, out);
        }
        if last != Step::S {
            go(t + 1, x, y + 1, Step::N, acc + energy(y, y + 1), ctx, out);
        }
        if last != Step::N {
            go(t + 1, x, y - 1, Step::S, acc + energy(y, y - 1), ctx, out);
        }
    }
    let mut out = (0u64, 0.0f64);
    go(0, 0, 0, Step::E, 0.0, &(alpha, beta, l, omega), &mut out);
    out
}

fn ln_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Plain log-domain transfer over the full window, no pruning or parity tricks.
fn reference_logz(alpha: f64, beta: f64, l: i64, omega: &[Label]) -> f64 {
    let t_max = omega.len() as i64;
    let ymax = t_max;
    let w = (2 * ymax + 1) as usize;
    let nx = (l + 1) as usize;
    let neg = f64::NEG_INFINITY;
    let idx = |x: i64, y: i64| x as usize * w + (y + ymax) as usize;
    let mut cur = vec![[neg; 3]; nx * w];
    cur[idx(0, 0)][0] = 0.0;
    for t in 0..omega.len() {
        let mut nxt = vec![[neg; 3]; nx * w];
        let en = |y0: i64, y1: i64| {
            let upper = y0.max(y1) >= 1;
            match (omega[t], upper) {
                (Label::A, true) => alpha,
                (Label::B, false) => beta,
                _ => 0.0,
            }
        };
        for x in 0..=l {
            for y in -ymax..=ymax {
                let s = cur[idx(x, y)];
                if s.iter().all(|v| *v == neg) {
                    continue;
                }
                let all = ln_add(ln_add(s[0], s[1]), s[2]);
                if x < l {
                    let c = &mut nxt[idx(x + 1, y)][0];
                    *c = ln_add(*c, all + en(y, y));
                }
                if y < ymax {
                    let c = &mut nxt[idx(x, y + 1)][1];
                    *c = ln_add(*c, ln_add(s[0], s[1]) + en(y, y + 1));
                }
                if y > -ymax {
                    let c = &mut nxt[idx(x, y - 1)][2];
                    *c = ln_add(*c, ln_add(s[0], s[2]) + en(y, y - 1));
                }
            }
        }
        cur = nxt;
    }
    let s = cur[idx(l, 0)];
    ln_add(ln_add(s[0], s[1]), s[2])
}

fn logz(alpha: f64, beta: f64, l: u32, omega: &[Label]) -> f64 {
    quenched_interface_logz(&QuenchedInterfaceQuery { alpha, beta, l, omega: omega.to_vec() }).unwrap()
}

#[test]
fn enumeration_matches_transfer_at_l10() {
    let omega = monomer_sequence(11, 20);
    let (n, z) = enumerate(1.0, 1.0, 10, &omega);
    assert_eq!(BigUint::from(n), count_bridges(10, 20).unwrap());
    let lz = logz(1.0, 1.0, 10, &omega);
    assert!((lz - z.ln()).abs() < 1e-10, "{lz} vs {}", z.ln());
}

#[test]
fn enumeration_matches_counts_on_small_cases() {
    for (l, steps) in [(1u32, 1usize), (2, 4), (3, 5), (4, 8), (5, 11), (6, 12)] {
        let omega = vec![Label::A; steps];
        let (n, _) = enumerate(0.0, 0.0, l as i64, &omega);
        assert_eq!(BigUint::from(n), count_bridges(l, steps as u32).unwrap(), "L={l} steps={steps}");
    }
}

#[test]
fn transfer_matches_log_domain_reference() {
    for (seed, l, steps, a, b) in [(1u64, 12u32, 30usize, 2.0, -1.5), (2, 20, 60, 0.7, 0.3), (3, 15, 45, -8.0, 9.0)] {
        let omega = monomer_sequence(seed, steps);
        let fast = logz(a, b, l, &omega);
        let slow = reference_logz(a, b, l as i64, &omega);
        assert!((fast - slow).abs() < 1e-9 * slow.abs().max(1.0), "{fast} vs {slow}");
    }
}

#[test]
fn all_a_sequence_with_strong_alpha_is_dominated_by_upper_bridges() {
    let (l, steps) = (20u32, 40usize);
    let omega = vec![Label::A; steps];
    let upper = ln_biguint(&count_upper_bridges(l, steps as u32).unwrap());
    let mut prev = f64::INFINITY;
    for alpha in [2.0, 5.0, 10.0, 20.0] {
        let lz = logz(alpha, -50.0, l, &omega);
        let excess = lz - (alpha * steps as f64 + upper);
        assert!(excess >= -1e-9);
        assert!(excess <= prev + 1e-12);
        prev = excess;
    }
    assert!(prev < 1e-6, "{prev}");
}

#[test]
fn zero_energy_logz_equals_bridge_count() {
    for (l, steps) in [(20u32, 40usize), (30, 90), (25, 37)] {
        let omega = monomer_sequence(l as u64, steps);
        let lz = logz(0.0, 0.0, l, &omega);
        let n = ln_biguint(&count_bridges(l, steps as u32).unwrap());
        assert!((lz - n).abs() < 1e-11 * n, "{lz} vs {n}");
    }
}

#[test]
fn bridge_count_rate_approaches_kappa_hat() {
    let k = kappa_hat_value(2.0).unwrap();
    let mut prev = 0.0;
    for l in [20u32, 40, 60] {
        let r = ln_biguint(&count_bridges(l, 2 * l).unwrap()) / (2 * l) as f64;
        assert!(r < k && r > prev);
        prev = r;
    }
    assert!(k - prev < 0.05);
}

#[test]
fn crossing_rate_at_optimal_ratio() {
    let q = |l: u32| PathCountQuery { l, total_steps: 5 * l / 2, end_x: l, end_y: l as i32, restrict_band: false };
    let ks = kappa_value(2.5, 1.0).unwrap();
    let rates: Vec<f64> = [20u32, 40, 60, 80]
        .iter()
        .map(|&l| ln_biguint(&count_paths(&q(l)).unwrap()) / (2.5 * l as f64))
        .collect();
    // finite-L rates sit O(log L / L) below the limit: 0.7586 at L=40, 0.7782 at L=80
    assert!(rates.iter().all(|&r| r < ks));
    assert!(rates[1] > 0.75 && rates[3] > 0.775);
    assert!(rates.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn kacomb_report_a2_is_central_binomial_rate() {
    let r = verify_kacomb_asymptotics(2.0, 1.0, &[30]).unwrap();
    let n = count_paths(&PathCountQuery { l: 30, total_steps: 60, end_x: 30, end_y: 30, restrict_band: false }).unwrap();
    let mut binom = BigUint::from(1u32);
    for i in 0..30u32 {
        binom = binom * BigUint::from(60 - i) / BigUint::from(i + 1);
    }
    assert_eq!(n, binom);
    assert!((r.rates[0] - ln_biguint(&binom) / 60.0).abs() < 1e-15);
}

#[test]
fn kacomb_extrapolation_and_band() {
    for a in [2.5, 3.0] {
        let r = verify_kacomb_asymptotics(a, 1.0, &[20, 40, 80]).unwrap();
        assert!(r.rel_error < 0.005, "a={a}: {}", r.rel_error);
        for (u, b) in r.rates.iter().zip(&r.restricted_rates) {
            assert!(b <= u);
        }
        let gaps: Vec<f64> = r.rates.iter().zip(&r.restricted_rates).map(|(u, b)| u - b).collect();
        assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
        // the formula's column count only changes the polynomial prefactor
        let last = r.ls.len() - 1;
        assert!((r.formula_rates[last] - r.rates[last]).abs() < 0.02);
    }
}

#[test]
fn restricted_log_ratio_tends_to_one() {
    let r = verify_kacomb_asymptotics(3.0, 1.0, &[20, 40, 80]).unwrap();
    let ratios: Vec<f64> = r.rates.iter().zip(&r.restricted_rates).map(|(u, b)| b / u).collect();
    assert!(ratios.windows(2).all(|w| w[1] > w[0]));
    assert!(1.0 - ratios[2] < 0.01);
}

#[test]
fn interface_logz_is_monotone_in_energies_per_sample() {
    let omega = monomer_sequence(5, 60);
    let base = logz(0.5, 0.2, 20, &omega);
    assert!(logz(0.6, 0.2, 20, &omega) >= base);
    assert!(logz(0.5, 0.3, 20, &omega) >= base);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn logz_monotone(seed in 0u64..1000, a in -3.0f64..3.0, b in -3.0f64..3.0, da in 0.0f64..1.0, db in 0.0f64..1.0) {
        let omega = monomer_sequence(seed, 36);
        let z = logz(a, b, 12, &omega);
        prop_assert!(logz(a + da, b, 12, &omega) >= z - 1e-12);
        prop_assert!(logz(a, b + db, 12, &omega) >= z - 1e-12);
    }

    #[test]
    fn band_restriction_never_adds_paths(l in 2u32..9, extra in 0u32..6) {
        let q = PathCountQuery { l, total_steps: 2 * l + 2 * extra, end_x: l, end_y: l as i32, restrict_band: false };
        let band = PathCountQuery { restrict_band: true, ..q };
        prop_assert!(count_paths(&band).unwrap() <= count_paths(&q).unwrap());
    }
}
