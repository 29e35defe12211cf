//! One-dimensional search: golden section with a parabolic finish, grid-first
//! maximisation, half-line suprema and bisection.

use crate::error::{Error, Result};

/// Default argument tolerance for 1-D maximisation.
pub const ARG_TOL: f64 = 1e-9;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub arg: f64,
    pub value: f64,
}

/// Supremum over a half-line. `bounded` is false when the objective was still
/// increasing at the search cap, in which case `value` is `+inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Supremum {
    pub arg: f64,
    pub value: f64,
    pub bounded: bool,
}

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`.
pub fn golden_max<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Maximum {
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    if b - a <= tol {
        let m = 0.5 * (a + b);
        return best_of(&f, &[a, m, b]);
    }
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..200 {
        if b - a <= tol {
            break;
        }
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        }
    }
    let mut best = if f1 >= f2 {
        Maximum { arg: x1, value: f1 }
    } else {
        Maximum { arg: x2, value: f2 }
    };
    // parabolic step through (x1, x2) and the midpoint
    let xm = 0.5 * (x1 + x2);
    let fm = f(xm);
    if fm > best.value {
        best = Maximum { arg: xm, value: fm };
    }
    if let Some(xp) = parabola_vertex((x1, f1), (xm, fm), (x2, f2)) {
        if xp > a && xp < b {
            let fp = f(xp);
            if fp > best.value {
                best = Maximum { arg: xp, value: fp };
            }
        }
    }
    // endpoints, so monotone objectives report the boundary exactly
    for x in [lo.min(hi), lo.max(hi)] {
        if (x - best.arg).abs() <= 2.0 * tol + 1e-15 * x.abs() {
            let fx = f(x);
            if fx > best.value {
                best = Maximum { arg: x, value: fx };
            }
        }
    }
    best
}

fn parabola_vertex(p: (f64, f64), q: (f64, f64), r: (f64, f64)) -> Option<f64> {
    let num = (q.0 - p.0).powi(2) * (q.1 - r.1) - (q.0 - r.0).powi(2) * (q.1 - p.1);
    let den = (q.0 - p.0) * (q.1 - r.1) - (q.0 - r.0) * (q.1 - p.1);
    if den == 0.0 || !num.is_finite() || !den.is_finite() {
        return None;
    }
    Some(q.0 - 0.5 * num / den)
}

fn best_of<F: Fn(f64) -> f64>(f: &F, xs: &[f64]) -> Maximum {
    let mut best = Maximum { arg: xs[0], value: f(xs[0]) };
    for &x in &xs[1..] {
        let v = f(x);
        if v > best.value {
            best = Maximum { arg: x, value: v };
        }
    }
    best
}

/// Evaluates `f` on an increasing grid and refines the best cell by golden section
/// over its two neighbouring intervals.
pub fn grid_max<F: Fn(f64) -> f64>(f: F, grid: &[f64], tol: f64) -> Maximum {
    assert!(!grid.is_empty());
    let values: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
    let mut i = 0;
    for (k, v) in values.iter().enumerate() {
        if *v > values[i] {
            i = k;
        }
    }
    let lo = grid[i.saturating_sub(1)];
    let hi = grid[(i + 1).min(grid.len() - 1)];
    let refined = golden_max(&f, lo, hi, tol);
    if refined.value >= values[i] {
        refined
    } else {
        Maximum { arg: grid[i], value: values[i] }
    }
}

/// Supremum of `f` on `[lo, cap]` for objectives that rise and then decay.
///
/// Scans geometrically away from `lo`, continuing a few doublings past the best
/// point as a decay check, then refines by golden section. If the best scanned
/// point is `cap` itself the supremum is reported as unbounded.
pub fn halfline_max<F: Fn(f64) -> f64>(f: F, lo: f64, cap: f64, tol: f64) -> Supremum {
    let mut xs = vec![lo];
    let mut fs = vec![f(lo)];
    let mut best = 0;
    let mut h = 0.0625;
    loop {
        let x = (lo + h).min(cap);
        let fx = f(x);
        xs.push(x);
        fs.push(if fx.is_nan() { f64::NEG_INFINITY } else { fx });
        let k = xs.len() - 1;
        if fs[k] > fs[best] {
            best = k;
        }
        if x >= cap || k - best >= 4 {
            break;
        }
        h *= 2.0;
    }
    if xs[best] >= cap {
        return Supremum { arg: cap, value: f64::INFINITY, bounded: false };
    }
    let left = xs[best.saturating_sub(1)];
    let right = xs[best + 1];
    let m = golden_max(&f, left, right, tol);
    let (arg, value) = if m.value >= fs[best] { (m.arg, m.value) } else { (xs[best], fs[best]) };
    Supremum { arg, value, bounded: true }
}

/// Bisection for a sign change of `f` on `[lo, hi]`, stopping when the bracket is
/// narrower than `tol` (or can no longer shrink).
pub fn bisect<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || fa.is_nan() || fb.is_nan() {
        return Err(Error::Convergence(format!(
            "no sign change on [{lo}, {hi}]: f = {fa}, {fb}"
        )));
    }
    let neg_left = fa < 0.0;
    for _ in 0..400 {
        let m = 0.5 * (a + b);
        if (b - a).abs() <= tol || m == a || m == b {
            return Ok(m);
        }
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if (fm < 0.0) == neg_left {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}
