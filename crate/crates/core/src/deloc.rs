//! The delocalized variational formula
//! `F(ρ) = sup_{x,y ≥ 2} [ρ x u(x) + (1-ρ) y v(y)] / [ρ x + (1-ρ) y]`
//! and its maximisers.

use crate::entropy::{kappa_star, xlogx, A_STAR};
use crate::error::{domain, invalid, Error, Result};

/// Largest `x̄` reported as a finite maximiser.
pub const X_MAX: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelocParams {
    pub alpha: f64,
    pub beta: f64,
    pub rho: f64,
}

impl DelocParams {
    pub fn new(alpha: f64, beta: f64, rho: f64) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite()) {
            return invalid("alpha and beta must be finite");
        }
        if !(0.0..=1.0).contains(&rho) {
            return invalid(format!("rho = {rho} must lie in [0, 1]"));
        }
        Ok(DelocParams { alpha, beta, rho })
    }

    /// `C = α - β`.
    pub fn c(&self) -> f64 {
        self.alpha - self.beta
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelocSolution {
    pub x_bar: f64,
    pub y_bar: f64,
    pub f: f64,
    /// `log 2 + ρ log(x̄-2) + (1-ρ) log(ȳ-2)`; NaN when `x̄` is unbounded.
    pub residual1: f64,
    /// `C + log(x̄(ȳ-2) / (ȳ(x̄-2)))`; NaN when `x̄` is unbounded.
    pub residual2: f64,
    /// The first equation has no root with `x ≤ X_MAX`; `x̄` is then reported as
    /// `+inf` and `ȳ` as its limit `2/(1 - e^{-C})`.
    pub x_unbounded: bool,
}

/// `u(x) = [½αx + log 2 + ½ x log x - ½(x-2) log(x-2)] / x` for `x ≥ 2`.
pub fn u_of_x(x: f64, alpha: f64) -> Result<f64> {
    if !(x >= 2.0) {
        return domain(format!("x = {x} must be >= 2"));
    }
    if x.is_infinite() {
        return Ok(0.5 * alpha);
    }
    Ok((0.5 * alpha * x + 2f64.ln() + 0.5 * xlogx(x) - 0.5 * xlogx(x - 2.0)) / x)
}

/// `v(y)`: the same form as `u` with `β`.
pub fn v_of_y(y: f64, beta: f64) -> Result<f64> {
    u_of_x(y, beta)
}

/// The ratio maximised in `F(ρ)`.
pub fn deloc_objective(p: &DelocParams, x: f64, y: f64) -> Result<f64> {
    let (wx, wy) = (p.rho * x, (1.0 - p.rho) * y);
    Ok((wx * u_of_x(x, p.alpha)? + wy * v_of_y(y, p.beta)?) / (wx + wy))
}

/// `ȳ` as a function of `x` from the second stationarity equation, in the form
/// `(y - 2, y)` so that `y` close to 2 keeps its precision.
fn y_from_x(x_minus_2: f64, delta: f64) -> (f64, f64) {
    let x = x_minus_2 + 2.0;
    // y - 2 = 2Δ(x-2) / (x - Δ(x-2))
    let ym2 = 2.0 * delta * x_minus_2 / (x - delta * x_minus_2);
    (ym2, ym2 + 2.0)
}

/// Maximisers of `F(ρ)` for `ρ ∈ (0, 1)`.
///
/// `y` is eliminated through `y = 2 / (1 - e^{-C}(x-2)/x)` and the first equation
/// `log 2 + ρ log(x-2) + (1-ρ) log(y-2) = 0` is bisected in `t = log(x-2)`.
/// For `C < 0` the problem is solved with `(α, β, ρ) → (β, α, 1-ρ)` and the
/// maximisers swapped back.
pub fn solve_deloc(p: DelocParams) -> Result<DelocSolution> {
    let p = DelocParams::new(p.alpha, p.beta, p.rho)?;
    if !(p.rho > 0.0 && p.rho < 1.0) {
        return invalid(format!("solve_deloc needs rho in (0, 1), got {}", p.rho));
    }
    if p.c() < 0.0 {
        let s = solve_ordered(DelocParams { alpha: p.beta, beta: p.alpha, rho: 1.0 - p.rho })?;
        return Ok(DelocSolution { x_bar: s.y_bar, y_bar: s.x_bar, ..s });
    }
    solve_ordered(p)
}

fn solve_ordered(p: DelocParams) -> Result<DelocSolution> {
    let c = p.c();
    let rho = p.rho;
    let delta = (-c).exp();
    if c == 0.0 {
        let f = 0.5 * p.alpha + kappa_star();
        return Ok(DelocSolution {
            x_bar: A_STAR,
            y_bar: A_STAR,
            f,
            residual1: 0.0,
            residual2: 0.0,
            x_unbounded: false,
        });
    }
    let h = |t: f64| -> f64 {
        let (ym2, _) = y_from_x(t.exp(), delta);
        2f64.ln() + rho * t + (1.0 - rho) * ym2.ln()
    };
    let t_lo = 1e-12f64.ln();
    if h(t_lo) >= 0.0 {
        return Err(Error::Convergence(format!("no bracket: first equation is non-negative at x = 2 + 1e-12 (rho = {rho}, C = {c})")));
    }
    // grow the upper end geometrically in x from 10
    let mut x_hi = 10.0f64;
    let mut bracket = None;
    loop {
        let t = (x_hi - 2.0).ln();
        if h(t) > 0.0 {
            bracket = Some(t);
            break;
        }
        if x_hi >= X_MAX {
            break;
        }
        x_hi = (x_hi * 10.0).min(X_MAX);
    }
    let Some(t_hi) = bracket else {
        let y_lim = 2.0 / (1.0 - delta);
        return Ok(DelocSolution {
            x_bar: f64::INFINITY,
            y_bar: y_lim,
            // the objective tends to u(∞) = ½α along the maximising curve
            f: 0.5 * p.alpha,
            residual1: f64::NAN,
            residual2: f64::NAN,
            x_unbounded: true,
        });
    };
    let (mut a, mut b) = (t_lo, t_hi);
    while b - a > 0.0 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if h(m) < 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    let t = if h(a).abs() <= h(b).abs() { a } else { b };
    let xm2 = t.exp();
    let x = xm2 + 2.0;
    let (ym2, y) = y_from_x(xm2, delta);
    let residual1 = 2f64.ln() + rho * xm2.ln() + (1.0 - rho) * ym2.ln();
    let residual2 = c + (x / y).ln() + (ym2 / xm2).ln();
    let f = deloc_objective(&p, x, y)?;
    Ok(DelocSolution { x_bar: x, y_bar: y, f, residual1, residual2, x_unbounded: false })
}

/// `F(α, β; ρ)` on the closed interval: `ρ = 1` gives `½α + ½ log 5` and `ρ = 0`
/// gives `½β + ½ log 5`.
pub fn f_of_rho(p: DelocParams) -> Result<f64> {
    let p = DelocParams::new(p.alpha, p.beta, p.rho)?;
    if p.rho == 1.0 {
        return Ok(0.5 * p.alpha + kappa_star());
    }
    if p.rho == 0.0 {
        return Ok(0.5 * p.beta + kappa_star());
    }
    Ok(solve_deloc(p)?.f)
}
