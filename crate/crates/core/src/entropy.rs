//! Crossing and interface entropies of directed self-avoiding paths.
//!
//! Paths take East, North and South steps with no immediate North/South reversal.
//! `kappa(a, b)` is the growth rate per step of `aL`-step paths with displacement
//! `(bL, L)`; `kappa_hat(mu)` is the growth rate of `muL`-step bridges from `(0,0)`
//! to `(L,0)`.

use crate::error::{domain, Result};
use crate::optimize::{bisect, grid_max, halfline_max, ARG_TOL};

/// `x log x` with the continuous extension `0 log 0 = 0`.
#[inline]
pub fn xlogx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// Upper end of the `mu` search interval for suprema.
pub const MU_CAP: f64 = 1e6;

pub const A_STAR: f64 = 2.5;

/// `½ log 5`, the entropy at the optimal crossing ratio `a* = 5/2`.
pub fn kappa_star() -> f64 {
    0.5 * 5f64.ln()
}

/// `½ log(9/5)`, the slope `a* ∂κ/∂b` at `(a*, 1)`.
pub fn slope_const() -> f64 {
    0.5 * (9.0f64 / 5.0).ln()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossingParams {
    pub a: f64,
    pub b: f64,
}

impl CrossingParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || b < 0.0 || a < 1.0 + b {
            return domain(format!("(a, b) = ({a}, {b}) requires a >= 1 + b and b >= 0"));
        }
        Ok(CrossingParams { a, b })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyPoint {
    pub params: CrossingParams,
    pub kappa: f64,
    pub delta: f64,
    pub epsilon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfaceEntropyPoint {
    pub mu: f64,
    pub kappahat: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelConstants {
    pub kappa_star: f64,
    pub a_star: f64,
    pub slope_const: f64,
    pub mu_sup: f64,
    pub mu_sup_value: f64,
    pub alpha0: f64,
    pub alpha1: f64,
}

fn half_heights(a: f64, b: f64) -> (f64, f64) {
    (0.5 * (a + 1.0 - b), 0.5 * (a - 1.0 - b))
}

/// Maximising up- and down-column densities for the crossing count.
fn maximisers(a: f64, b: f64) -> (f64, f64) {
    if (b - 1.0).abs() < 1e-12 {
        return (0.5, (a - 2.0) / (2.0 * (a - 1.0)));
    }
    let d = ((a - b) * (a - b) + b * b - 1.0).max(0.0).sqrt();
    let delta = b * (a + 1.0 - b) / ((a + 1.0) + d);
    let epsilon = b * (a - 1.0 - b) / (d + a - 1.0);
    (delta, epsilon)
}

/// Stirling exponent of the crossing count, per unit of `L`.
fn f_ab(a: f64, b: f64, delta: f64, epsilon: f64) -> f64 {
    let (hp, hm) = half_heights(a, b);
    xlogx(b) - 2.0 * xlogx(delta) + xlogx(hp) - xlogx(hp - delta) - 2.0 * xlogx(epsilon)
        - xlogx(b - delta - epsilon)
        + xlogx(hm)
        - xlogx(hm - epsilon)
}

pub fn kappa(params: CrossingParams) -> Result<EntropyPoint> {
    let CrossingParams { a, b } = CrossingParams::new(params.a, params.b)?;
    let (delta, epsilon) = maximisers(a, b);
    let kappa = (f_ab(a, b, delta, epsilon) / a).max(0.0);
    Ok(EntropyPoint { params, kappa, delta, epsilon })
}

/// Shorthand for `kappa(a, b).kappa`.
pub fn kappa_value(a: f64, b: f64) -> Result<f64> {
    Ok(kappa(CrossingParams { a, b })?.kappa)
}

/// Partial derivatives `(∂κ/∂a, ∂κ/∂b)`.
pub fn kappa_partials(params: CrossingParams) -> Result<(f64, f64)> {
    let pt = kappa(params)?;
    let CrossingParams { a, b } = params;
    if a - 1.0 - b <= 1e-14 * a.max(1.0) {
        return domain(format!("partials undefined on the boundary a = 1 + b (a = {a}, b = {b})"));
    }
    let (hp, hm) = half_heights(a, b);
    let (delta, epsilon) = (pt.delta, pt.epsilon);
    let da = -pt.kappa / a + 0.5 * ((hp * hm) / ((hp - delta) * (hm - epsilon))).ln() / a;
    // b^2 / (b - δ - ε)^2 written with δ/b and ε/b so that b -> 0 stays finite
    let (rd, re) = if b > 0.0 { (delta / b, epsilon / b) } else { col_ratios_at_zero(a) };
    let ratio = (1.0 / (1.0 - rd - re)).powi(2) * (hp - delta) * (hm - epsilon) / (hp * hm);
    let db = 0.5 * ratio.ln() / a;
    Ok((da, db))
}

fn col_ratios_at_zero(a: f64) -> (f64, f64) {
    let d = (a * a - 1.0).sqrt();
    ((a + 1.0) / ((a + 1.0) + d), (a - 1.0) / (d + a - 1.0))
}

pub fn kappa_hat(mu: f64) -> Result<InterfaceEntropyPoint> {
    if !mu.is_finite() || mu < 1.0 {
        return domain(format!("mu = {mu} must be >= 1"));
    }
    if mu == 1.0 {
        return Ok(InterfaceEntropyPoint { mu, kappahat: 0.0, delta: 0.0 });
    }
    let m1 = mu - 1.0;
    let root = (m1 * m1 + 1.0).sqrt();
    let delta = m1 / (mu + root);
    let one_minus_2delta = (1.0 + 1.0 / (root + m1)) / (mu + root);
    let h = 0.5 * m1;
    let tail = delta * h.ln() - (h - delta) * (-delta / h).ln_1p();
    let total = -4.0 * xlogx(delta) - xlogx(one_minus_2delta) + 2.0 * tail;
    Ok(InterfaceEntropyPoint { mu, kappahat: (total / mu).max(0.0), delta })
}

/// Shorthand for `kappa_hat(mu).kappahat`.
pub fn kappa_hat_value(mu: f64) -> Result<f64> {
    Ok(kappa_hat(mu)?.kappahat)
}

/// `sup_{mu >= 1} mu [kappa_hat(mu) - c]` for `c > 0`, with its maximiser.
pub fn sup_mu_kappa_hat_minus(c: f64) -> Result<(f64, f64)> {
    let s = halfline_max(|mu| mu * (kappa_hat_value(mu).unwrap_or(f64::NAN) - c), 1.0, MU_CAP, ARG_TOL);
    if !s.bounded {
        return Err(crate::error::Error::Convergence(format!(
            "mu [kappa_hat(mu) - {c}] did not decay on [1, {MU_CAP}]"
        )));
    }
    Ok((s.arg, s.value))
}

pub fn model_constants() -> Result<ModelConstants> {
    let ks = kappa_star();
    let slope = slope_const();
    let (mu_sup, mu_sup_value) = sup_mu_kappa_hat_minus(ks)?;
    let alpha0 = bisect(
        |alpha| match sup_mu_kappa_hat_minus(ks - 0.5 * alpha) {
            Ok((_, v)) => v - slope,
            Err(_) => f64::NAN,
        },
        0.0,
        1.0,
        1e-12,
    )?;
    let alpha1 = bisect(|alpha| alpha1_lhs(alpha) - mu_sup_value, 0.0, 1.0, 1e-12)?;
    Ok(ModelConstants {
        kappa_star: ks,
        a_star: A_STAR,
        slope_const: slope,
        mu_sup,
        mu_sup_value,
        alpha0,
        alpha1,
    })
}

/// `½ log[4 e^{-α} (5 + e^{-α})² / (5 (5 - e^{-α})²)]`.
fn alpha1_lhs(alpha: f64) -> f64 {
    let e = (-alpha).exp();
    0.5 * (4.0 * e * (5.0 + e).powi(2) / (5.0 * (5.0 - e).powi(2))).ln()
}

/// `g(ν) = ν [½ log 5 - f(ν)]` with `f(ν) = sup_{b ∈ [2/(ν+1), 1]} κ(bν, 1-b)`.
pub fn g_of_nu(nu: f64) -> Result<f64> {
    if !nu.is_finite() || nu < 1.0 {
        return domain(format!("nu = {nu} must be >= 1"));
    }
    let lo = 2.0 / (nu + 1.0);
    let f = if 1.0 - lo <= ARG_TOL {
        kappa_value(nu, 0.0)?
    } else {
        let obj = |b: f64| {
            let a = (b * nu).max(2.0 - b);
            kappa_value(a, 1.0 - b).unwrap_or(f64::NEG_INFINITY)
        };
        let n = 64;
        let grid: Vec<f64> = (0..=n).map(|i| lo + (1.0 - lo) * i as f64 / n as f64).collect();
        let m = grid_max(obj, &grid, ARG_TOL);
        m.value
    };
    Ok(nu * (kappa_star() - f))
}
