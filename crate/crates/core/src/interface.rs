//! Quenched single-interface free energy `φ^I(μ; α, β)`: Monte Carlo estimates
//! from exact finite-size partition sums, and rigorous bounds.

use std::collections::HashMap;
use std::sync::Mutex;

use rayon::prelude::*;

use crate::entropy::{kappa_hat_value, MU_CAP};
use crate::error::{invalid, Result};
use crate::oracle::{quenched_interface_logz_checkpoints, QuenchedInterfaceQuery};
use crate::rng::{monomer_sequence, replica_seed};

/// Path-length ratio at which the good-B-string strategy runs: one eighth of all
/// steps are vertical, so `μ₀ = 8/7`.
pub const STRATEGY_MU: f64 = 8.0 / 7.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfaceParams {
    pub alpha: f64,
    pub beta: f64,
    pub mu: f64,
}

impl InterfaceParams {
    pub fn new(alpha: f64, beta: f64, mu: f64) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite()) {
            return invalid("alpha and beta must be finite");
        }
        if !mu.is_finite() || mu < 1.0 {
            return invalid(format!("mu = {mu} must be >= 1"));
        }
        Ok(InterfaceParams { alpha, beta, mu })
    }

    fn swapped(self) -> Self {
        InterfaceParams { alpha: self.beta, beta: self.alpha, mu: self.mu }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuenchedEstimate {
    /// Finite-size estimate of `φ^I` at the realised ratio, nats per step.
    pub mean: f64,
    pub stderr: f64,
    /// The increment estimate minus the mean-zero control variate
    /// `c (#A/T - ½)` over the increment, `c = α` if `α ≥ β` and `-β` otherwise.
    /// It removes the path-independent part of the disorder noise.
    pub cv_mean: f64,
    pub cv_stderr: f64,
    /// Replica average of the plain finite-size value `(1/T) log Z_L`, `T` steps.
    pub raw_mean: f64,
    /// Replica standard deviation of `(1/T) log Z_L`.
    pub spread: f64,
    /// Correction added to the increment estimator (see `phi_interface`).
    pub entropic_shift: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub l: u32,
    pub steps: u32,
    /// Ratio of steps to span over the increment the estimate refers to.
    pub mu_realized: f64,
    pub replicas: u32,
    pub seed: u64,
}

/// Number of steps for ratio `mu` over span `l`: the integer nearest `μL` with
/// `steps - L` even (ties go up).
pub fn discretize(mu: f64, l: u32) -> u32 {
    let target = mu * l as f64;
    let base = target.floor() as i64;
    let mut best = None;
    for s in [base - 1, base, base + 1, base + 2] {
        if s < l as i64 || (s - l as i64) % 2 != 0 {
            continue;
        }
        let d = (s as f64 - target).abs();
        match best {
            Some((bd, _)) if d >= bd => {}
            _ => best = Some((d, s)),
        }
    }
    best.map(|(_, s)| s as u32).unwrap_or(l)
}

/// Annealed bound `½α + κ̂(μ) + log⁺(½e^{-α} + ½e^{β})`.
///
/// Averaging `e^{β1{B} - α1{A}}` over the steps below the interface gives the
/// factor `½e^{-α} + ½e^{β}` per such step; when it is below one the bound is
/// attained with no steps below, hence the positive part.
pub fn phi_annealed_upper(p: InterfaceParams) -> Result<f64> {
    let k = kappa_hat_value(p.mu)?;
    Ok(0.5 * p.alpha + k + log_half_sum_exp(-p.alpha, p.beta).max(0.0))
}

fn log_half_sum_exp(x: f64, y: f64) -> f64 {
    let m = x.max(y);
    m + (0.5 * ((x - m).exp() + (y - m).exp())).ln()
}

/// Best available rigorous upper bound: the annealed bound in both orders of
/// `(α, β)` and the count bound `½α⁺ + ½β⁺ + κ̂(μ)`.
pub fn phi_upper_bound(p: InterfaceParams) -> Result<f64> {
    let k = kappa_hat_value(p.mu)?;
    let annealed = phi_annealed_upper(p)?.min(phi_annealed_upper(p.swapped())?);
    let counting = 0.5 * p.alpha.max(0.0) + 0.5 * p.beta.max(0.0) + k;
    Ok(annealed.min(counting))
}

/// Best available rigorous lower bound.
///
/// Bridges kept strictly above (or below) the interface give `½α + κ̂(μ)` (or
/// `½β + κ̂(μ)`). For `μ ≤ 8/7` a single path that drops to the interface for a
/// fraction of the B-strings followed by at least three A's gives
/// `½α + (1 - 1/μ)β`; at `μ = 8/7` every such string is used and the gain is
/// `½α + ⅛β`. Both are symmetrised in `(α, β)`.
pub fn phi_lower_bounds(p: InterfaceParams) -> Result<f64> {
    let k = kappa_hat_value(p.mu)?;
    let mut best = 0.5 * p.alpha.max(p.beta) + k;
    if p.mu <= STRATEGY_MU * (1.0 + 1e-12) {
        let used = (1.0 - 1.0 / p.mu).min(0.125);
        best = best.max(0.5 * p.alpha + used * p.beta).max(0.5 * p.beta + used * p.alpha);
    }
    Ok(best)
}

/// Monte Carlo estimate of `φ^I` from `replicas` monomer sequences.
///
/// Each replica runs one transfer to span `L` and also records the bridge to span
/// `L/2` on the same sequence prefix. The estimate is the increment
/// `[log Z_L - log Z_{L/2}] / (T - T_{L/2})`, which cancels the boundary terms of
/// order `log L / L` carried by `(1/μL) log Z_L`, plus the entropic shift
/// `κ̂(μ_inc) - [log N̂_L - log N̂_{L/2}] / (T - T_{L/2})` computed from the exact
/// bridge counts, so that `α = β = 0` is reproduced exactly.
pub fn phi_interface(p: InterfaceParams, l: u32, replicas: u32, seed: u64) -> Result<QuenchedEstimate> {
    let p = InterfaceParams::new(p.alpha, p.beta, p.mu)?;
    if l < 2 {
        return invalid("L must be at least 2");
    }
    if replicas < 1 {
        return invalid("replicas must be >= 1");
    }
    let steps = discretize(p.mu, l);
    let mu_realized = steps as f64 / l as f64;
    let half = l / 2;
    let half_steps = discretize(mu_realized, half).min(steps - (l - half));
    let checkpoints = [(half, half_steps), (l, steps)];
    let inc_steps = (steps - half_steps) as f64;
    let mu_inc = inc_steps / (l - half) as f64;
    let counts = quenched_interface_logz_checkpoints(
        &QuenchedInterfaceQuery { alpha: 0.0, beta: 0.0, l, omega: vec![crate::Label::A; steps as usize] },
        &checkpoints,
    )?;
    let entropic_shift = kappa_hat_value(mu_inc)? - (counts[1] - counts[0]) / inc_steps;
    let cv_coef = if p.alpha >= p.beta { p.alpha } else { -p.beta };
    let per_replica: Vec<(f64, f64, f64)> = (0..replicas as u64)
        .into_par_iter()
        .map(|i| {
            let omega = monomer_sequence(replica_seed(seed, i), steps as usize);
            let n_a = omega[half_steps as usize..].iter().filter(|&&m| m == crate::Label::A).count() as f64;
            let cv = cv_coef * (n_a / inc_steps - 0.5);
            let z = quenched_interface_logz_checkpoints(
                &QuenchedInterfaceQuery { alpha: p.alpha, beta: p.beta, l, omega },
                &checkpoints,
            )?;
            let inc = (z[1] - z[0]) / inc_steps;
            Ok((inc, z[1] / steps as f64, inc - cv))
        })
        .collect::<Result<Vec<_>>>()?;
    let (inc_mean, inc_var) = mean_var(per_replica.iter().map(|v| v.0));
    let (raw_mean, raw_var) = mean_var(per_replica.iter().map(|v| v.1));
    let (cv_mean, cv_var) = mean_var(per_replica.iter().map(|v| v.2));
    let n = per_replica.len() as f64;
    let realized = InterfaceParams { mu: mu_inc, ..p };
    Ok(QuenchedEstimate {
        mean: inc_mean + entropic_shift,
        stderr: (inc_var / n).sqrt(),
        cv_mean: cv_mean + entropic_shift,
        cv_stderr: (cv_var / n).sqrt(),
        raw_mean,
        spread: raw_var.sqrt(),
        entropic_shift,
        lower_bound: phi_lower_bounds(realized)?,
        upper_bound: phi_upper_bound(realized)?,
        l,
        steps,
        mu_realized: mu_inc,
        replicas,
        seed,
    })
}

pub(crate) fn mean_var(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    let var = if n > 1.0 { values.map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    (mean, var)
}

/// Supplier of `φ^I(μ)` for a fixed `(α, β)`: rigorous bounds and, optionally, a
/// point estimate.
pub trait PhiSource: Sync {
    fn lower(&self, alpha: f64, beta: f64, mu: f64) -> Result<f64>;
    fn upper(&self, alpha: f64, beta: f64, mu: f64) -> Result<f64>;
    /// Point estimate with its standard error, if the source has one.
    fn estimate(&self, alpha: f64, beta: f64, mu: f64) -> Result<Option<(f64, f64)>>;
    /// Ratios where the bound functions have kinks; optimisers evaluate them exactly.
    fn breakpoints(&self) -> Vec<f64> {
        vec![STRATEGY_MU]
    }
    /// Largest ratio at which `estimate` carries information of its own.
    fn estimate_cap(&self) -> f64 {
        MU_CAP
    }
}

/// Closed-form bounds only.
#[derive(Debug, Clone, Copy, Default)]
pub struct BoundsOnly;

impl PhiSource for BoundsOnly {
    fn lower(&self, alpha: f64, beta: f64, mu: f64) -> Result<f64> {
        phi_lower_bounds(InterfaceParams::new(alpha, beta, mu)?)
    }
    fn upper(&self, alpha: f64, beta: f64, mu: f64) -> Result<f64> {
        phi_upper_bound(InterfaceParams::new(alpha, beta, mu)?)
    }
    fn estimate(&self, _: f64, _: f64, _: f64) -> Result<Option<(f64, f64)>> {
        Ok(None)
    }
}

/// Grid of ratios on which Monte Carlo values are memoised: `1, 1.05, …, 6`.
pub fn mu_grid() -> Vec<f64> {
    (0..=100).map(|i| 1.0 + 0.05 * i as f64).collect()
}

type MemoKey = (u64, u64, u64, u32, u32, u64);

/// Bounds plus memoised Monte Carlo point estimates (`cv_mean`, `cv_stderr`) on
/// the `mu_grid`, linearly interpolated in between. Beyond the grid the estimate is the bound midpoint.
#[derive(Debug)]
pub struct MonteCarloPhi {
    pub l: u32,
    pub replicas: u32,
    pub seed: u64,
    pub grid: Vec<f64>,
    memo: Mutex<HashMap<MemoKey, QuenchedEstimate>>,
}

impl MonteCarloPhi {
    pub fn new(l: u32, replicas: u32, seed: u64) -> Self {
        Self::with_grid(l, replicas, seed, mu_grid())
    }

    pub fn with_grid(l: u32, replicas: u32, seed: u64, grid: Vec<f64>) -> Self {
        MonteCarloPhi { l, replicas, seed, grid, memo: Mutex::new(HashMap::new()) }
    }

    /// Memoised `phi_interface` at an exact ratio.
    pub fn at(&self, alpha: f64, beta: f64, mu: f64) -> Result<QuenchedEstimate> {
        let key = (alpha.to_bits(), beta.to_bits(), mu.to_bits(), self.l, self.replicas, self.seed);
        if let Some(e) = self.memo.lock().expect("memo lock").get(&key) {
            return Ok(*e);
        }
        let e = phi_interface(InterfaceParams::new(alpha, beta, mu)?, self.l, self.replicas, self.seed)?;
        self.memo.lock().expect("memo lock").insert(key, e);
        Ok(e)
    }

    pub fn memo_len(&self) -> usize {
        self.memo.lock().expect("memo lock").len()
    }
}

impl PhiSource for MonteCarloPhi {
    fn lower(&self, alpha: f64, beta: f64, mu: f64) -> Result<f64> {
        BoundsOnly.lower(alpha, beta, mu)
    }
    fn upper(&self, alpha: f64, beta: f64, mu: f64) -> Result<f64> {
        BoundsOnly.upper(alpha, beta, mu)
    }
    fn estimate(&self, alpha: f64, beta: f64, mu: f64) -> Result<Option<(f64, f64)>> {
        let g = &self.grid;
        if mu < g[0] || mu > g[g.len() - 1] {
            let lo = self.lower(alpha, beta, mu)?;
            let hi = self.upper(alpha, beta, mu.min(MU_CAP))?;
            return Ok(Some((0.5 * (lo + hi), 0.5 * (hi - lo))));
        }
        let k = g.partition_point(|&x| x <= mu).clamp(1, g.len() - 1);
        let (m0, m1) = (g[k - 1], g[k]);
        let e0 = self.at(alpha, beta, m0)?;
        if mu == m0 {
            return Ok(Some((e0.cv_mean, e0.cv_stderr)));
        }
        let e1 = self.at(alpha, beta, m1)?;
        let w = (mu - m0) / (m1 - m0);
        Ok(Some((
            (1.0 - w) * e0.cv_mean + w * e1.cv_mean,
            (1.0 - w) * e0.cv_stderr + w * e1.cv_stderr,
        )))
    }
    fn breakpoints(&self) -> Vec<f64> {
        let mut b = self.grid.clone();
        b.push(STRATEGY_MU);
        b
    }
    fn estimate_cap(&self) -> f64 {
        self.grid[self.grid.len() - 1]
    }
}
