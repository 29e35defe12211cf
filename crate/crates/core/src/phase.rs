//! Phase diagram: free energies per regime, the supercritical curve envelope,
//! the subcritical slope `α*(p)` and the second-curve lower bound.

use rayon::prelude::*;

use crate::blocks::{
    criterion_pointwise, criterion_supercritical, interface_margin, s_diag, s_offdiag_upper, BlockPairKind, PhaseVerdict,
    Verdict,
};
use crate::deloc::{f_of_rho, solve_deloc, DelocParams};
use crate::entropy::{kappa_star, A_STAR, MU_CAP};
use crate::error::{invalid, Error, Result};
use crate::interface::PhiSource;
use crate::optimize::{bisect, halfline_max, ARG_TOL};
use crate::percolation::PC;

/// Tolerance on curve coordinates found by bisection.
pub const CURVE_TOL: f64 = 1e-4;

/// Tolerance on the Monte Carlo crossing, well below its error bar.
pub const ESTIMATE_TOL: f64 = 1e-3;

/// Tolerance on `α*(p)`.
pub const ALPHA_STAR_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub alpha: f64,
    pub beta: f64,
    pub p: f64,
    pub supercritical: bool,
}

/// A point reduced into `α ≥ |β|`, with what it takes to map results back.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeReduction {
    pub point: PhasePoint,
    /// The energies and density were swapped: `(α, β; p) → (β, α; 1-p)`.
    pub swapped: bool,
    /// The energies were reflected: `(α, β) → (-β, -α)`.
    pub reflected: bool,
    /// Added to the reduced free energy to get the original one.
    pub shift: f64,
}

impl PhasePoint {
    /// Regime from `p ≥ pc`.
    pub fn new(alpha: f64, beta: f64, p: f64, pc: f64) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite()) {
            return invalid("alpha and beta must be finite");
        }
        if !(p > 0.0 && p < 1.0) {
            return invalid(format!("p = {p} must lie in (0, 1)"));
        }
        Ok(PhasePoint { alpha, beta, p, supercritical: p >= pc })
    }

    pub fn in_cone(&self) -> bool {
        self.alpha >= self.beta.abs()
    }

    /// Maps into the cone through `f(α,β;p) = f(β,α;1-p)` and
    /// `f(α,β;p) = ½(α+β) + f(-β,-α;p)`.
    pub fn to_cone(&self, pc: f64) -> Result<ConeReduction> {
        let (mut a, mut b, mut p) = (self.alpha, self.beta, self.p);
        let swapped = b > a;
        if swapped {
            (a, b, p) = (b, a, 1.0 - p);
        }
        let reflected = a < b.abs();
        let mut shift = 0.0;
        if reflected {
            shift = 0.5 * (a + b);
            (a, b) = (-b, -a);
        }
        Ok(ConeReduction { point: PhasePoint::new(a, b, p, pc)?, swapped, reflected, shift })
    }
}

fn check_cone(pt: &PhasePoint) -> Result<()> {
    if pt.in_cone() {
        Ok(())
    } else {
        invalid(format!("({}, {}) is outside the cone alpha >= |beta|", pt.alpha, pt.beta))
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if rho > 0.0 && rho < 1.0 {
        Ok(())
    } else {
        invalid(format!("rho* = {rho} must lie in (0, 1)"))
    }
}

/// `ȳ` of the delocalized variational problem; it depends on `C` and `ρ` only.
pub fn y_bar(c: f64, rho: f64) -> Result<f64> {
    check_rho(rho)?;
    Ok(solve_deloc(DelocParams::new(c, 0.0, rho)?)?.y_bar)
}

/// Verdict for a point in the cone. Supercritical points use the `S_AB` against
/// `S_AA` criterion; subcritical points the `ψ_BA(ȳ)` against `ψ_BB(ȳ)` criterion at
/// the `ȳ` of `F(α, β; ρ*)`. `rho_star` is ignored in the supercritical regime.
pub fn classify(pt: &PhasePoint, rho_star: f64, src: &dyn PhiSource) -> Result<PhaseVerdict> {
    check_cone(pt)?;
    if pt.supercritical {
        return criterion_supercritical(pt.alpha, pt.beta, src);
    }
    let y = if pt.alpha == pt.beta { A_STAR } else { y_bar(pt.alpha - pt.beta, rho_star)? };
    check_rho(rho_star)?;
    criterion_pointwise(BlockPairKind::BA, y, pt.alpha, pt.beta, src)
}

/// Free energy, or a bracket on it when the point is not certified delocalized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeEnergy {
    pub verdict: PhaseVerdict,
    pub lower: f64,
    pub upper: f64,
    /// `lower == upper` is the free energy.
    pub exact: bool,
    /// The free energy is strictly above `lower`.
    pub strict_lower: bool,
}

/// Free energy of a point in the cone.
///
/// Delocalized: `½α + ½ log 5` above `pc`, `F(α, β; ρ*)` below. Otherwise the
/// reduced value is a lower bound (strict when Localized, since a positive
/// fraction of off-diagonal pairs then gains), and `S_AB` is an upper bound.
pub fn free_energy(pt: &PhasePoint, rho_star: f64, src: &dyn PhiSource) -> Result<FreeEnergy> {
    let verdict = classify(pt, rho_star, src)?;
    let reduced = if pt.supercritical {
        s_diag(BlockPairKind::AA, pt.alpha, pt.beta)?.0
    } else if pt.alpha == pt.beta {
        0.5 * pt.alpha + kappa_star()
    } else {
        f_of_rho(DelocParams::new(pt.alpha, pt.beta, rho_star)?)?
    };
    if verdict.state == Verdict::Delocalized {
        return Ok(FreeEnergy { verdict, lower: reduced, upper: reduced, exact: true, strict_lower: false });
    }
    let s_ab = s_offdiag_upper(BlockPairKind::AB, pt.alpha, pt.beta, src)?;
    Ok(FreeEnergy {
        verdict,
        lower: reduced,
        upper: s_ab.max(reduced),
        exact: false,
        strict_lower: verdict.state == Verdict::Localized,
    })
}

/// `log(2 - e^{-α})`: below it the annealed bound rules out interface gain.
pub fn second_curve_lower(alpha: f64) -> Result<f64> {
    if !(alpha >= 0.0) || alpha.is_infinite() {
        return invalid(format!("alpha = {alpha} must be finite and >= 0"));
    }
    Ok((2.0 - (-alpha).exp()).ln())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub alpha: f64,
    /// `log(2 - e^{-α})`.
    pub beta_lower: f64,
    /// Smallest `β` certified Localized by lower bounds on `φ^I`, capped at
    /// `min(α, 8 log 3)`.
    pub beta_upper: f64,
    /// Crossing of the criterion evaluated with the source's point estimate.
    pub beta_estimate: Option<f64>,
    /// Half the spread of the crossing when the estimate moves by ±1 stderr.
    pub beta_estimate_err: Option<f64>,
    /// `(α, α)` is certified Delocalized, so `β_c(α) = α`.
    pub diagonal: bool,
}

/// The source's bounds with its estimate removed, so that rigorous bisections do
/// not trigger Monte Carlo runs.
struct BoundsOf<'a>(&'a dyn PhiSource);

impl PhiSource for BoundsOf<'_> {
    fn lower(&self, alpha: f64, beta: f64, mu: f64) -> Result<f64> {
        self.0.lower(alpha, beta, mu)
    }
    fn upper(&self, alpha: f64, beta: f64, mu: f64) -> Result<f64> {
        self.0.upper(alpha, beta, mu)
    }
    fn estimate(&self, _: f64, _: f64, _: f64) -> Result<Option<(f64, f64)>> {
        Ok(None)
    }
    fn breakpoints(&self) -> Vec<f64> {
        self.0.breakpoints()
    }
}

/// The source's estimate moved by `k` standard errors.
struct Shifted<'a>(&'a dyn PhiSource, f64);

impl PhiSource for Shifted<'_> {
    fn lower(&self, alpha: f64, beta: f64, mu: f64) -> Result<f64> {
        self.0.lower(alpha, beta, mu)
    }
    fn upper(&self, alpha: f64, beta: f64, mu: f64) -> Result<f64> {
        self.0.upper(alpha, beta, mu)
    }
    fn estimate(&self, alpha: f64, beta: f64, mu: f64) -> Result<Option<(f64, f64)>> {
        Ok(self.0.estimate(alpha, beta, mu)?.map(|(m, s)| (m + self.1 * s, s)))
    }
    fn breakpoints(&self) -> Vec<f64> {
        self.0.breakpoints()
    }
    fn estimate_cap(&self) -> f64 {
        self.0.estimate_cap()
    }
}

/// Smallest `β ∈ [lo, hi]` where `localized(β)` holds, assuming it is monotone and
/// holds at `hi`.
fn crossing<F: Fn(f64) -> Result<bool>>(localized: F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    if localized(lo)? {
        return Ok(lo);
    }
    let (mut a, mut b) = (lo, hi);
    while b - a > tol {
        let m = 0.5 * (a + b);
        if localized(m)? {
            b = m;
        } else {
            a = m;
        }
    }
    Ok(b)
}

/// Envelope of the supercritical curve `β_c(α)` at `α ≥ 0`.
pub fn beta_c_envelope(alpha: f64, src: &dyn PhiSource) -> Result<CurvePoint> {
    let beta_lower = second_curve_lower(alpha)?;
    let cap = alpha.min(8.0 * 3f64.ln());
    let bounds = BoundsOf(src);
    let diagonal = criterion_supercritical(alpha, alpha, &bounds)?.state == Verdict::Delocalized;
    let certified = |b: f64| Ok(criterion_supercritical(alpha, b, &bounds)?.state == Verdict::Localized);
    let beta_upper = if !diagonal && certified(cap)? { crossing(certified, beta_lower, cap, CURVE_TOL)? } else { cap };
    let (beta_estimate, beta_estimate_err) = if diagonal {
        (Some(alpha), Some(0.0))
    } else if src.estimate(alpha, beta_lower, A_STAR)?.is_some() {
        let by_estimate = |s: &dyn PhiSource, lo: f64, hi: f64| {
            crossing(
                |b| {
                    let v = criterion_supercritical(alpha, b, s)?;
                    Ok(v.estimate_state() == Some(Verdict::Localized))
                },
                lo,
                hi,
                ESTIMATE_TOL,
            )
        };
        let mid = by_estimate(src, beta_lower, beta_upper)?;
        // a larger estimate localizes earlier
        let early = by_estimate(&Shifted(src, 1.0), beta_lower, mid)?;
        let late = by_estimate(&Shifted(src, -1.0), mid, beta_upper)?;
        (Some(mid), Some(0.5 * (late - early).abs()))
    } else {
        (None, None)
    };
    Ok(CurvePoint { alpha, beta_lower, beta_upper, beta_estimate, beta_estimate_err, diagonal })
}

/// `sup_μ μ[κ̂(μ) - G(μ, ȳ) + ½C]` with `ȳ = ȳ(C, ρ*)`; positive iff some ratio
/// gains from the interface, `+inf` if the objective still rises at the cap.
pub fn cut_margin(c: f64, rho_star: f64) -> Result<f64> {
    let y = if c == 0.0 { A_STAR } else { y_bar(c, rho_star)? };
    let s = halfline_max(|mu| mu * interface_margin(mu, y, c).unwrap_or(f64::NAN), 1.0, MU_CAP, ARG_TOL);
    if s.value.is_nan() {
        return Err(Error::Convergence(format!("cut margin is NaN at C = {c}, rho* = {rho_star}")));
    }
    Ok(s.value)
}

/// `α*(p)` for `ρ*(p) = rho_star`: the `C` where `cut_margin` changes sign.
pub fn alpha_star_p(rho_star: f64) -> Result<f64> {
    check_rho(rho_star)?;
    let f = |c: f64| cut_margin(c, rho_star).unwrap_or(f64::NAN);
    let lo = 0.0;
    if !(f(lo) < 0.0) {
        return Err(Error::Convergence(format!("cut margin is not negative at C = 0 (rho* = {rho_star})")));
    }
    let mut hi = 0.5;
    let mut scan = vec![];
    while !(f(hi) > 0.0) {
        scan.push((hi, f(hi)));
        if hi > 64.0 {
            return Err(Error::Convergence(format!("no sign change of the cut margin up to C = {hi}: {scan:?}")));
        }
        hi *= 2.0;
    }
    bisect(f, lo, hi, ALPHA_STAR_TOL)
}

/// Where the sweep gets `ρ*` for the two densities it may need.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSettings {
    pub pc: f64,
    /// `ρ*(p)`, needed for subcritical cells that are not swapped.
    pub rho_p: Option<f64>,
    /// `ρ*(1-p)`, needed for subcritical cells that are swapped.
    pub rho_q: Option<f64>,
}

impl Default for SweepSettings {
    fn default() -> Self {
        SweepSettings { pc: PC, rho_p: None, rho_q: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub alpha: f64,
    pub beta: f64,
    pub p: f64,
    pub result: Result<(ConeReduction, FreeEnergy)>,
}

/// Free energy at any `(α, β; p)` through its cone reduction, taking `ρ*` of the
/// reduced density from `settings`.
pub fn evaluate(alpha: f64, beta: f64, p: f64, settings: SweepSettings, src: &dyn PhiSource) -> Result<(ConeReduction, FreeEnergy)> {
    let reduction = PhasePoint::new(alpha, beta, p, settings.pc)?.to_cone(settings.pc)?;
    let pt = reduction.point;
    let rho = match (pt.supercritical, if reduction.swapped { settings.rho_q } else { settings.rho_p }) {
        (true, _) => f64::NAN,
        (false, Some(r)) => r,
        (false, None) => return invalid(format!("rho* at density {} is required", pt.p)),
    };
    let mut fe = free_energy(&pt, rho, src)?;
    fe.lower += reduction.shift;
    fe.upper += reduction.shift;
    Ok((reduction, fe))
}

/// Evaluates every cell `(α_i, β_j)` of the region, `α` outer and `β` inner.
/// Failed cells keep their error.
pub fn sweep(alphas: &[f64], betas: &[f64], p: f64, settings: SweepSettings, src: &dyn PhiSource) -> Vec<SweepRow> {
    let cells: Vec<(f64, f64)> = alphas.iter().flat_map(|&a| betas.iter().map(move |&b| (a, b))).collect();
    cells
        .par_iter()
        .map(|&(alpha, beta)| SweepRow { alpha, beta, p, result: evaluate(alpha, beta, p, settings, src) })
        .collect()
}

/// Evenly spaced values from `lo` to `hi` with spacing at most `step`.
pub fn linspace_step(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(hi >= lo) || !lo.is_finite() || !hi.is_finite() {
        return invalid(format!("bad range [{lo}, {hi}] with step {step}"));
    }
    let n = ((hi - lo) / step - 1e-9).ceil().max(0.0) as usize;
    if n > 100_000 {
        return invalid(format!("range [{lo}, {hi}] with step {step} has too many points"));
    }
    Ok((0..=n).map(|i| if n == 0 { lo } else { lo + (hi - lo) * i as f64 / n as f64 }).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cone_reduction_cases() {
        let r = PhasePoint::new(-3.0, 1.0, 0.3, PC).unwrap().to_cone(PC).unwrap();
        assert_eq!((r.point.alpha, r.point.beta), (3.0, -1.0));
        assert!(r.swapped && r.reflected);
        assert!((r.point.p - 0.7).abs() < 1e-15 && r.point.supercritical);
        assert_eq!(r.shift, -1.0);
        let r = PhasePoint::new(2.0, -1.0, 0.3, PC).unwrap().to_cone(PC).unwrap();
        assert!(!r.swapped && !r.reflected && r.shift == 0.0);
    }

    #[test]
    fn linspace_hits_both_ends() {
        let v = linspace_step(0.0, 5.0, 0.1).unwrap();
        assert_eq!(v.len(), 51);
        assert_eq!((v[0], v[50]), (0.0, 5.0));
        assert_eq!(linspace_step(1.0, 1.0, 0.1).unwrap(), vec![1.0]);
    }
}
