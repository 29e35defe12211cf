//! Block-pair free energies `ψ_kl(a)`, their suprema `S_kl`, and the
//! localization criteria comparing off-diagonal and diagonal pairs.
//!
//! A block pair `kl` is crossed diagonally through the `k`-block while the
//! `l`-block is its neighbour across the interface. Off-diagonal pairs may follow
//! the interface for a while, which is where `φ^I` enters.

use std::fmt;

use crate::entropy::{g_of_nu, kappa_hat_value, kappa_star, kappa_value, slope_const, A_STAR, MU_CAP};
use crate::error::{domain, invalid, Result};
use crate::interface::{mu_grid, PhiSource};
use crate::optimize::{golden_max, grid_max, Maximum, Supremum, ARG_TOL};
use crate::Label;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BlockPairKind {
    AA,
    AB,
    BA,
    BB,
}

impl BlockPairKind {
    pub fn new(crossed: Label, neighbor: Label) -> Self {
        match (crossed, neighbor) {
            (Label::A, Label::A) => BlockPairKind::AA,
            (Label::A, Label::B) => BlockPairKind::AB,
            (Label::B, Label::A) => BlockPairKind::BA,
            (Label::B, Label::B) => BlockPairKind::BB,
        }
    }

    pub fn crossed(self) -> Label {
        match self {
            BlockPairKind::AA | BlockPairKind::AB => Label::A,
            _ => Label::B,
        }
    }

    pub fn neighbor(self) -> Label {
        match self {
            BlockPairKind::AA | BlockPairKind::BA => Label::A,
            _ => Label::B,
        }
    }

    pub fn is_diagonal(self) -> bool {
        self.crossed() == self.neighbor()
    }

    /// Energy collected while crossing the bulk of the crossed block.
    fn bulk_energy(self, alpha: f64, beta: f64) -> f64 {
        match self.crossed() {
            Label::A => alpha,
            Label::B => beta,
        }
    }
}

impl fmt::Display for BlockPairKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.crossed(), self.neighbor())
    }
}

impl std::str::FromStr for BlockPairKind {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "AA" => Ok(BlockPairKind::AA),
            "AB" => Ok(BlockPairKind::AB),
            "BA" => Ok(BlockPairKind::BA),
            "BB" => Ok(BlockPairKind::BB),
            _ => invalid(format!("unknown block pair '{s}' (expected AA, AB, BA or BB)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockFreeEnergy {
    pub kind: BlockPairKind,
    pub a: f64,
    /// Point value: the optimum with the source's estimate of `φ^I`, clamped into
    /// the bracket; the lower bracket when the source has no estimate.
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    /// Maximiser `(b, a₁)` of the lower-bracket problem.
    pub b_arg: f64,
    pub a1_arg: f64,
    /// True when that maximiser sits on the edge of the feasible set.
    pub boundary: bool,
}

/// `ψ_AA(a) = ½α + κ(a, 1)` and `ψ_BB(a) = ½β + κ(a, 1)`.
pub fn psi_diag(kind: BlockPairKind, a: f64, alpha: f64, beta: f64) -> Result<f64> {
    if !kind.is_diagonal() {
        return invalid(format!("psi_diag needs AA or BB, got {kind}"));
    }
    if !(a >= 2.0) {
        return domain(format!("a = {a} must be >= 2"));
    }
    Ok(0.5 * kind.bulk_energy(alpha, beta) + kappa_value(a, 1.0)?)
}

/// `S_AA = ½α + ½ log 5` (or `S_BB` with `β`), attained at `a* = 5/2`.
pub fn s_diag(kind: BlockPairKind, alpha: f64, beta: f64) -> Result<(f64, f64)> {
    if !kind.is_diagonal() {
        return invalid(format!("s_diag needs AA or BB, got {kind}"));
    }
    Ok((0.5 * kind.bulk_energy(alpha, beta) + kappa_star(), A_STAR))
}

/// Which function of `φ^I` an optimisation runs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Branch {
    Lower,
    Upper,
    Estimate,
}

fn phi_branch(src: &dyn PhiSource, branch: Branch, alpha: f64, beta: f64, mu: f64) -> f64 {
    let v = match branch {
        Branch::Lower => src.lower(alpha, beta, mu),
        Branch::Upper => src.upper(alpha, beta, mu.min(MU_CAP)),
        Branch::Estimate => clamped_estimate(src, alpha, beta, mu),
    };
    v.unwrap_or(f64::NAN)
}

/// The source's estimate clamped into the bound bracket, where the true value
/// lies; the lower bound when there is no estimate.
fn clamped_estimate(src: &dyn PhiSource, alpha: f64, beta: f64, mu: f64) -> Result<f64> {
    let lo = src.lower(alpha, beta, mu)?;
    match src.estimate(alpha, beta, mu)? {
        Some((m, _)) => Ok(m.clamp(lo, src.upper(alpha, beta, mu.min(MU_CAP))?.max(lo))),
        None => Ok(lo),
    }
}

/// `ψ_kl(a)` for the off-diagonal pairs:
/// `sup_{b, a₁} [a₁ φ^I(a₁/b) + a₂(½c + κ(a₂, 1-b))] / a` with `a₂ = a - a₁`,
/// `0 ≤ b ≤ 1`, `b ≤ a₁ ≤ a - 2 + b`, and `c = α` for AB, `c = β` for BA.
///
/// The supremum is run three times: with the lower and upper bounds on `φ^I`
/// (the bracket) and with the source's estimate (the point value).
pub fn psi_offdiag(kind: BlockPairKind, a: f64, alpha: f64, beta: f64, src: &dyn PhiSource) -> Result<BlockFreeEnergy> {
    if kind.is_diagonal() {
        return invalid(format!("psi_offdiag needs AB or BA, got {kind}"));
    }
    if !(a >= 2.0) || !a.is_finite() {
        return domain(format!("a = {a} must be >= 2"));
    }
    let c = kind.bulk_energy(alpha, beta);
    let lower = composition_sup(a, c, |mu| phi_branch(src, Branch::Lower, alpha, beta, mu));
    let upper = composition_sup(a, c, |mu| phi_branch(src, Branch::Upper, alpha, beta, mu));
    let has_estimate = src.estimate(alpha, beta, A_STAR)?.is_some();
    let value = if has_estimate {
        let e = composition_sup(a, c, |mu| phi_branch(src, Branch::Estimate, alpha, beta, mu));
        e.value.clamp(lower.value, upper.value.max(lower.value))
    } else {
        lower.value
    };
    if !(lower.value.is_finite() && upper.value.is_finite()) {
        return Err(crate::Error::Convergence(format!("psi_{kind}({a}) did not evaluate to a finite bracket")));
    }
    Ok(BlockFreeEnergy {
        kind,
        a,
        value,
        lower: lower.value,
        upper: upper.value.max(lower.value),
        b_arg: lower.b,
        a1_arg: lower.a1,
        boundary: lower.boundary,
    })
}

#[derive(Debug, Clone, Copy)]
struct CompositionMax {
    value: f64,
    b: f64,
    a1: f64,
    boundary: bool,
}

/// Two-level supremum for `psi_offdiag`: a grid in `b` with a grid-then-golden
/// search in `a₁` for each `b`, then a golden refinement in `b` around the best cell.
fn composition_sup<F: Fn(f64) -> f64>(a: f64, c: f64, phi: F) -> CompositionMax {
    let diag = 0.5 * c + kappa_value(a, 1.0).unwrap_or(f64::NAN);
    let objective = |b: f64, a1: f64| -> f64 {
        let a2 = a - a1;
        let cross = kappa_value(a2.max(2.0 - b), 1.0 - b).unwrap_or(f64::NEG_INFINITY);
        let v = (a1 * phi(a1 / b) + a2 * (0.5 * c + cross)) / a;
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    };
    let inner = |b: f64| -> Maximum {
        if b <= 0.0 {
            return Maximum { arg: 0.0, value: diag };
        }
        let (lo, hi) = (b, a - 2.0 + b);
        if hi - lo <= ARG_TOL {
            return Maximum { arg: lo, value: objective(b, lo) };
        }
        let n = 16;
        let grid: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
        grid_max(|a1| objective(b, a1), &grid, ARG_TOL)
    };
    let nb = 100;
    let bs: Vec<f64> = (0..=nb).map(|i| i as f64 / nb as f64).collect();
    let rows: Vec<Maximum> = bs.iter().map(|&b| inner(b)).collect();
    let mut k = 0;
    for (i, r) in rows.iter().enumerate() {
        if r.value > rows[k].value {
            k = i;
        }
    }
    let mut best = CompositionMax { value: rows[k].value, b: bs[k], a1: rows[k].arg, boundary: false };
    let (blo, bhi) = (bs[k.saturating_sub(1)], bs[(k + 1).min(nb)]);
    let refined = golden_max(|b| inner(b).value, blo, bhi, 1e-7);
    if refined.value > best.value {
        let r = inner(refined.arg);
        best = CompositionMax { value: r.value, b: refined.arg, a1: r.arg, boundary: false };
    }
    let tol = 1e-6;
    best.boundary = best.b <= tol
        || best.b >= 1.0 - tol
        || (best.b > 0.0 && ((best.a1 - best.b).abs() <= tol || (a - 2.0 + best.b - best.a1).abs() <= tol));
    best
}

/// Three-valued outcome of a localization criterion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Delocalized,
    Localized,
    Undecided,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Delocalized => "Delocalized",
            Verdict::Localized => "Localized",
            Verdict::Undecided => "Undecided",
        })
    }
}

/// What settled a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Evidence {
    /// The supremum with lower bounds on `φ^I` already exceeds the threshold.
    LowerBound,
    /// The supremum with upper bounds on `φ^I` stays at or below the threshold.
    UpperBound,
    /// A closed-form result that needs no optimisation.
    Exact,
    /// Neither bound decides.
    None,
}

impl fmt::Display for Evidence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Evidence::LowerBound => "lower_bound",
            Evidence::UpperBound => "upper_bound",
            Evidence::Exact => "exact",
            Evidence::None => "none",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseVerdict {
    pub state: Verdict,
    pub evidence: Evidence,
    /// Margin by which the deciding bound clears the threshold; for Undecided the
    /// width `upper_sup - lower_sup` of the unresolved bracket.
    pub gap: f64,
    pub threshold: f64,
    pub lower_sup: f64,
    /// `+inf` when the upper-bound objective did not decay on `[1, 10⁶]`.
    pub upper_sup: f64,
    /// Supremum with the source's point estimate over the range it covers; never
    /// used to decide the verdict.
    pub estimate_sup: Option<f64>,
}

impl PhaseVerdict {
    pub fn exact(state: Verdict, threshold: f64) -> Self {
        PhaseVerdict {
            state,
            evidence: Evidence::Exact,
            gap: 0.0,
            threshold,
            lower_sup: f64::NAN,
            upper_sup: f64::NAN,
            estimate_sup: None,
        }
    }

    /// Verdict suggested by the point estimate alone, if there is one.
    pub fn estimate_state(&self) -> Option<Verdict> {
        self.estimate_sup.map(|s| if s > self.threshold { Verdict::Localized } else { Verdict::Delocalized })
    }

    fn from_sups(lower_sup: f64, upper_sup: f64, threshold: f64, estimate_sup: Option<f64>) -> Self {
        let (state, evidence, gap) = if lower_sup > threshold {
            (Verdict::Localized, Evidence::LowerBound, lower_sup - threshold)
        } else if upper_sup <= threshold {
            (Verdict::Delocalized, Evidence::UpperBound, threshold - upper_sup)
        } else {
            (Verdict::Undecided, Evidence::None, upper_sup - lower_sup)
        };
        PhaseVerdict { state, evidence, gap, threshold, lower_sup, upper_sup, estimate_sup }
    }
}

/// Ratios scanned by `sup_over_mu`: the `φ^I` grid on `[1, 6]`, the source's
/// breakpoints, and a geometric tail up to `10⁶`.
fn mu_scan(breakpoints: &[f64], cap: f64) -> Vec<f64> {
    let mut xs = mu_grid();
    xs.extend(breakpoints.iter().copied().filter(|&m| m >= 1.0));
    let mut m = 6.0;
    while m < cap {
        m *= 1.25;
        xs.push(m.min(cap));
    }
    xs.retain(|&m| m <= cap);
    xs.sort_by(|a, b| a.total_cmp(b));
    xs.dedup();
    xs
}

/// `sup_{1 ≤ μ ≤ cap} h(μ)` by scanning `mu_scan` and refining the best point by
/// golden section against each neighbour. `bounded` is false when the best
/// scanned point is the cap itself.
fn sup_over_mu<F: Fn(f64) -> f64>(h: F, breakpoints: &[f64], cap: f64) -> Supremum {
    scan_sup(h, &mu_scan(breakpoints, cap), cap < MU_CAP)
}

/// `sup h` over `[xs[0], xs[last]]` by scanning `xs` and refining the best point by
/// golden section against each neighbour. Unbounded when the best point is the
/// last one and `capped` is false.
fn scan_sup<F: Fn(f64) -> f64>(h: F, xs: &[f64], capped: bool) -> Supremum {
    let vs: Vec<f64> = xs.iter().map(|&m| h(m)).map(|v| if v.is_nan() { f64::NEG_INFINITY } else { v }).collect();
    let mut k = 0;
    for (i, v) in vs.iter().enumerate() {
        if *v > vs[k] {
            k = i;
        }
    }
    let mut best = Supremum { arg: xs[k], value: vs[k], bounded: k + 1 < xs.len() || capped };
    // refine on each side separately so kinks at scanned points are respected
    for (lo, hi) in [(xs[k.saturating_sub(1)], xs[k]), (xs[k], xs[(k + 1).min(xs.len() - 1)])] {
        if hi > lo {
            let m = golden_max(&h, lo, hi, ARG_TOL * hi.max(1.0));
            if m.value > best.value {
                best.arg = m.arg;
                best.value = m.value;
            }
        }
    }
    best
}

/// `sup_μ μ[φ^I(μ) - shift]` against `threshold`, with lower bounds, upper bounds
/// and (if present) the estimate of `φ^I`.
fn criterion(alpha: f64, beta: f64, shift: f64, threshold: f64, src: &dyn PhiSource) -> Result<PhaseVerdict> {
    let bps = src.breakpoints();
    let objective = |branch: Branch| move |mu: f64| mu * (phi_branch(src, branch, alpha, beta, mu) - shift);
    let lower = sup_over_mu(objective(Branch::Lower), &bps, MU_CAP);
    let upper = sup_over_mu(objective(Branch::Upper), &bps, MU_CAP);
    let upper_sup = if upper.bounded { upper.value } else { f64::INFINITY };
    let estimate_sup = if src.estimate(alpha, beta, A_STAR)?.is_some() {
        Some(sup_over_mu(objective(Branch::Estimate), &bps, src.estimate_cap()).value)
    } else {
        None
    };
    if lower.value.is_nan() || upper_sup.is_nan() {
        return Err(crate::Error::Convergence("criterion supremum is NaN".into()));
    }
    Ok(PhaseVerdict::from_sups(lower.value, upper_sup.max(lower.value), threshold, estimate_sup))
}

/// `S_AB > S_AA` iff `sup_μ μ[φ^I(μ) - S_AA] > ½ log(9/5)`.
pub fn criterion_supercritical(alpha: f64, beta: f64, src: &dyn PhiSource) -> Result<PhaseVerdict> {
    check_energies(alpha, beta)?;
    criterion(alpha, beta, 0.5 * alpha + kappa_star(), slope_const(), src)
}

/// `ψ_AB(a) > ψ_AA(a)` iff
/// `sup_μ μ[φ^I(μ) - ½α - ½ log(a/(a-2))] > ½ log[4(a-2)(a-1)²/a]`;
/// for `BA` against `BB` the same with `β` in place of `α`.
pub fn criterion_pointwise(
    kind: BlockPairKind,
    a: f64,
    alpha: f64,
    beta: f64,
    src: &dyn PhiSource,
) -> Result<PhaseVerdict> {
    check_energies(alpha, beta)?;
    if kind.is_diagonal() {
        return invalid(format!("criterion_pointwise compares AB or BA, got {kind}"));
    }
    if !(a > 2.0) || !a.is_finite() {
        return domain(format!("a = {a} must be > 2"));
    }
    let (shift, threshold) = pointwise_constants(a);
    criterion(alpha, beta, 0.5 * kind.bulk_energy(alpha, beta) + shift, threshold, src)
}

/// `(½ log(a/(a-2)), ½ log[4(a-2)(a-1)²/a])`.
pub fn pointwise_constants(a: f64) -> (f64, f64) {
    (0.5 * (a / (a - 2.0)).ln(), 0.5 * (4.0 * (a - 2.0) * (a - 1.0).powi(2) / a).ln())
}

fn check_energies(alpha: f64, beta: f64) -> Result<()> {
    if alpha.is_finite() && beta.is_finite() {
        Ok(())
    } else {
        invalid(format!("energies must be finite, got ({alpha}, {beta})"))
    }
}

/// `G(μ, a) = ½((μ-1)/μ) log(a/(a-2)) + (1/μ) log[2(a-1)]`.
pub fn g_mu_a(mu: f64, a: f64) -> Result<f64> {
    if !(mu >= 1.0) {
        return domain(format!("mu = {mu} must be >= 1"));
    }
    if !(a > 2.0) {
        return domain(format!("a = {a} must be > 2"));
    }
    Ok(0.5 * ((mu - 1.0) / mu) * (a / (a - 2.0)).ln() + (2.0 * (a - 1.0)).ln() / mu)
}

/// Bracket on `S_kl` for an off-diagonal pair, through
/// `S_kl - S_kk = max(0, sup_{μ,ν ≥ 1} (μ[φ^I(μ) - S_kk] - g(ν)) / (μ + ν))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupremumBracket {
    pub kind: BlockPairKind,
    pub lower: f64,
    pub upper: f64,
    pub estimate: Option<f64>,
}

pub fn s_offdiag(kind: BlockPairKind, alpha: f64, beta: f64, src: &dyn PhiSource) -> Result<SupremumBracket> {
    let s_kk = offdiag_base(kind, alpha, beta)?;
    let lower = s_kk + offdiag_excess(kind, alpha, beta, src, Branch::Lower, MU_CAP);
    let upper = (s_kk + offdiag_excess(kind, alpha, beta, src, Branch::Upper, MU_CAP)).max(lower);
    let estimate = if src.estimate(alpha, beta, A_STAR)?.is_some() {
        Some((s_kk + offdiag_excess(kind, alpha, beta, src, Branch::Estimate, src.estimate_cap())).clamp(lower, upper))
    } else {
        None
    };
    Ok(SupremumBracket { kind, lower, upper, estimate })
}

/// Upper end of the `s_offdiag` bracket alone, at half the cost.
pub fn s_offdiag_upper(kind: BlockPairKind, alpha: f64, beta: f64, src: &dyn PhiSource) -> Result<f64> {
    let s_kk = offdiag_base(kind, alpha, beta)?;
    Ok(s_kk + offdiag_excess(kind, alpha, beta, src, Branch::Upper, MU_CAP))
}

fn offdiag_base(kind: BlockPairKind, alpha: f64, beta: f64) -> Result<f64> {
    check_energies(alpha, beta)?;
    if kind.is_diagonal() {
        return invalid(format!("s_offdiag needs AB or BA, got {kind}"));
    }
    Ok(0.5 * kind.bulk_energy(alpha, beta) + kappa_star())
}

/// `S_kl - S_kk = max(0, sup_{μ,ν} (μ[φ^I(μ) - S_kk] - g(ν)) / (μ + ν))` for one
/// branch of `φ^I`, with `ν` outer so that each `g(ν)` is computed once.
fn offdiag_excess(kind: BlockPairKind, alpha: f64, beta: f64, src: &dyn PhiSource, branch: Branch, cap: f64) -> f64 {
    let s_kk = 0.5 * kind.bulk_energy(alpha, beta) + kappa_star();
    let bps = src.breakpoints();
    let xs = mu_scan(&bps, cap);
    let ms: Vec<f64> = xs.iter().map(|&mu| mu * (phi_branch(src, branch, alpha, beta, mu) - s_kk)).collect();
    // g(ν) > ½ log(9/5) for every ν, so nothing is gained unless some μ-term exceeds it
    let m_sup = scan_sup(|mu| mu * (phi_branch(src, branch, alpha, beta, mu) - s_kk), &xs, cap < MU_CAP);
    if !(m_sup.value > slope_const()) {
        return 0.0;
    }
    // value at ν and whether its μ-maximiser is the cap
    let over_mu = |nu: f64| -> (f64, bool) {
        let Ok(g) = g_of_nu(nu) else { return (f64::NAN, false) };
        // the scan reuses the tabulated μ-terms; only the refinement evaluates φ^I again
        let mut k = 0;
        let vals: Vec<f64> = xs.iter().zip(&ms).map(|(&mu, &m)| (m - g) / (mu + nu)).collect();
        for (i, v) in vals.iter().enumerate() {
            if v > &vals[k] || vals[k].is_nan() {
                k = i;
            }
        }
        let h = |mu: f64| (mu * (phi_branch(src, branch, alpha, beta, mu) - s_kk) - g) / (mu + nu);
        let mut best = vals[k];
        for (lo, hi) in [(xs[k.saturating_sub(1)], xs[k]), (xs[k], xs[(k + 1).min(xs.len() - 1)])] {
            if hi > lo {
                best = best.max(golden_max(&h, lo, hi, ARG_TOL * hi.max(1.0)).value);
            }
        }
        (best, k + 1 == xs.len() && cap >= MU_CAP)
    };
    let s = scan_sup(|nu| over_mu(nu).0, &nu_scan(), true);
    if branch == Branch::Upper && over_mu(s.arg).1 {
        return f64::INFINITY;
    }
    s.value.max(0.0)
}

/// `ν` grid for `offdiag_excess`: `1, 1.125, …, 6` and a geometric tail to `10⁶`.
fn nu_scan() -> Vec<f64> {
    let mut xs: Vec<f64> = (0..=40).map(|i| 1.0 + 0.125 * i as f64).collect();
    let mut nu = 6.0;
    while nu < MU_CAP {
        nu *= 1.25;
        xs.push(nu.min(MU_CAP));
    }
    xs
}

/// The same supremum with `μ` outer and a `ν`-search per `μ`; kept as a reference.
#[cfg(test)]
fn offdiag_excess_nested(kind: BlockPairKind, alpha: f64, beta: f64, src: &dyn PhiSource, branch: Branch, cap: f64) -> f64 {
    use crate::optimize::halfline_max;
    let s_kk = 0.5 * kind.bulk_energy(alpha, beta) + kappa_star();
    let threshold = slope_const();
    let gain = |mu: f64| {
        let m = mu * (phi_branch(src, branch, alpha, beta, mu) - s_kk);
        if !(m > threshold) {
            return 0.0;
        }
        // g(ν) > ½ log(9/5) for every ν and tends to it, so the ν-sup is finite
        let s = halfline_max(|nu| (m - g_of_nu(nu).unwrap_or(f64::NAN)) / (mu + nu), 1.0, MU_CAP, 1e-7);
        if s.bounded {
            s.value.max(0.0)
        } else {
            0.0
        }
    };
    let s = sup_over_mu(gain, &src.breakpoints(), cap);
    if s.bounded || branch != Branch::Upper {
        s.value
    } else {
        f64::INFINITY
    }
}

/// `κ̂(μ) - [G(μ, a) - ½C]`: the interface gain against the cost of leaving a
/// B-block crossed in ratio `a`, in the delocalized variational problem.
pub fn interface_margin(mu: f64, a: f64, c: f64) -> Result<f64> {
    Ok(kappa_hat_value(mu)? - (g_mu_a(mu, a)? - 0.5 * c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interface::BoundsOnly;

    #[test]
    fn g_special_values() {
        assert!((g_mu_a(1.0, 2.5).unwrap() - 3f64.ln()).abs() < 1e-15);
        let v = g_mu_a(2.0, 3.0).unwrap();
        assert!((v - (0.25 * 3f64.ln() + 0.5 * 4f64.ln())).abs() < 1e-15);
        assert!((g_mu_a(1e9, 2.5).unwrap() - kappa_star()).abs() < 1e-8);
        assert!(g_mu_a(0.5, 3.0).is_err());
        assert!(g_mu_a(2.0, 2.0).is_err());
    }

    #[test]
    fn pointwise_constants_at_a_star() {
        let (shift, thr) = pointwise_constants(A_STAR);
        assert_eq!(shift, kappa_star());
        assert_eq!(thr, slope_const());
    }

    #[test]
    fn diag_values() {
        assert!((psi_diag(BlockPairKind::AA, 2.5, 0.0, 3.0).unwrap() - kappa_star()).abs() < 1e-15);
        assert!((psi_diag(BlockPairKind::BB, 2.5, 0.0, 2.0).unwrap() - 1.0 - kappa_star()).abs() < 1e-15);
        assert!((psi_diag(BlockPairKind::AA, 2.0, 0.4, 0.0).unwrap() - 0.2 - 2f64.ln()).abs() < 1e-15);
        assert!(psi_diag(BlockPairKind::AB, 2.5, 0.0, 0.0).is_err());
        assert!(psi_diag(BlockPairKind::AA, 1.9, 0.0, 0.0).is_err());
        assert_eq!(s_diag(BlockPairKind::AA, 1.0, 0.0).unwrap(), (0.5 + kappa_star(), 2.5));
    }

    #[test]
    fn zero_energy_offdiag_is_diag() {
        for a in [2.0, 2.5, 4.0] {
            let r = psi_offdiag(BlockPairKind::AB, a, 0.0, 0.0, &BoundsOnly).unwrap();
            let d = kappa_value(a, 1.0).unwrap();
            assert!((r.lower - d).abs() < 1e-12 && (r.upper - d).abs() < 1e-12, "{a}: {r:?}");
            assert_eq!(r.b_arg, 0.0);
        }
    }

    #[test]
    fn kind_round_trip() {
        for k in [BlockPairKind::AA, BlockPairKind::AB, BlockPairKind::BA, BlockPairKind::BB] {
            assert_eq!(k.to_string().parse::<BlockPairKind>().unwrap(), k);
            assert_eq!(BlockPairKind::new(k.crossed(), k.neighbor()), k);
        }
    }

    #[test]
    fn nu_outer_matches_mu_outer() {
        let e = [-1.0, 0.0, 0.4, 1.0, 1.5, 3.0, 8.0];
        for &alpha in &e {
            for &beta in &e {
                for kind in [BlockPairKind::AB, BlockPairKind::BA] {
                    for branch in [Branch::Lower, Branch::Upper] {
                        let a = offdiag_excess(kind, alpha, beta, &BoundsOnly, branch, MU_CAP);
                        let b = offdiag_excess_nested(kind, alpha, beta, &BoundsOnly, branch, MU_CAP);
                        assert!(a == b || (a - b).abs() < 1e-7, "{kind} {branch:?} ({alpha},{beta}): {a} vs {b}");
                    }
                }
            }
        }
    }
}
