//! Block fields and the maximal A-block frequency `ρ*(p)` of directed paths on
//! the coarse lattice.
//!
//! Corners live on `{(i, j): i + j even}`. From corner `(i, j)` the up move goes to
//! `(i+1, j+1)` crossing block `(i, j)` and the down move goes to `(i+1, j-1)`
//! crossing block `(i, j-1)`. Every block is crossed by exactly one move, so
//! A-blocks are the open bonds of an oriented bond percolation lattice.
//!
//! Block `(i, k)` of the field with stream `s` is A when `site_uniform(s, i, k) < p`.
//! Fields at different `p` with the same stream are therefore coupled monotonically.

use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::interface::mean_var;
use crate::rng::{replica_seed, site_uniform};
use crate::Label;

/// Oriented bond percolation threshold on the square lattice.
pub const PC: f64 = 0.6447;

/// Largest number of blocks `sample_field` will allocate.
pub const MAX_FIELD_BLOCKS: u64 = 1 << 28;

/// Largest path length accepted by the last-passage runs.
pub const MAX_STEPS: usize = 1 << 20;

/// Extrapolated frequency below which a density counts as subcritical.
pub const PC_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct BlockField {
    pub width: usize,
    pub height: usize,
    pub p: f64,
    pub seed: u64,
    /// Row-major in `i`: block `(i, k)` is at `i * height + k`.
    pub labels: Vec<Label>,
}

impl BlockField {
    pub fn label(&self, i: usize, k: usize) -> Label {
        self.labels[i * self.height + k]
    }

    pub fn a_fraction(&self) -> f64 {
        self.labels.iter().filter(|&&l| l == Label::A).count() as f64 / self.labels.len() as f64
    }
}

#[inline]
fn is_a(stream: u64, p: f64, i: i64, k: i64) -> bool {
    site_uniform(stream, i, k) < p
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return invalid(format!("p = {p} must lie in (0, 1)"));
    }
    Ok(())
}

/// I.i.d. Bernoulli(p) block labels on `[0, width) × [0, height)`, using `seed` as the
/// field stream.
pub fn sample_field(width: usize, height: usize, p: f64, seed: u64) -> Result<BlockField> {
    check_p(p)?;
    if width == 0 || height == 0 {
        return invalid("field dimensions must be >= 1");
    }
    if (width as u64).saturating_mul(height as u64) > MAX_FIELD_BLOCKS {
        return invalid(format!("field {width}x{height} exceeds {MAX_FIELD_BLOCKS} blocks"));
    }
    let labels = (0..width as i64)
        .flat_map(|i| (0..height as i64).map(move |k| (i, k)))
        .map(|(i, k)| if is_a(seed, p, i, k) { Label::A } else { Label::B })
        .collect();
    Ok(BlockField { width, height, p, seed, labels })
}

/// Maximal A-count over directed paths from `(0, 0)` divided by the length, at each
/// of the increasing `checkpoints`, for the field with stream `stream`.
pub fn last_passage(p: f64, stream: u64, checkpoints: &[usize]) -> Result<Vec<f64>> {
    check_p(p)?;
    let n = match checkpoints.last() {
        Some(&n) => n,
        None => return Ok(vec![]),
    };
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) || checkpoints[0] == 0 {
        return invalid("checkpoints must be positive and strictly increasing");
    }
    if n > MAX_STEPS {
        return invalid(format!("steps = {n} exceeds {MAX_STEPS}"));
    }
    // value at height j is stored at index j + n; unreachable heights hold -1
    let width = 2 * n + 1;
    let mut cur = vec![-1i32; width];
    let mut next = vec![-1i32; width];
    cur[n] = 0;
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut ci = 0;
    for i in 0..n {
        let ii = i as i64;
        let h = i + 1;
        // heights reachable after i+1 steps: -h, -h+2, ..., h
        for j in (-(h as i64)..=h as i64).step_by(2) {
            let idx = (j + n as i64) as usize;
            let mut best = -1;
            // up move from j-1 crosses block (i, j-1)
            if j - 1 >= -(i as i64) {
                let v = cur[idx - 1];
                if v >= 0 {
                    best = best.max(v + is_a(stream, p, ii, j - 1) as i32);
                }
            }
            // down move from j+1 crosses block (i, j)
            if j + 1 <= i as i64 {
                let v = cur[idx + 1];
                if v >= 0 {
                    best = best.max(v + is_a(stream, p, ii, j) as i32);
                }
            }
            next[idx] = best;
        }
        // clear the row we are leaving so parity stays clean
        for j in (-(i as i64)..=i as i64).step_by(2) {
            cur[(j + n as i64) as usize] = -1;
        }
        std::mem::swap(&mut cur, &mut next);
        if h == checkpoints[ci] {
            let best = (-(h as i64)..=h as i64).step_by(2).map(|j| cur[(j + n as i64) as usize]).max().unwrap_or(0);
            out.push(best as f64 / h as f64);
            ci += 1;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RhoStarEstimate {
    pub p: f64,
    pub steps: usize,
    pub replicas: u32,
    pub seed: u64,
    pub mean: f64,
    pub stderr: f64,
}

/// Estimates at every length in `steps` (increasing) from one run per replica.
/// Replica `r` uses the field stream `replica_seed(seed, r)`.
pub fn rho_star_multi(p: f64, steps: &[usize], replicas: u32, seed: u64) -> Result<Vec<RhoStarEstimate>> {
    check_p(p)?;
    if replicas < 1 {
        return invalid("replicas must be >= 1");
    }
    if steps.is_empty() || steps[0] < 100 {
        return invalid("steps must be >= 100");
    }
    let runs: Vec<Vec<f64>> = (0..replicas as u64)
        .into_par_iter()
        .map(|r| last_passage(p, replica_seed(seed, r), steps))
        .collect::<Result<_>>()?;
    Ok(steps
        .iter()
        .enumerate()
        .map(|(k, &n)| {
            let (mean, var) = mean_var(runs.iter().map(|v| v[k]));
            RhoStarEstimate { p, steps: n, replicas, seed, mean, stderr: (var / replicas as f64).sqrt() }
        })
        .collect())
}

pub fn rho_star(p: f64, steps: usize, replicas: u32, seed: u64) -> Result<RhoStarEstimate> {
    Ok(rho_star_multi(p, &[steps], replicas, seed)?.remove(0))
}

/// Least-squares line `mean ≈ intercept + slope / N` through the estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct Extrapolation {
    pub p: f64,
    pub estimates: Vec<RhoStarEstimate>,
    pub intercept: f64,
    pub slope: f64,
    /// Root-mean-square residual of the fit.
    pub residual: f64,
}

pub fn extrapolate(estimates: Vec<RhoStarEstimate>) -> Result<Extrapolation> {
    if estimates.len() < 2 {
        return invalid("extrapolation needs at least two lengths");
    }
    let xs: Vec<f64> = estimates.iter().map(|e| 1.0 / e.steps as f64).collect();
    let ys: Vec<f64> = estimates.iter().map(|e| e.mean).collect();
    let m = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / m, ys.iter().sum::<f64>() / m);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum::<f64>() / m).sqrt();
    Ok(Extrapolation { p: estimates[0].p, estimates, intercept, slope, residual })
}

/// Lengths used for the extrapolation at maximal length `n`.
pub fn extrapolation_lengths(n: usize) -> [usize; 3] {
    [n / 4, n / 2, n]
}

#[derive(Debug, Clone, PartialEq)]
pub struct PcEstimate {
    /// Largest grid density whose extrapolated frequency is below `1 - PC_TOLERANCE`;
    /// `None` when every grid point is above.
    pub p_c: Option<f64>,
    /// Spacing to the next grid point.
    pub uncertainty: f64,
    pub rows: Vec<Extrapolation>,
}

/// Threshold from the extrapolated frequency on a grid of densities, each run at
/// lengths `extrapolation_lengths(steps)`. The same field streams are used at
/// every density.
pub fn estimate_pc(grid: &[f64], steps: usize, replicas: u32, seed: u64) -> Result<PcEstimate> {
    if grid.is_empty() {
        return invalid("density grid is empty");
    }
    let mut grid = grid.to_vec();
    grid.sort_by(f64::total_cmp);
    let ns = extrapolation_lengths(steps);
    let rows = grid
        .iter()
        .map(|&p| extrapolate(rho_star_multi(p, &ns, replicas, seed)?))
        .collect::<Result<Vec<_>>>()?;
    let below = rows.iter().rposition(|r| r.intercept < 1.0 - PC_TOLERANCE);
    let uncertainty = match below {
        Some(k) if k + 1 < grid.len() => grid[k + 1] - grid[k],
        Some(k) if k > 0 => grid[k] - grid[k - 1],
        _ => f64::NAN,
    };
    Ok(PcEstimate { p_c: below.map(|k| grid[k]), uncertainty, rows })
}
