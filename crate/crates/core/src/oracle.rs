//! Exact path counts and finite-size quenched partition sums.
//!
//! Both work by a step-indexed transfer over states `(x, y, last step)` with
//! `last step` in {East, North, South}; North may not follow South and vice versa.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use crate::entropy::kappa_value;
use crate::error::{invalid, Result};
use crate::Label;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathCountQuery {
    pub l: u32,
    pub total_steps: u32,
    pub end_x: u32,
    pub end_y: i32,
    /// Confine every visited height to `(-L, L]`.
    pub restrict_band: bool,
}

impl PathCountQuery {
    fn validate(&self) -> Result<()> {
        let span = self.end_x as i64 + self.end_y.unsigned_abs() as i64;
        if (self.total_steps as i64) < span {
            return invalid(format!("{} steps cannot reach ({}, {})", self.total_steps, self.end_x, self.end_y));
        }
        if (self.total_steps as i64 - span) % 2 != 0 {
            return invalid(format!(
                "parity: {} steps to ({}, {})",
                self.total_steps, self.end_x, self.end_y
            ));
        }
        if self.restrict_band && (self.end_y > self.l as i32 || self.end_y <= -(self.l as i32)) {
            return invalid("end point outside the band (-L, L]".to_string());
        }
        Ok(())
    }
}

/// Dense `(x, y)` window with one cell of zero padding on every side.
#[derive(Clone, Copy)]
struct Window {
    nx: usize,
    y_lo: i64,
    y_hi: i64,
    w: usize,
}

impl Window {
    fn new(nx: usize, y_lo: i64, y_hi: i64) -> Self {
        Window { nx, y_lo, y_hi, w: (y_hi - y_lo + 3) as usize }
    }
    fn len(&self) -> usize {
        (self.nx + 1) * self.w
    }
    #[inline]
    fn idx(&self, x: i64, y: i64) -> usize {
        (x + 1) as usize * self.w + (y - self.y_lo + 1) as usize
    }
}

/// Target cells `(x, y_from..=y_to step 2)` reachable after `t` of `total` steps
/// and still able to reach the end point.
fn layer_rows(win: &Window, t: i64, total: i64, end_x: i64, end_y: i64) -> impl Iterator<Item = (i64, i64, i64)> {
    let win = *win;
    let x_hi = t.min(win.nx as i64 - 1);
    let x_lo = 0.max(end_x - (total - t));
    (x_lo..=x_hi).filter_map(move |x| {
        let fwd = t - x;
        let back = total - t - (end_x - x);
        if fwd < 0 || back < 0 {
            return None;
        }
        // |y| <= fwd and |end_y - y| <= back
        let mut lo = (-fwd).max(end_y - back).max(win.y_lo);
        let hi = fwd.min(end_y + back).min(win.y_hi);
        if (t - x - lo).rem_euclid(2) != 0 {
            lo += 1;
        }
        (lo <= hi).then_some((x, lo, hi))
    })
}

/// Exact number of directed self-avoiding paths for `q`.
pub fn count_paths(q: &PathCountQuery) -> Result<BigUint> {
    q.validate()?;
    let total = q.total_steps as i64;
    let (ex, ey) = (q.end_x as i64, q.end_y as i64);
    let extra = (total - ex - ey.abs()) / 2;
    let (mut y_lo, mut y_hi) = (ey.min(0) - extra, ey.max(0) + extra);
    if q.restrict_band {
        y_lo = y_lo.max(1 - q.l as i64);
        y_hi = y_hi.min(q.l as i64);
    }
    let win = Window::new(ex as usize + 1, y_lo, y_hi);
    let zero = BigUint::zero();
    let mut cur = [vec![zero.clone(); win.len()], vec![zero.clone(); win.len()], vec![zero.clone(); win.len()]];
    let mut nxt = cur.clone();
    // the start behaves like a state after an East step
    cur[0][win.idx(0, 0)] = BigUint::from(1u32);
    for t in 0..total {
        for (x, lo, hi) in layer_rows(&win, t + 1, total, ex, ey) {
            let mut y = lo;
            while y <= hi {
                let i = win.idx(x, y);
                let w = win.idx(x - 1, y);
                let dn = win.idx(x, y - 1);
                let up = win.idx(x, y + 1);
                nxt[0][i] = &cur[0][w] + &cur[1][w] + &cur[2][w];
                nxt[1][i] = &cur[0][dn] + &cur[1][dn];
                nxt[2][i] = &cur[0][up] + &cur[2][up];
                y += 2;
            }
        }
        std::mem::swap(&mut cur, &mut nxt);
    }
    let e = win.idx(ex, ey);
    Ok(&cur[0][e] + &cur[1][e] + &cur[2][e])
}

/// Natural logarithm of a big integer (`-inf` for zero).
pub fn ln_biguint(n: &BigUint) -> f64 {
    if n.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = n.bits();
    if bits <= 1000 {
        return n.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top = (n >> shift).to_f64().unwrap_or(f64::INFINITY);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Bridges from `(0,0)` to `(L,0)` in `steps` steps whose interior vertices all
/// sit at height `>= 1`.
pub fn count_upper_bridges(l: u32, steps: u32) -> Result<BigUint> {
    if steps < l + 2 || (steps - l) % 2 != 0 {
        return invalid(format!("no upper bridge with {steps} steps over span {l}"));
    }
    // first step North to (0,1), last step South from (L,1); the middle path stays
    // at height >= 1, may not begin with South and may not end with North
    let total = (steps - 2) as i64;
    let ex = l as i64;
    let extra = (total - ex) / 2;
    let win = Window::new(ex as usize + 1, 1, 1 + extra);
    let zero = BigUint::zero();
    let mut cur = [vec![zero.clone(); win.len()], vec![zero.clone(); win.len()], vec![zero.clone(); win.len()]];
    let mut nxt = cur.clone();
    cur[1][win.idx(0, 1)] = BigUint::from(1u32);
    for t in 0..total {
        for (x, lo, hi) in layer_rows_shifted(&win, t + 1, total, ex, 1) {
            let mut y = lo;
            while y <= hi {
                let i = win.idx(x, y);
                let w = win.idx(x - 1, y);
                let dn = win.idx(x, y - 1);
                let up = win.idx(x, y + 1);
                nxt[0][i] = &cur[0][w] + &cur[1][w] + &cur[2][w];
                nxt[1][i] = &cur[0][dn] + &cur[1][dn];
                nxt[2][i] = &cur[0][up] + &cur[2][up];
                y += 2;
            }
        }
        std::mem::swap(&mut cur, &mut nxt);
    }
    let e = win.idx(ex, 1);
    Ok(&cur[0][e] + &cur[2][e])
}

fn layer_rows_shifted(win: &Window, t: i64, total: i64, end_x: i64, base: i64) -> impl Iterator<Item = (i64, i64, i64)> {
    let win = *win;
    let x_hi = t.min(win.nx as i64 - 1);
    let x_lo = 0.max(end_x - (total - t));
    (x_lo..=x_hi).filter_map(move |x| {
        let fwd = t - x;
        let back = total - t - (end_x - x);
        if fwd < 0 || back < 0 {
            return None;
        }
        let mut lo = (base - fwd).max(base - back).max(win.y_lo);
        let hi = (base + fwd).min(base + back).min(win.y_hi);
        if (t - x - (lo - base)).rem_euclid(2) != 0 {
            lo += 1;
        }
        (lo <= hi).then_some((x, lo, hi))
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuenchedInterfaceQuery {
    pub alpha: f64,
    pub beta: f64,
    pub l: u32,
    /// Monomer labels, one per step; the path has `omega.len()` steps.
    pub omega: Vec<Label>,
}

/// Whether a step ending at height `y_to` from height `y_from` counts as being in
/// the upper half-plane: East steps at `y >= 1`, vertical steps with `max(y, y') >= 1`.
#[inline]
pub fn is_upper(y_from: i64, y_to: i64) -> bool {
    y_from.max(y_to) >= 1
}

/// One time layer of the interface transfer. Only heights with the parity
/// allowed at that layer are stored: in row `x`, `y + Y = 2j + q` where
/// `q = (t - x + Y) mod 2`, so each row is a contiguous run in `j`. The three
/// arrays hold the weights of paths whose last step was East, North or South.
struct ParityLayer {
    e: Vec<f64>,
    n: Vec<f64>,
    s: Vec<f64>,
    y_max: i64,
    w: usize,
}

impl ParityLayer {
    fn new(l: usize, y_max: usize) -> Self {
        // rows -1..=L, columns j = -1..=Y+1 with zero padding
        let w = y_max + 3;
        let len = (l + 2) * w;
        ParityLayer { e: vec![0.0; len], n: vec![0.0; len], s: vec![0.0; len], y_max: y_max as i64, w }
    }

    #[inline]
    fn idx(&self, x: usize, j: usize) -> usize {
        (x + 1) * self.w + j + 1
    }

    #[inline]
    fn j_of(&self, y: i64, q: usize) -> usize {
        ((y + self.y_max - q as i64) / 2) as usize
    }

    /// Fills row `x`, heights `lo..=hi` (step 2), of `self` from layer `prev`.
    /// `q` is this layer's parity offset in row `x`.
    #[allow(clippy::too_many_arguments)]
    fn step_row(&mut self, prev: &ParityLayer, x: usize, lo: i64, hi: i64, q: usize, wu: f64, wl: f64) {
        // segments: y <= -1 (all lower), y = 0 (East/North lower, South upper), y >= 1 (all upper)
        let seg = |a: i64, b: i64| -> Option<(i64, i64)> {
            let mut a = a.max(lo);
            if (a - lo).rem_euclid(2) != 0 {
                a += 1;
            }
            let b = b.min(hi);
            (a <= b).then_some((a, b))
        };
        if let Some((a, b)) = seg(i64::MIN / 4, -1) {
            self.fill(prev, x, a, b, q, wl, wl);
        }
        if let Some((a, b)) = seg(0, 0) {
            self.fill(prev, x, a, b, q, wl, wu);
        }
        if let Some((a, b)) = seg(1, i64::MAX / 4) {
            self.fill(prev, x, a, b, q, wu, wu);
        }
    }

    #[allow(clippy::too_many_arguments)]
    #[inline]
    fn fill(&mut self, prev: &ParityLayer, x: usize, a: i64, b: i64, q: usize, w_en: f64, w_s: f64) {
        let j0 = self.j_of(a, q);
        let len = ((b - a) / 2 + 1) as usize;
        let dst = self.idx(x, j0);
        let west = prev.idx(x, j0) - prev.w; // row x-1, same j
        // the North source sits at y-1 and the South source at y+1 in layer t,
        // whose parity offset in row x is 1 - q
        let (north, south) = if q == 1 { (prev.idx(x, j0), prev.idx(x, j0 + 1)) } else { (prev.idx(x, j0) - 1, prev.idx(x, j0)) };
        let (pe, pn, ps) = (&prev.e, &prev.n, &prev.s);
        let we = &pe[west..west + len];
        let wn = &pn[west..west + len];
        let ws = &ps[west..west + len];
        let ne_ = &pe[north..north + len];
        let nn_ = &pn[north..north + len];
        let se_ = &pe[south..south + len];
        let ss_ = &ps[south..south + len];
        let oe = &mut self.e[dst..dst + len];
        for k in 0..len {
            oe[k] = (we[k] + wn[k] + ws[k]) * w_en;
        }
        let on = &mut self.n[dst..dst + len];
        for k in 0..len {
            on[k] = (ne_[k] + nn_[k]) * w_en;
        }
        let os = &mut self.s[dst..dst + len];
        for k in 0..len {
            os[k] = (se_[k] + ss_[k]) * w_s;
        }
    }

    fn rows<'a>(&'a self, win: &'a Window, t: i64, total: i64, l: i64) -> impl Iterator<Item = std::ops::Range<usize>> + 'a {
        layer_rows(win, t, total, l, 0).map(move |(x, lo, hi)| {
            let q = (t - x + self.y_max).rem_euclid(2) as usize;
            let a = self.idx(x as usize, self.j_of(lo, q));
            a..a + ((hi - lo) / 2 + 1) as usize
        })
    }

    fn max_in(&self, win: &Window, t: i64, total: i64, l: i64) -> f64 {
        let mut m = 0.0f64;
        for r in self.rows(win, t, total, l) {
            for arr in [&self.e, &self.n, &self.s] {
                for &v in &arr[r.clone()] {
                    if v > m {
                        m = v;
                    }
                }
            }
        }
        m
    }

    /// Multiplies the live region by `f`, dropping weights that can no longer
    /// matter in double precision so they never turn subnormal.
    fn rescale(&mut self, win: &Window, t: i64, total: i64, l: i64, f: f64) {
        let ranges: Vec<_> = self.rows(win, t, total, l).collect();
        for r in ranges {
            for arr in [&mut self.e, &mut self.n, &mut self.s] {
                for v in &mut arr[r.clone()] {
                    let s = *v * f;
                    *v = if s < 1e-200 { 0.0 } else { s };
                }
            }
        }
    }

    fn total_at(&self, x: usize, y: i64) -> f64 {
        let q = ((y + self.y_max) % 2) as usize;
        let i = self.idx(x, self.j_of(y, q));
        self.e[i] + self.n[i] + self.s[i]
    }
}

/// `log Z` of bridges `(0,0) -> (L,0)` with one monomer per step, weight `e^α` for
/// an A monomer on an upper step and `e^β` for a B monomer on a lower step.
pub fn quenched_interface_logz(q: &QuenchedInterfaceQuery) -> Result<f64> {
    let steps = q.omega.len() as u32;
    Ok(quenched_interface_logz_checkpoints(q, &[(q.l, steps)])?[0])
}

/// `log Z` for the bridges `(0,0) -> (span,0)` of `steps` steps using the prefix
/// `omega[..steps]`, for each `(span, steps)` checkpoint, from a single transfer
/// run towards `(L, 0)`.
///
/// Every checkpoint must satisfy `steps - span <= omega.len() - L`, `span <= L`
/// and matching parity; the pruning toward the final target then keeps every
/// state a checkpoint bridge can visit.
pub fn quenched_interface_logz_checkpoints(q: &QuenchedInterfaceQuery, checkpoints: &[(u32, u32)]) -> Result<Vec<f64>> {
    let steps = q.omega.len() as i64;
    let l = q.l as i64;
    if steps < l || (steps - l) % 2 != 0 {
        return invalid(format!("{} steps cannot bridge span {}", steps, l));
    }
    if !(q.alpha.is_finite() && q.beta.is_finite()) {
        return invalid("alpha and beta must be finite".to_string());
    }
    for &(span, t) in checkpoints {
        let (span, t) = (span as i64, t as i64);
        if span > l || t > steps || t < span || (t - span) % 2 != 0 || t - span > steps - l {
            return invalid(format!("checkpoint ({span}, {t}) is not compatible with ({l}, {steps})"));
        }
    }
    let extra = (steps - l) / 2;
    let win = Window::new(l as usize + 1, -extra, extra);
    let mut cur = ParityLayer::new(l as usize, extra as usize);
    let mut nxt = ParityLayer::new(l as usize, extra as usize);
    let start = cur.idx(0, extra as usize / 2);
    cur.e[start] = 1.0;
    let (ea, eb) = (q.alpha.exp(), q.beta.exp());
    // renormalise often enough that neither overflow nor subnormals can occur
    let growth = 3f64.ln() + q.alpha.abs().max(q.beta.abs());
    let every = ((100.0 / growth).floor() as i64).clamp(1, 16);
    let mut log_scale = 0.0f64;
    let mut out = vec![f64::NAN; checkpoints.len()];
    for (k, &(span, t)) in checkpoints.iter().enumerate() {
        if t == 0 && span == 0 {
            out[k] = 0.0;
        }
    }
    for t in 0..steps {
        let (wu, wl) = match q.omega[t as usize] {
            Label::A => (ea, 1.0),
            Label::B => (1.0, eb),
        };
        for (x, lo, hi) in layer_rows(&win, t + 1, steps, l, 0) {
            nxt.step_row(&cur, x as usize, lo, hi, (t + 1 - x + extra).rem_euclid(2) as usize, wu, wl);
        }
        std::mem::swap(&mut cur, &mut nxt);
        let t1 = t + 1;
        if t1 % every == 0 || t1 == steps || checkpoints.iter().any(|c| c.1 as i64 == t1) {
            let m = cur.max_in(&win, t1, steps, l);
            if m == 0.0 || !m.is_finite() {
                return Err(crate::Error::Convergence(format!("transfer layer {t1} degenerated ({m})")));
            }
            cur.rescale(&win, t1, steps, l, 1.0 / m);
            log_scale += m.ln();
        }
        for (k, &(span, ts)) in checkpoints.iter().enumerate() {
            if ts as i64 == t1 {
                out[k] = log_scale + cur.total_at(span as usize, 0).ln();
            }
        }
    }
    Ok(out)
}

/// Exact count of interface bridges `(0,0) -> (L,0)` in `steps` steps.
pub fn count_bridges(l: u32, steps: u32) -> Result<BigUint> {
    count_paths(&PathCountQuery { l, total_steps: steps, end_x: l, end_y: 0, restrict_band: false })
}

#[derive(Debug, Clone, PartialEq)]
pub struct KacombReport {
    pub a: f64,
    pub b: f64,
    pub ls: Vec<u32>,
    /// `(1/aL) log N_L(a,b)` without band restriction.
    pub rates: Vec<f64>,
    /// Same with heights confined to `(-L, L]`.
    pub restricted_rates: Vec<f64>,
    /// Rates of the column-composition formula that treats `bL` columns.
    pub formula_rates: Vec<f64>,
    pub extrapolated: f64,
    pub extrapolated_restricted: f64,
    pub kappa: f64,
    pub rel_error: f64,
}

/// Exact crossing counts at each `L`, their extrapolated limit and the closed form.
///
/// The limit is fitted with `s_L = κ + c log(L)/L + d/L` (least squares when more
/// than three sizes are given).
pub fn verify_kacomb_asymptotics(a: f64, b: f64, ls: &[u32]) -> Result<KacombReport> {
    let kappa = kappa_value(a, b)?;
    let mut rates = Vec::new();
    let mut restricted_rates = Vec::new();
    let mut formula_rates = Vec::new();
    for &l in ls {
        let steps = a * l as f64;
        let ex = b * l as f64;
        if (steps - steps.round()).abs() > 1e-9 || (ex - ex.round()).abs() > 1e-9 {
            return invalid(format!("aL = {steps} and bL = {ex} must be integers"));
        }
        let q = PathCountQuery {
            l,
            total_steps: steps.round() as u32,
            end_x: ex.round() as u32,
            end_y: l as i32,
            restrict_band: false,
        };
        let norm = 1.0 / steps;
        rates.push(ln_biguint(&count_paths(&q)?) * norm);
        restricted_rates.push(ln_biguint(&count_paths(&PathCountQuery { restrict_band: true, ..q })?) * norm);
        formula_rates.push(ln_biguint(&column_formula_count(&q)) * norm);
    }
    let lf: Vec<f64> = ls.iter().map(|&l| l as f64).collect();
    let extrapolated = extrapolate(&lf, &rates);
    let extrapolated_restricted = extrapolate(&lf, &restricted_rates);
    Ok(KacombReport {
        a,
        b,
        ls: ls.to_vec(),
        rates,
        restricted_rates,
        formula_rates,
        extrapolated,
        extrapolated_restricted,
        kappa,
        rel_error: (extrapolated - kappa).abs() / kappa.abs().max(f64::MIN_POSITIVE),
    })
}

/// Limit of `s_L` under `s_L = s + c log(L)/L + d/L`.
pub fn extrapolate(ls: &[f64], values: &[f64]) -> f64 {
    match ls.len() {
        0 => f64::NAN,
        1 => values[0],
        2 => {
            let (g0, g1) = (ls[0].ln() / ls[0], ls[1].ln() / ls[1]);
            (values[0] * g1 - values[1] * g0) / (g1 - g0)
        }
        _ => {
            // normal equations for the three-column design [1, ln L / L, 1 / L]
            let mut m = [[0.0f64; 3]; 3];
            let mut r = [0.0f64; 3];
            for (&l, &v) in ls.iter().zip(values) {
                let row = [1.0, l.ln() / l, 1.0 / l];
                for i in 0..3 {
                    for j in 0..3 {
                        m[i][j] += row[i] * row[j];
                    }
                    r[i] += row[i] * v;
                }
            }
            solve3(m, r)[0]
        }
    }
}

fn solve3(mut m: [[f64; 3]; 3], mut r: [f64; 3]) -> [f64; 3] {
    for c in 0..3 {
        let p = (c..3).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs())).unwrap();
        m.swap(c, p);
        r.swap(c, p);
        for i in c + 1..3 {
            let f = m[i][c] / m[c][c];
            for j in c..3 {
                m[i][j] -= f * m[c][j];
            }
            r[i] -= f * r[c];
        }
    }
    let mut x = [0.0; 3];
    for i in (0..3).rev() {
        let s: f64 = (i + 1..3).map(|j| m[i][j] * x[j]).sum();
        x[i] = (r[i] - s) / m[i][i];
    }
    x
}

fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::from(1u32);
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// Compositions of `total` into `parts` positive parts (`1` for `0` into `0`).
fn compositions(total: u64, parts: u64) -> BigUint {
    match (total, parts) {
        (0, 0) => BigUint::from(1u32),
        (_, 0) | (0, _) => BigUint::zero(),
        _ => binomial(total - 1, parts - 1),
    }
}

/// Column-composition count: choose `k` up-columns and `m` down-columns among the
/// `bL` East-step columns, then split the up and down steps among them.
fn column_formula_count(q: &PathCountQuery) -> BigUint {
    let cols = q.end_x as u64;
    let vertical = q.total_steps as u64 - cols;
    let ups = (vertical + q.end_y as u64) / 2;
    let downs = vertical - ups;
    let mut sum = BigUint::zero();
    for k in 0..=cols {
        for m in 0..=cols - k {
            let cu = compositions(ups, k);
            if cu.is_zero() {
                continue;
            }
            let cd = compositions(downs, m);
            if cd.is_zero() {
                continue;
            }
            sum += binomial(cols, k) * binomial(cols - k, m) * cu * cd;
        }
    }
    sum
}

/// Brute-force `sup_{x,y ∈ [2, hi]} [ρ x u(x) + (1-ρ) y v(y)] / [ρ x + (1-ρ) y]`
/// over nested grids of step 0.02, 10⁻³ and 10⁻⁴, each centred on the best point
/// of the previous one. Returns `(sup, x, y)`. Uses no stationarity conditions.
pub fn deloc_grid_sup(alpha: f64, beta: f64, rho: f64, hi: f64) -> (f64, f64, f64) {
    let xu = |x: f64, e: f64| 0.5 * e * x + 2f64.ln() + 0.5 * crate::entropy::xlogx(x) - 0.5 * crate::entropy::xlogx(x - 2.0);
    let scan = |x0: f64, x1: f64, y0: f64, y1: f64, step: f64| -> (f64, f64, f64) {
        let nx = ((x1 - x0) / step).round() as usize;
        let ny = ((y1 - y0) / step).round() as usize;
        let xs: Vec<f64> = (0..=nx).map(|i| x0 + step * i as f64).collect();
        let ys: Vec<f64> = (0..=ny).map(|j| y0 + step * j as f64).collect();
        let px: Vec<(f64, f64)> = xs.iter().map(|&x| (rho * xu(x, alpha), rho * x)).collect();
        let py: Vec<(f64, f64)> = ys.iter().map(|&y| ((1.0 - rho) * xu(y, beta), (1.0 - rho) * y)).collect();
        let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
        for (i, &(nx_, dx)) in px.iter().enumerate() {
            for (j, &(ny_, dy)) in py.iter().enumerate() {
                let v = (nx_ + ny_) / (dx + dy);
                if v > best.0 {
                    best = (v, xs[i], ys[j]);
                }
            }
        }
        best
    };
    let mut best = scan(2.0, hi, 2.0, hi, 0.02);
    for (step, half) in [(1e-3, 0.04), (1e-4, 0.002)] {
        let (_, x, y) = best;
        let cand = scan((x - half).max(2.0), (x + half).min(hi), (y - half).max(2.0), (y + half).min(hi), step);
        if cand.0 >= best.0 {
            best = cand;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(l: u32, steps: u32, ex: u32, ey: i32, band: bool) -> PathCountQuery {
        PathCountQuery { l, total_steps: steps, end_x: ex, end_y: ey, restrict_band: band }
    }

    #[test]
    fn small_counts() {
        assert_eq!(count_paths(&q(2, 4, 2, 2, false)).unwrap(), BigUint::from(6u32));
        assert_eq!(count_paths(&q(2, 4, 2, 0, false)).unwrap(), BigUint::from(6u32));
        assert_eq!(count_paths(&q(1, 1, 0, 1, false)).unwrap(), BigUint::from(1u32));
        // N then S is a reversal, so a zero-span return is impossible
        assert_eq!(count_paths(&q(1, 2, 0, 0, false)).unwrap(), BigUint::zero());
    }

    #[test]
    fn parity_and_reach_are_validated() {
        assert!(count_paths(&q(2, 5, 2, 2, false)).is_err());
        assert!(count_paths(&q(2, 3, 2, 2, false)).is_err());
    }

    #[test]
    fn b1_a2_is_central_binomial() {
        let n = count_paths(&q(30, 60, 30, 30, false)).unwrap();
        assert_eq!(n, binomial(60, 30));
    }

    #[test]
    fn upper_bridges_small() {
        // L=1, 3 steps: N E S only
        assert_eq!(count_upper_bridges(1, 3).unwrap(), BigUint::from(1u32));
        // L=2, 4 steps: N E E S
        assert_eq!(count_upper_bridges(2, 4).unwrap(), BigUint::from(1u32));
        // L=2, 6 steps: middles NEES, NESE, ENES
        assert_eq!(count_upper_bridges(2, 6).unwrap(), BigUint::from(3u32));
    }

    #[test]
    fn zero_energy_partition_sum_is_the_bridge_count() {
        let omega = crate::rng::monomer_sequence(3, 40);
        let lz = quenched_interface_logz(&QuenchedInterfaceQuery { alpha: 0.0, beta: 0.0, l: 20, omega }).unwrap();
        let n = count_bridges(20, 40).unwrap();
        assert!((lz - ln_biguint(&n)).abs() < 1e-12);
    }

    #[test]
    fn extrapolation_recovers_model_limit() {
        let ls = [20.0, 40.0, 80.0, 160.0];
        let v: Vec<f64> = ls.iter().map(|&l: &f64| 0.7 - 0.3 * l.ln() / l + 0.1 / l).collect();
        assert!((extrapolate(&ls, &v) - 0.7).abs() < 1e-12);
        assert!((extrapolate(&ls[..3], &v[..3]) - 0.7).abs() < 1e-12);
    }
}
