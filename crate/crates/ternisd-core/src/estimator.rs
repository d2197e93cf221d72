//! Asymptotic exponents `F(q, R, W)`: time is `2^(F n + o(n))`.
//!
//! All quantities are log2 per coordinate. Rates and weights are fractions
//! of `n`; `ell` and `p` likewise.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::Error;
use crate::math::{golden_min, h2, LOG2_3};
use crate::reps::{level_profile, Density, LayerSpec, LevelProfile, RepPlan};
use crate::rng::substream;
use crate::wagner::smoothed_params;

/// `(log2 3 - 1) / log2 3`: largest rate with a large-weight GV boundary.
pub const R_MAX: f64 = (LOG2_3 - 1.0) / LOG2_3;

/// Binary BJMM figures, shipped as reference values and never computed.
pub mod bjmm_q2_reference {
    /// Best exponent and its rate.
    pub const EXPONENT: f64 = 0.102;
    pub const EXPONENT_RATE: f64 = 0.427;
    /// Minimum input size in kbits for 128-bit security and its rate.
    pub const MIN_SIZE_KBITS: f64 = 374.0;
    pub const MIN_SIZE_RATE: f64 = 0.326;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Algorithm {
    Prange,
    /// Wagner with smoothing for `q = 3`; Dumer's closed form for `q = 2`.
    Wagner,
    Representations,
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Prange => "prange",
            Algorithm::Wagner => "wagner",
            Algorithm::Representations => "rep",
        }
    }
}

/// Exponent with the parameters attaining it.
#[derive(Clone, Debug, PartialEq)]
pub struct ExponentResult {
    pub q: u32,
    pub rate: f64,
    pub weight: f64,
    pub algorithm: Algorithm,
    pub exponent: f64,
    pub space_exponent: f64,
    pub ell: f64,
    pub p: f64,
    /// Tree depth (0 for Prange).
    pub a: usize,
    pub plan: Option<RepPlan>,
    /// Whether the multi-syndrome leaf replacement was used.
    pub doom: bool,
    pub converged: bool,
}

fn check_rw(q: u32, rate: f64, weight: f64) -> Result<(), Error> {
    if q != 2 && q != 3 {
        return Err(Error::Parameter("q must be 2 or 3"));
    }
    if !(rate > 0.0 && rate < 1.0) || !(0.0..=1.0).contains(&weight) {
        return Err(Error::Parameter("need 0 < R < 1 and 0 <= W <= 1"));
    }
    Ok(())
}

/// Success probability of one iteration, per `n`.
///
/// `-inf` when `W - p` does not fit in `1 - R - ell`.
pub fn log_success(q: u32, rate: f64, weight: f64, ell: f64, p: f64) -> f64 {
    let lq = libm::log2(q as f64);
    let lq1 = libm::log2((q - 1) as f64);
    let nkl = 1.0 - rate - ell;
    let wp = weight - p;
    if wp < -1e-12 || wp > nkl + 1e-12 || nkl < -1e-12 {
        return f64::NEG_INFINITY;
    }
    let (nkl, wp) = (nkl.max(0.0), wp.max(0.0));
    let num = if nkl > 0.0 { nkl * h2((wp / nkl).min(1.0)) } else { 0.0 } + wp * lq1;
    let den = (nkl * lq).min(h2(weight) + weight * lq1 - ell * lq);
    num - den
}

/// Minimizes `f` over `[lo, hi]`: grid, then golden section around the best cell.
fn minimize_1d<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, grid: usize) -> (f64, f64) {
    if hi <= lo {
        return (lo, f(lo));
    }
    let step = (hi - lo) / grid as f64;
    let mut best = (lo, f(lo));
    for i in 1..=grid {
        let x = lo + step * i as f64;
        let v = f(x);
        if v < best.1 {
            best = (x, v);
        }
    }
    let (a, b) = ((best.0 - step).max(lo), (best.0 + step).min(hi));
    let x = golden_min(&f, a, b, 80);
    let v = f(x);
    if v < best.1 {
        (x, v)
    } else {
        best
    }
}

/// Prange: `ell = 0`, minimum over `p` of `-log_success`.
pub fn prange_exponent(q: u32, rate: f64, weight: f64) -> Result<ExponentResult, Error> {
    check_rw(q, rate, weight)?;
    let lo = (weight - (1.0 - rate)).max(0.0);
    let hi = rate.min(weight);
    if lo > hi + 1e-12 {
        return Err(Error::Infeasible("weight outside the reachable range"));
    }
    let f = |p: f64| -log_success(q, rate, weight, 0.0, p).min(0.0);
    let (p, v) = minimize_1d(f, lo, hi.max(lo), 200);
    if !v.is_finite() {
        return Err(Error::Infeasible("no admissible p"));
    }
    Ok(ExponentResult {
        q,
        rate,
        weight,
        algorithm: Algorithm::Prange,
        exponent: v.max(0.0),
        space_exponent: 0.0,
        ell: 0.0,
        p,
        a: 0,
        plan: None,
        doom: false,
        converged: true,
    })
}

/// Best Wagner configuration at a fixed `ell` (full weight `p = R + ell`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WagnerPoint {
    pub cost: f64,
    pub list: f64,
    pub a: usize,
    pub doom: bool,
}

/// Cost at a given `ell`: smoothed tree when available, integer trees
/// under the (possibly relaxed) constraint otherwise.
pub fn wagner_point(rate: f64, weight: f64, ell: f64, doom_z_log2: Option<f64>) -> WagnerPoint {
    let lp = log_success(3, rate, weight, ell, rate + ell);
    let mut best = WagnerPoint { cost: f64::INFINITY, list: 0.0, a: 0, doom: false };
    if !lp.is_finite() {
        return best;
    }
    let mut consider = |list: f64, a: usize, doom: bool| {
        let c = list + (-(list + lp)).max(0.0);
        if c < best.cost - 1e-15 {
            best = WagnerPoint { cost: c, list, a, doom };
        }
    };
    if ell <= 0.0 {
        consider(0.0, 0, false);
        return best;
    }
    let kl = rate + ell;
    let width = ell * LOG2_3;
    if let Ok(sp) = smoothed_params(rate, ell) {
        consider(sp.lambda, sp.a, false);
    }
    for a in 1..=12usize {
        let per = width / a as f64;
        if per <= kl / libm::exp2(a as f64) + 1e-15 {
            consider(per, a, false);
        }
        if let Some(z) = doom_z_log2 {
            // the syndrome leaf must hold a full list
            if z + 1e-15 >= per && per <= kl / (libm::exp2(a as f64) - 1.0) + 1e-15 {
                consider(per, a, true);
            }
        }
    }
    best
}

/// Wagner (`q = 3`) or Dumer (`q = 2`) exponent.
pub fn wagner_exponent(q: u32, rate: f64, weight: f64, doom_z_log2: Option<f64>) -> Result<ExponentResult, Error> {
    check_rw(q, rate, weight)?;
    if q == 2 {
        return dumer_exponent(rate, weight);
    }
    if weight < 2.0 / 3.0 {
        return Err(Error::Parameter("the ternary Wagner path needs W >= 2/3"));
    }
    let hi = (weight - rate).min(1.0 - rate);
    if hi < 0.0 {
        return Err(Error::Infeasible("W < R leaves no room for full-weight e''"));
    }
    let f = |ell: f64| wagner_point(rate, weight, ell, doom_z_log2).cost;
    let (ell, v) = minimize_1d(f, 0.0, hi, 4000);
    if !v.is_finite() {
        return Err(Error::Infeasible("no admissible ell"));
    }
    let pt = wagner_point(rate, weight, ell, doom_z_log2);
    Ok(ExponentResult {
        q,
        rate,
        weight,
        algorithm: Algorithm::Wagner,
        exponent: pt.cost,
        space_exponent: pt.list,
        ell,
        p: rate + ell,
        a: pt.a,
        plan: None,
        doom: pt.doom,
        converged: true,
    })
}

fn dumer_cost(rate: f64, weight: f64, ell: f64, p: f64) -> (f64, f64) {
    if p < 0.0 || p > rate + ell || ell < 0.0 {
        return (f64::INFINITY, 0.0);
    }
    let lp = log_success(2, rate, weight, ell, p);
    if !lp.is_finite() {
        return (f64::INFINITY, 0.0);
    }
    let list = (rate + ell) / 2.0 * h2(p / (rate + ell));
    let s = 2.0 * list - ell;
    let t = list.max(s);
    (t + (-(s + lp)).max(0.0), list)
}

/// Binary Dumer: two half-lists of weight `p/2` merged on `ell` bits.
pub fn dumer_exponent(rate: f64, weight: f64) -> Result<ExponentResult, Error> {
    check_rw(2, rate, weight)?;
    let ell_hi = 1.0 - rate;
    const G: usize = 200;
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for i in 0..=G {
        let ell = ell_hi * i as f64 / G as f64;
        for j in 0..=G {
            let p = (rate + ell).min(weight) * j as f64 / G as f64;
            let c = dumer_cost(rate, weight, ell, p).0;
            if c < best.0 {
                best = (c, ell, p);
            }
        }
    }
    if !best.0.is_finite() {
        return Err(Error::Infeasible("no admissible (ell, p)"));
    }
    let obj = |x: &[f64]| dumer_cost(rate, weight, x[0], x[1]).0;
    let (x, v) = compass_search(&obj, vec![best.1, best.2], &[(0.0, ell_hi), (0.0, 1.0)], 1e-3, 1e-10, 20_000);
    let list = dumer_cost(rate, weight, x[0], x[1]).1;
    Ok(ExponentResult {
        q: 2,
        rate,
        weight,
        algorithm: Algorithm::Wagner,
        exponent: v,
        space_exponent: list,
        ell: x[0],
        p: x[1],
        a: 1,
        plan: None,
        doom: false,
        converged: true,
    })
}

/// Pattern search with per-coordinate steps halved on failure.
fn compass_search<F: Fn(&[f64]) -> f64>(
    f: &F,
    mut x: Vec<f64>,
    bounds: &[(f64, f64)],
    step0: f64,
    min_step: f64,
    max_evals: usize,
) -> (Vec<f64>, f64) {
    let mut fx = f(&x);
    let mut steps: Vec<f64> = bounds.iter().map(|(lo, hi)| step0 * (hi - lo)).collect();
    let mut evals = 1;
    while steps.iter().any(|s| *s > min_step) && evals < max_evals {
        let mut improved = false;
        for i in 0..x.len() {
            for dir in [1.0, -1.0] {
                let mut y = x.clone();
                y[i] = (y[i] + dir * steps[i]).clamp(bounds[i].0, bounds[i].1);
                if y[i] == x[i] {
                    continue;
                }
                let fy = f(&y);
                evals += 1;
                if fy < fx {
                    x = y;
                    fx = fy;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            for s in &mut steps {
                *s *= 0.5;
            }
        }
    }
    (x, fx)
}

// ---------------------------------------------------------------------------
// Representation ledger
// ---------------------------------------------------------------------------

/// How the ledger treats list sizes that exceed the number of distinct
/// vectors a node can hold.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RepModel {
    /// Each level is capped by its distinct bound (duplicates are discarded).
    Capped,
    /// Sizes follow the merge recursion alone.
    Uncapped,
}

/// Sizes and widths from the greedy width assignment.
#[derive(Clone, Debug, PartialEq)]
pub struct LedgerRun {
    /// Levels `0..=a`.
    pub sizes: Vec<f64>,
    /// Index `i` forms level `i`.
    pub widths: Vec<f64>,
}

/// Greedy allocation: every merge output is held at or below `t`; the root
/// merge takes what is left of `ell log2 3`.
pub fn allocate_widths(prof: &LevelProfile, ell: f64, t: f64, model: RepModel) -> Option<LedgerRun> {
    let a = prof.loss.len();
    if a == 0 {
        return None;
    }
    let total = ell * LOG2_3;
    let capped = model == RepModel::Capped;
    let run = |leaf: f64| -> (Vec<f64>, Vec<f64>) {
        let mut sizes = vec![0.0; a + 1];
        let mut widths = vec![0.0; a];
        sizes[a] = leaf;
        let mut used = 0.0;
        for i in (1..a).rev() {
            let pre = 2.0 * sizes[i + 1];
            let m = (pre - t).max(0.0);
            widths[i] = m;
            used += m;
            let mut l = pre - m - prof.loss[i];
            if capped {
                l = l.min(prof.distinct[i] - used);
            }
            sizes[i] = l;
        }
        widths[0] = total - widths[1..].iter().sum::<f64>();
        (sizes, widths)
    };
    let ok = |s: &[f64], w: &[f64]| w[0] >= (2.0 * s[1] - t).max(0.0);
    let mut hi = prof.distinct[a].min(t);
    let (s, w) = run(hi);
    if !ok(&s, &w) {
        let mut lo = -5.0;
        let (sl, wl) = run(lo);
        if !ok(&sl, &wl) {
            return None;
        }
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            let (sm, wm) = run(mid);
            if ok(&sm, &wm) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi = lo;
    }
    let (mut sizes, widths) = run(hi);
    let mut l0 = 2.0 * sizes[1] - widths[0] - prof.loss[0];
    if capped {
        l0 = l0.min(prof.distinct[0] - total);
    }
    sizes[0] = l0;
    Some(LedgerRun { sizes, widths })
}

/// Cost of a tree: bisection on the time budget `t` at the point where the
/// root list covers the inverse success probability.
pub fn ledger_cost(rate: f64, weight: f64, ell: f64, prof: &LevelProfile, model: RepModel) -> Option<(f64, f64, LedgerRun)> {
    let lp = log_success(3, rate, weight, ell, rate + ell);
    if !lp.is_finite() {
        return None;
    }
    let c = |t: f64| allocate_widths(prof, ell, t, model).map(|r| (t + (-(r.sizes[0] + lp)).max(0.0), t, r));
    // Root size is nondecreasing in t and may saturate below -lp; then the
    // cheapest t is the one where the root first reaches its ceiling.
    let ceiling = allocate_widths(prof, ell, 1.0, model)?.sizes[0];
    let goal = (-lp).min(ceiling - 1e-12);
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        match allocate_widths(prof, ell, mid, model) {
            Some(r) if r.sizes[0] >= goal => hi = mid,
            _ => lo = mid,
        }
    }
    match (c(hi), c(lo)) {
        (Some(x), Some(y)) => Some(if y.0 < x.0 { y } else { x }),
        (x, y) => x.or(y),
    }
}

/// Tree shapes explored by the representation search.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Template {
    /// `a` left-right layers.
    LeftRight { a: usize },
    /// `t` left-right layers, one representation layer, `f` left-right layers.
    Single { t: usize, f: usize },
    /// `t` left-right layers, a partial representation layer (two levels), `f` left-right layers.
    Partial { t: usize, f: usize },
}

impl Template {
    pub fn depth(&self) -> usize {
        match *self {
            Template::LeftRight { a } => a,
            Template::Single { t, f } => t + 1 + f,
            Template::Partial { t, f } => t + 2 + f,
        }
    }

    /// Number of continuous parameters (including `ell`).
    pub fn dims(&self) -> usize {
        match self {
            Template::LeftRight { .. } => 1,
            Template::Single { .. } => 3,
            Template::Partial { .. } => 8,
        }
    }

    /// Layers for parameter vector `x` (`x[0]` is `ell`).
    pub fn layers(&self, x: &[f64]) -> Vec<LayerSpec> {
        let lr = |c: usize| core::iter::repeat(LayerSpec::LeftRight).take(c);
        match *self {
            Template::LeftRight { a } => lr(a).collect(),
            Template::Single { t, f } => lr(t)
                .chain(core::iter::once(LayerSpec::Representation(Density::new(x[1], x[2]))))
                .chain(lr(f))
                .collect(),
            Template::Partial { t, f } => lr(t)
                .chain(core::iter::once(LayerSpec::PartialRep {
                    lambda1: x[1],
                    rho1: Density::new(x[2], x[3]),
                    rho2: Density::new(x[4], x[5]),
                    rho3: Density::new(x[6], x[7]),
                }))
                .chain(lr(f))
                .collect(),
        }
    }

    fn start(&self, ell_hi: f64) -> Vec<f64> {
        match self {
            Template::LeftRight { .. } => vec![0.3 * ell_hi],
            Template::Single { .. } => vec![0.3 * ell_hi, 0.25, 0.0],
            Template::Partial { .. } => vec![0.3 * ell_hi, 0.7, 0.25, 0.0, 0.25, 0.0, 0.13, 0.0],
        }
    }
}

/// Search configuration for [`rep_exponent`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RepSearch {
    pub restarts: usize,
    pub max_a: usize,
    pub model: RepModel,
    pub seed: u64,
    pub max_evals: usize,
}

impl Default for RepSearch {
    fn default() -> Self {
        RepSearch { restarts: 20, max_a: 8, model: RepModel::Capped, seed: 0, max_evals: 3000 }
    }
}

/// One independent unit of the search.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RepJob {
    pub template: Template,
    pub restart: usize,
}

/// Best point of one job.
#[derive(Clone, Debug, PartialEq)]
pub struct RepCandidate {
    pub job: RepJob,
    pub cost: f64,
    pub x: Vec<f64>,
}

/// All `(template, restart)` pairs in a fixed order.
pub fn rep_jobs(search: &RepSearch) -> Vec<RepJob> {
    let mut templates = Vec::new();
    for a in 1..=search.max_a {
        templates.push(Template::LeftRight { a });
        for t in 0..a {
            templates.push(Template::Single { t, f: a - 1 - t });
        }
        if a >= 2 {
            for t in 0..=(a - 2) {
                templates.push(Template::Partial { t, f: a - 2 - t });
            }
        }
    }
    let mut jobs = Vec::new();
    for template in templates {
        let restarts = if matches!(template, Template::LeftRight { .. }) { 1 } else { search.restarts.max(1) };
        for restart in 0..restarts {
            jobs.push(RepJob { template, restart });
        }
    }
    jobs
}

fn ell_upper(rate: f64, weight: f64) -> f64 {
    (weight - rate).min(1.0 - rate).max(0.0)
}

/// Ledger cost of a template at parameters `x`; `None` if infeasible.
pub fn template_cost(rate: f64, weight: f64, template: Template, x: &[f64], model: RepModel) -> Option<(f64, f64, LedgerRun, LevelProfile)> {
    let ell = x[0];
    if ell <= 0.0 {
        return None;
    }
    let layers = template.layers(x);
    for l in &layers {
        let ok = match l {
            LayerSpec::LeftRight => true,
            LayerSpec::Representation(d) => d.is_valid(),
            LayerSpec::PartialRep { lambda1, rho1, rho2, rho3 } => {
                (0.0..=1.0).contains(lambda1) && rho1.is_valid() && rho2.is_valid() && rho3.is_valid()
            }
        };
        if !ok {
            return None;
        }
    }
    let ops = crate::reps::expand_layers(&layers);
    let prof = level_profile(rate + ell, Density::new(0.5, 0.0), &ops).ok()?;
    let (cost, t, run) = ledger_cost(rate, weight, ell, &prof, model)?;
    Some((cost, t, run, prof))
}

/// Runs one job: compass search from a deterministic start.
pub fn run_rep_job(rate: f64, weight: f64, job: RepJob, search: &RepSearch) -> Option<RepCandidate> {
    let ell_hi = ell_upper(rate, weight);
    if ell_hi <= 0.0 {
        return None;
    }
    let dims = job.template.dims();
    let mut bounds = vec![(0.0, 1.0); dims];
    bounds[0] = (1e-6, ell_hi);
    let x0 = if job.restart == 0 {
        job.template.start(ell_hi)
    } else {
        let mut rng = substream(search.seed, "rep-search", (job.template.depth() as u64) << 32 | job.restart as u64);
        bounds.iter().map(|(lo, hi)| rng.gen_range(*lo..*hi)).collect()
    };
    const PENALTY: f64 = 9.0;
    let obj = |x: &[f64]| template_cost(rate, weight, job.template, x, search.model).map(|r| r.0).unwrap_or(PENALTY);
    let (x, v) = compass_search(&obj, x0, &bounds, 0.25, 1e-7, search.max_evals);
    if v >= PENALTY {
        return None;
    }
    Some(RepCandidate { job, cost: v, x })
}

/// Picks the first strictly best candidate (job order) and compares with Wagner.
pub fn select_rep(rate: f64, weight: f64, candidates: &[Option<RepCandidate>], search: &RepSearch) -> Result<ExponentResult, Error> {
    let wag = wagner_exponent(3, rate, weight, None)?;
    let mut best: Option<&RepCandidate> = None;
    for c in candidates.iter().flatten() {
        if best.is_none_or(|b| c.cost < b.cost) {
            best = Some(c);
        }
    }
    let Some(best) = best.filter(|b| b.cost < wag.exponent) else {
        return Ok(ExponentResult { algorithm: Algorithm::Representations, ..wag });
    };
    let (cost, t, run, _) = template_cost(rate, weight, best.job.template, &best.x, search.model)
        .ok_or(Error::Infeasible("best candidate no longer evaluates"))?;
    let ell = best.x[0];
    let plan = RepPlan {
        rate,
        ell,
        root: Density::new(0.5, 0.0),
        layers: best.job.template.layers(&best.x),
        merge_widths: run.widths.clone(),
        list_sizes: run.sizes.clone(),
        leaf_size_log2: run.sizes[run.sizes.len() - 1],
    };
    Ok(ExponentResult {
        q: 3,
        rate,
        weight,
        algorithm: Algorithm::Representations,
        exponent: cost,
        space_exponent: t,
        ell,
        p: rate + ell,
        a: best.job.template.depth(),
        plan: Some(plan),
        doom: false,
        converged: true,
    })
}

/// Representation exponent: template search over the ledger, never worse
/// than [`wagner_exponent`].
pub fn rep_exponent(rate: f64, weight: f64, search: &RepSearch) -> Result<ExponentResult, Error> {
    check_rw(3, rate, weight)?;
    if weight < 2.0 / 3.0 {
        return Err(Error::Parameter("the representation path needs W >= 2/3"));
    }
    let cands: Vec<Option<RepCandidate>> = rep_jobs(search).into_iter().map(|j| run_rep_job(rate, weight, j, search)).collect();
    select_rep(rate, weight, &cands, search)
}

// ---------------------------------------------------------------------------
// Boundaries, input size, audits
// ---------------------------------------------------------------------------

/// The root in `[2/3, 1]` of `W + h2(W) = (1 - R) log2 3`.
pub fn wgv_high(rate: f64) -> Result<f64, Error> {
    if !(0.0..=R_MAX + 1e-12).contains(&rate) {
        return Err(Error::Infeasible("W_GV^high is undefined above R_max"));
    }
    let target = (1.0 - rate) * LOG2_3;
    let f = |w: f64| w + h2(w) - target;
    let (mut lo, mut hi) = (2.0 / 3.0, 1.0);
    if f(hi) >= 0.0 {
        return Ok(1.0);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Binary GV weight: the root in `[0, 1/2]` of `h2(W) = 1 - R`.
pub fn wgv_binary(rate: f64) -> f64 {
    let target = 1.0 - rate;
    let (mut lo, mut hi) = (0.0, 0.5);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h2(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// The weight at which instances of rate `R` are hardest.
pub fn hardest_weight(q: u32, rate: f64) -> f64 {
    if q == 2 {
        wgv_binary(rate)
    } else if rate <= R_MAX {
        wgv_high(rate).unwrap_or(1.0)
    } else {
        1.0
    }
}

/// Bits of the non-identity block of a systematic parity-check matrix.
pub fn input_size_bits(q: u32, rate: f64, n: f64) -> f64 {
    rate * (1.0 - rate) * n * n * libm::log2(q as f64)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MinSize {
    pub kbits: f64,
    pub rate: f64,
    pub exponent: f64,
}

/// Smallest input (kbits, 1000 bits each) needing `2^security_bits` time,
/// over rates in `[r_lo, r_hi]`; `exponent_at` gives `F(R)` at the hardest weight.
/// A grid scan is followed by `refine` golden-section steps.
pub fn min_input_size<F: FnMut(f64) -> f64>(
    mut exponent_at: F,
    q: u32,
    security_bits: f64,
    r_lo: f64,
    r_hi: f64,
    grid: usize,
    refine: usize,
) -> MinSize {
    let mut size = |r: f64| -> (f64, f64) {
        let f = exponent_at(r);
        if !(f > 0.0) {
            return (f64::INFINITY, f);
        }
        (input_size_bits(q, r, security_bits / f) / 1000.0, f)
    };
    let grid = grid.max(2);
    let step = (r_hi - r_lo) / grid as f64;
    let mut best = MinSize { kbits: f64::INFINITY, rate: r_lo, exponent: 0.0 };
    for i in 0..=grid {
        let r = r_lo + step * i as f64;
        let (s, f) = size(r);
        if s < best.kbits {
            best = MinSize { kbits: s, rate: r, exponent: f };
        }
    }
    // golden refinement in the neighbouring cells
    let (mut lo, mut hi) = ((best.rate - step).max(r_lo), (best.rate + step).min(r_hi));
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = size(x1);
    let mut f2 = size(x2);
    for _ in 0..refine {
        if f1.0 < f2.0 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = size(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = size(x2);
        }
    }
    for (r, (s, f)) in [(x1, f1), (x2, f2)] {
        if s < best.kbits {
            best = MinSize { kbits: s, rate: r, exponent: f };
        }
    }
    best
}

/// Security of Wave-style parameters against the message attack.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveAudit {
    pub n: usize,
    pub k: usize,
    pub w: usize,
    pub exponent: f64,
    pub security_bits: f64,
    pub algorithm: Algorithm,
    pub ell: f64,
    pub a: usize,
    pub doom: bool,
    pub key_bits: f64,
    pub signature_bits: f64,
}

impl WaveAudit {
    pub fn key_megabytes(&self) -> f64 {
        self.key_bits / 8.0 / 1e6
    }

    pub fn signature_kilobytes(&self) -> f64 {
        self.signature_bits / 8.0 / 1e3
    }
}

/// Combines the Wagner (with multi-syndrome leaves when `z` suffices) and
/// representation exponents at `R = k/n`, `W = w/n`.
pub fn wave_security(
    n: usize,
    k: usize,
    w: usize,
    doom_z_log2: Option<f64>,
    rep: Option<&ExponentResult>,
) -> Result<WaveAudit, Error> {
    if k == 0 || k >= n || w > n {
        return Err(Error::Parameter("need 0 < k < n and w <= n"));
    }
    let nf = n as f64;
    let (rate, weight) = (k as f64 / nf, w as f64 / nf);
    let wag = wagner_exponent(3, rate, weight, doom_z_log2.map(|z| z / nf))?;
    let best = match rep {
        Some(r) if r.exponent < wag.exponent => r.clone(),
        _ => wag,
    };
    Ok(WaveAudit {
        n,
        k,
        w,
        exponent: best.exponent,
        security_bits: best.exponent * nf,
        algorithm: best.algorithm,
        ell: best.ell,
        a: best.a,
        doom: best.doom,
        key_bits: (k * (n - k)) as f64 * LOG2_3,
        signature_bits: nf * LOG2_3,
    })
}

/// Exponent of `algorithm` at one point (representations use `search`).
pub fn exponent(q: u32, algorithm: Algorithm, rate: f64, weight: f64, doom_z_log2: Option<f64>, search: &RepSearch) -> Result<ExponentResult, Error> {
    match algorithm {
        Algorithm::Prange => prange_exponent(q, rate, weight),
        Algorithm::Wagner => wagner_exponent(q, rate, weight, doom_z_log2),
        Algorithm::Representations if q == 3 => rep_exponent(rate, weight, search),
        Algorithm::Representations => Err(Error::Parameter("binary representations are reference values only")),
    }
}

/// `(W, exponent)` along a weight grid; infeasible points are skipped.
pub fn curve(q: u32, rate: f64, algorithm: Algorithm, weights: &[f64], search: &RepSearch) -> Vec<(f64, f64)> {
    weights
        .iter()
        .filter_map(|&w| exponent(q, algorithm, rate, w, None, search).ok().map(|r| (w, r.exponent)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prange_table_value() {
        let r = prange_exponent(3, 0.369, 1.0).unwrap();
        assert!((r.exponent - 0.369).abs() < 1e-3);
    }

    #[test]
    fn prange_typical_weight_is_free() {
        for rate in [0.2, 0.5, 0.7] {
            let w = rate + 2.0 / 3.0 * (1.0 - rate);
            assert!(prange_exponent(3, rate, w).unwrap().exponent < 1e-9);
        }
    }

    #[test]
    fn gv_boundaries() {
        assert!((wgv_high(0.0).unwrap() - 2.0 / 3.0).abs() < 1e-9);
        assert!((wgv_high(R_MAX).unwrap() - 1.0).abs() < 1e-9);
        assert!(wgv_high(0.5).is_err());
    }

    #[test]
    fn doom_never_hurts() {
        let plain = wagner_exponent(3, 0.676, 0.948366, None).unwrap();
        let doom = wagner_exponent(3, 0.676, 0.948366, Some(0.5)).unwrap();
        assert!(doom.exponent <= plain.exponent + 1e-12);
    }
}
