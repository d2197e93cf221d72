//! The permutation / partial elimination / subset-sum / test loop.
//!
//! One *attempt* draws a column permutation, reduces `S H_pi` to
//! `[[I, H'], [0, H'']]`, hands the columns of `H''` to a subset-sum engine,
//! and tests every returned `e''` through `e' = s' - H' e''`.

use alloc::vec::Vec;

use crate::error::Error;
use crate::f3::{partial_gaussian_elim, Permutation, TritMatrix, TritVector};
use crate::instances::{random_weight_vector, DoomInstance, SdInstance};
use crate::math::log2_binomial;
use crate::rng::{self, StreamRng};

/// Framework parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PgessParams {
    pub ell: usize,
    /// Weight of `e''`.
    pub p: usize,
    pub max_restarts: u64,
    /// Expected `|S|` per attempt; informational, engines decide.
    pub target_solutions_per_restart: u64,
}

/// Work counter shared by an engine and the test step. One unit is one list
/// entry produced or one candidate tested.
#[derive(Clone, Copy, Debug)]
pub struct Budget {
    remaining: u64,
}

impl Budget {
    pub fn new(units: u64) -> Self {
        Budget { remaining: units }
    }

    pub fn unlimited() -> Self {
        Budget { remaining: u64::MAX }
    }

    pub fn remaining(&self) -> u64 {
        self.remaining
    }

    /// Charges `units`; false once the budget is exhausted.
    #[inline]
    pub fn spend(&mut self, units: u64) -> bool {
        if self.remaining < units {
            self.remaining = 0;
            false
        } else {
            self.remaining -= units;
            true
        }
    }

    pub fn exhausted(&self) -> bool {
        self.remaining == 0
    }
}

/// How an engine run ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EngineStatus {
    Completed,
    /// The sink asked to stop.
    Stopped,
    /// An intermediate list came out empty.
    Collapsed,
    BudgetExhausted,
}

/// Receives `(coefficients, target index)`; returning `true` stops the engine.
pub type Sink<'a> = dyn FnMut(&TritVector, usize) -> bool + 'a;

/// Subset-sum engine contract.
///
/// Given columns `x_i` in GF(3)^ell and targets `t_j`, stream coefficient
/// vectors `b` with `sum b_i x_i = t_j` and `wt(b) = output_weight`.
/// Outputs are re-checked by the framework.
pub trait SubsetSumEngine: Sync {
    fn name(&self) -> &'static str;

    /// Weight of every output, given the number of columns.
    fn output_weight(&self, n_columns: usize) -> usize;

    /// Whether several targets are handled natively (DOOM).
    fn multi_target(&self) -> bool {
        false
    }

    fn solve(
        &self,
        columns: &[TritVector],
        targets: &[TritVector],
        rng: &mut StreamRng,
        budget: &mut Budget,
        sink: &mut Sink<'_>,
    ) -> EngineStatus;
}

/// Outcome of the whole loop.
#[derive(Clone, Debug, Default)]
pub struct SolveReport {
    pub solution: Option<TritVector>,
    /// Index of the matched syndrome (always 0 outside DOOM).
    pub syndrome_index: Option<usize>,
    pub restarts_used: u64,
    pub subset_sum_candidates_tested: u64,
    /// Seconds; filled in by callers that own a clock.
    pub wall_time: Option<f64>,
}

/// Outcome of a single attempt.
#[derive(Clone, Debug, Default)]
pub struct Attempt {
    pub solution: Option<(TritVector, usize)>,
    pub candidates_tested: u64,
    pub budget_exhausted: bool,
}

/// Problem view shared by SD and DOOM.
#[derive(Clone, Copy, Debug)]
pub struct Problem<'a> {
    pub h: &'a TritMatrix,
    pub targets: &'a [TritVector],
    pub n: usize,
    pub k: usize,
    pub w: usize,
}

impl<'a> Problem<'a> {
    pub fn sd(inst: &'a SdInstance) -> Self {
        Problem { h: &inst.h, targets: core::slice::from_ref(&inst.s), n: inst.n, k: inst.k, w: inst.w }
    }

    pub fn doom(inst: &'a DoomInstance) -> Self {
        Problem { h: &inst.h, targets: &inst.syndromes, n: inst.n, k: inst.k, w: inst.w }
    }

    fn verify(&self, e: &TritVector, index: usize) -> bool {
        e.len() == self.n
            && e.weight() == self.w
            && self.h.mul_vec(e).map(|s| s == self.targets[index]).unwrap_or(false)
    }
}

pub fn check_params(problem: &Problem<'_>, params: &PgessParams, engine: &dyn SubsetSumEngine) -> Result<(), Error> {
    let r = problem.n - problem.k;
    if params.ell > r {
        return Err(Error::Parameter("ell exceeds n-k"));
    }
    if params.p > problem.k + params.ell || params.p > problem.w {
        return Err(Error::Parameter("p exceeds k+ell or w"));
    }
    if engine.output_weight(problem.k + params.ell) != params.p {
        return Err(Error::Parameter("engine weight differs from p"));
    }
    if problem.targets.len() > 1 && !engine.multi_target() {
        return Err(Error::Parameter("engine does not support several syndromes"));
    }
    Ok(())
}

/// One attempt, seeded by `(seed, restart)`.
///
/// Singular eliminations redraw the permutation, at most `100 n` times.
pub fn attempt(
    problem: &Problem<'_>,
    params: &PgessParams,
    engine: &dyn SubsetSumEngine,
    seed: u64,
    restart: u64,
    budget: &mut Budget,
) -> Result<Attempt, Error> {
    let mut rng = rng::substream(seed, "pgess-restart", restart);
    let n = problem.n;
    let r = n - problem.k - params.ell;
    let mut tries = 0usize;
    let (perm, pge) = loop {
        let perm = Permutation::random(n, &mut rng);
        if let Some(out) = partial_gaussian_elim(problem.h, params.ell, &perm)? {
            break (perm, out);
        }
        tries += 1;
        if tries >= 100 * n {
            return Err(Error::RankDeficient);
        }
    };
    let reduced: Vec<TritVector> = problem.targets.iter().map(|s| pge.s.mul_vec(s)).collect::<Result<_, _>>()?;
    let s_top: Vec<TritVector> = reduced.iter().map(|t| t.slice(0, r)).collect();
    let s_bottom: Vec<TritVector> = reduced.iter().map(|t| t.slice(r, params.ell)).collect();
    let columns = pge.h_second.columns();
    let inverse = perm.inverse();
    let residual_weight = problem.w - params.p;

    let mut out = Attempt::default();
    let mut test_budget_ok = true;
    {
        let mut sink = |e2: &TritVector, idx: usize| -> bool {
            out.candidates_tested += 1;
            if idx >= s_top.len() || e2.len() != problem.k + params.ell || e2.weight() != params.p {
                return false;
            }
            if pge.h_second.mul_vec(e2).map(|v| v != s_bottom[idx]).unwrap_or(true) {
                return false;
            }
            let Ok(he2) = pge.h_prime.mul_vec(e2) else { return false };
            let Ok(e1) = s_top[idx].sub(&he2) else { return false };
            if e1.weight() != residual_weight {
                return false;
            }
            let e = inverse.apply(&e1.concat(e2));
            if problem.verify(&e, idx) {
                out.solution = Some((e, idx));
                return true;
            }
            false
        };
        let status = engine.solve(&columns, &s_bottom, &mut rng, budget, &mut sink);
        if status == EngineStatus::BudgetExhausted {
            test_budget_ok = false;
        }
    }
    out.budget_exhausted = !test_budget_ok || budget.exhausted();
    Ok(out)
}

/// Sequential loop over attempts `0..max_restarts`.
pub fn run(
    problem: &Problem<'_>,
    params: &PgessParams,
    engine: &dyn SubsetSumEngine,
    seed: u64,
    budget: &mut Budget,
) -> Result<SolveReport, Error> {
    check_params(problem, params, engine)?;
    let mut report = SolveReport::default();
    for restart in 0..params.max_restarts {
        let a = attempt(problem, params, engine, seed, restart, budget)?;
        report.restarts_used = restart + 1;
        report.subset_sum_candidates_tested += a.candidates_tested;
        if let Some((e, idx)) = a.solution {
            report.solution = Some(e);
            report.syndrome_index = Some(idx);
            return Ok(report);
        }
        if a.budget_exhausted {
            break;
        }
    }
    Ok(report)
}

/// log2 of the probability that one subset-sum output yields a solution:
/// `C(n-k-l, w-p) (q-1)^(w-p) / min(q^(n-k-l), C(n,w) (q-1)^w q^(-l))`.
pub fn success_prob_log2(n: usize, k: usize, ell: usize, p: usize, w: usize, q: u32) -> f64 {
    if p > w || k + ell > n || w - p > n - k - ell {
        return f64::NEG_INFINITY;
    }
    let r = (n - k - ell) as f64;
    let lq = libm::log2(q as f64);
    let lq1 = libm::log2((q - 1) as f64);
    let num = log2_binomial((n - k - ell) as u64, (w - p) as u64) + (w - p) as f64 * lq1;
    let all = log2_binomial(n as u64, w as u64) + w as f64 * lq1 - ell as f64 * lq;
    num - (r * lq).min(all)
}

/// Average running time: `T + max(0, -(S + P))`.
#[inline]
pub fn expected_runtime_log2(t_log2: f64, s_log2: f64, p_log2: f64) -> f64 {
    t_log2 + (-(s_log2 + p_log2)).max(0.0)
}

/// Full-weight subset sum over `{1,2}` to plain subset sum over `{0,1}`.
///
/// Returns `s' = 2 s - sum x_i`; a `{0,1}` solution `b'` for `s'` maps to the
/// `{1,2}` solution `b_i = (b'_i + 1) / 2` through [`ss_to_ssnzc`].
pub fn ssnzc_to_ss(columns: &[TritVector], target: &TritVector) -> TritVector {
    let mut acc = target.scale(2);
    for x in columns {
        acc.sub_assign_unchecked(x);
    }
    acc
}

/// `b_i = (b'_i + 1) / 2` over GF(3): `0 -> 2`, `1 -> 1`.
pub fn ss_to_ssnzc(b_prime: &TritVector) -> TritVector {
    let mut b = TritVector::zeros(b_prime.len());
    for i in 0..b.len() {
        b.set(i, if b_prime.get(i) == 1 { 1 } else { 2 });
    }
    b
}

/// Inverse of [`ss_to_ssnzc`] on full-weight vectors: `b' = 2b - 1`.
pub fn ssnzc_to_ss_coeffs(b: &TritVector) -> TritVector {
    let mut bp = TritVector::zeros(b.len());
    for i in 0..b.len() {
        bp.set(i, if b.get(i) == 1 { 1 } else { 0 });
    }
    bp
}

/// Prange-style engine: random weight-`p` vectors, filtered by the
/// `ell` parity constraints (none when `ell = 0`).
#[derive(Clone, Copy, Debug)]
pub struct PrangeEngine {
    pub p: usize,
    pub samples: u64,
}

impl SubsetSumEngine for PrangeEngine {
    fn name(&self) -> &'static str {
        "prange"
    }

    fn output_weight(&self, _n_columns: usize) -> usize {
        self.p
    }

    fn multi_target(&self) -> bool {
        true
    }

    fn solve(
        &self,
        columns: &[TritVector],
        targets: &[TritVector],
        rng: &mut StreamRng,
        budget: &mut Budget,
        sink: &mut Sink<'_>,
    ) -> EngineStatus {
        let m = columns.len();
        let ell = targets.first().map(|t| t.len()).unwrap_or(0);
        for _ in 0..self.samples {
            if !budget.spend(targets.len() as u64) {
                return EngineStatus::BudgetExhausted;
            }
            let b = random_weight_vector(m, self.p, rng);
            let mut acc = TritVector::zeros(ell);
            for (i, x) in columns.iter().enumerate() {
                match b.get(i) {
                    1 => acc.add_assign_unchecked(x),
                    2 => acc.sub_assign_unchecked(x),
                    _ => {}
                }
            }
            for (j, t) in targets.iter().enumerate() {
                if acc == *t && sink(&b, j) {
                    return EngineStatus::Stopped;
                }
            }
        }
        EngineStatus::Completed
    }
}

/// Best integer `p` for a Prange run with `ell = 0`.
pub fn prange_best_p(n: usize, k: usize, w: usize) -> usize {
    let lo = w.saturating_sub(n - k);
    let hi = k.min(w);
    (lo..=hi)
        .max_by(|&a, &b| {
            success_prob_log2(n, k, 0, a, w, 3)
                .partial_cmp(&success_prob_log2(n, k, 0, b, w, 3))
                .unwrap_or(core::cmp::Ordering::Equal)
        })
        .unwrap_or(lo)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn runtime_examples() {
        assert_eq!(expected_runtime_log2(10.0, 5.0, -3.0), 10.0);
        assert_eq!(expected_runtime_log2(10.0, 2.0, -8.0), 16.0);
        assert_eq!(expected_runtime_log2(7.0, 3.0, -3.0), 7.0);
    }

    #[test]
    fn success_prob_full_window_is_one() {
        assert!(success_prob_log2(20, 8, 12, 18, 18, 3).abs() < 1e-9);
    }

    #[test]
    fn lemma_one_single_column() {
        let x = [TritVector::from_trits(&[1]).unwrap()];
        let s = TritVector::from_trits(&[2]).unwrap();
        let sp = ssnzc_to_ss(&x, &s);
        assert_eq!(sp.get(0), 0);
        // b' = 0 sums to 0 = s' and maps to b = 2, which sums to 2 = s
        let b = ss_to_ssnzc(&TritVector::from_trits(&[0]).unwrap());
        assert_eq!(b.get(0), 2);
    }
}
