//! Parallel restarts and parallel estimator searches.
//!
//! Restarts run in fixed-size batches. Within a batch every restart below
//! the smallest successful index runs to completion, so the reported
//! solution is the one a sequential loop would find, whatever the thread
//! count.

use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Instant;

use rayon::prelude::*;
use ternisd_core::estimator::{rep_jobs, run_rep_job, select_rep, ExponentResult, RepCandidate, RepSearch};
use ternisd_core::pgess::{attempt, check_params, Budget, PgessParams, Problem, SolveReport, SubsetSumEngine};
use ternisd_core::Error;

/// Restarts per batch; fixed so results do not depend on the pool size.
pub const BATCH: u64 = 32;

struct Outcome {
    restart: u64,
    spent: u64,
    attempt: Result<ternisd_core::pgess::Attempt, Error>,
}

/// Parallel version of the solve loop. `budget` is the total number of
/// merge operations; each restart may use whatever remains at the start of
/// its batch.
pub fn run_parallel(
    problem: &Problem<'_>,
    params: &PgessParams,
    engine: &dyn SubsetSumEngine,
    seed: u64,
    budget: u64,
) -> Result<SolveReport, Error> {
    check_params(problem, params, engine)?;
    let start = Instant::now();
    let mut report = SolveReport::default();
    let mut remaining = budget;
    let mut next = 0u64;
    while next < params.max_restarts && remaining > 0 {
        let end = (next + BATCH).min(params.max_restarts);
        let found = AtomicU64::new(u64::MAX);
        let cap = remaining;
        let outcomes: Vec<Outcome> = (next..end)
            .into_par_iter()
            .filter_map(|restart| {
                if restart > found.load(Ordering::Relaxed) {
                    return None;
                }
                let mut b = Budget::new(cap);
                let attempt = attempt(problem, params, engine, seed, restart, &mut b);
                if matches!(&attempt, Ok(a) if a.solution.is_some()) {
                    found.fetch_min(restart, Ordering::Relaxed);
                }
                Some(Outcome { restart, spent: cap - b.remaining(), attempt })
            })
            .collect();
        for o in outcomes {
            let a = o.attempt?;
            report.restarts_used = o.restart + 1;
            report.subset_sum_candidates_tested += a.candidates_tested;
            remaining = remaining.saturating_sub(o.spent);
            if let Some((e, idx)) = a.solution {
                report.solution = Some(e);
                report.syndrome_index = Some(idx);
                report.wall_time = Some(start.elapsed().as_secs_f64());
                return Ok(report);
            }
            if remaining == 0 {
                break;
            }
        }
        next = end;
    }
    report.wall_time = Some(start.elapsed().as_secs_f64());
    Ok(report)
}

/// Representation exponent with the template search spread over the pool.
pub fn rep_exponent_parallel(rate: f64, weight: f64, search: &RepSearch) -> Result<ExponentResult, Error> {
    let cands: Vec<Option<RepCandidate>> = rep_jobs(search)
        .into_par_iter()
        .map(|j| run_rep_job(rate, weight, j, search))
        .collect();
    select_rep(rate, weight, &cands, search)
}
