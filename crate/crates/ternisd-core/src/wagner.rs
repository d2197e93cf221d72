//! Generalized-birthday (Wagner) subset sum over GF(3) with `{0,1}`
//! coefficients, its smoothed parameter choice, and the DOOM leaf swap.
//!
//! Tree levels are numbered from the root (level 0) to the leaves (level
//! `a`). `merge_widths[i]` is the constraint width, in log2 units, of the
//! merge that forms level `i`. Windows are consumed bottom-up: the merge
//! forming level `a-1` constrains the first trits of the key.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::Error;
use crate::f3::TritVector;
use crate::math::LOG2_3;
use crate::pgess::{ss_to_ssnzc, ssnzc_to_ss, Budget, EngineStatus, Sink, SubsetSumEngine};
use crate::rng::StreamRng;

/// Marker for entries that carry no syndrome index.
pub const NO_TAG: u32 = u32::MAX;

/// Largest stack the leaf builder enumerates (coefficients are bit masks).
pub const MAX_STACK: usize = 40;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MergeEntry {
    /// `sum coeff_i x_i`, shifted by the target on the last leaf.
    pub key: TritVector,
    pub coeff: TritVector,
    /// Syndrome index carried from a DOOM leaf, or [`NO_TAG`].
    pub tag: u32,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MergeList {
    pub entries: Vec<MergeEntry>,
}

impl MergeList {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Sorts entries by the packed key window `start..start+len`.
    pub fn sort_by_window(&mut self, start: usize, len: usize) {
        self.entries.sort_by_cached_key(|e| e.key.window(start, len));
    }
}

/// Tree shape and list sizes.
#[derive(Clone, Debug, PartialEq)]
pub struct WagnerParams {
    pub a: usize,
    /// Index 0 is the root merge; length `a`.
    pub merge_widths: Vec<f64>,
    pub leaf_size_log2: f64,
}

impl WagnerParams {
    /// Equal-window layout: `a` equal windows and leaves of size `3^(ell/a)`.
    pub fn theorem1(a: usize, ell: usize) -> Self {
        let w = ell as f64 * LOG2_3 / a as f64;
        WagnerParams { a, merge_widths: alloc::vec![w; a], leaf_size_log2: w }
    }

    /// Equal windows with leaves at full stack capacity.
    pub fn full_leaves(a: usize, ell: usize, n_columns: usize) -> Self {
        let w = ell as f64 * LOG2_3 / a as f64;
        let leaf = (n_columns >> a) as f64;
        WagnerParams { a, merge_widths: alloc::vec![w; a], leaf_size_log2: leaf }
    }

    /// Smoothed layout: full leaves, a first merge on `m` trits, then `lambda`.
    pub fn smoothed(sp: &SmoothedParams, n_columns: usize) -> Self {
        let mut widths = alloc::vec![sp.lambda; sp.a];
        widths[sp.a - 1] = sp.m * LOG2_3;
        WagnerParams { a: sp.a, merge_widths: widths, leaf_size_log2: n_columns as f64 / (1u64 << sp.a) as f64 }
    }
}

/// Splits `m` columns into `parts` contiguous stacks, remainder spread from the left.
pub fn stack_partition(m: usize, parts: usize) -> Vec<(usize, usize)> {
    let base = m / parts;
    let extra = m % parts;
    let mut out = Vec::with_capacity(parts);
    let mut start = 0;
    for i in 0..parts {
        let len = base + usize::from(i < extra);
        out.push((start, len));
        start += len;
    }
    out
}

/// Trit windows realizing log2 widths. Each non-root level rounds
/// `width / log2 3`; the root absorbs the residue so the total is `ell`.
pub fn realize_widths(widths_log2: &[f64], ell: usize) -> Vec<usize> {
    let a = widths_log2.len();
    let mut t = alloc::vec![0usize; a];
    let mut used = 0usize;
    for i in (1..a).rev() {
        let want = libm::round(widths_log2[i].max(0.0) / LOG2_3) as usize;
        t[i] = want.min(ell - used);
        used += t[i];
    }
    if a > 0 {
        t[0] = ell - used;
    }
    t
}

/// Start offsets of each level's window; bottom merges come first.
pub fn window_offsets(trits: &[usize]) -> Vec<usize> {
    let a = trits.len();
    let mut off = alloc::vec![0usize; a];
    let mut acc = 0;
    for i in (0..a).rev() {
        off[i] = acc;
        acc += trits[i];
    }
    off
}

fn combination_entry(columns: &[TritVector], start: usize, len: usize, mask: u64, m: usize) -> MergeEntry {
    let ell = columns.first().map(|c| c.len()).unwrap_or(0);
    let mut key = TritVector::zeros(ell);
    let mut coeff = TritVector::zeros(m);
    for j in 0..len {
        if mask >> j & 1 == 1 {
            key.add_assign_unchecked(&columns[start + j]);
            coeff.set(start + j, 1);
        }
    }
    MergeEntry { key, coeff, tag: NO_TAG }
}

/// `count` distinct `{0,1}` combinations of one stack; exhaustive when the
/// request reaches half the capacity.
pub fn leaf_list(
    columns: &[TritVector],
    start: usize,
    len: usize,
    count: u64,
    rng: &mut StreamRng,
) -> Result<MergeList, Error> {
    if len > MAX_STACK {
        return Err(Error::Parameter("stack too large to enumerate"));
    }
    let m = columns.len();
    let capacity = 1u64 << len;
    if count > capacity {
        return Err(Error::Parameter("leaf size exceeds stack capacity"));
    }
    let masks: Vec<u64> = if count.saturating_mul(2) >= capacity {
        let mut all: Vec<u64> = (0..capacity).collect();
        if count < capacity {
            all.shuffle(rng);
            all.truncate(count as usize);
            all.sort_unstable();
        }
        all
    } else {
        let mut set = BTreeSet::new();
        while (set.len() as u64) < count {
            set.insert(rng.gen_range(0..capacity));
        }
        set.into_iter().collect()
    };
    Ok(MergeList { entries: masks.into_iter().map(|mk| combination_entry(columns, start, len, mk, m)).collect() })
}

/// Leaf lists for a tree of depth `a`. With `doom_syndromes`, the last list
/// holds the syndromes verbatim (tagged by index) and the columns are split
/// into `2^a - 1` stacks.
pub fn build_leaves(
    columns: &[TritVector],
    a: usize,
    leaf_size: u64,
    doom_syndromes: Option<&[TritVector]>,
    rng: &mut StreamRng,
) -> Result<Vec<MergeList>, Error> {
    let leaves = 1usize << a;
    let generated = if doom_syndromes.is_some() { leaves - 1 } else { leaves };
    let mut out = Vec::with_capacity(leaves);
    for (start, len) in stack_partition(columns.len(), generated) {
        let cap = if len >= 64 { u64::MAX } else { 1u64 << len };
        out.push(leaf_list(columns, start, len, leaf_size.min(cap), rng)?);
    }
    if let Some(syn) = doom_syndromes {
        let m = columns.len();
        out.push(MergeList {
            entries: syn
                .iter()
                .enumerate()
                .map(|(i, s)| MergeEntry { key: s.clone(), coeff: TritVector::zeros(m), tag: i as u32 })
                .collect(),
        });
    }
    Ok(out)
}

/// Pairs whose key sum equals `residue` on the window `start..start+len`.
///
/// `right` must be sorted on that window. Output keys and coefficients are
/// sums; the tag is inherited from whichever side carries one.
pub fn merge(
    left: &MergeList,
    right: &MergeList,
    start: usize,
    len: usize,
    residue: (u64, u64),
    budget: &mut Budget,
) -> Option<MergeList> {
    let rkeys: Vec<(u64, u64)> = right.entries.iter().map(|e| e.key.window(start, len)).collect();
    debug_assert!(rkeys.windows(2).all(|w| w[0] <= w[1]));
    let mut out = Vec::new();
    for l in &left.entries {
        let lk = l.key.window(start, len);
        let need = TritVector::window_sum(residue, TritVector::window_neg(lk));
        let lo = rkeys.partition_point(|k| *k < need);
        let hi = lo + rkeys[lo..].partition_point(|k| *k == need);
        if !budget.spend(1 + (hi - lo) as u64) {
            return None;
        }
        for r in &right.entries[lo..hi] {
            let mut key = l.key.clone();
            key.add_assign_unchecked(&r.key);
            let mut coeff = l.coeff.clone();
            coeff.add_assign_unchecked(&r.coeff);
            let tag = if l.tag != NO_TAG { l.tag } else { r.tag };
            out.push(MergeEntry { key, coeff, tag });
        }
    }
    Some(MergeList { entries: out })
}

/// Subtracts `target` from every key of `list`.
pub fn shift_keys(list: &mut MergeList, target: &TritVector) {
    for e in &mut list.entries {
        e.key.sub_assign_unchecked(target);
    }
}

/// Negates every key (used to turn a syndrome leaf into a `-s_j` leaf).
pub fn negate_keys(list: &mut MergeList) {
    for e in &mut list.entries {
        e.key = e.key.neg();
    }
}

/// Runs the merge tree over prepared leaves; every root key must vanish.
///
/// `filter` is applied after the merge forming each level (returns false to
/// drop an entry) and receives that level's index.
pub fn merge_tree<F>(
    mut lists: Vec<MergeList>,
    trits: &[usize],
    budget: &mut Budget,
    mut filter: F,
) -> Result<MergeList, EngineStatus>
where
    F: FnMut(usize, &MergeEntry) -> bool,
{
    let a = trits.len();
    let offsets = window_offsets(trits);
    for level in (0..a).rev() {
        let (start, len) = (offsets[level], trits[level]);
        let mut next = Vec::with_capacity(lists.len() / 2);
        let mut it = lists.into_iter();
        while let (Some(l), Some(mut r)) = (it.next(), it.next()) {
            r.sort_by_window(start, len);
            let mut merged = merge(&l, &r, start, len, (0, 0), budget).ok_or(EngineStatus::BudgetExhausted)?;
            merged.entries.retain(|e| filter(level, e));
            if merged.is_empty() {
                return Err(EngineStatus::Collapsed);
            }
            next.push(merged);
        }
        lists = next;
    }
    Ok(lists.pop().unwrap_or_default())
}

/// Equal-window admissibility: `3^(ell/a) <= 2^((k+ell)/2^a)`.
pub fn theorem1_ok(n_columns: f64, ell: f64, a: usize) -> bool {
    ell * LOG2_3 / a as f64 <= n_columns / (1u64 << a) as f64 + 1e-12
}

/// Relaxed DOOM admissibility: `3^(ell/a) <= 2^((k+ell)/(2^a-1))`.
pub fn doom_constraint_ok(k: f64, ell: f64, a: usize) -> bool {
    ell * LOG2_3 / a as f64 <= (k + ell) / ((1u64 << a) - 1) as f64 + 1e-12
}

/// Binary subset sum: `{0,1}` vectors `b` with `sum b_i x_i = target`.
///
/// Checks the equal-window constraint for `params.a` before any work when
/// `params` has the equal-window layout.
pub fn solve(
    columns: &[TritVector],
    target: &TritVector,
    params: &WagnerParams,
    rng: &mut StreamRng,
    budget: &mut Budget,
) -> Result<Vec<TritVector>, Error> {
    let ell = target.len();
    if !theorem1_ok(columns.len() as f64, ell as f64, params.a) {
        return Err(Error::Parameter("equal-window constraint violated"));
    }
    let mut out = Vec::new();
    solve_streaming(columns, core::slice::from_ref(target), false, params, rng, budget, &mut |b, _| {
        out.push(b.clone());
        false
    });
    Ok(out)
}

/// Streaming core shared by [`solve`] and the engine. With `doom`, the last
/// leaf carries all targets; otherwise only `targets[0]` is used.
pub fn solve_streaming(
    columns: &[TritVector],
    targets: &[TritVector],
    doom: bool,
    params: &WagnerParams,
    rng: &mut StreamRng,
    budget: &mut Budget,
    sink: &mut Sink<'_>,
) -> EngineStatus {
    let ell = targets.first().map(|t| t.len()).unwrap_or(0);
    let leaf = libm::floor(libm::exp2(params.leaf_size_log2.min(62.0))).max(1.0) as u64;
    let syn = if doom { Some(targets) } else { None };
    let mut lists = match build_leaves(columns, params.a, leaf, syn, rng) {
        Ok(l) => l,
        Err(_) => return EngineStatus::Collapsed,
    };
    let built: u64 = lists.iter().map(|l| l.len() as u64).sum();
    if !budget.spend(built) {
        return EngineStatus::BudgetExhausted;
    }
    let last = lists.last_mut().expect("at least one leaf");
    if doom {
        negate_keys(last);
    } else {
        shift_keys(last, &targets[0]);
    }
    let trits = realize_widths(&params.merge_widths, ell);
    let root = match merge_tree(lists, &trits, budget, |_, _| true) {
        Ok(r) => r,
        Err(status) => return status,
    };
    for e in &root.entries {
        if !e.key.is_zero() {
            continue;
        }
        let idx = if e.tag == NO_TAG { 0 } else { e.tag as usize };
        if sink(&e.coeff, idx) {
            return EngineStatus::Stopped;
        }
    }
    EngineStatus::Completed
}

/// Smoothed-tree parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmoothedParams {
    pub a: usize,
    /// log2 of the list size kept from level `a-1` upward.
    pub lambda: f64,
    /// Trits constrained by the first merge.
    pub m: f64,
}

impl SmoothedParams {
    pub fn m_log2(&self) -> f64 {
        self.m * LOG2_3
    }
}

/// Largest `a` with `3^(ell/(a-1)) < 2^((k+ell)/2^(a-1))`, then
/// `lambda = ell log2 3 / (a-2) - (k+ell) / ((a-2) 2^(a-1))` and
/// `2 (k+ell)/2^a - m log2 3 = lambda`.
///
/// Works for integer counts or per-n fractions alike (the formulas are
/// homogeneous). Fails when `a < 3`.
pub fn smoothed_params(k: f64, ell: f64) -> Result<SmoothedParams, Error> {
    let kl = k + ell;
    let holds = |j: usize| ell * LOG2_3 / (j as f64) < kl / libm::exp2(j as f64);
    let mut jmax = 0;
    for j in 1..64 {
        if holds(j) {
            jmax = j;
        } else if jmax > 0 {
            break;
        }
    }
    let a = jmax + 1;
    if jmax == 0 || a < 3 {
        return Err(Error::Infeasible("smoothing needs a >= 3"));
    }
    let af = a as f64;
    let lambda = ell * LOG2_3 / (af - 2.0) - kl / ((af - 2.0) * libm::exp2(af - 1.0));
    let m = (2.0 * kl / libm::exp2(af) - lambda) / LOG2_3;
    Ok(SmoothedParams { a, lambda, m })
}

/// Wagner engine for the full-weight case `p = k + ell`, through the
/// `{1,2} -> {0,1}` reduction.
#[derive(Clone, Debug)]
pub struct WagnerEngine {
    pub a: usize,
    /// Leaf size override (log2); defaults to full stacks capped at `2^max_leaf_log2`.
    pub leaf_size_log2: Option<f64>,
    pub max_leaf_log2: f64,
}

impl WagnerEngine {
    pub fn new(a: usize) -> Self {
        WagnerEngine { a, leaf_size_log2: None, max_leaf_log2: 14.0 }
    }

    pub fn params_for(&self, n_columns: usize, ell: usize, doom: bool) -> WagnerParams {
        let stacks = if doom { (1usize << self.a) - 1 } else { 1usize << self.a };
        let full = n_columns.div_ceil(stacks) as f64;
        let leaf = self.leaf_size_log2.unwrap_or(full.min(self.max_leaf_log2));
        let w = ell as f64 * LOG2_3 / self.a as f64;
        WagnerParams { a: self.a, merge_widths: alloc::vec![w; self.a], leaf_size_log2: leaf }
    }
}

impl SubsetSumEngine for WagnerEngine {
    fn name(&self) -> &'static str {
        "wagner"
    }

    fn output_weight(&self, n_columns: usize) -> usize {
        n_columns
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
        let ell = targets.first().map(|t| t.len()).unwrap_or(0);
        let doom = targets.len() > 1;
        let params = self.params_for(columns.len(), ell, doom);
        let shifted: Vec<TritVector> = targets.iter().map(|t| ssnzc_to_ss(columns, t)).collect();
        solve_streaming(columns, &shifted, doom, &params, rng, budget, &mut |bp, idx| sink(&ss_to_ssnzc(bp), idx))
    }
}
