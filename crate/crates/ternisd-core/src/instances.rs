//! Random SD and DOOM instances with planted solutions, the expected
//! solution count, and exhaustive solution oracles.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::Error;
use crate::f3::{TritMatrix, TritVector};
use crate::math::{log2_binomial, LOG2_3};
use crate::rng;

const MAX_RANK_REJECTIONS: usize = 64;
/// Exhaustive enumeration bound, in visited candidates.
pub const ENUMERATION_LIMIT_LOG2: f64 = 30.0;

/// Syndrome decoding instance: find `e` with `wt(e) = w` and `H e^T = s`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SdInstance {
    pub n: usize,
    pub k: usize,
    pub w: usize,
    pub h: TritMatrix,
    pub s: TritVector,
    pub planted: Option<TritVector>,
    pub seed: u64,
}

/// Decode-one-out-of-many instance. `planted_index` is 0-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DoomInstance {
    pub n: usize,
    pub k: usize,
    pub w: usize,
    pub h: TritMatrix,
    pub syndromes: Vec<TritVector>,
    pub planted_index: Option<usize>,
    pub planted: Option<TritVector>,
    pub seed: u64,
}

impl SdInstance {
    /// Checks the structural invariants, including the planted solution.
    pub fn validate(&self) -> Result<(), Error> {
        check_shape(self.n, self.k, self.w, &self.h)?;
        if self.s.len() != self.n - self.k {
            return Err(Error::Dimension { expected: self.n - self.k, found: self.s.len() });
        }
        if let Some(e) = &self.planted {
            if !is_solution(&self.h, &self.s, self.w, e) {
                return Err(Error::Parameter("planted vector is not a solution"));
            }
        }
        Ok(())
    }

    pub fn is_solution(&self, e: &TritVector) -> bool {
        is_solution(&self.h, &self.s, self.w, e)
    }
}

impl DoomInstance {
    pub fn z(&self) -> usize {
        self.syndromes.len()
    }

    pub fn validate(&self) -> Result<(), Error> {
        check_shape(self.n, self.k, self.w, &self.h)?;
        if self.syndromes.is_empty() {
            return Err(Error::Parameter("DOOM instance needs at least one syndrome"));
        }
        for s in &self.syndromes {
            if s.len() != self.n - self.k {
                return Err(Error::Dimension { expected: self.n - self.k, found: s.len() });
            }
        }
        match (&self.planted, self.planted_index) {
            (Some(e), Some(i)) => {
                let s = self.syndromes.get(i).ok_or(Error::Parameter("planted index out of range"))?;
                if !is_solution(&self.h, s, self.w, e) {
                    return Err(Error::Parameter("planted vector does not match its syndrome"));
                }
            }
            (None, None) => {}
            _ => return Err(Error::Parameter("planted vector and index must come together")),
        }
        Ok(())
    }

    /// Index of the first syndrome matched by `e`, if `wt(e) = w`.
    pub fn matching_index(&self, e: &TritVector) -> Option<usize> {
        if e.len() != self.n || e.weight() != self.w {
            return None;
        }
        let s = self.h.mul_vec(e).ok()?;
        self.syndromes.iter().position(|t| *t == s)
    }
}

fn check_shape(n: usize, k: usize, w: usize, h: &TritMatrix) -> Result<(), Error> {
    if k == 0 || k >= n || w > n {
        return Err(Error::Parameter("need 0 < k < n and w <= n"));
    }
    if h.nrows() != n - k || h.ncols() != n {
        return Err(Error::Dimension { expected: n - k, found: h.nrows() });
    }
    Ok(())
}

fn is_solution(h: &TritMatrix, s: &TritVector, w: usize, e: &TritVector) -> bool {
    e.len() == h.ncols() && e.weight() == w && h.mul_vec(e).map(|x| x == *s).unwrap_or(false)
}

fn check_params(n: usize, k: usize, w: usize) -> Result<(), Error> {
    if k == 0 || k >= n || w > n {
        return Err(Error::Parameter("need 0 < k < n and w <= n"));
    }
    Ok(())
}

/// Uniform full-rank `(n-k) x n` parity-check matrix, by rejection.
pub fn random_full_rank<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Result<TritMatrix, Error> {
    for _ in 0..MAX_RANK_REJECTIONS {
        let h = TritMatrix::random(rows, cols, rng);
        if h.rank() == rows {
            return Ok(h);
        }
    }
    Err(Error::RankDeficient)
}

/// Uniform vector of weight `w`: Fisher-Yates prefix for the support, then
/// each nonzero coordinate uniform in `{1,2}`.
pub fn random_weight_vector<R: Rng + ?Sized>(n: usize, w: usize, rng: &mut R) -> TritVector {
    let mut idx: Vec<usize> = (0..n).collect();
    let mut e = TritVector::zeros(n);
    for i in 0..w {
        let j = rng.gen_range(i..n);
        idx.swap(i, j);
        e.set(idx[i], rng.gen_range(1..3u8));
    }
    e
}

pub fn gen_sd(n: usize, k: usize, w: usize, seed: u64) -> Result<SdInstance, Error> {
    check_params(n, k, w)?;
    let mut rng = rng::stream(seed, "gen-sd");
    let h = random_full_rank(n - k, n, &mut rng)?;
    let e = random_weight_vector(n, w, &mut rng);
    let s = h.mul_vec(&e)?;
    Ok(SdInstance { n, k, w, h, s, planted: Some(e), seed })
}

pub fn gen_doom(n: usize, k: usize, w: usize, z: usize, seed: u64) -> Result<DoomInstance, Error> {
    check_params(n, k, w)?;
    if z == 0 {
        return Err(Error::Parameter("z must be at least 1"));
    }
    let mut rng = rng::stream(seed, "gen-doom");
    let h = random_full_rank(n - k, n, &mut rng)?;
    let e = random_weight_vector(n, w, &mut rng);
    let index = rng.gen_range(0..z);
    let mut syndromes = Vec::with_capacity(z);
    for i in 0..z {
        if i == index {
            syndromes.push(h.mul_vec(&e)?);
        } else {
            syndromes.push(TritVector::random(n - k, &mut rng));
        }
    }
    Ok(DoomInstance { n, k, w, h, syndromes, planted_index: Some(index), planted: Some(e), seed })
}

/// `log2( C(n,w) (q-1)^w / q^(n-k) )`.
pub fn expected_solutions_log2(n: usize, k: usize, w: usize, q: u32) -> f64 {
    let lq = libm::log2(q as f64);
    log2_binomial(n as u64, w as u64) + (w as f64) * libm::log2((q - 1) as f64) - ((n - k) as f64) * lq
}

/// log2 of the number of candidates visited by [`enumerate_by_support`].
pub fn support_enumeration_cost_log2(n: usize, w: usize) -> f64 {
    log2_binomial(n as u64, w as u64) + w as f64
}

/// log2 of the number of candidates visited by [`enumerate_by_kernel`].
pub fn kernel_enumeration_cost_log2(n: usize, rank: usize) -> f64 {
    (n - rank) as f64 * LOG2_3
}

/// All weight-`w` solutions, in the canonical order (support
/// lexicographically, then nonzero pattern with 1 < 2), truncated to `cap`.
///
/// Uses whichever exhaustive route visits fewer candidates.
pub fn brute_force_solutions(inst: &SdInstance, cap: usize) -> Result<Vec<TritVector>, Error> {
    let by_support = support_enumeration_cost_log2(inst.n, inst.w);
    let by_kernel = kernel_enumeration_cost_log2(inst.n, inst.n - inst.k);
    if by_support.min(by_kernel) > ENUMERATION_LIMIT_LOG2 {
        return Err(Error::TooLarge);
    }
    let mut sols = if by_support <= by_kernel {
        enumerate_by_support(&inst.h, &inst.s, inst.w)?
    } else {
        enumerate_by_kernel(&inst.h, &inst.s, inst.w)?
    };
    sort_canonical(&mut sols);
    sols.truncate(cap);
    Ok(sols)
}

/// Sorts vectors by support (lexicographic index lists), then by pattern.
pub fn sort_canonical(v: &mut [TritVector]) {
    v.sort_by_cached_key(|e| {
        let t = e.trits();
        let support: Vec<usize> = (0..t.len()).filter(|&i| t[i] != 0).collect();
        let pattern: Vec<u8> = support.iter().map(|&i| t[i]).collect();
        (support, pattern)
    });
}

/// Route 1: every support of size `w`, every `{1,2}` pattern on it.
///
/// Patterns are walked in Gray-code order so each step costs one column update.
pub fn enumerate_by_support(h: &TritMatrix, s: &TritVector, w: usize) -> Result<Vec<TritVector>, Error> {
    let n = h.ncols();
    if support_enumeration_cost_log2(n, w) > ENUMERATION_LIMIT_LOG2 {
        return Err(Error::TooLarge);
    }
    let cols = h.columns();
    let mut out = Vec::new();
    let mut support: Vec<usize> = (0..w).collect();
    loop {
        let mut acc = TritVector::zeros(h.nrows());
        for &j in &support {
            acc.add_assign_unchecked(&cols[j]);
        }
        // bit i of `pattern` set means coordinate support[i] is 2
        let mut pattern: u64 = 0;
        let total: u64 = 1u64 << w;
        for step in 0..total {
            if step > 0 {
                let bit = step.trailing_zeros() as usize;
                let col = &cols[support[bit]];
                if pattern >> bit & 1 == 0 {
                    acc.add_assign_unchecked(col);
                } else {
                    acc.sub_assign_unchecked(col);
                }
                pattern ^= 1 << bit;
            }
            if acc == *s {
                let mut e = TritVector::zeros(n);
                for (i, &j) in support.iter().enumerate() {
                    e.set(j, if pattern >> i & 1 == 1 { 2 } else { 1 });
                }
                out.push(e);
            }
        }
        if !next_combination(&mut support, n) {
            break;
        }
    }
    Ok(out)
}

fn next_combination(c: &mut [usize], n: usize) -> bool {
    let w = c.len();
    let mut i = w;
    while i > 0 {
        i -= 1;
        if c[i] < n - w + i {
            c[i] += 1;
            for j in i + 1..w {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Route 2: put `[H | s]` in reduced echelon form, then walk all `3^(n-rank)`
/// assignments of the free coordinates in modular Gray-code order.
pub fn enumerate_by_kernel(h: &TritMatrix, s: &TritVector, w: usize) -> Result<Vec<TritVector>, Error> {
    let n = h.ncols();
    let m = h.nrows();
    let mut rows: Vec<TritVector> = (0..m).map(|i| h.row(i).concat(&s.slice(i, 1))).collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..n {
        let Some(p) = (r..m).find(|&i| rows[i].get(c) != 0) else { continue };
        rows.swap(r, p);
        if rows[r].get(c) == 2 {
            rows[r] = rows[r].neg();
        }
        let piv = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r {
                match row.get(c) {
                    1 => row.sub_assign_unchecked(&piv),
                    2 => row.add_assign_unchecked(&piv),
                    _ => {}
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == m {
            break;
        }
    }
    if rows[r..].iter().any(|row| row.get(n) != 0) {
        return Ok(Vec::new());
    }
    if kernel_enumeration_cost_log2(n, r) > ENUMERATION_LIMIT_LOG2 {
        return Err(Error::TooLarge);
    }
    let mut is_pivot = vec![false; n];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    let free: Vec<usize> = (0..n).filter(|&c| !is_pivot[c]).collect();
    // pivot values = rhs - A * free_values
    let a_cols: Vec<TritVector> = free
        .iter()
        .map(|&c| {
            let mut col = TritVector::zeros(r);
            for i in 0..r {
                col.set(i, rows[i].get(c));
            }
            col
        })
        .collect();
    let mut piv_vals = TritVector::zeros(r);
    for i in 0..r {
        piv_vals.set(i, rows[i].get(n));
    }
    let f = free.len();
    let mut digits = vec![0u8; f];
    let total = 3u64.pow(f as u32);
    let mut out = Vec::new();
    let mut free_weight = 0usize;
    for t in 0..total {
        if t > 0 {
            let mut q = t;
            let mut i = 0;
            while q % 3 == 0 {
                q /= 3;
                i += 1;
            }
            let old = digits[i];
            digits[i] = (old + 1) % 3;
            if old == 0 {
                free_weight += 1;
            } else if digits[i] == 0 {
                free_weight -= 1;
            }
            piv_vals.sub_assign_unchecked(&a_cols[i]);
        }
        if free_weight + piv_vals.weight() == w {
            let mut e = TritVector::zeros(n);
            for (i, &c) in free.iter().enumerate() {
                e.set(c, digits[i]);
            }
            for (i, &c) in pivots.iter().enumerate() {
                e.set(c, piv_vals.get(i));
            }
            out.push(e);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expected_solution_examples() {
        assert!((expected_solutions_log2(10, 5, 10, 3) - (10.0 - 5.0 * LOG2_3)).abs() < 1e-9);
        assert!((expected_solutions_log2(4, 2, 0, 3) - (-2.0 * LOG2_3)).abs() < 1e-9);
        let v = expected_solutions_log2(12, 6, 9, 3);
        assert!((libm::exp2(v) - 154.5).abs() < 0.1);
    }

    #[test]
    fn routes_agree_on_small_instance() {
        let inst = gen_sd(12, 6, 9, 5).unwrap();
        let mut a = enumerate_by_support(&inst.h, &inst.s, inst.w).unwrap();
        let mut b = enumerate_by_kernel(&inst.h, &inst.s, inst.w).unwrap();
        sort_canonical(&mut a);
        sort_canonical(&mut b);
        assert_eq!(a, b);
        assert!(a.contains(inst.planted.as_ref().unwrap()));
    }

    #[test]
    fn weight_zero() {
        let inst = gen_sd(10, 5, 0, 3).unwrap();
        assert!(inst.s.is_zero());
        assert_eq!(inst.planted.as_ref().unwrap().weight(), 0);
    }
}
