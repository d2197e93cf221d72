//! Packed GF(3) vectors and matrices.
//!
//! A [`TritVector`] stores two bit-planes: `p1` marks coordinates equal to 1
//! and `p2` marks coordinates equal to 2. The planes are disjoint and the
//! padding bits of the last word are zero in both.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

use crate::error::Error;

const WORD: usize = 64;

#[inline]
fn words_for(len: usize) -> usize {
    len.div_ceil(WORD)
}

#[inline]
fn tail_mask(len: usize) -> u64 {
    match len % WORD {
        0 => !0,
        r => (1u64 << r) - 1,
    }
}

/// Trit-wise sum of two packed trits given as plane pairs.
#[inline(always)]
fn add_planes(a1: u64, a2: u64, b1: u64, b2: u64) -> (u64, u64) {
    let a0 = !(a1 | a2);
    let b0 = !(b1 | b2);
    let s1 = (a1 & b0) | (a0 & b1) | (a2 & b2);
    let s2 = (a2 & b0) | (a0 & b2) | (a1 & b1);
    (s1, s2)
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TritVector {
    len: usize,
    p1: Vec<u64>,
    p2: Vec<u64>,
}

impl TritVector {
    pub fn zeros(len: usize) -> Self {
        let w = words_for(len);
        TritVector { len, p1: vec![0; w], p2: vec![0; w] }
    }

    /// Builds a vector from trit values in `{0,1,2}`.
    pub fn from_trits(trits: &[u8]) -> Result<Self, Error> {
        let mut v = TritVector::zeros(trits.len());
        for (i, &t) in trits.iter().enumerate() {
            if t > 2 {
                return Err(Error::InvalidTrit(t));
            }
            v.set(i, t);
        }
        Ok(v)
    }

    /// Uniform random vector.
    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut v = TritVector::zeros(len);
        for i in 0..len {
            v.set(i, rng.gen_range(0..3u8));
        }
        v
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> u8 {
        debug_assert!(i < self.len);
        let (w, b) = (i / WORD, i % WORD);
        (((self.p1[w] >> b) & 1) | (((self.p2[w] >> b) & 1) << 1)) as u8
    }

    #[inline]
    pub fn set(&mut self, i: usize, t: u8) {
        debug_assert!(i < self.len && t < 3);
        let (w, b) = (i / WORD, i % WORD);
        let m = 1u64 << b;
        self.p1[w] &= !m;
        self.p2[w] &= !m;
        match t {
            1 => self.p1[w] |= m,
            2 => self.p2[w] |= m,
            _ => {}
        }
    }

    pub fn trits(&self) -> Vec<u8> {
        (0..self.len).map(|i| self.get(i)).collect()
    }

    #[inline]
    pub fn weight(&self) -> usize {
        self.p1.iter().zip(&self.p2).map(|(a, b)| (a | b).count_ones() as usize).sum()
    }

    /// Number of coordinates equal to 1 and to 2.
    #[inline]
    pub fn composition(&self) -> (usize, usize) {
        let ones = self.p1.iter().map(|a| a.count_ones() as usize).sum();
        let twos = self.p2.iter().map(|a| a.count_ones() as usize).sum();
        (ones, twos)
    }

    /// Composition restricted to `start..start+len`.
    pub fn composition_in(&self, start: usize, len: usize) -> (usize, usize) {
        let mut ones = 0;
        let mut twos = 0;
        let mut i = start;
        let end = start + len;
        while i < end {
            let (w, b) = (i / WORD, i % WORD);
            let take = (WORD - b).min(end - i);
            let m = if take == WORD { !0 } else { ((1u64 << take) - 1) << b };
            ones += (self.p1[w] & m).count_ones() as usize;
            twos += (self.p2[w] & m).count_ones() as usize;
            i += take;
        }
        (ones, twos)
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.p1.iter().chain(&self.p2).all(|&w| w == 0)
    }

    fn check(&self, other: &Self) -> Result<(), Error> {
        if self.len != other.len {
            return Err(Error::Dimension { expected: self.len, found: other.len });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, Error> {
        self.check(other)?;
        let mut r = self.clone();
        r.add_assign_unchecked(other);
        Ok(r)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, Error> {
        self.check(other)?;
        let mut r = self.clone();
        r.sub_assign_unchecked(other);
        Ok(r)
    }

    /// `self += other`; lengths must agree.
    #[inline]
    pub fn add_assign_unchecked(&mut self, other: &Self) {
        debug_assert_eq!(self.len, other.len);
        for w in 0..self.p1.len() {
            let (s1, s2) = add_planes(self.p1[w], self.p2[w], other.p1[w], other.p2[w]);
            self.p1[w] = s1;
            self.p2[w] = s2;
        }
        self.clear_tail();
    }

    /// `self -= other`; lengths must agree.
    #[inline]
    pub fn sub_assign_unchecked(&mut self, other: &Self) {
        debug_assert_eq!(self.len, other.len);
        for w in 0..self.p1.len() {
            let (s1, s2) = add_planes(self.p1[w], self.p2[w], other.p2[w], other.p1[w]);
            self.p1[w] = s1;
            self.p2[w] = s2;
        }
        self.clear_tail();
    }

    #[inline]
    fn clear_tail(&mut self) {
        if let Some(last) = self.p1.len().checked_sub(1) {
            let m = tail_mask(self.len);
            self.p1[last] &= m;
            self.p2[last] &= m;
        }
    }

    /// Additive inverse: swaps the planes.
    pub fn neg(&self) -> Self {
        TritVector { len: self.len, p1: self.p2.clone(), p2: self.p1.clone() }
    }

    /// Multiplication by a scalar in GF(3).
    pub fn scale(&self, c: u8) -> Self {
        match c % 3 {
            0 => TritVector::zeros(self.len),
            1 => self.clone(),
            _ => self.neg(),
        }
    }

    /// Inner product over GF(3).
    pub fn dot(&self, other: &Self) -> Result<u8, Error> {
        self.check(other)?;
        Ok(self.dot_unchecked(other))
    }

    #[inline]
    pub fn dot_unchecked(&self, other: &Self) -> u8 {
        let mut ones = 0u32;
        let mut twos = 0u32;
        for w in 0..self.p1.len() {
            let (a1, a2, b1, b2) = (self.p1[w], self.p2[w], other.p1[w], other.p2[w]);
            ones += ((a1 & b1) | (a2 & b2)).count_ones();
            twos += ((a1 & b2) | (a2 & b1)).count_ones();
        }
        ((ones + 2 * twos) % 3) as u8
    }

    /// Packs trits `start..start+len` (at most 64) into `(plane1, plane2)`.
    #[inline]
    pub fn window(&self, start: usize, len: usize) -> (u64, u64) {
        debug_assert!(len <= WORD && start + len <= self.len);
        if len == 0 {
            return (0, 0);
        }
        let (w, b) = (start / WORD, start % WORD);
        let mut a1 = self.p1[w] >> b;
        let mut a2 = self.p2[w] >> b;
        if b != 0 && b + len > WORD {
            a1 |= self.p1[w + 1] << (WORD - b);
            a2 |= self.p2[w + 1] << (WORD - b);
        }
        let m = if len == WORD { !0 } else { (1u64 << len) - 1 };
        (a1 & m, a2 & m)
    }

    /// Window of `self + other` without materializing the sum.
    #[inline]
    pub fn window_sum(a: (u64, u64), b: (u64, u64)) -> (u64, u64) {
        add_planes(a.0, a.1, b.0, b.1)
    }

    /// Window of `-a`.
    #[inline]
    pub fn window_neg(a: (u64, u64)) -> (u64, u64) {
        (a.1, a.0)
    }

    /// Copy of coordinates `start..start+len`.
    pub fn slice(&self, start: usize, len: usize) -> Self {
        let mut r = TritVector::zeros(len);
        for i in 0..len {
            r.set(i, self.get(start + i));
        }
        r
    }

    /// Concatenation `self || other`.
    pub fn concat(&self, other: &Self) -> Self {
        let mut r = TritVector::zeros(self.len + other.len);
        for i in 0..self.len {
            r.set(i, self.get(i));
        }
        for i in 0..other.len {
            r.set(self.len + i, other.get(i));
        }
        r
    }
}

impl fmt::Display for TritVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            write!(f, "{}", self.get(i))?;
        }
        Ok(())
    }
}

impl fmt::Debug for TritVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TritVector({})", self)
    }
}

/// Row-major GF(3) matrix.
#[derive(Clone, PartialEq, Eq)]
pub struct TritMatrix {
    cols: usize,
    rows: Vec<TritVector>,
}

impl TritMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        TritMatrix { cols, rows: (0..rows).map(|_| TritVector::zeros(cols)).collect() }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = TritMatrix::zeros(n, n);
        for i in 0..n {
            m.rows[i].set(i, 1);
        }
        m
    }

    pub fn from_rows(rows: Vec<TritVector>, cols: usize) -> Result<Self, Error> {
        for r in &rows {
            if r.len() != cols {
                return Err(Error::Dimension { expected: cols, found: r.len() });
            }
        }
        Ok(TritMatrix { cols, rows })
    }

    pub fn random<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Self {
        TritMatrix { cols, rows: (0..rows).map(|_| TritVector::random(cols, rng)).collect() }
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &TritVector {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[TritVector] {
        &self.rows
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.rows[i].get(j)
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, t: u8) {
        self.rows[i].set(j, t)
    }

    /// `M * v^T`, i.e. the syndrome when `M` is a parity-check matrix.
    pub fn mul_vec(&self, v: &TritVector) -> Result<TritVector, Error> {
        if v.len() != self.cols {
            return Err(Error::Dimension { expected: self.cols, found: v.len() });
        }
        let mut s = TritVector::zeros(self.rows.len());
        for (j, r) in self.rows.iter().enumerate() {
            s.set(j, r.dot_unchecked(v));
        }
        Ok(s)
    }

    /// Matrix product `self * other`.
    pub fn mul(&self, other: &TritMatrix) -> Result<TritMatrix, Error> {
        if self.cols != other.nrows() {
            return Err(Error::Dimension { expected: self.cols, found: other.nrows() });
        }
        let mut out = TritMatrix::zeros(self.nrows(), other.ncols());
        for (i, r) in self.rows.iter().enumerate() {
            let acc = &mut out.rows[i];
            for k in 0..self.cols {
                match r.get(k) {
                    1 => acc.add_assign_unchecked(&other.rows[k]),
                    2 => acc.sub_assign_unchecked(&other.rows[k]),
                    _ => {}
                }
            }
        }
        Ok(out)
    }

    /// Column `j` as a vector of length `nrows`.
    pub fn column(&self, j: usize) -> TritVector {
        let mut c = TritVector::zeros(self.rows.len());
        for (i, r) in self.rows.iter().enumerate() {
            c.set(i, r.get(j));
        }
        c
    }

    /// All columns, materialized once.
    pub fn columns(&self) -> Vec<TritVector> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    /// Block `rows r0..r0+nr`, `cols c0..c0+nc`.
    pub fn submatrix(&self, r0: usize, nr: usize, c0: usize, nc: usize) -> TritMatrix {
        TritMatrix { cols: nc, rows: self.rows[r0..r0 + nr].iter().map(|r| r.slice(c0, nc)).collect() }
    }

    /// Column permutation: column `j` of the result is column `perm[j]` of `self`.
    pub fn permute_columns(&self, perm: &Permutation) -> TritMatrix {
        TritMatrix { cols: self.cols, rows: self.rows.iter().map(|r| perm.apply(r)).collect() }
    }

    pub fn rank(&self) -> usize {
        let mut m = self.rows.clone();
        let mut rank = 0;
        for c in 0..self.cols {
            let Some(p) = (rank..m.len()).find(|&i| m[i].get(c) != 0) else { continue };
            m.swap(rank, p);
            if m[rank].get(c) == 2 {
                m[rank] = m[rank].neg();
            }
            let pivot = m[rank].clone();
            for (i, row) in m.iter_mut().enumerate() {
                if i != rank {
                    eliminate(row, &pivot, c);
                }
            }
            rank += 1;
            if rank == m.len() {
                break;
            }
        }
        rank
    }
}

impl fmt::Debug for TritMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "TritMatrix {}x{}", self.nrows(), self.cols)?;
        for r in &self.rows {
            writeln!(f, "{}", r)?;
        }
        Ok(())
    }
}

/// `row -= row[c] * pivot`, where `pivot[c] = 1`.
#[inline]
fn eliminate(row: &mut TritVector, pivot: &TritVector, c: usize) {
    match row.get(c) {
        1 => row.sub_assign_unchecked(pivot),
        2 => row.add_assign_unchecked(pivot),
        _ => {}
    }
}

/// Bijection on `0..n`. `apply(v)[i] = v[map[i]]`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation { map: (0..n).collect() }
    }

    pub fn from_vec(map: Vec<usize>) -> Result<Self, Error> {
        let mut seen = vec![false; map.len()];
        for &i in &map {
            if i >= map.len() || seen[i] {
                return Err(Error::NotAPermutation);
            }
            seen[i] = true;
        }
        Ok(Permutation { map })
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut map: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = rng.gen_range(0..=i);
            map.swap(i, j);
        }
        Permutation { map }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.map.len()];
        for (i, &p) in self.map.iter().enumerate() {
            inv[p] = i;
        }
        Permutation { map: inv }
    }

    /// `compose(p, q).apply(v) == q.apply(&p.apply(v))`.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        Permutation { map: other.map.iter().map(|&i| self.map[i]).collect() }
    }

    pub fn apply(&self, v: &TritVector) -> TritVector {
        debug_assert_eq!(v.len(), self.map.len());
        let mut r = TritVector::zeros(v.len());
        for (i, &p) in self.map.iter().enumerate() {
            r.set(i, v.get(p));
        }
        r
    }
}

/// Output of a successful partial Gaussian elimination.
#[derive(Clone, Debug)]
pub struct PgeOutput {
    /// Invertible `(n-k) x (n-k)` transform with `S * H_pi = [[I, H'], [0, H'']]`.
    pub s: TritMatrix,
    /// `(n-k-ell) x (k+ell)` block.
    pub h_prime: TritMatrix,
    /// `ell x (k+ell)` block.
    pub h_second: TritMatrix,
}

/// Partial Gaussian elimination of `H_pi` on its first `n-k-ell` columns.
///
/// Returns `None` when the top-left square block of size `n-k-ell` is singular.
/// Pivots are taken from the top `n-k-ell` rows only.
pub fn partial_gaussian_elim(h: &TritMatrix, ell: usize, perm: &Permutation) -> Result<Option<PgeOutput>, Error> {
    let r_total = h.nrows();
    let n = h.ncols();
    if perm.len() != n {
        return Err(Error::Dimension { expected: n, found: perm.len() });
    }
    if ell > r_total {
        return Err(Error::Parameter("ell exceeds n-k"));
    }
    let r = r_total - ell;
    let mut m = h.permute_columns(perm).rows;
    let mut s = TritMatrix::identity(r_total).rows;
    for c in 0..r {
        let Some(p) = (c..r).find(|&i| m[i].get(c) != 0) else {
            return Ok(None);
        };
        m.swap(c, p);
        s.swap(c, p);
        if m[c].get(c) == 2 {
            m[c] = m[c].neg();
            s[c] = s[c].neg();
        }
        let (pm, ps) = (m[c].clone(), s[c].clone());
        for i in 0..r_total {
            if i == c {
                continue;
            }
            match m[i].get(c) {
                1 => {
                    m[i].sub_assign_unchecked(&pm);
                    s[i].sub_assign_unchecked(&ps);
                }
                2 => {
                    m[i].add_assign_unchecked(&pm);
                    s[i].add_assign_unchecked(&ps);
                }
                _ => {}
            }
        }
    }
    let reduced = TritMatrix { cols: n, rows: m };
    Ok(Some(PgeOutput {
        s: TritMatrix { cols: r_total, rows: s },
        h_prime: reduced.submatrix(0, r, r, n - r),
        h_second: reduced.submatrix(r, ell, r, n - r),
    }))
}
