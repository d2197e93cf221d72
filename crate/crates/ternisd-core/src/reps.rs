//! Representation counting over GF(3) and the layered representation tree.
//!
//! A vector of density `(alpha0, beta0)` (fractions of 1s and 2s) is split
//! into two vectors of density `(alpha1, beta1)`. With the symmetric
//! decomposition table parameterized by `z`
//!
//! ```text
//! x00 = 1-a0-b0-2z   x12 = x21 = z
//! x01 = x10 = A+z    x22 = D-2z
//! x02 = x20 = B+z    x11 = C-2z
//! ```
//!
//! the number of representations is `g(1-a0-b0, z, z) + g(a0, A+z, A+z) +
//! g(b0, B+z, B+z)` per coordinate, maximized at the typical `z`.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write as _;

use rand::Rng;

use crate::error::Error;
use crate::f3::TritVector;
use crate::math::{g, LOG2_3};
use crate::pgess::{ss_to_ssnzc, ssnzc_to_ss, Budget, EngineStatus, Sink, SubsetSumEngine};
use crate::rng::StreamRng;
use crate::wagner::{merge, realize_widths, window_offsets, MergeEntry, MergeList, NO_TAG};

const FEAS_EPS: f64 = 1e-12;

/// Fractions of coordinates equal to 1 (`alpha`) and to 2 (`beta`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Density {
    pub alpha: f64,
    pub beta: f64,
}

impl Density {
    pub const fn new(alpha: f64, beta: f64) -> Self {
        Density { alpha, beta }
    }

    pub fn is_valid(&self) -> bool {
        self.alpha >= 0.0 && self.beta >= 0.0 && self.alpha + self.beta <= 1.0 + FEAS_EPS
    }

    /// `g(1, alpha, beta)`: log2 of the number of vectors per coordinate.
    pub fn entropy(&self) -> f64 {
        g(1.0, self.alpha, self.beta)
    }
}

/// Offsets of the symmetric table and the feasible `z` interval.
#[derive(Clone, Copy, Debug)]
pub struct TableShape {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub z_lo: f64,
    pub z_hi: f64,
}

pub fn table_shape(d0: Density, d1: Density) -> TableShape {
    let (a0, b0, a1, b1) = (d0.alpha, d0.beta, d1.alpha, d1.beta);
    let a = (2.0 * a0 + b0 - a1 - 2.0 * b1) / 3.0;
    let b = (a0 + 2.0 * b0 - 2.0 * a1 - b1) / 3.0;
    let c = (-2.0 * a0 - b0 + 4.0 * a1 + 2.0 * b1) / 3.0;
    let d = (-a0 - 2.0 * b0 + 2.0 * a1 + 4.0 * b1) / 3.0;
    let z_lo = 0.0f64.max(-a).max(-b);
    let z_hi = ((1.0 - a0 - b0) / 2.0).min(c / 2.0).min(d / 2.0);
    TableShape { a, b, c, d, z_lo, z_hi }
}

/// The nine table entries `x[i][j]` (case `i + j`) at `(z, w)`.
pub fn decomposition_table(d0: Density, d1: Density, z: f64, w: f64) -> [[f64; 3]; 3] {
    let t = table_shape(d0, d1);
    [
        [1.0 - d0.alpha - d0.beta - 2.0 * z, t.a + z + w, t.b + z - w],
        [t.a + z - w, t.c - 2.0 * z, z + w],
        [t.b + z + w, z - w, t.d - 2.0 * z],
    ]
}

/// Representation exponent at an arbitrary table point.
pub fn nrep_at(d0: Density, d1: Density, z: f64, w: f64) -> f64 {
    let x = decomposition_table(d0, d1, z, w);
    g(1.0 - d0.alpha - d0.beta, x[2][1], x[1][2]) + g(d0.alpha, x[0][1], x[1][0]) + g(d0.beta, x[0][2], x[2][0])
}

fn feasible(t: &TableShape) -> bool {
    t.z_lo <= t.z_hi + FEAS_EPS
}

/// Derivative of the symmetric objective in `z` (log2 units), for `z`
/// strictly inside the feasible interval.
fn objective_slope(d0: Density, t: &TableShape, z: f64) -> f64 {
    let n0 = 1.0 - d0.alpha - d0.beta;
    let mut s = 0.0;
    let mut term = |mass: f64, num: f64, den: f64| {
        if mass > FEAS_EPS {
            s += 2.0 * libm::log2(num.max(f64::MIN_POSITIVE) / den.max(f64::MIN_POSITIVE));
        }
    };
    term(n0, n0 - 2.0 * z, z);
    term(d0.alpha, t.d - 2.0 * z, t.a + z);
    term(d0.beta, t.c - 2.0 * z, t.b + z);
    s
}

/// Typical `z`: root of the cubic stationarity condition, found by
/// bisection on the sign of the (decreasing) derivative.
pub fn solve_typical_z(d0: Density, d1: Density) -> Result<f64, Error> {
    if !d0.is_valid() || !d1.is_valid() {
        return Err(Error::Parameter("invalid density"));
    }
    let t = table_shape(d0, d1);
    if !feasible(&t) {
        return Err(Error::Infeasible("no decomposition table for these densities"));
    }
    let (mut lo, mut hi) = (t.z_lo, t.z_hi.max(t.z_lo));
    if hi - lo < 1e-15 {
        return Ok(lo);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if objective_slope(d0, &t, mid) > 0.0 {
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

/// Per-coordinate log2 of the number of representations.
pub fn nrep_exponent_log2(d0: Density, d1: Density) -> Result<f64, Error> {
    let z = solve_typical_z(d0, d1)?;
    Ok(nrep_at(d0, d1, z, 0.0))
}

/// Well-formed survivors of merging two lists of density-`d1` elements on
/// `width` bits, all quantities per coordinate:
/// `2L - width + nrep - (2 g(d1) - g(d0))`.
pub fn wellformed_size_log2(l_log2: f64, d0: Density, d1: Density, width: f64) -> Result<f64, Error> {
    wellformed_size_segments(l_log2, &[(1.0, d0, d1)], width)
}

/// Same as [`wellformed_size_log2`] over several segments `(length, parent, child)`.
pub fn wellformed_size_segments(l_log2: f64, segments: &[(f64, Density, Density)], width: f64) -> Result<f64, Error> {
    let mut loss = 0.0;
    for &(len, d0, d1) in segments {
        let n = nrep_exponent_log2(d0, d1)?;
        loss += len * (2.0 * d1.entropy() - d0.entropy() - n);
    }
    Ok(2.0 * l_log2 - width - loss)
}

/// One split between consecutive levels.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LayerSpec {
    LeftRight,
    Representation(Density),
    /// Spans two levels. First level: representations with `rho1` on the
    /// leading `lambda1` fraction (part A) and `rho2` on the rest (part B).
    /// Second level: left-right on A, representations with `rho3` on B.
    PartialRep { lambda1: f64, rho1: Density, rho2: Density, rho3: Density },
}

/// A single level transition after expanding [`LayerSpec::PartialRep`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SplitOp {
    LeftRight,
    Rep(Density),
    PartialFirst { lambda1: f64, rho1: Density, rho2: Density },
    PartialSecond { rho3: Density },
}

impl SplitOp {
    fn is_representation(&self) -> bool {
        !matches!(self, SplitOp::LeftRight)
    }
}

/// Expands layers into per-level split operations (index 0 splits the root).
pub fn expand_layers(layers: &[LayerSpec]) -> Vec<SplitOp> {
    let mut ops = Vec::new();
    for l in layers {
        match *l {
            LayerSpec::LeftRight => ops.push(SplitOp::LeftRight),
            LayerSpec::Representation(d) => ops.push(SplitOp::Rep(d)),
            LayerSpec::PartialRep { lambda1, rho1, rho2, rho3 } => {
                ops.push(SplitOp::PartialFirst { lambda1, rho1, rho2 });
                ops.push(SplitOp::PartialSecond { rho3 });
            }
        }
    }
    ops
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Part {
    Whole,
    A,
    B,
}

/// Asymptotic segment: length per `n`, density, partial-rep tag.
#[derive(Clone, Copy, Debug)]
struct Segment {
    len: f64,
    density: Density,
    part: Part,
}

/// Per-level asymptotic quantities, level 0 (root) to level `a` (leaves).
#[derive(Clone, Debug, PartialEq)]
pub struct LevelProfile {
    /// log2 of the number of distinct vectors a level-`i` node may hold (length `a+1`).
    pub distinct: Vec<f64>,
    /// Badly-formed loss of the merge forming level `i` (length `a`).
    pub loss: Vec<f64>,
    /// Representation exponent contributed by the split below level `i` (length `a`).
    pub reps: Vec<f64>,
}

/// Distinct bounds, losses and representation counts of a tree whose root
/// spans `root_len` coordinates per `n` with density `root`.
pub fn level_profile(root_len: f64, root: Density, ops: &[SplitOp]) -> Result<LevelProfile, Error> {
    let mut segs = vec![Segment { len: root_len, density: root, part: Part::Whole }];
    let mut distinct = Vec::with_capacity(ops.len() + 1);
    let mut loss = Vec::with_capacity(ops.len());
    let mut reps = Vec::with_capacity(ops.len());
    let dist = |segs: &[Segment]| segs.iter().map(|s| s.len * s.density.entropy()).sum::<f64>();
    for op in ops {
        distinct.push(dist(&segs));
        let mut next = Vec::new();
        let mut ls = 0.0;
        let mut rp = 0.0;
        let mut rep = |len: f64, d0: Density, d1: Density, part: Part, next: &mut Vec<Segment>| -> Result<(), Error> {
            if len <= 0.0 {
                return Ok(());
            }
            if !d1.is_valid() {
                return Err(Error::Parameter("invalid density"));
            }
            let n = nrep_exponent_log2(d0, d1)?;
            rp += len * n;
            ls += len * (2.0 * d1.entropy() - d0.entropy() - n);
            next.push(Segment { len, density: d1, part });
            Ok(())
        };
        match *op {
            SplitOp::LeftRight => {
                next = segs.iter().map(|s| Segment { len: s.len / 2.0, ..*s }).collect();
            }
            SplitOp::Rep(d) => {
                for s in &segs {
                    rep(s.len, s.density, d, s.part, &mut next)?;
                }
            }
            SplitOp::PartialFirst { lambda1, rho1, rho2 } => {
                if segs.len() != 1 || !(0.0..=1.0).contains(&lambda1) {
                    return Err(Error::Parameter("partial representation needs one segment and lambda1 in [0,1]"));
                }
                let s = segs[0];
                rep(lambda1 * s.len, s.density, rho1, Part::A, &mut next)?;
                rep((1.0 - lambda1) * s.len, s.density, rho2, Part::B, &mut next)?;
            }
            SplitOp::PartialSecond { rho3 } => {
                for s in &segs {
                    if s.part == Part::A {
                        next.push(Segment { len: s.len / 2.0, ..*s });
                    } else {
                        rep(s.len, s.density, rho3, s.part, &mut next)?;
                    }
                }
            }
        }
        loss.push(ls);
        reps.push(rp);
        segs = next;
    }
    distinct.push(dist(&segs));
    Ok(LevelProfile { distinct, loss, reps })
}

/// A representation tree with its per-level accounting, all in log2 per `n`
/// (or absolute log2 after [`RepPlan::scaled`]).
#[derive(Clone, Debug, PartialEq)]
pub struct RepPlan {
    pub rate: f64,
    pub ell: f64,
    pub root: Density,
    pub layers: Vec<LayerSpec>,
    /// Index `i` is the width of the merge forming level `i`; length `a`.
    pub merge_widths: Vec<f64>,
    /// Well-formed distinct list sizes, levels `0..=a`.
    pub list_sizes: Vec<f64>,
    pub leaf_size_log2: f64,
}

/// The accounting identity `root = solutions + reps - waste - leaf deficit
/// - duplicates`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlanLedger {
    /// `D_0 - ell log2 3`: solutions of the root composition.
    pub solutions: f64,
    /// `sum_i 2^i reps_i`.
    pub representations: f64,
    /// `sum_i (2^i - 1) m_i`.
    pub waste: f64,
    /// `2^a (D_a - L_a)`, zero with full leaves.
    pub leaf_deficit: f64,
    /// `sum_i 2^i` times the amount cut from level `i` by its distinct bound.
    pub duplicates: f64,
    pub root: f64,
    /// `sum_i m_i`.
    pub total_width: f64,
}

impl PlanLedger {
    pub fn residual(&self) -> f64 {
        self.solutions + self.representations - self.waste - self.leaf_deficit - self.duplicates - self.root
    }
}

impl RepPlan {
    pub fn a(&self) -> usize {
        self.merge_widths.len()
    }

    pub fn ops(&self) -> Vec<SplitOp> {
        expand_layers(&self.layers)
    }

    pub fn profile(&self) -> Result<LevelProfile, Error> {
        level_profile(self.rate + self.ell, self.root, &self.ops())
    }

    /// Ledger computed from the plan's widths and sizes.
    pub fn ledger(&self) -> Result<PlanLedger, Error> {
        let p = self.profile()?;
        let a = self.a();
        if p.loss.len() != a || self.list_sizes.len() != a + 1 {
            return Err(Error::Parameter("plan levels disagree with its layers"));
        }
        let mut representations = 0.0;
        let mut waste = 0.0;
        let mut duplicates = 0.0;
        for i in 0..a {
            let scale = libm::exp2(i as f64);
            representations += scale * p.reps[i];
            waste += (scale - 1.0) * self.merge_widths[i];
            let formed = 2.0 * self.list_sizes[i + 1] - self.merge_widths[i] - p.loss[i];
            duplicates += scale * (formed - self.list_sizes[i]);
        }
        let total_width: f64 = self.merge_widths.iter().sum();
        Ok(PlanLedger {
            solutions: p.distinct[0] - self.ell * LOG2_3,
            representations,
            waste,
            leaf_deficit: libm::exp2(a as f64) * (p.distinct[a] - self.list_sizes[a]),
            duplicates,
            root: self.list_sizes[0],
            total_width,
        })
    }

    /// Checks the width total and the size recursion; returns the worst error.
    pub fn consistency_error(&self) -> Result<f64, Error> {
        let l = self.ledger()?;
        let width_err = (l.total_width - self.ell * LOG2_3).abs();
        Ok(width_err.max(l.residual().abs()))
    }

    /// Multiplies every log2 quantity by `n` (per-`n` plan to absolute plan).
    pub fn scaled(&self, n: f64) -> RepPlan {
        RepPlan {
            rate: self.rate * n,
            ell: self.ell * n,
            root: self.root,
            layers: self.layers.clone(),
            merge_widths: self.merge_widths.iter().map(|w| w * n).collect(),
            list_sizes: self.list_sizes.iter().map(|w| w * n).collect(),
            leaf_size_log2: self.leaf_size_log2 * n,
        }
    }

    /// `key=value` text block, densities and widths to 6 decimals.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "a={}", self.a());
        let _ = writeln!(s, "rate={:.6}", self.rate);
        let _ = writeln!(s, "ell={:.6}", self.ell);
        let _ = writeln!(s, "root={:.6},{:.6}", self.root.alpha, self.root.beta);
        for (i, l) in self.layers.iter().enumerate() {
            let _ = match l {
                LayerSpec::LeftRight => writeln!(s, "layer.{i}=lr"),
                LayerSpec::Representation(d) => writeln!(s, "layer.{i}=rep:{:.6},{:.6}", d.alpha, d.beta),
                LayerSpec::PartialRep { lambda1, rho1, rho2, rho3 } => writeln!(
                    s,
                    "layer.{i}=partial:{:.6}:{:.6},{:.6}:{:.6},{:.6}:{:.6},{:.6}",
                    lambda1, rho1.alpha, rho1.beta, rho2.alpha, rho2.beta, rho3.alpha, rho3.beta
                ),
            };
        }
        for (i, w) in self.merge_widths.iter().enumerate() {
            let _ = writeln!(s, "width.{i}={:.6}", w);
        }
        for (i, l) in self.list_sizes.iter().enumerate() {
            let _ = writeln!(s, "size.{i}={:.6}", l);
        }
        let _ = writeln!(s, "leaf={:.6}", self.leaf_size_log2);
        s
    }

    /// Parses the output of [`RepPlan::to_text`].
    pub fn from_text(text: &str) -> Result<RepPlan, Error> {
        let mut plan = RepPlan {
            rate: 0.0,
            ell: 0.0,
            root: Density::new(0.5, 0.0),
            layers: Vec::new(),
            merge_widths: Vec::new(),
            list_sizes: Vec::new(),
            leaf_size_log2: 0.0,
        };
        let mut a = None;
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let (k, v) = line.split_once('=').ok_or(Error::Parameter("plan line without '='"))?;
            let num = |x: &str| x.trim().parse::<f64>().map_err(|_| Error::Parameter("bad number in plan"));
            let dens = |x: &str| -> Result<Density, Error> {
                let (p, q) = x.split_once(',').ok_or(Error::Parameter("bad density in plan"))?;
                Ok(Density::new(num(p)?, num(q)?))
            };
            match k {
                "a" => a = Some(v.trim().parse::<usize>().map_err(|_| Error::Parameter("bad a"))?),
                "rate" => plan.rate = num(v)?,
                "ell" => plan.ell = num(v)?,
                "root" => plan.root = dens(v)?,
                "leaf" => plan.leaf_size_log2 = num(v)?,
                _ if k.starts_with("layer.") => {
                    let layer = if v == "lr" {
                        LayerSpec::LeftRight
                    } else if let Some(d) = v.strip_prefix("rep:") {
                        LayerSpec::Representation(dens(d)?)
                    } else if let Some(rest) = v.strip_prefix("partial:") {
                        let f: Vec<&str> = rest.split(':').collect();
                        if f.len() != 4 {
                            return Err(Error::Parameter("bad partial layer"));
                        }
                        LayerSpec::PartialRep { lambda1: num(f[0])?, rho1: dens(f[1])?, rho2: dens(f[2])?, rho3: dens(f[3])? }
                    } else {
                        return Err(Error::Parameter("unknown layer kind"));
                    };
                    plan.layers.push(layer);
                }
                _ if k.starts_with("width.") => plan.merge_widths.push(num(v)?),
                _ if k.starts_with("size.") => plan.list_sizes.push(num(v)?),
                _ => return Err(Error::Parameter("unknown plan key")),
            }
        }
        if a != Some(plan.merge_widths.len()) || expand_layers(&plan.layers).len() != plan.merge_widths.len() {
            return Err(Error::Parameter("plan depth mismatch"));
        }
        Ok(plan)
    }
}

// ---------------------------------------------------------------------------
// Concrete trees
// ---------------------------------------------------------------------------

/// Concrete segment: coordinate interval with exact counts of 1s and 2s.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CountSegment {
    pub start: usize,
    pub len: usize,
    pub ones: usize,
    pub twos: usize,
    part_b: bool,
}

/// Whether a vector with counts `parent` (zeros, ones, twos) splits into
/// two vectors with counts `child` (ones, twos) each.
pub fn counts_decomposable(parent: (usize, usize, usize), child: (usize, usize)) -> bool {
    let (n0, n1, n2) = (parent.0 as i64, parent.1 as i64, parent.2 as i64);
    let (c1, c2) = (child.0 as i64, child.1 as i64);
    for x12 in 0..=n0 {
        for x21 in 0..=(n0 - x12) {
            for x01 in 0..=n1 {
                let x10 = x01 + x21 - x12;
                let x22 = n1 - x01 - x10;
                if x10 < 0 || x22 < 0 {
                    continue;
                }
                let x20 = c2 - x21 - x22;
                let x02 = c2 - x12 - x22;
                let x11 = n2 - x02 - x20;
                if x20 < 0 || x02 < 0 || x11 < 0 {
                    continue;
                }
                if x10 + x11 + x12 == c1 {
                    return true;
                }
            }
        }
    }
    false
}

fn rep_child_counts(len: usize, ones: usize, twos: usize, d: Density) -> Option<(usize, usize)> {
    let r1 = libm::round(d.alpha * len as f64) as i64;
    let r2 = libm::round(d.beta * len as f64) as i64;
    let mut best: Option<((usize, usize), i64)> = None;
    for d1 in -2i64..=2 {
        for d2 in -2i64..=2 {
            let (c1, c2) = (r1 + d1, r2 + d2);
            if c1 < 0 || c2 < 0 || (c1 + c2) as usize > len {
                continue;
            }
            let cost = d1.abs() + d2.abs();
            if best.is_some_and(|(_, c)| c <= cost) {
                continue;
            }
            if counts_decomposable((len - ones - twos, ones, twos), (c1 as usize, c2 as usize)) {
                best = Some(((c1 as usize, c2 as usize), cost));
            }
        }
    }
    best.map(|(c, _)| c)
}

fn lr_halves(s: &CountSegment) -> (CountSegment, CountSegment) {
    let llen = s.len / 2;
    let rlen = s.len - llen;
    let (mut lo, mut lt) = (s.ones / 2, s.twos / 2);
    if (s.ones - lo) + (s.twos - lt) > rlen {
        if s.ones > lo {
            lo += 1;
        } else {
            lt += 1;
        }
    }
    if (s.ones - lo) + (s.twos - lt) > rlen && s.twos > lt {
        lt += 1;
    }
    (
        CountSegment { start: s.start, len: llen, ones: lo, twos: lt, part_b: s.part_b },
        CountSegment { start: s.start + llen, len: rlen, ones: s.ones - lo, twos: s.twos - lt, part_b: s.part_b },
    )
}

/// A node of a concrete tree: its segments, and whether the merge forming
/// it must be filtered for composition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConcreteNode {
    pub segments: Vec<CountSegment>,
    pub filtered: bool,
}

/// Concrete tree: `levels[i]` holds the `2^i` nodes of level `i`.
#[derive(Clone, Debug)]
pub struct ConcreteTree {
    pub levels: Vec<Vec<ConcreteNode>>,
}

/// Lays out the tree for `m` coordinates with root counts `(ones, twos)`.
pub fn concrete_tree(m: usize, root_counts: (usize, usize), ops: &[SplitOp]) -> Result<ConcreteTree, Error> {
    let root = ConcreteNode {
        segments: vec![CountSegment { start: 0, len: m, ones: root_counts.0, twos: root_counts.1, part_b: false }],
        filtered: false,
    };
    let mut levels = vec![vec![root]];
    for op in ops {
        let cur = levels.last().expect("root level");
        let mut next = Vec::with_capacity(cur.len() * 2);
        for node in cur {
            let mut left = Vec::new();
            let mut right = Vec::new();
            let rep = |s: &CountSegment, d: Density, part_b: bool, left: &mut Vec<CountSegment>, right: &mut Vec<CountSegment>| -> Result<(), Error> {
                if s.len == 0 {
                    return Ok(());
                }
                let (c1, c2) = rep_child_counts(s.len, s.ones, s.twos, d)
                    .ok_or(Error::Infeasible("no integer decomposition near the requested density"))?;
                let child = CountSegment { start: s.start, len: s.len, ones: c1, twos: c2, part_b };
                left.push(child);
                right.push(child);
                Ok(())
            };
            match *op {
                SplitOp::LeftRight => {
                    for s in &node.segments {
                        let (l, r) = lr_halves(s);
                        left.push(l);
                        right.push(r);
                    }
                }
                SplitOp::Rep(d) => {
                    for s in &node.segments {
                        rep(s, d, s.part_b, &mut left, &mut right)?;
                    }
                }
                SplitOp::PartialFirst { lambda1, rho1, rho2 } => {
                    let [s] = node.segments.as_slice() else {
                        return Err(Error::Parameter("partial representation needs one segment"));
                    };
                    let la = (libm::round(lambda1 * s.len as f64) as usize).min(s.len);
                    // counts of the parent are split proportionally between A and B
                    let oa = libm::round(s.ones as f64 * la as f64 / s.len.max(1) as f64) as usize;
                    let ta = (libm::round(s.twos as f64 * la as f64 / s.len.max(1) as f64) as usize).min(la - oa.min(la));
                    let oa = oa.min(la);
                    let pa = CountSegment { start: s.start, len: la, ones: oa, twos: ta, part_b: false };
                    let pb = CountSegment { start: s.start + la, len: s.len - la, ones: s.ones - oa, twos: s.twos - ta, part_b: true };
                    rep(&pa, rho1, false, &mut left, &mut right)?;
                    rep(&pb, rho2, true, &mut left, &mut right)?;
                }
                SplitOp::PartialSecond { rho3 } => {
                    for s in &node.segments {
                        if s.part_b {
                            rep(s, rho3, true, &mut left, &mut right)?;
                        } else {
                            let (l, r) = lr_halves(s);
                            left.push(l);
                            right.push(r);
                        }
                    }
                }
            }
            let filtered = op.is_representation();
            next.push(ConcreteNode { segments: left, filtered });
            next.push(ConcreteNode { segments: right, filtered });
        }
        levels.push(next);
    }
    // the filter flag belongs to the merge that forms the parent
    for i in 0..ops.len() {
        let f = ops[i].is_representation();
        for node in &mut levels[i] {
            node.filtered = f;
        }
    }
    if let Some(last) = levels.last_mut() {
        for node in last {
            node.filtered = false;
        }
    }
    Ok(ConcreteTree { levels })
}

fn segment_capacity_log2(s: &CountSegment) -> f64 {
    use crate::math::log2_factorial;
    log2_factorial(s.len as f64)
        - log2_factorial(s.ones as f64)
        - log2_factorial(s.twos as f64)
        - log2_factorial((s.len - s.ones - s.twos) as f64)
}

/// log2 of the number of vectors matching a node's segment counts.
pub fn node_capacity_log2(node: &ConcreteNode) -> f64 {
    node.segments.iter().map(segment_capacity_log2).sum()
}

fn enumerate_segment(s: &CountSegment, out: &mut Vec<Vec<(usize, u8)>>) {
    // all placements of `ones` 1s and `twos` 2s in the interval
    fn rec(pos: usize, end: usize, ones: usize, twos: usize, cur: &mut Vec<(usize, u8)>, out: &mut Vec<Vec<(usize, u8)>>) {
        if ones == 0 && twos == 0 {
            out.push(cur.clone());
            return;
        }
        if end - pos < ones + twos {
            return;
        }
        rec(pos + 1, end, ones, twos, cur, out);
        if ones > 0 {
            cur.push((pos, 1));
            rec(pos + 1, end, ones - 1, twos, cur, out);
            cur.pop();
        }
        if twos > 0 {
            cur.push((pos, 2));
            rec(pos + 1, end, ones, twos - 1, cur, out);
            cur.pop();
        }
    }
    let mut cur = Vec::new();
    rec(s.start, s.start + s.len, s.ones, s.twos, &mut cur, out);
}

/// Every coefficient vector matching the node's counts.
pub fn enumerate_node(node: &ConcreteNode, m: usize) -> Vec<TritVector> {
    let mut acc = vec![TritVector::zeros(m)];
    for s in &node.segments {
        let mut placements = Vec::new();
        enumerate_segment(s, &mut placements);
        let mut next = Vec::with_capacity(acc.len() * placements.len());
        for base in &acc {
            for pl in &placements {
                let mut v = base.clone();
                for &(i, t) in pl {
                    v.set(i, t);
                }
                next.push(v);
            }
        }
        acc = next;
    }
    acc
}

fn sample_node<R: Rng + ?Sized>(node: &ConcreteNode, m: usize, rng: &mut R) -> TritVector {
    let mut v = TritVector::zeros(m);
    for s in &node.segments {
        let mut idx: Vec<usize> = (s.start..s.start + s.len).collect();
        for i in 0..(s.ones + s.twos) {
            let j = rng.gen_range(i..idx.len());
            idx.swap(i, j);
            v.set(idx[i], if i < s.ones { 1 } else { 2 });
        }
    }
    v
}

fn entry_for(columns: &[TritVector], coeff: TritVector) -> MergeEntry {
    let ell = columns.first().map(|c| c.len()).unwrap_or(0);
    let mut key = TritVector::zeros(ell);
    for (i, x) in columns.iter().enumerate() {
        match coeff.get(i) {
            1 => key.add_assign_unchecked(x),
            2 => key.sub_assign_unchecked(x),
            _ => {}
        }
    }
    MergeEntry { key, coeff, tag: NO_TAG }
}

/// Leaf list of `count` distinct vectors with the node's counts; exhaustive
/// when `count` reaches half the capacity.
pub fn leaf_for_node<R: Rng + ?Sized>(columns: &[TritVector], node: &ConcreteNode, count: u64, rng: &mut R) -> MergeList {
    let m = columns.len();
    let cap_log2 = node_capacity_log2(node);
    let count_f = count as f64;
    let coeffs: Vec<TritVector> = if cap_log2 <= 22.0 && count_f * 2.0 >= libm::exp2(cap_log2) - 0.5 {
        let mut all = enumerate_node(node, m);
        if (count as usize) < all.len() {
            use rand::seq::SliceRandom;
            all.shuffle(rng);
            all.truncate(count as usize);
        }
        all
    } else {
        let mut set = BTreeSet::new();
        let want = count.min(libm::floor(libm::exp2(cap_log2.min(62.0))) as u64);
        while (set.len() as u64) < want {
            set.insert(sample_node(node, m, rng));
        }
        set.into_iter().collect()
    };
    MergeList { entries: coeffs.into_iter().map(|c| entry_for(columns, c)).collect() }
}

/// Keeps entries whose per-segment counts deviate from `expected` by at most `tolerance`.
pub fn filter_wellformed(list: MergeList, expected: &[CountSegment], tolerance: usize) -> MergeList {
    MergeList {
        entries: list
            .entries
            .into_iter()
            .filter(|e| {
                expected.iter().all(|s| {
                    let (o, t) = e.coeff.composition_in(s.start, s.len);
                    o.abs_diff(s.ones) <= tolerance && t.abs_diff(s.twos) <= tolerance
                })
            })
            .collect(),
    }
}

/// Filters by fractional densities: counts are `round(alpha len)`, `round(beta len)`.
pub fn filter_wellformed_density(list: MergeList, expected: Density, tolerance: usize) -> MergeList {
    let len = list.entries.first().map(|e| e.coeff.len()).unwrap_or(0);
    let seg = CountSegment {
        start: 0,
        len,
        ones: libm::round(expected.alpha * len as f64) as usize,
        twos: libm::round(expected.beta * len as f64) as usize,
        part_b: false,
    };
    filter_wellformed(list, &[seg], tolerance)
}

/// Concrete solver settings.
#[derive(Clone, Debug, PartialEq)]
pub struct RepSolveConfig {
    /// Leaf size (absolute log2).
    pub leaf_size_log2: f64,
    /// Merge widths (absolute log2), index 0 is the root merge.
    pub merge_widths: Vec<f64>,
    pub root_counts: (usize, usize),
    pub tolerance: usize,
}

/// Runs the representation tree and streams root vectors `b` with
/// `sum b_i x_i = target` and the root composition.
pub fn rep_solve_streaming(
    columns: &[TritVector],
    target: &TritVector,
    ops: &[SplitOp],
    cfg: &RepSolveConfig,
    rng: &mut StreamRng,
    budget: &mut Budget,
    sink: &mut Sink<'_>,
) -> Result<EngineStatus, Error> {
    let m = columns.len();
    let ell = target.len();
    let a = ops.len();
    if cfg.merge_widths.len() != a {
        return Err(Error::Parameter("one merge width per level"));
    }
    let tree = concrete_tree(m, cfg.root_counts, ops)?;
    let leaf = libm::floor(libm::exp2(cfg.leaf_size_log2.min(62.0))).max(1.0) as u64;
    let mut lists: Vec<MergeList> = tree.levels[a].iter().map(|node| leaf_for_node(columns, node, leaf, rng)).collect();
    let built: u64 = lists.iter().map(|l| l.len() as u64).sum();
    if !budget.spend(built) {
        return Ok(EngineStatus::BudgetExhausted);
    }
    if let Some(last) = lists.last_mut() {
        for e in &mut last.entries {
            e.key.sub_assign_unchecked(target);
        }
    }
    let trits = realize_widths(&cfg.merge_widths, ell);
    let offsets = window_offsets(&trits);
    for level in (0..a).rev() {
        let (start, len) = (offsets[level], trits[level]);
        let mut next = Vec::with_capacity(lists.len() / 2);
        let mut it = lists.into_iter();
        let mut node_idx = 0;
        while let (Some(l), Some(mut r)) = (it.next(), it.next()) {
            r.sort_by_window(start, len);
            let Some(mut merged) = merge(&l, &r, start, len, (0, 0), budget) else {
                return Ok(EngineStatus::BudgetExhausted);
            };
            let node = &tree.levels[level][node_idx];
            if node.filtered {
                merged = filter_wellformed(merged, &node.segments, cfg.tolerance);
                merged.entries.sort_by(|x, y| x.coeff.cmp(&y.coeff));
                merged.entries.dedup_by(|x, y| x.coeff == y.coeff);
            }
            if merged.is_empty() {
                return Ok(EngineStatus::Collapsed);
            }
            next.push(merged);
            node_idx += 1;
        }
        lists = next;
    }
    let root = lists.pop().unwrap_or_default();
    let rootseg = &tree.levels[0][0].segments;
    for e in &root.entries {
        if !e.key.is_zero() {
            continue;
        }
        let (o, t) = e.coeff.composition();
        if o != rootseg[0].ones || t != rootseg[0].twos {
            continue;
        }
        if sink(&e.coeff, 0) {
            return Ok(EngineStatus::Stopped);
        }
    }
    Ok(EngineStatus::Completed)
}

/// Collects the output of [`rep_solve_streaming`].
pub fn rep_solve(
    columns: &[TritVector],
    target: &TritVector,
    ops: &[SplitOp],
    cfg: &RepSolveConfig,
    rng: &mut StreamRng,
    budget: &mut Budget,
) -> Result<Vec<TritVector>, Error> {
    let mut out = Vec::new();
    let status = rep_solve_streaming(columns, target, ops, cfg, rng, budget, &mut |b, _| {
        out.push(b.clone());
        false
    })?;
    if status == EngineStatus::Collapsed {
        return Err(Error::Infeasible("a level collapsed to an empty list"));
    }
    Ok(out)
}

/// Representation engine for the full-weight case: runs the tree on the
/// `{0,1}` reduction with a binary root of density `root_alpha`.
#[derive(Clone, Debug)]
pub struct RepEngine {
    pub layers: Vec<LayerSpec>,
    pub root_alpha: f64,
    pub leaf_size_log2: Option<f64>,
    pub max_leaf_log2: f64,
    pub tolerance: usize,
}

impl RepEngine {
    /// One representation layer (binary children of density 1/4) over
    /// `a - 1` left-right layers.
    pub fn new(a: usize) -> Self {
        let mut layers = vec![LayerSpec::Representation(Density::new(0.25, 0.0))];
        layers.extend((1..a.max(1)).map(|_| LayerSpec::LeftRight));
        RepEngine { layers, root_alpha: 0.5, leaf_size_log2: None, max_leaf_log2: 12.0, tolerance: 0 }
    }

    pub fn config_for(&self, m: usize, ell: usize) -> Result<(Vec<SplitOp>, RepSolveConfig), Error> {
        let ops = expand_layers(&self.layers);
        let a = ops.len();
        let root_counts = (libm::round(self.root_alpha * m as f64) as usize, 0);
        let tree = concrete_tree(m, root_counts, &ops)?;
        let cap = tree.levels[a].iter().map(node_capacity_log2).fold(f64::INFINITY, f64::min);
        let leaf = self.leaf_size_log2.unwrap_or(cap.min(self.max_leaf_log2));
        let w = ell as f64 * LOG2_3 / a as f64;
        Ok((ops, RepSolveConfig { leaf_size_log2: leaf, merge_widths: vec![w; a], root_counts, tolerance: self.tolerance }))
    }
}

impl SubsetSumEngine for RepEngine {
    fn name(&self) -> &'static str {
        "rep"
    }

    fn output_weight(&self, n_columns: usize) -> usize {
        n_columns
    }

    fn solve(
        &self,
        columns: &[TritVector],
        targets: &[TritVector],
        rng: &mut StreamRng,
        budget: &mut Budget,
        sink: &mut Sink<'_>,
    ) -> EngineStatus {
        let Some(target) = targets.first() else { return EngineStatus::Completed };
        let Ok((ops, cfg)) = self.config_for(columns.len(), target.len()) else {
            return EngineStatus::Collapsed;
        };
        let shifted = ssnzc_to_ss(columns, target);
        rep_solve_streaming(columns, &shifted, &ops, &cfg, rng, budget, &mut |bp, i| sink(&ss_to_ssnzc(bp), i))
            .unwrap_or(EngineStatus::Collapsed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const THIRD: Density = Density::new(1.0 / 3.0, 1.0 / 3.0);

    #[test]
    fn balanced_case() {
        let z = solve_typical_z(THIRD, THIRD).unwrap();
        assert!((z - 1.0 / 9.0).abs() < 1e-10);
        assert!((nrep_exponent_log2(THIRD, THIRD).unwrap() - LOG2_3).abs() < 1e-9);
    }

    #[test]
    fn binary_to_binary_is_forced() {
        // (1/2, 0) -> (1/4, 0): z is pinned to 0, reps = C(1/2, 1/4)
        let n = nrep_exponent_log2(Density::new(0.5, 0.0), Density::new(0.25, 0.0)).unwrap();
        assert!((n - 0.5).abs() < 1e-9);
    }

    #[test]
    fn infeasible_pair() {
        assert!(solve_typical_z(Density::new(0.5, 0.0), Density::new(0.5, 0.0)).is_err());
    }

    #[test]
    fn integer_decomposition_check() {
        assert!(counts_decomposable((2, 2, 0), (1, 0)));
        assert!(!counts_decomposable((1, 3, 0), (1, 0)));
    }
}
