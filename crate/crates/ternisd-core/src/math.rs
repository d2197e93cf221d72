//! Entropy-style helpers shared by the counting and estimator code.
//!
//! Everything is in log2 units. `0 * log2(0)` is taken as `0`.

pub const LOG2_3: f64 = 1.584_962_500_721_156_3;

/// `x * log2(x)`, with the convention `0 log 0 = 0`.
#[inline]
pub fn xlog2x(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * libm::log2(x)
    }
}

/// Binary entropy.
#[inline]
pub fn h2(x: f64) -> f64 {
    -xlog2x(x) - xlog2x(1.0 - x)
}

/// Multinomial exponent `n log n - k1 log k1 - k2 log k2 - (n-k1-k2) log(n-k1-k2)`.
#[inline]
pub fn g(n: f64, k1: f64, k2: f64) -> f64 {
    xlog2x(n) - xlog2x(k1) - xlog2x(k2) - xlog2x(n - k1 - k2)
}

/// log2 of `n!` through log-gamma.
#[inline]
pub fn log2_factorial(n: f64) -> f64 {
    libm::lgamma(n + 1.0) / core::f64::consts::LN_2
}

/// log2 of the binomial coefficient; `-inf` outside `0 <= k <= n`.
pub fn log2_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    log2_factorial(n as f64) - log2_factorial(k as f64) - log2_factorial((n - k) as f64)
}

/// `log2(2^a + 2^b)` without overflow.
pub fn log2_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + libm::log2(1.0 + libm::exp2(lo - hi))
}

/// Golden-section maximization of a unimodal function on `[lo, hi]`.
pub fn golden_max<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, iters: usize) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..iters {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
    }
    0.5 * (lo + hi)
}

/// Golden-section minimization; convenience wrapper over [`golden_max`].
pub fn golden_min<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, iters: usize) -> f64 {
    golden_max(|x| -f(x), lo, hi, iters)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials_match_small_table() {
        assert!((log2_binomial(10, 3) - libm::log2(120.0)).abs() < 1e-10);
        assert_eq!(log2_binomial(5, 0), 0.0);
        assert_eq!(log2_binomial(3, 4), f64::NEG_INFINITY);
    }

    #[test]
    fn g_identities() {
        assert!((g(1.0, 1.0 / 3.0, 1.0 / 3.0) - LOG2_3).abs() < 1e-12);
        assert_eq!(g(1.0, 0.0, 0.0), 0.0);
        let lam = 0.37;
        assert!((g(lam, lam * 0.2, lam * 0.1) - lam * g(1.0, 0.2, 0.1)).abs() < 1e-12);
        assert!((g(1.0, 0.3, 0.0) - h2(0.3)).abs() < 1e-12);
    }

    #[test]
    fn log2_add_is_exact_on_powers() {
        assert!((log2_add(3.0, 3.0) - 4.0).abs() < 1e-12);
        assert_eq!(log2_add(f64::NEG_INFINITY, 2.0), 2.0);
    }
}
