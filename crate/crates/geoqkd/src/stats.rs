//! Exact finite-statistics confidence bounds: Poisson–Bernoulli mean bounds,
//! exact binomial quantile inversions, and the hypergeometric upper
//! confidence limit used for random-sampling (phase-error) estimation.
//!
//! Everything here is built on the regularized incomplete beta function; no
//! Gaussian, Hoeffding, or Chernoff approximation appears anywhere. Binomial
//! tails are expressed through the identities
//! `Pr[X >= k] = I_p(k, n-k+1)` and `Pr[X <= k] = I_{1-p}(n-k, k+1)`, which
//! hold for real-valued `n` as well and keep `n ~ 1e12` tractable.

use crate::special::{inv_reg_inc_beta, ln_gamma, reg_inc_beta};
use crate::Error;

/// Inputs for the Bernoulli-mean bounds: `n` trials (real-valued expected
/// counts are accepted), observed fraction `p_hat`, failure probability
/// `eps`.
#[derive(Debug, Clone, Copy)]
pub struct TailBoundQuery {
    pub n: f64,
    pub p_hat: f64,
    pub eps: f64,
}

impl TailBoundQuery {
    pub fn new(n: f64, p_hat: f64, eps: f64) -> Result<Self, Error> {
        if !(n >= 1.0) {
            return Err(Error::input(format!("trial count must be >= 1, got {n}")));
        }
        if !(0.0..=1.0).contains(&p_hat) {
            return Err(Error::input(format!("observed fraction must lie in [0,1], got {p_hat}")));
        }
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::input(format!("failure probability must lie in (0,1), got {eps}")));
        }
        Ok(Self { n, p_hat, eps })
    }
}

/// Inputs for the hypergeometric upper confidence limit: population `n_pop`,
/// test-sample size `n_sample <= n_pop`, observed ones fraction `x`.
#[derive(Debug, Clone, Copy)]
pub struct HypergeomQuery {
    pub n_pop: u64,
    pub n_sample: u64,
    pub x: f64,
    pub eps: f64,
}

impl HypergeomQuery {
    pub fn new(n_pop: u64, n_sample: u64, x: f64, eps: f64) -> Result<Self, Error> {
        if n_pop == 0 || n_sample == 0 || n_sample > n_pop {
            return Err(Error::input(format!(
                "hypergeometric sizes invalid: population {n_pop}, sample {n_sample}"
            )));
        }
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::input(format!("observed fraction must lie in [0,1], got {x}")));
        }
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::input(format!("failure probability must lie in (0,1), got {eps}")));
        }
        Ok(Self { n_pop, n_sample, x, eps })
    }
}

/// Upper tail Pr[X >= k] for X ~ Bin(n, p), real-valued `n` allowed.
pub fn binom_tail_upper(n: f64, p: f64, k: f64) -> f64 {
    if k <= 0.0 {
        return 1.0;
    }
    if k > n {
        return 0.0;
    }
    if p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return 1.0;
    }
    reg_inc_beta(p, k, n - k + 1.0)
}

/// Lower tail Pr[X <= k] for X ~ Bin(n, p), real-valued `n` allowed.
pub fn binom_tail_lower(n: f64, p: f64, k: f64) -> f64 {
    if k < 0.0 {
        return 0.0;
    }
    if k >= n {
        return 1.0;
    }
    if p <= 0.0 {
        return 1.0;
    }
    if p >= 1.0 {
        return 0.0;
    }
    reg_inc_beta(1.0 - p, n - k, k + 1.0)
}

fn poisson_binomial_lower(n: f64, p_hat: f64, eps: f64) -> f64 {
    let a = n * p_hat;
    if a == 0.0 {
        return 0.0;
    }
    let b = n - a + 1.0;
    let x_star = (a - 1.0) / n;
    let eps_star = if x_star <= 0.0 { 0.0 } else { reg_inc_beta(x_star, a, b) };
    if eps >= eps_star {
        p_hat - (1.0 - eps) / (n * (1.0 - eps_star))
    } else {
        inv_reg_inc_beta(eps, a, b)
    }
}

/// Exact two-sided bounds on the mean of `n` independent Bernoulli variables
/// from their observed average, valid for `eps` in (0, 1/4].
///
/// Returns `(lower, upper)` with `upper(p_hat) = 1 - lower(1 - p_hat)`.
pub fn poisson_binomial_bounds(q: TailBoundQuery) -> Result<(f64, f64), Error> {
    if !(q.eps > 0.0 && q.eps <= 0.25) {
        return Err(Error::input(format!(
            "Bernoulli-mean bound requires failure probability in (0, 1/4], got {}",
            q.eps
        )));
    }
    if q.n * q.p_hat < 0.0 {
        return Err(Error::input("negative observed count".into()));
    }
    let lower = poisson_binomial_lower(q.n, q.p_hat, q.eps);
    let upper = 1.0 - poisson_binomial_lower(q.n, 1.0 - q.p_hat, q.eps);
    Ok((lower, upper))
}

/// Exact binomial quantile bounds on the observed fraction given the true
/// probability `p`: returns `(g_lower, g_upper)` with
/// `g_upper = min{k : Pr[X >= k] <= eps}/n` and
/// `g_lower = max{k : Pr[X <= k] <= eps}/n`, `k` ranging over
/// `{-1, ..., n+1}`. The sentinels `-1/n` and `(n+1)/n` are legitimate
/// returns when every (no) tail clears `eps`.
pub fn binomial_bounds(q: TailBoundQuery, p: f64) -> (f64, f64) {
    let n = q.n;
    let k_max = n.floor() as i64 + 1;
    // upper: tail Pr[X >= k] is nonincreasing in k
    let mut lo = -1i64;
    let mut hi = k_max;
    if binom_tail_upper(n, p, lo as f64) <= q.eps {
        hi = lo;
    } else {
        // invariant: tail(lo) > eps, tail(hi) <= eps (tail at n+1 is 0)
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if binom_tail_upper(n, p, mid as f64) <= q.eps {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    }
    let g_upper = hi as f64 / n;
    // lower: tail Pr[X <= k] is nondecreasing in k
    let mut lo = -1i64;
    let mut hi = k_max;
    if binom_tail_lower(n, p, hi as f64) <= q.eps {
        lo = hi;
    } else {
        // invariant: tail(lo) <= eps (tail at -1 is 0), tail(hi) > eps
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if binom_tail_lower(n, p, mid as f64) <= q.eps {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    let g_lower = lo as f64 / n;
    (g_lower, g_upper)
}

/// Hypergeometric CDF Pr[Y <= k] for Y ~ Hyper(population `n_pop`, ones
/// `k_ones`, draws `n_sample`), computed by log-space summation of exact PMF
/// terms (no normal approximation). Terms are accumulated downward from `k`
/// with the exact neighbour ratio and truncated once they stop contributing.
pub fn hypergeom_cdf(n_pop: u64, k_ones: u64, n_sample: u64, k: i64) -> f64 {
    let support_lo = (n_sample + k_ones).saturating_sub(n_pop) as i64;
    let support_hi = k_ones.min(n_sample) as i64;
    if k < support_lo {
        return 0.0;
    }
    if k >= support_hi {
        return 1.0;
    }
    // decide which side is cheaper to sum
    let ln_pmf = |i: i64| -> f64 {
        let i = i as f64;
        let (np, ko, ns) = (n_pop as f64, k_ones as f64, n_sample as f64);
        ln_gamma(ko + 1.0) - ln_gamma(i + 1.0) - ln_gamma(ko - i + 1.0)
            + ln_gamma(np - ko + 1.0)
            - ln_gamma(ns - i + 1.0)
            - ln_gamma(np - ko - ns + i + 1.0)
            + ln_gamma(ns + 1.0)
            + ln_gamma(np - ns + 1.0)
            - ln_gamma(np + 1.0)
    };
    let mean = n_sample as f64 * k_ones as f64 / n_pop as f64;
    if (k as f64) < mean {
        // sum downward from k
        let mut term = ln_pmf(k).exp();
        let mut total = term;
        let mut i = k;
        // the absolute floor keeps the loop out of denormal-stalled arithmetic
        while i > support_lo && term > total * 1e-18 && term > 1e-290 {
            // PMF(i-1)/PMF(i)
            let (np, ko, ns) = (n_pop as f64, k_ones as f64, n_sample as f64);
            let fi = i as f64;
            let ratio = fi * (np - ko - ns + fi) / ((ko - fi + 1.0) * (ns - fi + 1.0));
            term *= ratio;
            total += term;
            i -= 1;
        }
        total.min(1.0)
    } else {
        // complement: sum upward from k+1
        let mut term = ln_pmf(k + 1).exp();
        let mut total = term;
        let mut i = k + 1;
        while i < support_hi && term > total * 1e-18 && term > 1e-290 {
            // PMF(i+1)/PMF(i)
            let (np, ko, ns) = (n_pop as f64, k_ones as f64, n_sample as f64);
            let fi = i as f64;
            let ratio = (ko - fi) * (ns - fi) / ((fi + 1.0) * (np - ko - ns + fi + 1.0));
            term *= ratio;
            total += term;
            i += 1;
        }
        (1.0 - total).max(0.0)
    }
}

/// Exact hypergeometric upper confidence limit: the smallest population ones
/// fraction `y` (on the feasible `1/N` grid at or above `x`) for which
/// `Pr[Hyper(N, Ny, n) <= n x] <= eps`, or `(N+1)/N` when no such `y`
/// exists. The observed count `n x` is rounded up, which can only enlarge
/// the bound when expected-value (non-integer) counts are supplied.
pub fn hypergeom_upper(q: HypergeomQuery) -> f64 {
    let n_pop = q.n_pop;
    let n_sample = q.n_sample;
    let k_obs = ((q.n_sample as f64 * q.x) - 1e-9).ceil().max(0.0).min(q.n_sample as f64) as i64;
    let k_lo = ((q.n_pop as f64 * q.x) - 1e-9).ceil().max(0.0) as u64;
    // CDF at fixed k_obs is nonincreasing in the ones count K
    if hypergeom_cdf(n_pop, n_pop, n_sample, k_obs) > q.eps {
        // even the all-ones population fails: empty feasible set
        return (n_pop as f64 + 1.0) / n_pop as f64;
    }
    let mut lo = k_lo;
    let mut hi = n_pop;
    if hypergeom_cdf(n_pop, lo, n_sample, k_obs) <= q.eps {
        return lo as f64 / n_pop as f64;
    }
    // invariant: cdf(lo) > eps, cdf(hi) <= eps
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if hypergeom_cdf(n_pop, mid, n_sample, k_obs) <= q.eps {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi as f64 / n_pop as f64
}

/// Upper confidence bound on the ones fraction of the *complementary*
/// (untested) sample: `(N H^U - n x) / (N - n)`.
pub fn hypergeom_q_upper(q: HypergeomQuery) -> Result<f64, Error> {
    if q.n_pop == q.n_sample {
        return Err(Error::input(
            "complementary sample is empty: population equals test sample".into(),
        ));
    }
    let h = hypergeom_upper(q);
    Ok((q.n_pop as f64 * h - q.n_sample as f64 * q.x) / (q.n_pop - q.n_sample) as f64)
}

/// Exact binomial quantile: smallest `b` in `{ceil(Nq)+1, ..., N+1}` with
/// `Pr[Bin(N, q) >= b] <= eps`.
pub fn binom_threshold_b0(n: u64, q: f64, eps: f64) -> u64 {
    let b_first = (n as f64 * q).ceil() as u64 + 1;
    let mut lo = b_first;
    let mut hi = n + 1;
    if binom_tail_upper(n as f64, q, lo as f64) <= eps {
        return lo;
    }
    // invariant: tail(lo) > eps, tail(hi) <= eps (tail at N+1 is 0)
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if binom_tail_upper(n as f64, q, mid as f64) <= eps {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Exact trial-count inversion: smallest `t` in `{k, ..., n_cap}` whose
/// binomial CDF at `k` is at most `eps`, or `n_cap + 1` when none is. The
/// CDF is nonincreasing in `t`, so a binary search applies.
pub fn binom_trials_inversion_v(k: u64, eps: f64, lambda: f64, n_cap: u64) -> Result<u64, Error> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::input(format!(
            "per-trial probability must lie in (0,1], got {lambda}"
        )));
    }
    let cdf = |t: u64| binom_tail_lower(t as f64, lambda, k as f64);
    if cdf(k) <= eps {
        return Ok(k);
    }
    if cdf(n_cap) > eps {
        return Ok(n_cap + 1);
    }
    let mut lo = k; // cdf(lo) > eps
    let mut hi = n_cap; // cdf(hi) <= eps
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if cdf(mid) <= eps {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    // ---- log-space exact tail sums, used only as oracles ----

    fn ln_choose(n: u64, k: u64) -> f64 {
        ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
    }

    fn binom_pmf(n: u64, p: f64, k: u64) -> f64 {
        if p == 0.0 {
            return if k == 0 { 1.0 } else { 0.0 };
        }
        if p == 1.0 {
            return if k == n { 1.0 } else { 0.0 };
        }
        (ln_choose(n, k) + k as f64 * p.ln() + (n - k) as f64 * (-p).ln_1p()).exp()
    }

    fn binom_tail_upper_sum(n: u64, p: f64, k: i64) -> f64 {
        if k <= 0 {
            return 1.0;
        }
        (k.max(0) as u64..=n).map(|j| binom_pmf(n, p, j)).sum()
    }

    fn binom_tail_lower_sum(n: u64, p: f64, k: i64) -> f64 {
        if k < 0 {
            return 0.0;
        }
        (0..=(k as u64).min(n)).map(|j| binom_pmf(n, p, j)).sum()
    }

    #[test]
    fn beta_identity_matches_exact_sums() {
        for &n in &[1u64, 5, 20, 60] {
            for &p in &[0.05, 0.3, 0.5, 0.9] {
                for k in 0..=n as i64 {
                    let ub = binom_tail_upper(n as f64, p, k as f64);
                    let ub_sum = binom_tail_upper_sum(n, p, k);
                    assert!((ub - ub_sum).abs() < 1e-10, "n={n} p={p} k={k}: {ub} vs {ub_sum}");
                    let lb = binom_tail_lower(n as f64, p, k as f64);
                    let lb_sum = binom_tail_lower_sum(n, p, k);
                    assert!((lb - lb_sum).abs() < 1e-10, "n={n} p={p} k={k}: {lb} vs {lb_sum}");
                }
            }
        }
    }

    #[test]
    fn poisson_binomial_edge_cases() {
        // zero observed count pins the lower bound at zero
        let q = TailBoundQuery::new(100.0, 0.0, 0.01).unwrap();
        let (lo, _) = poisson_binomial_bounds(q).unwrap();
        assert_eq!(lo, 0.0);
        // full observed count pins the upper bound at one
        let q = TailBoundQuery::new(100.0, 1.0, 0.01).unwrap();
        let (_, hi) = poisson_binomial_bounds(q).unwrap();
        assert_eq!(hi, 1.0);
        // out-of-domain failure probability rejected
        let q = TailBoundQuery::new(100.0, 0.3, 0.3).unwrap();
        assert!(poisson_binomial_bounds(q).is_err());
    }

    #[test]
    fn poisson_binomial_brackets_observation() {
        for &n in &[10.0, 100.0, 1e4, 3.7e6] {
            for &p_hat in &[0.001, 0.05, 0.3, 0.77, 0.999] {
                for &eps in &[0.25, 0.01, 1e-10] {
                    let q = TailBoundQuery::new(n, p_hat, eps).unwrap();
                    let (lo, hi) = poisson_binomial_bounds(q).unwrap();
                    assert!(lo <= p_hat + 1e-12, "n={n} p={p_hat} eps={eps}: lo={lo}");
                    assert!(hi >= p_hat - 1e-12, "n={n} p={p_hat} eps={eps}: hi={hi}");
                    // complement identity, bit for bit
                    let qc = TailBoundQuery::new(n, 1.0 - p_hat, eps).unwrap();
                    let (lo_c, _) = poisson_binomial_bounds(qc).unwrap();
                    assert_eq!(hi, 1.0 - lo_c);
                }
            }
        }
    }

    #[test]
    fn poisson_binomial_matches_root_find_oracle() {
        // In the deep-confidence branch the lower bound solves
        // I_x(n p̂, n - n p̂ + 1) = eps; cross-check with direct bisection.
        let (n, p_hat, eps) = (100.0, 0.3, 0.01);
        let q = TailBoundQuery::new(n, p_hat, eps).unwrap();
        let (lo, _) = poisson_binomial_bounds(q).unwrap();
        let a = n * p_hat;
        let b = n - a + 1.0;
        let x_star = (a - 1.0) / n;
        let eps_star = reg_inc_beta(x_star, a, b);
        assert!(eps < eps_star, "test expects the inverse-beta branch");
        let (mut xl, mut xr) = (0.0, 1.0);
        for _ in 0..200 {
            let m = 0.5 * (xl + xr);
            if reg_inc_beta(m, a, b) < eps {
                xl = m;
            } else {
                xr = m;
            }
        }
        assert!((lo - 0.5 * (xl + xr)).abs() < 1e-9, "lo={lo} oracle={}", 0.5 * (xl + xr));
    }

    #[test]
    fn binomial_bounds_examples() {
        // eps = 1 accepts the k = -1 sentinel; encode via eps just under 1
        let q = TailBoundQuery { n: 20.0, p_hat: 0.0, eps: 1.0 };
        let (_, up) = binomial_bounds(q, 0.5);
        assert_eq!(up, -1.0 / 20.0);
        // p = 0: the smallest k with zero upper tail is k = 1
        let q = TailBoundQuery::new(50.0, 0.0, 0.05).unwrap();
        let (_, up) = binomial_bounds(q, 0.0);
        assert!((up - 1.0 / 50.0).abs() < 1e-15);
    }

    #[test]
    fn binomial_bounds_match_brute_force_scan() {
        for &(n, p, eps) in &[(50u64, 0.2, 0.05), (20, 0.5, 0.01), (35, 0.9, 0.1), (10, 0.0, 0.3)] {
            let q = TailBoundQuery { n: n as f64, p_hat: 0.0, eps };
            let (lo, up) = binomial_bounds(q, p);
            // oracle: scan every k in {-1..n+1} using exact tail sums
            let k_up = (-1..=n as i64 + 1)
                .find(|&k| binom_tail_upper_sum(n, p, k) <= eps)
                .unwrap();
            let k_lo = (-1..=n as i64 + 1)
                .filter(|&k| binom_tail_lower_sum(n, p, k) <= eps)
                .next_back()
                .unwrap();
            assert_eq!(up, k_up as f64 / n as f64, "upper mismatch n={n} p={p}");
            assert_eq!(lo, k_lo as f64 / n as f64, "lower mismatch n={n} p={p}");
        }
    }

    fn hyper_pmf(n_pop: u64, k_ones: u64, n_sample: u64, i: u64) -> f64 {
        if i > k_ones || n_sample - i > n_pop - k_ones {
            return 0.0;
        }
        (ln_choose(k_ones, i) + ln_choose(n_pop - k_ones, n_sample - i) - ln_choose(n_pop, n_sample))
            .exp()
    }

    #[test]
    fn hypergeom_cdf_matches_exhaustive_sum() {
        for &(n_pop, k_ones, n_sample) in &[(10u64, 4u64, 3u64), (20, 11, 7), (50, 25, 20), (100, 3, 40)] {
            for k in -1..=(n_sample as i64 + 1) {
                let fast = hypergeom_cdf(n_pop, k_ones, n_sample, k);
                let slow: f64 = (0..=n_sample.min(k_ones))
                    .filter(|&i| (i as i64) <= k)
                    .map(|i| hyper_pmf(n_pop, k_ones, n_sample, i))
                    .sum();
                assert!((fast - slow).abs() < 1e-11, "({n_pop},{k_ones},{n_sample},{k}): {fast} vs {slow}");
            }
        }
    }

    #[test]
    fn hypergeom_upper_examples() {
        // x = 1 with eps < 1: feasible set empty -> sentinel (N+1)/N
        let q = HypergeomQuery::new(12, 5, 1.0, 0.05).unwrap();
        assert_eq!(hypergeom_upper(q), 13.0 / 12.0);
        // brute-force oracle over all ones counts
        for &(n_pop, n_sample, x, eps) in &[(10u64, 4u64, 0.0, 0.05), (100, 30, 0.1, 0.01), (40, 13, 0.25, 0.2)] {
            let q = HypergeomQuery::new(n_pop, n_sample, x, eps).unwrap();
            let fast = hypergeom_upper(q);
            let k_obs = (n_sample as f64 * x).ceil() as i64;
            let k_lo = (n_pop as f64 * x).ceil() as u64;
            let slow = (k_lo..=n_pop)
                .find(|&kk| {
                    let cdf: f64 = (0..=n_sample.min(kk))
                        .filter(|&i| (i as i64) <= k_obs)
                        .map(|i| hyper_pmf(n_pop, kk, n_sample, i))
                        .sum();
                    cdf <= eps
                })
                .map(|kk| kk as f64 / n_pop as f64)
                .unwrap_or((n_pop as f64 + 1.0) / n_pop as f64);
            assert!((fast - slow).abs() < 1e-12, "mismatch at ({n_pop},{n_sample},{x},{eps})");
        }
    }

    #[test]
    fn hypergeom_upper_monotone_in_eps() {
        let mut prev = f64::INFINITY;
        for &eps in &[1e-6, 1e-4, 0.01, 0.05, 0.25] {
            let q = HypergeomQuery::new(100, 30, 0.1, eps).unwrap();
            let h = hypergeom_upper(q);
            assert!(h <= prev, "bound must not grow as eps loosens");
            prev = h;
        }
    }

    #[test]
    fn hypergeom_q_upper_degenerate_population() {
        let q = HypergeomQuery::new(10, 10, 0.2, 0.05).unwrap();
        assert!(hypergeom_q_upper(q).is_err());
    }

    #[test]
    fn b0_threshold_examples_and_scan() {
        // q = 0: the tail above ceil(0)+1 = 1 is empty
        assert_eq!(binom_threshold_b0(30, 0.0, 0.05), 1);
        // eps >= 1 would accept the first candidate; emulate with eps close to 1
        assert_eq!(binom_threshold_b0(30, 0.1, 0.999999), (30.0_f64 * 0.1).ceil() as u64 + 1);
        // linear-scan oracle
        for &(n, q, eps) in &[(30u64, 0.1, 0.05), (200, 0.3, 1e-6), (100, 0.02, 0.01)] {
            let fast = binom_threshold_b0(n, q, eps);
            let first = (n as f64 * q).ceil() as u64 + 1;
            let slow = (first..=n + 1)
                .find(|&b| binom_tail_upper_sum(n, q, b as i64) <= eps)
                .unwrap();
            assert_eq!(fast, slow, "n={n} q={q} eps={eps}");
        }
    }

    #[test]
    fn trials_inversion_examples_and_scan() {
        // deterministic successes: CDF(0; 1, 1) = 0
        assert_eq!(binom_trials_inversion_v(0, 0.5, 1.0, 100).unwrap(), 1);
        // lambda = 0 rejected
        assert!(binom_trials_inversion_v(3, 0.01, 0.0, 100).is_err());
        // linear-scan oracle
        for &(k, eps, lambda, cap) in &[(3u64, 0.01, 0.2, 10_000u64), (0, 1e-9, 0.5, 200), (12, 0.05, 0.03, 5000)] {
            let fast = binom_trials_inversion_v(k, eps, lambda, cap).unwrap();
            let slow = (k..=cap)
                .find(|&t| binom_tail_lower_sum(t, lambda, k as i64) <= eps)
                .unwrap_or(cap + 1);
            assert_eq!(fast, slow, "k={k} eps={eps} lambda={lambda}");
        }
    }

    #[test]
    fn bounds_monotone_in_eps() {
        for &eps_pair in &[(1e-8, 1e-4), (1e-4, 0.01), (0.01, 0.25)] {
            let (tight, loose) = eps_pair;
            let qt = TailBoundQuery::new(500.0, 0.2, tight).unwrap();
            let ql = TailBoundQuery::new(500.0, 0.2, loose).unwrap();
            let (lo_t, hi_t) = poisson_binomial_bounds(qt).unwrap();
            let (lo_l, hi_l) = poisson_binomial_bounds(ql).unwrap();
            assert!(lo_t <= lo_l && hi_t >= hi_l, "looser eps must not widen");
            let (gl_t, gu_t) = binomial_bounds(qt, 0.3);
            let (gl_l, gu_l) = binomial_bounds(ql, 0.3);
            assert!(gl_t <= gl_l && gu_t >= gu_l);
        }
    }
}
