// replicate hypergeom_cdf with step counters to find the hot loop
fn ln_gamma(z: f64) -> f64 {
    geoqkd::special::ln_gamma(z)
}

fn cdf_counted(n_pop: u64, k_ones: u64, n_sample: u64, k: i64) -> (f64, u64, &'static str) {
    let support_lo = (n_sample + k_ones).saturating_sub(n_pop) as i64;
    let support_hi = k_ones.min(n_sample) as i64;
    if k < support_lo {
        return (0.0, 0, "lo");
    }
    if k >= support_hi {
        return (1.0, 0, "hi");
    }
    let ln_pmf = |i: i64| -> f64 {
        let i = i as f64;
        let (np, ko, ns) = (n_pop as f64, k_ones as f64, n_sample as f64);
        ln_gamma(ko + 1.0) - ln_gamma(i + 1.0) - ln_gamma(ko - i + 1.0)
            + ln_gamma(np - ko + 1.0) - ln_gamma(ns - i + 1.0)
            - ln_gamma(np - ko - ns + i + 1.0) + ln_gamma(ns + 1.0)
            + ln_gamma(np - ns + 1.0) - ln_gamma(np + 1.0)
    };
    let mean = n_sample as f64 * k_ones as f64 / n_pop as f64;
    let mut steps = 0u64;
    if (k as f64) < mean {
        let mut term = ln_pmf(k).exp();
        let mut total = term;
        let mut i = k;
        while i > support_lo && term > total * 1e-18 {
            let (np, ko, ns) = (n_pop as f64, k_ones as f64, n_sample as f64);
            let fi = i as f64;
            let ratio = fi * (np - ko - ns + fi) / ((ko - fi + 1.0) * (ns - fi + 1.0));
            term *= ratio;
            total += term;
            i -= 1;
            steps += 1;
        }
        (total.min(1.0), steps, "down")
    } else {
        let mut term = ln_pmf(k + 1).exp();
        let mut total = term;
        let mut i = k + 1;
        while i < support_hi && term > total * 1e-18 {
            let (np, ko, ns) = (n_pop as f64, k_ones as f64, n_sample as f64);
            let fi = i as f64;
            let ratio = (ko - fi) * (ns - fi) / ((fi + 1.0) * (np - ko - ns + fi + 1.0));
            term *= ratio;
            total += term;
            i += 1;
            steps += 1;
        }
        ((1.0 - total).max(0.0), steps, "up")
    }
}

fn main() {
    let (c, steps, branch) = cdf_counted(150_000_000_000, 75_073_242_187, 1_500_000_000, 750_000_000);
    println!("cdf={c:.3e} steps={steps} branch={branch}");
}
