//! Fiber benchmarks for the long-distance comparison: the repeaterless PLOB
//! bound and idealized repeater-chain bounds, in bits per channel use.

/// `R = -log2(1 - eta^(1/(n_rep+1)))` with `eta = 10^(-alpha d / 10)`.
/// `n_rep = 0` reduces to the repeaterless PLOB bound; zero distance
/// diverges and reports infinity.
pub fn fiber_repeater_bound(distance_km: f64, n_repeaters: u32, alpha_db_per_km: f64) -> f64 {
    if distance_km <= 0.0 {
        return f64::INFINITY;
    }
    let eta = 10f64.powf(-alpha_db_per_km * distance_km / 10.0);
    let per_segment = eta.powf(1.0 / (n_repeaters as f64 + 1.0));
    plob_bound(per_segment)
}

/// Repeaterless PLOB bound `-log2(1 - eta)`.
pub fn plob_bound(eta: f64) -> f64 {
    -(-eta).ln_1p() / std::f64::consts::LN_2
}
