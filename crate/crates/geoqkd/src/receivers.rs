//! Expected click and error statistics for the three receiver
//! architectures: asymmetric active, asymmetric passive, and symmetric
//! passive. All detectors are threshold and memoryless; afterpulsing is
//! modeled in steady state through the previous-window detection
//! probability of the same arm.

use crate::Error;

/// Per-evaluation inputs shared by the three receiver models. Probabilities
/// are per detector per gate; `eta_sys` already includes detector
/// efficiency.
#[derive(Debug, Clone, Copy)]
pub struct ReceiverInputs {
    pub mu: f64,
    pub eta_sys: f64,
    pub e_mis: f64,
    pub p_ap: f64,
    /// Active receiver: single per-detector noise-click probability.
    pub p_noise: f64,
    /// Passive receivers: arm-resolved noise-click probabilities (Z, X).
    pub p_noise_z: f64,
    pub p_noise_x: f64,
    /// Passive receivers: fraction of intensity routed to the X arm.
    pub split: f64,
}

impl ReceiverInputs {
    pub fn validate(&self) -> Result<(), Error> {
        if self.mu < 0.0 {
            return Err(Error::input("mean photon number must be nonnegative".into()));
        }
        for (name, p) in [
            ("eta_sys", self.eta_sys),
            ("e_mis", self.e_mis),
            ("p_ap", self.p_ap),
            ("p_noise", self.p_noise),
            ("p_noise_z", self.p_noise_z),
            ("p_noise_x", self.p_noise_x),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::input(format!("{name} must lie in [0,1], got {p}")));
            }
        }
        Ok(())
    }
}

/// Per-intensity outcome probabilities. Active receivers fill `q_z`/`e_z`
/// and mirror them into `q_x`/`e_x` (the bases are statistically
/// identical); passive receivers carry the full outcome partition.
#[derive(Debug, Clone, Copy, Default)]
pub struct ClickStatistics {
    pub q_z: f64,
    pub q_x: f64,
    pub e_z: f64,
    pub e_x: f64,
    /// Multi-click probability (passive only).
    pub q_multi: f64,
    /// All-detectors-silent probability (passive only).
    pub p_empty: f64,
}

/// Active two-detector receiver statistics.
pub fn active_statistics(input: &ReceiverInputs) -> Result<ClickStatistics, Error> {
    input.validate()?;
    let ReceiverInputs { mu, eta_sys, e_mis, p_ap, p_noise, .. } = *input;
    let d_mu = 1.0 - (1.0 - p_noise) * (1.0 - p_noise) * (-eta_sys * mu).exp();
    let ap = 1.0 - d_mu * p_ap;
    let p_nc_c = (1.0 - p_noise) * (-eta_sys * mu * (1.0 - e_mis)).exp() * ap;
    let p_nc_w = (1.0 - p_noise) * (-eta_sys * mu * e_mis).exp() * ap;
    let q = 1.0 - p_nc_c * p_nc_w;
    let e = 0.5 * (1.0 - p_nc_w) * (1.0 + p_nc_c);
    Ok(ClickStatistics { q_z: q, q_x: q, e_z: e, e_x: e, q_multi: 0.0, p_empty: 1.0 - q })
}

/// Per-arm no-click factors of the four-detector passive receiver.
struct ArmFactors {
    nc_correct: f64,
    nc_wrong: f64,
}

fn passive_arm(p_noise: f64, arm_mu: f64, e_mis: f64, p_ap: f64) -> ArmFactors {
    let d_arm = 1.0 - (1.0 - p_noise) * (1.0 - p_noise) * (-arm_mu).exp();
    let ap = 1.0 - d_arm * p_ap;
    ArmFactors {
        nc_correct: (1.0 - p_noise) * (-arm_mu * (1.0 - e_mis)).exp() * ap,
        nc_wrong: (1.0 - p_noise) * (-arm_mu * e_mis).exp() * ap,
    }
}

fn check_split(s: f64) -> Result<(), Error> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::input(format!("split ratio must lie in (0,1), got {s}")));
    }
    Ok(())
}

/// Asymmetric passive receiver: single-click gains require exactly one
/// click in the matching arm and full silence in the veto arm; the
/// remaining probability mass is the multi-click outcome.
pub fn passive_asym_statistics(input: &ReceiverInputs) -> Result<ClickStatistics, Error> {
    input.validate()?;
    check_split(input.split)?;
    let s = input.split;
    let z = passive_arm(
        input.p_noise_z,
        input.eta_sys * (1.0 - s) * input.mu,
        input.e_mis,
        input.p_ap,
    );
    let x = passive_arm(input.p_noise_x, input.eta_sys * s * input.mu, input.e_mis, input.p_ap);
    let veto_z = x.nc_correct * x.nc_wrong;
    let veto_x = z.nc_correct * z.nc_wrong;
    let q_z = ((1.0 - z.nc_correct) * z.nc_wrong + z.nc_correct * (1.0 - z.nc_wrong)) * veto_z;
    let q_x = ((1.0 - x.nc_correct) * x.nc_wrong + x.nc_correct * (1.0 - x.nc_wrong)) * veto_x;
    let e_z = (1.0 - z.nc_wrong) * z.nc_correct * veto_z;
    let e_x = (1.0 - x.nc_wrong) * x.nc_correct * veto_x;
    let p_empty = z.nc_correct * z.nc_wrong * x.nc_correct * x.nc_wrong;
    let q_multi = 1.0 - p_empty - q_z - q_x;
    Ok(ClickStatistics { q_z, q_x, e_z, e_x, q_multi, p_empty })
}

/// Symmetric passive receiver (s = 1/2): matching-arm double clicks are
/// retained with a random bit value, so the gain covers any matching-arm
/// click under veto-arm silence. Both bases share the same statistics.
pub fn passive_sym_statistics(input: &ReceiverInputs) -> Result<ClickStatistics, Error> {
    input.validate()?;
    let input = ReceiverInputs { split: 0.5, ..*input };
    let arm = passive_arm(
        input.p_noise_z,
        input.eta_sys * 0.5 * input.mu,
        input.e_mis,
        input.p_ap,
    );
    let other = passive_arm(input.p_noise_x, input.eta_sys * 0.5 * input.mu, input.e_mis, input.p_ap);
    let veto = other.nc_correct * other.nc_wrong;
    let q = (1.0 - arm.nc_correct * arm.nc_wrong) * veto;
    let e = 0.5 * (1.0 - arm.nc_wrong) * (1.0 + arm.nc_correct) * veto;
    let p_empty = arm.nc_correct * arm.nc_wrong * veto;
    Ok(ClickStatistics { q_z: q, q_x: q, e_z: e, e_x: e, q_multi: 0.0, p_empty })
}

/// Vacuum single-click parameters for the passive security analysis:
/// probability that a Bob-side vacuum round still lands in the key (test)
/// set, driven by dark counts alone.
pub fn vacuum_single_click_params(p_z_alice: f64, p_dark: f64) -> (f64, f64) {
    let one_click = 2.0 * p_dark * (1.0 - p_dark).powi(3);
    (p_z_alice * one_click, (1.0 - p_z_alice) * one_click)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_input() -> ReceiverInputs {
        ReceiverInputs {
            mu: 0.5,
            eta_sys: 0.01,
            e_mis: 0.01,
            p_ap: 0.02,
            p_noise: 1e-6,
            p_noise_z: 1e-6,
            p_noise_x: 1e-6,
            split: 0.3,
        }
    }

    #[test]
    fn active_vacuum_and_clean_limits() {
        let mut inp = base_input();
        inp.mu = 0.0;
        inp.p_noise = 0.0;
        inp.p_ap = 0.0;
        let s = active_statistics(&inp).unwrap();
        assert_eq!(s.q_z, 0.0);
        assert_eq!(s.e_z, 0.0);
        // no noise, no afterpulsing, no misalignment: Q = 1 - exp(-eta mu)
        let mut inp = base_input();
        inp.p_noise = 0.0;
        inp.p_ap = 0.0;
        inp.e_mis = 0.0;
        let s = active_statistics(&inp).unwrap();
        assert!((s.q_z - (1.0 - (-inp.eta_sys * inp.mu).exp())).abs() < 1e-15);
        assert_eq!(s.e_z, 0.0);
    }

    #[test]
    fn active_qber_limits() {
        // noise-dominated: E/Q -> 1/2
        let mut inp = base_input();
        inp.p_noise = 0.999999;
        let s = active_statistics(&inp).unwrap();
        assert!((s.e_z / s.q_z - 0.5).abs() < 1e-3);
        // clean low-flux limit: E/Q -> e_mis
        let mut inp = base_input();
        inp.p_noise = 0.0;
        inp.p_ap = 0.0;
        inp.eta_sys = 1e-6;
        let s = active_statistics(&inp).unwrap();
        assert!((s.e_z / s.q_z - inp.e_mis).abs() < 1e-4);
    }

    #[test]
    fn passive_asym_vacuum_silence() {
        let mut inp = base_input();
        inp.mu = 0.0;
        inp.p_noise_z = 0.0;
        inp.p_noise_x = 0.0;
        let s = passive_asym_statistics(&inp).unwrap();
        assert_eq!(s.p_empty, 1.0);
        assert_eq!(s.q_z, 0.0);
        assert_eq!(s.q_x, 0.0);
        assert_eq!(s.q_multi, 0.0);
    }

    #[test]
    fn passive_asym_symmetric_split_balances_arms() {
        let mut inp = base_input();
        inp.split = 0.5;
        let s = passive_asym_statistics(&inp).unwrap();
        assert!((s.q_z - s.q_x).abs() < 1e-15);
        assert!((s.e_z - s.e_x).abs() < 1e-15);
    }

    #[test]
    fn passive_asym_arm_relabel_invariance() {
        let inp = base_input();
        let s = passive_asym_statistics(&inp).unwrap();
        let mut swapped = inp;
        swapped.split = 1.0 - inp.split;
        std::mem::swap(&mut swapped.p_noise_z, &mut swapped.p_noise_x);
        let t = passive_asym_statistics(&swapped).unwrap();
        assert!((s.q_z - t.q_x).abs() < 1e-15);
        assert!((s.q_x - t.q_z).abs() < 1e-15);
        assert!((s.e_z - t.e_x).abs() < 1e-15);
        assert!((s.p_empty - t.p_empty).abs() < 1e-15);
    }

    #[test]
    fn passive_completeness_identity() {
        for &(mu, eta, s, e, ap, pn) in &[
            (0.5, 0.01, 0.3, 0.01, 0.02, 1e-6),
            (0.9, 0.3, 0.5, 0.03, 0.0, 1e-3),
            (0.1, 0.9, 0.7, 0.0, 0.05, 0.01),
            (2.0, 1.0, 0.2, 0.02, 0.01, 0.1),
        ] {
            let inp = ReceiverInputs {
                mu,
                eta_sys: eta,
                e_mis: e,
                p_ap: ap,
                p_noise: pn,
                p_noise_z: pn,
                p_noise_x: pn,
                split: s,
            };
            let st = passive_asym_statistics(&inp).unwrap();
            let total = st.p_empty + st.q_z + st.q_x + st.q_multi;
            assert!((total - 1.0).abs() < 1e-12, "partition must be exhaustive: {total}");
            assert!(st.e_z <= st.q_z + 1e-15);
            assert!(st.e_x <= st.q_x + 1e-15);
        }
    }

    #[test]
    fn passive_sym_limits() {
        let mut inp = base_input();
        inp.mu = 0.0;
        inp.p_noise_z = 0.0;
        inp.p_noise_x = 0.0;
        let s = passive_sym_statistics(&inp).unwrap();
        assert_eq!(s.q_z, 0.0);
        let mut inp = base_input();
        inp.e_mis = 0.0;
        inp.p_noise_z = 0.0;
        inp.p_noise_x = 0.0;
        inp.p_ap = 0.0;
        let s = passive_sym_statistics(&inp).unwrap();
        assert_eq!(s.e_z, 0.0);
        assert!(s.q_z > 0.0);
    }

    #[test]
    fn monotonicity_in_mu_and_noise() {
        let mut prev_q = 0.0;
        for i in 0..10 {
            let mut inp = base_input();
            inp.mu = i as f64 * 0.2;
            let s = active_statistics(&inp).unwrap();
            assert!(s.q_z >= prev_q);
            prev_q = s.q_z;
        }
        let mut prev_e = 0.0;
        for i in 0..10 {
            let mut inp = base_input();
            inp.e_mis = i as f64 * 0.05;
            let s = active_statistics(&inp).unwrap();
            assert!(s.e_z >= prev_e - 1e-15);
            prev_e = s.e_z;
        }
    }

    #[test]
    fn vacuum_click_params() {
        let (qz, qx) = vacuum_single_click_params(0.7, 1e-6);
        assert!((qz - 0.7 * 2.0 * 1e-6 * (1.0 - 1e-6f64).powi(3)).abs() < 1e-18);
        assert!((qx - 0.3 * 2.0 * 1e-6 * (1.0 - 1e-6f64).powi(3)).abs() < 1e-18);
    }
}
