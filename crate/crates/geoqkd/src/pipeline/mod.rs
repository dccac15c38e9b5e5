//! Scenario assembly, key-rate optimization, parameter sweeps, annual
//! cloud-weighted yield, fiber benchmarks, and the file I/O surface.

pub mod annual;
pub mod bounds;
pub mod config;
pub mod optimize;
pub mod sweep;
pub mod tables;

use crate::background::{
    dark_probability, mean_background_photons, noise_click_probability_active,
    noise_click_probability_passive, FovMode, Illumination, NoiseScenario, RadianceTable,
};
use crate::channel::{
    evaluate_loss, AtmosphereTable, CloudRegime, Coupling, LossBudget, OpticsConfig, Site,
    TurbulenceProfile,
};
use crate::geometry::{geometry_at_zenith, slant_range, zenith_angle, LinkGeometry};
use crate::receivers::{
    active_statistics, passive_asym_statistics, passive_sym_statistics, ClickStatistics,
    ReceiverInputs,
};
use crate::security::{key_length, Architecture, KeyResult, ObservedCounts, ProtocolConfig};
use crate::Error;

/// Seconds in a Julian year; the annual-yield model multiplies the source
/// rate by this span.
pub const SECONDS_PER_YEAR: f64 = 365.25 * 86_400.0;

/// Run items through `f`, in parallel when the `parallel` feature is on and
/// the caller asks for it; identical output order either way.
pub fn map_indexed<T, U, F>(items: &[T], parallel: bool, f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(usize, &T) -> U + Sync,
{
    #[cfg(feature = "parallel")]
    if parallel {
        use rayon::prelude::*;
        return items.par_iter().enumerate().map(|(i, t)| f(i, t)).collect();
    }
    let _ = parallel;
    items.iter().enumerate().map(|(i, t)| f(i, t)).collect()
}

/// Detector parameters entering the receiver model.
#[derive(Debug, Clone, Copy)]
pub struct DetectorSpec {
    pub eta_d: f64,
    pub dark_count_rate_hz: f64,
    pub afterpulse_probability: f64,
}

/// Detector technology tiers with wavelength-appropriate presets.
impl DetectorSpec {
    /// SNSPD tiers are wavelength-flat; APDs dispatch to Si below 1 um and
    /// InGaAs/InP at telecom wavelengths.
    pub fn preset(kind: &str, spec: &str, lambda_nm: f64) -> Result<Self, Error> {
        let spec_b = match spec.to_ascii_lowercase().as_str() {
            "a" => false,
            "b" => true,
            other => return Err(Error::input(format!("unknown detector spec tier '{other}'"))),
        };
        match kind.to_ascii_lowercase().as_str() {
            "snspd" => Ok(if spec_b {
                DetectorSpec { eta_d: 0.95, dark_count_rate_hz: 0.1, afterpulse_probability: 0.0 }
            } else {
                DetectorSpec { eta_d: 0.85, dark_count_rate_hz: 10.0, afterpulse_probability: 0.0 }
            }),
            "apd" => {
                if lambda_nm < 1000.0 {
                    let eta = if lambda_nm < 700.0 {
                        if spec_b { 0.70 } else { 0.50 }
                    } else if spec_b {
                        0.50
                    } else {
                        0.40
                    };
                    Ok(if spec_b {
                        DetectorSpec { eta_d: eta, dark_count_rate_hz: 10.0, afterpulse_probability: 0.005 }
                    } else {
                        DetectorSpec { eta_d: eta, dark_count_rate_hz: 100.0, afterpulse_probability: 0.02 }
                    })
                } else {
                    Ok(if spec_b {
                        DetectorSpec { eta_d: 0.35, dark_count_rate_hz: 50.0, afterpulse_probability: 0.01 }
                    } else {
                        DetectorSpec { eta_d: 0.25, dark_count_rate_hz: 300.0, afterpulse_probability: 0.03 }
                    })
                }
            }
            other => Err(Error::input(format!("unknown detector kind '{other}'"))),
        }
    }
}

/// Channel evaluation mode: the full physical chain, or direct
/// (loss, noise) coordinates as used by the protocol-level maps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelMode {
    Physical,
    Abstract { loss_db: f64, p_noise: f64 },
}

/// One fully specified operating point.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub geometry: LinkGeometry,
    /// When set, the OGS is repositioned on the satellite meridian to view
    /// the satellite at this zenith angle.
    pub zenith_deg: Option<f64>,
    pub optics: OpticsConfig,
    pub site: Site,
    pub turbulence: TurbulenceProfile,
    pub illumination: Illumination,
    pub cloud_regime: CloudRegime,
    pub filter_bandwidth_ghz: f64,
    pub gate_ns: f64,
    pub detector: DetectorSpec,
    pub lambda_nm: f64,
    pub e_mis: f64,
    pub protocol: ProtocolConfig,
    pub source_rate_hz: f64,
    pub channel_mode: ChannelMode,
}

impl Scenario {
    /// Background field-of-view convention implied by the coupling strategy.
    pub fn fov_mode(&self) -> FovMode {
        match self.optics.coupling {
            Coupling::Smf => FovMode::Smf,
            Coupling::FreeSpace { gamma_fov_rad: Some(g) } => FovMode::Explicit(g),
            Coupling::FreeSpace { gamma_fov_rad: None } => FovMode::Airy,
        }
    }

    pub fn gate_s(&self) -> f64 {
        self.gate_ns * 1e-9
    }

    /// Zenith angle in radians, honoring the override.
    pub fn zenith(&self) -> Result<f64, Error> {
        match self.zenith_deg {
            Some(deg) => {
                if !(0.0..90.0).contains(&deg) {
                    return Err(Error::input(format!("zenith angle {deg} outside [0, 90) deg")));
                }
                Ok(deg.to_radians())
            }
            None => zenith_angle(&self.geometry),
        }
    }

    /// Geometry actually evaluated (repositioned when a zenith override is
    /// present).
    pub fn effective_geometry(&self) -> Result<LinkGeometry, Error> {
        match self.zenith_deg {
            Some(deg) => Ok(geometry_at_zenith(deg.to_radians(), &self.geometry)),
            None => Ok(self.geometry),
        }
    }
}

/// Noise operating point of one evaluation.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoisePoint {
    pub nbar: f64,
    pub p_dark: f64,
    /// Per-detector noise-click probability (active convention).
    pub p_noise: f64,
    pub p_noise_z: f64,
    pub p_noise_x: f64,
}

/// Everything a single evaluation produced, for result tables and
/// diagnostics.
#[derive(Debug, Clone)]
pub struct PointReport {
    pub key: KeyResult,
    pub eta_sys: f64,
    pub loss_db: f64,
    pub budget: Option<LossBudget>,
    pub noise: NoisePoint,
    pub theta_deg: f64,
    pub rho_km: f64,
}

/// Shared read-only inputs: the ingested data tables.
#[derive(Debug, Clone, Default)]
pub struct DataTables {
    pub atmosphere: AtmosphereTable,
    pub radiance: RadianceTable,
}

fn split_for(arch: Architecture, config: &ProtocolConfig) -> f64 {
    match arch {
        Architecture::PassiveSym => 0.5,
        _ => config.split,
    }
}

/// Derive the arm-resolved noise probabilities from an active-convention
/// per-detector probability (used by the abstract channel mode).
fn arm_noise_from_active(p_noise: f64, p_dark: f64, s: f64) -> (f64, f64) {
    let base = ((1.0 - p_noise) / (1.0 - p_dark)).min(1.0);
    let p_z = 1.0 - base.powf(1.0 - s) * (1.0 - p_dark);
    let p_x = 1.0 - base.powf(s) * (1.0 - p_dark);
    (p_z, p_x)
}

/// Evaluate the noise chain of a scenario.
pub fn evaluate_noise(s: &Scenario, tables: &DataTables, eta_r: f64) -> Result<NoisePoint, Error> {
    let p_dark = dark_probability(s.detector.dark_count_rate_hz, s.gate_s());
    let split = split_for(s.protocol.architecture, &s.protocol);
    match s.channel_mode {
        ChannelMode::Abstract { p_noise, .. } => {
            let (p_z, p_x) = arm_noise_from_active(p_noise, p_dark, split);
            Ok(NoisePoint { nbar: 0.0, p_dark, p_noise, p_noise_z: p_z, p_noise_x: p_x })
        }
        ChannelMode::Physical => {
            let radiance = tables.radiance.radiance(s.site, s.lambda_nm, s.illumination)?;
            let noise_scenario = NoiseScenario {
                lambda_nm: s.lambda_nm,
                radiance,
                filter_bandwidth_ghz: s.filter_bandwidth_ghz,
                gate_s: s.gate_s(),
                fov_mode: s.fov_mode(),
            };
            noise_scenario.validate()?;
            let nbar = mean_background_photons(&noise_scenario, s.optics.a_r);
            let p_noise = noise_click_probability_active(nbar, p_dark, eta_r, s.detector.eta_d);
            let (p_z, p_x) = noise_click_probability_passive(
                nbar,
                p_dark,
                eta_r,
                s.detector.eta_d,
                split,
            )?;
            Ok(NoisePoint { nbar, p_dark, p_noise, p_noise_z: p_z, p_noise_x: p_x })
        }
    }
}

/// Per-intensity click statistics for the configured architecture.
fn click_statistics(
    s: &Scenario,
    eta_sys: f64,
    noise: &NoisePoint,
    mu: f64,
) -> Result<ClickStatistics, Error> {
    let inputs = ReceiverInputs {
        mu,
        eta_sys,
        e_mis: s.e_mis,
        p_ap: s.detector.afterpulse_probability,
        p_noise: noise.p_noise,
        p_noise_z: noise.p_noise_z,
        p_noise_x: noise.p_noise_x,
        split: split_for(s.protocol.architecture, &s.protocol),
    };
    match s.protocol.architecture {
        Architecture::ActiveAsym => active_statistics(&inputs),
        Architecture::PassiveAsym => passive_asym_statistics(&inputs),
        Architecture::PassiveSym => passive_sym_statistics(&inputs),
    }
}

/// Expected-value realization of the observed statistics for one scenario.
pub fn expected_counts(
    s: &Scenario,
    eta_sys: f64,
    noise: &NoisePoint,
) -> Result<ObservedCounts, Error> {
    let config = &s.protocol;
    let n = config.n_rounds;
    let p_z = config.p_z_alice();
    let p_x = config.p_x_alice;
    let nj = config.intensities.len();
    let mut counts = ObservedCounts {
        n_z: vec![0.0; nj],
        n_x: vec![0.0; nj],
        m_x: vec![0.0; nj],
        m_z: vec![0.0; nj],
        n_multi: 0.0,
        cap_z: 0.0,
        cap_x: 0.0,
        p_dark: noise.p_dark,
        eta_d: s.detector.eta_d,
    };
    // matched-basis emission totals: the active receiver needs Bob's basis
    // choice to coincide (p_B = p_A); passive receivers assign the basis at
    // detection, so only Alice's choice partitions the emissions
    let (w_z, w_x) = match config.architecture {
        Architecture::ActiveAsym => (p_z * p_z, p_x * p_x),
        Architecture::PassiveAsym | Architecture::PassiveSym => (p_z, p_x),
    };
    counts.cap_z = n * w_z;
    counts.cap_x = n * w_x;
    for (j, &mu) in config.intensities.iter().enumerate() {
        let stats = click_statistics(s, eta_sys, noise, mu)?;
        let p_mu = config.intensity_probs[j];
        counts.n_z[j] = n * w_z * p_mu * stats.q_z;
        counts.n_x[j] = n * w_x * p_mu * stats.q_x;
        counts.m_z[j] = n * w_z * p_mu * stats.e_z;
        counts.m_x[j] = n * w_x * p_mu * stats.e_x;
        if config.architecture == Architecture::PassiveAsym {
            counts.n_multi += n * p_mu * stats.q_multi;
        }
    }
    Ok(counts)
}

/// Full evaluation chain for one scenario: geometry, loss budget, noise,
/// expected statistics, and the finite-key length.
pub fn evaluate_point(s: &Scenario, tables: &DataTables) -> Result<PointReport, Error> {
    let geometry = s.effective_geometry().map_err(|e| e.stage("geometry"))?;
    let theta = s.zenith().map_err(|e| e.stage("geometry"))?;
    let rho_km = slant_range(theta, &geometry);
    let (eta_sys, budget) = match s.channel_mode {
        ChannelMode::Abstract { loss_db, .. } => (10f64.powf(-loss_db / 10.0), None),
        ChannelMode::Physical => {
            let budget = evaluate_loss(
                &s.optics,
                &s.turbulence,
                &tables.atmosphere,
                s.site,
                s.cloud_regime,
                theta,
                s.lambda_nm,
                rho_km,
                s.detector.eta_d,
            )
            .map_err(|e| e.stage("channel"))?;
            (budget.eta_sys, Some(budget))
        }
    };
    let noise = evaluate_noise(s, tables, s.optics.eta_r()).map_err(|e| e.stage("background"))?;
    let counts = expected_counts(s, eta_sys, &noise).map_err(|e| e.stage("receivers"))?;
    let key = key_length(&counts, &s.protocol).map_err(|e| e.stage("security"))?;
    Ok(PointReport {
        key,
        eta_sys,
        loss_db: -10.0 * eta_sys.log10(),
        budget,
        noise,
        theta_deg: theta.to_degrees(),
        rho_km,
    })
}

impl Error {
    /// Annotate an error with the pipeline stage that produced it.
    pub fn stage(self, stage: &str) -> Error {
        match self {
            Error::Input(m) => Error::Input(format!("[{stage}] {m}")),
            Error::Data(m) => Error::Data(format!("[{stage}] {m}")),
            other => other,
        }
    }
}

/// Baseline scenario mirroring the default parameter table: urban site,
/// 854.445 nm, asymmetric passive receiver, SNSPD Spec B, SMF coupling with
/// low AO, night operation, zenith angle 60 degrees.
pub fn default_scenario() -> Scenario {
    let lambda_nm = 854.445;
    let optics = OpticsConfig::new(0.75, 1.5, Coupling::Smf);
    Scenario {
        geometry: LinkGeometry::default(),
        zenith_deg: Some(60.0),
        optics,
        site: Site::Urban,
        turbulence: Site::Urban.turbulence(),
        illumination: Illumination::Night,
        cloud_regime: CloudRegime::Clear,
        filter_bandwidth_ghz: 10.0,
        gate_ns: 1.0,
        detector: DetectorSpec::preset("snspd", "b", lambda_nm).unwrap(),
        lambda_nm,
        e_mis: 0.005,
        protocol: ProtocolConfig {
            n_rounds: 1e12,
            intensities: vec![0.5, 0.1, 0.002],
            intensity_probs: vec![0.7, 0.2, 0.1],
            p_x_alice: 0.1,
            truncation: 10,
            epsilon_tot: 1e-8,
            f_ec: 1.16,
            architecture: Architecture::PassiveAsym,
            split: 0.2,
            disclosure: 0.1,
            strict_lp: false,
        },
        source_rate_hz: 1e9,
        channel_mode: ChannelMode::Physical,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_indexed_preserves_order() {
        let items: Vec<usize> = (0..100).collect();
        let out = map_indexed(&items, true, |i, &x| i * 1000 + x);
        for (i, v) in out.iter().enumerate() {
            assert_eq!(*v, i * 1000 + i);
        }
        let serial = map_indexed(&items, false, |i, &x| i * 1000 + x);
        assert_eq!(out, serial);
    }

    #[test]
    fn detector_presets() {
        let d = DetectorSpec::preset("snspd", "b", 854.445).unwrap();
        assert_eq!(d.eta_d, 0.95);
        assert_eq!(d.dark_count_rate_hz, 0.1);
        let d = DetectorSpec::preset("apd", "a", 1550.027).unwrap();
        assert_eq!(d.eta_d, 0.25);
        assert_eq!(d.dark_count_rate_hz, 300.0);
        let d = DetectorSpec::preset("apd", "b", 656.448).unwrap();
        assert_eq!(d.eta_d, 0.70);
        assert!(DetectorSpec::preset("pmt", "a", 854.0).is_err());
    }

    #[test]
    fn abstract_noise_inversion() {
        let p_dark = 1e-10;
        let (p_z, p_x) = arm_noise_from_active(1e-6, p_dark, 0.3);
        // arm exponents recombine to the active value
        let x_z = -((1.0 - p_z) / (1.0 - p_dark)).ln();
        let x_x = -((1.0 - p_x) / (1.0 - p_dark)).ln();
        let p_back = 1.0 - (-(x_z + x_x)).exp() * (1.0 - p_dark);
        assert!(((p_back - 1e-6) / 1e-6).abs() < 1e-9);
    }

    #[test]
    fn abstract_point_ideal_channel() {
        let mut s = default_scenario();
        s.protocol.architecture = Architecture::ActiveAsym;
        s.protocol.n_rounds = 1e9;
        s.channel_mode = ChannelMode::Abstract { loss_db: 0.0, p_noise: 0.0 };
        let tables = DataTables::default();
        let report = evaluate_point(&s, &tables).unwrap();
        assert!(report.key.ell > 0.0, "ideal channel must produce key");
        assert!(report.key.rate < 1.0);
    }

    #[test]
    fn abstract_point_hopeless_channel() {
        let mut s = default_scenario();
        s.protocol.architecture = Architecture::ActiveAsym;
        s.channel_mode = ChannelMode::Abstract { loss_db: 70.0, p_noise: 1e-4 };
        let tables = DataTables::default();
        let report = evaluate_point(&s, &tables).unwrap();
        assert_eq!(report.key.ell, 0.0, "70 dB at 1e-4 noise sits outside the feasible region");
    }
}
