//! Background-photon and noise-click model: sky spectral radiance to photon
//! flux density, to mean background photons per gate, to per-detector
//! noise-click probabilities, for solar and lunar illumination scenarios.
//!
//! Radiance values live in a versioned data file shipped with the repo;
//! users can point the loader at their own radiative-transfer exports.

use std::collections::BTreeMap;

use crate::channel::{airy_half_angle, smf_half_angle, Site};
use crate::Error;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 2.998e8;
/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.055e-34;

/// Illumination scenarios with tabulated radiance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Illumination {
    Night,
    DayLow,
    DayModerate,
    DayHigh,
}

impl Illumination {
    pub fn parse(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "night" => Ok(Illumination::Night),
            "day_low" => Ok(Illumination::DayLow),
            "day_moderate" => Ok(Illumination::DayModerate),
            "day_high" => Ok(Illumination::DayHigh),
            other => Err(Error::data(format!("unknown illumination '{other}'"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Illumination::Night => "night",
            Illumination::DayLow => "day_low",
            Illumination::DayModerate => "day_moderate",
            Illumination::DayHigh => "day_high",
        }
    }

    pub const ALL: [Illumination; 4] = [
        Illumination::Night,
        Illumination::DayLow,
        Illumination::DayModerate,
        Illumination::DayHigh,
    ];
}

/// Full-Moon radiance scaling factors relative to the rural baseline,
/// (wavelength_nm, urban factor, coastal factor). Values follow the
/// solar-radiance ratios between sites at matching wavelengths.
pub const LUNAR_SCALING: [(f64, f64, f64); 3] = [
    (656.448, 1.03, 2.15),
    (854.445, 1.17, 2.86),
    (1550.027, 1.58, 7.55),
];

fn wavelength_key(lambda_nm: f64) -> u64 {
    (lambda_nm * 1000.0).round() as u64
}

/// Sky spectral radiance table, mW m^-2 nm^-1 sr^-1 per
/// (site, wavelength, illumination).
#[derive(Debug, Clone, Default)]
pub struct RadianceTable {
    entries: BTreeMap<(Site, u64, Illumination), f64>,
}

impl RadianceTable {
    /// Parse the delimited radiance file. Header columns:
    /// `site, wavelength_nm, illumination, radiance_mW_m2_nm_sr`.
    pub fn parse(text: &str) -> Result<Self, Error> {
        let mut table = RadianceTable::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with("site") {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 4 {
                return Err(Error::data(format!(
                    "radiance table line {}: expected 4 fields, got {}",
                    lineno + 1,
                    fields.len()
                )));
            }
            let site = Site::parse(fields[0]).map_err(|e| Error::data(e.to_string()))?;
            let lambda: f64 = fields[1]
                .parse()
                .map_err(|_| Error::data(format!("bad wavelength '{}'", fields[1])))?;
            let illum = Illumination::parse(fields[2])?;
            let radiance: f64 = fields[3]
                .parse()
                .map_err(|_| Error::data(format!("bad radiance '{}'", fields[3])))?;
            if radiance < 0.0 {
                return Err(Error::data(format!("negative radiance at line {}", lineno + 1)));
            }
            if table
                .entries
                .insert((site, wavelength_key(lambda), illum), radiance)
                .is_some()
            {
                return Err(Error::data(format!(
                    "duplicate radiance row for {} {} nm {}",
                    site.name(),
                    lambda,
                    illum.name()
                )));
            }
        }
        Ok(table)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(Site, u64, Illumination), &f64)> {
        self.entries.iter()
    }

    pub fn radiance(
        &self,
        site: Site,
        lambda_nm: f64,
        illum: Illumination,
    ) -> Result<f64, Error> {
        self.entries
            .get(&(site, wavelength_key(lambda_nm), illum))
            .copied()
            .ok_or_else(|| {
                Error::data(format!(
                    "no radiance entry for site={}, wavelength={} nm, illumination={}",
                    site.name(),
                    lambda_nm,
                    illum.name()
                ))
            })
    }

    /// Data invariant: full-Moon radiance never exceeds the dimmest daytime
    /// scenario at the same site and wavelength.
    pub fn validate(&self) -> Result<(), Error> {
        for ((site, wl, illum), value) in &self.entries {
            if *illum == Illumination::Night {
                if let Some(low) = self.entries.get(&(*site, *wl, Illumination::DayLow)) {
                    if value > low {
                        return Err(Error::data(format!(
                            "lunar radiance exceeds day-low at {} {} nm",
                            site.name(),
                            *wl as f64 / 1000.0
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Full-Moon radiance for a site, from the rural baseline and the
/// site scaling factor.
pub fn lunar_radiance(table: &RadianceTable, site: Site, lambda_nm: f64) -> Result<f64, Error> {
    let rural = table.radiance(Site::Rural, lambda_nm, Illumination::Night)?;
    let factor = match site {
        Site::Rural => 1.0,
        Site::Urban | Site::Coastal => {
            let row = LUNAR_SCALING
                .iter()
                .find(|(wl, _, _)| ((*wl - lambda_nm) * 1000.0).round() == 0.0)
                .ok_or_else(|| {
                    Error::data(format!("no lunar scaling factor for {lambda_nm} nm"))
                })?;
            if site == Site::Urban {
                row.1
            } else {
                row.2
            }
        }
    };
    Ok(rural * factor)
}

/// Receiver field-of-view convention for background collection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FovMode {
    /// Airy first-minimum half-angle, 1.22 lambda / a_R.
    Airy,
    /// Effective single-mode-fiber acceptance, 2.24 lambda / (pi a_R).
    Smf,
    /// Explicit half-angle, radians.
    Explicit(f64),
    /// Diffraction-limited solid angle `Omega = pi (lambda / (pi a_R))^2`,
    /// the approximation behind the critical-radiance threshold.
    DiffractionLimited,
}

/// Acceptance parameters of one background-noise evaluation.
#[derive(Debug, Clone, Copy)]
pub struct NoiseScenario {
    pub lambda_nm: f64,
    /// Sky spectral radiance, mW m^-2 nm^-1 sr^-1.
    pub radiance: f64,
    /// Spectral filter bandwidth, GHz.
    pub filter_bandwidth_ghz: f64,
    /// Detection gate width, s.
    pub gate_s: f64,
    pub fov_mode: FovMode,
}

impl NoiseScenario {
    pub fn validate(&self) -> Result<(), Error> {
        if self.radiance < 0.0 {
            return Err(Error::input("radiance must be nonnegative".into()));
        }
        if self.gate_s <= 0.0 || self.filter_bandwidth_ghz <= 0.0 {
            return Err(Error::input("gate width and filter bandwidth must be positive".into()));
        }
        Ok(())
    }

    /// Filter bandwidth converted to wavelength units, m:
    /// `dlambda = lambda^2 dnu / c`.
    pub fn filter_bandwidth_m(&self) -> f64 {
        let lambda = self.lambda_nm * 1e-9;
        lambda * lambda * self.filter_bandwidth_ghz * 1e9 / SPEED_OF_LIGHT
    }

    /// Acceptance solid angle, sr, for receiver aperture `a_r` (diameter, m).
    pub fn fov_solid_angle(&self, a_r: f64) -> f64 {
        let gamma = match self.fov_mode {
            FovMode::Airy => airy_half_angle(self.lambda_nm, a_r),
            FovMode::Smf => smf_half_angle(self.lambda_nm, a_r),
            FovMode::Explicit(g) => g,
            FovMode::DiffractionLimited => {
                let lambda = self.lambda_nm * 1e-9;
                return std::f64::consts::PI * (lambda / (std::f64::consts::PI * a_r)).powi(2);
            }
        };
        2.0 * std::f64::consts::PI * (1.0 - gamma.cos())
    }
}

/// Photon flux spectral density `H_lambda = lambda Htilde 1e6 / (2 hbar c)`
/// from the radiance in mW m^-2 nm^-1 sr^-1.
pub fn photon_flux_density(lambda_nm: f64, radiance: f64) -> f64 {
    lambda_nm * 1e-9 * radiance * 1e6 / (2.0 * HBAR * SPEED_OF_LIGHT)
}

/// Mean background photons collected per gate:
/// `n_B = H_lambda * (dlambda dt Omega a_R^2 / 4)` with
/// `Omega = 2 pi (1 - cos gamma)`.
pub fn mean_background_photons(s: &NoiseScenario, a_r: f64) -> f64 {
    let omega = s.fov_solid_angle(a_r);
    let gamma_r = s.filter_bandwidth_m() * s.gate_s * omega * a_r * a_r / 4.0;
    photon_flux_density(s.lambda_nm, s.radiance) * gamma_r
}

/// Dark-count probability per gate from the dark count rate.
pub fn dark_probability(dcr_hz: f64, gate_s: f64) -> f64 {
    1.0 - (-dcr_hz * gate_s).exp()
}

/// Per-detector per-gate noise-click probability for the active receiver:
/// unpolarized background split equally over the two detectors.
pub fn noise_click_probability_active(nbar: f64, p_dark: f64, eta_r: f64, eta_d: f64) -> f64 {
    1.0 - (-eta_r * eta_d * nbar / 2.0).exp() * (1.0 - p_dark)
}

/// Arm-resolved noise-click probabilities for the passive receiver with
/// splitting ratio `s` toward the X arm.
pub fn noise_click_probability_passive(
    nbar: f64,
    p_dark: f64,
    eta_r: f64,
    eta_d: f64,
    s: f64,
) -> Result<(f64, f64), Error> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::input(format!("split ratio must lie in (0,1), got {s}")));
    }
    let p_z = 1.0 - (-(1.0 - s) * eta_r * eta_d * nbar / 2.0).exp() * (1.0 - p_dark);
    let p_x = 1.0 - (-s * eta_r * eta_d * nbar / 2.0).exp() * (1.0 - p_dark);
    Ok((p_z, p_x))
}

/// Sky radiance at which the active-receiver noise-click probability reaches
/// `target`, under the diffraction-limited FOV approximation
/// `Omega ~= pi (lambda / (pi a_R))^2`. Returns an error when the target
/// sits below the dark-count floor.
#[allow(clippy::too_many_arguments)]
pub fn critical_radiance(
    target: f64,
    lambda_nm: f64,
    filter_bandwidth_ghz: f64,
    gate_s: f64,
    a_r: f64,
    p_dark: f64,
    eta_r: f64,
    eta_d: f64,
) -> Result<f64, Error> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::input("noise target must lie in (0,1)".into()));
    }
    if target < p_dark {
        return Err(Error::input(format!(
            "noise target {target} is below the dark-count floor {p_dark}"
        )));
    }
    // invert p = 1 - exp(-eta_R eta_D nbar / 2)(1 - p_dark) for nbar
    let nbar = -2.0 * ((1.0 - target) / (1.0 - p_dark)).ln() / (eta_r * eta_d);
    let lambda = lambda_nm * 1e-9;
    let omega = std::f64::consts::PI * (lambda / (std::f64::consts::PI * a_r)).powi(2);
    let dlambda = lambda * lambda * filter_bandwidth_ghz * 1e9 / SPEED_OF_LIGHT;
    let gamma_r = dlambda * gate_s * omega * a_r * a_r / 4.0;
    // nbar = H_lambda * Gamma_R, H_lambda = lambda Htilde 1e6 / (2 hbar c)
    Ok(nbar / gamma_r * 2.0 * HBAR * SPEED_OF_LIGHT / (lambda * 1e6))
}
