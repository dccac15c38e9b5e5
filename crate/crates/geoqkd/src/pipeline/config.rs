//! Structured text configuration: scenario files mirror the simulation
//! parameter table (units embedded in key names), sweep grids describe axis
//! products, and data-file locations are grouped under `[data]`.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::sweep::{SweepAxis, SweepGrid};
use super::{ChannelMode, DataTables, DetectorSpec, Scenario};
use crate::background::{Illumination, RadianceTable};
use crate::channel::{AtmosphereTable, CloudRegime, Coupling, OpticsConfig, Site};
use crate::geometry::LinkGeometry;
use crate::security::{Architecture, ProtocolConfig};
use crate::Error;

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub scenario: ScenarioSection,
    #[serde(default)]
    pub data: DataSection,
    #[serde(default)]
    pub search: SearchSection,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub annual: Option<AnnualSection>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub wavelength_nm: Option<f64>,
    pub architecture: Option<String>,
    pub site: Option<String>,
    pub illumination: Option<String>,
    pub cloud_regime: Option<String>,
    pub e_mis: Option<f64>,
    #[serde(default)]
    pub geometry: GeometrySection,
    #[serde(default)]
    pub optics: OpticsSection,
    #[serde(default)]
    pub detector: DetectorSection,
    #[serde(default)]
    pub noise: NoiseSection,
    #[serde(default)]
    pub protocol: ProtocolSection,
    #[serde(default)]
    pub source: SourceSection,
    #[serde(default)]
    pub channel: ChannelSection,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct GeometrySection {
    pub zenith_deg: Option<f64>,
    pub ogs_latitude_deg: Option<f64>,
    pub ogs_longitude_deg: Option<f64>,
    pub ogs_altitude_km: Option<f64>,
    pub sat_longitude_deg: Option<f64>,
    pub sat_altitude_km: Option<f64>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OpticsSection {
    pub a_t_m: Option<f64>,
    pub a_r_m: Option<f64>,
    pub omega_0_m: Option<f64>,
    pub m2: Option<f64>,
    pub pointing_jitter_urad: Option<f64>,
    pub coupling: Option<String>,
    pub eta_0: Option<f64>,
    pub fov_half_angle_urad: Option<f64>,
    pub receiver_optics_loss_db: Option<f64>,
    pub ao_bandwidth_hz: Option<f64>,
    pub tip_tilt_bandwidth_hz: Option<f64>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct DetectorSection {
    pub kind: Option<String>,
    pub spec: Option<String>,
    pub eta_d: Option<f64>,
    pub dark_count_rate_hz: Option<f64>,
    pub afterpulse_probability: Option<f64>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    pub filter_bandwidth_ghz: Option<f64>,
    pub gate_ns: Option<f64>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ProtocolSection {
    pub n_rounds: Option<f64>,
    pub epsilon_tot: Option<f64>,
    pub f_ec: Option<f64>,
    pub intensities: Option<Vec<f64>>,
    pub intensity_probs: Option<Vec<f64>>,
    pub p_x_alice: Option<f64>,
    pub truncation: Option<usize>,
    pub split: Option<f64>,
    pub disclosure: Option<f64>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SourceSection {
    pub rate_hz: Option<f64>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ChannelSection {
    pub mode: Option<String>,
    pub loss_db: Option<f64>,
    pub p_noise: Option<f64>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    pub atmosphere: Option<PathBuf>,
    pub radiance: Option<PathBuf>,
    pub cloud_grid: Option<PathBuf>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SearchSection {
    pub grid_points: Option<usize>,
    pub nm_iterations: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub axes: Vec<AxisSection>,
    #[serde(default)]
    pub optimize: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSection {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub steps: usize,
    #[serde(default)]
    pub log: bool,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct AnnualSection {
    pub theta_resolution_deg: Option<f64>,
    pub max_zenith_deg: Option<f64>,
    /// Keep only grid cells on multiples of this step (degrees).
    pub grid_step_deg: Option<f64>,
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self, Error> {
        toml::from_str(text).map_err(|e| Error::input(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::input(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Materialize the scenario, starting from the defaults and applying
    /// every present key.
    pub fn scenario(&self) -> Result<Scenario, Error> {
        let mut s = super::default_scenario();
        let sec = &self.scenario;
        if let Some(v) = sec.wavelength_nm {
            s.lambda_nm = v;
        }
        if let Some(v) = &sec.architecture {
            s.protocol.architecture = Architecture::parse(v)?;
        }
        if let Some(v) = &sec.site {
            s.site = Site::parse(v)?;
            s.turbulence = s.site.turbulence();
        }
        if let Some(v) = &sec.illumination {
            s.illumination = Illumination::parse(v).map_err(|e| Error::input(e.to_string()))?;
        }
        if let Some(v) = &sec.cloud_regime {
            s.cloud_regime = CloudRegime::parse(v).map_err(|e| Error::input(e.to_string()))?;
        }
        if let Some(v) = sec.e_mis {
            s.e_mis = v;
        }
        // geometry: explicit zenith wins; otherwise OGS placement
        let g = &sec.geometry;
        let mut geometry = LinkGeometry::default();
        if let Some(v) = g.ogs_latitude_deg {
            geometry.ogs_latitude_deg = v;
            s.zenith_deg = None;
        }
        if let Some(v) = g.ogs_longitude_deg {
            geometry.ogs_longitude_deg = v;
            s.zenith_deg = None;
        }
        if let Some(v) = g.ogs_altitude_km {
            geometry.ogs_altitude_km = v;
        }
        if let Some(v) = g.sat_longitude_deg {
            geometry.sat_longitude_deg = v;
        }
        if let Some(v) = g.sat_altitude_km {
            geometry.sat_altitude_km = v;
        }
        geometry.validate()?;
        s.geometry = geometry;
        if let Some(v) = g.zenith_deg {
            s.zenith_deg = Some(v);
        }
        // optics
        let o = &sec.optics;
        let coupling = match o.coupling.as_deref() {
            None => s.optics.coupling,
            Some("smf") => Coupling::Smf,
            Some("fs") | Some("free_space") => Coupling::FreeSpace {
                gamma_fov_rad: o.fov_half_angle_urad.map(|u| u * 1e-6),
            },
            Some(other) => {
                return Err(Error::input(format!(
                    "scenario.optics.coupling: unknown strategy '{other}'"
                )))
            }
        };
        let mut optics = OpticsConfig::new(
            o.a_t_m.unwrap_or(s.optics.a_t),
            o.a_r_m.unwrap_or(s.optics.a_r),
            coupling,
        );
        if let Some(v) = o.omega_0_m {
            optics.omega_0 = v;
        }
        if let Some(v) = o.m2 {
            optics.m2 = v;
        }
        if let Some(v) = o.pointing_jitter_urad {
            optics.sigma_p = v * 1e-6;
        }
        if let Some(v) = o.eta_0 {
            optics.eta_0 = v;
        }
        if let Some(v) = o.receiver_optics_loss_db {
            optics.receiver_optics_loss_db = v;
        }
        if let Some(v) = o.ao_bandwidth_hz {
            optics.f_c = v;
        }
        if let Some(v) = o.tip_tilt_bandwidth_hz {
            optics.f_tc = v;
        }
        optics.validate()?;
        s.optics = optics;
        // detector: preset by kind/spec, then explicit overrides
        let d = &sec.detector;
        let mut detector = match (&d.kind, &d.spec) {
            (Some(kind), spec) => {
                DetectorSpec::preset(kind, spec.as_deref().unwrap_or("b"), s.lambda_nm)?
            }
            (None, Some(spec)) => DetectorSpec::preset("snspd", spec, s.lambda_nm)?,
            (None, None) => DetectorSpec::preset("snspd", "b", s.lambda_nm)?,
        };
        if let Some(v) = d.eta_d {
            detector.eta_d = v;
        }
        if let Some(v) = d.dark_count_rate_hz {
            detector.dark_count_rate_hz = v;
        }
        if let Some(v) = d.afterpulse_probability {
            detector.afterpulse_probability = v;
        }
        s.detector = detector;
        // noise acceptance
        if let Some(v) = sec.noise.filter_bandwidth_ghz {
            s.filter_bandwidth_ghz = v;
        }
        if let Some(v) = sec.noise.gate_ns {
            s.gate_ns = v;
        }
        // protocol
        let p = &sec.protocol;
        apply_protocol(&mut s.protocol, p)?;
        if let Some(v) = sec.source.rate_hz {
            s.source_rate_hz = v;
        }
        // channel mode
        match sec.channel.mode.as_deref() {
            None | Some("physical") => {}
            Some("abstract") => {
                s.channel_mode = ChannelMode::Abstract {
                    loss_db: sec.channel.loss_db.unwrap_or(40.0),
                    p_noise: sec.channel.p_noise.unwrap_or(0.0),
                };
            }
            Some(other) => {
                return Err(Error::input(format!("scenario.channel.mode: unknown mode '{other}'")))
            }
        }
        s.protocol.validate()?;
        Ok(s)
    }

    pub fn sweep_grid(&self) -> Result<SweepGrid, Error> {
        let section = self
            .sweep
            .as_ref()
            .ok_or_else(|| Error::input("config has no [sweep] section".into()))?;
        let grid = SweepGrid {
            axes: section
                .axes
                .iter()
                .map(|a| SweepAxis {
                    name: a.name.clone(),
                    min: a.min,
                    max: a.max,
                    steps: a.steps,
                    log: a.log,
                })
                .collect(),
            optimize: section.optimize,
        };
        grid.validate()?;
        Ok(grid)
    }

    /// Load the data tables, resolving relative paths against `base_dir`.
    pub fn tables(&self, base_dir: &Path) -> Result<DataTables, Error> {
        let resolve = |p: &PathBuf| -> PathBuf {
            if p.is_absolute() {
                p.clone()
            } else {
                base_dir.join(p)
            }
        };
        let atmosphere = match &self.data.atmosphere {
            Some(p) => {
                let path = resolve(p);
                let text = std::fs::read_to_string(&path).map_err(|e| {
                    Error::data(format!("cannot read atmosphere table {}: {e}", path.display()))
                })?;
                AtmosphereTable::parse(&text)?
            }
            None => AtmosphereTable::default(),
        };
        let radiance = match &self.data.radiance {
            Some(p) => {
                let path = resolve(p);
                let text = std::fs::read_to_string(&path).map_err(|e| {
                    Error::data(format!("cannot read radiance table {}: {e}", path.display()))
                })?;
                RadianceTable::parse(&text)?
            }
            None => RadianceTable::default(),
        };
        Ok(DataTables { atmosphere, radiance })
    }
}

fn apply_protocol(out: &mut ProtocolConfig, p: &ProtocolSection) -> Result<(), Error> {
    if let Some(v) = p.n_rounds {
        out.n_rounds = v;
    }
    if let Some(v) = p.epsilon_tot {
        out.epsilon_tot = v;
    }
    if let Some(v) = p.f_ec {
        out.f_ec = v;
    }
    if let Some(v) = &p.intensities {
        out.intensities = v.clone();
    }
    if let Some(v) = &p.intensity_probs {
        out.intensity_probs = v.clone();
    }
    if let Some(v) = p.p_x_alice {
        out.p_x_alice = v;
    }
    if let Some(v) = p.truncation {
        out.truncation = v;
    }
    if let Some(v) = p.split {
        out.split = v;
    }
    if let Some(v) = p.disclosure {
        out.disclosure = v;
    }
    Ok(())
}
