//! Parameter sweeps: evaluate or optimize every point of an axis-product
//! grid and emit a long-format result table. Grid points are independent
//! work items; results are keyed by grid index so the output does not depend
//! on evaluation order.

use super::optimize::{optimize_key_rate, SearchConfig};
use super::{evaluate_point, map_indexed, ChannelMode, DataTables, PointReport, Scenario};
use crate::background::Illumination;
use crate::channel::CloudRegime;
use crate::Error;

/// One sweep axis: `steps` values from `min` to `max`, linearly or
/// logarithmically spaced.
#[derive(Debug, Clone)]
pub struct SweepAxis {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub steps: usize,
    pub log: bool,
}

impl SweepAxis {
    pub fn values(&self) -> Vec<f64> {
        let n = self.steps.max(2);
        (0..n)
            .map(|i| {
                let t = i as f64 / (n - 1) as f64;
                if self.log {
                    (self.min.ln() + t * (self.max.ln() - self.min.ln())).exp()
                } else {
                    self.min + t * (self.max - self.min)
                }
            })
            .collect()
    }
}

/// Grid description: the axis product, whether each point is optimized, and
/// the parallelism switch.
#[derive(Debug, Clone)]
pub struct SweepGrid {
    pub axes: Vec<SweepAxis>,
    pub optimize: bool,
}

impl SweepGrid {
    pub fn validate(&self) -> Result<(), Error> {
        if self.axes.is_empty() {
            return Err(Error::input("sweep needs at least one axis".into()));
        }
        for ax in &self.axes {
            if ax.steps < 2 {
                return Err(Error::input(format!("axis '{}' needs at least 2 steps", ax.name)));
            }
            if ax.log && (ax.min <= 0.0 || ax.max <= 0.0) {
                return Err(Error::input(format!("log axis '{}' needs positive limits", ax.name)));
            }
        }
        Ok(())
    }

    pub fn point_count(&self) -> usize {
        self.axes.iter().map(|a| a.steps.max(2)).product()
    }
}

/// Apply one named sweep value to a scenario. Axis names follow the config
/// keys (units embedded).
pub fn apply_axis(s: &mut Scenario, name: &str, value: f64) -> Result<(), Error> {
    match name {
        "loss_db" => match s.channel_mode {
            ChannelMode::Abstract { ref mut loss_db, .. } => *loss_db = value,
            ChannelMode::Physical => {
                s.channel_mode = ChannelMode::Abstract { loss_db: value, p_noise: 0.0 }
            }
        },
        "p_noise" => match s.channel_mode {
            ChannelMode::Abstract { ref mut p_noise, .. } => *p_noise = value,
            ChannelMode::Physical => {
                s.channel_mode = ChannelMode::Abstract { loss_db: 0.0, p_noise: value }
            }
        },
        "n_rounds" => s.protocol.n_rounds = value,
        "zenith_deg" => s.zenith_deg = Some(value),
        "a_r_m" => s.optics.a_r = value,
        "a_t_m" => {
            s.optics.a_t = value;
            s.optics.omega_0 = value / 4.0;
        }
        "pointing_jitter_urad" => s.optics.sigma_p = value * 1e-6,
        "ao_bandwidth_hz" => s.optics.f_c = value,
        "wavelength_nm" => s.lambda_nm = value,
        "filter_bandwidth_ghz" => s.filter_bandwidth_ghz = value,
        "e_mis" => s.e_mis = value,
        "illumination_index" => {
            let idx = value.round() as usize;
            s.illumination = *Illumination::ALL
                .get(idx)
                .ok_or_else(|| Error::input(format!("illumination index {idx} out of range")))?;
        }
        "cloud_regime_index" => {
            let idx = value.round() as usize;
            s.cloud_regime = *CloudRegime::ALL
                .get(idx)
                .ok_or_else(|| Error::input(format!("cloud regime index {idx} out of range")))?;
        }
        other => return Err(Error::input(format!("unknown sweep axis '{other}'"))),
    }
    Ok(())
}

/// One evaluated grid point. Failures are carried as rows, never aborting
/// the sweep.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub index: usize,
    pub coords: Vec<f64>,
    pub report: Option<PointReport>,
    pub status: String,
}

/// Evaluate (or optimize) every grid point. Warm starts propagate along the
/// row-major order by seeding each point with the previous winner when
/// optimization is on and the run is serial; parallel runs optimize
/// independently, which keeps results order-independent.
pub fn run_sweep(
    grid: &SweepGrid,
    base: &Scenario,
    tables: &DataTables,
    search: &SearchConfig,
    parallel: bool,
) -> Result<Vec<SweepRow>, Error> {
    grid.validate()?;
    let axis_values: Vec<Vec<f64>> = grid.axes.iter().map(|a| a.values()).collect();
    let total = grid.point_count();
    let mut points = Vec::with_capacity(total);
    for index in 0..total {
        let mut rem = index;
        let mut coords = Vec::with_capacity(grid.axes.len());
        for vals in &axis_values {
            coords.push(vals[rem % vals.len()]);
            rem /= vals.len();
        }
        points.push((index, coords));
    }
    let rows = map_indexed(&points, parallel, |_, (index, coords)| {
        let mut scenario = base.clone();
        for (ax, &v) in grid.axes.iter().zip(coords.iter()) {
            if let Err(e) = apply_axis(&mut scenario, &ax.name, v) {
                return SweepRow {
                    index: *index,
                    coords: coords.clone(),
                    report: None,
                    status: e.to_string(),
                };
            }
        }
        let outcome = if grid.optimize {
            optimize_key_rate(&scenario, tables, search).map(|o| o.report)
        } else {
            evaluate_point(&scenario, tables)
        };
        match outcome {
            Ok(report) => SweepRow {
                index: *index,
                coords: coords.clone(),
                report: Some(report),
                status: "ok".into(),
            },
            Err(e) => SweepRow {
                index: *index,
                coords: coords.clone(),
                report: None,
                status: e.to_string(),
            },
        }
    });
    Ok(rows)
}
