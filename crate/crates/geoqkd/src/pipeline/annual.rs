//! Annual cloud-weighted secret-key yield: per grid cell, the optimized
//! rates of every (illumination, cloud regime) combination are folded with
//! the day/night partition and the local cloud fractions, then scaled by the
//! yearly pulse budget.
//!
//! The year splits into equal night and day halves. One sixth of the total
//! (a third of daylight) is excluded for solar proximity to the line of
//! sight; the remaining daylight is shared equally by the low, moderate, and
//! high background scenarios, giving weights 1/2, 1/9, 1/9, 1/9 (plus the
//! 1/6 exclusion), which sum to one.

use std::collections::BTreeMap;

use super::optimize::{optimize_key_rate, SearchConfig};
use super::tables::{CloudCell, CloudGrid};
use super::{map_indexed, DataTables, Scenario, SECONDS_PER_YEAR};
use crate::background::Illumination;
use crate::channel::CloudRegime;
use crate::geometry::{zenith_angle, LinkGeometry};
use crate::Error;

/// Fraction of the year spent in each illumination scenario.
pub fn illumination_weight(illum: Illumination) -> f64 {
    match illum {
        Illumination::Night => 0.5,
        Illumination::DayLow | Illumination::DayModerate | Illumination::DayHigh => 1.0 / 9.0,
    }
}

/// Annual yield of one grid cell.
#[derive(Debug, Clone, Copy)]
pub struct AnnualYieldCell {
    pub lat_deg: f64,
    pub lon_deg: f64,
    pub theta_deg: f64,
    pub f_clear: f64,
    pub f_thin: f64,
    pub f_thick: f64,
    pub yield_bits_per_year: f64,
    /// Diagnostic: the optimized clear-sky night rate of the cell.
    pub rate_night_clear: f64,
}

/// Settings of an annual-yield run.
#[derive(Debug, Clone)]
pub struct AnnualConfig {
    /// Zenith-angle bucket width for the rate cache, degrees. Cells whose
    /// viewing angles fall in the same bucket share one optimization.
    pub theta_resolution_deg: f64,
    /// Skip cells whose zenith angle exceeds this limit (outside the
    /// atmosphere tables' domain).
    pub max_zenith_deg: f64,
}

impl Default for AnnualConfig {
    fn default() -> Self {
        Self { theta_resolution_deg: 2.0, max_zenith_deg: 80.0 }
    }
}

fn regime_fraction(cell: &CloudCell, regime: CloudRegime) -> f64 {
    match regime {
        CloudRegime::Clear => cell.f_clear,
        CloudRegime::Thin => cell.f_thin,
        CloudRegime::Thick => cell.f_thick,
    }
}

/// Optimized rate per pulse for one (theta bucket, illumination, regime)
/// key; the cache is the unit of parallel work.
type RateKey = (i64, Illumination, CloudRegime);

fn cell_zenith(cell: &CloudCell, base: &LinkGeometry) -> Result<f64, Error> {
    let geometry = LinkGeometry {
        ogs_latitude_deg: cell.lat_deg,
        ogs_longitude_deg: cell.lon_deg,
        ..*base
    };
    zenith_angle(&geometry).map(|t| t.to_degrees())
}

/// Run the annual model over a cloud grid. Rates are optimized once per
/// quantized zenith angle and scenario, then reused across cells.
pub fn annual_yield(
    grid: &CloudGrid,
    base: &Scenario,
    tables: &DataTables,
    search: &SearchConfig,
    config: &AnnualConfig,
    parallel: bool,
) -> Result<Vec<AnnualYieldCell>, Error> {
    let base_geometry = base.geometry;
    // collect the distinct work keys
    let mut cells_with_theta = Vec::with_capacity(grid.cells.len());
    let mut keys: BTreeMap<RateKey, ()> = BTreeMap::new();
    let quantum = config.theta_resolution_deg.max(0.1);
    for cell in &grid.cells {
        let theta_deg = match cell_zenith(cell, &base_geometry) {
            Ok(t) => t,
            Err(_) => continue, // below horizon
        };
        if theta_deg > config.max_zenith_deg {
            continue;
        }
        let bucket = (theta_deg / quantum).round() as i64;
        for illum in Illumination::ALL {
            for regime in CloudRegime::ALL {
                keys.insert((bucket, illum, regime), ());
            }
        }
        cells_with_theta.push((*cell, theta_deg, bucket));
    }
    let key_list: Vec<RateKey> = keys.into_keys().collect();
    // optimize every distinct scenario; row-major warm start chains are
    // deliberately absent here so the work items stay independent
    let rates: Vec<f64> = map_indexed(&key_list, parallel, |_, &(bucket, illum, regime)| {
        let mut scenario = base.clone();
        scenario.zenith_deg = Some(bucket as f64 * quantum);
        scenario.illumination = illum;
        scenario.cloud_regime = regime;
        match optimize_key_rate(&scenario, tables, search) {
            Ok(best) => best.report.key.rate,
            Err(_) => 0.0,
        }
    });
    let rate_of = |key: &RateKey| -> f64 {
        match key_list.binary_search(key) {
            Ok(i) => rates[i],
            Err(_) => 0.0,
        }
    };
    let pulses_per_year = base.source_rate_hz * SECONDS_PER_YEAR;
    let out = cells_with_theta
        .iter()
        .map(|(cell, theta_deg, bucket)| {
            let mut yearly = 0.0;
            for regime in CloudRegime::ALL {
                let f_regime = regime_fraction(cell, regime);
                if f_regime <= 0.0 {
                    continue;
                }
                let mut scenario_rate = 0.0;
                for illum in Illumination::ALL {
                    scenario_rate +=
                        illumination_weight(illum) * rate_of(&(*bucket, illum, regime));
                }
                yearly += f_regime * scenario_rate;
            }
            AnnualYieldCell {
                lat_deg: cell.lat_deg,
                lon_deg: cell.lon_deg,
                theta_deg: *theta_deg,
                f_clear: cell.f_clear,
                f_thin: cell.f_thin,
                f_thick: cell.f_thick,
                yield_bits_per_year: yearly * pulses_per_year,
                rate_night_clear: rate_of(&(*bucket, Illumination::Night, CloudRegime::Clear)),
            }
        })
        .collect();
    Ok(out)
}
