//! File formats: the cloud-fraction grid, and delimited long-format result
//! tables with a schema-version header line.

use std::fmt::Write as _;
use std::path::Path;

use super::annual::AnnualYieldCell;
use super::sweep::{SweepGrid, SweepRow};
use crate::Error;

/// One cell of the cloud climatology grid.
#[derive(Debug, Clone, Copy)]
pub struct CloudCell {
    pub lat_deg: f64,
    pub lon_deg: f64,
    pub f_clear: f64,
    pub f_thin: f64,
    pub f_thick: f64,
}

/// 1-degree cloud-occurrence grid; cells violating the fraction invariant
/// are rejected at load.
#[derive(Debug, Clone, Default)]
pub struct CloudGrid {
    pub cells: Vec<CloudCell>,
}

impl CloudGrid {
    pub fn parse(text: &str) -> Result<Self, Error> {
        let mut cells = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with("lat") {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 5 {
                return Err(Error::data(format!(
                    "cloud grid line {}: expected 5 fields, got {}",
                    lineno + 1,
                    fields.len()
                )));
            }
            let mut vals = [0.0f64; 5];
            for (k, f) in fields.iter().enumerate() {
                vals[k] = f
                    .parse()
                    .map_err(|_| Error::data(format!("cloud grid line {}: bad number '{f}'", lineno + 1)))?;
            }
            let cell = CloudCell {
                lat_deg: vals[0],
                lon_deg: vals[1],
                f_clear: vals[2],
                f_thin: vals[3],
                f_thick: vals[4],
            };
            let fracs = [cell.f_clear, cell.f_thin, cell.f_thick];
            if fracs.iter().any(|f| *f < 0.0 || *f > 1.0) {
                return Err(Error::data(format!(
                    "cloud grid line {}: fractions must lie in [0,1]",
                    lineno + 1
                )));
            }
            if fracs.iter().sum::<f64>() > 1.0 + 1e-9 {
                return Err(Error::data(format!(
                    "cloud grid line {}: regime fractions exceed 1",
                    lineno + 1
                )));
            }
            cells.push(cell);
        }
        if cells.is_empty() {
            return Err(Error::data("cloud grid contains no cells".into()));
        }
        Ok(CloudGrid { cells })
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::data(format!("cannot read cloud grid {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Keep only every `step`-th degree in both axes (coarse CI runs).
    pub fn thin(&self, step: f64) -> CloudGrid {
        let keep = |v: f64| ((v / step).round() * step - v).abs() < 1e-6;
        CloudGrid {
            cells: self
                .cells
                .iter()
                .copied()
                .filter(|c| keep(c.lat_deg) && keep(c.lon_deg))
                .collect(),
        }
    }
}

fn report_columns() -> &'static str {
    "ell_bits,rate_per_pulse,loss_db,p_noise,nbar,theta_deg,rho_km,n1_z_lower,n1_z_upper,n1_x_lower,phi_upper,lambda_ec,lp_feasible"
}

fn write_report_fields(out: &mut String, report: &super::PointReport) {
    let k = &report.key;
    let _ = write!(
        out,
        "{:.6e},{:.6e},{:.6},{:.6e},{:.6e},{:.4},{:.3},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{}",
        k.ell,
        k.rate,
        report.loss_db,
        report.noise.p_noise,
        report.noise.nbar,
        report.theta_deg,
        report.rho_km,
        k.n1_z_lower,
        k.n1_z_upper,
        k.n1_x_lower,
        k.phi_upper,
        k.lambda_ec,
        k.lp_feasible
    );
}

/// Serialize sweep rows as a delimited long-format table. The first line
/// carries the schema version; the second is the header.
pub fn sweep_table(grid: &SweepGrid, rows: &[SweepRow]) -> String {
    let mut out = String::new();
    out.push_str("# schema geoqkd.sweep.v1\n");
    let axis_names: Vec<&str> = grid.axes.iter().map(|a| a.name.as_str()).collect();
    let _ = writeln!(out, "index,{},status,{}", axis_names.join(","), report_columns());
    for row in rows {
        let _ = write!(out, "{},", row.index);
        for c in &row.coords {
            let _ = write!(out, "{c:.9e},");
        }
        match &row.report {
            Some(report) => {
                let _ = write!(out, "ok,");
                write_report_fields(&mut out, report);
            }
            None => {
                let _ = write!(out, "{},", row.status.replace(',', ";"));
                let _ = write!(out, "{}", ",".repeat(report_columns().split(',').count() - 1));
            }
        }
        out.push('\n');
    }
    out
}

/// Serialize annual-yield cells.
pub fn annual_table(cells: &[AnnualYieldCell]) -> String {
    let mut out = String::new();
    out.push_str("# schema geoqkd.annual.v1\n");
    out.push_str(
        "lat_deg,lon_deg,theta_deg,f_clear,f_thin,f_thick,yield_bits_per_year,rate_night_clear\n",
    );
    for c in cells {
        let _ = writeln!(
            out,
            "{:.2},{:.2},{:.3},{:.4},{:.4},{:.4},{:.6e},{:.6e}",
            c.lat_deg,
            c.lon_deg,
            c.theta_deg,
            c.f_clear,
            c.f_thin,
            c.f_thick,
            c.yield_bits_per_year,
            c.rate_night_clear
        );
    }
    out
}

/// Serialize a single evaluation as a key,value record.
pub fn point_record(report: &super::PointReport) -> String {
    let mut out = String::new();
    out.push_str("# schema geoqkd.point.v1\n");
    out.push_str("field,value\n");
    let k = &report.key;
    let pairs: Vec<(&str, String)> = vec![
        ("ell_bits", format!("{:.6e}", k.ell)),
        ("rate_per_pulse", format!("{:.6e}", k.rate)),
        ("loss_db", format!("{:.6}", report.loss_db)),
        ("eta_sys", format!("{:.6e}", report.eta_sys)),
        ("p_noise", format!("{:.6e}", report.noise.p_noise)),
        ("p_noise_z", format!("{:.6e}", report.noise.p_noise_z)),
        ("p_noise_x", format!("{:.6e}", report.noise.p_noise_x)),
        ("nbar_background", format!("{:.6e}", report.noise.nbar)),
        ("p_dark", format!("{:.6e}", report.noise.p_dark)),
        ("theta_deg", format!("{:.4}", report.theta_deg)),
        ("rho_km", format!("{:.3}", report.rho_km)),
        ("n1_z_lower", format!("{:.6e}", k.n1_z_lower)),
        ("n1_z_upper", format!("{:.6e}", k.n1_z_upper)),
        ("n1_x_lower", format!("{:.6e}", k.n1_x_lower)),
        ("n1_x_upper", format!("{:.6e}", k.n1_x_upper)),
        ("m1_x_lower", format!("{:.6e}", k.m1_x_lower)),
        ("m1_x_upper", format!("{:.6e}", k.m1_x_upper)),
        ("phi_upper", format!("{:.6e}", k.phi_upper)),
        ("lambda_ec", format!("{:.6e}", k.lambda_ec)),
        ("lp_feasible", format!("{}", k.lp_feasible)),
    ];
    for (name, value) in pairs {
        let _ = writeln!(out, "{name},{value}");
    }
    if let Some(b) = &report.budget {
        let _ = writeln!(out, "geo_db,{:.6}", b.geo_db());
        let _ = writeln!(out, "pointing_db,{:.6}", b.pointing_db());
        let _ = writeln!(out, "coupling_db,{:.6}", b.coupling_db());
        let _ = writeln!(out, "atm_db,{:.6}", b.atm_db());
        let _ = writeln!(out, "receiver_db,{:.6}", b.receiver_db());
        let _ = writeln!(out, "detector_db,{:.6}", b.detector_db());
        let _ = writeln!(out, "total_db,{:.6}", b.total_db());
    }
    out
}
