//! Spherical-Earth downlink viewing geometry: central angle, zenith angle,
//! slant range, azimuth, and the maximum ground separation served by one
//! geostationary satellite. Angles are radians internally; degrees appear
//! only at the configuration boundary. Refraction and oblateness corrections
//! are deliberately absent.

use crate::Error;

/// Mean Earth radius in km.
pub const EARTH_RADIUS_KM: f64 = 6378.0;
/// Geostationary altitude in km.
pub const GEO_ALTITUDE_KM: f64 = 35_786.0;

/// Ground-station and satellite placement. Latitudes/longitudes in degrees,
/// altitudes in km; derived radii are `R_E + h`.
#[derive(Debug, Clone, Copy)]
pub struct LinkGeometry {
    pub ogs_latitude_deg: f64,
    pub ogs_longitude_deg: f64,
    pub ogs_altitude_km: f64,
    pub sat_longitude_deg: f64,
    pub sat_altitude_km: f64,
    pub earth_radius_km: f64,
}

impl Default for LinkGeometry {
    fn default() -> Self {
        Self {
            ogs_latitude_deg: 0.0,
            ogs_longitude_deg: 5.0,
            ogs_altitude_km: 0.0,
            sat_longitude_deg: 5.0,
            sat_altitude_km: GEO_ALTITUDE_KM,
            earth_radius_km: EARTH_RADIUS_KM,
        }
    }
}

impl LinkGeometry {
    pub fn validate(&self) -> Result<(), Error> {
        if self.ogs_latitude_deg.abs() > 90.0 {
            return Err(Error::input(format!(
                "latitude out of range: {}",
                self.ogs_latitude_deg
            )));
        }
        if self.sat_altitude_km <= 0.0 {
            return Err(Error::input("satellite altitude must be positive".into()));
        }
        Ok(())
    }

    /// OGS radial distance from the Earth's center, km.
    pub fn r_ogs(&self) -> f64 {
        self.earth_radius_km + self.ogs_altitude_km
    }

    /// Satellite radial distance from the Earth's center, km.
    pub fn r_sat(&self) -> f64 {
        self.earth_radius_km + self.sat_altitude_km
    }

    fn lat_rad(&self) -> f64 {
        self.ogs_latitude_deg.to_radians()
    }

    fn dlon_rad(&self) -> f64 {
        (self.sat_longitude_deg - self.ogs_longitude_deg).to_radians()
    }
}

/// Central angle between the OGS and the sub-satellite point:
/// `cos psi = cos(lat) cos(dlon)`.
pub fn central_angle(g: &LinkGeometry) -> f64 {
    (g.lat_rad().cos() * g.dlon_rad().cos()).clamp(-1.0, 1.0).acos()
}

/// Zenith angle of the satellite seen from the OGS. Errors when the
/// satellite sits at or below the local horizon (`u <= 0`); geographic map
/// drivers filter those cells.
pub fn zenith_angle(g: &LinkGeometry) -> Result<f64, Error> {
    let psi = central_angle(g);
    let u = g.r_sat() * psi.cos() - g.r_ogs();
    if u <= 0.0 {
        return Err(Error::input(format!(
            "satellite below horizon (central angle {:.3} rad)",
            psi
        )));
    }
    Ok((g.r_sat() * psi.sin()).atan2(u))
}

/// Line-of-sight distance OGS–satellite for a given zenith angle, km.
pub fn slant_range(theta: f64, g: &LinkGeometry) -> f64 {
    let r_ogs = g.r_ogs();
    let r_sat = g.r_sat();
    let c = theta.cos();
    (r_sat * r_sat + r_ogs * r_ogs * (c * c - 1.0)).sqrt() - r_ogs * c
}

/// Azimuth of the satellite, counterclockwise from east through north.
/// Undefined at the sub-satellite point.
pub fn azimuth(g: &LinkGeometry) -> Result<f64, Error> {
    let rho_e = g.r_sat() * g.dlon_rad().sin();
    let rho_n = -g.r_sat() * g.lat_rad().sin() * g.dlon_rad().cos();
    if rho_e == 0.0 && rho_n == 0.0 {
        return Err(Error::input("azimuth undefined at the sub-satellite point".into()));
    }
    Ok(rho_n.atan2(rho_e))
}

/// Maximum ground separation between two stations that both see the
/// satellite at zenith angle `theta`: twice the arc from the sub-satellite
/// point, `2 R_OGS asin(rho sin(theta) / R_sat)`.
pub fn ground_separation(theta: f64, g: &LinkGeometry) -> Result<f64, Error> {
    let rho = slant_range(theta, g);
    let arg = rho * theta.sin() / g.r_sat();
    if arg > 1.0 + 1e-12 {
        return Err(Error::input(format!("ground-separation geometry violated: asin({arg})")));
    }
    Ok(2.0 * g.r_ogs() * arg.clamp(-1.0, 1.0).asin())
}

/// Solve for the OGS placement (on the satellite meridian) that sees the
/// satellite at zenith angle `theta`, returning the central angle. Inverts
/// the zenith relation through the law of sines.
pub fn central_angle_for_zenith(theta: f64, g: &LinkGeometry) -> f64 {
    let rho = slant_range(theta, g);
    (rho * theta.sin() / g.r_sat()).clamp(-1.0, 1.0).asin()
}

/// Geometry positioned on the satellite meridian so that the satellite is
/// observed at zenith angle `theta` (latitude chosen equal to the central
/// angle).
pub fn geometry_at_zenith(theta: f64, template: &LinkGeometry) -> LinkGeometry {
    let psi = central_angle_for_zenith(theta, template);
    LinkGeometry {
        ogs_latitude_deg: psi.to_degrees(),
        ogs_longitude_deg: template.sat_longitude_deg,
        ..*template
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geo(lat: f64, lon: f64) -> LinkGeometry {
        LinkGeometry {
            ogs_latitude_deg: lat,
            ogs_longitude_deg: lon,
            ..LinkGeometry::default()
        }
    }

    // 3D unit-vector oracle for the central angle
    fn central_angle_dot_oracle(g: &LinkGeometry) -> f64 {
        let lat = g.ogs_latitude_deg.to_radians();
        let lon = g.ogs_longitude_deg.to_radians();
        let sat = g.sat_longitude_deg.to_radians();
        let ogs = [lat.cos() * lon.cos(), lat.cos() * lon.sin(), lat.sin()];
        let s = [sat.cos(), sat.sin(), 0.0];
        (ogs[0] * s[0] + ogs[1] * s[1] + ogs[2] * s[2]).clamp(-1.0, 1.0).acos()
    }

    #[test]
    fn central_angle_cases() {
        assert!(central_angle(&geo(0.0, 5.0)).abs() < 1e-15);
        assert!((central_angle(&geo(0.0, -85.0)) - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        let g = geo(45.0, -25.0); // dlon = 30 deg
        let psi = central_angle(&g);
        assert!((psi - (45f64.to_radians().cos() * 30f64.to_radians().cos()).acos()).abs() < 1e-15);
        assert!((psi - central_angle_dot_oracle(&g)).abs() < 1e-12);
    }

    #[test]
    fn zenith_angle_cases() {
        assert!(zenith_angle(&geo(0.0, 5.0)).unwrap().abs() < 1e-12);
        // beyond the horizon ring the call must fail
        assert!(zenith_angle(&geo(89.0, 5.0)).is_err());
    }

    #[test]
    fn slant_range_quadratic_root_oracle() {
        let g = LinkGeometry::default();
        // theta = 0, sea level: range equals the altitude
        assert!((slant_range(0.0, &g) - GEO_ALTITUDE_KM).abs() < 1e-9);
        // theta = 90 deg closed form
        let rho_h = slant_range(std::f64::consts::FRAC_PI_2, &g);
        let expect = (g.r_sat() * g.r_sat() - g.r_ogs() * g.r_ogs()).sqrt();
        assert!((rho_h - expect).abs() < 1e-9);
        assert!((rho_h - 41_679.0).abs() < 1.0, "rho(90deg) = {rho_h}");
        // oracle: the root must satisfy rho^2 + 2 rho R cos(theta) + (R^2 - Rs^2) = 0
        for i in 0..=80 {
            let theta = (i as f64).to_radians();
            let rho = slant_range(theta, &g);
            let resid = rho * rho + 2.0 * rho * g.r_ogs() * theta.cos()
                + (g.r_ogs() * g.r_ogs() - g.r_sat() * g.r_sat());
            assert!(
                resid.abs() < 1e-9 * g.r_sat() * g.r_sat(),
                "theta={i} deg resid={resid}"
            );
        }
    }

    #[test]
    fn slant_range_strictly_increasing() {
        let g = LinkGeometry::default();
        let mut prev = slant_range(0.0, &g);
        for i in 1..=90 {
            let rho = slant_range((i as f64).to_radians(), &g);
            assert!(rho > prev);
            prev = rho;
        }
    }

    // ENU-projection oracle for the azimuth
    fn azimuth_enu_oracle(g: &LinkGeometry) -> f64 {
        let lat = g.ogs_latitude_deg.to_radians();
        let lon = g.ogs_longitude_deg.to_radians();
        let sat = g.sat_longitude_deg.to_radians();
        let r_ogs = [
            g.r_ogs() * lat.cos() * lon.cos(),
            g.r_ogs() * lat.cos() * lon.sin(),
            g.r_ogs() * lat.sin(),
        ];
        let r_sat = [g.r_sat() * sat.cos(), g.r_sat() * sat.sin(), 0.0];
        let rho = [r_sat[0] - r_ogs[0], r_sat[1] - r_ogs[1], r_sat[2] - r_ogs[2]];
        let e = [-lon.sin(), lon.cos(), 0.0];
        let n = [-lat.sin() * lon.cos(), -lat.sin() * lon.sin(), lat.cos()];
        let rho_e = rho[0] * e[0] + rho[1] * e[1] + rho[2] * e[2];
        let rho_n = rho[0] * n[0] + rho[1] * n[1] + rho[2] * n[2];
        rho_n.atan2(rho_e)
    }

    #[test]
    fn azimuth_cases() {
        // equator, satellite due east
        assert!(azimuth(&geo(0.0, -85.0)).unwrap().abs() < 1e-12);
        // northern site on the satellite meridian: due south
        let a = azimuth(&geo(46.0, 5.0)).unwrap();
        assert!((a + std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        // generic point against the full ENU projection
        let g = geo(46.0, 10.0);
        assert!((azimuth(&g).unwrap() - azimuth_enu_oracle(&g)).abs() < 1e-12);
        // undefined at the sub-satellite point
        assert!(azimuth(&geo(0.0, 5.0)).is_err());
    }

    #[test]
    fn ground_separation_cases() {
        let g = LinkGeometry::default();
        assert_eq!(ground_separation(0.0, &g).unwrap(), 0.0);
        // law-of-sines oracle at 60 degrees
        let theta = 60f64.to_radians();
        let rho = slant_range(theta, &g);
        let psi = (rho * theta.sin() / g.r_sat()).asin();
        let d = ground_separation(theta, &g).unwrap();
        assert!((d - 2.0 * g.r_ogs() * psi).abs() < 1e-9);
        // horizon-geometry equivalence at 90 degrees
        let d90 = ground_separation(std::f64::consts::FRAC_PI_2, &g).unwrap();
        let expect = 2.0 * g.r_ogs() * (g.r_ogs() / g.r_sat()).acos();
        assert!((d90 - expect).abs() < 1e-6, "d90={d90} expect={expect}");
        // strictly increasing
        let mut prev = 0.0;
        for i in 1..=90 {
            let d = ground_separation((i as f64).to_radians(), &g).unwrap();
            assert!(d > prev);
            prev = d;
        }
    }

    #[test]
    fn zenith_round_trip() {
        let template = LinkGeometry::default();
        for i in 0..=80 {
            let theta = (i as f64).to_radians();
            let g = geometry_at_zenith(theta, &template);
            let back = zenith_angle(&g).unwrap();
            assert!((back - theta).abs() < 1e-9, "theta={i} deg back={back}");
        }
    }
}
