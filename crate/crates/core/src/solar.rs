//! Sun position after the NOAA solar calculator, clear-sky irradiance and
//! day length.

use libm::{acos, asin, cos, exp, fmod, sin, tan};

use crate::schema::SolarField;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolarPosition {
    /// Elevation above the horizon including atmospheric refraction, degrees.
    pub altitude: f64,
    /// Clockwise from north, degrees.
    pub azimuth: f64,
    pub declination: f64,
    pub hour_angle: f64,
    /// Hours between sunrise and sunset of the surrounding day.
    pub daylight_hours: f64,
}

fn rad(x: f64) -> f64 {
    x.to_radians()
}

fn deg(x: f64) -> f64 {
    x.to_degrees()
}

fn wrap360(x: f64) -> f64 {
    let r = fmod(x, 360.0);
    if r < 0.0 {
        r + 360.0
    } else {
        r
    }
}

fn refraction(elevation: f64) -> f64 {
    let arcsec = if elevation > 85.0 {
        0.0
    } else if elevation > 5.0 {
        let t = tan(rad(elevation));
        58.1 / t - 0.07 / (t * t * t) + 0.000086 / (t * t * t * t * t)
    } else if elevation > -0.575 {
        let e = elevation;
        1735.0 + e * (-518.2 + e * (103.4 + e * (-12.79 + e * 0.711)))
    } else {
        -20.772 / tan(rad(elevation))
    };
    arcsec / 3600.0
}

/// Position of the sun at `unix_seconds` (UTC) seen from `latitude`, `longitude`.
pub fn solar_position(unix_seconds: f64, latitude: f64, longitude: f64) -> SolarPosition {
    let jd = unix_seconds / 86400.0 + 2440587.5;
    let jc = (jd - 2451545.0) / 36525.0;

    let mean_long = wrap360(280.46646 + jc * (36000.76983 + jc * 0.0003032));
    let mean_anom = 357.52911 + jc * (35999.05029 - 0.0001537 * jc);
    let ecc = 0.016708634 - jc * (0.000042037 + 0.0000001267 * jc);
    let m = rad(mean_anom);
    let center = sin(m) * (1.914602 - jc * (0.004817 + 0.000014 * jc))
        + sin(2.0 * m) * (0.019993 - 0.000101 * jc)
        + sin(3.0 * m) * 0.000289;
    let true_long = mean_long + center;
    let omega = rad(125.04 - 1934.136 * jc);
    let app_long = true_long - 0.00569 - 0.00478 * sin(omega);
    let mean_obliq =
        23.0 + (26.0 + (21.448 - jc * (46.815 + jc * (0.00059 - jc * 0.001813))) / 60.0) / 60.0;
    let obliq = mean_obliq + 0.00256 * cos(omega);
    let decl = asin(sin(rad(obliq)) * sin(rad(app_long)));

    let y = tan(rad(obliq) / 2.0) * tan(rad(obliq) / 2.0);
    let l0 = rad(mean_long);
    let eot = 4.0
        * deg(
            y * sin(2.0 * l0) - 2.0 * ecc * sin(m) + 4.0 * ecc * y * sin(m) * cos(2.0 * l0)
                - 0.5 * y * y * sin(4.0 * l0)
                - 1.25 * ecc * ecc * sin(2.0 * m),
        );

    let minutes = fmod(unix_seconds, 86400.0) / 60.0;
    let minutes = if minutes < 0.0 {
        minutes + 1440.0
    } else {
        minutes
    };
    let true_solar = fmod(minutes + eot + 4.0 * longitude, 1440.0);
    let true_solar = if true_solar < 0.0 {
        true_solar + 1440.0
    } else {
        true_solar
    };
    let hour_angle = true_solar / 4.0 - 180.0;

    let lat = rad(latitude);
    let cos_zen =
        (sin(lat) * sin(decl) + cos(lat) * cos(decl) * cos(rad(hour_angle))).clamp(-1.0, 1.0);
    let zenith = acos(cos_zen);
    let elevation = 90.0 - deg(zenith);
    let altitude = elevation + refraction(elevation);

    let denom = cos(lat) * sin(zenith);
    let azimuth = if denom.abs() < 1e-12 {
        if latitude >= deg(decl) {
            180.0
        } else {
            0.0
        }
    } else {
        let a = deg(acos(
            ((sin(lat) * cos(zenith) - sin(decl)) / denom).clamp(-1.0, 1.0),
        ));
        if hour_angle > 0.0 {
            wrap360(a + 180.0)
        } else {
            wrap360(540.0 - a)
        }
    };

    let sunrise_arg = cos(rad(90.833)) / (cos(lat) * cos(decl)) - tan(lat) * tan(decl);
    let daylight_hours = 8.0 * deg(acos(sunrise_arg.clamp(-1.0, 1.0))) / 60.0;

    SolarPosition {
        altitude,
        azimuth,
        declination: deg(decl),
        hour_angle,
        daylight_hours,
    }
}

/// Haurwitz clear-sky global horizontal irradiance in W/m².
pub fn clear_sky_ghi(altitude: f64) -> f64 {
    if altitude <= 0.0 {
        return 0.0;
    }
    let s = sin(rad(altitude));
    1098.0 * s * exp(-0.057 / s)
}

/// Solar feature for the UTC epoch hour `hour`, evaluated at its midpoint.
pub fn solar_field(field: SolarField, hour: i64, latitude: f64, longitude: f64) -> f64 {
    let p = solar_position(hour as f64 * 3600.0 + 1800.0, latitude, longitude);
    match field {
        SolarField::Altitude => p.altitude,
        SolarField::Azimuth => p.azimuth,
        SolarField::ClearSkyRadiation => clear_sky_ghi(p.altitude),
        SolarField::DaylightHours => p.daylight_hours,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equinox_noon_on_equator_is_overhead() {
        // 2014-03-20 12:07 UTC
        let p = solar_position(1_395_317_220.0, 0.0, 0.0);
        assert!((p.altitude - 89.86).abs() < 0.5, "{}", p.altitude);
        assert!((p.daylight_hours - 12.1).abs() < 0.1);
    }

    #[test]
    fn polar_day_and_night() {
        // 2014-06-21 12:00 UTC
        let t = 1_403_352_000.0;
        assert_eq!(solar_position(t, 80.0, 0.0).daylight_hours, 24.0);
        assert_eq!(solar_position(t, -80.0, 0.0).daylight_hours, 0.0);
    }

    #[test]
    fn irradiance_is_zero_below_horizon() {
        assert_eq!(clear_sky_ghi(-3.0), 0.0);
        assert_eq!(clear_sky_ghi(0.0), 0.0);
        let at_zenith = clear_sky_ghi(90.0);
        assert!((at_zenith - 1098.0 * (-0.057f64).exp()).abs() < 1e-9);
        assert!(clear_sky_ghi(30.0) < at_zenith);
    }
}
