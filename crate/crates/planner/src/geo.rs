//! Mercator projection of named locations onto a plane in meters.

use std::f64::consts::FRAC_PI_4;

use crate::error::{Error, Result};
use crate::mission::Location;

/// `(x, y)` in meters: `x = R * lon`, `y = R * ln(tan(pi/4 + lat/2))`.
pub fn project_location(loc: &Location) -> Result<(f64, f64)> {
    if !loc.lat.is_finite() || !loc.lon.is_finite() || loc.lat.abs() >= 90.0 {
        return Err(Error::domain(format!(
            "latitude {} is outside the projection domain (-90, 90)",
            loc.lat
        )));
    }
    let r = loc.body.radius();
    let phi = loc.lat.to_radians();
    let x = r * loc.lon.to_radians();
    let y = r * (FRAC_PI_4 + phi / 2.0).tan().ln();
    Ok((x, y))
}

/// Euclidean distance between projected coordinates.
pub fn distance(a: &Location, b: &Location) -> Result<f64> {
    if a.body != b.body {
        return Err(Error::domain("locations lie on different bodies"));
    }
    let (ax, ay) = project_location(a)?;
    let (bx, by) = project_location(b)?;
    Ok((ax - bx).hypot(ay - by))
}
