//! The Filippov sliding field and the closed orbits it produces on the torus.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::fields::is_inelastic;
use crate::{Error, PiecewiseSystem, Point, Result, EPS_SIGN, EPS_SURFACE};

/// `|ω|` at or below this is treated as the degenerate (all-equilibria) case.
pub const OMEGA_EPS: f64 = 1e-12;

/// Convex combination `(X₋h·X₊ − X₊h·X₋) / (X₋h − X₊h)` at a torus point.
pub fn filippov_sliding(sys: &PiecewiseSystem, p: &Point) -> Result<Point> {
    let residual = sys.torus.h_value(p).abs();
    if residual >= EPS_SURFACE {
        return Err(Error::NotOnSurface { residual });
    }
    let plus = sys.exterior_lie(p);
    let minus = sys.interior_lie(p);
    let den = minus - plus;
    if den.abs() < EPS_SIGN {
        return Err(Error::DegenerateDenominator);
    }
    Ok((sys.exterior.apply(p) * minus - sys.interior.apply(p) * plus) / den)
}

/// For an inelastic pair the sliding field is the rotation `(−ωy, ωx, 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlidingClosedForm {
    pub omega: f64,
}

impl SlidingClosedForm {
    pub fn field(&self, p: &Point) -> Point {
        Point::new(-self.omega * p.y, self.omega * p.x, 0.0)
    }

    pub fn is_degenerate(&self) -> bool {
        self.omega.abs() <= OMEGA_EPS
    }
}

pub fn sliding_closed_form(sys: &PiecewiseSystem) -> Result<SlidingClosedForm> {
    if !is_inelastic(sys) {
        return Err(Error::NotInelastic);
    }
    Ok(SlidingClosedForm { omega: sys.omega() })
}

/// A horizontal circle traversed by the sliding flow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedOrbit {
    pub z_level: f64,
    pub radius: f64,
    pub period: f64,
    /// `+1` counter-clockwise seen from `+z`, `−1` clockwise.
    pub orientation: i8,
}

impl ClosedOrbit {
    pub fn point(&self, angle: f64) -> Point {
        Point::new(
            self.radius * angle.cos(),
            self.radius * angle.sin(),
            self.z_level,
        )
    }
}

pub fn sliding_orbit_through(sys: &PiecewiseSystem, p: &Point) -> Result<ClosedOrbit> {
    let form = sliding_closed_form(sys)?;
    if form.is_degenerate() {
        return Err(Error::DegenerateOmega);
    }
    Ok(ClosedOrbit {
        z_level: p.z,
        radius: p.x.hypot(p.y),
        period: TAU / form.omega.abs(),
        orientation: if form.omega > 0.0 { 1 } else { -1 },
    })
}
