//! Coordinate systems and the direction sphere.
//!
//! Parabolic coordinates (xi, eta, phi) relate to Cartesian ones through
//!
//! ```text
//! x = 2 sqrt(xi eta) cos(phi),  y = 2 sqrt(xi eta) sin(phi),  z = xi - eta,
//! ```
//!
//! so that r = xi + eta and the mirror is the level surface eta = f with
//! its focus at the origin and vertex at (0, 0, -f). Directions on the
//! unit sphere carry the two transverse polarization vectors used by the
//! angular-spectrum mode expansion.

use crate::modes::MirrorSpec;
use crate::vec3::Vec3;
use crate::{Error, Result};
use std::f64::consts::{PI, TAU};

/// A point in Cartesian coordinates, lengths in the caller's unit.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CartesianPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl CartesianPoint {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite() && z.is_finite()) {
            return Err(Error::NonFinite("CartesianPoint"));
        }
        Ok(CartesianPoint { x, y, z })
    }

    pub fn as_vec3(self) -> Vec3 {
        Vec3::new(self.x, self.y, self.z)
    }

    pub fn r(self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }
}

/// A point in parabolic coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParabolicPoint {
    /// xi >= 0; xi = r on the positive z-axis.
    pub xi: f64,
    /// eta >= 0; the mirror surface is eta = f.
    pub eta: f64,
    /// Azimuth in [0, 2*pi); 0 by convention on the z-axis.
    pub phi: f64,
}

impl ParabolicPoint {
    pub fn new(xi: f64, eta: f64, phi: f64) -> Result<Self> {
        if !(xi.is_finite() && eta.is_finite() && phi.is_finite()) {
            return Err(Error::NonFinite("ParabolicPoint"));
        }
        if xi < 0.0 || eta < 0.0 {
            return Err(Error::NegativeParabolic { xi, eta });
        }
        Ok(ParabolicPoint { xi, eta, phi: wrap_angle(phi) })
    }
}

/// Wrap an angle into [0, 2*pi).
fn wrap_angle(phi: f64) -> f64 {
    let mut w = phi % TAU;
    if w < 0.0 {
        w += TAU;
    }
    // -1e-17 % TAU can round to TAU itself.
    if w >= TAU {
        w = 0.0;
    }
    w
}

/// A direction on the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    /// Polar angle from the +z axis, clamped to [0, pi].
    pub theta: f64,
    /// Azimuth in [0, 2*pi).
    pub phi: f64,
}

impl Direction {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(theta.is_finite() && phi.is_finite()) {
            return Err(Error::NonFinite("Direction"));
        }
        Ok(Direction { theta: theta.clamp(0.0, PI), phi: wrap_angle(phi) })
    }
}

/// The two transverse polarization vectors attached to a direction.
///
/// Together with the direction vector they form a right-handed
/// orthonormal triad: e1 x e2 = n.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizationPair {
    /// In-plane (azimuthal) polarization; its z-component vanishes.
    pub e1: Vec3,
    /// Meridional polarization; its z-component is -sin(theta).
    pub e2: Vec3,
}

/// Cartesian to parabolic coordinates.
///
/// Uses the closed inverse xi = (r+z)/2, eta = (r-z)/2, rearranged so the
/// smaller of the two is recovered from 4*xi*eta = x^2 + y^2 instead of a
/// cancelling subtraction. On the z-axis phi is undefined; 0 is returned.
pub fn to_parabolic(p: CartesianPoint) -> ParabolicPoint {
    let rho_sq = p.x * p.x + p.y * p.y;
    let r = (rho_sq + p.z * p.z).sqrt();
    let (xi, eta) = if r == 0.0 {
        (0.0, 0.0)
    } else if p.z >= 0.0 {
        let xi = 0.5 * (r + p.z);
        (xi, if xi > 0.0 { rho_sq / (4.0 * xi) } else { 0.0 })
    } else {
        let eta = 0.5 * (r - p.z);
        (if eta > 0.0 { rho_sq / (4.0 * eta) } else { 0.0 }, eta)
    };
    let phi = if rho_sq == 0.0 { 0.0 } else { wrap_angle(p.y.atan2(p.x)) };
    ParabolicPoint { xi, eta, phi }
}

/// Parabolic to Cartesian coordinates; the inverse of [`to_parabolic`].
pub fn to_cartesian(p: ParabolicPoint) -> Result<CartesianPoint> {
    if p.xi < 0.0 || p.eta < 0.0 {
        return Err(Error::NegativeParabolic { xi: p.xi, eta: p.eta });
    }
    let rho = 2.0 * (p.xi * p.eta).sqrt();
    CartesianPoint::new(rho * p.phi.cos(), rho * p.phi.sin(), p.xi - p.eta)
}

/// Whether a point lies on the mirror surface eta = f, within `tol`.
pub fn on_mirror(p: CartesianPoint, spec: &MirrorSpec, tol: f64) -> Result<bool> {
    if !(tol > 0.0) {
        return Err(Error::NonFinite("on_mirror tolerance must be positive"));
    }
    Ok((to_parabolic(p).eta - spec.f).abs() <= tol)
}

/// Unit vector (sin t cos p, sin t sin p, cos t) for a direction.
pub fn direction_vector(d: Direction) -> Vec3 {
    let (st, ct) = (d.theta.sin(), d.theta.cos());
    let (sp, cp) = (d.phi.sin(), d.phi.cos());
    Vec3::new(st * cp, st * sp, ct)
}

/// The transverse polarization basis for a direction.
///
/// e1 = (sin p, -cos p, 0), e2 = (cos t cos p, cos t sin p, -sin t).
pub fn polarization_basis(d: Direction) -> PolarizationPair {
    let (st, ct) = (d.theta.sin(), d.theta.cos());
    let (sp, cp) = (d.phi.sin(), d.phi.cos());
    PolarizationPair {
        e1: Vec3::new(sp, -cp, 0.0),
        e2: Vec3::new(ct * cp, ct * sp, -st),
    }
}
