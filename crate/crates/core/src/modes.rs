//! Mode functions on the direction sphere and their boundary quantization.
//!
//! The free-space angular-spectrum basis is labelled by an integer
//! azimuthal number `l` and a real number `mu` conjugate to
//! `t = ln tan(theta/2)`:
//!
//! ```text
//! h_{l,mu}(theta, phi) = chi_mu(theta) e^{i l phi} / sqrt(2 pi),
//! chi_mu(theta) = e^{-i mu ln tan(theta/2)} / (sqrt(2 pi) sin(theta)).
//! ```
//!
//! A conducting paraboloid `eta = f` admits only radial functions whose
//! asymptotic phase fits the boundary, selecting `mu_m = m pi / ln(2 k f)`
//! and replacing the travelling `chi_mu` by real standing profiles that
//! vanish outside the polar window `[theta0, pi - theta0]` with
//! `tan(theta0/2) = 1/(2 k f)`.
//!
//! The electric mode field is recovered from the sphere by
//! `E = k/(2 pi)^{3/2} int dn e^{i k n.r} h(n) e_sigma(n)`, evaluated here
//! by adaptive spherical quadrature.

use crate::geometry::CartesianPoint;
use crate::quadrature::{integrate_sphere_seeded, IntegralResult, QuadratureSpec};
use crate::vec3::{CVec3, Vec3};
use crate::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::{PI, TAU};

/// Mirror configuration: focal length and wavenumber in reciprocal units.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MirrorSpec {
    /// Focal length (> 0), in the caller's length unit.
    pub f: f64,
    /// Wavenumber (> 0), in the inverse of the same unit.
    pub k: f64,
}

impl MirrorSpec {
    pub fn new(f: f64, k: f64) -> Result<Self> {
        if !(f > 0.0 && k > 0.0 && f.is_finite() && k.is_finite()) {
            return Err(Error::InvalidMirror { f, k });
        }
        Ok(MirrorSpec { f, k })
    }

    /// The dimensionless focal product k*f that controls all mirror physics.
    pub fn kf(self) -> f64 {
        self.k * self.f
    }

    /// L = ln(2 k f); positive exactly when discrete modes exist (kf > 1/2).
    pub fn ln_2kf(self) -> f64 {
        (2.0 * self.kf()).ln()
    }

    /// Mirror vertex (0, 0, -f), the point where standing waves vanish.
    pub fn vertex(self) -> CartesianPoint {
        CartesianPoint { x: 0.0, y: 0.0, z: -self.f }
    }
}

/// Label of a continuum mode: integer azimuthal number and real mu.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuousModeIndex {
    pub ell: i64,
    pub mu: f64,
}

/// Label of a boundary-quantized mode; m >= 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DiscreteModeIndex {
    pub ell: i64,
    pub m: u32,
}

impl DiscreteModeIndex {
    pub fn new(ell: i64, m: u32) -> Result<Self> {
        if m < 1 {
            return Err(Error::InvalidModeIndex("discrete mode number m must be >= 1".into()));
        }
        Ok(DiscreteModeIndex { ell, m })
    }
}

/// Which member of the transverse polarization pair a field uses.
///
/// `Azimuthal` is e1 (zero z-component), `Meridional` is e2 (the one that
/// couples to a z-oriented dipole).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarization {
    Azimuthal,
    Meridional,
}

/// A vector mode-field sample with its quadrature error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeFieldSample {
    pub value: CVec3,
    pub position: CartesianPoint,
    pub quadrature_error: f64,
    pub converged: bool,
}

/// The polar profile chi_mu of a continuum mode.
///
/// Singular at the poles; theta must lie strictly inside (0, pi).
pub fn chi_continuous(mu: f64, theta: f64) -> Result<Complex64> {
    if !(theta > 0.0 && theta < PI) {
        return Err(Error::SingularTheta { theta });
    }
    let t = (0.5 * theta).tan().ln();
    let magnitude = 1.0 / (TAU.sqrt() * theta.sin());
    Ok(Complex64::from_polar(magnitude, -mu * t))
}

/// Full angular mode function h_{l,mu}(theta, phi).
pub fn h_mode(idx: ContinuousModeIndex, theta: f64, phi: f64) -> Result<Complex64> {
    let chi = chi_continuous(idx.mu, theta)?;
    Ok(chi * Complex64::from_polar(1.0 / TAU.sqrt(), idx.ell as f64 * phi))
}

/// Cutoff polar angle theta0 = 2 arctan(1/(2 k f)).
///
/// Quantized modes vanish for theta outside [theta0, pi - theta0].
pub fn theta_cutoff(spec: &MirrorSpec) -> f64 {
    2.0 * (0.5 / spec.kf()).atan()
}

/// Quantized mode number mu_m = m pi / ln(2 k f); needs kf > 1/2.
pub fn mu_quantized(m: u32, spec: &MirrorSpec) -> Result<f64> {
    let idx = DiscreteModeIndex::new(0, m)?;
    let big_l = spec.ln_2kf();
    if big_l <= 0.0 {
        return Err(Error::FocalProductTooSmall { kf: spec.kf() });
    }
    Ok(idx.m as f64 * PI / big_l)
}

/// Standing polar profile of a quantized mode.
///
/// `sin(m pi t / L) / (sqrt(L) sin(theta))` inside the window
/// `[theta0, pi - theta0]` (with t = ln tan(theta/2), L = ln 2kf), zero
/// outside and exactly zero on the window boundary. The normalization
/// 1/sqrt(L) makes the family orthonormal under the sin(theta) measure.
pub fn chi_discrete(idx: DiscreteModeIndex, theta: f64, spec: &MirrorSpec) -> f64 {
    let theta0 = theta_cutoff(spec);
    if theta <= theta0 || theta >= PI - theta0 {
        return 0.0;
    }
    let big_l = spec.ln_2kf();
    let t = (0.5 * theta).tan().ln();
    (idx.m as f64 * PI * t / big_l).sin() / (big_l.sqrt() * theta.sin())
}

/// Asymptotic radial profile cos(mu ln(2 k eta) + k eta - alpha)/sqrt(eta)
/// of the separated parabolic solution, for eta far from the focus.
pub fn asymptotic_f(idx: ContinuousModeIndex, k: f64, eta: f64, alpha: f64) -> Result<f64> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::InvalidMirror { f: f64::NAN, k });
    }
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::NonPositiveRadial { eta });
    }
    let phase = idx.mu * (2.0 * k * eta).ln() + k * eta - alpha;
    Ok(phase.cos() / eta.sqrt())
}

/// sin(theta) * h_{l,mu}: the combination that enters sphere integrals.
///
/// The 1/sin(theta) of chi_mu cancels against the measure analytically,
/// leaving a pure phase of constant magnitude 1/(2 pi).
fn weighted_h(ell: i64, mu: f64, theta: f64, phi: f64) -> Complex64 {
    let t = (0.5 * theta).tan().ln();
    Complex64::from_polar(1.0 / TAU, -mu * t + ell as f64 * phi)
}

fn polarization_at(sigma: Polarization, theta: f64, phi: f64) -> Vec3 {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    match sigma {
        Polarization::Azimuthal => Vec3::new(sp, -cp, 0.0),
        Polarization::Meridional => Vec3::new(ct * cp, ct * sp, -st),
    }
}

/// Oscillation floor: 8 panels per period of the fastest phase across the
/// polar window (mu against t(theta), plus the plane-wave factor).
fn polar_seed(mu: f64, k_r: f64, window: (f64, f64)) -> usize {
    let t_of = |theta: f64| (0.5 * theta.clamp(1e-8, PI - 1e-8)).tan().ln();
    let t_span = (t_of(window.1) - t_of(window.0)).abs();
    let total_phase = mu.abs() * t_span + 2.0 * k_r * (window.1 - window.0);
    ((8.0 * total_phase / TAU).ceil() as usize).max(1)
}

/// One Cartesian component of the mode field, by spherical quadrature.
pub fn mode_field_component(
    sigma: Polarization,
    k: f64,
    idx: ContinuousModeIndex,
    r: CartesianPoint,
    component: usize,
    window: Option<(f64, f64)>,
    quad: &QuadratureSpec,
) -> Result<IntegralResult<Complex64>> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::InvalidMirror { f: f64::NAN, k });
    }
    let window = window.unwrap_or((0.0, PI));
    let rv = r.as_vec3();
    let seed = polar_seed(idx.mu, k * rv.norm(), window);
    let prefactor = k / TAU.powf(1.5);
    let integral = integrate_sphere_seeded(
        |theta: f64, phi: f64| {
            let (st, ct) = theta.sin_cos();
            let (sp, cp) = phi.sin_cos();
            let n = Vec3::new(st * cp, st * sp, ct);
            let pol = polarization_at(sigma, theta, phi);
            let pol_c = match component {
                0 => pol.x,
                1 => pol.y,
                _ => pol.z,
            };
            let plane = Complex64::from_polar(1.0, k * n.dot(rv));
            weighted_h(idx.ell, idx.mu, theta, phi) * plane * pol_c
        },
        window,
        seed,
        quad,
    )?;
    Ok(IntegralResult {
        value: integral.value * prefactor,
        error_estimate: integral.error_estimate * prefactor,
        converged: integral.converged,
        evaluations: integral.evaluations,
    })
}

/// The full vector mode field at a point, by spherical quadrature.
///
/// Nonconvergence is reported through the sample's `converged` flag with
/// the best available estimate.
pub fn evaluate_mode_field(
    sigma: Polarization,
    k: f64,
    idx: ContinuousModeIndex,
    r: CartesianPoint,
    window: Option<(f64, f64)>,
    quad: &QuadratureSpec,
) -> Result<ModeFieldSample> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::InvalidMirror { f: f64::NAN, k });
    }
    let window = window.unwrap_or((0.0, PI));
    let rv = r.as_vec3();
    let seed = polar_seed(idx.mu, k * rv.norm(), window);
    let prefactor = k / TAU.powf(1.5);
    let integral = integrate_sphere_seeded(
        |theta: f64, phi: f64| {
            let (st, ct) = theta.sin_cos();
            let (sp, cp) = phi.sin_cos();
            let n = Vec3::new(st * cp, st * sp, ct);
            let pol = polarization_at(sigma, theta, phi);
            let plane = Complex64::from_polar(1.0, k * n.dot(rv));
            CVec3::from_scaled(pol, weighted_h(idx.ell, idx.mu, theta, phi) * plane)
        },
        window,
        seed,
        quad,
    )?;
    Ok(ModeFieldSample {
        value: integral.value * prefactor,
        position: r,
        quadrature_error: integral.error_estimate * prefactor,
        converged: integral.converged,
    })
}
