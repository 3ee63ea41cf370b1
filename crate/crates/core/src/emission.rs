//! Spontaneous-emission rates for a z-oriented dipole inside the mirror.
//!
//! The mirror replaces travelling plane waves by standing waves that vanish
//! at the vertex, so the rate relative to free space becomes
//!
//! ```text
//! eta(x, y, z) = 3/(4 pi) int dphi int dtheta sin^3(theta)
//!                * sin^2{ k [ (x cos phi + y sin phi) sin(theta)
//!                           + (z + f) cos(theta) ] },
//! ```
//!
//! normalized so that replacing the standing-wave factor by its mean gives
//! exactly 1. On the axis the integral collapses to the closed form
//!
//! ```text
//! eta(a) = 1 + 3 cos(2a)/(4 a^2) - 3 sin(2a)/(8 a^3),   a = k (z + f),
//! ```
//!
//! which this module evaluates with a series branch near the vertex where
//! the closed form cancels catastrophically.

use crate::geometry::{to_parabolic, CartesianPoint, Direction};
use crate::modes::{theta_cutoff, MirrorSpec};
use crate::parallel::{map_collect, map_collect_seq};
use crate::quadrature::{integrate_sphere_seeded, QuadratureSpec};
use crate::{Error, Result};
use std::f64::consts::{PI, TAU};

/// Emitter location, always with dipole along +z.
///
/// The point must lie in the closed mirror region eta <= f; the vertex
/// itself is admitted (the field has a node there).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct AtomPosition {
    pub point: CartesianPoint,
}

impl AtomPosition {
    pub fn new(point: CartesianPoint, spec: &MirrorSpec) -> Result<Self> {
        let eta = to_parabolic(point).eta;
        if eta > spec.f {
            return Err(Error::OutsideMirror { eta, f: spec.f });
        }
        Ok(AtomPosition { point })
    }

    /// On-axis position at height z above the focus.
    pub fn on_axis(z: f64, spec: &MirrorSpec) -> Result<Self> {
        Self::new(CartesianPoint::new(0.0, 0.0, z)?, spec)
    }
}

/// Dimensionless rate ratio eta = rate/free-space rate, with quadrature
/// error bound and an optional SI-valued free-space rate.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct EmissionResult {
    pub eta: f64,
    pub quad_error: f64,
    /// Free-space rate in 1/s; set only when SI constants are supplied.
    pub gamma0_si: Option<f64>,
    pub converged: bool,
}

impl EmissionResult {
    /// Attach the SI free-space rate for dipole bundle d^2/(hbar eps0),
    /// with k in reciprocal meters.
    pub fn with_si_gamma0(mut self, k_per_m: f64, dipole_sq_over_hbar_eps0: f64) -> Result<Self> {
        self.gamma0_si = Some(gamma_free(k_per_m, Some(dipole_sq_over_hbar_eps0))?);
        Ok(self)
    }
}

/// One sample of an axial scan.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ScanPoint {
    pub z: f64,
    /// Dimensionless distance a = k (z + f) from the vertex.
    pub a: f64,
    pub eta_closed: f64,
    pub eta_quad: Option<f64>,
    pub quad_error: Option<f64>,
}

/// Axial scan of the rate ratio on a strictly increasing z-grid.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ScanResult {
    pub points: Vec<ScanPoint>,
}

/// Free-space decay rate.
///
/// With the SI bundle d^2/(hbar eps0) supplied this is the full
/// k^3 d^2/(3 pi hbar eps0); without it, the dimensionless coefficient
/// 1/(3 pi) that all rate ratios divide out.
pub fn gamma_free(k: f64, dipole_sq_over_hbar_eps0: Option<f64>) -> Result<f64> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::InvalidMirror { f: f64::NAN, k });
    }
    match dipole_sq_over_hbar_eps0 {
        Some(bundle) => Ok(bundle * k.powi(3) / (3.0 * PI)),
        None => Ok(1.0 / (3.0 * PI)),
    }
}

// Below this the closed form loses ~6 digits to cancellation; the series
// truncation error at the switch point is ~1e-14 relative.
const ETA_SERIES_THRESHOLD: f64 = 0.05;

/// Closed-form on-axis rate ratio as a function of a = k (z + f).
pub fn eta_on_axis(a: f64) -> Result<f64> {
    if !(a >= 0.0 && a.is_finite()) {
        return Err(Error::NegativeDistance { a });
    }
    if a < ETA_SERIES_THRESHOLD {
        let a2 = a * a;
        Ok(a2 * (2.0 / 5.0 - a2 * (2.0 / 35.0 - a2 * (4.0 / 945.0))))
    } else {
        let two_a = 2.0 * a;
        Ok(1.0 + 3.0 * two_a.cos() / (4.0 * a * a) - 3.0 * two_a.sin() / (8.0 * a * a * a))
    }
}

/// Standing-wave phase argument k n.(r - vertex) for a direction.
fn standing_phase(k: f64, point: CartesianPoint, f: f64, theta: f64, phi: f64) -> f64 {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    k * ((point.x * cp + point.y * sp) * st + (point.z + f) * ct)
}

/// Per-(theta, phi) emission density; its full-sphere integral is eta.
pub fn angular_density(spec: &MirrorSpec, pos: &AtomPosition, d: Direction) -> f64 {
    let s = standing_phase(spec.k, pos.point, spec.f, d.theta, d.phi);
    3.0 / (4.0 * PI) * d.theta.sin().powi(3) * s.sin().powi(2)
}

fn eta_quadrature_in_window(
    spec: &MirrorSpec,
    pos: &AtomPosition,
    window: (f64, f64),
    quad: &QuadratureSpec,
) -> Result<EmissionResult> {
    let p = pos.point;
    let dist = {
        let dz = p.z + spec.f;
        (p.x * p.x + p.y * p.y + dz * dz).sqrt()
    };
    // sin^2 oscillates at twice the plane-wave phase rate.
    let seed = ((8.0 * 2.0 * spec.k * dist * (window.1 - window.0) / TAU).ceil() as usize).max(1);
    let integral = integrate_sphere_seeded(
        |theta: f64, phi: f64| {
            let s = standing_phase(spec.k, p, spec.f, theta, phi);
            theta.sin().powi(3) * s.sin().powi(2)
        },
        window,
        seed,
        quad,
    )?;
    let norm = 3.0 / (4.0 * PI);
    Ok(EmissionResult {
        eta: norm * integral.value,
        quad_error: norm * integral.error_estimate,
        gamma0_si: None,
        converged: integral.converged,
    })
}

/// Rate ratio by full spherical quadrature of the standing-wave density.
pub fn eta_quadrature(
    spec: &MirrorSpec,
    pos: &AtomPosition,
    quad: &QuadratureSpec,
) -> Result<EmissionResult> {
    eta_quadrature_in_window(spec, pos, (0.0, PI), quad)
}

/// Rate ratio with the polar integration restricted to the quantized-mode
/// window [theta0, pi - theta0]; differs from the full result by at most
/// twice the cutoff correction.
pub fn eta_quadrature_windowed(
    spec: &MirrorSpec,
    pos: &AtomPosition,
    quad: &QuadratureSpec,
) -> Result<EmissionResult> {
    let theta0 = theta_cutoff(spec);
    eta_quadrature_in_window(spec, pos, (theta0, PI - theta0), quad)
}

/// Relative free-space rate weight excluded by the quantized-mode window:
/// Delta = (3/2) int_0^theta0 sin^3 = 2 x^4 (3 + x^2) / (1 + x^2)^3 with
/// x = 1/(2 k f); asymptotically (3/8) theta0^4, i.e. of order (k f)^-4.
pub fn cutoff_correction(spec: &MirrorSpec) -> Result<f64> {
    let kf = spec.kf();
    if kf < 0.5 {
        return Err(Error::FocalProductTooSmall { kf });
    }
    let x = 0.5 / kf;
    let x2 = x * x;
    Ok(2.0 * x2 * x2 * (3.0 + x2) / (1.0 + x2).powi(3))
}

fn scan_grid(spec: &MirrorSpec, z_min: f64, z_max: f64, n_points: usize) -> Result<Vec<f64>> {
    if !(z_min.is_finite() && z_max.is_finite()) {
        return Err(Error::NonFinite("scan range"));
    }
    if z_min < -spec.f {
        return Err(Error::InvalidScan(format!(
            "z_min = {z_min} lies behind the vertex z = {}",
            -spec.f
        )));
    }
    if !(z_min < z_max) {
        return Err(Error::InvalidScan(format!("need z_min < z_max, got [{z_min}, {z_max}]")));
    }
    if n_points < 2 {
        return Err(Error::InvalidScan(format!("need at least 2 points, got {n_points}")));
    }
    let step = (z_max - z_min) / (n_points - 1) as f64;
    Ok((0..n_points)
        .map(|i| if i + 1 == n_points { z_max } else { z_min + step * i as f64 })
        .collect())
}

fn scan_point(
    spec: &MirrorSpec,
    z: f64,
    with_quadrature: bool,
    quad: &QuadratureSpec,
) -> Result<ScanPoint> {
    // Grid rounding may put a infinitesimally below 0 at the vertex.
    let a = (spec.k * (z + spec.f)).max(0.0);
    let eta_closed = eta_on_axis(a)?;
    let (eta_quad, quad_error) = if with_quadrature {
        let pos = AtomPosition::on_axis(z, spec)?;
        let r = eta_quadrature(spec, &pos, quad)?;
        (Some(r.eta), Some(r.quad_error))
    } else {
        (None, None)
    };
    Ok(ScanPoint { z, a, eta_closed, eta_quad, quad_error })
}

/// Tabulate the on-axis rate ratio on a uniform z-grid, optionally
/// cross-checked by quadrature at every point.
///
/// Points are independent; with the `parallel` feature they are computed
/// on the rayon pool and assembled in grid order.
pub fn decay_scan(
    spec: &MirrorSpec,
    z_min: f64,
    z_max: f64,
    n_points: usize,
    with_quadrature: bool,
    quad: &QuadratureSpec,
) -> Result<ScanResult> {
    let zs = scan_grid(spec, z_min, z_max, n_points)?;
    let points = map_collect(&zs, |&z| scan_point(spec, z, with_quadrature, quad));
    Ok(ScanResult { points: points.into_iter().collect::<Result<_>>()? })
}

/// Sequential variant of [`decay_scan`]; the benches compare the two and
/// the results are bit-identical.
pub fn decay_scan_seq(
    spec: &MirrorSpec,
    z_min: f64,
    z_max: f64,
    n_points: usize,
    with_quadrature: bool,
    quad: &QuadratureSpec,
) -> Result<ScanResult> {
    let zs = scan_grid(spec, z_min, z_max, n_points)?;
    let points = map_collect_seq(&zs, |&z| scan_point(spec, z, with_quadrature, quad));
    Ok(ScanResult { points: points.into_iter().collect::<Result<_>>()? })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate_sphere;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_2;

    fn spec(f: f64, k: f64) -> MirrorSpec {
        MirrorSpec::new(f, k).unwrap()
    }

    #[test]
    fn free_space_rate_coefficient() {
        assert_abs_diff_eq!(gamma_free(1.0, None).unwrap(), 1.0 / (3.0 * PI), epsilon = 1e-16);
        // k^3 scaling.
        let g1 = gamma_free(1.0, Some(2.5)).unwrap();
        let g2 = gamma_free(2.0, Some(2.5)).unwrap();
        assert_abs_diff_eq!(g2 / g1, 8.0, epsilon = 1e-12);
        assert!(gamma_free(0.0, None).is_err());
    }

    #[test]
    fn free_space_rate_from_quadrature() {
        // Unit plane-wave modulus: (1/(2 pi)^2) (1/2) int sin^3 = 1/(3 pi).
        let quad = QuadratureSpec { rel_tol: 1e-13, ..Default::default() };
        let r = integrate_sphere(|t: f64, _| t.sin().powi(3), (0.0, PI), &quad).unwrap();
        let gamma = r.value / (TAU * TAU) * 0.5;
        let exact = gamma_free(1.0, None).unwrap();
        assert!(r.converged);
        assert!((gamma - exact).abs() / exact < 1e-12);
    }

    #[test]
    fn eta_on_axis_spot_values() {
        assert_eq!(eta_on_axis(0.0).unwrap(), 0.0);
        let v = eta_on_axis(FRAC_PI_2).unwrap();
        assert_abs_diff_eq!(v, 1.0 - 3.0 / (PI * PI), epsilon = 1e-14);
        let v = eta_on_axis(1e-3).unwrap();
        assert_abs_diff_eq!(v, 4.0e-7, epsilon = 1e-12);
        assert!(eta_on_axis(-1e-9).is_err());
        assert!(eta_on_axis(f64::NAN).is_err());
    }

    #[test]
    fn eta_small_distance_law() {
        for a in [1e-3, 3e-3, 1e-2] {
            let v = eta_on_axis(a).unwrap();
            assert!(
                (v - 0.4 * a * a).abs() <= a.powi(4),
                "a={a}: {} vs {}",
                v,
                0.4 * a * a
            );
        }
    }

    #[test]
    fn eta_far_field_envelope() {
        for a in [1e2, 1e3, 1e4] {
            let v = eta_on_axis(a).unwrap();
            let bound = 3.0 / (4.0 * a * a) + 3.0 / (8.0 * a * a * a);
            assert!((v - 1.0).abs() <= bound, "a={a}");
        }
    }

    #[test]
    fn eta_series_meets_closed_form_at_switch() {
        // Both branches agree near the threshold to full series accuracy.
        for a in [0.049f64, 0.0500001, 0.051] {
            let two_a = 2.0 * a;
            let closed = 1.0 + 3.0 * two_a.cos() / (4.0 * a * a) - 3.0 * two_a.sin() / (8.0 * a.powi(3));
            assert!((eta_on_axis(a).unwrap() - closed).abs() < 1e-11);
        }
    }

    #[test]
    fn quadrature_matches_closed_form_on_axis() {
        let s = spec(2.0, FRAC_PI_2); // a = k(z+f) = pi/2 at z = -1
        let pos = AtomPosition::on_axis(-1.0, &s).unwrap();
        let quad = QuadratureSpec { rel_tol: 1e-12, phi_nodes: 16, ..Default::default() };
        let r = eta_quadrature(&s, &pos, &quad).unwrap();
        assert!(r.converged);
        assert!((r.eta - eta_on_axis(FRAC_PI_2).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn rate_vanishes_at_vertex() {
        let s = spec(2.0, 3.0);
        let pos = AtomPosition::on_axis(-s.f, &s).unwrap();
        let quad = QuadratureSpec { phi_nodes: 16, ..Default::default() };
        let r = eta_quadrature(&s, &pos, &quad).unwrap();
        assert!(r.eta.abs() <= 1e-10);
    }

    #[test]
    fn free_space_normalization_of_density() {
        // The standing-wave factor averaged to 1/2 must give eta = 1.
        let quad = QuadratureSpec { rel_tol: 1e-13, ..Default::default() };
        let r = integrate_sphere(|t: f64, _| t.sin().powi(3) * 0.5, (0.0, PI), &quad).unwrap();
        assert!((3.0 / (4.0 * PI) * r.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn density_dark_directions() {
        let s = spec(2.0, 5.0);
        let pos = AtomPosition::on_axis(0.1, &s).unwrap();
        // On-axis phase a cos(theta): equator is always dark.
        let d = Direction::new(FRAC_PI_2, 1.0).unwrap();
        assert_abs_diff_eq!(angular_density(&s, &pos, d), 0.0, epsilon = 1e-30);
        // Any direction with k n.(r - vertex) = n pi is dark.
        let a = s.k * (0.1 + s.f);
        let ct = PI / a; // needs a > pi, true here
        let d = Direction::new(ct.acos(), 2.5).unwrap();
        let v = angular_density(&s, &pos, d);
        assert!(v.abs() < 1e-25, "density {v}");
    }

    #[test]
    fn density_integrates_to_eta() {
        let s = spec(2.0, 2.0);
        let pos =
            AtomPosition::new(CartesianPoint::new(0.3, -0.2, 0.5).unwrap(), &s).unwrap();
        let quad = QuadratureSpec::default();
        let direct = eta_quadrature(&s, &pos, &quad).unwrap();
        let via_density = integrate_sphere(
            |theta: f64, phi: f64| {
                angular_density(&s, &pos, Direction { theta, phi })
            },
            (0.0, PI),
            &quad,
        )
        .unwrap();
        assert!((via_density.value - direct.eta).abs() < 1e-9);
    }

    #[test]
    fn cutoff_correction_values() {
        assert_abs_diff_eq!(cutoff_correction(&spec(1.0, 0.5)).unwrap(), 1.0, epsilon = 1e-14);
        let d = cutoff_correction(&spec(1.0, 1e4)).unwrap();
        assert!((d - 3.75e-17).abs() / 3.75e-17 < 1e-2, "Delta = {d:e}");
        // Quartic scaling.
        let lo = cutoff_correction(&spec(1.0, 1e3)).unwrap();
        let hi = cutoff_correction(&spec(1.0, 2e3)).unwrap();
        assert!((lo / hi - 16.0).abs() < 1e-4);
        assert!(cutoff_correction(&spec(1.0, 0.4)).is_err());
    }

    #[test]
    fn cutoff_matches_direct_quadrature_at_moderate_kf() {
        let s = spec(1.0, 5.0);
        let theta0 = theta_cutoff(&s);
        let quad = QuadratureSpec { rel_tol: 1e-13, ..Default::default() };
        let cap =
            crate::quadrature::integrate_interval(|t: f64| t.sin().powi(3), 0.0, theta0, &quad)
                .unwrap();
        assert!((cutoff_correction(&s).unwrap() - 1.5 * cap.value).abs() < 1e-13);
    }

    #[test]
    fn scan_grid_and_errors() {
        let s = spec(2.0, PI);
        let quad = QuadratureSpec::default();
        let scan = decay_scan(&s, -2.0, 2.0, 5, false, &quad).unwrap();
        assert_eq!(scan.points.len(), 5);
        assert!(scan.points.windows(2).all(|w| w[0].z < w[1].z));
        assert_eq!(scan.points[0].a, 0.0);
        assert_eq!(scan.points[0].eta_closed, 0.0);

        assert!(decay_scan(&s, -2.5, 2.0, 5, false, &quad).is_err());
        assert!(decay_scan(&s, 1.0, 1.0, 5, false, &quad).is_err());
        assert!(decay_scan(&s, 0.0, 1.0, 1, false, &quad).is_err());
    }

    #[test]
    fn scan_oscillation_period_is_pi_over_k() {
        // k = pi / mm: maxima of eta spaced by 1 mm.
        let s = spec(2.0, PI);
        let scan = decay_scan(&s, -2.0, 8.0, 2001, false, &QuadratureSpec::default()).unwrap();
        let eta: Vec<f64> = scan.points.iter().map(|p| p.eta_closed).collect();
        // Early peaks shift by O(1/a); measure spacing where a = pi(z+2)
        // is large enough that the deviation sits below 1%.
        let mut maxima = Vec::new();
        for i in 1..eta.len() - 1 {
            if eta[i] > eta[i - 1] && eta[i] > eta[i + 1] && eta[i] > 1.0 && scan.points[i].z > 2.0
            {
                maxima.push(scan.points[i].z);
            }
        }
        assert!(maxima.len() >= 3);
        for w in maxima.windows(2) {
            assert!((w[1] - w[0] - 1.0).abs() < 0.02, "spacing {}", w[1] - w[0]);
        }
    }

    #[test]
    fn parallel_and_sequential_scans_agree_bitwise() {
        let s = spec(2.0, 4.0);
        let quad = QuadratureSpec { phi_nodes: 16, ..Default::default() };
        let a = decay_scan(&s, -2.0, 1.0, 9, true, &quad).unwrap();
        let b = decay_scan_seq(&s, -2.0, 1.0, 9, true, &quad).unwrap();
        assert_eq!(a, b);
        for (p, q) in a.points.iter().zip(&b.points) {
            assert_eq!(p.eta_quad.unwrap().to_bits(), q.eta_quad.unwrap().to_bits());
        }
    }

    #[test]
    fn atom_position_must_stay_inside() {
        let s = spec(2.0, 1.0);
        assert!(AtomPosition::on_axis(-s.f, &s).is_ok());
        assert!(AtomPosition::on_axis(-s.f - 1e-9, &s).is_err());
        assert!(AtomPosition::new(CartesianPoint::new(5.0, 0.0, -1.9).unwrap(), &s).is_err());
    }

    #[test]
    fn si_rate_attachment() {
        let r = EmissionResult { eta: 1.0, quad_error: 0.0, gamma0_si: None, converged: true };
        let with = r.with_si_gamma0(2.0, 3.0).unwrap();
        assert_abs_diff_eq!(with.gamma0_si.unwrap(), 8.0 * 3.0 / (3.0 * PI), epsilon = 1e-12);
    }
}
