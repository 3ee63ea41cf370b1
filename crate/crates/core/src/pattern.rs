//! Far-field interference pattern on a screen perpendicular to the axis.
//!
//! The paraboloid collimates a ray leaving the focus at polar angle theta
//! into a ray parallel to the axis at transverse radius
//! `rho = 2 f tan(theta/2)`, so any screen beyond the aperture sees the
//! same pattern: the emission angular density mapped through that ray
//! picture. Directions whose standing-wave factor vanishes produce dark
//! rings; for an on-axis atom they sit where `k (z+f) cos(theta) = n pi`.
//!
//! No diffraction propagation is attempted; intensities are exact images
//! of the angular density, per unit screen area by default or per solid
//! angle on request.

use crate::emission::{angular_density, AtomPosition};
use crate::geometry::Direction;
use crate::modes::{theta_cutoff, MirrorSpec};
use crate::parallel::{map_collect, map_collect_seq};
use crate::{Error, Result};
use std::f64::consts::{PI, TAU};

/// Polar sampling of the screen: cell-centered radii up to `radius_max`
/// (which plays the role of the mirror aperture) and uniform azimuths.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ScreenGrid {
    pub radius_max: f64,
    pub n_radial: usize,
    pub n_azimuthal: usize,
}

impl ScreenGrid {
    pub fn new(radius_max: f64, n_radial: usize, n_azimuthal: usize) -> Result<Self> {
        if !(radius_max > 0.0 && radius_max.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "radius_max must be positive and finite, got {radius_max}"
            )));
        }
        if n_radial < 2 {
            return Err(Error::InvalidGrid(format!("n_radial must be >= 2, got {n_radial}")));
        }
        if n_azimuthal < 4 {
            return Err(Error::InvalidGrid(format!(
                "n_azimuthal must be >= 4, got {n_azimuthal}"
            )));
        }
        Ok(ScreenGrid { radius_max, n_radial, n_azimuthal })
    }

    /// Radial cell width.
    pub fn delta_rho(&self) -> f64 {
        self.radius_max / self.n_radial as f64
    }
}

/// How the screen intensity is normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum IntensityKind {
    /// Power per unit screen area (what a camera records); default.
    PerArea,
    /// Power per unit solid angle of the originating direction.
    PerSolidAngle,
}

/// One screen sample.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct PatternCell {
    pub rho: f64,
    pub phi: f64,
    pub intensity: f64,
}

/// Screen pattern: row-major cells (radial outer, azimuthal inner) and the
/// dark-ring radii of an on-axis atom.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct PatternResult {
    pub grid: ScreenGrid,
    pub kind: IntensityKind,
    pub cells: Vec<PatternCell>,
    pub dark_ring_radii: Vec<f64>,
}

/// Collimation map rho = 2 f tan(theta/2); theta strictly inside (0, pi).
pub fn screen_map(theta: f64, spec: &MirrorSpec) -> Result<f64> {
    if !(theta > 0.0 && theta < PI) {
        return Err(Error::SingularTheta { theta });
    }
    Ok(2.0 * spec.f * (0.5 * theta).tan())
}

/// Inverse collimation map theta = 2 arctan(rho / 2f).
pub fn screen_map_inverse(rho: f64, spec: &MirrorSpec) -> f64 {
    2.0 * (rho / (2.0 * spec.f)).atan()
}

/// Screen intensity at a single (rho, phi) sample.
///
/// Zero outside the quantized-mode window (the sub-wavelength central disk
/// rho < 1/k and the image of the far cap).
pub fn intensity_at(
    spec: &MirrorSpec,
    pos: &AtomPosition,
    rho: f64,
    phi: f64,
    kind: IntensityKind,
) -> f64 {
    let theta = screen_map_inverse(rho, spec);
    let theta0 = theta_cutoff(spec);
    if theta <= theta0 || theta >= PI - theta0 {
        return 0.0;
    }
    let density = angular_density(spec, pos, Direction { theta, phi });
    match kind {
        IntensityKind::PerSolidAngle => density / theta.sin(),
        IntensityKind::PerArea => {
            // dA/dOmega per azimuth: rho * drho/dtheta, drho/dtheta = f + rho^2/(4f).
            let drho_dtheta = spec.f + rho * rho / (4.0 * spec.f);
            density / (rho * drho_dtheta)
        }
    }
}

/// Dark-ring radii of an on-axis atom: directions with a cos(theta) = n pi
/// inside the mode window, mapped to the screen, in increasing radius.
fn dark_rings(spec: &MirrorSpec, pos: &AtomPosition) -> Vec<f64> {
    let p = pos.point;
    if p.x != 0.0 || p.y != 0.0 {
        return Vec::new();
    }
    let a = spec.k * (p.z + spec.f);
    if a <= 0.0 {
        return Vec::new();
    }
    let theta0 = theta_cutoff(spec);
    let n_max = (a / PI).floor() as i64;
    let mut radii = Vec::new();
    for n in (-n_max..=n_max).rev() {
        let cos_theta = n as f64 * PI / a;
        if cos_theta.abs() > 1.0 {
            continue;
        }
        let theta = cos_theta.acos();
        if theta > theta0 && theta < PI - theta0 {
            radii.push(2.0 * spec.f * (0.5 * theta).tan());
        }
    }
    radii
}

fn grid_rows<F>(grid: &ScreenGrid, row: F) -> Vec<PatternCell>
where
    F: Fn(usize) -> Vec<PatternCell> + Sync + Send,
{
    let indices: Vec<usize> = (0..grid.n_radial).collect();
    map_collect(&indices, |&i| row(i)).into_iter().flatten().collect()
}

fn grid_rows_seq<F>(grid: &ScreenGrid, row: F) -> Vec<PatternCell>
where
    F: Fn(usize) -> Vec<PatternCell> + Sync + Send,
{
    let indices: Vec<usize> = (0..grid.n_radial).collect();
    map_collect_seq(&indices, |&i| row(i)).into_iter().flatten().collect()
}

fn make_row(
    spec: &MirrorSpec,
    pos: &AtomPosition,
    grid: &ScreenGrid,
    kind: IntensityKind,
    i: usize,
) -> Vec<PatternCell> {
    let rho = (i as f64 + 0.5) * grid.delta_rho();
    (0..grid.n_azimuthal)
        .map(|j| {
            let phi = TAU * j as f64 / grid.n_azimuthal as f64;
            PatternCell { rho, phi, intensity: intensity_at(spec, pos, rho, phi, kind) }
        })
        .collect()
}

/// Sample the screen pattern on a polar grid.
///
/// Radial rows are independent; with the `parallel` feature they are
/// computed on the rayon pool and assembled in grid order.
pub fn pattern_grid(
    spec: &MirrorSpec,
    pos: &AtomPosition,
    grid: &ScreenGrid,
    kind: IntensityKind,
) -> Result<PatternResult> {
    ScreenGrid::new(grid.radius_max, grid.n_radial, grid.n_azimuthal)?;
    let cells = grid_rows(grid, |i| make_row(spec, pos, grid, kind, i));
    Ok(PatternResult { grid: *grid, kind, cells, dark_ring_radii: dark_rings(spec, pos) })
}

/// Sequential variant of [`pattern_grid`]; bit-identical results.
pub fn pattern_grid_seq(
    spec: &MirrorSpec,
    pos: &AtomPosition,
    grid: &ScreenGrid,
    kind: IntensityKind,
) -> Result<PatternResult> {
    ScreenGrid::new(grid.radius_max, grid.n_radial, grid.n_azimuthal)?;
    let cells = grid_rows_seq(grid, |i| make_row(spec, pos, grid, kind, i));
    Ok(PatternResult { grid: *grid, kind, cells, dark_ring_radii: dark_rings(spec, pos) })
}

/// Largest azimuthal intensity spread over any radial ring; exactly zero
/// for on-axis atoms.
pub fn azimuthal_asymmetry(result: &PatternResult) -> f64 {
    let na = result.grid.n_azimuthal;
    result
        .cells
        .chunks(na)
        .map(|row| {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for c in row {
                lo = lo.min(c.intensity);
                hi = hi.max(c.intensity);
            }
            hi - lo
        })
        .fold(0.0, f64::max)
}
