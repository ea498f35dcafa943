//! Surface placement and per-element frames.
//!
//! A surface is a centered rectangular lattice of contiguous elements: the
//! element size along each in-plane axis equals the pitch, and element `(i, j)`
//! gets the canonical index `n = i * count_v + j`.
//!
//! Directions follow the spherical convention
//! `d(θ, φ) = (sin θ cos φ, sin θ sin φ, cos θ)` with θ measured from the z-axis.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;

/// Orthogonality tolerance for the in-plane direction pair.
pub const ORTHOGONALITY_TOL: f64 = 1e-9;

/// Below this `|sin(φ_h − φ_v)|` the Δz substitution is singular.
pub const AZIMUTH_TOL: f64 = 1e-9;

/// Orientation of a surface: polar and azimuth angles of its horizontal and
/// vertical element axes, in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Angles {
    pub polar_h: f64,
    pub polar_v: f64,
    pub azimuth_h: f64,
    pub azimuth_v: f64,
}

impl Angles {
    pub fn new(polar_h: f64, polar_v: f64, azimuth_h: f64, azimuth_v: f64) -> Result<Self> {
        let a = Angles {
            polar_h,
            polar_v,
            azimuth_h,
            azimuth_v,
        };
        a.validate()?;
        Ok(a)
    }

    pub fn from_degrees(polar_h: f64, polar_v: f64, azimuth_h: f64, azimuth_v: f64) -> Result<Self> {
        Self::new(
            polar_h.to_radians(),
            polar_v.to_radians(),
            azimuth_h.to_radians(),
            azimuth_v.to_radians(),
        )
    }

    /// Surface parallel to the xy-plane: horizontal axis along x, vertical along y.
    pub fn broadside() -> Self {
        Angles {
            polar_h: FRAC_PI_2,
            polar_v: FRAC_PI_2,
            azimuth_h: 0.0,
            azimuth_v: FRAC_PI_2,
        }
    }

    pub fn to_degrees(&self) -> [f64; 4] {
        [
            self.polar_h.to_degrees(),
            self.polar_v.to_degrees(),
            self.azimuth_h.to_degrees(),
            self.azimuth_v.to_degrees(),
        ]
    }

    /// Range checks plus orthogonality of the implied direction pair.
    pub fn validate(&self) -> Result<()> {
        for (name, polar) in [("polar_h", self.polar_h), ("polar_v", self.polar_v)] {
            if !polar.is_finite() || polar <= 0.0 || polar >= PI {
                return Err(Error::InvalidAngles(format!(
                    "{name} = {polar} rad is outside (0, π)"
                )));
            }
        }
        for (name, az) in [("azimuth_h", self.azimuth_h), ("azimuth_v", self.azimuth_v)] {
            if !az.is_finite() || !(0.0..TAU).contains(&az) {
                return Err(Error::InvalidAngles(format!(
                    "{name} = {az} rad is outside [0, 2π)"
                )));
            }
        }
        let (h, v) = unit_directions(self);
        let dot = h.dot(&v);
        if dot.abs() >= ORTHOGONALITY_TOL {
            return Err(Error::DegenerateOrientation { dot: dot.abs() });
        }
        Ok(())
    }
}

/// `(sin x, cos x)` that is exact at integer multiples of π/2, so axis-aligned
/// surfaces get exactly axis-aligned directions.
pub(crate) fn sin_cos(x: f64) -> (f64, f64) {
    let quarters = x / FRAC_PI_2;
    let n = quarters.round();
    if (quarters - n).abs() < 1e-12 {
        match (n as i64).rem_euclid(4) {
            0 => (0.0, 1.0),
            1 => (1.0, 0.0),
            2 => (0.0, -1.0),
            _ => (-1.0, 0.0),
        }
    } else {
        x.sin_cos()
    }
}

fn spherical(polar: f64, azimuth: f64) -> Vec3 {
    let (st, ct) = sin_cos(polar);
    let (sp, cp) = sin_cos(azimuth);
    Vec3::new(st * cp, st * sp, ct)
}

fn unit_directions(angles: &Angles) -> (Vec3, Vec3) {
    (
        spherical(angles.polar_h, angles.azimuth_h),
        spherical(angles.polar_v, angles.azimuth_v),
    )
}

/// Horizontal and vertical in-plane unit directions of a surface.
pub fn direction_vectors(angles: &Angles) -> Result<(Vec3, Vec3)> {
    let (h, v) = unit_directions(angles);
    let dot = h.dot(&v);
    if dot.abs() >= ORTHOGONALITY_TOL {
        return Err(Error::DegenerateOrientation { dot: dot.abs() });
    }
    Ok((h, v))
}

/// Coefficients `(c_x, c_y)` with `Δz = c_x Δx + c_y Δy` for every in-plane
/// displacement of a surface with the given orientation.
pub fn delta_z_coefficients(angles: &Angles) -> Result<(f64, f64)> {
    let (s_hv, _) = sin_cos(angles.azimuth_h - angles.azimuth_v);
    if s_hv.abs() <= AZIMUTH_TOL {
        return Err(Error::AzimuthDegenerate {
            sin_diff: s_hv.abs(),
        });
    }
    let cot = |polar: f64| {
        let (s, c) = sin_cos(polar);
        c / s
    };
    let (cot_h, cot_v) = (cot(angles.polar_h), cot(angles.polar_v));
    let (sin_ph, cos_ph) = sin_cos(angles.azimuth_h);
    let (sin_pv, cos_pv) = sin_cos(angles.azimuth_v);
    let c_x = (sin_ph * cot_v - sin_pv * cot_h) / s_hv;
    let c_y = (cos_pv * cot_h - cos_ph * cot_v) / s_hv;
    Ok((c_x, c_y))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceSpec {
    pub center: [f64; 3],
    pub angles: Angles,
    pub count_h: usize,
    pub count_v: usize,
    pub pitch_h: f64,
    pub pitch_v: f64,
}

impl SurfaceSpec {
    pub fn validate(&self) -> Result<()> {
        if self.count_h == 0 || self.count_v == 0 {
            return Err(Error::InvalidSurface(format!(
                "element counts must be positive, got {}x{}",
                self.count_h, self.count_v
            )));
        }
        for (name, p) in [("pitch_h", self.pitch_h), ("pitch_v", self.pitch_v)] {
            if !(p.is_finite() && p > 0.0) {
                return Err(Error::InvalidSurface(format!("{name} = {p} must be positive")));
            }
        }
        if self.center.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidSurface("center must be finite".into()));
        }
        self.angles.validate()
    }

    pub fn element_count(&self) -> usize {
        self.count_h * self.count_v
    }

    /// Total aperture `(L_h, L_v)`.
    pub fn aperture(&self) -> (f64, f64) {
        (
            self.pitch_h * self.count_h as f64,
            self.pitch_v * self.count_v as f64,
        )
    }

    pub fn center(&self) -> Vec3 {
        Vec3::from(self.center)
    }
}

/// Derived geometry of one element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementFrame {
    pub center: Vec3,
    pub dir_h: Vec3,
    pub dir_v: Vec3,
    pub len_h: f64,
    pub len_v: f64,
}

impl ElementFrame {
    pub fn area(&self) -> f64 {
        self.len_h * self.len_v
    }

    /// Point at local coordinates `(a, b)` relative to the element center.
    pub fn point(&self, a: f64, b: f64) -> Vec3 {
        self.center + self.dir_h * a + self.dir_v * b
    }
}

/// Frame of element `(i, j)`; `dirs` must come from `direction_vectors(&spec.angles)`.
fn frame_at(spec: &SurfaceSpec, dirs: (Vec3, Vec3), i: usize, j: usize) -> ElementFrame {
    let (dir_h, dir_v) = dirs;
    let off_h = (i as f64 - (spec.count_h as f64 - 1.0) / 2.0) * spec.pitch_h;
    let off_v = (j as f64 - (spec.count_v as f64 - 1.0) / 2.0) * spec.pitch_v;
    ElementFrame {
        center: spec.center() + dir_h * off_h + dir_v * off_v,
        dir_h,
        dir_v,
        len_h: spec.pitch_h,
        len_v: spec.pitch_v,
    }
}

/// Canonical element index of grid position `(i, j)`.
pub fn element_index(spec: &SurfaceSpec, i: usize, j: usize) -> usize {
    i * spec.count_v + j
}

/// Single element frame at grid position `(i, j)`.
pub fn element_frame(spec: &SurfaceSpec, i: usize, j: usize) -> Result<ElementFrame> {
    spec.validate()?;
    if i >= spec.count_h || j >= spec.count_v {
        return Err(Error::InvalidArgument(format!(
            "element ({i}, {j}) outside {}x{} grid",
            spec.count_h, spec.count_v
        )));
    }
    Ok(frame_at(spec, direction_vectors(&spec.angles)?, i, j))
}

/// All element frames in canonical order (`j` fastest).
pub fn element_frames(spec: &SurfaceSpec) -> Result<Vec<ElementFrame>> {
    spec.validate()?;
    let dirs = direction_vectors(&spec.angles)?;
    Ok((0..spec.count_h)
        .flat_map(|i| (0..spec.count_v).map(move |j| (i, j)))
        .map(|(i, j)| frame_at(spec, dirs, i, j))
        .collect())
}
