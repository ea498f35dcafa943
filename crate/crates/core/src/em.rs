//! Free-space Green's functions and the far-from-element expansions built on them.

use std::f64::consts::{PI, TAU};

use nalgebra::Matrix3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec3;

pub type C3 = Matrix3<Complex64>;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Vacuum permittivity, F/m (CODATA 2018).
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;
/// Vacuum permeability, H/m (CODATA 2018).
pub const VACUUM_PERMEABILITY: f64 = 1.256_637_062_12e-6;

/// Separations below this are treated as coincident points.
pub const SINGULARITY_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmConstants {
    pub frequency: f64,
    pub wavelength: f64,
    pub wavenumber: f64,
    pub permittivity: f64,
    pub permeability: f64,
}

impl EmConstants {
    pub fn from_frequency(frequency: f64) -> Result<Self> {
        if !(frequency.is_finite() && frequency > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "frequency {frequency} Hz must be positive"
            )));
        }
        let wavelength = SPEED_OF_LIGHT / frequency;
        Ok(Self::vacuum(frequency, wavelength))
    }

    pub fn from_wavelength(wavelength: f64) -> Result<Self> {
        if !(wavelength.is_finite() && wavelength > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "wavelength {wavelength} m must be positive"
            )));
        }
        Ok(Self::vacuum(SPEED_OF_LIGHT / wavelength, wavelength))
    }

    fn vacuum(frequency: f64, wavelength: f64) -> Self {
        EmConstants {
            frequency,
            wavelength,
            wavenumber: TAU / wavelength,
            permittivity: VACUUM_PERMITTIVITY,
            permeability: VACUUM_PERMEABILITY,
        }
    }

    /// The `−iεμ` factor in front of every channel expression.
    pub fn channel_prefactor(&self) -> Complex64 {
        Complex64::new(0.0, -self.permittivity * self.permeability)
    }
}

fn separation(r_m: &Vec3, r_n: &Vec3) -> Result<(Vec3, f64)> {
    let d = r_m - r_n;
    let r = d.norm();
    if r.is_nan() || r < SINGULARITY_GUARD {
        return Err(Error::CoincidentPoints { distance: r });
    }
    Ok((d, r))
}

/// `e^{i k0 r} / (4π r)`.
pub fn scalar_green(r_m: &Vec3, r_n: &Vec3, k0: f64) -> Result<Complex64> {
    let (_, r) = separation(r_m, r_n)?;
    let (s, c) = (k0 * r).sin_cos();
    Ok(Complex64::new(c, s) / (4.0 * PI * r))
}

/// Coefficients `(iso, rr)` such that the amplitude dyad is
/// `iso · I + rr · d dᵀ` for the unnormalized separation vector `d`.
#[inline]
pub(crate) fn amplitude_terms(r: f64, k0: f64) -> (Complex64, Complex64) {
    let kr = k0 * r;
    let inv_kr = 1.0 / kr;
    let inv_kr2 = inv_kr * inv_kr;
    let scale = 1.0 / (4.0 * PI * r);
    let iso = Complex64::new(1.0 - inv_kr2, inv_kr) * scale;
    let rr = Complex64::new(3.0 * inv_kr2 - 1.0, -3.0 * inv_kr) * (scale / (r * r));
    (iso, rr)
}

fn dyad(d: &Vec3, iso: Complex64, rr: Complex64) -> C3 {
    C3::from_fn(|i, j| {
        let v = rr * (d[i] * d[j]);
        if i == j {
            v + iso
        } else {
            v
        }
    })
}

/// Amplitude part of the dyadic Green's function at the element centers
/// (the full dyad without its `e^{i k0 r̄}` phase).
pub fn amplitude_matrix(r_bar_m: &Vec3, r_bar_n: &Vec3, k0: f64) -> Result<C3> {
    let (d, r) = separation(r_bar_m, r_bar_n)?;
    let (iso, rr) = amplitude_terms(r, k0);
    Ok(dyad(&d, iso, rr))
}

/// Free-space dyadic Green's function `(I + ∇∇ᵀ/k0²) g`, in closed form.
pub fn dyadic_green(r_m: &Vec3, r_n: &Vec3, k0: f64) -> Result<C3> {
    let (_, r) = separation(r_m, r_n)?;
    let (s, c) = (k0 * r).sin_cos();
    Ok(amplitude_matrix(r_m, r_n, k0)? * Complex64::new(c, s))
}

/// First-order expansion of `‖r̄_mn + Δr_m − Δr_n‖` about `r̄_mn`.
pub fn first_order_distance(r_bar_mn: &Vec3, delta_m: &Vec3, delta_n: &Vec3) -> Result<f64> {
    let r = r_bar_mn.norm();
    if r.is_nan() || r < SINGULARITY_GUARD {
        return Err(Error::CoincidentPoints { distance: r });
    }
    Ok(r + r_bar_mn.dot(&(delta_m - delta_n)) / r)
}
