//! Channel models for a single (receive, transmit) element pair.
//!
//! * `Exact`: the four-fold surface integral of the dyadic Green's function,
//!   evaluated with a tensor Gauss–Legendre rule that is refined until it
//!   stops moving.
//! * `CA1`: amplitude frozen at the element centers, phase linearized, which
//!   leaves four sinc factors from the element apertures.
//! * `CA2`: `CA1` with the sinc factors replaced by one.
//!
//! All three carry the `−iεμ` prefactor.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::em::{amplitude_matrix, amplitude_terms, EmConstants, C3, SINGULARITY_GUARD};
use crate::error::{Error, Result};
use crate::geometry::{delta_z_coefficients, Angles, ElementFrame, Vec3, ORTHOGONALITY_TOL};
use crate::quadrature::scaled_rule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ChannelModel {
    Exact,
    #[serde(rename = "CA1", alias = "CA-I")]
    Ca1,
    #[serde(rename = "CA2", alias = "CA-II")]
    Ca2,
}

impl ChannelModel {
    pub const ALL: [ChannelModel; 3] = [ChannelModel::Exact, ChannelModel::Ca1, ChannelModel::Ca2];

    pub fn as_str(&self) -> &'static str {
        match self {
            ChannelModel::Exact => "Exact",
            ChannelModel::Ca1 => "CA1",
            ChannelModel::Ca2 => "CA2",
        }
    }
}

impl fmt::Display for ChannelModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ChannelModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Exact" | "exact" => Ok(ChannelModel::Exact),
            "CA1" | "CA-I" | "ca1" => Ok(ChannelModel::Ca1),
            "CA2" | "CA-II" | "ca2" => Ok(ChannelModel::Ca2),
            other => Err(Error::InvalidArgument(format!("unknown channel model '{other}'"))),
        }
    }
}

/// Settings for the exact-channel quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Gauss–Legendre order per integration axis on the first pass.
    pub nodes_per_axis: usize,
    /// Maximum number of node doublings.
    pub refinement_limit: usize,
    /// Relative Frobenius change between successive passes that counts as converged.
    pub rel_tol: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            nodes_per_axis: 8,
            refinement_limit: 3,
            rel_tol: 1e-9,
        }
    }
}

impl QuadratureSpec {
    pub fn with_nodes(nodes_per_axis: usize) -> Self {
        QuadratureSpec {
            nodes_per_axis,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes_per_axis < 2 {
            return Err(Error::InvalidQuadrature(format!(
                "nodes_per_axis = {} must be at least 2",
                self.nodes_per_axis
            )));
        }
        if self.refinement_limit == 0 {
            return Err(Error::InvalidQuadrature(
                "refinement_limit must be positive".into(),
            ));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(Error::InvalidQuadrature(format!(
                "rel_tol = {} must lie in (0, 1)",
                self.rel_tol
            )));
        }
        Ok(())
    }
}

/// Evidence that an exact-channel value converged: the node count it was
/// accepted at and the relative change from the previous pass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureCertificate {
    pub nodes_per_axis: usize,
    pub rel_change: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureStep {
    pub nodes_per_axis: usize,
    pub frobenius_norm: f64,
    /// Relative change from the previous pass; `None` on the first pass.
    pub rel_change: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairChannel {
    pub matrix: C3,
    pub model: ChannelModel,
    pub rx_index: usize,
    pub tx_index: usize,
    pub certificate: Option<QuadratureCertificate>,
}

impl PairChannel {
    fn new(matrix: C3, model: ChannelModel) -> Self {
        PairChannel {
            matrix,
            model,
            rx_index: 0,
            tx_index: 0,
            certificate: None,
        }
    }

    pub fn with_indices(mut self, rx_index: usize, tx_index: usize) -> Self {
        self.rx_index = rx_index;
        self.tx_index = tx_index;
        self
    }

    pub fn is_finite(&self) -> bool {
        self.matrix.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

fn check_frame(frame: &ElementFrame) -> Result<()> {
    let unit = |v: &Vec3| (v.norm() - 1.0).abs() <= 1e-12;
    if !unit(&frame.dir_h) || !unit(&frame.dir_v) {
        return Err(Error::InvalidArgument("element directions must be unit vectors".into()));
    }
    let dot = frame.dir_h.dot(&frame.dir_v).abs();
    if dot >= ORTHOGONALITY_TOL {
        return Err(Error::DegenerateOrientation { dot });
    }
    if !(frame.len_h > 0.0 && frame.len_v > 0.0) {
        return Err(Error::InvalidArgument("element lengths must be positive".into()));
    }
    Ok(())
}

/// `sin(x)/x` with `sinc(0) = 1`.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-6 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

fn unit_separation(r_bar_mn: &Vec3) -> Result<(Vec3, f64)> {
    let r = r_bar_mn.norm();
    if r.is_nan() || r < SINGULARITY_GUARD {
        return Err(Error::CoincidentPoints { distance: r });
    }
    Ok((Vec3::new(r_bar_mn.x / r, r_bar_mn.y / r, r_bar_mn.z / r), r))
}

/// Sinc arguments of one element in the Cartesian `Δz`-substituted form:
/// `(k0 l_h/2)(x̄ + z̄ c_x)/r̄` and `(k0 l_v/2)(ȳ + z̄ c_y)/r̄`.
///
/// This parameterization integrates over the element's x/y extents, so it
/// coincides with [`sinc_arguments_frame`] only when the horizontal axis is
/// x and the vertical axis is y.
pub fn sinc_arguments_cartesian(
    angles: &Angles,
    lengths: (f64, f64),
    r_bar_mn: &Vec3,
    k0: f64,
) -> Result<(f64, f64)> {
    let (c_x, c_y) = delta_z_coefficients(angles)?;
    let (_, r) = unit_separation(r_bar_mn)?;
    let (x, y, z) = (r_bar_mn.x, r_bar_mn.y, r_bar_mn.z);
    Ok((
        0.5 * k0 * lengths.0 * ((x + z * c_x) / r),
        0.5 * k0 * lengths.1 * ((y + z * c_y) / r),
    ))
}

/// Sinc arguments `(k0 l_h/2)(û·h)` and `(k0 l_v/2)(û·v)` of one element;
/// valid for every orientation.
pub fn sinc_arguments_frame(frame: &ElementFrame, r_bar_mn: &Vec3, k0: f64) -> Result<(f64, f64)> {
    let (u, _) = unit_separation(r_bar_mn)?;
    Ok((
        0.5 * k0 * frame.len_h * u.dot(&frame.dir_h),
        0.5 * k0 * frame.len_v * u.dot(&frame.dir_v),
    ))
}

/// The four sinc arguments of a pair, ordered `[tx_h, tx_v, rx_h, rx_v]`.
pub fn pair_sinc_arguments(tx: &ElementFrame, rx: &ElementFrame, k0: f64) -> Result<[f64; 4]> {
    let r_bar = rx.center - tx.center;
    let (th, tv) = sinc_arguments_frame(tx, &r_bar, k0)?;
    let (rh, rv) = sinc_arguments_frame(rx, &r_bar, k0)?;
    Ok([th, tv, rh, rv])
}

/// Same as [`pair_sinc_arguments`] but through the Cartesian parameterization.
pub fn pair_sinc_arguments_cartesian(
    tx: &ElementFrame,
    tx_angles: &Angles,
    rx: &ElementFrame,
    rx_angles: &Angles,
    k0: f64,
) -> Result<[f64; 4]> {
    let r_bar = rx.center - tx.center;
    let (th, tv) = sinc_arguments_cartesian(tx_angles, (tx.len_h, tx.len_v), &r_bar, k0)?;
    let (rh, rv) = sinc_arguments_cartesian(rx_angles, (rx.len_h, rx.len_v), &r_bar, k0)?;
    Ok([th, tv, rh, rv])
}

/// `−iεμ s_T s_R A_mn e^{i k0 r̄}`.
pub fn ca2_pair_channel(tx: &ElementFrame, rx: &ElementFrame, k: &EmConstants) -> Result<PairChannel> {
    check_frame(tx)?;
    check_frame(rx)?;
    Ok(PairChannel::new(ca2_matrix(tx, rx, k)?, ChannelModel::Ca2))
}

fn ca2_matrix(tx: &ElementFrame, rx: &ElementFrame, k: &EmConstants) -> Result<C3> {
    let amp = amplitude_matrix(&rx.center, &tx.center, k.wavenumber)?;
    let r = (rx.center - tx.center).norm();
    let (s, c) = (k.wavenumber * r).sin_cos();
    let scale = k.channel_prefactor() * Complex64::new(c, s) * (tx.area() * rx.area());
    Ok(amp * scale)
}

/// CA-II scaled by the product of the four sinc factors.
pub fn ca1_pair_channel(tx: &ElementFrame, rx: &ElementFrame, k: &EmConstants) -> Result<PairChannel> {
    let args = pair_sinc_arguments(tx, rx, k.wavenumber)?;
    ca1_with_sinc_arguments(tx, rx, k, args)
}

/// CA-I from externally supplied sinc arguments `[tx_h, tx_v, rx_h, rx_v]`.
pub fn ca1_with_sinc_arguments(
    tx: &ElementFrame,
    rx: &ElementFrame,
    k: &EmConstants,
    args: [f64; 4],
) -> Result<PairChannel> {
    check_frame(tx)?;
    check_frame(rx)?;
    let factor = sinc_product(args);
    Ok(PairChannel::new(
        ca2_matrix(tx, rx, k)? * Complex64::from(factor),
        ChannelModel::Ca1,
    ))
}

pub fn sinc_product(args: [f64; 4]) -> f64 {
    args.iter().map(|&x| sinc(x)).product()
}

/// Quadrature offsets (relative to the element center) and weights.
fn surface_nodes(frame: &ElementFrame, n: usize) -> Vec<(Vec3, f64)> {
    let (ah, wh) = scaled_rule(n, 0.5 * frame.len_h);
    let (bv, wv) = scaled_rule(n, 0.5 * frame.len_v);
    let mut out = Vec::with_capacity(n * n);
    for (a, wa) in ah.iter().zip(&wh) {
        for (b, wb) in bv.iter().zip(&wv) {
            out.push((frame.dir_h * *a + frame.dir_v * *b, wa * wb));
        }
    }
    out
}

/// `∬∬ G(r_m, r_n)` over both element surfaces with `n` nodes per axis,
/// without the channel prefactor.
fn integrate_green(tx: &ElementFrame, rx: &ElementFrame, k0: f64, n: usize) -> Result<C3> {
    let r_bar = rx.center - tx.center;
    let tx_nodes = surface_nodes(tx, n);
    let rx_nodes = surface_nodes(rx, n);
    let zero = Complex64::new(0.0, 0.0);
    let mut iso = zero;
    // xx, yy, zz, xy, xz, yz
    let mut rr = [zero; 6];
    for (dr, wr) in &rx_nodes {
        let base = r_bar + dr;
        let mut iso_row = zero;
        let mut rr_row = [zero; 6];
        for (dt, wt) in &tx_nodes {
            let d = base - dt;
            let r = d.norm();
            if r.is_nan() || r < SINGULARITY_GUARD {
                return Err(Error::CoincidentPoints { distance: r });
            }
            let (a_iso, a_rr) = amplitude_terms(r, k0);
            let (s, c) = (k0 * r).sin_cos();
            let phase = Complex64::new(c, s) * *wt;
            iso_row += a_iso * phase;
            let g = a_rr * phase;
            rr_row[0] += g * (d.x * d.x);
            rr_row[1] += g * (d.y * d.y);
            rr_row[2] += g * (d.z * d.z);
            rr_row[3] += g * (d.x * d.y);
            rr_row[4] += g * (d.x * d.z);
            rr_row[5] += g * (d.y * d.z);
        }
        iso += iso_row * *wr;
        for (acc, row) in rr.iter_mut().zip(rr_row) {
            *acc += row * *wr;
        }
    }
    Ok(C3::new(
        iso + rr[0],
        rr[3],
        rr[4],
        rr[3],
        iso + rr[1],
        rr[5],
        rr[4],
        rr[5],
        iso + rr[2],
    ))
}

/// Exact pair channel from a single tensor Gauss–Legendre pass with
/// `nodes_per_axis` nodes on each of the four axes; no refinement.
pub fn exact_pair_channel_fixed(
    tx: &ElementFrame,
    rx: &ElementFrame,
    k: &EmConstants,
    nodes_per_axis: usize,
) -> Result<PairChannel> {
    if nodes_per_axis == 0 {
        return Err(Error::InvalidQuadrature("nodes_per_axis must be positive".into()));
    }
    check_frame(tx)?;
    check_frame(rx)?;
    let m = integrate_green(tx, rx, k.wavenumber, nodes_per_axis)? * k.channel_prefactor();
    Ok(PairChannel::new(m, ChannelModel::Exact))
}

/// Exact pair channel plus the per-pass convergence record.
pub fn exact_pair_channel_traced(
    tx: &ElementFrame,
    rx: &ElementFrame,
    k: &EmConstants,
    q: &QuadratureSpec,
) -> Result<(PairChannel, Vec<QuadratureStep>)> {
    q.validate()?;
    check_frame(tx)?;
    check_frame(rx)?;
    let pref = k.channel_prefactor();
    let mut nodes = q.nodes_per_axis;
    let mut prev = integrate_green(tx, rx, k.wavenumber, nodes)? * pref;
    let mut trace = vec![QuadratureStep {
        nodes_per_axis: nodes,
        frobenius_norm: prev.norm(),
        rel_change: None,
    }];
    let mut rel_change = f64::INFINITY;
    let mut older = prev;
    for _ in 0..q.refinement_limit {
        nodes *= 2;
        let cur = integrate_green(tx, rx, k.wavenumber, nodes)? * pref;
        let norm = cur.norm();
        let diff = (cur - prev).norm();
        rel_change = if norm > 0.0 {
            diff / norm
        } else if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        trace.push(QuadratureStep {
            nodes_per_axis: nodes,
            frobenius_norm: norm,
            rel_change: Some(rel_change),
        });
        if rel_change < q.rel_tol {
            let mut pair = PairChannel::new(cur, ChannelModel::Exact);
            pair.certificate = Some(QuadratureCertificate {
                nodes_per_axis: nodes,
                rel_change,
            });
            return Ok((pair, trace));
        }
        older = prev;
        prev = cur;
    }
    Err(Error::QuadratureNotConverged {
        nodes_per_axis: nodes,
        rel_change,
        rel_tol: q.rel_tol,
        previous: Box::new(older),
        last: Box::new(prev),
    })
}

/// `−iεμ ∬_{s_R} ∬_{s_T} G(r_m, r_n) dΔr_n dΔr_m` by refined tensor Gauss–Legendre.
pub fn exact_pair_channel(
    tx: &ElementFrame,
    rx: &ElementFrame,
    k: &EmConstants,
    q: &QuadratureSpec,
) -> Result<PairChannel> {
    exact_pair_channel_traced(tx, rx, k, q).map(|(pair, _)| pair)
}

/// Dispatch on the model; `q` is required for `Exact` and ignored otherwise.
pub fn pair_channel(
    tx: &ElementFrame,
    rx: &ElementFrame,
    k: &EmConstants,
    model: ChannelModel,
    q: Option<&QuadratureSpec>,
) -> Result<PairChannel> {
    match model {
        ChannelModel::Exact => {
            let q = q.ok_or_else(|| {
                Error::InvalidArgument("the exact model needs a quadrature spec".into())
            })?;
            exact_pair_channel(tx, rx, k, q)
        }
        ChannelModel::Ca1 => ca1_pair_channel(tx, rx, k),
        ChannelModel::Ca2 => ca2_pair_channel(tx, rx, k),
    }
}
