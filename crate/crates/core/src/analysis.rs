//! Model-accuracy metrics and the parameter studies built on them.
//!
//! The "eigenvalues" of a channel matrix are reported as its singular values
//! (`H^ζ` is 3M×3N and generally not square); [`SpectrumKind::Gram`] gives
//! the eigenvalues of `H Hᴴ` instead. An eigenmode is a value at or above
//! `threshold_ratio` times the largest one.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assembly::{assemble, SystemChannel};
use crate::channel::{ChannelModel, QuadratureSpec};
use crate::em::EmConstants;
use crate::error::{Error, Result};
use crate::geometry::{direction_vectors, element_frames, Angles, ElementFrame, SurfaceSpec, Vec3};

pub const DEFAULT_THRESHOLD_RATIO: f64 = 0.01;

/// `‖Ĥ − H‖_F² / ‖H‖_F²`.
pub fn normalized_mse(h_hat: &SystemChannel, h: &SystemChannel) -> Result<f64> {
    if h_hat.ordering != h.ordering {
        return Err(Error::OrderingMismatch {
            channel: h.ordering,
            vector: h_hat.ordering,
        });
    }
    if h_hat.matrix.shape() != h.matrix.shape() {
        return Err(Error::DimensionMismatch {
            expected: h.matrix.len(),
            found: h_hat.matrix.len(),
        });
    }
    let reference = h.matrix.norm_squared();
    if reference == 0.0 {
        return Err(Error::ZeroReference);
    }
    Ok((&h_hat.matrix - &h.matrix).norm_squared() / reference)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectrumKind {
    /// Singular values of `H`.
    #[default]
    Singular,
    /// Eigenvalues of `H Hᴴ`, i.e. squared singular values.
    Gram,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub model: ChannelModel,
    pub kind: SpectrumKind,
    /// Descending, non-negative.
    pub values: Vec<f64>,
    pub eigenmode_count: usize,
    pub threshold_ratio: f64,
}

/// Number of values at or above `threshold_ratio · values[0]`; `values` descending.
pub fn eigenmode_count(values: &[f64], threshold_ratio: f64) -> usize {
    match values.first() {
        Some(&top) if top > 0.0 => {
            let cut = threshold_ratio * top;
            values.iter().take_while(|&&v| v >= cut).count()
        }
        _ => 0,
    }
}

/// Singular values of the channel, descending.
pub fn singular_values(ch: &SystemChannel) -> Vec<f64> {
    let mut sv: Vec<f64> = ch.matrix.clone().singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

pub fn singular_spectrum(ch: &SystemChannel, threshold_ratio: f64) -> Result<SpectrumResult> {
    spectrum(ch, threshold_ratio, SpectrumKind::Singular)
}

pub fn spectrum(ch: &SystemChannel, threshold_ratio: f64, kind: SpectrumKind) -> Result<SpectrumResult> {
    if !(threshold_ratio > 0.0 && threshold_ratio <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "threshold ratio {threshold_ratio} must lie in (0, 1]"
        )));
    }
    let mut values = singular_values(ch);
    if kind == SpectrumKind::Gram {
        values.iter_mut().for_each(|v| *v *= *v);
    }
    Ok(SpectrumResult {
        model: ch.model,
        kind,
        eigenmode_count: eigenmode_count(&values, threshold_ratio),
        values,
        threshold_ratio,
    })
}

/// A complete TE/RE setup: everything a study point depends on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub em: EmConstants,
    pub tx: SurfaceSpec,
    pub rx: SurfaceSpec,
    pub quadrature: QuadratureSpec,
}

impl Scenario {
    /// Both surfaces broadside, TE (9×9) at the origin, RE (3×3) one
    /// wavelength above it, element size 0.05λ.
    pub fn reference(frequency: f64) -> Result<Self> {
        let em = EmConstants::from_frequency(frequency)?;
        let lam = em.wavelength;
        let surface = |n: usize, z: f64| SurfaceSpec {
            center: [0.0, 0.0, z],
            angles: Angles::broadside(),
            count_h: n,
            count_v: n,
            pitch_h: 0.05 * lam,
            pitch_v: 0.05 * lam,
        };
        Ok(Scenario {
            em,
            tx: surface(9, 0.0),
            rx: surface(3, lam),
            quadrature: QuadratureSpec::default(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.tx.validate()?;
        self.rx.validate()?;
        self.quadrature.validate()
    }

    /// Same element size (= pitch) on both surfaces.
    pub fn with_spacing(mut self, spacing: f64) -> Self {
        for s in [&mut self.tx, &mut self.rx] {
            s.pitch_h = spacing;
            s.pitch_v = spacing;
        }
        self
    }

    /// RE center at the TE center plus `distance` along the TE normal
    /// (z if the TE angles are invalid; validation rejects those later).
    pub fn with_distance(mut self, distance: f64) -> Self {
        let normal = direction_vectors(&self.tx.angles)
            .map(|(h, v)| h.cross(&v))
            .unwrap_or_else(|_| Vec3::z());
        let c = self.tx.center();
        let r = c + normal * distance;
        self.rx.center = [r.x, r.y, r.z];
        self
    }

    /// RE vertical-axis polar angle, degrees.
    pub fn with_rx_tilt_deg(mut self, polar_v_deg: f64) -> Self {
        self.rx.angles.polar_v = polar_v_deg.to_radians();
        self
    }

    pub fn with_tx_counts(mut self, count_h: usize, count_v: usize) -> Self {
        self.tx.count_h = count_h;
        self.tx.count_v = count_v;
        self
    }

    pub fn with_rx_counts(mut self, count_h: usize, count_v: usize) -> Self {
        self.rx.count_h = count_h;
        self.rx.count_v = count_v;
        self
    }

    pub fn frames(&self) -> Result<(Vec<ElementFrame>, Vec<ElementFrame>)> {
        Ok((element_frames(&self.tx)?, element_frames(&self.rx)?))
    }

    /// Assembled `H^ζ` for one model.
    pub fn channel(&self, model: ChannelModel) -> Result<SystemChannel> {
        let (tx, rx) = self.frames()?;
        let q = (model == ChannelModel::Exact).then_some(&self.quadrature);
        assemble(&tx, &rx, &self.em, model, q)
    }
}

/// Compact label for a length in wavelengths, e.g. `0.1` or `5`.
pub fn lambda_label(length: f64, wavelength: f64) -> String {
    let x = (length / wavelength * 1e6).round() / 1e6;
    format!("{x}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepKind {
    Spacing,
    Distance,
    Elements,
}

impl SweepKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepKind::Spacing => "spacing",
            SweepKind::Distance => "distance",
            SweepKind::Elements => "elements",
        }
    }
}

/// One row of a sweep: the swept value at one RE tilt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub sweep_var: String,
    /// Meters for spacing/distance, total TE element count for elements.
    pub value: f64,
    pub theta_v_deg: f64,
    pub mse_ca1: Option<f64>,
    pub mse_ca2: Option<f64>,
    /// Largest per-pair node count the oracle settled on (or failed at).
    pub oracle_nodes: usize,
    pub converged: bool,
    #[serde(skip)]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub kind: SweepKind,
    pub points: Vec<SweepPoint>,
    pub config_snapshot: Scenario,
}

fn check_ascending_positive(name: &str, values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::InvalidArgument(format!("{name}: no sweep values")));
    }
    if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::InvalidArgument(format!("{name}: values must be positive")));
    }
    if values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(format!("{name}: values must be ascending")));
    }
    Ok(())
}

fn check_tilts(tilts_deg: &[f64]) -> Result<()> {
    if tilts_deg.is_empty() {
        return Err(Error::InvalidArgument("at least one RE tilt is required".into()));
    }
    Ok(())
}

/// Exact, CA-I and CA-II on one scenario, condensed to a sweep row.
pub fn evaluate_point(scenario: &Scenario, sweep_var: &str, value: f64) -> SweepPoint {
    let theta_v_deg = scenario.rx.angles.polar_v.to_degrees();
    let mut point = SweepPoint {
        sweep_var: sweep_var.to_string(),
        value,
        theta_v_deg,
        mse_ca1: None,
        mse_ca2: None,
        oracle_nodes: scenario.quadrature.nodes_per_axis,
        converged: false,
        error: None,
    };
    let outcome = (|| -> Result<(f64, f64, usize)> {
        scenario.validate()?;
        let exact = scenario.channel(ChannelModel::Exact)?;
        let ca1 = scenario.channel(ChannelModel::Ca1)?;
        let ca2 = scenario.channel(ChannelModel::Ca2)?;
        let nodes = exact
            .certificate
            .map_or(scenario.quadrature.nodes_per_axis, |c| c.nodes_per_axis);
        Ok((normalized_mse(&ca1, &exact)?, normalized_mse(&ca2, &exact)?, nodes))
    })();
    match outcome {
        Ok((m1, m2, nodes)) => {
            point.mse_ca1 = Some(m1);
            point.mse_ca2 = Some(m2);
            point.oracle_nodes = nodes;
            point.converged = true;
        }
        Err(e) => {
            if let Error::QuadratureNotConverged { nodes_per_axis, .. } = e.root() {
                point.oracle_nodes = *nodes_per_axis;
            }
            point.error = Some(e.to_string());
        }
    }
    point
}

struct Job {
    scenario: Scenario,
    sweep_var: String,
    value: f64,
    tilt_deg: f64,
}

fn run_jobs(jobs: Vec<Job>) -> Vec<SweepPoint> {
    jobs.into_par_iter()
        .map(|job| {
            let mut p = evaluate_point(&job.scenario, &job.sweep_var, job.value);
            p.theta_v_deg = job.tilt_deg;
            p
        })
        .collect()
}

/// MSEs versus element spacing (element size = pitch on both surfaces).
pub fn sweep_spacing(base: &Scenario, spacings: &[f64], tilts_deg: &[f64]) -> Result<SweepResult> {
    check_ascending_positive("spacing", spacings)?;
    check_tilts(tilts_deg)?;
    let jobs = tilts_deg
        .iter()
        .flat_map(|&t| {
            spacings.iter().map(move |&s| {
                Job {
                    scenario: base.with_spacing(s).with_rx_tilt_deg(t),
                    sweep_var: "spacing".to_string(),
                    value: s,
                    tilt_deg: t,
                }
            })
        })
        .collect();
    Ok(SweepResult {
        kind: SweepKind::Spacing,
        points: run_jobs(jobs),
        config_snapshot: *base,
    })
}

/// MSEs versus TE–RE center distance along the TE broadside axis.
pub fn sweep_distance(base: &Scenario, distances: &[f64], tilts_deg: &[f64]) -> Result<SweepResult> {
    check_ascending_positive("distance", distances)?;
    check_tilts(tilts_deg)?;
    let jobs = tilts_deg
        .iter()
        .flat_map(|&t| {
            distances.iter().map(move |&d| {
                Job {
                    scenario: base.with_distance(d).with_rx_tilt_deg(t),
                    sweep_var: "distance".to_string(),
                    value: d,
                    tilt_deg: t,
                }
            })
        })
        .collect();
    Ok(SweepResult {
        kind: SweepKind::Distance,
        points: run_jobs(jobs),
        config_snapshot: *base,
    })
}

/// MSEs versus TE element count, one series per distance; rows are labelled
/// `tx_elements@<d/λ>lam` and carry the total TE element count.
pub fn sweep_elements(
    base: &Scenario,
    tx_counts: &[(usize, usize)],
    distances: &[f64],
    tilts_deg: &[f64],
) -> Result<SweepResult> {
    if tx_counts.is_empty() || tx_counts.iter().any(|&(h, v)| h == 0 || v == 0) {
        return Err(Error::InvalidArgument(
            "elements: counts must be non-empty and positive".into(),
        ));
    }
    check_ascending_positive("elements distance", distances)?;
    check_tilts(tilts_deg)?;
    let lam = base.em.wavelength;
    let mut jobs = Vec::new();
    for &d in distances {
        let var = format!("tx_elements@{}lam", lambda_label(d, lam));
        for &t in tilts_deg {
            for &(h, v) in tx_counts {
                jobs.push(Job {
                    scenario: base.with_distance(d).with_rx_tilt_deg(t).with_tx_counts(h, v),
                    sweep_var: var.clone(),
                    value: (h * v) as f64,
                    tilt_deg: t,
                });
            }
        }
    }
    Ok(SweepResult {
        kind: SweepKind::Elements,
        points: run_jobs(jobs),
        config_snapshot: *base,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenCase {
    pub tx_counts: (usize, usize),
    pub rx_counts: (usize, usize),
    pub distance: f64,
}

impl EigenCase {
    pub fn config_id(&self, wavelength: f64) -> String {
        format!(
            "N{}x{}-M{}x{}-d{}lam",
            self.tx_counts.0,
            self.tx_counts.1,
            self.rx_counts.0,
            self.rx_counts.1,
            lambda_label(self.distance, wavelength)
        )
    }

    pub fn apply(&self, base: &Scenario) -> Scenario {
        base.with_tx_counts(self.tx_counts.0, self.tx_counts.1)
            .with_rx_counts(self.rx_counts.0, self.rx_counts.1)
            .with_distance(self.distance)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenCaseResult {
    pub config_id: String,
    pub case: EigenCase,
    pub spectra: Vec<SpectrumResult>,
}

/// Spectra of every requested model for each case. Cases run in order;
/// the pair assembly inside each is parallel.
pub fn eigen_study(
    base: &Scenario,
    cases: &[EigenCase],
    models: &[ChannelModel],
    threshold_ratio: f64,
    kind: SpectrumKind,
) -> Result<Vec<EigenCaseResult>> {
    if cases.is_empty() || models.is_empty() {
        return Err(Error::InvalidArgument(
            "eigen study needs at least one case and one model".into(),
        ));
    }
    cases
        .iter()
        .map(|case| {
            let scenario = case.apply(base);
            scenario.validate()?;
            let spectra = models
                .iter()
                .map(|&m| spectrum(&scenario.channel(m)?, threshold_ratio, kind))
                .collect::<Result<Vec<_>>>()?;
            Ok(EigenCaseResult {
                config_id: case.config_id(base.em.wavelength),
                case: *case,
                spectra,
            })
        })
        .collect()
}
