//! Experiment configuration: TOML on input, JSON inside `manifest.json`.
//!
//! Angles are in degrees. Lengths are either plain numbers (meters) or
//! strings: `"0.05lam"` (wavelengths), `"2.5mm"`, `"0.01m"` or `"0.01"`.
//! [`ExperimentConfig::resolve`] rewrites every length to meters, which is
//! what the manifest records.

use std::fs;
use std::path::{Path, PathBuf};

use hmimo_core::analysis::{EigenCase, Scenario, SpectrumKind, SweepKind};
use hmimo_core::{Angles, ChannelModel, EmConstants, Ordering, QuadratureSpec, SurfaceSpec};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Length {
    Meters(f64),
    Text(String),
}

impl Length {
    pub fn lam(x: f64) -> Self {
        Length::Text(format!("{x}lam"))
    }

    pub fn meters(&self, wavelength: f64) -> Result<f64, CliError> {
        let value = match self {
            Length::Meters(v) => *v,
            Length::Text(s) => {
                let t = s.trim();
                let (num, scale) = if let Some(n) = t.strip_suffix("lam") {
                    (n, wavelength)
                } else if let Some(n) = t.strip_suffix("mm") {
                    (n, 1e-3)
                } else if let Some(n) = t.strip_suffix('m') {
                    (n, 1.0)
                } else {
                    (t, 1.0)
                };
                let x: f64 = num
                    .trim()
                    .parse()
                    .map_err(|_| CliError::Config(format!("cannot parse length '{s}'")))?;
                x * scale
            }
        };
        if !value.is_finite() {
            return Err(CliError::Config(format!("length {self:?} is not finite")));
        }
        Ok(value)
    }

    fn resolved(&self, wavelength: f64) -> Result<Length, CliError> {
        Ok(Length::Meters(self.meters(wavelength)?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceConfig {
    pub center: [Length; 3],
    /// `[polar_h, polar_v, azimuth_h, azimuth_v]` in degrees.
    pub angles_deg: [f64; 4],
    /// `[count_h, count_v]`.
    pub count: [usize; 2],
    /// `[pitch_h, pitch_v]`; the element size equals the pitch.
    pub pitch: [Length; 2],
}

impl SurfaceConfig {
    fn preset(count: usize, z: Length) -> Self {
        SurfaceConfig {
            center: [Length::Meters(0.0), Length::Meters(0.0), z],
            angles_deg: [90.0, 90.0, 0.0, 90.0],
            count: [count, count],
            pitch: [Length::lam(0.05), Length::lam(0.05)],
        }
    }

    fn resolve(&self, wavelength: f64) -> Result<Self, CliError> {
        Ok(SurfaceConfig {
            center: [
                self.center[0].resolved(wavelength)?,
                self.center[1].resolved(wavelength)?,
                self.center[2].resolved(wavelength)?,
            ],
            angles_deg: self.angles_deg,
            count: self.count,
            pitch: [
                self.pitch[0].resolved(wavelength)?,
                self.pitch[1].resolved(wavelength)?,
            ],
        })
    }

    fn to_spec(&self, wavelength: f64) -> Result<SurfaceSpec, CliError> {
        let [ph, pv, ah, av] = self.angles_deg;
        Ok(SurfaceSpec {
            center: [
                self.center[0].meters(wavelength)?,
                self.center[1].meters(wavelength)?,
                self.center[2].meters(wavelength)?,
            ],
            angles: Angles::from_degrees(ph, pv, ah, av)?,
            count_h: self.count[0],
            count_v: self.count[1],
            pitch_h: self.pitch[0].meters(wavelength)?,
            pitch_v: self.pitch[1].meters(wavelength)?,
        })
    }
}

fn default_tx() -> SurfaceConfig {
    SurfaceConfig::preset(9, Length::Meters(0.0))
}

fn default_rx() -> SurfaceConfig {
    SurfaceConfig::preset(3, Length::lam(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureConfig {
    pub nodes_per_axis: usize,
    pub refinement_limit: usize,
    pub rel_tol: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        let q = QuadratureSpec::default();
        QuadratureConfig {
            nodes_per_axis: q.nodes_per_axis,
            refinement_limit: q.refinement_limit,
            rel_tol: q.rel_tol,
        }
    }
}

impl From<QuadratureConfig> for QuadratureSpec {
    fn from(q: QuadratureConfig) -> Self {
        QuadratureSpec {
            nodes_per_axis: q.nodes_per_axis,
            refinement_limit: q.refinement_limit,
            rel_tol: q.rel_tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub kind: SweepKind,
    /// Spacings or distances; unused by the `elements` sweep.
    #[serde(default)]
    pub values: Vec<Length>,
    /// RE vertical-axis polar angles, one curve each.
    #[serde(default = "default_tilts")]
    pub tilts_deg: Vec<f64>,
    /// TE `[count_h, count_v]` values for the `elements` sweep.
    #[serde(default)]
    pub tx_counts: Vec<[usize; 2]>,
    /// TE–RE distances for the `elements` sweep.
    #[serde(default)]
    pub distances: Vec<Length>,
}

fn default_tilts() -> Vec<f64> {
    vec![90.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseConfig {
    pub tx: [usize; 2],
    pub rx: [usize; 2],
    pub distance: Length,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigenConfig {
    #[serde(default = "default_threshold")]
    pub threshold_ratio: f64,
    #[serde(default)]
    pub spectrum: SpectrumKind,
    #[serde(default = "default_cases")]
    pub cases: Vec<CaseConfig>,
}

fn default_threshold() -> f64 {
    hmimo_core::analysis::DEFAULT_THRESHOLD_RATIO
}

fn default_cases() -> Vec<CaseConfig> {
    let mut cases = Vec::new();
    for (tx, rx) in [([9, 9], [3, 3]), ([21, 21], [7, 7])] {
        for d in [0.1, 0.5, 5.0] {
            cases.push(CaseConfig {
                tx,
                rx,
                distance: Length::lam(d),
            });
        }
    }
    cases
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SincForm {
    /// Projections of the unit separation on the element axes.
    #[default]
    Frame,
    /// Cartesian parameterization through the `Δz` substitution.
    Cartesian,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PairConfig {
    pub rx_index: usize,
    pub tx_index: usize,
    pub sinc_form: SincForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExportConfig {
    pub ordering: Ordering,
    pub model: ChannelModel,
}

impl Default for ExportConfig {
    fn default() -> Self {
        ExportConfig {
            ordering: Ordering::ElementMajor,
            model: ChannelModel::Exact,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Carrier frequency, Hz.
    #[serde(default = "default_frequency")]
    pub frequency: f64,
    #[serde(default = "default_models")]
    pub models: Vec<ChannelModel>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default = "default_tx")]
    pub tx: SurfaceConfig,
    #[serde(default = "default_rx")]
    pub rx: SurfaceConfig,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub eigen: Option<EigenConfig>,
    #[serde(default)]
    pub pair: PairConfig,
    #[serde(default)]
    pub export: ExportConfig,
}

fn default_frequency() -> f64 {
    30e9
}

fn default_models() -> Vec<ChannelModel> {
    ChannelModel::ALL.to_vec()
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        toml::from_str("").expect("empty config uses defaults")
    }
}

/// Wrapper read back from `manifest.json`; only the config matters for replay.
#[derive(Deserialize)]
struct ManifestConfig {
    config: ExperimentConfig,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// A `.json` path is read as a manifest (or a bare JSON config); anything
    /// else as TOML.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        if path.extension().is_some_and(|e| e == "json") {
            let value: serde_json::Value = serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            let parsed = if value.get("config").is_some() {
                serde_json::from_value::<ManifestConfig>(value).map(|m| m.config)
            } else {
                serde_json::from_value(value)
            };
            parsed.map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
        } else {
            Self::from_toml_str(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
        }
    }

    pub fn em(&self) -> Result<EmConstants, CliError> {
        if !(self.frequency.is_finite() && self.frequency > 0.0) {
            return Err(CliError::Config(format!(
                "frequency = {} must be positive",
                self.frequency
            )));
        }
        Ok(EmConstants::from_frequency(self.frequency)?)
    }

    /// Copy with every length in meters; validates everything that does not
    /// depend on the subcommand.
    pub fn resolve(&self) -> Result<Self, CliError> {
        let lam = self.em()?.wavelength;
        if self.models.is_empty() {
            return Err(CliError::Config("at least one model must be selected".into()));
        }
        let mut out = self.clone();
        out.tx = self.tx.resolve(lam)?;
        out.rx = self.rx.resolve(lam)?;
        if let Some(sweep) = &mut out.sweep {
            sweep.values = resolve_all(&sweep.values, lam)?;
            sweep.distances = resolve_all(&sweep.distances, lam)?;
        }
        if let Some(eigen) = &mut out.eigen {
            for case in &mut eigen.cases {
                case.distance = case.distance.resolved(lam)?;
            }
        }
        out.scenario()?.validate()?;
        Ok(out)
    }

    pub fn scenario(&self) -> Result<Scenario, CliError> {
        let em = self.em()?;
        Ok(Scenario {
            em,
            tx: self.tx.to_spec(em.wavelength)?,
            rx: self.rx.to_spec(em.wavelength)?,
            quadrature: self.quadrature.into(),
        })
    }

    pub fn eigen_cases(&self) -> Result<Vec<EigenCase>, CliError> {
        let lam = self.em()?.wavelength;
        let eigen = self.eigen.as_ref().ok_or_else(|| {
            CliError::Config("the eigen command needs an [eigen] section".into())
        })?;
        eigen
            .cases
            .iter()
            .map(|c| {
                Ok(EigenCase {
                    tx_counts: (c.tx[0], c.tx[1]),
                    rx_counts: (c.rx[0], c.rx[1]),
                    distance: c.distance.meters(lam)?,
                })
            })
            .collect()
    }
}

fn resolve_all(values: &[Length], wavelength: f64) -> Result<Vec<Length>, CliError> {
    values.iter().map(|v| v.resolved(wavelength)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lengths_parse() {
        let lam = 0.01;
        assert_eq!(Length::Meters(0.5).meters(lam).unwrap(), 0.5);
        assert_eq!(Length::Text("0.05lam".into()).meters(lam).unwrap(), 0.05 * lam);
        assert_eq!(Length::Text("2.5mm".into()).meters(lam).unwrap(), 2.5e-3);
        assert_eq!(Length::Text("0.25m".into()).meters(lam).unwrap(), 0.25);
        assert_eq!(Length::Text(" 0.25 ".into()).meters(lam).unwrap(), 0.25);
        assert!(Length::Text("five".into()).meters(lam).is_err());
        assert!(Length::Text("1e999lam".into()).meters(lam).is_err());
    }

    #[test]
    fn empty_config_is_the_reference_setup() {
        let c = ExperimentConfig::default();
        assert_eq!(c.frequency, 30e9);
        assert_eq!(c.models, ChannelModel::ALL.to_vec());
        let s = c.scenario().unwrap();
        let lam = s.em.wavelength;
        assert_eq!(s.tx.count_h, 9);
        assert_eq!(s.rx.count_v, 3);
        assert_eq!(s.rx.center, [0.0, 0.0, lam]);
        assert_eq!(s.tx.pitch_h, 0.05 * lam);
        assert_eq!(s, Scenario::reference(30e9).unwrap());
    }

    #[test]
    fn resolve_records_meters() {
        let c = ExperimentConfig::from_toml_str(
            r#"
            [sweep]
            kind = "distance"
            values = ["1lam", 0.02]
            "#,
        )
        .unwrap();
        let r = c.resolve().unwrap();
        let lam = r.em().unwrap().wavelength;
        let sweep = r.sweep.as_ref().unwrap();
        assert_eq!(sweep.values, vec![Length::Meters(lam), Length::Meters(0.02)]);
        assert_eq!(r.rx.center[2], Length::Meters(lam));
        assert_eq!(r.resolve().unwrap(), r);
        assert_eq!(r.scenario().unwrap(), c.scenario().unwrap());
    }

    #[test]
    fn invalid_configs_are_rejected() {
        assert!(ExperimentConfig::from_toml_str("frequency = -1.0").unwrap().resolve().is_err());
        assert!(ExperimentConfig::from_toml_str("models = []").unwrap().resolve().is_err());
        assert!(ExperimentConfig::from_toml_str("bogus = 1").is_err());
        let c = ExperimentConfig::from_toml_str(
            "[tx]\ncenter = [0, 0, 0]\nangles_deg = [90, 90, 0, 0]\ncount = [1, 1]\npitch = [0.001, 0.001]",
        )
        .unwrap();
        let e = c.resolve().unwrap_err();
        assert_eq!(e.exit_code(), 2, "{e}");
    }

    #[test]
    fn default_eigen_cases() {
        let c = ExperimentConfig::from_toml_str("[eigen]").unwrap();
        let cases = c.eigen_cases().unwrap();
        assert_eq!(cases.len(), 6);
        assert_eq!(c.eigen.unwrap().threshold_ratio, 0.01);
    }
}
