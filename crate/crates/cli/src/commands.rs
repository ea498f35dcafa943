use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use hmimo_core::analysis::{eigen_study, sweep_distance, sweep_elements, sweep_spacing, SweepKind};
use hmimo_core::channel::{
    ca1_with_sinc_arguments, ca2_pair_channel, exact_pair_channel_traced, pair_sinc_arguments,
    pair_sinc_arguments_cartesian, QuadratureCertificate, QuadratureStep,
};
use hmimo_core::{reorder, ChannelModel, Ordering};
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, SincForm};
use crate::error::CliError;
use crate::output::{self, Manifest, MatrixJson};
use crate::svg::{self, Plot, Series};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::Subcommand)]
pub enum Command {
    /// Channel of one TE/RE element pair under every selected model.
    Pair,
    /// Normalized-MSE sweep over spacing, distance or TE element count.
    Sweep,
    /// Singular spectra and eigenmode counts.
    Eigen,
    /// Assembled system matrix in binary and JSON form.
    Export,
}

impl Command {
    pub fn as_str(&self) -> &'static str {
        match self {
            Command::Pair => "pair",
            Command::Sweep => "sweep",
            Command::Eigen => "eigen",
            Command::Export => "export",
        }
    }
}

#[derive(Debug, Clone, clap::Parser)]
#[command(name = "hmimo", version, about = "Near-field channel models between holographic MIMO surfaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML config, or a manifest.json from an earlier run.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `output_dir`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Eigenmode threshold relative to the largest singular value.
    #[arg(long, global = true)]
    pub threshold: Option<f64>,
    /// Gauss–Legendre nodes per axis on the first quadrature pass.
    #[arg(long = "quad-nodes", global = true)]
    pub quad_nodes: Option<usize>,
}

#[derive(Debug, Default)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub outputs: Vec<String>,
    pub failures: Vec<String>,
}

pub fn load_config(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(n) = cli.quad_nodes {
        cfg.quadrature.nodes_per_axis = n;
    }
    if let Some(t) = cli.threshold {
        if !(t > 0.0 && t <= 1.0) {
            return Err(CliError::Config(format!("--threshold {t} must lie in (0, 1]")));
        }
        if let Some(e) = cfg.eigen.as_mut() {
            e.threshold_ratio = t;
        }
    }
    cfg.resolve()
}

pub fn run(cli: &Cli) -> Result<RunSummary, CliError> {
    let cfg = load_config(cli)?;
    let out_dir = cli
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("hmimo-out"));
    let threads = match cli.jobs {
        Some(0) => return Err(CliError::Config("--jobs must be positive".into())),
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start worker pool: {e}")))?;
    fs::create_dir_all(&out_dir).map_err(|e| CliError::io(&out_dir, e))?;

    let start = Instant::now();
    let mut summary = pool.install(|| match cli.command {
        Command::Pair => cmd_pair(&cfg, &out_dir),
        Command::Sweep => cmd_sweep(&cfg, &out_dir),
        Command::Eigen => cmd_eigen(&cfg, &out_dir),
        Command::Export => cmd_export(&cfg, &out_dir),
    })?;
    let manifest = Manifest {
        tool: "hmimo",
        version: env!("CARGO_PKG_VERSION"),
        command: cli.command.as_str(),
        config: &cfg,
        threads,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        outputs: summary.outputs.clone(),
        failures: summary.failures.clone(),
    };
    output::write_json(&out_dir.join("manifest.json"), &manifest)?;
    summary.outputs.push("manifest.json".into());
    summary.out_dir = out_dir;
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMatrix {
    pub model: ChannelModel,
    /// `[row][col] = [re, im]`.
    pub matrix: [[[f64; 2]; 3]; 3],
    pub certificate: Option<QuadratureCertificate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairReport {
    pub frequency: f64,
    pub wavelength: f64,
    pub tx_index: usize,
    pub rx_index: usize,
    pub tx_center: [f64; 3],
    pub rx_center: [f64; 3],
    pub sinc_form: SincForm,
    /// `[tx_h, tx_v, rx_h, rx_v]`.
    pub sinc_arguments: [f64; 4],
    pub models: Vec<ModelMatrix>,
    pub quadrature_trace: Vec<QuadratureStep>,
}

fn to_array(m: &hmimo_core::em::C3) -> [[[f64; 2]; 3]; 3] {
    let mut out = [[[0.0; 2]; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = [m[(i, j)].re, m[(i, j)].im];
        }
    }
    out
}

fn cmd_pair(cfg: &ExperimentConfig, out: &Path) -> Result<RunSummary, CliError> {
    let scn = cfg.scenario()?;
    let (tx, rx) = scn.frames()?;
    let (ti, ri) = (cfg.pair.tx_index, cfg.pair.rx_index);
    if ti >= tx.len() || ri >= rx.len() {
        return Err(CliError::Config(format!(
            "pair indices (rx {ri}, tx {ti}) outside {} RE x {} TE elements",
            rx.len(),
            tx.len()
        )));
    }
    let (t, r) = (&tx[ti], &rx[ri]);
    let k = scn.em;
    let args = match cfg.pair.sinc_form {
        SincForm::Frame => pair_sinc_arguments(t, r, k.wavenumber)?,
        SincForm::Cartesian => {
            pair_sinc_arguments_cartesian(t, &scn.tx.angles, r, &scn.rx.angles, k.wavenumber)?
        }
    };
    let mut models = Vec::new();
    let mut trace = Vec::new();
    for &model in &cfg.models {
        let pair = match model {
            ChannelModel::Exact => {
                let (pair, steps) = exact_pair_channel_traced(t, r, &k, &scn.quadrature)?;
                trace = steps;
                pair
            }
            ChannelModel::Ca1 => ca1_with_sinc_arguments(t, r, &k, args)?,
            ChannelModel::Ca2 => ca2_pair_channel(t, r, &k)?,
        };
        models.push(ModelMatrix {
            model,
            matrix: to_array(&pair.matrix),
            certificate: pair.certificate,
        });
    }
    let report = PairReport {
        frequency: k.frequency,
        wavelength: k.wavelength,
        tx_index: ti,
        rx_index: ri,
        tx_center: t.center.into(),
        rx_center: r.center.into(),
        sinc_form: cfg.pair.sinc_form,
        sinc_arguments: args,
        models,
        quadrature_trace: trace,
    };
    output::write_json(&out.join("pair.json"), &report)?;
    Ok(RunSummary {
        outputs: vec!["pair.json".into()],
        ..Default::default()
    })
}

fn meters(values: &[crate::config::Length], lam: f64) -> Result<Vec<f64>, CliError> {
    values.iter().map(|v| v.meters(lam)).collect()
}

fn cmd_sweep(cfg: &ExperimentConfig, out: &Path) -> Result<RunSummary, CliError> {
    let sw = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Config("the sweep command needs a [sweep] section".into()))?;
    let scn = cfg.scenario()?;
    let lam = scn.em.wavelength;
    let result = match sw.kind {
        SweepKind::Spacing | SweepKind::Distance => {
            if !sw.tx_counts.is_empty() || !sw.distances.is_empty() {
                return Err(CliError::Config(
                    "tx_counts/distances apply only to the elements sweep".into(),
                ));
            }
            if sw.values.is_empty() {
                return Err(CliError::Config("sweep values must not be empty".into()));
            }
            let values = meters(&sw.values, lam)?;
            if sw.kind == SweepKind::Spacing {
                sweep_spacing(&scn, &values, &sw.tilts_deg)?
            } else {
                sweep_distance(&scn, &values, &sw.tilts_deg)?
            }
        }
        SweepKind::Elements => {
            if !sw.values.is_empty() {
                return Err(CliError::Config(
                    "the elements sweep takes tx_counts and distances, not values".into(),
                ));
            }
            let counts: Vec<(usize, usize)> = sw.tx_counts.iter().map(|c| (c[0], c[1])).collect();
            sweep_elements(&scn, &counts, &meters(&sw.distances, lam)?, &sw.tilts_deg)?
        }
    };
    output::write_sweep_csv(&out.join("sweep.csv"), &result.points)?;
    output::write_file(&out.join("sweep.svg"), svg::render(&sweep_plot(&result, lam)))?;
    let failures = result
        .points
        .iter()
        .filter_map(|p| {
            p.error.as_ref().map(|e| {
                format!("{} = {} at theta_v = {} deg: {e}", p.sweep_var, p.value, p.theta_v_deg)
            })
        })
        .collect();
    Ok(RunSummary {
        outputs: vec!["sweep.csv".into(), "sweep.svg".into()],
        failures,
        ..Default::default()
    })
}

fn sweep_plot(result: &hmimo_core::SweepResult, lam: f64) -> Plot {
    let (x_label, scale, log_x) = match result.kind {
        SweepKind::Spacing => ("element spacing / wavelength", 1.0 / lam, true),
        SweepKind::Distance => ("TE-RE distance / wavelength", 1.0 / lam, false),
        SweepKind::Elements => ("TE elements", 1.0, false),
    };
    let mut keys: Vec<(String, f64)> = Vec::new();
    for p in &result.points {
        if !keys.iter().any(|(v, t)| *v == p.sweep_var && *t == p.theta_v_deg) {
            keys.push((p.sweep_var.clone(), p.theta_v_deg));
        }
    }
    let mut series = Vec::new();
    for (var, tilt) in &keys {
        for (name, dashed) in [("CA1", false), ("CA2", true)] {
            let points = result
                .points
                .iter()
                .filter(|p| p.sweep_var == *var && p.theta_v_deg == *tilt)
                .filter_map(|p| {
                    let y = if dashed { p.mse_ca2 } else { p.mse_ca1 };
                    y.map(|y| (p.value * scale, y))
                })
                .collect();
            let label = match result.kind {
                SweepKind::Elements => format!("{name} {var} {tilt}deg"),
                _ => format!("{name} theta_v={tilt}deg"),
            };
            series.push(Series {
                name: label,
                points,
                dashed,
            });
        }
    }
    Plot {
        title: format!("Normalized MSE vs {}", result.kind.as_str()),
        x_label: x_label.into(),
        y_label: "normalized MSE".into(),
        log_x,
        log_y: true,
        series,
    }
}

fn cmd_eigen(cfg: &ExperimentConfig, out: &Path) -> Result<RunSummary, CliError> {
    let cases = cfg.eigen_cases()?;
    let e = cfg.eigen.as_ref().expect("checked by eigen_cases");
    let scn = cfg.scenario()?;
    let results = eigen_study(&scn, &cases, &cfg.models, e.threshold_ratio, e.spectrum)?;
    let (spectrum, modes) = output::spectrum_rows(&results);
    output::write_rows(&out.join("spectrum.csv"), &spectrum)?;
    output::write_rows(&out.join("modes.csv"), &modes)?;
    let series = results
        .iter()
        .flat_map(|case| {
            case.spectra.iter().map(|s| Series {
                name: format!("{} {}", s.model, case.config_id),
                points: s
                    .values
                    .iter()
                    .enumerate()
                    .map(|(i, &v)| ((i + 1) as f64, v))
                    .collect(),
                dashed: s.model != ChannelModel::Exact,
            })
        })
        .collect();
    let plot = Plot {
        title: "Channel spectra".into(),
        x_label: "index k".into(),
        y_label: "singular value".into(),
        log_x: false,
        log_y: true,
        series,
    };
    output::write_file(&out.join("spectrum.svg"), svg::render(&plot))?;
    Ok(RunSummary {
        outputs: vec!["spectrum.csv".into(), "modes.csv".into(), "spectrum.svg".into()],
        ..Default::default()
    })
}

fn cmd_export(cfg: &ExperimentConfig, out: &Path) -> Result<RunSummary, CliError> {
    let scn = cfg.scenario()?;
    let mut ch = scn.channel(cfg.export.model)?;
    if cfg.export.ordering == Ordering::CoordinateMajor {
        ch = reorder(&ch);
    }
    let f = scn.em.frequency;
    output::write_file(&out.join("channel.bin"), output::encode_binary(&ch, f))?;
    output::write_json(&out.join("channel.json"), &MatrixJson::of(&ch, f))?;
    Ok(RunSummary {
        outputs: vec!["channel.bin".into(), "channel.json".into()],
        ..Default::default()
    })
}
