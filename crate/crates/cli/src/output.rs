//! File formats written by the CLI.
//!
//! Binary matrix export (`channel.bin`): a 64-byte ASCII header
//!
//! ```text
//! HMIMO1 <ordering> <rows> <cols> <model> <frequency_hz>
//! ```
//!
//! padded with spaces and terminated by `\n` in the last byte, followed by
//! `rows·cols` entries in row-major order, each as two little-endian f64
//! (real, imaginary). The same data is written to `channel.json`.

use std::fs;
use std::path::Path;

use hmimo_core::analysis::{EigenCaseResult, SweepPoint};
use hmimo_core::{ChannelModel, Ordering, SystemChannel};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const MAGIC: &str = "HMIMO1";
pub const HEADER_LEN: usize = 64;

pub fn write_file(path: &Path, bytes: impl AsRef<[u8]>) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::output(path, e))?;
    text.push('\n');
    write_file(path, text)
}

pub fn write_sweep_csv(path: &Path, points: &[SweepPoint]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::output(path, e))?;
    for p in points {
        w.serialize(p).map_err(|e| CliError::output(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn read_sweep_csv(path: &Path) -> Result<Vec<SweepPoint>, CliError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::output(path, e))?;
    r.deserialize()
        .collect::<Result<Vec<SweepPoint>, _>>()
        .map_err(|e| CliError::output(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRow {
    pub model: ChannelModel,
    pub config_id: String,
    /// 1-based.
    pub k: usize,
    pub sigma_k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModesRow {
    pub model: ChannelModel,
    pub config_id: String,
    pub eigenmode_count: usize,
}

pub fn spectrum_rows(results: &[EigenCaseResult]) -> (Vec<SpectrumRow>, Vec<ModesRow>) {
    let mut spectrum = Vec::new();
    let mut modes = Vec::new();
    for case in results {
        for s in &case.spectra {
            spectrum.extend(s.values.iter().enumerate().map(|(i, &v)| SpectrumRow {
                model: s.model,
                config_id: case.config_id.clone(),
                k: i + 1,
                sigma_k: v,
            }));
            modes.push(ModesRow {
                model: s.model,
                config_id: case.config_id.clone(),
                eigenmode_count: s.eigenmode_count,
            });
        }
    }
    (spectrum, modes)
}

pub fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::output(path, e))?;
    for row in rows {
        w.serialize(row).map_err(|e| CliError::output(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, CliError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::output(path, e))?;
    r.deserialize()
        .collect::<Result<Vec<T>, _>>()
        .map_err(|e| CliError::output(path, e))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixHeader {
    pub ordering: Ordering,
    pub rows: usize,
    pub cols: usize,
    pub model: ChannelModel,
    pub frequency: f64,
}

impl MatrixHeader {
    pub fn of(ch: &SystemChannel, frequency: f64) -> Self {
        MatrixHeader {
            ordering: ch.ordering,
            rows: ch.rows(),
            cols: ch.cols(),
            model: ch.model,
            frequency,
        }
    }

    pub fn encode(&self) -> [u8; HEADER_LEN] {
        let text = format!(
            "{MAGIC} {} {} {} {} {}",
            self.ordering.as_str(),
            self.rows,
            self.cols,
            self.model.as_str(),
            self.frequency
        );
        assert!(text.len() < HEADER_LEN, "header overflow: {text}");
        let mut out = [b' '; HEADER_LEN];
        out[..text.len()].copy_from_slice(text.as_bytes());
        out[HEADER_LEN - 1] = b'\n';
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, String> {
        if bytes.len() < HEADER_LEN || bytes[HEADER_LEN - 1] != b'\n' {
            return Err("truncated header".into());
        }
        let text = std::str::from_utf8(&bytes[..HEADER_LEN - 1]).map_err(|e| e.to_string())?;
        let f: Vec<&str> = text.split_whitespace().collect();
        if f.len() != 6 || f[0] != MAGIC {
            return Err(format!("bad header '{}'", text.trim_end()));
        }
        let num = |s: &str| s.parse::<usize>().map_err(|e| e.to_string());
        Ok(MatrixHeader {
            ordering: f[1].parse().map_err(|e: hmimo_core::Error| e.to_string())?,
            rows: num(f[2])?,
            cols: num(f[3])?,
            model: f[4].parse().map_err(|e: hmimo_core::Error| e.to_string())?,
            frequency: f[5].parse().map_err(|e: std::num::ParseFloatError| e.to_string())?,
        })
    }
}

pub fn encode_binary(ch: &SystemChannel, frequency: f64) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 16 * ch.matrix.len());
    out.extend_from_slice(&MatrixHeader::of(ch, frequency).encode());
    for i in 0..ch.rows() {
        for j in 0..ch.cols() {
            let z = ch.matrix[(i, j)];
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    out
}

pub fn decode_binary(bytes: &[u8]) -> Result<(MatrixHeader, DMatrix<Complex64>), String> {
    let header = MatrixHeader::decode(bytes)?;
    let expected = HEADER_LEN + 16 * header.rows * header.cols;
    if bytes.len() != expected {
        return Err(format!("expected {expected} bytes, found {}", bytes.len()));
    }
    let f = |at: usize| f64::from_le_bytes(bytes[at..at + 8].try_into().unwrap());
    let m = DMatrix::from_fn(header.rows, header.cols, |i, j| {
        let at = HEADER_LEN + 16 * (i * header.cols + j);
        Complex64::new(f(at), f(at + 8))
    });
    Ok((header, m))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub ordering: Ordering,
    pub rows: usize,
    pub cols: usize,
    pub model: ChannelModel,
    pub frequency: f64,
    pub rx_elements: usize,
    pub tx_elements: usize,
    /// Row-major `[re, im]` pairs.
    pub entries: Vec<[f64; 2]>,
}

impl MatrixJson {
    pub fn of(ch: &SystemChannel, frequency: f64) -> Self {
        let mut entries = Vec::with_capacity(ch.matrix.len());
        for i in 0..ch.rows() {
            for j in 0..ch.cols() {
                let z = ch.matrix[(i, j)];
                entries.push([z.re, z.im]);
            }
        }
        MatrixJson {
            ordering: ch.ordering,
            rows: ch.rows(),
            cols: ch.cols(),
            model: ch.model,
            frequency,
            rx_elements: ch.m_elements,
            tx_elements: ch.n_elements,
            entries,
        }
    }

    pub fn matrix(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| {
            let [re, im] = self.entries[i * self.cols + j];
            Complex64::new(re, im)
        })
    }
}

/// Written next to every set of outputs; `--config manifest.json` replays the run.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub config: &'a crate::config::ExperimentConfig,
    pub threads: usize,
    pub wall_clock_seconds: f64,
    pub outputs: Vec<String>,
    pub failures: Vec<String>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn channel() -> SystemChannel {
        let m = DMatrix::from_fn(6, 9, |i, j| Complex64::new(i as f64 * 0.1 - 0.3, j as f64 / 7.0));
        SystemChannel::new(m, Ordering::CoordinateMajor, ChannelModel::Ca1).unwrap()
    }

    #[test]
    fn header_round_trip() {
        let h = MatrixHeader::of(&channel(), 29.5e9);
        let bytes = h.encode();
        assert_eq!(bytes.len(), HEADER_LEN);
        assert!(bytes.starts_with(b"HMIMO1 varsigma 6 9 CA1 29500000000"));
        assert_eq!(MatrixHeader::decode(&bytes).unwrap(), h);
        assert!(MatrixHeader::decode(&bytes[..10]).is_err());
        let mut bad = bytes;
        bad[0] = b'X';
        assert!(MatrixHeader::decode(&bad).is_err());
    }

    #[test]
    fn binary_and_json_round_trip() {
        let ch = channel();
        let bytes = encode_binary(&ch, 30e9);
        assert_eq!(bytes.len(), HEADER_LEN + 16 * 6 * 9);
        let (h, m) = decode_binary(&bytes).unwrap();
        assert_eq!(h.rows, 6);
        assert_eq!(m, ch.matrix);
        assert!(decode_binary(&bytes[..bytes.len() - 1]).is_err());
        let j = MatrixJson::of(&ch, 30e9);
        let text = serde_json::to_string(&j).unwrap();
        let back: MatrixJson = serde_json::from_str(&text).unwrap();
        assert_eq!(back.matrix(), ch.matrix);
    }
}
