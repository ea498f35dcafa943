//! System-level channel matrices.
//!
//! Element-major (`ζ`) storage interleaves `(x, y, z)` per element, so the
//! `(m, n)` pair block sits at rows `3m..3m+3`, columns `3n..3n+3`.
//! Coordinate-major (`ς`) storage groups all x components first, then y,
//! then z: entry `(p·M + m, q·N + n)` of `H^ς` equals `H^ζ[3m + p, 3n + q]`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{pair_channel, ChannelModel, QuadratureCertificate, QuadratureSpec};
use crate::em::{EmConstants, C3};
use crate::error::{Error, Result};
use crate::geometry::ElementFrame;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Ordering {
    /// `ζ`: per-element `(x, y, z)` triples.
    #[serde(rename = "zeta")]
    ElementMajor,
    /// `ς`: all x, then all y, then all z.
    #[serde(rename = "varsigma")]
    CoordinateMajor,
}

impl Ordering {
    pub fn other(self) -> Self {
        match self {
            Ordering::ElementMajor => Ordering::CoordinateMajor,
            Ordering::CoordinateMajor => Ordering::ElementMajor,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Ordering::ElementMajor => "zeta",
            Ordering::CoordinateMajor => "varsigma",
        }
    }
}

impl std::str::FromStr for Ordering {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zeta" | "element-major" => Ok(Ordering::ElementMajor),
            "varsigma" | "coordinate-major" => Ok(Ordering::CoordinateMajor),
            other => Err(Error::InvalidArgument(format!("unknown ordering '{other}'"))),
        }
    }
}

/// Position of element-major index `i` (element `i / 3`, component `i % 3`)
/// in coordinate-major storage over `elements` elements.
#[inline]
pub fn coordinate_major_index(i: usize, elements: usize) -> usize {
    (i % 3) * elements + i / 3
}

/// Inverse of [`coordinate_major_index`].
#[inline]
pub fn element_major_index(i: usize, elements: usize) -> usize {
    3 * (i % elements) + i / elements
}

/// Index map taking a vector in `from` ordering to the other ordering:
/// `out[map[i]] = v[i]`.
fn permutation(from: Ordering, elements: usize) -> impl Fn(usize) -> usize {
    move |i| match from {
        Ordering::ElementMajor => coordinate_major_index(i, elements),
        Ordering::CoordinateMajor => element_major_index(i, elements),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemChannel {
    pub matrix: DMatrix<Complex64>,
    pub ordering: Ordering,
    pub m_elements: usize,
    pub n_elements: usize,
    pub model: ChannelModel,
    /// Worst-case quadrature certificate over all pairs (exact model only).
    pub certificate: Option<QuadratureCertificate>,
}

impl SystemChannel {
    pub fn new(
        matrix: DMatrix<Complex64>,
        ordering: Ordering,
        model: ChannelModel,
    ) -> Result<Self> {
        if matrix.nrows() % 3 != 0 || matrix.ncols() % 3 != 0 || matrix.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "channel dimensions {}x{} are not positive multiples of 3",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(SystemChannel {
            m_elements: matrix.nrows() / 3,
            n_elements: matrix.ncols() / 3,
            matrix,
            ordering,
            model,
            certificate: None,
        })
    }

    pub fn rows(&self) -> usize {
        3 * self.m_elements
    }

    pub fn cols(&self) -> usize {
        3 * self.n_elements
    }

    /// The 3×3 pair block `(m, n)` regardless of storage ordering.
    pub fn block(&self, m: usize, n: usize) -> C3 {
        match self.ordering {
            Ordering::ElementMajor => {
                C3::from_fn(|p, q| self.matrix[(3 * m + p, 3 * n + q)])
            }
            Ordering::CoordinateMajor => C3::from_fn(|p, q| {
                self.matrix[(p * self.m_elements + m, q * self.n_elements + n)]
            }),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.norm()
    }
}

/// Build `H^ζ` from per-pair channels, blocks in canonical element order.
pub fn assemble(
    tx_frames: &[ElementFrame],
    rx_frames: &[ElementFrame],
    k: &EmConstants,
    model: ChannelModel,
    q: Option<&QuadratureSpec>,
) -> Result<SystemChannel> {
    if tx_frames.is_empty() || rx_frames.is_empty() {
        return Err(Error::InvalidArgument("frame lists must be non-empty".into()));
    }
    match (model, q) {
        (ChannelModel::Exact, None) => {
            return Err(Error::InvalidArgument(
                "the exact model needs a quadrature spec".into(),
            ))
        }
        (ChannelModel::Ca1 | ChannelModel::Ca2, Some(_)) => {
            return Err(Error::InvalidArgument(format!(
                "a quadrature spec is only meaningful for the exact model, not {model}"
            )))
        }
        _ => {}
    }
    let (m_len, n_len) = (rx_frames.len(), tx_frames.len());
    let blocks: Vec<(C3, Option<QuadratureCertificate>)> = (0..m_len * n_len)
        .into_par_iter()
        .map(|idx| {
            let (m, n) = (idx / n_len, idx % n_len);
            pair_channel(&tx_frames[n], &rx_frames[m], k, model, q)
                .map(|p| (p.matrix, p.certificate))
                .map_err(|e| Error::Pair {
                    rx: m,
                    tx: n,
                    source: Box::new(e),
                })
        })
        .collect::<Result<_>>()?;

    let mut matrix = DMatrix::<Complex64>::zeros(3 * m_len, 3 * n_len);
    let mut certificate: Option<QuadratureCertificate> = None;
    for (idx, (block, cert)) in blocks.into_iter().enumerate() {
        let (m, n) = (idx / n_len, idx % n_len);
        matrix
            .fixed_view_mut::<3, 3>(3 * m, 3 * n)
            .copy_from(&block);
        if let Some(c) = cert {
            certificate = Some(match certificate {
                None => c,
                Some(w) => QuadratureCertificate {
                    nodes_per_axis: w.nodes_per_axis.max(c.nodes_per_axis),
                    rel_change: w.rel_change.max(c.rel_change),
                },
            });
        }
    }
    Ok(SystemChannel {
        matrix,
        ordering: Ordering::ElementMajor,
        m_elements: m_len,
        n_elements: n_len,
        model,
        certificate,
    })
}

/// Convert to the other ordering: `H^ς = P_R H^ζ P_Tᵀ` (or its inverse).
pub fn reorder(ch: &SystemChannel) -> SystemChannel {
    let (rows, cols) = (ch.rows(), ch.cols());
    let row_map = permutation(ch.ordering, ch.m_elements);
    let col_map = permutation(ch.ordering, ch.n_elements);
    let mut out = DMatrix::<Complex64>::zeros(rows, cols);
    for j in 0..cols {
        let jj = col_map(j);
        for i in 0..rows {
            out[(row_map(i), jj)] = ch.matrix[(i, j)];
        }
    }
    SystemChannel {
        matrix: out,
        ordering: ch.ordering.other(),
        m_elements: ch.m_elements,
        n_elements: ch.n_elements,
        model: ch.model,
        certificate: ch.certificate,
    }
}

/// Per-element current excitations `j` (3 complex components per TE element).
#[derive(Debug, Clone, PartialEq)]
pub struct CurrentVector {
    pub values: DVector<Complex64>,
    pub ordering: Ordering,
}

/// Received electric fields (3 complex components per RE element).
#[derive(Debug, Clone, PartialEq)]
pub struct FieldVector {
    pub values: DVector<Complex64>,
    pub ordering: Ordering,
}

macro_rules! impl_stacked_vector {
    ($t:ty) => {
        impl $t {
            pub fn new(values: DVector<Complex64>, ordering: Ordering) -> Result<Self> {
                if values.len() % 3 != 0 {
                    return Err(Error::DimensionMismatch {
                        expected: 3 * (values.len() / 3 + 1),
                        found: values.len(),
                    });
                }
                Ok(Self { values, ordering })
            }

            pub fn zeros(elements: usize, ordering: Ordering) -> Self {
                Self {
                    values: DVector::zeros(3 * elements),
                    ordering,
                }
            }

            pub fn elements(&self) -> usize {
                self.values.len() / 3
            }

            /// Same data in the other ordering.
            pub fn reorder(&self) -> Self {
                let map = permutation(self.ordering, self.elements());
                let mut out = DVector::zeros(self.values.len());
                for (i, v) in self.values.iter().enumerate() {
                    out[map(i)] = *v;
                }
                Self {
                    values: out,
                    ordering: self.ordering.other(),
                }
            }
        }
    };
}

impl_stacked_vector!(CurrentVector);
impl_stacked_vector!(FieldVector);

/// `e = H j`.
pub fn apply(ch: &SystemChannel, j: &CurrentVector) -> Result<FieldVector> {
    if ch.ordering != j.ordering {
        return Err(Error::OrderingMismatch {
            channel: ch.ordering,
            vector: j.ordering,
        });
    }
    if j.values.len() != ch.cols() {
        return Err(Error::DimensionMismatch {
            expected: ch.cols(),
            found: j.values.len(),
        });
    }
    Ok(FieldVector {
        values: &ch.matrix * &j.values,
        ordering: ch.ordering,
    })
}

/// Field at one receiver split into its intended and interfering parts.
#[derive(Debug, Clone, PartialEq)]
pub struct DownlinkField {
    pub signal: FieldVector,
    pub interference: FieldVector,
}

impl DownlinkField {
    pub fn total(&self) -> DVector<Complex64> {
        &self.signal.values + &self.interference.values
    }
}

/// Multi-user downlink: receiver `k` sees `H_k j_k` plus `Σ_{i≠k} H_k j_i`.
pub fn multiuser_downlink(
    channels: &[SystemChannel],
    currents: &[CurrentVector],
) -> Result<Vec<DownlinkField>> {
    if channels.is_empty() {
        return Err(Error::InvalidArgument("at least one receiver is required".into()));
    }
    if channels.len() != currents.len() {
        return Err(Error::DimensionMismatch {
            expected: channels.len(),
            found: currents.len(),
        });
    }
    let first = &channels[0];
    for ch in channels {
        if ch.n_elements != first.n_elements {
            return Err(Error::DimensionMismatch {
                expected: first.cols(),
                found: ch.cols(),
            });
        }
        if ch.ordering != first.ordering {
            return Err(Error::OrderingMismatch {
                channel: first.ordering,
                vector: ch.ordering,
            });
        }
    }
    for j in currents {
        if j.ordering != first.ordering {
            return Err(Error::OrderingMismatch {
                channel: first.ordering,
                vector: j.ordering,
            });
        }
        if j.values.len() != first.cols() {
            return Err(Error::DimensionMismatch {
                expected: first.cols(),
                found: j.values.len(),
            });
        }
    }
    channels
        .iter()
        .enumerate()
        .map(|(k, h)| {
            let signal = apply(h, &currents[k])?;
            let mut others = CurrentVector::zeros(h.n_elements, h.ordering);
            for (i, j) in currents.iter().enumerate() {
                if i != k {
                    others.values += &j.values;
                }
            }
            let interference = apply(h, &others)?;
            Ok(DownlinkField {
                signal,
                interference,
            })
        })
        .collect()
}
