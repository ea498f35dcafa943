//! Line-of-sight electromagnetic-domain channel models between two
//! arbitrarily placed holographic MIMO surfaces.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`]: surface placement, element frames, the in-plane `Δz` substitution.
//! * [`em`]: scalar/dyadic free-space Green's functions and their expansions.
//! * [`channel`]: per-pair channel models (exact quadrature, CA-I, CA-II).
//! * [`assembly`]: system matrices `H^ζ`/`H^ς`, field evaluation, multi-user downlink.
//! * [`analysis`]: normalized MSE, spectra, parameter sweeps and eigenmode studies.
//!
//! Every computation is a pure function of its inputs; nothing is random.

pub mod analysis;
pub mod assembly;
pub mod channel;
pub mod em;
pub mod error;
pub mod geometry;
pub mod quadrature;

pub use analysis::{
    eigen_study, normalized_mse, singular_spectrum, spectrum, sweep_distance, sweep_elements,
    sweep_spacing, EigenCase, EigenCaseResult, Scenario, SpectrumKind, SpectrumResult, SweepKind,
    SweepPoint, SweepResult,
};
pub use assembly::{
    apply, assemble, multiuser_downlink, reorder, CurrentVector, DownlinkField, FieldVector,
    Ordering, SystemChannel,
};
pub use channel::{
    ca1_pair_channel, ca2_pair_channel, exact_pair_channel, exact_pair_channel_fixed, sinc_arguments_frame,
    sinc_arguments_cartesian, ChannelModel, PairChannel, QuadratureSpec,
};
pub use em::{amplitude_matrix, dyadic_green, first_order_distance, scalar_green, EmConstants};
pub use error::{Error, Result};
pub use geometry::{
    delta_z_coefficients, direction_vectors, element_frames, Angles, ElementFrame, SurfaceSpec,
    Vec3,
};
