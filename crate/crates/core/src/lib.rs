//! Belief-propagation decoding of stabilizer codes under phenomenological
//! noise, using generalized data-syndrome (GDS) check matrices that mix
//! quaternary qubit-error columns with binary syndrome-flip columns.

pub mod bp;
pub mod codes;
pub mod error;
pub mod experiments;
pub mod gf2;
pub mod matrix;
pub mod noise;
pub mod pauli;
pub mod tanner;

pub use bp::{
    boxplus, decode_ambp, decode_mbp, init_from_rates, lambda_w, AlphaSchedule, DecodeOutcome,
    DecoderConfig, LlrInit, MbpDecoder, Schedule,
};
pub use codes::{rotated_toric, QuasiCyclicSpec, StabilizerCode};
pub use error::{Error, Result};
pub use gf2::{BinaryMatrix, BitVec, SymplecticMatrix};
pub use matrix::{GdsCheckMatrix, QuaternaryCheckMatrix};
pub use noise::{NoiseModel, ResidualClass, TrialSample};
pub use pauli::{MixedVector, Pauli, PauliVector};
pub use tanner::TannerGraph;
