//! Wideband near/far-field channel estimation for large THz arrays.
//!
//! The pipeline: draw a geometric scene ([`channel`]), build a polar-domain
//! dictionary ([`dictionary`]), observe through a random analog combiner
//! ([`measurement`]) and recover a sparse polar representation with
//! simultaneous OMP ([`omp`]). [`tensor_io`] moves estimates to and from an
//! external denoiser; [`bench`] drives the sweeps behind the `hfce` binary.

// `!(x > 0.0)` is used deliberately so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod channel;
pub mod config;
pub mod dictionary;
pub mod error;
pub mod measurement;
pub mod omp;
pub mod rng;
pub mod tensor_io;

pub use error::{Error, Result};
