//! Spline and exponential-spline wavelet filterbanks on circulant graphs.
//!
//! The crate covers filterbank construction and invertibility analysis,
//! biorthogonal complements with FIR synthesis, multilevel pyramids, graph
//! products and circulant approximation of arbitrary graphs.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod approx;
pub mod circulant;
pub mod cli;
pub mod complementary;
pub mod error;
pub mod filterbank;
pub mod invertibility;
pub mod io;
pub mod laurent;
pub mod multiscale;
pub mod pattern;
pub mod products;
pub mod signal;

pub use circulant::{apply_circulant, CirculantGraph, ExpMode, ExponentParam, Generator};
pub use error::{GwtError, Result};
pub use filterbank::{analyze, invert, Family, FilterBank, Transform};
pub use invertibility::{check_invertibility, lowpass_invertible, InvertibilityReport};
pub use laurent::{root_multiplicity, SymLaurentPoly};
pub use pattern::SamplingPattern;
pub use signal::{exp_poly_signal, poly_signal, GraphSignal, PolyPiece};
