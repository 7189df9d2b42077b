//! Dyadic harmonic analysis on exact step functions.

pub mod ensemble;
pub mod error;
pub mod haar;
pub mod hilbert;
pub mod interval;
pub mod maximal;
pub mod paraproduct;
pub mod power;
pub mod shift;
pub mod carleson;
pub mod fourier;
pub mod hankel;
pub mod harness;
pub mod averaging;
pub mod step;

mod grid;
mod par;

pub use error::{Error, Result};
pub use haar::{analyze, haar_eval, synthesize, HaarExpansion, HaarVariant};
pub use interval::DyadicInterval;
pub use step::{inner_product, PiecewiseConstant};
