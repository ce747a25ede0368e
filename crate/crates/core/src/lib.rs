//! Heilbronn sums `H_p(a)` realized as supercharacter values on `Z/p^2Z`,
//! exact counts for the Fermat congruence `a x^p + b y^p = c z^p (mod p^2)`,
//! and brute-force oracles for every identity used along the way.
//!
//! Numerical code is generic over [`Real`]; `f64` is the default scalar and
//! [`DoubleDouble`] the extended one.

pub mod bench;
pub mod dd;
pub mod error;
pub mod fermat;
pub mod heilbronn;
pub mod matrix;
pub mod modarith;
pub mod scalar;
pub mod sctheory;
pub mod verify;

pub use dd::DoubleDouble;
pub use error::{Error, Result};
pub use modarith::PrimeContext;
pub use scalar::{Precision, Real};

pub type Spectrum64 = heilbronn::Spectrum<f64>;
pub type SpectrumDD = heilbronn::Spectrum<DoubleDouble>;
pub type HeilbronnTable64 = heilbronn::HeilbronnTable<f64>;
pub type HeilbronnTableDD = heilbronn::HeilbronnTable<DoubleDouble>;
pub type FermatEngine = fermat::SpectralEngine;
