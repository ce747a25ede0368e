//! Real scalar abstraction shared by every floating-point path.
//!
//! The exact paths (counting, modular arithmetic, structure constants) are
//! integer-only. Everything that touches an exponential sum is generic over
//! [`Real`], which is implemented for `f32`, `f64` and [`DoubleDouble`].

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::Neg;

use num_complex::Complex;
use num_traits::{FromPrimitive, NumAssign, ToPrimitive};

use crate::dd::DoubleDouble;

pub trait Real:
    Copy
    + Send
    + Sync
    + Default
    + Debug
    + Display
    + PartialOrd
    + NumAssign
    + Neg<Output = Self>
    + FromPrimitive
    + ToPrimitive
    + Sum
    + 'static
{
    /// Significand width including the implicit bit.
    const MANTISSA_BITS: u32;

    /// Worst-case error of one `cos_sin_turn` evaluation, in units of
    /// [`Real::unit_roundoff`].
    const PHASE_ULPS: f64;

    fn sqrt(self) -> Self;
    fn abs(self) -> Self;
    fn frac_pi_4() -> Self;
    fn frac_1_sqrt_2() -> Self;

    /// `(cos x, sin x)` for `0 <= x <= pi/4`.
    fn cos_sin_reduced(self) -> (Self, Self);

    fn unit_roundoff() -> f64 {
        (-(Self::MANTISSA_BITS as f64)).exp2()
    }

    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    fn from_int(x: i64) -> Self {
        Self::from_i64(x).expect("integer fits")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// `(cos, sin)` of `2*pi*num/den`.
    ///
    /// The turn is split into an octant index and a remainder using integer
    /// arithmetic, so the only rounding happens in the remainder fraction and
    /// the final small-angle evaluation.
    fn cos_sin_turn(num: u64, den: u64) -> (Self, Self) {
        debug_assert!(den > 0);
        let r = (num % den) as u128;
        let eighths = 8 * r;
        let octant = (eighths / den as u128) as usize;
        let rem = (eighths - octant as u128 * den as u128) as u64;
        let frac = Self::from_u64(rem).unwrap() / Self::from_u64(den).unwrap();
        let (c, s) = (Self::frac_pi_4() * frac).cos_sin_reduced();
        let h = Self::frac_1_sqrt_2();
        let z = Self::zero();
        let o = Self::one();
        let (a, b) = match octant {
            0 => (o, z),
            1 => (h, h),
            2 => (z, o),
            3 => (-h, h),
            4 => (-o, z),
            5 => (-h, -h),
            6 => (z, -o),
            _ => (h, -h),
        };
        (a * c - b * s, b * c + a * s)
    }

    fn cos_turn(num: u64, den: u64) -> Self {
        Self::cos_sin_turn(num, den).0
    }
}

macro_rules! impl_native {
    ($t:ident, $bits:expr) => {
        impl Real for $t {
            const MANTISSA_BITS: u32 = $bits;
            const PHASE_ULPS: f64 = 8.0;

            fn sqrt(self) -> Self {
                $t::sqrt(self)
            }
            fn abs(self) -> Self {
                $t::abs(self)
            }
            fn frac_pi_4() -> Self {
                std::$t::consts::FRAC_PI_4
            }
            fn frac_1_sqrt_2() -> Self {
                std::$t::consts::FRAC_1_SQRT_2
            }
            fn cos_sin_reduced(self) -> (Self, Self) {
                let (s, c) = self.sin_cos();
                (c, s)
            }
        }
    };
}

impl_native!(f32, 24);
impl_native!(f64, 53);

/// Absolute size of a scalar, as `f64`, for residual checks.
pub trait Magnitude {
    fn magnitude(&self) -> f64;
}

impl<T: Real> Magnitude for T {
    fn magnitude(&self) -> f64 {
        self.abs().as_f64()
    }
}

impl<T: Real> Magnitude for Complex<T> {
    fn magnitude(&self) -> f64 {
        (self.re * self.re + self.im * self.im).sqrt().as_f64()
    }
}

/// Runtime precision selector used by the CLI and the escalation logic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Precision {
    Double,
    DoubleDouble,
}

impl Precision {
    pub fn bits(self) -> u32 {
        match self {
            Precision::Double => <f64 as Real>::MANTISSA_BITS,
            Precision::DoubleDouble => <DoubleDouble as Real>::MANTISSA_BITS,
        }
    }
}

impl std::str::FromStr for Precision {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "double" | "53" | "f64" => Ok(Precision::Double),
            "double-double" | "dd" | "106" => Ok(Precision::DoubleDouble),
            other => Err(format!(
                "unknown precision '{other}' (expected double or double-double)"
            )),
        }
    }
}
