//! Uplink wideband multi-user MIMO with movable base-station antennas.
//!
//! The crate is organised bottom-up:
//!
//! - [`geometry`]: antenna positions, movement regions, plane-wave array responses
//!   and the fixed-array baselines.
//! - [`channel`]: pulse-shaped multipath channels as FIR taps and per-subcarrier
//!   frequency responses.
//! - [`rate`]: the hardware-impairment-aware sum rate, its high-SNR limit and the
//!   interference-free bound.
//! - [`pso`]: a box-constrained particle swarm and the antenna placement objective
//!   built on top of it.
//! - [`scenario`]: random user drops and multipath generation for LOS-dominant and
//!   rich-scattering environments.
//! - [`experiment`]: paired-drop sweeps over subcarriers, EVM and transmit power.
//!
//! Numerical code is generic over [`Real`] (`f32` or `f64`). The aliases at the
//! crate root fix the scalar to `f64`, which is what the experiment harness uses.

// `!(x > 0)` is how validation rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod linalg;
pub mod pso;
pub mod rate;
pub mod scenario;

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

pub use error::{Error, Result};

/// Floating-point scalar used throughout the numerical core.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + FromStr
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from `f64`; exact for `f64` itself.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(v: usize) -> Self {
        Self::from_usize(v).expect("usize representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub type Complex<T> = num_complex::Complex<T>;

pub type Position = geometry::Position3<f64>;
pub type Layout = geometry::ArrayLayout<f64>;
pub type Region = geometry::MovementRegion<f64>;
pub type Grid = geometry::RegionGrid<f64>;
pub type Path = channel::PathComponent<f64>;
pub type Paths = channel::UserPaths<f64>;
pub type Ofdm = channel::OfdmConfig<f64>;
pub type Fir = channel::FirChannel<f64>;
pub type FreqChannel = channel::FrequencyChannel<f64>;
pub type CMat = linalg::CMatrix<f64>;
pub type Rates = rate::RateParams<f64>;
pub type RateOutcome = rate::RateResult<f64>;
pub type Swarm = pso::SwarmConfig<f64>;
pub type Trace = pso::SwarmTrace<f64>;

pub type LayoutF32 = geometry::ArrayLayout<f32>;
pub type FreqChannelF32 = channel::FrequencyChannel<f32>;
pub type RatesF32 = rate::RateParams<f32>;
