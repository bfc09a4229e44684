//! Achievable uplink sum rate with transmitter hardware distortion.
//!
//! Every user transmits `√ρ(√(1-EVM²) d + ε)` with unit-variance data `d` and
//! distortion `ε` of variance EVM². Treating the distortion as worst-case
//! uncorrelated noise, the rate on subcarrier ν is
//!
//! ```text
//! R[ν] = log₂det(I + (ρ/σ²) H̄H̄ᴴ) - log₂det(I + (ρEVM²/σ²) H̄H̄ᴴ)
//! ```
//!
//! and the reported figure is the average over subcarriers. All determinants are
//! taken on the smaller Gram matrix.

use crate::channel::FrequencyChannel;
use crate::linalg::{logdet_identity_plus, CMatrix};
use crate::{Error, Real, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateParams<T> {
    /// Transmit power per user and subcarrier (W).
    pub power: T,
    /// Receiver noise variance per subcarrier (W).
    pub noise: T,
    /// Error vector magnitude in `[0, 1]`.
    pub evm: T,
}

impl<T: Real> RateParams<T> {
    pub fn new(power: T, noise: T, evm: T) -> Result<Self> {
        let p = Self { power, noise, evm };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.power >= T::zero()) || !self.power.is_finite() {
            return Err(Error::invalid(format!("transmit power must be finite and >= 0, got {}", self.power)));
        }
        if !(self.noise > T::zero()) {
            return Err(Error::invalid(format!("noise variance must be > 0, got {}", self.noise)));
        }
        if !(self.evm >= T::zero() && self.evm <= T::one()) {
            return Err(Error::invalid(format!("EVM must lie in [0, 1], got {}", self.evm)));
        }
        Ok(())
    }

    pub fn snr(&self) -> T {
        self.power / self.noise
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateResult<T> {
    /// Subcarrier-averaged sum rate (bit/s/Hz).
    pub sum_rate: T,
    pub per_subcarrier: Vec<T>,
}

/// `log₂det(I + sG) - log₂det(I + s·EVM²·G)` for one Gram matrix.
fn impaired_rate<T: Real>(gram: &CMatrix<T>, params: &RateParams<T>) -> Result<T> {
    if params.evm == T::one() || params.power == T::zero() {
        return Ok(T::zero());
    }
    let snr = params.snr();
    let ideal = logdet_identity_plus(gram, snr)?;
    let penalty =
        if params.evm == T::zero() { T::zero() } else { logdet_identity_plus(gram, snr * params.evm * params.evm)? };
    Ok((ideal - penalty).max(T::zero()))
}

/// Average sum rate over the subcarriers of `channel`.
pub fn sum_rate<T: Real>(channel: &FrequencyChannel<T>, params: &RateParams<T>) -> Result<RateResult<T>> {
    params.validate()?;
    let per_subcarrier =
        channel.matrices().iter().map(|h| impaired_rate(&h.compact_gram(), params)).collect::<Result<Vec<T>>>()?;
    let sum_rate = mean(&per_subcarrier);
    Ok(RateResult { sum_rate, per_subcarrier })
}

/// The two terms of the rate separately: `(ideal-hardware rate, impairment penalty)`, both averaged.
pub fn rate_terms<T: Real>(channel: &FrequencyChannel<T>, params: &RateParams<T>) -> Result<(T, T)> {
    params.validate()?;
    let snr = params.snr();
    let mut ideal = Vec::with_capacity(channel.subcarriers());
    let mut penalty = Vec::with_capacity(channel.subcarriers());
    for h in channel.matrices() {
        let g = h.compact_gram();
        ideal.push(logdet_identity_plus(&g, snr)?);
        penalty.push(logdet_identity_plus(&g, snr * params.evm * params.evm)?);
    }
    Ok((mean(&ideal), mean(&penalty)))
}

/// High-SNR limit `K log₂(1/EVM²)`; `+inf` for ideal hardware.
pub fn asymptotic_limit<T: Real>(users: usize, evm: T) -> Result<T> {
    if !(evm >= T::zero() && evm <= T::one()) {
        return Err(Error::invalid(format!("EVM must lie in [0, 1], got {evm}")));
    }
    if evm == T::zero() {
        return Ok(T::infinity());
    }
    Ok(T::from_usize_lossy(users) * (T::one() / (evm * evm)).log2())
}

/// Sum of single-user rates, each user served alone on its own column.
pub fn interference_free_bound<T: Real>(channel: &FrequencyChannel<T>, params: &RateParams<T>) -> Result<T> {
    params.validate()?;
    if params.evm == T::one() || params.power == T::zero() {
        return Ok(T::zero());
    }
    let snr = params.snr();
    let evm2 = params.evm * params.evm;
    let mut total = T::zero();
    for h in channel.matrices() {
        for k in 0..h.cols() {
            let gain = (0..h.rows()).fold(T::zero(), |acc, r| acc + h[(r, k)].norm_sqr());
            let rate = (T::one() + snr * gain).log2() - (T::one() + snr * evm2 * gain).log2();
            total += rate.max(T::zero());
        }
    }
    Ok(total / T::from_usize_lossy(channel.subcarriers()))
}

pub(crate) fn mean<T: Real>(v: &[T]) -> T {
    if v.is_empty() {
        return T::zero();
    }
    v.iter().fold(T::zero(), |a, &b| a + b) / T::from_usize_lossy(v.len())
}
