//! Pulse-shaped wideband multipath channels.
//!
//! Each far-field path contributes to at most a couple of delay taps (the pulse
//! has support `[-1, 1]` in units of the sample period `1/(SΔ)`). Frequency
//! responses are computed per path from those few taps, so the full FIR tensor is
//! only materialised by [`fir_taps`].

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use num_complex::Complex;
use num_traits::Zero;

use crate::geometry::{parse_field, response_for_wave_vector, wave_vector, ArrayLayout};
use crate::linalg::CMatrix;
use crate::{Error, Real, Result, SPEED_OF_LIGHT};

/// Relative slack when rounding the delay spread up to a whole number of taps.
const TAP_ROUND_RTOL: f64 = 1e-9;

/// One far-field propagation path.
///
/// `phase` is the scatterer phase (radians) applied on top of the delay-induced
/// carrier rotation; it is 0 for a purely geometric path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathComponent<T> {
    pub amplitude: T,
    pub phase: T,
    pub delay: T,
    pub azimuth: T,
    pub elevation: T,
}

impl<T: Real> PathComponent<T> {
    pub fn new(amplitude: T, delay: T, azimuth: T, elevation: T) -> Self {
        Self { amplitude, phase: T::zero(), delay, azimuth, elevation }
    }

    pub fn with_phase(mut self, phase: T) -> Self {
        self.phase = phase;
        self
    }

    fn validate(&self) -> Result<()> {
        let fields = [self.amplitude, self.phase, self.delay, self.azimuth, self.elevation];
        if fields.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("path has a non-finite field"));
        }
        if self.amplitude < T::zero() {
            return Err(Error::invalid(format!("path amplitude must be >= 0, got {}", self.amplitude)));
        }
        if self.delay < T::zero() {
            return Err(Error::invalid(format!("path delay must be >= 0, got {}", self.delay)));
        }
        Ok(())
    }
}

/// All paths of one user.
#[derive(Debug, Clone, PartialEq)]
pub struct UserPaths<T> {
    paths: Vec<PathComponent<T>>,
}

impl<T: Real> UserPaths<T> {
    pub fn new(paths: Vec<PathComponent<T>>) -> Result<Self> {
        if paths.is_empty() {
            return Err(Error::invalid("a user needs at least one path"));
        }
        for p in &paths {
            p.validate()?;
        }
        Ok(Self { paths })
    }

    pub fn paths(&self) -> &[PathComponent<T>] {
        &self.paths
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    /// Concatenation of two path sets for the same user.
    pub fn union(&self, other: &Self) -> Self {
        Self { paths: self.paths.iter().chain(&other.paths).copied().collect() }
    }

    pub fn total_power(&self) -> T {
        self.paths.iter().fold(T::zero(), |acc, p| acc + p.amplitude * p.amplitude)
    }
}

/// How the delay-dependent carrier phase of a path coefficient is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Deserialize, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CarrierPhase {
    /// `exp(-j 2π f_c (τ - η))`.
    #[default]
    Carrier,
    /// `exp(-j 2π λ (τ - η) / c)`, kept for auditing the dimensionally inconsistent variant.
    AsPrinted,
}

/// Receive pulse with support `[-1, 1]` (in sample periods).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Pulse<T> {
    /// `1 - |t|`: box filters at transmitter and receiver.
    #[default]
    Triangle,
    /// Raised-cosine impulse with the given roll-off, windowed to `[-1, 1]`.
    RaisedCosine { rolloff: T },
}

impl<T: Real> Pulse<T> {
    pub fn eval(&self, t: T) -> T {
        let a = t.abs();
        if a >= T::one() {
            return T::zero();
        }
        match *self {
            Pulse::Triangle => T::one() - a,
            Pulse::RaisedCosine { rolloff } => raised_cosine(t, rolloff),
        }
    }
}

/// `1 - |t|` on `[-1, 1]`, zero elsewhere.
pub fn pulse_triangle<T: Real>(t: T) -> T {
    Pulse::Triangle.eval(t)
}

fn raised_cosine<T: Real>(t: T, beta: T) -> T {
    let pi = T::PI();
    let sinc = |x: T| if x == T::zero() { T::one() } else { (pi * x).sin() / (pi * x) };
    let two_bt = T::lit(2.0) * beta * t;
    let denom = T::one() - two_bt * two_bt;
    if denom.abs() < T::lit(1e-9) {
        // limit at t = ±1/(2β)
        return pi / T::lit(4.0) * sinc(T::one() / (T::lit(2.0) * beta));
    }
    sinc(t) * (pi * beta * t).cos() / denom
}

/// OFDM numerology: `S` subcarriers with spacing `Δ` around carrier `f_c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OfdmConfig<T> {
    pub subcarriers: usize,
    pub spacing_hz: T,
    pub carrier_hz: T,
    pub pulse: Pulse<T>,
    pub phase: CarrierPhase,
}

impl<T: Real> OfdmConfig<T> {
    pub fn new(subcarriers: usize, spacing_hz: T, carrier_hz: T) -> Result<Self> {
        let cfg = Self { subcarriers, spacing_hz, carrier_hz, pulse: Pulse::Triangle, phase: CarrierPhase::Carrier };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_pulse(mut self, pulse: Pulse<T>) -> Self {
        self.pulse = pulse;
        self
    }

    pub fn with_phase(mut self, phase: CarrierPhase) -> Self {
        self.phase = phase;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.subcarriers == 0 {
            return Err(Error::invalid("need at least one subcarrier"));
        }
        if !(self.spacing_hz > T::zero()) || !(self.carrier_hz > T::zero()) {
            return Err(Error::invalid("subcarrier spacing and carrier frequency must be positive"));
        }
        Ok(())
    }

    pub fn wavelength(&self) -> T {
        T::lit(SPEED_OF_LIGHT) / self.carrier_hz
    }

    /// `SΔ`, the sampling rate of the tap-domain model.
    pub fn bandwidth(&self) -> T {
        T::from_usize_lossy(self.subcarriers) * self.spacing_hz
    }

    fn carrier_rotation(&self, excess_delay: T) -> T {
        match self.phase {
            CarrierPhase::Carrier => -T::TAU() * self.carrier_hz * excess_delay,
            CarrierPhase::AsPrinted => -T::TAU() * self.wavelength() * excess_delay / T::lit(SPEED_OF_LIGHT),
        }
    }
}

/// Delay-domain channel of one user: `taps[ℓ]` is the M-vector for tap ℓ = 0..=T.
#[derive(Debug, Clone, PartialEq)]
pub struct FirChannel<T> {
    pub taps: Vec<Vec<Complex<T>>>,
    pub sync: T,
    pub tap_count: usize,
}

impl<T: Real> FirChannel<T> {
    /// `Σ_ℓ ‖h[ℓ]‖²`.
    pub fn energy(&self) -> T {
        self.taps.iter().flatten().fold(T::zero(), |acc, z| acc + z.norm_sqr())
    }
}

/// Per-subcarrier channel matrices `H̄[ν]` (M antennas x K users).
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyChannel<T> {
    matrices: Vec<CMatrix<T>>,
}

impl<T: Real> FrequencyChannel<T> {
    pub fn new(matrices: Vec<CMatrix<T>>) -> Result<Self> {
        let Some(first) = matrices.first() else {
            return Err(Error::invalid("frequency channel needs at least one subcarrier"));
        };
        let (m, k) = (first.rows(), first.cols());
        if m == 0 || k == 0 {
            return Err(Error::ShapeMismatch("empty channel matrix".into()));
        }
        if matrices.iter().any(|h| h.rows() != m || h.cols() != k) {
            return Err(Error::ShapeMismatch("subcarrier matrices differ in shape".into()));
        }
        Ok(Self { matrices })
    }

    /// Assembles `H̄[ν]` from per-user responses `per_user[i][ν]` (each an M-vector).
    pub fn from_user_responses(per_user: &[Vec<Vec<Complex<T>>>]) -> Result<Self> {
        let Some(first) = per_user.first() else {
            return Err(Error::invalid("no users"));
        };
        let s = first.len();
        if per_user.iter().any(|u| u.len() != s) {
            return Err(Error::ShapeMismatch("users have different subcarrier counts".into()));
        }
        let matrices = (0..s)
            .map(|nu| {
                let cols: Vec<Vec<Complex<T>>> = per_user.iter().map(|u| u[nu].clone()).collect();
                CMatrix::from_columns(&cols)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(matrices)
    }

    pub fn matrices(&self) -> &[CMatrix<T>] {
        &self.matrices
    }

    pub fn subcarriers(&self) -> usize {
        self.matrices.len()
    }

    pub fn antennas(&self) -> usize {
        self.matrices[0].rows()
    }

    pub fn users(&self) -> usize {
        self.matrices[0].cols()
    }

    /// Channel restricted to user `k`'s column.
    pub fn user_column(&self, k: usize) -> Self {
        let matrices = self.matrices.iter().map(|h| CMatrix::from_fn(h.rows(), 1, |r, _| h[(r, k)])).collect();
        Self { matrices }
    }
}

/// Sync offset `η` (fastest path over all users) and tap count `T = ⌈SΔ(max τ - η)⌉`.
pub fn sync_and_tap_count<T: Real>(users: &[UserPaths<T>], cfg: &OfdmConfig<T>) -> Result<(T, usize)> {
    let mut delays = users.iter().flat_map(|u| u.paths().iter().map(|p| p.delay));
    let first = delays.next().ok_or_else(|| Error::invalid("no paths to synchronise on"))?;
    let (min, max) = delays.fold((first, first), |(lo, hi), d| (lo.min(d), hi.max(d)));
    let spread = cfg.bandwidth() * (max - min);
    let slack = T::lit(TAP_ROUND_RTOL) * spread.max(T::one());
    let taps = (spread - slack).ceil().max(T::zero());
    let taps = taps.to_usize().ok_or_else(|| Error::invalid("tap count overflow"))?;
    Ok((min, taps))
}

/// Non-zero taps of one path: `(ℓ, b[ℓ])` for the ℓ in `0..=tap_count` inside the pulse support.
pub fn path_taps<T: Real>(
    path: &PathComponent<T>,
    cfg: &OfdmConfig<T>,
    sync: T,
    tap_count: usize,
) -> impl Iterator<Item = (usize, Complex<T>)> {
    let excess = path.delay - sync;
    let shift = cfg.bandwidth() * excess;
    let rot = Complex::from_polar(path.amplitude, path.phase + cfg.carrier_rotation(excess));
    let lo = (shift - T::one()).ceil().max(T::zero()).to_usize().unwrap_or(0);
    let hi = (shift + T::one()).floor().to_usize().unwrap_or(0).min(tap_count);
    let pulse = cfg.pulse;
    (lo..=hi).filter_map(move |l| {
        let w = pulse.eval(T::from_usize_lossy(l) - shift);
        (w != T::zero()).then(|| (l, rot * w))
    })
}

/// FIR taps `h[ℓ] = Σ_n b_n[ℓ] a(φ_n, θ_n)` for ℓ = 0..=T.
pub fn fir_taps<T: Real>(
    user: &UserPaths<T>,
    layout: &ArrayLayout<T>,
    cfg: &OfdmConfig<T>,
    sync: T,
    tap_count: usize,
) -> Result<FirChannel<T>> {
    let m = layout.len();
    let mut taps = vec![vec![Complex::zero(); m]; tap_count + 1];
    for path in user.paths() {
        let k = wave_vector(path.azimuth, path.elevation, layout.wavelength())?;
        let a = response_for_wave_vector(layout, &k);
        for (l, b) in path_taps(path, cfg, sync, tap_count) {
            for (h, ai) in taps[l].iter_mut().zip(&a) {
                *h += b * ai;
            }
        }
    }
    Ok(FirChannel { taps, sync, tap_count })
}

/// `e^{-j2π ℓν/S}` with the exponent reduced modulo S first.
#[inline]
fn dft_twiddle<T: Real>(l: usize, nu: usize, s: usize) -> Complex<T> {
    let r = (l % s) * (nu % s) % s;
    Complex::from_polar(T::one(), -T::TAU() * T::from_usize_lossy(r) / T::from_usize_lossy(s))
}

/// Length-S DFT of a FIR channel: one M-vector per subcarrier.
pub fn fir_frequency_response<T: Real>(fir: &FirChannel<T>, subcarriers: usize) -> Vec<Vec<Complex<T>>> {
    let m = fir.taps.first().map_or(0, Vec::len);
    (0..subcarriers)
        .map(|nu| {
            let mut h = vec![Complex::zero(); m];
            for (l, tap) in fir.taps.iter().enumerate() {
                let w = dft_twiddle::<T>(l, nu, subcarriers);
                for (hm, t) in h.iter_mut().zip(tap) {
                    *hm += w * t;
                }
            }
            h
        })
        .collect()
}

/// `Σ_ℓ b[ℓ] e^{-j2πℓν/S}` for every subcarrier ν of one path.
pub fn path_frequency_coefficients<T: Real>(
    path: &PathComponent<T>,
    cfg: &OfdmConfig<T>,
    sync: T,
    tap_count: usize,
) -> Vec<Complex<T>> {
    let s = cfg.subcarriers;
    let taps: Vec<(usize, Complex<T>)> = path_taps(path, cfg, sync, tap_count).collect();
    (0..s).map(|nu| taps.iter().fold(Complex::zero(), |acc, &(l, b)| acc + b * dft_twiddle(l, nu, s))).collect()
}

/// Layout-independent part of the channel of every user: per path, the wave
/// vector and its non-zero delay taps, plus the tap-to-subcarrier DFT table.
///
/// Synthesising `H̄[ν]` for a new layout costs the array responses, a few tap
/// accumulations per path and one `(T+1) x S` DFT per antenna. This is the route
/// used inside the optimiser; [`frequency_channel`] evaluates the per-path closed
/// form instead.
#[derive(Debug, Clone)]
pub struct PreparedChannel<T> {
    users: Vec<Vec<PreparedPath<T>>>,
    subcarriers: usize,
    wavelength: T,
    sync: T,
    tap_count: usize,
    /// `twiddles[ℓ * S + ν] = e^{-j2πℓν/S}`.
    twiddles: Vec<Complex<T>>,
}

#[derive(Debug, Clone)]
struct PreparedPath<T> {
    wave: [T; 3],
    taps: Vec<(usize, Complex<T>)>,
}

impl<T: Real> PreparedChannel<T> {
    pub fn new(users: &[UserPaths<T>], cfg: &OfdmConfig<T>) -> Result<Self> {
        cfg.validate()?;
        let (sync, tap_count) = sync_and_tap_count(users, cfg)?;
        let wavelength = cfg.wavelength();
        let users = users
            .iter()
            .map(|u| {
                u.paths()
                    .iter()
                    .filter(|p| p.amplitude > T::zero())
                    .map(|p| {
                        Ok(PreparedPath {
                            wave: wave_vector(p.azimuth, p.elevation, wavelength)?,
                            taps: path_taps(p, cfg, sync, tap_count).collect(),
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let s = cfg.subcarriers;
        let twiddles = (0..=tap_count).flat_map(|l| (0..s).map(move |nu| dft_twiddle(l, nu, s))).collect();
        Ok(Self { users, subcarriers: s, wavelength, sync, tap_count, twiddles })
    }

    pub fn users(&self) -> usize {
        self.users.len()
    }

    pub fn subcarriers(&self) -> usize {
        self.subcarriers
    }

    pub fn sync(&self) -> T {
        self.sync
    }

    pub fn tap_count(&self) -> usize {
        self.tap_count
    }

    pub fn wavelength(&self) -> T {
        self.wavelength
    }

    /// Per-user responses `h̄_i[ν]` for the given layout.
    pub fn user_responses(&self, layout: &ArrayLayout<T>) -> Vec<Vec<Vec<Complex<T>>>> {
        let m = layout.len();
        let s = self.subcarriers;
        let n_taps = self.tap_count + 1;
        let mut taps = vec![Complex::zero(); n_taps * m];
        self.users
            .iter()
            .map(|paths| {
                taps.iter_mut().for_each(|z| *z = Complex::zero());
                for p in paths {
                    let a = response_for_wave_vector(layout, &p.wave);
                    for &(l, b) in &p.taps {
                        for (h, ai) in taps[l * m..(l + 1) * m].iter_mut().zip(&a) {
                            *h += b * ai;
                        }
                    }
                }
                let mut h = vec![vec![Complex::zero(); m]; s];
                for l in 0..n_taps {
                    let tap = &taps[l * m..(l + 1) * m];
                    if tap.iter().all(|z| z.is_zero()) {
                        continue;
                    }
                    let row = &self.twiddles[l * s..(l + 1) * s];
                    for (hn, w) in h.iter_mut().zip(row) {
                        for (x, t) in hn.iter_mut().zip(tap) {
                            *x += w * t;
                        }
                    }
                }
                h
            })
            .collect()
    }

    pub fn synthesize(&self, layout: &ArrayLayout<T>) -> Result<FrequencyChannel<T>> {
        if (layout.wavelength() - self.wavelength).abs() > self.wavelength * T::lit(1e-9) {
            return Err(Error::invalid("layout wavelength differs from the carrier wavelength"));
        }
        FrequencyChannel::from_user_responses(&self.user_responses(layout))
    }
}

/// `H̄[ν]` for all users on the given layout, synchronised on the fastest path.
pub fn frequency_channel<T: Real>(
    users: &[UserPaths<T>],
    layout: &ArrayLayout<T>,
    cfg: &OfdmConfig<T>,
) -> Result<FrequencyChannel<T>> {
    cfg.validate()?;
    let (sync, tap_count) = sync_and_tap_count(users, cfg)?;
    let responses =
        users.iter().map(|u| user_frequency_response(u, layout, cfg, sync, tap_count)).collect::<Result<Vec<_>>>()?;
    FrequencyChannel::from_user_responses(&responses)
}

/// `h̄[ν] = Σ_n (Σ_ℓ b_n[ℓ] e^{-j2πℓν/S}) a(φ_n, θ_n)` for one user.
pub fn user_frequency_response<T: Real>(
    user: &UserPaths<T>,
    layout: &ArrayLayout<T>,
    cfg: &OfdmConfig<T>,
    sync: T,
    tap_count: usize,
) -> Result<Vec<Vec<Complex<T>>>> {
    let m = layout.len();
    let mut h = vec![vec![Complex::zero(); m]; cfg.subcarriers];
    for path in user.paths() {
        let k = wave_vector(path.azimuth, path.elevation, layout.wavelength())?;
        let a = response_for_wave_vector(layout, &k);
        let coeffs = path_frequency_coefficients(path, cfg, sync, tap_count);
        for (hn, c) in h.iter_mut().zip(&coeffs) {
            for (x, ai) in hn.iter_mut().zip(&a) {
                *x += c * ai;
            }
        }
    }
    Ok(h)
}

/// Writes path sets as `user,amplitude,phase_rad,delay_s,azimuth_rad,elevation_rad` rows.
pub fn write_paths<T: Real, W: Write>(users: &[UserPaths<T>], mut w: W) -> Result<()> {
    w.write_all(format_paths(users).as_bytes())?;
    Ok(())
}

pub fn format_paths<T: Real>(users: &[UserPaths<T>]) -> String {
    let mut s = String::from("user,amplitude,phase_rad,delay_s,azimuth_rad,elevation_rad\n");
    for (i, u) in users.iter().enumerate() {
        for p in u.paths() {
            let _ = writeln!(s, "{i},{},{},{},{},{}", p.amplitude, p.phase, p.delay, p.azimuth, p.elevation);
        }
    }
    s
}

pub fn read_paths<T: Real, R: BufRead>(r: R) -> Result<Vec<UserPaths<T>>> {
    let mut grouped: Vec<Vec<PathComponent<T>>> = Vec::new();
    for (n, line) in r.lines().enumerate() {
        let line = line?;
        let lineno = n + 1;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') || t.starts_with("user") {
            continue;
        }
        let f: Vec<&str> = t.split(',').collect();
        if f.len() != 6 {
            return Err(Error::Parse { line: lineno, msg: format!("expected 6 fields, got {}", f.len()) });
        }
        let user: usize = f[0]
            .trim()
            .parse()
            .map_err(|_| Error::Parse { line: lineno, msg: format!("bad user index {:?}", f[0]) })?;
        if user > grouped.len() {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("user {user} appears before user {}", grouped.len()),
            });
        }
        if user == grouped.len() {
            grouped.push(Vec::new());
        }
        grouped[user].push(PathComponent {
            amplitude: parse_field(f[1], lineno)?,
            phase: parse_field(f[2], lineno)?,
            delay: parse_field(f[3], lineno)?,
            azimuth: parse_field(f[4], lineno)?,
            elevation: parse_field(f[5], lineno)?,
        });
    }
    grouped.into_iter().map(UserPaths::new).collect()
}
