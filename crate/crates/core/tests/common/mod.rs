//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use std::f64::consts::PI;

use movant_core::channel::{FirChannel, PathComponent, UserPaths};
use movant_core::geometry::{ArrayLayout, Position3};
use movant_core::linalg::CMatrix;
use movant_core::Complex;
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

pub type C64 = Complex<f64>;

pub const LAMBDA: f64 = 299_792_458.0 / 3e9;

/// Array response from the textbook formula, without sharing any code with the crate.
pub fn oracle_response(layout: &ArrayLayout<f64>, az: f64, el: f64) -> Vec<C64> {
    let scale = 2.0 * PI / layout.wavelength();
    layout
        .positions()
        .iter()
        .map(|p| {
            let phase = scale * (p.x * az.cos() * el.cos() + p.y * az.sin() * el.cos() + p.z * el.sin());
            C64::new(phase.cos(), phase.sin())
        })
        .collect()
}

/// Direct DFT with the exponent evaluated as written.
pub fn brute_dft(fir: &FirChannel<f64>, s: usize) -> Vec<Vec<C64>> {
    let m = fir.taps[0].len();
    (0..s)
        .map(|nu| {
            let mut h = vec![C64::new(0.0, 0.0); m];
            for (l, tap) in fir.taps.iter().enumerate() {
                let w = C64::from_polar(1.0, -2.0 * PI * (l * nu) as f64 / s as f64);
                for (x, t) in h.iter_mut().zip(tap) {
                    *x += w * t;
                }
            }
            h
        })
        .collect()
}

pub fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn vec_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

pub fn cn<R: Rng>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// i.i.d. CN(0, 1) matrix.
pub fn gaussian_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMatrix<f64> {
    CMatrix::from_fn(rows, cols, |_, _| cn(rng))
}

pub fn random_layout<R: Rng>(rng: &mut R, m: usize) -> ArrayLayout<f64> {
    let positions = (0..m).map(|_| Position3::new(0.0, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    ArrayLayout::new(positions, LAMBDA).unwrap()
}

/// Random multipath users with delays in `[1 µs, 1 µs + spread]`.
pub fn random_users<R: Rng>(rng: &mut R, users: usize, paths: usize, spread: f64) -> Vec<UserPaths<f64>> {
    (0..users)
        .map(|_| {
            let p = (0..paths)
                .map(|_| {
                    PathComponent::new(
                        rng.gen_range(0.1..1.0),
                        1e-6 + rng.gen_range(0.0..spread),
                        rng.gen_range(-PI..PI),
                        rng.gen_range(-1.2..1.2),
                    )
                    .with_phase(rng.gen_range(0.0..2.0 * PI))
                })
                .collect();
            UserPaths::new(p).unwrap()
        })
        .collect()
}

pub fn to_nalgebra(h: &CMatrix<f64>) -> DMatrix<C64> {
    DMatrix::from_fn(h.rows(), h.cols(), |r, c| h[(r, c)])
}

/// `log₂det` of a Hermitian positive definite matrix from its eigenvalues.
pub fn logdet_eig(a: &DMatrix<C64>) -> f64 {
    a.clone().symmetric_eigen().eigenvalues.iter().map(|l| l.log2()).sum()
}

/// Rate of one subcarrier in the form `log₂det(I + ρ(1-EVM²) Q⁻¹ H Hᴴ)` with
/// `Q = ρ EVM² H Hᴴ + σ² I`, evaluated with a general LU determinant.
pub fn covariance_form_rate(h: &CMatrix<f64>, rho: f64, sigma2: f64, evm: f64) -> f64 {
    let h = to_nalgebra(h);
    let m = h.nrows();
    let hh = &h * h.adjoint();
    let eye = DMatrix::<C64>::identity(m, m);
    let q = hh.map(|z| z * (rho * evm * evm)) + eye.map(|z| z * sigma2);
    // Q⁻¹(HHᴴ) by pivoted LU; nalgebra's closed-form small-matrix inverse is too lossy for an oracle
    let q_inv_hh = q.lu().solve(&hh).expect("noise covariance is invertible");
    let inner = &eye + q_inv_hh.map(|z| z * (rho * (1.0 - evm * evm)));
    inner.determinant().norm().log2()
}

/// Separable concave surrogate `Σ 1 - ((x_d - c_d)/h_d)²` on a box, maximised at `c` with value `dim`.
pub struct Surrogate {
    pub bounds: movant_core::pso::BoxBounds<f64>,
    pub center: Vec<f64>,
    pub half_width: Vec<f64>,
}

impl Surrogate {
    pub fn new<R: Rng>(rng: &mut R, dim: usize) -> Self {
        let lower: Vec<f64> = (0..dim).map(|_| rng.gen_range(-3.0..0.0)).collect();
        let upper: Vec<f64> = lower.iter().map(|l| l + rng.gen_range(0.5..4.0)).collect();
        let center = lower.iter().zip(&upper).map(|(l, u)| rng.gen_range(*l..*u)).collect();
        let half_width = lower.iter().zip(&upper).map(|(l, u)| (u - l) / 2.0).collect();
        Self { bounds: movant_core::pso::BoxBounds::new(lower, upper).unwrap(), center, half_width }
    }

    pub fn optimum(&self) -> f64 {
        self.center.len() as f64
    }
}

impl movant_core::pso::SwarmProblem<f64> for Surrogate {
    fn bounds(&self) -> &movant_core::pso::BoxBounds<f64> {
        &self.bounds
    }

    fn evaluate(&self, x: &[f64]) -> f64 {
        x.iter().zip(&self.center).zip(&self.half_width).map(|((x, c), h)| 1.0 - ((x - c) / h).powi(2)).sum()
    }
}
