//! Antenna placement as a swarm problem.
//!
//! A particle is the 2M-vector of per-antenna `(y, z)` offsets from the centre of
//! the antenna's own movement region, so region containment is exactly the
//! swarm's box constraint. The λ/2 spacing constraint is handled by a quadratic
//! penalty on the objective and by projection during initialisation.

use serde::{Deserialize, Serialize};

use super::{optimize, BoxBounds, SwarmConfig, SwarmProblem, SwarmTrace};
use crate::channel::PreparedChannel;
use crate::geometry::{ArrayLayout, Position3, RegionGrid, FEASIBILITY_TOL};
use crate::rate::{sum_rate, RateParams};
use crate::{Error, Real, Result};

const REPAIR_SWEEPS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PenaltyPolicy<T> {
    /// `weight · Σ (max(0, λ/2 - d) / (λ/2))²` subtracted from the sum rate (bit/s/Hz).
    Quadratic { weight: T },
}

impl<T: Real> Default for PenaltyPolicy<T> {
    fn default() -> Self {
        PenaltyPolicy::Quadratic { weight: T::lit(1e3) }
    }
}

pub struct PlacementProblem<'a, T> {
    grid: &'a RegionGrid<T>,
    channels: &'a [PreparedChannel<T>],
    params: RateParams<T>,
    penalty: PenaltyPolicy<T>,
    wavelength: T,
    bounds: BoxBounds<T>,
}

impl<'a, T: Real> PlacementProblem<'a, T> {
    pub fn new(
        grid: &'a RegionGrid<T>,
        channels: &'a [PreparedChannel<T>],
        params: RateParams<T>,
        penalty: PenaltyPolicy<T>,
    ) -> Result<Self> {
        params.validate()?;
        let first =
            channels.first().ok_or_else(|| Error::invalid("placement needs at least one channel realisation"))?;
        let wavelength = first.wavelength();
        if channels.iter().any(|c| c.subcarriers() != first.subcarriers() || c.wavelength() != wavelength) {
            return Err(Error::invalid("channel realisations disagree on numerology"));
        }
        let half = wavelength / T::lit(2.0);
        let regions = grid.regions();
        for a in 0..regions.len() {
            for b in (a + 1)..regions.len() {
                let (ra, rb) = (&regions[a], &regions[b]);
                let reach = ra.half_side() + rb.half_side();
                let dy = (ra.center_y - rb.center_y).abs() + reach;
                let dz = (ra.center_z - rb.center_z).abs() + reach;
                if (dy * dy + dz * dz).sqrt() < half {
                    return Err(Error::Setup(format!("regions {a} and {b} are too small to keep antennas λ/2 apart")));
                }
            }
        }
        let mut lower = Vec::with_capacity(2 * regions.len());
        let mut upper = Vec::with_capacity(2 * regions.len());
        for r in regions {
            let h = r.half_side();
            lower.extend([-h, -h]);
            upper.extend([h, h]);
        }
        Ok(Self { grid, channels, params, penalty, wavelength, bounds: BoxBounds::new(lower, upper)? })
    }

    pub fn antennas(&self) -> usize {
        self.grid.len()
    }

    pub fn decode(&self, x: &[T]) -> ArrayLayout<T> {
        let positions = self
            .grid
            .regions()
            .iter()
            .enumerate()
            .map(|(m, r)| Position3::yz(r.center_y + x[2 * m], r.center_z + x[2 * m + 1]))
            .collect();
        ArrayLayout::new(positions, self.wavelength).expect("decoded layout is finite")
    }

    /// Offsets of a layout relative to the region centres, clamped into the box.
    pub fn encode(&self, layout: &ArrayLayout<T>) -> Result<Vec<T>> {
        if layout.len() != self.grid.len() {
            return Err(Error::ShapeMismatch(format!("{} antennas but {} regions", layout.len(), self.grid.len())));
        }
        let mut x: Vec<T> = layout
            .positions()
            .iter()
            .zip(self.grid.regions())
            .flat_map(|(p, r)| [p.y - r.center_y, p.z - r.center_z])
            .collect();
        self.bounds.clamp(&mut x);
        Ok(x)
    }

    /// `Σ (max(0, λ/2 - d) / (λ/2))²` over antenna pairs.
    pub fn spacing_violation(&self, x: &[T]) -> T {
        let half = self.wavelength / T::lit(2.0);
        let p = self.decode(x);
        let pos = p.positions();
        let mut total = T::zero();
        for a in 0..pos.len() {
            for b in (a + 1)..pos.len() {
                let deficit = half - pos[a].distance(&pos[b]);
                if deficit > T::lit(FEASIBILITY_TOL) {
                    total += (deficit / half).powi(2);
                }
            }
        }
        total
    }

    /// Mean sum rate over the channel realisations for the decoded layout.
    pub fn sum_rate(&self, x: &[T]) -> Result<T> {
        let layout = self.decode(x);
        let mut total = T::zero();
        for ch in self.channels {
            total += sum_rate(&ch.synthesize(&layout)?, &self.params)?.sum_rate;
        }
        Ok(total / T::from_usize_lossy(self.channels.len()))
    }

    pub fn try_evaluate(&self, x: &[T]) -> Result<T> {
        let rate = self.sum_rate(x)?;
        let PenaltyPolicy::Quadratic { weight } = self.penalty;
        Ok(rate - weight * self.spacing_violation(x))
    }
}

impl<T: Real> SwarmProblem<T> for PlacementProblem<'_, T> {
    fn bounds(&self) -> &BoxBounds<T> {
        &self.bounds
    }

    fn evaluate(&self, x: &[T]) -> T {
        self.try_evaluate(x).unwrap_or(T::neg_infinity())
    }

    fn is_feasible(&self, x: &[T]) -> bool {
        self.bounds.contains(x) && self.spacing_violation(x) == T::zero()
    }

    /// Pushes too-close pairs apart along their connecting line, re-clamping to the regions.
    fn repair(&self, x: &mut [T]) {
        let half = self.wavelength / T::lit(2.0);
        let target = half * T::lit(1.0 + 1e-9) + T::lit(FEASIBILITY_TOL);
        let regions = self.grid.regions();
        for _ in 0..REPAIR_SWEEPS {
            let mut moved = false;
            let mut pos: Vec<(T, T)> =
                regions.iter().enumerate().map(|(m, r)| (r.center_y + x[2 * m], r.center_z + x[2 * m + 1])).collect();
            for a in 0..pos.len() {
                for b in (a + 1)..pos.len() {
                    let (dy, dz) = (pos[b].0 - pos[a].0, pos[b].1 - pos[a].1);
                    let d = (dy * dy + dz * dz).sqrt();
                    if d >= target {
                        continue;
                    }
                    let (uy, uz) = if d > T::lit(FEASIBILITY_TOL) {
                        (dy / d, dz / d)
                    } else {
                        let cy = regions[b].center_y - regions[a].center_y;
                        let cz = regions[b].center_z - regions[a].center_z;
                        let n = (cy * cy + cz * cz).sqrt();
                        (cy / n, cz / n)
                    };
                    let push = (target - d) / T::lit(2.0);
                    pos[a] = (pos[a].0 - uy * push, pos[a].1 - uz * push);
                    pos[b] = (pos[b].0 + uy * push, pos[b].1 + uz * push);
                    for m in [a, b] {
                        let r = &regions[m];
                        let c = r.clamp(&Position3::yz(pos[m].0, pos[m].1));
                        pos[m] = (c.y, c.z);
                    }
                    moved = true;
                }
            }
            for (m, (r, p)) in regions.iter().zip(&pos).enumerate() {
                x[2 * m] = p.0 - r.center_y;
                x[2 * m + 1] = p.1 - r.center_z;
            }
            self.bounds.clamp(x);
            if !moved {
                break;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlacementResult<T> {
    pub trace: SwarmTrace<T>,
    pub layout: ArrayLayout<T>,
}

/// Maximises the mean sum rate over antenna positions constrained to `grid`.
///
/// `seeds` are feasible layouts inserted as the first particles.
pub fn optimize_placement<T: Real>(
    grid: &RegionGrid<T>,
    channels: &[PreparedChannel<T>],
    params: RateParams<T>,
    cfg: &SwarmConfig<T>,
    penalty: PenaltyPolicy<T>,
    seeds: &[ArrayLayout<T>],
) -> Result<PlacementResult<T>> {
    let problem = PlacementProblem::new(grid, channels, params, penalty)?;
    let seeds = seeds.iter().map(|l| problem.encode(l)).collect::<Result<Vec<_>>>()?;
    let trace = optimize(&problem, cfg, &seeds)?;
    let layout = problem.decode(&trace.best_position);
    Ok(PlacementResult { trace, layout })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{OfdmConfig, PathComponent, UserPaths};
    use crate::geometry::{check_feasible, make_region_grid};
    use crate::SPEED_OF_LIGHT;

    fn setup() -> (RegionGrid<f64>, Vec<PreparedChannel<f64>>, RateParams<f64>) {
        let cfg = OfdmConfig::new(4, 15e3, 3e9).unwrap();
        let lambda = SPEED_OF_LIGHT / 3e9;
        let grid = make_region_grid(2, 2, 5.0 * lambda, 5.0 * lambda).unwrap();
        let users: Vec<UserPaths<f64>> = (0..3)
            .map(|i| {
                UserPaths::new(vec![
                    PathComponent::new(1.0, 1e-6 + 1e-7 * i as f64, -0.6 + 0.5 * i as f64, -0.02),
                    PathComponent::new(0.3, 3e-6, 0.2 * i as f64, 0.1).with_phase(1.0),
                ])
                .unwrap()
            })
            .collect();
        let prepared = PreparedChannel::new(&users, &cfg).unwrap();
        (grid, vec![prepared], RateParams::new(1.0, 0.1, 0.02).unwrap())
    }

    #[test]
    fn coincident_particle_scores_below_feasible_ones() {
        let (grid, ch, params) = setup();
        let problem = PlacementProblem::new(&grid, &ch, params, PenaltyPolicy::default()).unwrap();
        let h = grid.regions()[0].half_side();
        // antennas 0 and 1 meet on their shared edge
        let mut bad = vec![0.0; 8];
        bad[0] = h;
        bad[2] = -h;
        assert!(!problem.is_feasible(&bad));
        let bad_value = problem.evaluate(&bad);
        let mut rng = super::super::swarm_rng(5);
        for _ in 0..50 {
            let x = problem.bounds().sample(&mut rng);
            if problem.is_feasible(&x) {
                assert!(bad_value < problem.evaluate(&x));
            }
        }
        assert!(bad_value < problem.evaluate(&[0.0; 8]));
    }

    #[test]
    fn repair_separates_coincident_antennas() {
        let (grid, ch, params) = setup();
        let problem = PlacementProblem::new(&grid, &ch, params, PenaltyPolicy::default()).unwrap();
        let h = grid.regions()[0].half_side();
        let mut x = vec![h, -h, -h, -h, h, h, -h, h];
        problem.repair(&mut x);
        assert!(problem.is_feasible(&x));
        assert!(check_feasible(&problem.decode(&x), &grid).unwrap().is_feasible());
    }

    #[test]
    fn encode_decode_identity_inside_regions() {
        let (grid, ch, params) = setup();
        let problem = PlacementProblem::new(&grid, &ch, params, PenaltyPolicy::default()).unwrap();
        let x = vec![0.1, -0.2, 0.0, 0.05, -0.1, 0.1, 0.2, -0.2];
        let back = problem.encode(&problem.decode(&x)).unwrap();
        for (a, b) in x.iter().zip(&back) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn tiny_regions_are_a_setup_error() {
        let (_, ch, params) = setup();
        let lambda = SPEED_OF_LIGHT / 3e9;
        let grid = make_region_grid(1, 2, 0.1 * lambda, 0.1 * lambda).unwrap();
        assert!(matches!(PlacementProblem::new(&grid, &ch, params, PenaltyPolicy::default()), Err(Error::Setup(_))));
    }

    #[test]
    fn optimized_layout_is_feasible_and_beats_centers() {
        let (grid, ch, params) = setup();
        let centers = grid.centers(ch[0].wavelength()).unwrap();
        let cfg = SwarmConfig::<f64> { particles: 12, iterations: 10, seed: 3, ..Default::default() };
        let out =
            optimize_placement(&grid, &ch, params, &cfg, PenaltyPolicy::default(), std::slice::from_ref(&centers))
                .unwrap();
        assert!(out.trace.is_nondecreasing());
        assert!(check_feasible(&out.layout, &grid).unwrap().is_feasible());
        let problem = PlacementProblem::new(&grid, &ch, params, PenaltyPolicy::default()).unwrap();
        let base = problem.sum_rate(&problem.encode(&centers).unwrap()).unwrap();
        assert!(out.trace.best_value >= base);
    }
}
