//! Box-constrained particle swarm maximisation.
//!
//! The swarm keeps one personal best per particle and a global best that is
//! only ever replaced by a strictly better *feasible* evaluation, so the
//! reported global-best sequence is nondecreasing and always feasible.

pub mod placement;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{Error, Real, Result};

pub use placement::{optimize_placement, PenaltyPolicy, PlacementProblem, PlacementResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SwarmConfig<T> {
    pub particles: usize,
    pub iterations: usize,
    /// Inertia weight at the first iteration, decaying linearly to `inertia_end`.
    pub inertia_start: T,
    pub inertia_end: T,
    pub cognitive: T,
    pub social: T,
    /// Velocity limit as a fraction of each coordinate's box width.
    pub velocity_clamp: T,
    /// Re-sampling attempts per particle before falling back to repair.
    pub init_retries: usize,
    pub seed: u64,
}

impl<T: Real> Default for SwarmConfig<T> {
    fn default() -> Self {
        Self {
            particles: 180,
            iterations: 100,
            inertia_start: T::lit(0.9),
            inertia_end: T::lit(0.4),
            cognitive: T::lit(1.5),
            social: T::lit(1.5),
            velocity_clamp: T::lit(0.5),
            init_retries: 50,
            seed: 0,
        }
    }
}

impl<T: Real> SwarmConfig<T> {
    /// Reduced budget for quick runs: 30 particles, 25 iterations.
    pub fn smoke() -> Self {
        Self { particles: 30, iterations: 25, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.particles == 0 || self.iterations == 0 {
            return Err(Error::invalid("swarm needs at least one particle and one iteration"));
        }
        let positive = [self.inertia_start, self.inertia_end, self.cognitive, self.social, self.velocity_clamp];
        if positive.iter().any(|v| !(*v >= T::zero()) || !v.is_finite()) {
            return Err(Error::invalid("swarm coefficients must be finite and non-negative"));
        }
        Ok(())
    }

    /// Inertia weight used for the update after evaluation round `iteration`.
    pub fn inertia(&self, iteration: usize) -> T {
        if self.iterations <= 1 {
            return self.inertia_start;
        }
        let frac = T::from_usize_lossy(iteration.min(self.iterations - 1)) / T::from_usize_lossy(self.iterations - 1);
        self.inertia_start - (self.inertia_start - self.inertia_end) * frac
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoxBounds<T> {
    lower: Vec<T>,
    upper: Vec<T>,
}

impl<T: Real> BoxBounds<T> {
    pub fn new(lower: Vec<T>, upper: Vec<T>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::invalid("bounds must be non-empty and of equal length"));
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(l <= u)) {
            return Err(Error::invalid("lower bound exceeds upper bound"));
        }
        Ok(Self { lower, upper })
    }

    pub fn uniform(dim: usize, lower: T, upper: T) -> Result<Self> {
        Self::new(vec![lower; dim], vec![upper; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn width(&self, i: usize) -> T {
        self.upper[i] - self.lower[i]
    }

    pub fn clamp(&self, x: &mut [T]) {
        for ((v, &l), &u) in x.iter_mut().zip(&self.lower).zip(&self.upper) {
            *v = v.max(l).min(u);
        }
    }

    pub fn contains(&self, x: &[T]) -> bool {
        x.iter().zip(&self.lower).zip(&self.upper).all(|((v, l), u)| v >= l && v <= u)
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> Vec<T> {
        self.lower.iter().zip(&self.upper).map(|(&l, &u)| l + (u - l) * T::lit(rng.gen::<f64>())).collect()
    }
}

/// A maximisation problem over a box.
pub trait SwarmProblem<T: Real>: Sync {
    fn bounds(&self) -> &BoxBounds<T>;

    /// Objective value, possibly penalised for constraint violations.
    fn evaluate(&self, x: &[T]) -> T;

    fn is_feasible(&self, _x: &[T]) -> bool {
        true
    }

    /// Moves `x` towards feasibility; `x` stays inside the box.
    fn repair(&self, _x: &mut [T]) {}

    fn dim(&self) -> usize {
        self.bounds().dim()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Particle<T> {
    pub position: Vec<T>,
    pub velocity: Vec<T>,
    pub best_position: Vec<T>,
    pub best_value: T,
    pub value: T,
}

/// Particles plus the global best found so far.
#[derive(Debug, Clone, PartialEq)]
pub struct SwarmState<T> {
    pub particles: Vec<Particle<T>>,
    pub best_position: Option<Vec<T>>,
    pub best_value: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwarmTrace<T> {
    /// Global-best value after each evaluation round.
    pub best_per_iteration: Vec<T>,
    pub best_position: Vec<T>,
    pub best_value: T,
    pub evaluations: usize,
}

impl<T: Real> SwarmTrace<T> {
    pub fn is_nondecreasing(&self) -> bool {
        self.best_per_iteration.windows(2).all(|w| w[1] >= w[0])
    }

    /// `iteration,best_value` rows.
    pub fn to_table(&self) -> String {
        let mut s = String::from("iteration,best_value\n");
        for (i, v) in self.best_per_iteration.iter().enumerate() {
            s.push_str(&format!("{i},{v}\n"));
        }
        s
    }
}

pub fn swarm_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random feasible particles; `seeds` replace the first positions verbatim.
pub fn initialize_swarm<T: Real, P: SwarmProblem<T> + ?Sized, R: Rng>(
    problem: &P,
    cfg: &SwarmConfig<T>,
    seeds: &[Vec<T>],
    rng: &mut R,
) -> Result<SwarmState<T>> {
    cfg.validate()?;
    let bounds = problem.bounds();
    let dim = bounds.dim();
    let mut particles = Vec::with_capacity(cfg.particles);
    for i in 0..cfg.particles {
        let position = match seeds.get(i) {
            Some(seed) => {
                if seed.len() != dim || !bounds.contains(seed) || !problem.is_feasible(seed) {
                    return Err(Error::invalid(format!("seed particle {i} is not feasible")));
                }
                seed.clone()
            }
            None => sample_feasible(problem, cfg.init_retries, rng)?,
        };
        let velocity = (0..dim)
            .map(|d| {
                let vmax = cfg.velocity_clamp * bounds.width(d);
                vmax * T::lit(2.0 * rng.gen::<f64>() - 1.0)
            })
            .collect();
        particles.push(Particle {
            best_position: position.clone(),
            position,
            velocity,
            best_value: T::neg_infinity(),
            value: T::neg_infinity(),
        });
    }
    Ok(SwarmState { particles, best_position: None, best_value: T::neg_infinity() })
}

fn sample_feasible<T: Real, P: SwarmProblem<T> + ?Sized, R: Rng>(
    problem: &P,
    retries: usize,
    rng: &mut R,
) -> Result<Vec<T>> {
    let mut x = problem.bounds().sample(rng);
    for _ in 0..retries {
        if problem.is_feasible(&x) {
            return Ok(x);
        }
        x = problem.bounds().sample(rng);
    }
    problem.repair(&mut x);
    if problem.is_feasible(&x) {
        Ok(x)
    } else {
        Err(Error::Setup("could not construct a feasible initial particle".into()))
    }
}

/// Evaluates every particle (in parallel) and updates personal and global bests.
pub fn evaluate_swarm<T: Real, P: SwarmProblem<T> + ?Sized>(problem: &P, state: &mut SwarmState<T>) {
    let results: Vec<(T, bool)> =
        state.particles.par_iter().map(|p| (problem.evaluate(&p.position), problem.is_feasible(&p.position))).collect();
    for (p, (value, feasible)) in state.particles.iter_mut().zip(results) {
        p.value = value;
        if value > p.best_value {
            p.best_value = value;
            p.best_position.clone_from(&p.position);
        }
        if feasible && value > state.best_value {
            state.best_value = value;
            state.best_position = Some(p.position.clone());
        }
    }
}

/// One velocity and position update for every particle.
///
/// `v ← w·v + c₁r₁⊙(p_best − x) + c₂r₂⊙(g_best − x)`, then `v` is clamped to the
/// velocity limit and `x + v` to the box. Coordinates stopped by the box have
/// their velocity zeroed.
pub fn step<T: Real, R: Rng>(
    state: &mut SwarmState<T>,
    bounds: &BoxBounds<T>,
    cfg: &SwarmConfig<T>,
    inertia: T,
    rng: &mut R,
) {
    let Some(global) = state.best_position.clone() else {
        return;
    };
    #[allow(clippy::needless_range_loop)] // four parallel vectors indexed by coordinate
    for p in &mut state.particles {
        for d in 0..p.position.len() {
            let r1 = T::lit(rng.gen::<f64>());
            let r2 = T::lit(rng.gen::<f64>());
            let x = p.position[d];
            let vmax = cfg.velocity_clamp * bounds.width(d);
            let v = inertia * p.velocity[d]
                + cfg.cognitive * r1 * (p.best_position[d] - x)
                + cfg.social * r2 * (global[d] - x);
            p.velocity[d] = v.max(-vmax).min(vmax);
            p.position[d] = x + p.velocity[d];
        }
        // absorbing walls: a coordinate stopped by the box loses its velocity
        let moved = p.position.clone();
        bounds.clamp(&mut p.position);
        for ((v, x), m) in p.velocity.iter_mut().zip(&p.position).zip(&moved) {
            if x != m {
                *v = T::zero();
            }
        }
    }
}

/// Runs the swarm for `cfg.iterations` evaluation rounds.
pub fn optimize<T: Real, P: SwarmProblem<T> + ?Sized>(
    problem: &P,
    cfg: &SwarmConfig<T>,
    seeds: &[Vec<T>],
) -> Result<SwarmTrace<T>> {
    let mut rng = swarm_rng(cfg.seed);
    let mut state = initialize_swarm(problem, cfg, seeds, &mut rng)?;
    let mut best_per_iteration = Vec::with_capacity(cfg.iterations);
    for it in 0..cfg.iterations {
        evaluate_swarm(problem, &mut state);
        best_per_iteration.push(state.best_value);
        if it + 1 < cfg.iterations {
            step(&mut state, problem.bounds(), cfg, cfg.inertia(it), &mut rng);
        }
    }
    let best_position =
        state.best_position.ok_or_else(|| Error::Setup("swarm never evaluated a feasible particle".into()))?;
    Ok(SwarmTrace {
        best_per_iteration,
        best_position,
        best_value: state.best_value,
        evaluations: cfg.particles * cfg.iterations,
    })
}
