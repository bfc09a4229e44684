//! Paired-drop Monte-Carlo sweeps comparing movable antennas with fixed arrays.
//!
//! Every drop draws users and multipath once; all strategies at all sweep points
//! are evaluated on that same drop, so strategy differences are paired.

use std::fmt::Write as _;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel::{CarrierPhase, OfdmConfig, PreparedChannel, Pulse, UserPaths};
use crate::geometry::{make_compact_upa, make_region_grid, make_sparse_ula, make_sparse_upa, ArrayLayout, RegionGrid};
use crate::pso::{optimize_placement, PenaltyPolicy, PlacementResult, SwarmConfig};
use crate::rate::{asymptotic_limit, interference_free_bound, sum_rate, RateParams};
use crate::scenario::{drop_rng, generate_drop, ScenarioConfig, ScenarioKind};
use crate::{Error, Result, SPEED_OF_LIGHT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Swarm-optimised positions inside the region grid.
    Movable,
    SparseUpa,
    SparseUla,
    CompactUpa,
    /// Sum of single-user rates on the optimised layout.
    InterferenceFree,
}

impl Strategy {
    pub const ALL: [Strategy; 5] =
        [Strategy::Movable, Strategy::SparseUpa, Strategy::SparseUla, Strategy::CompactUpa, Strategy::InterferenceFree];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Movable => "movable",
            Strategy::SparseUpa => "sparse_upa",
            Strategy::SparseUla => "sparse_ula",
            Strategy::CompactUpa => "compact_upa",
            Strategy::InterferenceFree => "interference_free",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|k| k.name() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown strategy {s:?}")))
    }

    fn needs_optimization(self) -> bool {
        matches!(self, Strategy::Movable | Strategy::InterferenceFree)
    }
}

/// How the per-subcarrier transmit power ρ is derived.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum PowerMode {
    /// Power spectral density: `ρ = psd · Δ`.
    Psd { watts_per_mhz: f64 },
    /// Total power split evenly over the subcarriers: `ρ = P / S`.
    Total { watts: f64 },
}

/// How the per-subcarrier noise variance σ² is derived.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum NoiseMode {
    /// Noise spectral density: `σ² = psd · Δ`.
    Psd { watts_per_mhz: f64 },
    /// Fixed variance on every subcarrier.
    PerSubcarrier { watts: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PulseKind {
    #[default]
    Triangle,
    RaisedCosine,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    /// M; must be a perfect square.
    pub antennas: usize,
    pub carrier_ghz: f64,
    pub subcarrier_spacing_khz: f64,
    /// S used when the sweep variable is not the subcarrier count.
    pub subcarriers: usize,
    pub evm: f64,
    pub power: PowerMode,
    pub noise: NoiseMode,
    /// Side of each movement region in wavelengths.
    pub region_side_wavelengths: f64,
    /// Centre-to-centre distance of neighbouring regions in wavelengths.
    pub region_pitch_wavelengths: f64,
    pub carrier_phase: CarrierPhase,
    pub pulse: PulseKind,
    pub rolloff: f64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            antennas: 16,
            carrier_ghz: 3.0,
            subcarrier_spacing_khz: 15.0,
            subcarriers: 200,
            evm: 0.02,
            power: PowerMode::Psd { watts_per_mhz: 1e-3 },
            noise: NoiseMode::Psd { watts_per_mhz: 3.98e-15 },
            region_side_wavelengths: 5.0,
            region_pitch_wavelengths: 5.0,
            carrier_phase: CarrierPhase::Carrier,
            pulse: PulseKind::Triangle,
            rolloff: 0.25,
        }
    }
}

impl SystemConfig {
    pub fn carrier_hz(&self) -> f64 {
        self.carrier_ghz * 1e9
    }

    pub fn spacing_hz(&self) -> f64 {
        self.subcarrier_spacing_khz * 1e3
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_hz()
    }

    pub fn ofdm(&self, subcarriers: usize) -> Result<OfdmConfig<f64>> {
        let pulse = match self.pulse {
            PulseKind::Triangle => Pulse::Triangle,
            PulseKind::RaisedCosine => Pulse::RaisedCosine { rolloff: self.rolloff },
        };
        Ok(OfdmConfig::new(subcarriers, self.spacing_hz(), self.carrier_hz())?
            .with_pulse(pulse)
            .with_phase(self.carrier_phase))
    }

    pub fn power_per_subcarrier(&self, subcarriers: usize) -> f64 {
        match self.power {
            PowerMode::Psd { watts_per_mhz } => watts_per_mhz * self.spacing_hz() / 1e6,
            PowerMode::Total { watts } => watts / subcarriers as f64,
        }
    }

    pub fn noise_per_subcarrier(&self) -> f64 {
        match self.noise {
            NoiseMode::Psd { watts_per_mhz } => watts_per_mhz * self.spacing_hz() / 1e6,
            NoiseMode::PerSubcarrier { watts } => watts,
        }
    }

    pub fn rate_params(&self, subcarriers: usize) -> Result<RateParams<f64>> {
        RateParams::new(self.power_per_subcarrier(subcarriers), self.noise_per_subcarrier(), self.evm)
    }

    fn grid_side(&self) -> Result<usize> {
        let n = (self.antennas as f64).sqrt().round() as usize;
        if n * n != self.antennas || n == 0 {
            return Err(Error::Config(format!("antenna count {} is not a perfect square", self.antennas)));
        }
        Ok(n)
    }

    pub fn region_grid(&self) -> Result<RegionGrid<f64>> {
        let n = self.grid_side()?;
        let lambda = self.wavelength();
        make_region_grid(n, n, self.region_side_wavelengths * lambda, self.region_pitch_wavelengths * lambda)
    }

    /// Width and height of the area covered by the region grid.
    pub fn aperture(&self) -> Result<(f64, f64)> {
        let (y0, y1, z0, z1) = self.region_grid()?.extent();
        Ok((y1 - y0, z1 - z0))
    }

    pub fn baseline(&self, strategy: Strategy) -> Result<Option<ArrayLayout<f64>>> {
        let lambda = self.wavelength();
        let (w, h) = self.aperture()?;
        Ok(match strategy {
            Strategy::SparseUpa => Some(make_sparse_upa(self.antennas, w, h, lambda)?),
            Strategy::SparseUla => Some(make_sparse_ula(self.antennas, w, lambda)?),
            Strategy::CompactUpa => Some(make_compact_upa(self.antennas, lambda)?),
            Strategy::Movable | Strategy::InterferenceFree => None,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.grid_side()?;
        if !(self.carrier_ghz > 0.0 && self.subcarrier_spacing_khz > 0.0) || self.subcarriers == 0 {
            return Err(Error::Config("carrier, spacing and subcarrier count must be positive".into()));
        }
        if !(self.region_side_wavelengths > 0.0 && self.region_pitch_wavelengths >= self.region_side_wavelengths) {
            return Err(Error::Config("regions must have positive side and pitch >= side".into()));
        }
        self.rate_params(self.subcarriers).map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    Subcarriers,
    Evm,
    /// Values replace the power knob of the active [`PowerMode`] (W or W/MHz).
    Power,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::Subcarriers => "subcarriers",
            SweepVariable::Evm => "evm",
            SweepVariable::Power => "power",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// 180 particles, 100 iterations.
    Full,
    /// 30 particles, 25 iterations.
    Smoke,
}

impl Profile {
    pub fn swarm(self) -> SwarmConfig<f64> {
        match self {
            Profile::Full => SwarmConfig::default(),
            Profile::Smoke => SwarmConfig::smoke(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    pub seed: u64,
    pub drops: usize,
    pub strategies: Vec<Strategy>,
    /// Channel realisations the optimiser averages over; the first is always the evaluated drop.
    pub optimization_realizations: usize,
    /// Insert the sparse UPA as an initial particle.
    pub seed_sparse_upa: bool,
    pub scenario: ScenarioConfig,
    pub system: SystemConfig,
    pub sweep: Sweep,
    pub swarm: SwarmConfig<f64>,
    pub penalty: PenaltyPolicy<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            seed: 1,
            drops: 20,
            strategies: Strategy::ALL.to_vec(),
            optimization_realizations: 1,
            seed_sparse_upa: true,
            scenario: ScenarioConfig::los_dominant(),
            system: SystemConfig::default(),
            sweep: Sweep { variable: SweepVariable::Subcarriers, values: vec![1.0, 20.0, 50.0, 100.0, 200.0, 300.0] },
            swarm: SwarmConfig::default(),
            penalty: PenaltyPolicy::default(),
            output: None,
        }
    }
}

impl ExperimentSpec {
    /// Sum rate versus S in the given propagation scenario.
    pub fn subcarrier_sweep(kind: ScenarioKind) -> Self {
        Self { scenario: ScenarioConfig::for_kind(kind), ..Self::default() }
    }

    /// Sum rate versus EVM at 316 mW total power, S = 200.
    pub fn evm_sweep() -> Self {
        Self {
            system: SystemConfig {
                power: PowerMode::Total { watts: 0.316 },
                subcarriers: 200,
                ..SystemConfig::default()
            },
            sweep: Sweep { variable: SweepVariable::Evm, values: vec![0.01, 0.02, 0.05, 0.1, 0.2, 0.4, 0.7, 1.0] },
            ..Self::default()
        }
    }

    /// Sum rate versus total transmit power at EVM 0.04, S = 200.
    pub fn power_sweep() -> Self {
        Self {
            system: SystemConfig {
                power: PowerMode::Total { watts: 0.316 },
                subcarriers: 200,
                evm: 0.04,
                ..SystemConfig::default()
            },
            sweep: Sweep {
                variable: SweepVariable::Power,
                values: vec![1e-3, 1e-2, 0.1, 0.316, 1.0, 10.0, 100.0, 1e3, 1e4],
            },
            ..Self::default()
        }
    }

    pub fn with_profile(mut self, profile: Profile) -> Self {
        let seed = self.swarm.seed;
        self.swarm = SwarmConfig { seed, ..profile.swarm() };
        self
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Parses `text` as overrides on top of `base`; tables merge key by key.
    ///
    /// A table carrying a `mode` or `kind` tag replaces the base table whole, so switching
    /// enum variants does not leave stale fields behind.
    pub fn from_toml_over(base: &Self, text: &str) -> Result<Self> {
        let overrides: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        // a top-level seed is the master seed unless the scenario pins its own
        let scenario_seed = overrides.get("scenario").and_then(|t| t.get("seed")).is_some();
        let master = overrides.contains_key("seed");
        let mut merged: toml::Table = base.to_toml().parse().expect("spec renders valid toml");
        merge_tables(&mut merged, overrides);
        let spec: Self =
            toml::Value::Table(merged).try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        if master && !scenario_seed {
            let seed = spec.seed;
            return Ok(spec.with_seed(seed));
        }
        Ok(spec)
    }

    /// Sets the master seed, which drives both the drops and the swarm.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.scenario.seed = seed;
        self
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("spec serialises")
    }

    /// SHA-256 of the canonical TOML rendering.
    pub fn config_hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.output = None;
        let digest = Sha256::digest(canonical.to_toml().as_bytes());
        digest.iter().fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.drops == 0 {
            return Err(Error::Config("drop count must be >= 1".into()));
        }
        if self.sweep.values.is_empty() {
            return Err(Error::Config("sweep grid is empty".into()));
        }
        if self.strategies.is_empty() {
            return Err(Error::Config("no strategies selected".into()));
        }
        if self.optimization_realizations == 0 {
            return Err(Error::Config("optimization_realizations must be >= 1".into()));
        }
        self.scenario.validate()?;
        self.system.validate()?;
        self.swarm.validate().map_err(|e| Error::Config(e.to_string()))?;
        for &v in &self.sweep.values {
            let ok = match self.sweep.variable {
                SweepVariable::Subcarriers => v >= 1.0 && v.fract() == 0.0,
                SweepVariable::Evm => (0.0..=1.0).contains(&v),
                SweepVariable::Power => v >= 0.0 && v.is_finite(),
            };
            if !ok {
                return Err(Error::Config(format!("invalid {} sweep value {v}", self.sweep.variable.name())));
            }
        }
        Ok(())
    }

    /// System configuration and subcarrier count at one sweep point.
    fn point(&self, value: f64) -> (SystemConfig, usize) {
        let mut sys = self.system.clone();
        let mut s = sys.subcarriers;
        match self.sweep.variable {
            SweepVariable::Subcarriers => s = value as usize,
            SweepVariable::Evm => sys.evm = value,
            SweepVariable::Power => {
                sys.power = match sys.power {
                    PowerMode::Psd { .. } => PowerMode::Psd { watts_per_mhz: value },
                    PowerMode::Total { .. } => PowerMode::Total { watts: value },
                }
            }
        }
        (sys, s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub sweep_value: f64,
    pub strategy: Strategy,
    pub mean_rate: f64,
    pub std_error: f64,
    pub drops: usize,
    /// `K log₂(1/EVM²)` at this point.
    pub limit: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub variable: SweepVariable,
    pub seed: u64,
    pub config_hash: String,
    pub rows: Vec<ResultRow>,
    /// `per_drop[d][point][strategy]` in sweep and strategy order.
    pub per_drop: Vec<Vec<Vec<f64>>>,
    pub strategies: Vec<Strategy>,
}

impl ResultTable {
    pub fn row(&self, sweep_value: f64, strategy: Strategy) -> Option<&ResultRow> {
        self.rows.iter().find(|r| r.sweep_value == sweep_value && r.strategy == strategy)
    }

    pub fn mean(&self, sweep_value: f64, strategy: Strategy) -> Option<f64> {
        self.row(sweep_value, strategy).map(|r| r.mean_rate)
    }

    /// Per-drop values of one strategy at one sweep point.
    pub fn drop_values(&self, point: usize, strategy: Strategy) -> Option<Vec<f64>> {
        let j = self.strategies.iter().position(|&s| s == strategy)?;
        Some(self.per_drop.iter().map(|d| d[point][j]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# movant sweep={}", self.variable.name());
        let _ = writeln!(s, "# seed={}", self.seed);
        let _ = writeln!(s, "# config_sha256={}", self.config_hash);
        s.push_str("sweep_value,strategy,mean_rate,std_error,drops,limit\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                r.sweep_value,
                r.strategy.name(),
                r.mean_rate,
                r.std_error,
                r.drops,
                r.limit
            );
        }
        s
    }
}

fn merge_tables(base: &mut toml::Table, overrides: toml::Table) {
    for (key, value) in overrides {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o))
                if !(o.contains_key("mode") || o.contains_key("kind")) =>
            {
                merge_tables(b, o)
            }
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}

fn mix_seed(master: u64, drop: u64, point: u64) -> u64 {
    // splitmix64 finaliser over the combined key
    let mut z = master ^ drop.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ point.wrapping_mul(0xC2B2_AE3D_27D4_EB4F);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Extra multipath realisations for the same users, from streams disjoint from the drop streams.
fn extra_realizations(
    spec: &ExperimentSpec,
    drop: usize,
    users: &crate::scenario::UserDrop,
) -> Result<Vec<Vec<UserPaths<f64>>>> {
    use crate::scenario::{gen_los_scenario, gen_nlos_scenario};
    (1..spec.optimization_realizations)
        .map(|r| {
            let stream = (1u64 << 40) + (drop as u64) * spec.optimization_realizations as u64 + r as u64;
            let mut rng = drop_rng(spec.scenario.seed, stream);
            match spec.scenario.kind {
                ScenarioKind::LosDominant => gen_los_scenario(users, &spec.scenario, &mut rng),
                ScenarioKind::RichNlos => gen_nlos_scenario(users, &spec.scenario, &mut rng),
            }
        })
        .collect()
}

fn optimize_point(
    spec: &ExperimentSpec,
    sys: &SystemConfig,
    grid: &RegionGrid<f64>,
    realizations: &[PreparedChannel<f64>],
    params: RateParams<f64>,
    drop: usize,
    point: usize,
) -> Result<PlacementResult<f64>> {
    let seeds =
        if spec.seed_sparse_upa { vec![sys.baseline(Strategy::SparseUpa)?.expect("fixed layout")] } else { vec![] };
    let cfg =
        SwarmConfig { seed: mix_seed(spec.seed ^ spec.swarm.seed, drop as u64, point as u64), ..spec.swarm.clone() };
    optimize_placement(grid, realizations, params, &cfg, spec.penalty, &seeds)
}

/// Optimises the movable array for one drop at one sweep point, exactly as [`run_experiment`] does.
pub fn optimize_drop(spec: &ExperimentSpec, drop: usize, point: usize) -> Result<PlacementResult<f64>> {
    spec.validate()?;
    let value =
        *spec.sweep.values.get(point).ok_or_else(|| Error::Config(format!("sweep point {point} out of range")))?;
    let (users, paths) = generate_drop(&spec.scenario, drop as u64)?;
    let (sys, s) = spec.point(value);
    let ofdm = sys.ofdm(s)?;
    let mut realizations = vec![PreparedChannel::new(&paths, &ofdm)?];
    for extra in extra_realizations(spec, drop, &users)? {
        realizations.push(PreparedChannel::new(&extra, &ofdm)?);
    }
    optimize_point(spec, &sys, &sys.region_grid()?, &realizations, sys.rate_params(s)?, drop, point)
}

/// Rates of every requested strategy at every sweep point, for one drop.
fn run_drop(spec: &ExperimentSpec, drop: usize) -> Result<Vec<Vec<f64>>> {
    let (users, paths) = generate_drop(&spec.scenario, drop as u64)?;
    let extras = if spec.strategies.iter().any(|s| s.needs_optimization()) {
        extra_realizations(spec, drop, &users)?
    } else {
        Vec::new()
    };
    let grid = spec.system.region_grid()?;
    let mut out = Vec::with_capacity(spec.sweep.values.len());
    for (pi, &value) in spec.sweep.values.iter().enumerate() {
        let (sys, s) = spec.point(value);
        let ofdm = sys.ofdm(s)?;
        let params = sys.rate_params(s)?;
        let prepared = PreparedChannel::new(&paths, &ofdm)?;

        let optimized = if spec.strategies.iter().any(|s| s.needs_optimization()) {
            let mut realizations = vec![prepared.clone()];
            for extra in &extras {
                realizations.push(PreparedChannel::new(extra, &ofdm)?);
            }
            Some(optimize_point(spec, &sys, &grid, &realizations, params, drop, pi)?.layout)
        } else {
            None
        };

        let mut row = Vec::with_capacity(spec.strategies.len());
        for &strategy in &spec.strategies {
            let rate = match strategy {
                Strategy::Movable => {
                    sum_rate(&prepared.synthesize(optimized.as_ref().expect("optimised"))?, &params)?.sum_rate
                }
                Strategy::InterferenceFree => {
                    interference_free_bound(&prepared.synthesize(optimized.as_ref().expect("optimised"))?, &params)?
                }
                fixed => {
                    let layout = sys.baseline(fixed)?.expect("fixed layout");
                    sum_rate(&prepared.synthesize(&layout)?, &params)?.sum_rate
                }
            };
            row.push(rate);
        }
        out.push(row);
    }
    Ok(out)
}

/// Runs every drop, evaluates all strategies on the shared channels and aggregates.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ResultTable> {
    spec.validate()?;
    let per_drop = (0..spec.drops).into_par_iter().map(|d| run_drop(spec, d)).collect::<Result<Vec<_>>>()?;

    let n = spec.drops as f64;
    let mut rows = Vec::new();
    for (pi, &value) in spec.sweep.values.iter().enumerate() {
        let (sys, _) = spec.point(value);
        let limit = asymptotic_limit(spec.scenario.users, sys.evm)?;
        for (si, &strategy) in spec.strategies.iter().enumerate() {
            let vals: Vec<f64> = per_drop.iter().map(|d| d[pi][si]).collect();
            let mean = vals.iter().sum::<f64>() / n;
            let std_error = if spec.drops > 1 {
                let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
                (var / n).sqrt()
            } else {
                0.0
            };
            rows.push(ResultRow { sweep_value: value, strategy, mean_rate: mean, std_error, drops: spec.drops, limit });
        }
    }
    Ok(ResultTable {
        variable: spec.sweep.variable,
        seed: spec.seed,
        config_hash: spec.config_hash(),
        rows,
        per_drop,
        strategies: spec.strategies.clone(),
    })
}

pub fn sweep_subcarriers(spec: &ExperimentSpec) -> Result<ResultTable> {
    expect_variable(spec, SweepVariable::Subcarriers)?;
    run_experiment(spec)
}

pub fn sweep_evm(spec: &ExperimentSpec) -> Result<ResultTable> {
    expect_variable(spec, SweepVariable::Evm)?;
    run_experiment(spec)
}

pub fn sweep_power(spec: &ExperimentSpec) -> Result<ResultTable> {
    expect_variable(spec, SweepVariable::Power)?;
    run_experiment(spec)
}

fn expect_variable(spec: &ExperimentSpec, v: SweepVariable) -> Result<()> {
    if spec.sweep.variable != v {
        return Err(Error::Config(format!("expected a {} sweep, got {}", v.name(), spec.sweep.variable.name())));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_power_bookkeeping() {
        let sys = SystemConfig::default();
        assert!((sys.power_per_subcarrier(100) - 1.5e-5).abs() < 1e-18);
        assert!((sys.noise_per_subcarrier() - 3.98e-15 * 0.015).abs() < 1e-28);
        let total = SystemConfig { power: PowerMode::Total { watts: 0.316 }, ..sys };
        assert!((total.power_per_subcarrier(200) - 1.58e-3).abs() < 1e-15);
    }

    #[test]
    fn strategy_names_roundtrip() {
        for s in Strategy::ALL {
            assert_eq!(Strategy::parse(s.name()).unwrap(), s);
        }
        assert!(Strategy::parse("fluid").is_err());
    }

    #[test]
    fn spec_toml_roundtrip() {
        let spec = ExperimentSpec::power_sweep();
        let back = ExperimentSpec::from_toml(&spec.to_toml()).unwrap();
        assert_eq!(back, spec);
        assert_eq!(back.config_hash(), spec.config_hash());
    }

    #[test]
    fn partial_toml_uses_defaults() {
        let spec = ExperimentSpec::from_toml("drops = 3\n[sweep]\nvariable = \"evm\"\nvalues = [0.1]\n").unwrap();
        assert_eq!(spec.drops, 3);
        assert_eq!(spec.system.antennas, 16);
        assert_eq!(spec.sweep.variable, SweepVariable::Evm);
        assert!(ExperimentSpec::from_toml("bogus = 1").is_err());
    }

    #[test]
    fn overrides_merge_onto_preset() {
        let base = ExperimentSpec::evm_sweep();
        let spec = ExperimentSpec::from_toml_over(&base, "drops = 2\n[system]\nantennas = 4\n").unwrap();
        assert_eq!(spec.sweep, base.sweep);
        assert_eq!(spec.system.antennas, 4);
        assert_eq!(spec.system.power, PowerMode::Total { watts: 0.316 });
        let switched =
            ExperimentSpec::from_toml_over(&base, "[system.power]\nmode = \"psd\"\nwatts_per_mhz = 2e-3\n").unwrap();
        assert_eq!(switched.system.power, PowerMode::Psd { watts_per_mhz: 2e-3 });
        assert!(ExperimentSpec::from_toml_over(&base, "[system]\nantenas = 4\n").is_err());
    }

    #[test]
    fn top_level_seed_reaches_the_drops() {
        let base = ExperimentSpec::default();
        let spec = ExperimentSpec::from_toml_over(&base, "seed = 7\n").unwrap();
        assert_eq!((spec.seed, spec.scenario.seed), (7, 7));
        let pinned = ExperimentSpec::from_toml_over(&base, "seed = 7\n[scenario]\nseed = 3\n").unwrap();
        assert_eq!((pinned.seed, pinned.scenario.seed), (7, 3));
    }

    #[test]
    fn validation_rejects_bad_specs() {
        let mut spec = ExperimentSpec { drops: 0, ..Default::default() };
        assert!(spec.validate().is_err());
        spec.drops = 1;
        spec.sweep.values = vec![];
        assert!(spec.validate().is_err());
        spec.sweep.values = vec![1.5];
        assert!(spec.validate().is_err());
        spec.sweep.values = vec![2.0];
        spec.system.antennas = 15;
        assert!(spec.validate().is_err());
    }

    #[test]
    fn mixed_seeds_differ() {
        assert_ne!(mix_seed(1, 0, 0), mix_seed(1, 1, 0));
        assert_ne!(mix_seed(1, 0, 0), mix_seed(1, 0, 1));
        assert_eq!(mix_seed(5, 2, 3), mix_seed(5, 2, 3));
    }

    #[test]
    fn aperture_matches_abutting_grid() {
        let sys = SystemConfig::default();
        let (w, h) = sys.aperture().unwrap();
        assert!((w - 20.0 * sys.wavelength()).abs() < 1e-12);
        assert!((h - 20.0 * sys.wavelength()).abs() < 1e-12);
    }
}
