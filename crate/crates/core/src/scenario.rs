//! Random user drops and clustered multipath for the two propagation scenarios.
//!
//! Users stand on the ground in front of a wall-mounted array. Every user gets a
//! line-of-sight path plus clustered scattered paths whose delays exceed the LOS
//! delay; path powers are split by the Rician κ-factor and normalised to the
//! urban-micro path loss of the user's distance.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{PathComponent, UserPaths};
use crate::geometry::Position3;
use crate::{Error, Result, SPEED_OF_LIGHT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    /// LOS path plus a few narrow clusters around the LOS direction.
    LosDominant,
    /// LOS path plus many two-path clusters spread over all directions.
    RichNlos,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathlossModel {
    /// `34.53 + 38 log₁₀(d)` dB.
    #[default]
    UrbanMicro,
}

impl PathlossModel {
    pub fn loss_db(self, distance_m: f64) -> Result<f64> {
        match self {
            PathlossModel::UrbanMicro => pathloss_db(distance_m),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    pub users: usize,
    pub kappa_db: f64,
    pub clusters: usize,
    pub paths_per_cluster: usize,
    /// Half-width of the cluster-centre azimuth interval around the LOS azimuth (LOS-dominant only).
    pub cluster_azimuth_spread_deg: f64,
    /// Half-width of the cluster-centre elevation interval around the LOS elevation (LOS-dominant only).
    pub cluster_elevation_spread_deg: f64,
    /// Half-width of the per-path angular interval around its cluster centre.
    pub path_spread_deg: f64,
    /// Scattered delays are drawn uniformly in `(τ_LOS, delay_stretch · τ_LOS]`.
    pub delay_stretch: f64,
    /// Cluster powers fall as `exp(-cluster_decay · c / clusters)` for cluster index c.
    pub cluster_decay: f64,
    pub radius_min_m: f64,
    pub radius_max_m: f64,
    /// Users are placed at azimuths in `[-azimuth_max, azimuth_max]` (radians).
    pub azimuth_max_rad: f64,
    pub bs_height_m: f64,
    pub user_height_m: f64,
    pub pathloss: PathlossModel,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self::los_dominant()
    }
}

impl ScenarioConfig {
    pub fn los_dominant() -> Self {
        Self {
            kind: ScenarioKind::LosDominant,
            users: 10,
            kappa_db: 10.0,
            clusters: 6,
            paths_per_cluster: 20,
            cluster_azimuth_spread_deg: 40.0,
            cluster_elevation_spread_deg: 20.0,
            path_spread_deg: 5.0,
            delay_stretch: 10.0,
            cluster_decay: 2.0,
            radius_min_m: 100.0,
            radius_max_m: 300.0,
            azimuth_max_rad: PI / 3.0,
            bs_height_m: 4.0,
            user_height_m: 1.25,
            pathloss: PathlossModel::UrbanMicro,
            seed: 0,
        }
    }

    pub fn rich_nlos() -> Self {
        Self {
            kind: ScenarioKind::RichNlos,
            kappa_db: 0.0,
            clusters: 100,
            paths_per_cluster: 2,
            ..Self::los_dominant()
        }
    }

    pub fn for_kind(kind: ScenarioKind) -> Self {
        match kind {
            ScenarioKind::LosDominant => Self::los_dominant(),
            ScenarioKind::RichNlos => Self::rich_nlos(),
        }
    }

    pub fn kappa_linear(&self) -> f64 {
        10f64.powf(self.kappa_db / 10.0)
    }

    /// Users sit this far below the array centre.
    pub fn user_depth_m(&self) -> f64 {
        self.user_height_m - self.bs_height_m
    }

    pub fn paths_per_user(&self) -> usize {
        1 + self.clusters * self.paths_per_cluster
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.users >= 1
            && self.radius_min_m > 0.0
            && self.radius_max_m >= self.radius_min_m
            && self.azimuth_max_rad >= 0.0
            && self.azimuth_max_rad <= PI
            && self.delay_stretch >= 1.0
            && self.kappa_db.is_finite()
            && self.cluster_decay >= 0.0
            && self.path_spread_deg >= 0.0
            && self.cluster_azimuth_spread_deg >= 0.0
            && self.cluster_elevation_spread_deg >= 0.0
            && (self.clusters == 0 || self.paths_per_cluster > 0);
        if !ok {
            return Err(Error::Config("scenario parameters out of range".into()));
        }
        Ok(())
    }
}

/// Ground positions of the K users relative to the array centre.
#[derive(Debug, Clone, PartialEq)]
pub struct UserDrop {
    pub positions: Vec<Position3<f64>>,
}

impl UserDrop {
    /// Horizontal distance and azimuth of user `i`.
    pub fn polar(&self, i: usize) -> (f64, f64) {
        let p = self.positions[i];
        (p.x.hypot(p.y), p.y.atan2(p.x))
    }
}

/// Independent stream per drop: the same `(seed, drop)` always yields the same draws.
pub fn drop_rng(seed: u64, drop: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(drop);
    rng
}

/// K users uniform in radius and azimuth at user height.
pub fn place_users<R: Rng>(cfg: &ScenarioConfig, rng: &mut R) -> UserDrop {
    let z = cfg.user_depth_m();
    let positions = (0..cfg.users)
        .map(|_| {
            let r = uniform(rng, cfg.radius_min_m, cfg.radius_max_m);
            let phi = uniform(rng, -cfg.azimuth_max_rad, cfg.azimuth_max_rad);
            Position3::new(r * phi.cos(), r * phi.sin(), z)
        })
        .collect();
    UserDrop { positions }
}

/// Urban-micro path loss `34.53 + 38 log₁₀(d)` dB for `d ≥ 1` m.
pub fn pathloss_db(distance_m: f64) -> Result<f64> {
    if !(distance_m >= 1.0) {
        return Err(Error::invalid(format!("path-loss distance must be >= 1 m, got {distance_m}")));
    }
    Ok(34.53 + 38.0 * distance_m.log10())
}

fn uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.gen::<f64>()
}

/// Maps an arbitrary direction to azimuth in `[-π, π]` and elevation in `[-π/2, π/2]`.
pub fn wrap_direction(azimuth: f64, elevation: f64) -> (f64, f64) {
    let mut az = azimuth;
    let mut el = elevation;
    // reflect elevation over the poles, turning the azimuth around
    el = (el + FRAC_PI_2).rem_euclid(TAU) - FRAC_PI_2;
    if el > FRAC_PI_2 {
        el = PI - el;
        az += PI;
    }
    az = (az + PI).rem_euclid(TAU) - PI;
    (az, el.clamp(-FRAC_PI_2, FRAC_PI_2))
}

struct UserGeometry {
    distance: f64,
    azimuth: f64,
    elevation: f64,
}

fn user_geometry(p: &Position3<f64>) -> UserGeometry {
    let ground = p.x.hypot(p.y);
    UserGeometry {
        distance: (ground * ground + p.z * p.z).sqrt(),
        azimuth: p.y.atan2(p.x),
        elevation: p.z.atan2(ground),
    }
}

fn generate_user<R: Rng>(cfg: &ScenarioConfig, user: &Position3<f64>, rng: &mut R) -> Result<UserPaths<f64>> {
    let geo = user_geometry(user);
    let budget = 10f64.powf(-cfg.pathloss.loss_db(geo.distance)? / 10.0);
    let kappa = cfg.kappa_linear();
    let tau_los = geo.distance / SPEED_OF_LIGHT;
    let scattered_count = cfg.clusters * cfg.paths_per_cluster;

    let mut paths = Vec::with_capacity(1 + scattered_count);
    let los_power = if scattered_count == 0 { budget } else { budget * kappa / (1.0 + kappa) };
    paths.push(PathComponent::new(los_power.sqrt(), tau_los, geo.azimuth, geo.elevation));
    if scattered_count == 0 {
        return UserPaths::new(paths);
    }

    let weights: Vec<f64> =
        (0..cfg.clusters).map(|c| (-cfg.cluster_decay * c as f64 / cfg.clusters as f64).exp()).collect();
    let weight_sum: f64 = weights.iter().sum();
    let scattered_power = budget - los_power;
    let spread = cfg.path_spread_deg.to_radians();
    let mut scattered = Vec::with_capacity(scattered_count);
    for w in &weights {
        let (center_az, center_el) = match cfg.kind {
            ScenarioKind::LosDominant => {
                let da = cfg.cluster_azimuth_spread_deg.to_radians();
                let de = cfg.cluster_elevation_spread_deg.to_radians();
                (geo.azimuth + uniform(rng, -da, da), geo.elevation + uniform(rng, -de, de))
            }
            ScenarioKind::RichNlos => (uniform(rng, -PI, PI), uniform(rng, -FRAC_PI_2, FRAC_PI_2)),
        };
        let path_power = scattered_power * w / weight_sum / cfg.paths_per_cluster as f64;
        for _ in 0..cfg.paths_per_cluster {
            let (az, el) =
                wrap_direction(center_az + uniform(rng, -spread, spread), center_el + uniform(rng, -spread, spread));
            // (τ_LOS, stretch·τ_LOS]
            let delay = tau_los * (1.0 + (cfg.delay_stretch - 1.0) * (1.0 - rng.gen::<f64>()));
            let phase = uniform(rng, 0.0, TAU);
            scattered.push(PathComponent::new(path_power.sqrt(), delay, az, el).with_phase(phase));
        }
    }
    // exact split: scattered powers sum to budget/(1+κ)
    let got: f64 = scattered.iter().map(|p| p.amplitude * p.amplitude).sum();
    let fix = (scattered_power / got).sqrt();
    for p in &mut scattered {
        p.amplitude *= fix;
    }
    paths.extend(scattered);
    UserPaths::new(paths)
}

fn generate_paths<R: Rng>(drop: &UserDrop, cfg: &ScenarioConfig, rng: &mut R) -> Result<Vec<UserPaths<f64>>> {
    drop.positions.iter().map(|p| generate_user(cfg, p, rng)).collect()
}

/// LOS path plus `clusters × paths_per_cluster` scattered paths clustered around the LOS direction.
pub fn gen_los_scenario<R: Rng>(drop: &UserDrop, cfg: &ScenarioConfig, rng: &mut R) -> Result<Vec<UserPaths<f64>>> {
    if cfg.kind != ScenarioKind::LosDominant {
        return Err(Error::Config("LOS generator needs a LOS-dominant config".into()));
    }
    generate_paths(drop, cfg, rng)
}

/// LOS path plus clusters spread uniformly over all directions.
pub fn gen_nlos_scenario<R: Rng>(drop: &UserDrop, cfg: &ScenarioConfig, rng: &mut R) -> Result<Vec<UserPaths<f64>>> {
    if cfg.kind != ScenarioKind::RichNlos {
        return Err(Error::Config("NLOS generator needs a rich-NLOS config".into()));
    }
    generate_paths(drop, cfg, rng)
}

/// One complete drop: user placement followed by multipath generation, both from the drop's own stream.
pub fn generate_drop(cfg: &ScenarioConfig, drop: u64) -> Result<(UserDrop, Vec<UserPaths<f64>>)> {
    cfg.validate()?;
    let mut rng = drop_rng(cfg.seed, drop);
    let users = place_users(cfg, &mut rng);
    let paths = match cfg.kind {
        ScenarioKind::LosDominant => gen_los_scenario(&users, cfg, &mut rng)?,
        ScenarioKind::RichNlos => gen_nlos_scenario(&users, cfg, &mut rng)?,
    };
    Ok((users, paths))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pathloss_anchor_points() {
        assert!((pathloss_db(1.0).unwrap() - 34.53).abs() < 1e-12);
        assert!((pathloss_db(10.0).unwrap() - 72.53).abs() < 1e-12);
        assert!(pathloss_db(0.5).is_err());
        assert!(pathloss_db(f64::NAN).is_err());
        let mut prev = pathloss_db(1.0).unwrap();
        for d in [1.5, 2.0, 10.0, 100.0, 1000.0] {
            let v = pathloss_db(d).unwrap();
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn users_inside_placement_region() {
        let cfg = ScenarioConfig::default();
        let mut rng = drop_rng(1, 0);
        for _ in 0..200 {
            let drop = place_users(&cfg, &mut rng);
            assert_eq!(drop.positions.len(), 10);
            for i in 0..10 {
                let (r, phi) = drop.polar(i);
                assert!((100.0 - 1e-9..=300.0 + 1e-9).contains(&r));
                assert!(phi.abs() <= PI / 3.0 + 1e-12);
                assert_eq!(drop.positions[i].z, -2.75);
            }
        }
    }

    #[test]
    fn drop_is_deterministic() {
        let cfg = ScenarioConfig { seed: 77, ..ScenarioConfig::default() };
        assert_eq!(generate_drop(&cfg, 3).unwrap(), generate_drop(&cfg, 3).unwrap());
        assert_ne!(generate_drop(&cfg, 3).unwrap().0, generate_drop(&cfg, 4).unwrap().0);
    }

    #[test]
    fn wrong_generator_rejected() {
        let cfg = ScenarioConfig::rich_nlos();
        let mut rng = drop_rng(0, 0);
        let drop = place_users(&cfg, &mut rng);
        assert!(gen_los_scenario(&drop, &cfg, &mut rng).is_err());
    }

    #[test]
    fn wrap_direction_folds_poles() {
        let (az, el) = wrap_direction(0.0, FRAC_PI_2 + 0.1);
        assert!((el - (FRAC_PI_2 - 0.1)).abs() < 1e-12);
        assert!((az.abs() - PI).abs() < 1e-12);
        let (az, el) = wrap_direction(3.5, -0.2);
        assert!((az - (3.5 - TAU)).abs() < 1e-12);
        assert!((el + 0.2).abs() < 1e-12);
    }

    #[test]
    fn los_only_config_puts_all_power_on_los() {
        let cfg = ScenarioConfig { clusters: 0, paths_per_cluster: 0, ..ScenarioConfig::default() };
        let (drop, paths) = generate_drop(&cfg, 0).unwrap();
        let d = user_geometry(&drop.positions[0]).distance;
        let expected = 10f64.powf(-pathloss_db(d).unwrap() / 10.0);
        assert_eq!(paths[0].len(), 1);
        assert!((paths[0].total_power() - expected).abs() < 1e-12 * expected);
    }
}
