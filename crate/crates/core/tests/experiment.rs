use movant_core::experiment::{
    optimize_drop, run_experiment, sweep_evm, sweep_power, ExperimentSpec, Profile, Strategy, SweepVariable,
};
use movant_core::geometry::check_feasible;
use movant_core::scenario::ScenarioKind;

fn tiny(mut spec: ExperimentSpec) -> ExperimentSpec {
    spec = spec.with_profile(Profile::Smoke);
    spec.swarm.particles = 8;
    spec.swarm.iterations = 4;
    spec.drops = 3;
    spec
}

#[test]
fn paired_drops_order_the_strategies() {
    let mut spec = tiny(ExperimentSpec::subcarrier_sweep(ScenarioKind::LosDominant));
    spec.sweep.values = vec![1.0, 8.0];
    let table = run_experiment(&spec).unwrap();
    assert_eq!(table.rows.len(), 2 * Strategy::ALL.len());
    for point in 0..2 {
        let movable = table.drop_values(point, Strategy::Movable).unwrap();
        let upa = table.drop_values(point, Strategy::SparseUpa).unwrap();
        let bound = table.drop_values(point, Strategy::InterferenceFree).unwrap();
        for d in 0..3 {
            // the sparse UPA seeds the swarm, so the optimised array never does worse on its own drop
            assert!(movable[d] >= upa[d], "drop {d}: {} < {}", movable[d], upa[d]);
            assert!(bound[d] >= movable[d]);
        }
    }
}

#[test]
fn fixed_baselines_do_not_depend_on_the_strategy_set() {
    let mut spec = tiny(ExperimentSpec::subcarrier_sweep(ScenarioKind::RichNlos));
    spec.sweep.values = vec![4.0];
    let all = run_experiment(&spec).unwrap();
    spec.strategies = vec![Strategy::CompactUpa, Strategy::SparseUla];
    let some = run_experiment(&spec).unwrap();
    for s in [Strategy::CompactUpa, Strategy::SparseUla] {
        assert_eq!(all.mean(4.0, s), some.mean(4.0, s));
    }
}

#[test]
fn evm_sweep_decreases_to_zero() {
    let mut spec = tiny(ExperimentSpec::evm_sweep());
    spec.strategies = vec![Strategy::SparseUpa, Strategy::CompactUpa];
    spec.sweep.values = vec![0.0, 0.05, 0.3, 1.0];
    let table = sweep_evm(&spec).unwrap();
    for s in [Strategy::SparseUpa, Strategy::CompactUpa] {
        let means: Vec<f64> = spec.sweep.values.iter().map(|&v| table.mean(v, s).unwrap()).collect();
        assert!(means.windows(2).all(|w| w[1] <= w[0]), "{means:?}");
        assert_eq!(means[3], 0.0);
        assert!(table.row(0.0, s).unwrap().limit.is_infinite());
    }
}

#[test]
fn power_sweep_rises_towards_the_limit() {
    let mut spec = tiny(ExperimentSpec::power_sweep());
    spec.strategies = vec![Strategy::SparseUla];
    spec.sweep.values = vec![1e-3, 1.0, 1e3, 1e6];
    let table = sweep_power(&spec).unwrap();
    let means: Vec<f64> = spec.sweep.values.iter().map(|&v| table.mean(v, Strategy::SparseUla).unwrap()).collect();
    assert!(means.windows(2).all(|w| w[1] >= w[0]), "{means:?}");
    let limit = table.row(1e6, Strategy::SparseUla).unwrap().limit;
    assert!((limit - 92.877_123_795).abs() < 1e-6);
    assert!(means[3] <= limit && means[3] > 0.5 * limit);
}

#[test]
fn sweep_entry_points_check_the_variable() {
    let spec = tiny(ExperimentSpec::evm_sweep());
    assert_eq!(spec.sweep.variable, SweepVariable::Evm);
    assert!(sweep_power(&spec).is_err());
    assert!(sweep_evm(&spec).is_ok());
}

#[test]
fn csv_output_is_reproducible() {
    let mut spec = tiny(ExperimentSpec::subcarrier_sweep(ScenarioKind::LosDominant));
    spec.sweep.values = vec![2.0];
    let a = run_experiment(&spec).unwrap().to_csv();
    let b = run_experiment(&spec).unwrap().to_csv();
    assert_eq!(a, b);
    assert!(a.contains(&format!("# config_sha256={}", spec.config_hash())));
    let c = run_experiment(&spec.clone().with_seed(2)).unwrap().to_csv();
    assert_ne!(a, c);
}

#[test]
fn extra_realizations_feed_the_optimiser() {
    let mut spec = tiny(ExperimentSpec::subcarrier_sweep(ScenarioKind::LosDominant));
    spec.sweep.values = vec![2.0];
    spec.optimization_realizations = 3;
    let result = optimize_drop(&spec, 0, 0).unwrap();
    let grid = spec.system.region_grid().unwrap();
    assert!(check_feasible(&result.layout, &grid).unwrap().is_feasible());
    assert!(result.trace.is_nondecreasing());
    assert!(optimize_drop(&spec, 0, 5).is_err());
}
