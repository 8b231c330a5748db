use boltzmann_fourier::charfn::{example_initial_datum, MeasureSpec};
use boltzmann_fourier::evolve::{evolve, load_states, save_trajectory, sup_distance, EvolveConfig};

fn small(dt: f64) -> EvolveConfig {
    let mut cfg = EvolveConfig::new(1.0, 4.0, 3.0, 9, 0.2);
    cfg.safety = 1.0;
    cfg.dt = Some(dt);
    cfg
}

#[test]
fn rk4_error_shrinks_at_fourth_order() {
    let init = example_initial_datum();
    let reference = evolve(&init, &small(0.003125)).unwrap();
    let errors: Vec<f64> = [0.05, 0.025, 0.0125]
        .iter()
        .map(|&dt| sup_distance(evolve(&init, &small(dt)).unwrap().final_state(), reference.final_state()))
        .collect();
    for w in errors.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order > 3.5 && order < 4.6, "observed order {order} from {errors:?}");
    }
}

#[test]
fn records_follow_cadence_and_keep_invariants() {
    let traj = evolve(&example_initial_datum(), &small(0.025)).unwrap();
    let times = traj.record.times();
    assert_eq!(times.len(), 3);
    assert!((times[2] - 0.2).abs() < 1e-12);
    for row in &traj.record.rows {
        assert!(row.max_modulus <= 1.0 + 1e-12);
        assert!(row.hermitian_defect <= 1e-12);
        assert!(row.conservation_residual <= 1e-12);
    }
    // Collisions pull the example datum toward equilibrium, so the outer shell decays.
    assert!(traj.record.rows.windows(2).all(|w| w[1].shell_sup < w[0].shell_sup));
}

#[test]
fn saved_trajectory_reloads_bit_for_bit() {
    let cfg = small(0.025);
    let traj = evolve(&MeasureSpec::gaussian([0.2, 0.0, -0.1], 0.8), &cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    save_trajectory(dir.path(), &traj, &cfg).unwrap();
    let loaded = load_states(dir.path()).unwrap();
    assert_eq!(loaded.len(), traj.states.len());
    for ((t, grid), (row, state)) in loaded.iter().zip(traj.record.rows.iter().zip(&traj.states)) {
        assert_eq!(*t, row.t);
        assert_eq!(grid.values(), state.values());
    }
}

#[test]
fn too_large_step_is_rejected() {
    let cfg = small(10.0);
    assert!(evolve(&example_initial_datum(), &cfg).is_err());
}
