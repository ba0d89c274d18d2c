use esn_force::harness::{Experiment, Phase};
use esn_force::signal::MackeyGlass;
use esn_force::{run_experiment, seed_sweep, CompositeSign, ExperimentConfig, Method};

fn small(method: Method) -> ExperimentConfig {
    ExperimentConfig {
        n_neurons: 30,
        connectivity: 0.2,
        train_steps: 400,
        predict_steps: 200,
        composite_sign: CompositeSign::Gradient,
        method,
        seed: 3,
        ..Default::default()
    }
}

#[test]
fn untrained_network_outputs_zero() {
    let cfg = ExperimentConfig { train_steps: 0, predict_steps: 300, ..small(Method::RlsForce) };
    let rec = run_experiment(&cfg).unwrap();
    assert!(rec.rows.iter().all(|r| r.z == 0.0 && r.w_norm == 0.0));
    assert!(rec.train_mse.is_none());
    let f = MackeyGlass::sequence(17, 1.2, 300).unwrap();
    let mean_sq = f.iter().map(|v| v * v).sum::<f64>() / 300.0;
    assert!((rec.predict_mse.unwrap() - mean_sq).abs() < 1e-12);
}

#[test]
fn zero_horizon_reports_training_only() {
    let cfg = ExperimentConfig { predict_steps: 0, ..small(Method::CompositeRls) };
    let rec = run_experiment(&cfg).unwrap();
    assert_eq!(rec.rows.len(), 400);
    assert!(rec.train_mse.is_some());
    assert!(rec.predict_mse.is_none());
}

#[test]
fn trace_is_complete_and_ordered() {
    for method in Method::ALL {
        let rec = run_experiment(&small(method)).unwrap();
        assert_eq!(rec.rows.len(), 600);
        for (i, row) in rec.rows.iter().enumerate() {
            assert_eq!(row.step, i);
            assert_eq!(row.phase, if i < 400 { Phase::Train } else { Phase::Predict });
        }
        assert!(rec.train_mse.unwrap() >= 0.0 && rec.predict_mse.unwrap() >= 0.0);
    }
}

#[test]
fn learner_is_frozen_during_prediction() {
    for method in Method::ALL {
        let cfg = small(method);
        let mut exp = Experiment::new(&cfg).unwrap();
        for _ in 0..cfg.train_steps {
            exp.train_step().unwrap();
        }
        let learner = exp.learner().clone();
        let w = exp.model().w_out.clone();
        for _ in 0..cfg.predict_steps {
            exp.predict_step().unwrap();
        }
        assert_eq!(exp.learner(), &learner);
        assert_eq!(exp.model().w_out, w);
    }
}

#[test]
fn fixed_weights_never_change_and_states_stay_bounded() {
    for method in Method::ALL {
        let cfg = small(method);
        let mut exp = Experiment::new(&cfg).unwrap();
        let before = exp.model().clone();
        for _ in 0..cfg.train_steps {
            exp.train_step().unwrap();
            assert!(exp.state().x.as_slice().iter().all(|x| x.abs() < 1.0));
            assert!(exp.state().r.max_abs() <= 1.0);
        }
        for _ in 0..cfg.predict_steps {
            exp.predict_step().unwrap();
        }
        let after = exp.model();
        assert_eq!(after.internal(), before.internal());
        assert_eq!(after.input_weights(), before.input_weights());
        assert_eq!(after.feedback_weights(), before.feedback_weights());
        assert_ne!(after.w_out, before.w_out);
    }
}

#[test]
fn runs_are_deterministic() {
    let cfg = small(Method::CompositeRls);
    assert!(run_experiment(&cfg).unwrap().same_outcome(&run_experiment(&cfg).unwrap()));
    let other = ExperimentConfig { seed: 4, ..cfg };
    assert!(!run_experiment(&other).unwrap().same_outcome(&run_experiment(&small(Method::CompositeRls)).unwrap()));
}

#[test]
fn beta_zero_reduces_to_basic_rls() {
    let base = ExperimentConfig { composite_gain: 0.0, ..small(Method::RlsForce) };
    let rls = run_experiment(&base).unwrap();
    let comp = run_experiment(&ExperimentConfig { method: Method::CompositeRls, ..base }).unwrap();
    assert_eq!(rls.rows, comp.rows);
    assert_eq!(rls.train_mse.map(f64::to_bits), comp.train_mse.map(f64::to_bits));
    assert_eq!(rls.predict_mse.map(f64::to_bits), comp.predict_mse.map(f64::to_bits));
}

#[test]
fn ground_truth_input_changes_only_prediction() {
    let a = run_experiment(&small(Method::RlsForce)).unwrap();
    let cfg = ExperimentConfig { autonomous_input: esn_force::AutonomousInput::GroundTruth, ..small(Method::RlsForce) };
    let b = run_experiment(&cfg).unwrap();
    assert_eq!(a.train_rows(), b.train_rows());
    assert_ne!(a.predict_rows(), b.predict_rows());
}

#[test]
fn washout_shifts_the_target() {
    let cfg = ExperimentConfig { washout_steps: 25, ..small(Method::RlsForce) };
    let rec = run_experiment(&cfg).unwrap();
    let f = MackeyGlass::sequence(17, 1.2, 30).unwrap();
    assert_eq!(rec.rows[0].f, f[25]);
}

#[test]
fn divergence_is_reported_not_raised() {
    // A very large LMS rate with the growing composite term blows up.
    let cfg = ExperimentConfig { lms_rate: 1e6, composite_gain: 1e6, ..small(Method::CompositeLms) };
    let rec = run_experiment(&cfg).unwrap();
    let step = rec.diverged_at.expect("run should diverge");
    assert_eq!(rec.rows.len(), step);
    assert!(rec.train_mse.is_none() && rec.predict_mse.is_none());
}

#[test]
fn sweep_aggregates() {
    let cfg = small(Method::CompositeRls);
    let one = seed_sweep(&cfg, &[3], 1).unwrap();
    let rec = run_experiment(&cfg).unwrap();
    let agg = &one.aggregate;
    assert_eq!(agg.train_mse.unwrap().median, rec.train_mse.unwrap());
    assert_eq!(agg.predict_mse.unwrap().median, rec.predict_mse.unwrap());
    assert_eq!((agg.runs, agg.diverged), (1, 0));

    let seeds = [1, 2, 3, 4];
    let par = seed_sweep(&cfg, &seeds, 4).unwrap();
    let seq = seed_sweep(&cfg, &seeds, 1).unwrap();
    assert_eq!(par.aggregate, seq.aggregate);
    for (a, b) in par.records.iter().zip(&seq.records) {
        assert!(a.same_outcome(b));
    }
    assert_eq!(par.records.iter().map(|r| r.seed).collect::<Vec<_>>(), seeds);
    assert!(seed_sweep(&cfg, &[], 1).is_err());
}

#[test]
fn replay_of_trained_model_is_frozen() {
    let cfg = small(Method::RlsForce);
    let mut exp = Experiment::new(&cfg).unwrap();
    for _ in 0..cfg.train_steps {
        exp.train_step().unwrap();
    }
    let model = exp.into_model();
    let mut replay = Experiment::with_model(&cfg, model.clone()).unwrap();
    let rec = replay.run().unwrap();
    assert!(rec.rows.iter().all(|r| r.w_norm == model.w_out.norm()));
    assert!(Experiment::with_model(&ExperimentConfig { n_neurons: 31, ..cfg }, model).is_err());
}
