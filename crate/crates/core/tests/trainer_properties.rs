use netpg::consensus::Topology;
use netpg::estimation::EstimatorKind;
use netpg::newsvendor::Newsvendor;
use netpg::policy::PolicyKind;
use netpg::rng::{RngStream, StreamId};
use netpg::testbeds::MatrixBandit;
use netpg::trainer::{
    aggregate, mean_ci, run_replications, stationarity_diagnostic, stationarity_trace, train, train_with_seed,
    StepSchedule, TrainConfig, Trainer,
};
use proptest::prelude::*;

fn short(iterations: u64) -> TrainConfig {
    TrainConfig {
        iterations,
        replications: 3,
        ..Default::default()
    }
}

#[test]
fn update_is_exactly_alpha_times_gradient() {
    let game = Newsvendor::new(Default::default()).unwrap();
    let cfg = TrainConfig {
        step: StepSchedule { alpha0: 3.0, beta: 0.7 },
        ..short(50)
    };
    let mut trainer = Trainer::new(&game, &cfg, 17).unwrap();
    for _ in 0..50 {
        let before = trainer.params().clone();
        let (row, est) = trainer.step().unwrap();
        assert_eq!(row.alpha, 3.0 / (row.t as f64).powf(0.7));
        for i in 0..5 {
            let old = before.agent(i).as_slice();
            let new = trainer.params().agent(i).as_slice();
            for m in 0..old.len() {
                assert_eq!(new[m].to_bits(), (old[m] + row.alpha * est.per_agent[i][m]).to_bits());
            }
        }
        assert_eq!(row.t1, est.horizons.t1);
        assert_eq!(row.rhat, est.rhat);
    }
}

#[test]
fn runs_are_bit_reproducible() {
    let game = Newsvendor::new(Default::default()).unwrap();
    for estimator in EstimatorKind::ALL {
        let cfg = TrainConfig {
            estimator,
            seed: 99,
            ..short(300)
        };
        let a = train(&game, &cfg).unwrap();
        let b = train(&game, &cfg).unwrap();
        assert_eq!(a.params, b.params);
        assert_eq!(a.beliefs, b.beliefs);
        assert_eq!(a.log, b.log);
        let c = train(&game, &TrainConfig { seed: 100, ..cfg }).unwrap();
        assert_ne!(a.log, c.log);
    }
}

#[test]
fn replications_do_not_depend_on_worker_count() {
    let game = Newsvendor::new(Default::default()).unwrap();
    let cfg = short(100);
    let one = run_replications(&game, &cfg, Some(1)).unwrap();
    let three = run_replications(&game, &cfg, Some(3)).unwrap();
    assert_eq!(one.aggregate, three.aggregate);
    assert_eq!(one.logs, three.logs);
    assert!(run_replications(&game, &TrainConfig { replications: 1, ..cfg }, None).is_err());
}

#[test]
fn zero_rewards_leave_parameters_untouched() {
    let game = MatrixBandit::common(3, 3, 0.9, 1.0, |_| 0.0).unwrap();
    let cfg = short(200);
    let mut trainer = Trainer::new(&game, &cfg, 5).unwrap();
    let initial = trainer.params().clone();
    let out = train_with_seed(&game, &cfg, 5).unwrap();
    assert_eq!(out.params, initial);
    assert!(out.log.rows.iter().all(|r| r.ema_return == 0.0 && r.ema_rhat == 0.0));
    assert_eq!(stationarity_diagnostic(&out.log, 20).unwrap(), 0.0);
    trainer.step().unwrap();
    assert_eq!(trainer.params(), &initial);
}

#[test]
fn perfect_independent_has_no_belief_error() {
    let game = Newsvendor::new(Default::default()).unwrap();
    let mut cfg = TrainConfig {
        policy: PolicyKind::Independent,
        ..short(200)
    };
    cfg.comm.topology = Topology::Perfect;
    let out = train(&game, &cfg).unwrap();
    assert!(out.log.rows.iter().all(|r| r.belief_error == 0.0));
}

#[test]
fn disconnected_topology_is_rejected_up_front() {
    let game = Newsvendor::new(Default::default()).unwrap();
    let mut cfg = short(10);
    cfg.comm.period = 2;
    assert!(Trainer::new(&game, &cfg, 0).is_err());
    assert!(run_replications(&game, &cfg, None).is_err());
}

#[test]
fn step_size_sums() {
    let partial = |s: &StepSchedule, t: u64, sq: bool| -> f64 {
        (1..=t).map(|k| if sq { s.alpha(k).powi(2) } else { s.alpha(k) }).sum()
    };
    for beta in [0.6, 0.75, 1.0] {
        let s = StepSchedule { alpha0: 1.0, beta };
        assert!(s.square_summable());
        // Σ α_t keeps growing; Σ α_t² is bounded by its integral tail bound
        assert!(partial(&s, 1_000_000, false) > partial(&s, 1_000, false) + 1.0);
        let tail_bound = 1.0 + 1.0 / (2.0 * beta - 1.0);
        assert!(partial(&s, 1_000_000, true) <= tail_bound);
        assert!(partial(&s, 1_000_000, true) - partial(&s, 1_000, true) < 1000f64.powf(1.0 - 2.0 * beta) / (2.0 * beta - 1.0));
    }
    let half = StepSchedule::default();
    assert!(!half.square_summable());
    assert!(partial(&half, 1_000_000, true) > partial(&half, 1_000, true) + 6.0);
    for bad in [StepSchedule { alpha0: 1.0, beta: 1.5 }, StepSchedule { alpha0: 1.0, beta: 0.0 }, StepSchedule { alpha0: 0.0, beta: 0.5 }] {
        assert!(bad.validate().is_err());
    }
}

#[test]
fn stationarity_trace_is_a_running_minimum() {
    let game = Newsvendor::new(Default::default()).unwrap();
    let out = train(&game, &short(400)).unwrap();
    let trace = stationarity_trace(&out.log, 25).unwrap();
    assert_eq!(trace.len(), 400 - 25 + 1);
    assert!(trace.windows(2).all(|w| w[1] <= w[0]));
    assert!(stationarity_trace(&out.log, 0).is_err());
    assert!(stationarity_trace(&out.log, 401).is_err());

    let mut constant = out.log.clone();
    for r in &mut constant.rows {
        r.grad_sq = 0.75;
    }
    assert_eq!(stationarity_diagnostic(&constant, 10).unwrap(), 0.75);
}

#[test]
fn identical_replications_have_zero_width() {
    let game = Newsvendor::new(Default::default()).unwrap();
    let log = train(&game, &short(50)).unwrap().log;
    let agg = aggregate(&[log.clone(), log]);
    assert!(agg.rows.iter().all(|r| r.metrics.iter().all(|m| m.half_width == 0.0)));
}

#[test]
fn half_width_shrinks_like_one_over_root_n() {
    let mut rng = RngStream::new(8, StreamId::Custom(1));
    let sample = |n: usize, rng: &mut RngStream| -> Vec<f64> { (0..n).map(|_| 2.0 + 0.5 * rng.normal()).collect() };
    let small = mean_ci(&sample(2_500, &mut rng));
    let large = mean_ci(&sample(250_000, &mut rng));
    let ratio = small.half_width / large.half_width;
    assert!((ratio - 10.0).abs() < 0.5, "{ratio}");
    assert!((large.half_width - 1.96 * 0.5 / 500.0).abs() < 1e-4);
}

proptest! {
    #[test]
    fn aggregation_ignores_replication_order(values in prop::collection::vec(-1e3..1e3f64, 2..40), seed in any::<u64>()) {
        let mut shuffled = values.clone();
        let mut rng = RngStream::new(seed, StreamId::Custom(2));
        for i in (1..shuffled.len()).rev() {
            let j = (rng.next_u64() % (i as u64 + 1)) as usize;
            shuffled.swap(i, j);
        }
        prop_assert_eq!(mean_ci(&values), mean_ci(&shuffled));
    }
}

#[test]
fn aggregate_of_permuted_logs_is_identical() {
    let game = Newsvendor::new(Default::default()).unwrap();
    let cfg = short(60);
    let logs: Vec<_> = (0..4)
        .map(|r| train_with_seed(&game, &cfg, cfg.replication_seed(r)).unwrap().log)
        .collect();
    let reversed: Vec<_> = logs.iter().rev().cloned().collect();
    assert_eq!(aggregate(&logs), aggregate(&reversed));
}
