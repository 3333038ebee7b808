use netpg::consensus::{belief_error, BeliefInit, BeliefTable, CommSchedule, CommSpec, Topology};
use netpg::policy::{AgentParams, ParamSet};
use proptest::prelude::*;

const GRAPHS: [Topology; 5] = [
    Topology::Complete,
    Topology::StaticStar,
    Topology::StaticRing,
    Topology::TimeVaryingStar,
    Topology::TimeVaryingRing,
];

fn schedule(topology: Topology, n: usize, hub: usize) -> CommSchedule {
    CommSchedule::unchecked(CommSpec { topology, period: n, hub }, n).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn weights_are_row_stochastic(topo in 0usize..5, n in 2usize..9, t in 0u64..10_000, j in 0usize..9, hub in 0usize..9) {
        let (j, hub) = (j % n, hub % n);
        let s = schedule(GRAPHS[topo], n, hub);
        let w = s.build_weights(t, j);
        let h = 1.0 / n as f64;
        prop_assert_eq!(s.min_weight(), h);
        for (i, row) in w.iter().enumerate() {
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            prop_assert!(row.iter().all(|&x| x == 0.0 || x >= h - 1e-15));
            prop_assert!(row[i] > 0.0);
        }
        let unit: Vec<f64> = (0..n).map(|l| if l == j { 1.0 } else { 0.0 }).collect();
        prop_assert_eq!(&w[j], &unit);
    }
}

#[test]
fn complete_graph_weights_for_three_agents() {
    let w = schedule(Topology::Complete, 3, 0).build_weights(7, 0);
    let third = 1.0 / 3.0;
    assert_eq!(w[0], vec![1.0, 0.0, 0.0]);
    assert_eq!(w[1], vec![third; 3]);
    assert_eq!(w[2], vec![third; 3]);
}

#[test]
fn isolated_agent_keeps_its_own_copy() {
    let s = schedule(Topology::TimeVaryingStar, 5, 0);
    // at t = 0 only the spoke (0, 1) is active
    assert_eq!(s.edges_at(0), vec![(0, 1)]);
    let w = s.build_weights(0, 0);
    assert_eq!(w[3], vec![0.0, 0.0, 0.0, 1.0, 0.0]);
}

#[test]
fn edge_sets() {
    assert_eq!(schedule(Topology::Complete, 5, 0).edges_at(3).len(), 10);
    let ring = schedule(Topology::StaticRing, 5, 0).neighbors_at(0);
    assert!(ring.iter().all(|nb| nb.len() == 2));
    let star = schedule(Topology::TimeVaryingStar, 5, 2);
    let mut union: Vec<(usize, usize)> = (0..4).flat_map(|t| star.edges_at(t)).collect();
    union.sort();
    assert_eq!(union, vec![(0, 2), (1, 2), (2, 3), (2, 4)]);
}

#[test]
fn short_star_window_is_disconnected() {
    let spec = CommSpec {
        topology: Topology::TimeVaryingStar,
        period: 3,
        hub: 0,
    };
    assert!(!CommSchedule::unchecked(spec, 5).unwrap().window_union_connected());
    assert!(CommSchedule::new(spec, 5).is_err());
    assert!(CommSchedule::new(CommSpec { period: 4, ..spec }, 5).is_ok());
}

#[test]
fn two_agent_errors_halve_each_step() {
    let truth = ParamSet::new(vec![
        AgentParams::from_rows(&[[1.0, -2.0]]),
        AgentParams::from_rows(&[[0.5, 0.25]]),
    ]);
    let s = schedule(Topology::Complete, 2, 0);
    let mut beliefs = BeliefTable::new(&truth, BeliefInit::Zero);
    let mut e = belief_error(&beliefs, &truth);
    for t in 0..30 {
        beliefs.consensus_step(&truth, &s, t);
        let next = belief_error(&beliefs, &truth);
        assert!((next - e / 2.0).abs() <= 1e-15 * e.max(1.0), "{next} vs {e}");
        e = next;
        for i in 0..2 {
            assert_eq!(beliefs.view(i).agent(i), truth.agent(i));
        }
    }
}

#[test]
fn belief_error_of_one_wrong_entry() {
    let truth = ParamSet::new(vec![
        AgentParams::from_rows(&[[1.0, 0.0]]),
        AgentParams::from_rows(&[[0.0, 0.0]]),
    ]);
    let mut beliefs = BeliefTable::new(&truth, BeliefInit::Exact);
    assert_eq!(belief_error(&beliefs, &truth), 0.0);
    beliefs.view_mut(1).agent_mut(0).as_mut_slice()[1] = 0.3;
    assert!((belief_error(&beliefs, &truth) - 0.15).abs() < 1e-15);
}

#[test]
fn fixed_point_and_perfect_overwrite() {
    let truth = ParamSet::new(
        (0..4)
            .map(|i| AgentParams::from_rows(&[[i as f64, 1.0], [-1.0, 0.5 * i as f64]]))
            .collect(),
    );
    let mut exact = BeliefTable::new(&truth, BeliefInit::Exact);
    let before = exact.clone();
    exact.consensus_step(&truth, &schedule(Topology::StaticRing, 4, 0), 0);
    assert_eq!(exact, before);

    let mut zero = BeliefTable::new(&truth, BeliefInit::Zero);
    assert!(belief_error(&zero, &truth) > 0.0);
    zero.consensus_step(&truth, &schedule(Topology::Perfect, 4, 0), 0);
    assert_eq!(belief_error(&zero, &truth), 0.0);
}

#[test]
fn error_is_invariant_under_relabeling() {
    let rows = |a: f64| AgentParams::from_rows(&[[a, -a], [2.0 * a, 1.0]]);
    let truth = ParamSet::new(vec![rows(1.0), rows(-0.5), rows(0.3)]);
    let s = schedule(Topology::StaticStar, 3, 0);
    let mut b = BeliefTable::new(&truth, BeliefInit::Zero);
    b.consensus_step(&truth, &s, 0);

    let perm = [2, 0, 1];
    let truth_p = ParamSet::new(perm.iter().map(|&i| truth.agent(i).clone()).collect());
    let s_p = schedule(Topology::StaticStar, 3, 1);
    let mut b_p = BeliefTable::new(&truth_p, BeliefInit::Zero);
    b_p.consensus_step(&truth_p, &s_p, 0);
    let (e, e_p) = (belief_error(&b, &truth), belief_error(&b_p, &truth_p));
    assert!((e - e_p).abs() < 1e-15, "{e} vs {e_p}");
}
