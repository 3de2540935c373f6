mod common;

use std::sync::Arc;

use common::*;
use ds_consensus::dst::{validate, BodyOfEvidence, FrameOfDiscernment, Proposition};
use ds_consensus::dynamics::*;
use ds_consensus::graph::DirectedGraph;
use ds_consensus::harness::{load_scenario, run_simulation, RunOptions};

fn pmf(p: &[f64]) -> BodyOfEvidence {
    BodyOfEvidence::bayesian(FrameOfDiscernment::new(p.len()).unwrap(), p).unwrap()
}

fn dirichlet(p: &[f64], theta: f64) -> BodyOfEvidence {
    BodyOfEvidence::dirichlet(FrameOfDiscernment::new(p.len()).unwrap(), p, theta).unwrap()
}

#[test]
fn isolated_agent_keeps_full_self_weight() {
    let s = network(
        2,
        &[],
        vec![pmf(&[1.0, 0.0]), pmf(&[0.0, 1.0])],
        &[Strategy::Receptive; 2],
        0.5,
        1.0,
    );
    let w = cue_weights(0, &s, &s.prune());
    assert_eq!(w.alpha, 1.0);
    assert!(w.beta.is_empty());
}

#[test]
fn receptive_weights_follow_neighbor_masses() {
    let s = network(
        2,
        &[(0, 1)],
        vec![pmf(&[0.0, 1.0]), pmf(&[1.0, 0.0])],
        &[Strategy::Receptive; 2],
        0.5,
        1.0,
    );
    let w = cue_weights(0, &s, &s.prune());
    assert_eq!(w.alpha, 0.5);
    assert_eq!(w.beta, vec![(1, Proposition::singleton(0), 0.5)]);
    assert!((w.total() - 1.0).abs() < 1e-12);
}

#[test]
fn cautious_weights_follow_own_masses() {
    let own = dirichlet(&[0.5, 0.3, 0.1], 0.1);
    let other = dirichlet(&[0.2, 0.2, 0.2], 0.4);
    let s = network(
        2,
        &[(0, 1)],
        vec![own, other],
        &[Strategy::Cautious, Strategy::Receptive],
        0.5,
        1.0,
    );
    let w = cue_weights(0, &s, &s.prune());
    // Neighbor supports every singleton and Θ, so coverage is 1 and β = 0.5·m_i.
    let mut beta: Vec<(usize, u32, f64)> =
        w.beta.iter().map(|&(j, a, x)| (j, a.bits(), x)).collect();
    beta.sort_by_key(|b| b.1);
    let expect = [
        (1, 0b001, 0.25),
        (1, 0b010, 0.15),
        (1, 0b100, 0.05),
        (1, 0b111, 0.05),
    ];
    assert_eq!(beta.len(), expect.len());
    for (got, want) in beta.iter().zip(expect) {
        assert_eq!((got.0, got.1), (want.0, want.1));
        assert!((got.2 - want.2).abs() < 1e-12);
    }
}

#[test]
fn isolated_network_is_unchanged() {
    let opinions = vec![
        pmf(&[0.7, 0.2, 0.1]),
        pmf(&[0.1, 0.8, 0.1]),
        pmf(&[0.2, 0.2, 0.6]),
    ];
    let s = network(
        3,
        &[(0, 1), (1, 2)],
        opinions.clone(),
        &[Strategy::Receptive; 3],
        0.5,
        0.0,
    );
    let next = cue_step_general(&s).unwrap();
    for (a, b) in next.opinions().iter().zip(&opinions) {
        assert_eq!(a.masses(), b.masses());
    }
}

#[test]
fn two_receptive_agents_build_half_matrix() {
    let s = network(
        2,
        &[(0, 1)],
        vec![pmf(&[0.6, 0.4]), pmf(&[0.5, 0.5])],
        &[Strategy::Receptive; 2],
        0.5,
        1.0,
    );
    let w = build_w_pmf(&s, &s.prune()).unwrap();
    assert!(w.stochastic);
    for v in w.matrix.iter() {
        assert_eq!(*v, 0.5);
    }
}

#[test]
fn cautious_pmf_row_is_identity() {
    let s = network(
        3,
        &[(0, 1), (1, 2), (0, 2)],
        vec![pmf(&[0.6, 0.4]), pmf(&[0.5, 0.5]), pmf(&[0.1, 0.9])],
        &[Strategy::Cautious, Strategy::Receptive, Strategy::Receptive],
        0.5,
        1.0,
    );
    let w = build_w_pmf(&s, &s.prune()).unwrap();
    assert_eq!(
        w.matrix.row(0).iter().copied().collect::<Vec<_>>(),
        vec![1.0, 0.0, 0.0]
    );
    for r in w.row_sums() {
        assert!((r - 1.0).abs() < 1e-12);
    }
}

#[test]
fn dirichlet_matrix_examples() {
    let s = network(
        2,
        &[(0, 1)],
        vec![
            dirichlet(&[0.5, 0.3, 0.1], 0.1),
            dirichlet(&[0.3, 0.3, 0.2], 0.2),
        ],
        &[Strategy::Receptive, Strategy::Receptive],
        0.5,
        1.0,
    );
    let w = build_w_dirichlet(&s, &s.prune()).unwrap();
    assert_eq!(w.matrix[(0, 0)], 0.5);
    assert!((w.matrix[(0, 1)] - 0.6).abs() < 1e-12);
    assert!(!w.stochastic);

    let s = network(
        2,
        &[(0, 1)],
        vec![
            dirichlet(&[0.5, 0.3, 0.1], 0.1),
            dirichlet(&[0.3, 0.3, 0.2], 0.2),
        ],
        &[Strategy::Cautious, Strategy::Receptive],
        0.5,
        1.0,
    );
    let w = build_w_dirichlet(&s, &s.prune()).unwrap();
    assert_eq!(w.matrix[(0, 0)], 1.0);
    assert!((w.matrix[(0, 1)] - 0.05).abs() < 1e-12);
}

#[test]
fn dirichlet_without_ignorance_matches_pmf_matrix() {
    let opinions = vec![
        dirichlet(&[0.5, 0.5, 0.0], 0.0),
        dirichlet(&[0.2, 0.3, 0.5], 0.0),
        dirichlet(&[0.1, 0.1, 0.8], 0.0),
    ];
    let s = network(
        3,
        &[(0, 1), (1, 2)],
        opinions,
        &[Strategy::Receptive; 3],
        0.4,
        1.0,
    );
    let wd = build_w_dirichlet(&s, &s.prune()).unwrap();
    let wp = build_w_pmf(&s, &s.prune()).unwrap();
    assert_eq!(wd.matrix, wp.matrix);
}

#[test]
fn hand_computed_pmf_step() {
    let s = network(
        2,
        &[(0, 1)],
        vec![pmf(&[1.0, 0.0]), pmf(&[0.0, 1.0])],
        &[Strategy::Receptive; 2],
        0.5,
        1.0,
    );
    let next = step_pmf(&s).unwrap();
    for o in next.opinions() {
        assert_eq!(o.masses(), &[0.0, 0.5, 0.5, 0.0]);
    }
    let general = cue_step_general(&s).unwrap();
    for o in general.opinions() {
        assert!(max_abs_diff(o.masses(), &[0.0, 0.5, 0.5, 0.0]) < 1e-12);
    }
}

#[test]
fn cautious_pmf_agent_never_moves() {
    let opinions = vec![
        pmf(&[0.8, 0.1, 0.1]),
        pmf(&[0.3, 0.3, 0.4]),
        pmf(&[0.1, 0.6, 0.3]),
    ];
    let mut s = network(
        3,
        &[(0, 1), (1, 2), (0, 2)],
        opinions.clone(),
        &[Strategy::Cautious, Strategy::Receptive, Strategy::Receptive],
        0.5,
        1.0,
    );
    for _ in 0..200 {
        s = step(Engine::Pmf, &s).unwrap().state;
        assert_eq!(s.opinion(0).masses(), opinions[0].masses());
    }
}

#[test]
fn dirichlet_step_conserves_mass() {
    let opinions = vec![
        dirichlet(&[0.5, 0.2, 0.1], 0.2),
        dirichlet(&[0.1, 0.3, 0.2], 0.4),
        dirichlet(&[0.3, 0.3, 0.3], 0.1),
    ];
    let mut s = network(
        3,
        &[(0, 1), (1, 2)],
        opinions,
        &[Strategy::Receptive, Strategy::Cautious, Strategy::Receptive],
        0.5,
        1.0,
    );
    for _ in 0..50 {
        s = step_dirichlet(&s).unwrap();
        for o in s.opinions() {
            assert!((o.total_mass() - 1.0).abs() < 1e-10);
            assert!(validate(o).dirichlet);
        }
    }
}

#[test]
fn engine_class_checks() {
    let s = network(
        2,
        &[(0, 1)],
        vec![dirichlet(&[0.5, 0.3], 0.2), pmf(&[0.5, 0.5])],
        &[Strategy::Receptive; 2],
        0.5,
        1.0,
    );
    assert!(matches!(step_pmf(&s), Err(DynamicsError::NotBayesian(0))));
    let f = FrameOfDiscernment::new(3).unwrap();
    let general =
        BodyOfEvidence::from_pairs(f.clone(), &[(f.parse_proposition("1,2").unwrap(), 1.0)])
            .unwrap();
    let s = network(
        2,
        &[(0, 1)],
        vec![general, pmf(&[0.2, 0.3, 0.5])],
        &[Strategy::Receptive; 2],
        0.5,
        1.0,
    );
    assert!(matches!(
        step_dirichlet(&s),
        Err(DynamicsError::NotDirichlet(0))
    ));
}

#[test]
fn network_rejects_bad_input() {
    let g = DirectedGraph::complete(2);
    let one = vec![AgentSpec::new(
        Strategy::Receptive,
        0.5,
        0.5,
        pmf(&[0.5, 0.5]),
    )];
    assert!(matches!(
        NetworkState::new(g.clone(), one),
        Err(DynamicsError::AgentCountMismatch { .. })
    ));
    let bad_alpha = vec![
        AgentSpec::new(Strategy::Receptive, 1.5, 0.5, pmf(&[0.5, 0.5])),
        AgentSpec::new(Strategy::Receptive, 0.5, 0.5, pmf(&[0.5, 0.5])),
    ];
    assert!(matches!(
        NetworkState::new(g.clone(), bad_alpha),
        Err(DynamicsError::InvalidAgent { agent: 0, .. })
    ));
    let mixed = vec![
        AgentSpec::new(Strategy::Receptive, 0.5, 0.5, pmf(&[0.5, 0.5])),
        AgentSpec::new(Strategy::Receptive, 0.5, 0.5, pmf(&[0.2, 0.3, 0.5])),
    ];
    assert!(matches!(
        NetworkState::new(g, mixed),
        Err(DynamicsError::FrameMismatch(1))
    ));
}

#[test]
fn alpha_hook_overrides_self_weight() {
    let s = network(
        2,
        &[(0, 1)],
        vec![pmf(&[1.0, 0.0]), pmf(&[0.0, 1.0])],
        &[Strategy::Receptive; 2],
        0.5,
        1.0,
    )
    .with_alpha_hook(Arc::new(|_, _| 0.0));
    let next = step_pmf(&s).unwrap();
    assert_eq!(next.opinion(0).masses(), &[0.0, 0.0, 1.0, 0.0]);
}

#[test]
fn table1_general_run_leaves_two_clusters() {
    // Cluster {R6, R7} lands on m(θ1) = 0.15, m(θ2θ3) = 0.85.
    let sc = load_scenario("table1-dst").unwrap();
    let run = run_simulation(&sc, Some(0.30), &RunOptions::default()).unwrap();
    assert!(run.report.converged);
    assert_eq!(run.report.clusters, vec![vec![0, 1, 2, 3, 4], vec![5, 6]]);
    let f = &sc.frame;
    let r67 = &run.final_opinions[5];
    assert!((r67.mass(f.parse_proposition("1").unwrap()) - 0.15).abs() < 0.01);
    assert!((r67.mass(f.parse_proposition("2,3").unwrap()) - 0.85).abs() < 0.01);
}
