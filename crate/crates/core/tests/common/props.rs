//! Randomised property checks shared by the property suite and the
//! acceptance report. Each check runs `cases` generated inputs through a
//! proptest runner and returns the first counterexample as text.

use ds_consensus::analysis::{classify_odc, max_step_delta, row_deviation, LeftProduct};
use ds_consensus::dst::{jousselme_distance, masses_from_beliefs, validate, Proposition};
use ds_consensus::dynamics::{
    cue_step_general, cue_weights, step, theta_contraction, Engine, Strategy as Updating,
};
use nalgebra::DMatrix;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRng, TestRunner};

use super::*;

pub type Check = fn(&mut TestRunner) -> Result<(), String>;

/// Every property with its label.
pub const SUITE: [(&str, Check); 9] = [
    ("(a) CUE output validity", cue_validity),
    ("(b) cautious p.m.f. invariance", cautious_invariance),
    ("(c) general vs matrix engines", engine_equivalence),
    ("(d) Dirichlet class preservation", dirichlet_preservation),
    ("(e) ignorance decay", theta_decay),
    ("(f) Jousselme metric axioms", metric_axioms),
    ("(g) Möbius round trip", mobius_round_trip),
    ("(h) left-product block recursion", block_recursion),
    ("(i) rank-one limit", rank_one_limit),
];

pub fn runner(cases: u32, deterministic: bool) -> TestRunner {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    if deterministic {
        let rng = TestRng::deterministic_rng(config.rng_algorithm);
        TestRunner::new_with_rng(config, rng)
    } else {
        TestRunner::new(config)
    }
}

fn report<T: std::fmt::Debug>(
    r: Result<(), proptest::test_runner::TestError<T>>,
) -> Result<(), String> {
    r.map_err(|e| e.to_string())
}

/// A random network: `n` agents over a frame of size `m`, with a pair list
/// that always contains a spanning path so every agent has a neighbor.
#[derive(Clone, Debug)]
pub struct Net {
    pub m: usize,
    pub masses: Vec<Vec<f64>>,
    pub pairs: Vec<(usize, usize)>,
    pub strategies: Vec<Updating>,
    pub alpha: f64,
    pub epsilon: f64,
}

impl Net {
    pub fn n(&self) -> usize {
        self.masses.len()
    }

    pub fn state(&self) -> NetworkState {
        let opinions = self.masses.iter().map(|m| boe(self.m, m.clone())).collect();
        network(
            self.n(),
            &self.pairs,
            opinions,
            &self.strategies,
            self.alpha,
            self.epsilon,
        )
    }
}

#[derive(Clone, Copy, Debug)]
pub enum Class {
    General,
    Bayesian,
    Dirichlet,
}

pub fn arb_net(
    class: Class,
    ms: std::ops::RangeInclusive<usize>,
    connected: bool,
) -> impl Strategy<Value = Net> {
    (ms, 2usize..=8).prop_flat_map(move |(m, n)| {
        let masses = match class {
            Class::General => proptest::collection::vec(arb_masses(m).boxed(), n).boxed(),
            Class::Bayesian => proptest::collection::vec(arb_bayesian(m).boxed(), n).boxed(),
            Class::Dirichlet => proptest::collection::vec(arb_dirichlet(m).boxed(), n).boxed(),
        };
        (
            Just(m),
            masses,
            arb_pairs(n),
            arb_strategies(n),
            0.05f64..0.95,
            if connected {
                (1.0f64..=1.0).boxed()
            } else {
                (0.0f64..=1.0).boxed()
            },
        )
            .prop_map(move |(m, masses, mut pairs, strategies, alpha, epsilon)| {
                if connected {
                    for i in 1..masses.len() {
                        if !pairs.contains(&(i - 1, i)) {
                            pairs.push((i - 1, i));
                        }
                    }
                }
                Net {
                    m,
                    masses,
                    pairs,
                    strategies,
                    alpha,
                    epsilon,
                }
            })
    })
}

fn masses_of(state: &NetworkState) -> Vec<Vec<f64>> {
    state
        .opinions()
        .iter()
        .map(|o| o.masses().to_vec())
        .collect()
}

pub fn cue_validity(runner: &mut TestRunner) -> Result<(), String> {
    report(runner.run(&arb_net(Class::General, 2..=4, false), |net| {
        let s = net.state();
        let pruned = s.prune();
        for i in 0..net.n() {
            let w = cue_weights(i, &s, &pruned);
            prop_assert!(
                (w.total() - 1.0).abs() < 1e-12,
                "weights of agent {} sum to {}",
                i,
                w.total()
            );
        }
        // The unclamped update from the reference implementation.
        let neighbors = pruned_lists(&net.masses, &net.pairs, net.epsilon);
        let alphas = vec![net.alpha; net.n()];
        let raw = cue_step(&net.masses, &neighbors, &net.strategies, &alphas);
        let next = cue_step_general(&s).map_err(|e| TestCaseError::fail(e.to_string()))?;
        for (i, o) in next.opinions().iter().enumerate() {
            prop_assert!(
                raw[i].iter().all(|&x| x >= -1e-9),
                "raw masses {:?}",
                raw[i]
            );
            prop_assert!(o.masses().iter().all(|&x| x >= -1e-9));
            prop_assert!((o.total_mass() - 1.0).abs() < 1e-10);
            prop_assert_eq!(o.masses()[0], 0.0);
            prop_assert!(
                max_abs_diff(o.masses(), &raw[i]) < 1e-9,
                "agent {}: {:?} vs {:?}",
                i,
                o.masses(),
                raw[i]
            );
        }
        Ok(())
    }))
}

pub fn cautious_invariance(runner: &mut TestRunner) -> Result<(), String> {
    let nets = arb_net(Class::Bayesian, 2..=4, false).prop_filter("needs a cautious agent", |n| {
        n.strategies.contains(&Updating::Cautious)
    });
    report(runner.run(&nets, |net| {
        for engine in [Engine::Pmf, Engine::General] {
            let start = net.state();
            let mut s = start.clone();
            for _ in 0..100 {
                s = step(engine, &s)
                    .map_err(|e| TestCaseError::fail(e.to_string()))?
                    .state;
            }
            for i in 0..net.n() {
                if net.strategies[i] == Updating::Cautious {
                    let drift = max_abs_diff(s.opinion(i).masses(), start.opinion(i).masses());
                    prop_assert!(
                        drift <= 1e-12,
                        "{:?} engine: cautious agent {} drifted by {:e}",
                        engine,
                        i,
                        drift
                    );
                }
            }
        }
        Ok(())
    }))
}

pub fn engine_equivalence(runner: &mut TestRunner) -> Result<(), String> {
    let nets = prop_oneof![
        arb_net(Class::Bayesian, 2..=4, false).prop_map(|n| (n, Engine::Pmf)),
        arb_net(Class::Dirichlet, 2..=4, false).prop_map(|n| (n, Engine::Dirichlet)),
    ];
    report(runner.run(&nets, |(net, engine)| {
        let mut general = net.state();
        let mut matrix = net.state();
        for k in 0..5 {
            general = step(Engine::General, &general)
                .map_err(|e| TestCaseError::fail(e.to_string()))?
                .state;
            matrix = step(engine, &matrix)
                .map_err(|e| TestCaseError::fail(e.to_string()))?
                .state;
            let diff = max_step_delta(general.opinions(), matrix.opinions());
            prop_assert!(
                diff < 1e-10,
                "{:?} step {}: difference {:e}",
                engine,
                k,
                diff
            );
        }
        Ok(())
    }))
}

pub fn dirichlet_preservation(runner: &mut TestRunner) -> Result<(), String> {
    report(runner.run(&arb_net(Class::Dirichlet, 2..=4, false), |net| {
        let mut s = net.state();
        let full = s.frame().full();
        for _ in 0..10 {
            s = cue_step_general(&s).map_err(|e| TestCaseError::fail(e.to_string()))?;
            for o in s.opinions() {
                for a in o.frame().propositions() {
                    if !a.is_singleton() && a != full {
                        prop_assert!(o.mass(a).abs() <= 1e-12, "mass {:e} on {:?}", o.mass(a), a);
                    }
                }
                prop_assert!(validate(o).valid);
            }
        }
        Ok(())
    }))
}

pub fn theta_decay(runner: &mut TestRunner) -> Result<(), String> {
    report(runner.run(&arb_net(Class::Dirichlet, 2..=4, true), |net| {
        let mut s = net.state();
        let full = s.frame().full();
        let theta_max = |s: &NetworkState| {
            s.opinions()
                .iter()
                .map(|o| o.mass(full))
                .fold(0.0, f64::max)
        };
        let start = theta_max(&s);
        let mut rho: f64 = 0.0;
        let mut history = vec![start];
        for _ in 0..30 {
            rho = rho.max(theta_contraction(&s, &s.prune()));
            s = cue_step_general(&s).map_err(|e| TestCaseError::fail(e.to_string()))?;
            history.push(theta_max(&s));
        }
        // Every agent has a neighbor here, so the bound is strict.
        prop_assert!(rho < 1.0, "contraction factor {}", rho);
        for (k, &h) in history.iter().enumerate() {
            prop_assert!(
                h <= rho.powi(k as i32) * start + 1e-12,
                "step {}: {} > {}^{} · {}",
                k,
                h,
                rho,
                k,
                start
            );
        }
        Ok(())
    }))
}

pub fn metric_axioms(runner: &mut TestRunner) -> Result<(), String> {
    let triples = (1usize..=4).prop_flat_map(|m| (arb_masses(m), arb_masses(m), arb_masses(m)));
    report(runner.run(&triples, |(a, b, c)| {
        let m = a.len().trailing_zeros() as usize;
        let (ea, eb, ec) = (boe(m, a.clone()), boe(m, b.clone()), boe(m, c.clone()));
        let d = |x, y| jousselme_distance(x, y).unwrap();
        prop_assert_eq!(d(&ea, &ea), 0.0);
        prop_assert!((d(&ea, &eb) - d(&eb, &ea)).abs() < 1e-15);
        for v in [d(&ea, &eb), d(&eb, &ec), d(&ea, &ec)] {
            prop_assert!((0.0..=1.0 + 1e-12).contains(&v));
        }
        prop_assert!(d(&ea, &ec) <= d(&ea, &eb) + d(&eb, &ec) + 1e-9);
        if max_abs_diff(&a, &b) > 1e-6 {
            prop_assert!(d(&ea, &eb) > 0.0);
        }
        prop_assert!((d(&ea, &eb) - jousselme(&a, &b)).abs() < 1e-12);
        Ok(())
    }))
}

pub fn mobius_round_trip(runner: &mut TestRunner) -> Result<(), String> {
    report(
        runner.run(&(1usize..=4).prop_flat_map(arb_masses), |masses| {
            let m = masses.len().trailing_zeros() as usize;
            let e = boe(m, masses.clone());
            let beliefs: Vec<f64> = (0..masses.len()).map(|a| bel(&masses, a)).collect();
            prop_assert!(max_abs_diff(e.belief_function().values(), &beliefs) < 1e-12);
            let back = masses_from_beliefs(e.frame(), &beliefs)
                .map_err(|e| TestCaseError::fail(e.to_string()))?;
            prop_assert!(max_abs_diff(back.masses(), &masses) < 1e-12);
            Ok(())
        }),
    )
}

/// Random row-stochastic matrices in which the first `c` rows only weigh
/// the first `c` columns.
fn arb_odc_sequence() -> impl Strategy<Value = (usize, Vec<Vec<Vec<f64>>>)> {
    (1usize..=3, 1usize..=5, 2usize..=12).prop_flat_map(|(c, outer, len)| {
        let n = c + outer;
        let row = proptest::collection::vec((0.0f64..1.0, prop::bool::weighted(0.6)), n);
        let mat = proptest::collection::vec(row, n);
        (Just(c), proptest::collection::vec(mat, len)).prop_map(move |(c, raw)| {
            let ws = raw
                .into_iter()
                .map(|m| {
                    m.into_iter()
                        .enumerate()
                        .map(|(i, r)| {
                            let mut row: Vec<f64> = r
                                .into_iter()
                                .enumerate()
                                .map(
                                    |(j, (x, keep))| {
                                        if keep && (i >= c || j < c) {
                                            x
                                        } else {
                                            0.0
                                        }
                                    },
                                )
                                .collect();
                            row[i] += 0.1;
                            let s: f64 = row.iter().sum();
                            row.iter().map(|x| x / s).collect()
                        })
                        .collect()
                })
                .collect();
            (c, ws)
        })
    })
}

fn block_of(
    m: &[Vec<f64>],
    rows: std::ops::Range<usize>,
    cols: std::ops::Range<usize>,
) -> Vec<Vec<f64>> {
    rows.map(|i| m[i][cols.clone()].to_vec()).collect()
}

fn add(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p + q).collect())
        .collect()
}

fn max_abs_mat(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| max_abs_diff(x, y))
        .fold(0.0, f64::max)
}

fn to_dense(m: &[Vec<f64>]) -> DMatrix<f64> {
    DMatrix::from_fn(m.len(), m[0].len(), |i, j| m[i][j])
}

fn from_dense(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

pub fn block_recursion(runner: &mut TestRunner) -> Result<(), String> {
    report(runner.run(&arb_odc_sequence(), |(c, ws)| {
        let n = ws[0].len();
        let central: Vec<usize> = (0..c).collect();
        let mut acc = LeftProduct::identity(n);
        let mut reference = identity(n);
        let mut prev: Option<Vec<Vec<f64>>> = None;
        for w in &ws {
            let dense = to_dense(w);
            let part = classify_odc(&dense, std::slice::from_ref(&central))
                .map_err(|e| TestCaseError::fail(e.to_string()))?;
            prop_assert!(
                max_abs_mat(&from_dense(&part.a_blocks[0]), &block_of(w, 0..c, 0..c)) == 0.0
            );
            prop_assert!(
                max_abs_mat(&from_dense(&part.c_blocks[0]), &block_of(w, c..n, 0..c)) == 0.0
            );
            prop_assert!(max_abs_mat(&from_dense(&part.d), &block_of(w, c..n, c..n)) == 0.0);
            acc.accumulate(&dense)
                .map_err(|e| TestCaseError::fail(e.to_string()))?;
            reference = mat_mul(w, &reference);
            let product = from_dense(acc.matrix());
            prop_assert!(max_abs_mat(&product, &reference) < 1e-12);
            for row in &product {
                prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-10);
            }
            let p_next = block_of(&product, c..n, 0..c);
            match &prev {
                None => prop_assert!(max_abs_mat(&p_next, &block_of(w, c..n, 0..c)) < 1e-12),
                Some(before) => {
                    // P_{n+1} = C_{n+1} A_{n:0} + D_{n+1} P_n
                    let a_prev = block_of(before, 0..c, 0..c);
                    let p_prev = block_of(before, c..n, 0..c);
                    let expect = add(
                        &mat_mul(&from_dense(&part.c_blocks[0]), &a_prev),
                        &mat_mul(&from_dense(&part.d), &p_prev),
                    );
                    prop_assert!(max_abs_mat(&p_next, &expect) < 1e-10);
                }
            }
            prev = Some(product);
        }
        Ok(())
    }))
}

fn identity(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

pub fn rank_one_limit(runner: &mut TestRunner) -> Result<(), String> {
    let nets = arb_net(Class::Bayesian, 2..=4, true).prop_map(|mut n| {
        // At most one leader keeps the limit rank-one.
        let mut seen = false;
        for s in &mut n.strategies {
            if *s == Updating::Cautious {
                if seen {
                    *s = Updating::Receptive;
                }
                seen = true;
            }
        }
        n
    });
    report(runner.run(&nets, |net| {
        let mut s = net.state();
        let mut acc = LeftProduct::identity(net.n());
        let initial = masses_of(&s);
        let mut calm = 0;
        for _ in 0..20_000 {
            let out = step(Engine::Pmf, &s).map_err(|e| TestCaseError::fail(e.to_string()))?;
            acc.accumulate(&out.matrix.expect("matrix engine").matrix)
                .map_err(|e| TestCaseError::fail(e.to_string()))?;
            let delta = max_step_delta(s.opinions(), out.state.opinions());
            s = out.state;
            calm = if delta < 1e-13 { calm + 1 } else { 0 };
            if calm >= 10 {
                break;
            }
        }
        let dev = row_deviation(acc.matrix());
        prop_assert!(dev < 1e-8, "product not rank-one (deviation {:e})", dev);
        let v: Vec<f64> = acc.matrix().row(0).iter().copied().collect();
        for p in 0..net.m {
            let idx = Proposition::singleton(p).index();
            let eta: f64 = v.iter().zip(&initial).map(|(w, m)| w * m[idx]).sum();
            for o in s.opinions() {
                prop_assert!(
                    (o.masses()[idx] - eta).abs() < 1e-6,
                    "θ{}: {} vs vᵀπ₀ = {}",
                    p + 1,
                    o.masses()[idx],
                    eta
                );
            }
        }
        Ok(())
    }))
}
