//! Independent reference implementations used as test oracles. They work on
//! plain mass vectors indexed by subset bitmask and share no code with the
//! library.
#![allow(dead_code)]

use ds_consensus::dst::{BodyOfEvidence, FrameOfDiscernment};
use ds_consensus::dynamics::{AgentSpec, NetworkState, Strategy as Updating};
use ds_consensus::graph::DirectedGraph;
use proptest::prelude::*;

pub mod props;

pub fn subset(b: usize, a: usize) -> bool {
    b & !a == 0
}

pub fn bel(m: &[f64], a: usize) -> f64 {
    (1..m.len()).filter(|&b| subset(b, a)).map(|b| m[b]).sum()
}

pub fn pl(m: &[f64], a: usize) -> f64 {
    (1..m.len()).filter(|&b| b & a != 0).map(|b| m[b]).sum()
}

/// Fagin–Halpern conditional belief straight from its definition.
pub fn fh_bel(m: &[f64], b: usize, a: usize) -> f64 {
    let full = m.len() - 1;
    let num = bel(m, a & b);
    let den = num + pl(m, a & (full & !b));
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

pub fn mobius(beliefs: &[f64]) -> Vec<f64> {
    (0..beliefs.len())
        .map(|a| {
            (0..beliefs.len())
                .filter(|&b| subset(b, a))
                .map(|b| {
                    let sign = if (a & !b).count_ones() % 2 == 0 {
                        1.0
                    } else {
                        -1.0
                    };
                    sign * beliefs[b]
                })
                .sum()
        })
        .collect()
}

pub fn jaccard(a: usize, b: usize) -> f64 {
    let union = (a | b).count_ones();
    if union == 0 {
        0.0
    } else {
        (a & b).count_ones() as f64 / union as f64
    }
}

pub fn jousselme(m1: &[f64], m2: &[f64]) -> f64 {
    let d: Vec<f64> = m1.iter().zip(m2).map(|(a, b)| a - b).collect();
    let mut q = 0.0;
    for a in 0..d.len() {
        for b in 0..d.len() {
            q += d[a] * jaccard(a, b) * d[b];
        }
    }
    (0.5 * q).max(0.0).sqrt()
}

/// One synchronous CUE step written directly from the update rule: the
/// agent's new belief in `B` is `α Bl_i(B) + Σ_j Σ_A β_ij(A) Bl_j(B|A)`.
pub fn cue_step(
    masses: &[Vec<f64>],
    neighbors: &[Vec<usize>],
    strategies: &[Updating],
    alpha: &[f64],
) -> Vec<Vec<f64>> {
    let size = masses[0].len();
    let beliefs: Vec<Vec<f64>> = masses
        .iter()
        .map(|m| (0..size).map(|a| bel(m, a)).collect())
        .collect();
    (0..masses.len())
        .map(|i| {
            let ns = &neighbors[i];
            if ns.is_empty() {
                return masses[i].clone();
            }
            let mut weights: Vec<(usize, usize, f64)> = Vec::new();
            match strategies[i] {
                Updating::Receptive => {
                    for &j in ns {
                        for a in 1..size {
                            if beliefs[j][a] > 0.0 && masses[j][a] > 0.0 {
                                weights.push((
                                    j,
                                    a,
                                    (1.0 - alpha[i]) / ns.len() as f64 * masses[j][a],
                                ));
                            }
                        }
                    }
                }
                Updating::Cautious => {
                    let mut coverage = 0.0;
                    for &j in ns {
                        for a in 1..size {
                            if beliefs[j][a] > 0.0 {
                                coverage += masses[i][a];
                            }
                        }
                    }
                    if coverage <= 0.0 {
                        return masses[i].clone();
                    }
                    for &j in ns {
                        for a in 1..size {
                            if beliefs[j][a] > 0.0 && masses[i][a] > 0.0 {
                                weights.push((j, a, (1.0 - alpha[i]) / coverage * masses[i][a]));
                            }
                        }
                    }
                }
            }
            let updated: Vec<f64> = (0..size)
                .map(|b| {
                    alpha[i] * beliefs[i][b]
                        + weights
                            .iter()
                            .map(|&(j, a, w)| w * fh_bel(&masses[j], b, a))
                            .sum::<f64>()
                })
                .collect();
            mobius(&updated)
        })
        .collect()
}

/// The p.m.f. confidence matrix as nested vectors.
pub fn pmf_w(
    masses: &[Vec<f64>],
    neighbors: &[Vec<usize>],
    strategies: &[Updating],
    alpha: &[f64],
) -> Vec<Vec<f64>> {
    let n = masses.len();
    let mut w = vec![vec![0.0; n]; n];
    for i in 0..n {
        if neighbors[i].is_empty() || strategies[i] == Updating::Cautious {
            w[i][i] = 1.0;
        } else {
            w[i][i] = alpha[i];
            for &j in &neighbors[i] {
                w[i][j] += (1.0 - alpha[i]) / neighbors[i].len() as f64;
            }
        }
    }
    w
}

pub fn mat_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let m = b[0].len();
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| (0..b.len()).map(|k| a[i][k] * b[k][j]).sum())
                .collect()
        })
        .collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn boe(frame_size: usize, masses: Vec<f64>) -> BodyOfEvidence {
    BodyOfEvidence::from_masses(FrameOfDiscernment::new(frame_size).unwrap(), masses).unwrap()
}

pub fn network(
    n: usize,
    pairs: &[(usize, usize)],
    opinions: Vec<BodyOfEvidence>,
    strategies: &[Updating],
    alpha: f64,
    epsilon: f64,
) -> NetworkState {
    let graph = DirectedGraph::from_mutual_pairs(n, pairs).unwrap();
    let agents = opinions
        .into_iter()
        .zip(strategies)
        .map(|(o, &s)| AgentSpec::new(s, alpha, epsilon, o))
        .collect();
    NetworkState::new(graph, agents).unwrap()
}

// ---- proptest strategies ----

fn normalise(mut v: Vec<f64>) -> Vec<f64> {
    let total: f64 = v.iter().sum();
    for x in &mut v {
        *x /= total;
    }
    v
}

/// A mass vector over `2^m` subsets with a random focal set.
pub fn arb_masses(m: usize) -> impl Strategy<Value = Vec<f64>> {
    let size = 1usize << m;
    proptest::collection::vec((0.01f64..1.0, prop::bool::weighted(0.5)), size - 1).prop_map(
        move |raw| {
            let mut masses = vec![0.0];
            masses.extend(raw.iter().map(|&(x, keep)| if keep { x } else { 0.0 }));
            if masses.iter().all(|&x| x == 0.0) {
                masses[size - 1] = 1.0;
            }
            normalise(masses)
        },
    )
}

pub fn arb_bayesian(m: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(0.01f64..1.0, m).prop_map(move |p| {
        let p = normalise(p);
        let mut masses = vec![0.0; 1 << m];
        for (k, x) in p.into_iter().enumerate() {
            masses[1 << k] = x;
        }
        masses
    })
}

pub fn arb_dirichlet(m: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(0.01f64..1.0, m + 1).prop_map(move |p| {
        let p = normalise(p);
        let mut masses = vec![0.0; 1 << m];
        for k in 0..m {
            masses[1 << k] = p[k];
        }
        masses[(1 << m) - 1] = p[m];
        masses
    })
}

/// Undirected pair list over `n` nodes.
pub fn arb_pairs(n: usize) -> impl Strategy<Value = Vec<(usize, usize)>> {
    let all: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    proptest::collection::vec(prop::bool::weighted(0.5), all.len()).prop_map(move |keep| {
        all.iter()
            .zip(keep)
            .filter(|(_, k)| *k)
            .map(|(p, _)| *p)
            .collect()
    })
}

pub fn arb_strategies(n: usize) -> impl Strategy<Value = Vec<Updating>> {
    proptest::collection::vec(
        prop_oneof![3 => Just(Updating::Receptive), 1 => Just(Updating::Cautious)],
        n,
    )
}

pub fn neighbor_lists(n: usize, pairs: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut ns = vec![Vec::new(); n];
    for &(i, j) in pairs {
        ns[i].push(j);
        ns[j].push(i);
    }
    for l in &mut ns {
        l.sort_unstable();
    }
    ns
}

/// Neighbor lists after bounded-confidence pruning, computed with the oracle
/// distance.
pub fn pruned_lists(masses: &[Vec<f64>], pairs: &[(usize, usize)], eps: f64) -> Vec<Vec<usize>> {
    let n = masses.len();
    let kept: Vec<(usize, usize)> = pairs
        .iter()
        .copied()
        .filter(|&(i, j)| jousselme(&masses[i], &masses[j]) <= eps)
        .collect();
    neighbor_lists(n, &kept)
}
