use nalgebra::DMatrix;
use serde::Serialize;

use super::{detect_clusters, infinity_norm, row_deviation, AnalysisError, LeftProduct};
use super::{RANK_ONE_TOL, ZERO_BLOCK_TOL};
use crate::dst::BodyOfEvidence;

/// Rows in which the λ weights must agree.
const LAMBDA_TOL: f64 = 1e-10;
/// A windowed product of outer blocks must be strictly contracting.
const CONTRACTION_MARGIN: f64 = 1e-12;
const THEOREM1_MATCH_TOL: f64 = 1e-6;
const FOLLOWER_MATCH_TOL: f64 = 1e-3;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub enum OdcKind {
    OneODC,
    TwoODC,
}

/// A confidence matrix split into central group(s) and outer agents:
/// `W = [A 0; C D]` (one group) or `[A1 0 0; 0 A2 0; C1 C2 D]` (two).
#[derive(Clone, Debug, PartialEq)]
pub struct OdcPartition {
    pub kind: OdcKind,
    pub central: Vec<Vec<usize>>,
    pub outer: Vec<usize>,
    pub a_blocks: Vec<DMatrix<f64>>,
    pub c_blocks: Vec<DMatrix<f64>>,
    pub d: DMatrix<f64>,
}

fn block(w: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |r, c| w[(rows[r], cols[c])])
}

fn largest(w: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> Option<(usize, usize, f64)> {
    rows.iter()
        .flat_map(|&r| cols.iter().map(move |&c| (r, c, w[(r, c)])))
        .filter(|t| t.2.abs() > ZERO_BLOCK_TOL)
        .max_by(|a, b| a.2.abs().total_cmp(&b.2.abs()))
}

/// Split `w` around the proposed central groups (one or two), checking
/// that no weight flows from the outer agents into a central group or
/// between central groups.
pub fn classify_odc(
    w: &DMatrix<f64>,
    central: &[Vec<usize>],
) -> Result<OdcPartition, AnalysisError> {
    let n = w.nrows();
    if w.ncols() != n {
        return Err(AnalysisError::SizeMismatch {
            expected: (n, n),
            found: w.shape(),
        });
    }
    let kind = match central.len() {
        1 => OdcKind::OneODC,
        2 => OdcKind::TwoODC,
        k => {
            return Err(AnalysisError::NotOdc(format!(
                "{k} central groups; need 1 or 2"
            )))
        }
    };
    let mut seen = vec![false; n];
    for group in central {
        if group.is_empty() {
            return Err(AnalysisError::NotOdc("empty central group".into()));
        }
        for &v in group {
            if v >= n || seen[v] {
                return Err(AnalysisError::NotOdc(format!(
                    "bad or repeated central node {v}"
                )));
            }
            seen[v] = true;
        }
    }
    let outer: Vec<usize> = (0..n).filter(|&v| !seen[v]).collect();
    for (g, group) in central.iter().enumerate() {
        if let Some((r, c, v)) = largest(w, group, &outer) {
            return Err(AnalysisError::NotOdc(format!(
                "central agent {r} weighs outer agent {c} by {v:e}"
            )));
        }
        for other in central.iter().skip(g + 1) {
            for (rows, cols) in [(group, other), (other, group)] {
                if let Some((r, c, v)) = largest(w, rows, cols) {
                    return Err(AnalysisError::NotOdc(format!(
                        "central groups coupled: agent {r} weighs agent {c} by {v:e}"
                    )));
                }
            }
        }
    }
    Ok(OdcPartition {
        kind,
        a_blocks: central.iter().map(|g| block(w, g, g)).collect(),
        c_blocks: central.iter().map(|g| block(w, &outer, g)).collect(),
        d: block(w, &outer, &outer),
        central: central.to_vec(),
        outer,
    })
}

/// Run data the verifiers consume: the recorded confidence matrices and
/// the opinions before the first and after the last step.
#[derive(Clone, Copy, Debug)]
pub struct VerifierInput<'a> {
    pub matrices: &'a [DMatrix<f64>],
    pub initial: &'a [BodyOfEvidence],
    pub observed: &'a [BodyOfEvidence],
    pub cluster_tol: f64,
}

impl VerifierInput<'_> {
    fn singleton_profile(&self, opinions: &[BodyOfEvidence], p: usize) -> Vec<f64> {
        let s = 1usize << p;
        opinions.iter().map(|o| o.masses()[s]).collect()
    }

    fn frame_size(&self) -> usize {
        self.initial.first().map_or(0, |o| o.frame().size())
    }

    fn partitions(&self, central: &[Vec<usize>]) -> Result<Vec<OdcPartition>, String> {
        self.matrices
            .iter()
            .enumerate()
            .map(|(k, w)| classify_odc(w, central).map_err(|e| format!("step {k}: {e}")))
            .collect()
    }
}

/// Left product of one central block over the run and, if rank-one, its row.
fn central_limit(parts: &[OdcPartition], g: usize) -> (bool, Vec<f64>) {
    let size = parts.first().map_or(0, |p| p.a_blocks[g].nrows());
    let mut acc = LeftProduct::identity(size);
    for p in parts {
        acc.accumulate(&p.a_blocks[g]).expect("fixed block size");
    }
    let m = acc.matrix();
    if m.nrows() == 0 {
        return (false, Vec::new());
    }
    let v: Vec<f64> = m.row(0).iter().copied().collect();
    let ok = row_deviation(m) < RANK_ONE_TOL && (v.iter().sum::<f64>() - 1.0).abs() < RANK_ONE_TOL;
    (ok, v)
}

/// `v_gᵀ π_{C_g}(θ_p)₀` for every singleton.
fn central_consensus(input: &VerifierInput, group: &[usize], v: &[f64]) -> Vec<f64> {
    (0..input.frame_size())
        .map(|p| {
            let pi = input.singleton_profile(input.initial, p);
            group.iter().zip(v).map(|(&i, w)| w * pi[i]).sum()
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContractionWitness {
    /// Largest `‖D_k‖∞` over single steps.
    pub per_step_max_norm: f64,
    /// Smallest window length whose block products all contract, if any.
    pub window: Option<usize>,
    /// Largest norm of a windowed product (the `ρ` bound) for that window.
    pub rho: Option<f64>,
    pub holds: bool,
}

/// Find the smallest `T ≤ max(N_out, 1)` such that every complete
/// non-overlapping product `D_{(t+1)T−1} ⋯ D_{tT}` has norm below 1.
fn outer_contraction(parts: &[OdcPartition]) -> ContractionWitness {
    let per_step_max_norm = parts
        .iter()
        .map(|p| infinity_norm(&p.d))
        .fold(0.0, f64::max);
    let n_out = parts.first().map_or(0, |p| p.d.nrows());
    if n_out == 0 {
        return ContractionWitness {
            per_step_max_norm,
            window: Some(1),
            rho: Some(0.0),
            holds: true,
        };
    }
    for t in 1..=n_out {
        let windows = parts.len() / t;
        if windows == 0 {
            break;
        }
        let mut rho: f64 = 0.0;
        for chunk in parts.chunks_exact(t) {
            let mut acc = LeftProduct::identity(n_out);
            for p in chunk {
                acc.accumulate(&p.d).expect("fixed block size");
            }
            rho = rho.max(infinity_norm(acc.matrix()));
        }
        if rho < 1.0 - CONTRACTION_MARGIN {
            return ContractionWitness {
                per_step_max_norm,
                window: Some(t),
                rho: Some(rho),
                holds: true,
            };
        }
    }
    ContractionWitness {
        per_step_max_norm,
        window: None,
        rho: None,
        holds: false,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Theorem1Hypotheses {
    pub odc_every_step: bool,
    pub odc_failure: Option<String>,
    /// (a): the central group's left product reached `1 v_Aᵀ`.
    pub central_rank_one: bool,
    pub central_weights: Vec<f64>,
    /// (b): the outer block contracts.
    pub contraction: ContractionWitness,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Theorem1Prediction {
    /// Consensus mass on each singleton, if the hypotheses hold.
    pub consensus: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ObservedLimit {
    pub consensus: bool,
    pub cluster_count: usize,
    /// Per-singleton mean over the agents the prediction concerns.
    pub mean: Vec<f64>,
    /// Largest gap between a prediction and an agent's final mass.
    pub max_error: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Theorem1Report {
    pub hypotheses: Theorem1Hypotheses,
    pub prediction: Theorem1Prediction,
    pub observed: ObservedLimit,
    #[serde(rename = "match")]
    pub matched: bool,
}

fn observe(input: &VerifierInput, agents: &[usize], prediction: Option<&[f64]>) -> ObservedLimit {
    let clusters = detect_clusters(input.observed, input.cluster_tol);
    let m = input.frame_size();
    let mean = (0..m)
        .map(|p| {
            let pi = input.singleton_profile(input.observed, p);
            agents.iter().map(|&i| pi[i]).sum::<f64>() / agents.len().max(1) as f64
        })
        .collect();
    let max_error = prediction.map(|eta| {
        (0..m)
            .flat_map(|p| {
                let pi = input.singleton_profile(input.observed, p);
                agents
                    .iter()
                    .map(move |&i| (pi[i] - eta[p]).abs())
                    .collect::<Vec<_>>()
            })
            .fold(0.0, f64::max)
    });
    ObservedLimit {
        consensus: clusters.consensus,
        cluster_count: clusters.cluster_count(),
        mean,
        max_error,
    }
}

/// One central group driving everyone else: when the central product
/// becomes rank-one and the outer block contracts, the whole network
/// reaches the central group's consensus.
pub fn verify_theorem1(central: &[usize], input: &VerifierInput) -> Theorem1Report {
    let everyone: Vec<usize> = (0..input.initial.len()).collect();
    let groups = [central.to_vec()];
    let parts = match input.partitions(&groups) {
        Ok(p) => p,
        Err(reason) => {
            return Theorem1Report {
                hypotheses: Theorem1Hypotheses {
                    odc_every_step: false,
                    odc_failure: Some(reason),
                    central_rank_one: false,
                    central_weights: Vec::new(),
                    contraction: ContractionWitness {
                        per_step_max_norm: f64::NAN,
                        window: None,
                        rho: None,
                        holds: false,
                    },
                    holds: false,
                },
                prediction: Theorem1Prediction { consensus: None },
                observed: observe(input, &everyone, None),
                matched: false,
            }
        }
    };
    let (rank_one, v) = central_limit(&parts, 0);
    let contraction = outer_contraction(&parts);
    let holds = rank_one && contraction.holds;
    let consensus = holds.then(|| central_consensus(input, central, &v));
    let observed = observe(input, &everyone, consensus.as_deref());
    let matched = observed.max_error.is_some_and(|e| e <= THEOREM1_MATCH_TOL);
    Theorem1Report {
        hypotheses: Theorem1Hypotheses {
            odc_every_step: true,
            odc_failure: None,
            central_rank_one: rank_one,
            central_weights: v,
            contraction,
            holds,
        },
        prediction: Theorem1Prediction { consensus },
        observed,
        matched,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LambdaWitness {
    /// The condition `λ1 C1 1 = λ2 C2 1` was solvable at every step.
    pub every_step: bool,
    pub failure_step: Option<usize>,
    /// `λ^{(1)}` at the last step that constrained it.
    pub lambda1: Option<f64>,
    /// All constraining steps gave the same `λ^{(1)}`.
    pub constant: bool,
    /// Steps where no outer agent heard from either group.
    pub unconstrained_steps: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Theorem2Hypotheses {
    pub odc_every_step: bool,
    pub odc_failure: Option<String>,
    pub central_rank_one: [bool; 2],
    pub contraction: Option<ContractionWitness>,
    pub lambda: Option<LambdaWitness>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Theorem2Prediction {
    /// Consensus of each central group, per singleton.
    pub leader_consensus: Option<[Vec<f64>; 2]>,
    pub leaders_agree: Option<bool>,
    /// Whole-network consensus happens iff the two groups agree.
    pub full_consensus: Option<bool>,
    /// Limit of the outer agents, when the λ condition holds throughout.
    pub follower_opinion: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Theorem2Report {
    pub hypotheses: Theorem2Hypotheses,
    pub prediction: Theorem2Prediction,
    pub observed: ObservedLimit,
    #[serde(rename = "match")]
    pub matched: bool,
}

/// Per-step `λ^{(1)} = c2 / (c1 + c2)` from the outer rows' aggregate
/// weights on each group; `None` when no row constrains it.
fn step_lambda(p: &OdcPartition) -> Result<Option<f64>, ()> {
    let mut lambda: Option<f64> = None;
    for r in 0..p.d.nrows() {
        let c1: f64 = p.c_blocks[0].row(r).sum();
        let c2: f64 = p.c_blocks[1].row(r).sum();
        let (z1, z2) = (c1.abs() <= ZERO_BLOCK_TOL, c2.abs() <= ZERO_BLOCK_TOL);
        if z1 && z2 {
            continue;
        }
        if z1 || z2 {
            return Err(());
        }
        let l = c2 / (c1 + c2);
        match lambda {
            Some(prev) if (prev - l).abs() > LAMBDA_TOL => return Err(()),
            None => lambda = Some(l),
            _ => {}
        }
    }
    Ok(lambda)
}

fn lambda_witness(parts: &[OdcPartition]) -> LambdaWitness {
    let mut last = None;
    let mut first_seen: Option<f64> = None;
    let mut constant = true;
    let mut unconstrained = 0;
    for (k, p) in parts.iter().enumerate() {
        match step_lambda(p) {
            Err(()) => {
                return LambdaWitness {
                    every_step: false,
                    failure_step: Some(k),
                    lambda1: last,
                    constant: false,
                    unconstrained_steps: unconstrained,
                }
            }
            Ok(None) => unconstrained += 1,
            Ok(Some(l)) => {
                if let Some(f) = first_seen {
                    constant &= (f - l).abs() <= LAMBDA_TOL;
                } else {
                    first_seen = Some(l);
                }
                last = Some(l);
            }
        }
    }
    LambdaWitness {
        every_step: true,
        failure_step: None,
        lambda1: last,
        constant,
        unconstrained_steps: unconstrained,
    }
}

/// Two central groups: the network agrees iff the groups agree, and when
/// the outer agents weigh both groups in a fixed ratio they settle on the
/// λ-weighted blend of the two group opinions.
pub fn verify_theorem2(central: [&[usize]; 2], input: &VerifierInput) -> Theorem2Report {
    let groups = [central[0].to_vec(), central[1].to_vec()];
    let n = input.initial.len();
    let outer: Vec<usize> = (0..n)
        .filter(|v| !central[0].contains(v) && !central[1].contains(v))
        .collect();
    let parts = match input.partitions(&groups) {
        Ok(p) => p,
        Err(reason) => {
            return Theorem2Report {
                hypotheses: Theorem2Hypotheses {
                    odc_every_step: false,
                    odc_failure: Some(reason),
                    central_rank_one: [false, false],
                    contraction: None,
                    lambda: None,
                },
                prediction: Theorem2Prediction {
                    leader_consensus: None,
                    leaders_agree: None,
                    full_consensus: None,
                    follower_opinion: None,
                },
                observed: observe(input, &outer, None),
                matched: false,
            }
        }
    };
    let (ok1, v1) = central_limit(&parts, 0);
    let (ok2, v2) = central_limit(&parts, 1);
    let contraction = outer_contraction(&parts);
    let lambda = lambda_witness(&parts);
    let leader_consensus = (ok1 && ok2).then(|| {
        [
            central_consensus(input, central[0], &v1),
            central_consensus(input, central[1], &v2),
        ]
    });
    let leaders_agree = leader_consensus.as_ref().map(|[a, b]| {
        a.iter()
            .zip(b)
            .all(|(x, y)| (x - y).abs() <= THEOREM1_MATCH_TOL)
    });
    let follower_opinion = match (&leader_consensus, lambda.every_step, lambda.lambda1) {
        (Some([e1, e2]), true, Some(l1)) if contraction.holds => Some(
            e1.iter()
                .zip(e2)
                .map(|(a, b)| (1.0 - l1) * a + l1 * b)
                .collect(),
        ),
        _ => None,
    };
    let observed = observe(input, &outer, follower_opinion.as_deref());
    let consensus_ok = leaders_agree.is_some_and(|agree| agree == observed.consensus);
    let follower_ok = match (&follower_opinion, observed.max_error) {
        (None, _) => true,
        (Some(_), Some(e)) => e <= FOLLOWER_MATCH_TOL,
        (Some(_), None) => false,
    };
    Theorem2Report {
        hypotheses: Theorem2Hypotheses {
            odc_every_step: true,
            odc_failure: None,
            central_rank_one: [ok1, ok2],
            contraction: Some(contraction),
            lambda: Some(lambda),
        },
        prediction: Theorem2Prediction {
            leader_consensus,
            leaders_agree,
            full_consensus: leaders_agree,
            follower_opinion,
        },
        observed,
        matched: consensus_ok && follower_ok,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_leader_partition() {
        let w = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.25, 0.5, 0.25, 0.0, 0.5, 0.5]);
        let p = classify_odc(&w, &[vec![0]]).unwrap();
        assert_eq!(p.kind, OdcKind::OneODC);
        assert_eq!(p.a_blocks[0], DMatrix::from_element(1, 1, 1.0));
        assert_eq!(p.outer, vec![1, 2]);
        assert_eq!(p.d, DMatrix::from_row_slice(2, 2, &[0.5, 0.25, 0.5, 0.5]));
        assert!(matches!(
            classify_odc(&w, &[vec![1]]),
            Err(AnalysisError::NotOdc(_))
        ));
    }

    #[test]
    fn two_leader_partition() {
        let w = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.25, 0.5, 0.25, 0.0, 0.0, 1.0]);
        let p = classify_odc(&w, &[vec![0], vec![2]]).unwrap();
        assert_eq!(p.kind, OdcKind::TwoODC);
        assert_eq!(step_lambda(&p), Ok(Some(0.5)));
    }

    #[test]
    fn receptive_coupling_is_not_odc() {
        let w = DMatrix::from_element(3, 3, 1.0 / 3.0);
        for split in [vec![vec![0]], vec![vec![0, 1]], vec![vec![0], vec![1]]] {
            assert!(classify_odc(&w, &split).is_err());
        }
    }

    #[test]
    fn isolated_follower_breaks_contraction() {
        let w = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.5, 0.5, 0.0, 0.0, 0.0, 1.0]);
        let p = classify_odc(&w, &[vec![0]]).unwrap();
        let c = outer_contraction(&vec![p; 5]);
        assert!(!c.holds);
        assert_eq!(c.per_step_max_norm, 1.0);
    }

    #[test]
    fn unbalanced_rows_fail_lambda() {
        let w = DMatrix::from_row_slice(
            4,
            4,
            &[
                1.0, 0.0, 0.0, 0.0, //
                0.2, 0.5, 0.1, 0.2, //
                0.1, 0.2, 0.5, 0.2, //
                0.0, 0.0, 0.0, 1.0,
            ],
        );
        let p = classify_odc(&w, &[vec![0], vec![3]]).unwrap();
        assert_eq!(step_lambda(&p), Err(()));
    }
}
