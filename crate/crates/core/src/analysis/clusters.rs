use serde::Serialize;

use crate::dst::{jousselme_distance, BodyOfEvidence};

/// Partition of agents into opinion clusters.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClusterReport {
    /// Member lists, each ascending, ordered by smallest member.
    pub clusters: Vec<Vec<usize>>,
    /// Cluster index of every agent.
    pub labels: Vec<usize>,
    /// Member-average opinion of each cluster.
    pub representatives: Vec<BodyOfEvidence>,
    pub consensus: bool,
    /// Two clusters sit within twice the tolerance of each other, so the
    /// split may be an artifact of the finite run.
    pub close_clusters: bool,
    pub converged: bool,
    pub iterations: usize,
}

impl ClusterReport {
    pub fn cluster_count(&self) -> usize {
        self.clusters.len()
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Transitive closure of "distance ≤ tol". The run metadata
/// (`converged`, `iterations`) is left for the caller to fill in.
pub fn detect_clusters(opinions: &[BodyOfEvidence], tol: f64) -> ClusterReport {
    let n = opinions.len();
    let mut parent: Vec<usize> = (0..n).collect();
    let mut min_cross = f64::INFINITY;
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let d = jousselme_distance(&opinions[i], &opinions[j]).expect("common frame");
            dist[i * n + j] = d;
            if d <= tol {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut labels = vec![usize::MAX; n];
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    let mut root_label = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if root_label[r] == usize::MAX {
            root_label[r] = clusters.len();
            clusters.push(Vec::new());
        }
        labels[i] = root_label[r];
        clusters[labels[i]].push(i);
    }
    for i in 0..n {
        for j in i + 1..n {
            if labels[i] != labels[j] {
                min_cross = min_cross.min(dist[i * n + j]);
            }
        }
    }
    let representatives = clusters
        .iter()
        .map(|members| {
            let w = 1.0 / members.len() as f64;
            let parts: Vec<_> = members.iter().map(|&i| (w, &opinions[i])).collect();
            BodyOfEvidence::mixture(&parts).expect("common frame")
        })
        .collect();
    ClusterReport {
        consensus: clusters.len() == 1,
        clusters,
        labels,
        representatives,
        close_clusters: min_cross <= 2.0 * tol,
        converged: true,
        iterations: 0,
    }
}
