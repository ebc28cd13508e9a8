//! Static read-latency analysis over a weighted server graph.
//!
//! A read at server `s` for object `k` fetches symbols from some recovery
//! set and waits for the slowest of them, so its latency is the best (over
//! recovery sets) of the worst (over remote members) edge weight.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::code::LinearCode;
use crate::error::LatencyError;

/// Symmetric, zero-diagonal inter-server latencies in abstract time units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct LatencyGraph {
    weights: Vec<Vec<f64>>,
}

impl LatencyGraph {
    pub fn new(weights: Vec<Vec<f64>>) -> Result<Self, LatencyError> {
        let n = weights.len();
        if n == 0 {
            return Err(LatencyError::Graph("no servers".into()));
        }
        for (i, row) in weights.iter().enumerate() {
            if row.len() != n {
                return Err(LatencyError::Graph(format!(
                    "row {} has {} entries, expected {n}",
                    i + 1,
                    row.len()
                )));
            }
            for (j, &w) in row.iter().enumerate() {
                if !w.is_finite() {
                    return Err(LatencyError::Graph(format!("d({},{}) is not finite", i + 1, j + 1)));
                }
                if i == j && w != 0.0 {
                    return Err(LatencyError::Graph(format!("d({0},{0}) must be 0", i + 1)));
                }
                if i != j && w <= 0.0 {
                    return Err(LatencyError::Graph(format!("d({},{}) must be positive", i + 1, j + 1)));
                }
                if weights[j][i] != w {
                    return Err(LatencyError::Graph(format!(
                        "d({},{}) != d({},{})",
                        i + 1,
                        j + 1,
                        j + 1,
                        i + 1
                    )));
                }
            }
        }
        Ok(Self { weights })
    }

    /// Complete graph with every edge weighing `w`.
    pub fn uniform(n: usize, w: f64) -> Result<Self, LatencyError> {
        let weights = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 0.0 } else { w }).collect())
            .collect();
        Self::new(weights)
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.weights[i][j]
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    /// Latency of fetching from every member of `set` at server `s`.
    pub fn fetch_cost(&self, s: usize, set: &BTreeSet<usize>) -> f64 {
        set.iter()
            .filter(|&&j| j != s)
            .map(|&j| self.d(s, j))
            .fold(0.0, f64::max)
    }
}

impl TryFrom<Vec<Vec<f64>>> for LatencyGraph {
    type Error = LatencyError;

    fn try_from(w: Vec<Vec<f64>>) -> Result<Self, Self::Error> {
        Self::new(w)
    }
}

impl From<LatencyGraph> for Vec<Vec<f64>> {
    fn from(g: LatencyGraph) -> Self {
        g.weights
    }
}

/// Per-(server, object) read latencies with their maximum and mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatencyReport {
    /// `per_pair[s][k]`.
    pub per_pair: Vec<Vec<f64>>,
    pub worst: f64,
    pub average: f64,
}

impl LatencyReport {
    fn from_table(per_pair: Vec<Vec<f64>>) -> Self {
        let all: Vec<f64> = per_pair.iter().flatten().copied().collect();
        let worst = all.iter().copied().fold(0.0, f64::max);
        let average = all.iter().sum::<f64>() / all.len() as f64;
        Self {
            per_pair,
            worst,
            average,
        }
    }
}

/// Read latency of every object at every server under `code`.
pub fn analyze_latency(graph: &LatencyGraph, code: &LinearCode) -> Result<LatencyReport, LatencyError> {
    if graph.n() != code.n() {
        return Err(LatencyError::Graph(format!(
            "graph has {} servers but the code has {}",
            graph.n(),
            code.n()
        )));
    }
    let mut table = vec![vec![0.0; code.k()]; code.n()];
    for (s, row) in table.iter_mut().enumerate() {
        for (k, cell) in row.iter_mut().enumerate() {
            *cell = code
                .minimal_recovery_sets(k)?
                .iter()
                .map(|rs| graph.fetch_cost(s, &rs.members))
                .fold(f64::INFINITY, f64::min);
        }
    }
    Ok(LatencyReport::from_table(table))
}

/// Best partial-replication placements: the lowest achievable worst case and
/// the lowest achievable average, each over all placements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationReport {
    pub best_worst: f64,
    pub best_average: f64,
    /// `placement[s]` lists the objects server `s` stores.
    pub worst_placement: Vec<Vec<usize>>,
    pub average_placement: Vec<Vec<usize>>,
}

/// Exhaustive search over placements of at most `capacity` whole objects per
/// server in which every object is stored somewhere.
pub fn replication_baseline(
    graph: &LatencyGraph,
    k: usize,
    capacity: usize,
) -> Result<ReplicationReport, LatencyError> {
    let n = graph.n();
    if k == 0 || k > n * capacity {
        return Err(LatencyError::Infeasible {
            objects: k,
            servers: n,
            capacity,
        });
    }
    let choices: Vec<Vec<usize>> = (0..=capacity.min(k))
        .flat_map(|size| crate::code::subsets_of_size(k, size))
        .map(|s| s.into_iter().collect())
        .collect();

    let mut best: Option<ReplicationReport> = None;
    let mut idx = vec![0usize; n];
    loop {
        let placement: Vec<Vec<usize>> = idx.iter().map(|&c| choices[c].clone()).collect();
        if let Some(report) = placement_latency(graph, k, &placement) {
            let b = best.get_or_insert_with(|| ReplicationReport {
                best_worst: report.worst,
                best_average: report.average,
                worst_placement: placement.clone(),
                average_placement: placement.clone(),
            });
            if report.worst < b.best_worst {
                b.best_worst = report.worst;
                b.worst_placement = placement.clone();
            }
            if report.average < b.best_average {
                b.best_average = report.average;
                b.average_placement = placement.clone();
            }
        }
        // odometer increment
        let mut pos = 0;
        loop {
            if pos == n {
                return best.ok_or(LatencyError::Infeasible {
                    objects: k,
                    servers: n,
                    capacity,
                });
            }
            idx[pos] += 1;
            if idx[pos] < choices.len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// Latency table of one replication placement, or `None` if some object is
/// stored nowhere.
pub fn placement_latency(graph: &LatencyGraph, k: usize, placement: &[Vec<usize>]) -> Option<LatencyReport> {
    let n = graph.n();
    let mut table = vec![vec![0.0; k]; n];
    for obj in 0..k {
        let holders: Vec<usize> = (0..n).filter(|&j| placement[j].contains(&obj)).collect();
        if holders.is_empty() {
            return None;
        }
        for (s, row) in table.iter_mut().enumerate() {
            row[obj] = holders.iter().map(|&j| graph.d(s, j)).fold(f64::INFINITY, f64::min);
        }
    }
    Some(LatencyReport::from_table(table))
}
