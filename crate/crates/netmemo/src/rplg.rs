//! Random power-law graphs under the expected-degree (Chung-Lu / Fan-Lu)
//! model, with core sizing from the critical-threshold analysis.
//!
//! Weights follow w_i = c * i^(-1/(beta-1)) for i in [i0, N+i0], where c is
//! set by the average expected degree and i0 by the maximum expected degree.
//! Each pair {i, j} is connected independently with probability
//! min(1, w_i * w_j * rho), rho = 1/sum(w).

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Debug, Clone)]
pub struct ExpectedDegreeSequence {
    pub n: usize,
    pub beta: f64,
    pub w_bar: f64,
    pub delta: f64,
    /// Scale constant c.
    pub c: f64,
    /// Index offset i0.
    pub i0: f64,
    /// Weights in node-id order (node 0 has the largest weight).
    pub weights: Vec<f64>,
    /// 1 / sum of weights.
    pub rho: f64,
}

impl ExpectedDegreeSequence {
    pub fn w_min(&self) -> f64 {
        *self.weights.last().unwrap()
    }

    pub fn w_max(&self) -> f64 {
        self.weights[0]
    }

    pub fn total_weight(&self) -> f64 {
        1.0 / self.rho
    }
}

/// Build the expected-degree sequence. Node k takes index i = ceil(i0) + k,
/// so exactly `n` nodes exist and the maximum weight stays at or below delta.
pub fn build_weights(
    n: usize,
    beta: f64,
    w_bar: f64,
    delta: f64,
) -> Result<ExpectedDegreeSequence> {
    if n < 2 {
        return Err(Error::usage("need at least 2 nodes"));
    }
    if !(beta > 2.0 && beta < 3.0) {
        return Err(Error::usage(format!("beta must lie in (2, 3), got {beta}")));
    }
    if w_bar <= 1.0 {
        return Err(Error::usage(format!(
            "average expected degree must exceed 1 (giant-component regime), got {w_bar}"
        )));
    }
    if delta < w_bar {
        return Err(Error::usage("maximum expected degree must be >= the average"));
    }
    let c = (beta - 2.0) / (beta - 1.0) * w_bar * (n as f64).powf(1.0 / (beta - 1.0));
    let i0 = n as f64 * (w_bar * (beta - 2.0) / (delta * (beta - 1.0))).powf(beta - 1.0);
    let start = i0.ceil().max(1.0);
    let exponent = -1.0 / (beta - 1.0);
    let weights: Vec<f64> = (0..n)
        .map(|k| c * (start + k as f64).powf(exponent))
        .collect();
    let total: f64 = weights.iter().sum();
    Ok(ExpectedDegreeSequence {
        n,
        beta,
        w_bar,
        delta,
        c,
        i0,
        weights,
        rho: 1.0 / total,
    })
}

#[derive(Debug, Clone)]
pub struct RplgGraph {
    pub graph: Graph,
    pub weights: Vec<f64>,
    pub seed: u64,
    pub beta: f64,
    pub w_bar: f64,
    pub delta: f64,
}

impl RplgGraph {
    pub fn n(&self) -> usize {
        self.graph.n()
    }

    /// Node set of the largest connected component (ascending ids).
    pub fn giant_component(&self) -> Vec<u32> {
        self.graph.largest_component()
    }
}

/// Sample a graph from the sequence: each unordered pair {i, j} is an edge
/// independently with probability min(1, w_i w_j rho). Deterministic given
/// the seed.
pub fn sample_graph(seq: &ExpectedDegreeSequence, seed: u64) -> RplgGraph {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let n = seq.n;
    let mut graph = Graph::new(n);
    for i in 0..n {
        let wi_rho = seq.weights[i] * seq.rho;
        for j in (i + 1)..n {
            let p = (wi_rho * seq.weights[j]).min(1.0);
            if rng.gen::<f64>() < p {
                graph.add_edge(i as u32, j as u32);
            }
        }
    }
    RplgGraph {
        graph,
        weights: seq.weights.clone(),
        seed,
        beta: seq.beta,
        w_bar: seq.w_bar,
        delta: seq.delta,
    }
}

/// Core threshold from the no-giant-periphery condition
/// l^(3-beta) = 1/(w_bar * gamma), gamma = (1 - 1/(beta-1))^2 (beta-1)/(3-beta).
#[derive(Debug, Clone, Copy)]
pub struct CoreThreshold {
    pub gamma: f64,
    pub l: f64,
    /// l <= 1 means the threshold falls below the minimum weight and the
    /// prescription degenerates to memorizing everywhere.
    pub degenerate: bool,
}

pub fn solve_core_threshold(beta: f64, w_bar: f64) -> Result<CoreThreshold> {
    if !(beta > 2.0 && beta < 3.0) {
        return Err(Error::usage(format!("beta must lie in (2, 3), got {beta}")));
    }
    if w_bar <= 0.0 {
        return Err(Error::usage("w_bar must be positive"));
    }
    let gamma = (1.0 - 1.0 / (beta - 1.0)).powi(2) * (beta - 1.0) / (3.0 - beta);
    let l = (1.0 / (w_bar * gamma)).powf(1.0 / (3.0 - beta));
    Ok(CoreThreshold {
        gamma,
        l,
        degenerate: l <= 1.0,
    })
}

#[derive(Debug, Clone)]
pub struct CoreSpec {
    /// Threshold multiplier used (0 for top-k cores).
    pub l: f64,
    pub w_min: f64,
    /// Node ids in the core, ascending.
    pub nodes: Vec<u32>,
    pub degenerate: bool,
}

/// Core by expected degree: C = { u : w_u > l * w_min }. When l <= 1 the
/// prescription is degenerate and the core is the whole node set.
pub fn theorem_core(seq: &ExpectedDegreeSequence, threshold: &CoreThreshold) -> CoreSpec {
    let w_min = *seq
        .weights
        .iter()
        .min_by(|a, b| a.partial_cmp(b).unwrap())
        .unwrap();
    let cut = threshold.l * w_min;
    let nodes: Vec<u32> = (0..seq.n as u32)
        .filter(|&u| seq.weights[u as usize] > cut)
        .collect();
    CoreSpec {
        l: threshold.l,
        w_min,
        nodes,
        degenerate: threshold.degenerate,
    }
}

/// Core by realized degree: the ceil(fraction * N) highest-degree nodes of
/// the graph, ties broken by ascending node id.
pub fn topk_core(graph: &Graph, fraction: f64) -> Result<CoreSpec> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::usage("core fraction must lie in (0, 1]"));
    }
    let n = graph.n();
    let k = ((fraction * n as f64).ceil() as usize).min(n);
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.sort_by_key(|&v| (std::cmp::Reverse(graph.degree(v)), v));
    let mut nodes: Vec<u32> = order[..k].to_vec();
    nodes.sort_unstable();
    Ok(CoreSpec {
        l: 0.0,
        w_min: 0.0,
        nodes,
        degenerate: false,
    })
}

/// Induced-subgraph weights: removing nodes scales every remaining weight by
/// the retained fraction of the total weight.
pub fn induced_weights(subset: &[f64], total_weight: f64) -> Vec<f64> {
    let sub_total: f64 = subset.iter().sum();
    let scale = sub_total / total_weight;
    subset.iter().map(|w| w * scale).collect()
}

/// Sub-criticality ratio sum(w'^2) / sum(w') of the induced subgraph; a value
/// below 1 means almost surely no giant component.
pub fn subcriticality_ratio(subset: &[f64], total_weight: f64) -> f64 {
    let w = induced_weights(subset, total_weight);
    let sum: f64 = w.iter().sum();
    let sum_sq: f64 = w.iter().map(|x| x * x).sum();
    if sum == 0.0 {
        0.0
    } else {
        sum_sq / sum
    }
}

pub fn no_giant_check(subset: &[f64], total_weight: f64) -> bool {
    subcriticality_ratio(subset, total_weight) < 1.0
}

/// Closed-form sub-criticality ratio of the periphery (weights in
/// (w_min, l*w_min)) from the asymptotic volume formulas: the ratio reduces
/// to w_bar * gamma * l^(3-beta), which equals 1 exactly at the critical l.
pub fn periphery_ratio_analytic(beta: f64, w_bar: f64, l: f64) -> f64 {
    let gamma = (1.0 - 1.0 / (beta - 1.0)).powi(2) * (beta - 1.0) / (3.0 - beta);
    w_bar * gamma * l.powf(3.0 - beta)
}

/// Analytic periphery volumes: (sum w', sum w'^2) for the induced periphery.
pub fn periphery_volumes_analytic(n: usize, beta: f64, w_bar: f64, l: f64) -> (f64, f64) {
    let gamma = (1.0 - 1.0 / (beta - 1.0)).powi(2) * (beta - 1.0) / (3.0 - beta);
    let shrink = (1.0 - l.powf(2.0 - beta)).powi(2);
    let sum_w = n as f64 * w_bar * shrink;
    let sum_w_sq = n as f64 * w_bar * w_bar * gamma * l.powf(3.0 - beta) * shrink;
    (sum_w, sum_w_sq)
}

/// Write the graph as a plain-text edge list:
/// first line "N M seed beta w_bar delta", then one "u v" pair per line.
pub fn graph_to_edge_list(g: &RplgGraph) -> String {
    let edges = g.graph.edges();
    let mut out = format!(
        "{} {} {} {} {} {}\n",
        g.n(),
        edges.len(),
        g.seed,
        g.beta,
        g.w_bar,
        g.delta
    );
    for (u, v) in edges {
        out.push_str(&format!("{u} {v}\n"));
    }
    out
}

/// Optional sidecar with one "node weight" line per node.
pub fn weights_to_sidecar(g: &RplgGraph) -> String {
    let mut out = String::new();
    for (i, w) in g.weights.iter().enumerate() {
        out.push_str(&format!("{i} {w}\n"));
    }
    out
}

pub fn graph_from_edge_list(text: &str) -> Result<RplgGraph> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::format("empty graph file"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 6 {
        return Err(Error::format(
            "graph header must be 'N M seed beta w_bar delta'",
        ));
    }
    let n: usize = fields[0]
        .parse()
        .map_err(|_| Error::format("bad node count"))?;
    let m: usize = fields[1]
        .parse()
        .map_err(|_| Error::format("bad edge count"))?;
    let seed: u64 = fields[2].parse().map_err(|_| Error::format("bad seed"))?;
    let beta: f64 = fields[3].parse().map_err(|_| Error::format("bad beta"))?;
    let w_bar: f64 = fields[4].parse().map_err(|_| Error::format("bad w_bar"))?;
    let delta: f64 = fields[5].parse().map_err(|_| Error::format("bad delta"))?;
    let mut graph = Graph::new(n);
    let mut count = 0;
    for line in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let u: u32 = it
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::format("bad edge line"))?;
        let v: u32 = it
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::format("bad edge line"))?;
        if u as usize >= n || v as usize >= n || u == v {
            return Err(Error::format(format!("invalid edge {u} {v}")));
        }
        graph.add_edge(u, v);
        count += 1;
    }
    if count != m {
        return Err(Error::format(format!(
            "edge count mismatch: header says {m}, file has {count}"
        )));
    }
    Ok(RplgGraph {
        graph,
        weights: Vec::new(),
        seed,
        beta,
        w_bar,
        delta,
    })
}
