//! Memory-aware flow simulation: effective distances, total flows, the
//! network-wide gain G(g), FPPC, and the memory-aware single-destination
//! shortest-path search with a brute-force oracle.
//!
//! A flow from S to D may be compressed on the S-to-mu segment (cost divided
//! by g) and travels plain from mu to D. The compressed segment may not pass
//! through the destination itself: a flow that reaches D is delivered, so
//! routing it through D and back would be meaningless. This convention
//! reproduces the ring example where the counter-clockwise walk through the
//! memory costs 4/g + 1 while the clockwise plain route costs 2.
//!
//! All costs are exact rationals: with g = num/den, every effective distance
//! is an integer multiple of 1/num, stored scaled by num.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Graph, UNREACHABLE};

/// Compression gain as an exact rational num/den >= 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Gain {
    pub num: u64,
    pub den: u64,
}

impl Gain {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if den == 0 || num < den {
            return Err(Error::usage(format!(
                "gain must be a rational >= 1, got {num}/{den}"
            )));
        }
        let g = gcd(num, den);
        Ok(Gain { num: num / g, den: den / g })
    }

    /// Parse a decimal such as "3" or "1.5" into an exact rational.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        let (int_part, frac_part) = match text.split_once('.') {
            Some((i, f)) => (i, f),
            None => (text, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(Error::usage(format!("cannot parse gain '{text}'")));
        }
        if frac_part.len() > 9 {
            return Err(Error::usage("gain precision limited to 9 decimal places"));
        }
        let int: u64 = if int_part.is_empty() {
            0
        } else {
            int_part
                .parse()
                .map_err(|_| Error::usage(format!("cannot parse gain '{text}'")))?
        };
        let den = 10u64.pow(frac_part.len() as u32);
        let frac: u64 = if frac_part.is_empty() {
            0
        } else {
            frac_part
                .parse()
                .map_err(|_| Error::usage(format!("cannot parse gain '{text}'")))?
        };
        Gain::new(int * den + frac, den)
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn is_unit(&self) -> bool {
        self.num == self.den
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// A set of memory-unit nodes together with the single-link gain g they
/// provide on the source-to-memory segment.
#[derive(Debug, Clone)]
pub struct MemoryDeployment {
    nodes: Vec<u32>,
    pub gain: Gain,
}

impl MemoryDeployment {
    pub fn new(mut nodes: Vec<u32>, gain: Gain) -> Self {
        nodes.sort_unstable();
        nodes.dedup();
        MemoryDeployment { nodes, gain }
    }

    pub fn nodes(&self) -> &[u32] {
        &self.nodes
    }

    pub fn contains(&self, v: u32) -> bool {
        self.nodes.binary_search(&v).is_ok()
    }
}

/// Effective distance scaled by gain.num; u64::MAX marks an unreachable pair.
pub const INF_COST: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EffDist {
    /// Effective distance times gain.num.
    pub scaled: u64,
    /// The memory the flow decompresses at, when the memory route is
    /// strictly better than the plain route (destination class D1).
    pub via: Option<u32>,
}

impl EffDist {
    pub fn value(&self, gain: &Gain) -> f64 {
        if self.scaled == INF_COST {
            f64::INFINITY
        } else {
            self.scaled as f64 / gain.num as f64
        }
    }
}

/// Hop distances from each listed source (exact BFS rows).
pub fn hop_distances(graph: &Graph, sources: &[u32]) -> Vec<Vec<u32>> {
    sources.iter().map(|&s| graph.bfs(s)).collect()
}

/// Full all-pairs hop distance table.
pub fn all_pairs(graph: &Graph) -> Vec<Vec<u32>> {
    (0..graph.n() as u32).map(|s| graph.bfs(s)).collect()
}

/// Distance from `s` to every node with `excluded` removed from the graph,
/// i.e. the compressed-segment metric for destination `excluded`.
fn bfs_excluding(graph: &Graph, s: u32, excluded: u32) -> Vec<u32> {
    let mut dist = vec![UNREACHABLE; graph.n()];
    if s == excluded {
        return dist;
    }
    let mut queue = std::collections::VecDeque::new();
    dist[s as usize] = 0;
    queue.push_back(s);
    while let Some(u) = queue.pop_front() {
        let du = dist[u as usize];
        for &v in graph.neighbors(u) {
            if v != excluded && dist[v as usize] == UNREACHABLE {
                dist[v as usize] = du + 1;
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Brute-force effective distance for one pair, straight from the
/// definition: min over the plain route and every memory route
/// d(S, mu)/g + d(mu, D), with the compressed leg not passing through D.
/// Ties favor the memoryless route.
pub fn effective_distance_oracle(
    graph: &Graph,
    s: u32,
    d: u32,
    deployment: &MemoryDeployment,
) -> EffDist {
    assert_ne!(s, d, "effective distance is defined for distinct endpoints");
    let gain = &deployment.gain;
    let dist_s = graph.bfs(s);
    let dist_s_excl = bfs_excluding(graph, s, d);
    let plain = dist_s[d as usize];
    let mut best = if plain == UNREACHABLE {
        INF_COST
    } else {
        u64::from(plain) * gain.num
    };
    let mut via = None;
    for &mu in deployment.nodes() {
        let cost = if mu == d {
            // Memory at the destination: the whole path is compressed.
            match plain {
                UNREACHABLE => continue,
                p => u64::from(p) * gain.den,
            }
        } else {
            let leg = dist_s_excl[mu as usize];
            if leg == UNREACHABLE {
                continue;
            }
            let dist_mu = graph.bfs(mu);
            let tail = dist_mu[d as usize];
            if tail == UNREACHABLE {
                continue;
            }
            u64::from(leg) * gain.den + u64::from(tail) * gain.num
        };
        if cost < best {
            best = cost;
            via = Some(mu);
        }
    }
    EffDist { scaled: best, via }
}

/// Memory-aware single-destination search: effective distances from every
/// node to `dest`, equal to the per-pair oracle on all pairs.
///
/// One plain BFS gives d(., D); a multi-source Dijkstra seeded at every
/// memory with offset d(mu, D) * num and uniform edge weight den, run on the
/// graph with D removed, gives the best memory route. Runs in
/// O(|E| + |V| log |V|) per destination.
pub fn modified_dijkstra(
    graph: &Graph,
    dest: u32,
    deployment: &MemoryDeployment,
) -> Vec<EffDist> {
    let n = graph.n();
    let gain = &deployment.gain;
    let dist_to_dest = graph.bfs(dest);

    let mut mem_cost = vec![INF_COST; n];
    let mut mem_via = vec![u32::MAX; n];
    let mut heap: BinaryHeap<Reverse<(u64, u32, u32)>> = BinaryHeap::new();
    for &mu in deployment.nodes() {
        if mu == dest {
            continue; // handled as the fully compressed plain route below
        }
        let d_mu = dist_to_dest[mu as usize];
        if d_mu == UNREACHABLE {
            continue;
        }
        let seed = u64::from(d_mu) * gain.num;
        if seed < mem_cost[mu as usize] {
            mem_cost[mu as usize] = seed;
            mem_via[mu as usize] = mu;
            heap.push(Reverse((seed, mu, mu)));
        }
    }
    while let Some(Reverse((cost, u, origin))) = heap.pop() {
        if cost > mem_cost[u as usize] {
            continue;
        }
        for &v in graph.neighbors(u) {
            if v == dest {
                continue; // compressed segment must not pass through D
            }
            let next = cost + gain.den;
            if next < mem_cost[v as usize] {
                mem_cost[v as usize] = next;
                mem_via[v as usize] = origin;
                heap.push(Reverse((next, v, origin)));
            }
        }
    }

    let dest_is_memory = deployment.contains(dest);
    (0..n as u32)
        .map(|v| {
            if v == dest {
                return EffDist { scaled: 0, via: None };
            }
            let plain = dist_to_dest[v as usize];
            let plain_cost = match plain {
                UNREACHABLE => INF_COST,
                p => u64::from(p) * gain.num,
            };
            let mut best = plain_cost;
            let mut via = None;
            if dest_is_memory && plain != UNREACHABLE {
                let c = u64::from(plain) * gain.den;
                if c < best {
                    best = c;
                    via = Some(dest);
                }
            }
            if mem_cost[v as usize] < best {
                best = mem_cost[v as usize];
                via = Some(mem_via[v as usize]);
            }
            EffDist { scaled: best, via }
        })
        .collect()
}

/// Per-source flow totals: effective and plain, over unit
/// flows to every reachable destination.
#[derive(Debug, Clone, Copy)]
pub struct FlowTotals {
    /// Sum of effective distances, scaled by gain.num.
    pub effective_scaled: u64,
    /// Sum of plain hop distances.
    pub plain: u64,
    /// Destinations skipped because they are unreachable.
    pub skipped: usize,
}

/// Total flow from `s` with unit demand to every other node. Disconnected
/// destinations are excluded from both sums.
pub fn total_flow(graph: &Graph, s: u32, deployment: &MemoryDeployment) -> FlowTotals {
    let dist_s = graph.bfs(s);
    let mut effective_scaled = 0u64;
    let mut plain = 0u64;
    let mut skipped = 0usize;
    for d in 0..graph.n() as u32 {
        if d == s {
            continue;
        }
        if dist_s[d as usize] == UNREACHABLE {
            skipped += 1;
            continue;
        }
        let eff = effective_distance_oracle(graph, s, d, deployment);
        effective_scaled += eff.scaled;
        plain += u64::from(dist_s[d as usize]);
    }
    FlowTotals { effective_scaled, plain, skipped }
}

/// Aggregate plain and effective flows over all ordered pairs, kept exact.
#[derive(Debug, Clone, Copy)]
pub struct NetworkGain {
    pub plain_sum: u128,
    pub effective_scaled_sum: u128,
    /// The scale (gain.num) dividing effective_scaled_sum.
    pub scale: u64,
    pub skipped_pairs: usize,
}

impl NetworkGain {
    pub fn value(&self) -> f64 {
        if self.effective_scaled_sum == 0 {
            return 1.0;
        }
        (self.plain_sum as f64) * (self.scale as f64) / (self.effective_scaled_sum as f64)
    }

    /// Exact test G == num/den.
    pub fn equals_ratio(&self, num: u128, den: u128) -> bool {
        self.plain_sum * u128::from(self.scale) * den == self.effective_scaled_sum * num
    }
}

/// Network-wide gain: ratio of total plain flow to total effective flow over
/// all ordered (S, D) pairs, computed with one memory-aware search per
/// destination. Disconnected pairs are excluded from both sums.
pub fn network_gain(graph: &Graph, deployment: &MemoryDeployment) -> NetworkGain {
    let mut plain_sum = 0u128;
    let mut eff_sum = 0u128;
    let mut skipped = 0usize;
    for dest in 0..graph.n() as u32 {
        let dist = graph.bfs(dest);
        let eff = modified_dijkstra(graph, dest, deployment);
        for v in 0..graph.n() as u32 {
            if v == dest {
                continue;
            }
            if dist[v as usize] == UNREACHABLE {
                skipped += 1;
                continue;
            }
            plain_sum += u128::from(dist[v as usize]);
            eff_sum += u128::from(eff[v as usize].scaled);
        }
    }
    NetworkGain {
        plain_sum,
        effective_scaled_sum: eff_sum,
        scale: deployment.gain.num,
        skipped_pairs: skipped,
    }
}

/// Bidirectional single-path gain 2g/(g+1): the cap on what plain routing
/// can achieve when a memory splits a path.
pub fn single_path_gain(gain: &Gain) -> f64 {
    2.0 * gain.num as f64 / (gain.num + gain.den) as f64
}

/// Network-wide gain when routes stay on plain shortest paths and memories
/// only help if one happens to lie on the path. Both directions of a
/// bidirectional flow decompress at the same on-path memory, so a pair with
/// a memory at hop x costs x/g + (d-x) one way and (d-x)/g + x the other:
/// d + d/g in total regardless of x, which is what caps this scheme at
/// 2g/(g+1) < 2 no matter how large g grows.
pub fn plain_routing_gain(graph: &Graph, deployment: &MemoryDeployment) -> NetworkGain {
    let gain = &deployment.gain;
    let mem_rows = hop_distances(graph, deployment.nodes());
    let mut plain_sum = 0u128;
    let mut eff_sum = 0u128;
    let mut skipped = 0usize;
    for s in 0..graph.n() as u32 {
        let dist_s = graph.bfs(s);
        for d in (s + 1)..graph.n() as u32 {
            let dd = dist_s[d as usize];
            if dd == UNREACHABLE {
                skipped += 2;
                continue;
            }
            // Shared decompression point: the lowest-id on-path memory.
            let leg = mem_rows.iter().find_map(|row| {
                let dsm = row[s as usize];
                let dmd = row[d as usize];
                (dsm != UNREACHABLE
                    && dmd != UNREACHABLE
                    && u64::from(dsm) + u64::from(dmd) == u64::from(dd))
                .then_some(u64::from(dsm))
            });
            let pair_cost = match leg {
                // x*den + (d-x)*num one way, (d-x)*den + x*num back.
                Some(_) => u64::from(dd) * (gain.num + gain.den),
                None => 2 * u64::from(dd) * gain.num,
            };
            plain_sum += 2 * u128::from(dd);
            eff_sum += u128::from(pair_cost);
        }
    }
    NetworkGain {
        plain_sum,
        effective_scaled_sum: eff_sum,
        scale: gain.num,
        skipped_pairs: skipped,
    }
}

/// Fraction of ordered non-core pairs (S, D) whose shortest-path distance is
/// witnessed through a core node: exists c in core with
/// d(S,c) + d(c,D) = d(S,D). Endpoints never count; pairs with an endpoint
/// in the core are excluded from the denominator. Returns 1 when no pairs
/// qualify.
pub fn fppc(graph: &Graph, core: &[u32]) -> f64 {
    let n = graph.n();
    let mut in_core = vec![false; n];
    for &c in core {
        in_core[c as usize] = true;
    }
    let core_rows = hop_distances(graph, core);
    let mut total = 0u64;
    let mut passing = 0u64;
    for s in 0..n as u32 {
        if in_core[s as usize] {
            continue;
        }
        let dist_s = graph.bfs(s);
        for d in 0..n as u32 {
            if d == s || in_core[d as usize] {
                continue;
            }
            let dd = dist_s[d as usize];
            if dd == UNREACHABLE {
                continue;
            }
            total += 1;
            let hit = core_rows.iter().any(|row| {
                let a = row[s as usize];
                let b = row[d as usize];
                a != UNREACHABLE && b != UNREACHABLE && a + b == dd
            });
            if hit {
                passing += 1;
            }
        }
    }
    if total == 0 {
        1.0
    } else {
        passing as f64 / total as f64
    }
}

/// One pair-level record of the flow report CSV.
#[derive(Debug, Clone, Serialize)]
pub struct PairRecord {
    pub source: u32,
    pub dest: u32,
    pub d: u32,
    pub deff: f64,
    pub memory_id: Option<u32>,
}

pub const PAIR_CSV_HEADER: &str = "source,dest,d,deff,memory_id";

/// Pair-level flow table for the whole graph, destination-major order.
pub fn pair_records(graph: &Graph, deployment: &MemoryDeployment) -> Vec<PairRecord> {
    let mut records = Vec::new();
    for dest in 0..graph.n() as u32 {
        let dist = graph.bfs(dest);
        let eff = modified_dijkstra(graph, dest, deployment);
        for v in 0..graph.n() as u32 {
            if v == dest || dist[v as usize] == UNREACHABLE {
                continue;
            }
            records.push(PairRecord {
                source: v,
                dest,
                d: dist[v as usize],
                deff: eff[v as usize].value(&deployment.gain),
                memory_id: eff[v as usize].via,
            });
        }
    }
    records
}

pub fn pair_records_to_csv(records: &[PairRecord]) -> String {
    let mut out = String::from(PAIR_CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.source,
            r.dest,
            r.d,
            r.deff,
            r.memory_id.map_or(String::from(""), |m| m.to_string())
        ));
    }
    out
}
