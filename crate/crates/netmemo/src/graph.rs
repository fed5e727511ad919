//! Undirected simple graph with the traversals the simulation needs.

use std::collections::VecDeque;

pub const UNREACHABLE: u32 = u32::MAX;

#[derive(Debug, Clone)]
pub struct Graph {
    adj: Vec<Vec<u32>>,
}

impl Graph {
    pub fn new(n: usize) -> Self {
        Graph { adj: vec![Vec::new(); n] }
    }

    pub fn from_edges(n: usize, edges: &[(u32, u32)]) -> Self {
        let mut g = Graph::new(n);
        for &(u, v) in edges {
            g.add_edge(u, v);
        }
        g
    }

    /// Add an undirected edge. The caller is responsible for not inserting
    /// self-loops or duplicates.
    pub fn add_edge(&mut self, u: u32, v: u32) {
        debug_assert_ne!(u, v);
        self.adj[u as usize].push(v);
        self.adj[v as usize].push(u);
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn degree(&self, v: u32) -> usize {
        self.adj[v as usize].len()
    }

    pub fn neighbors(&self, v: u32) -> &[u32] {
        &self.adj[v as usize]
    }

    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for (u, nbrs) in self.adj.iter().enumerate() {
            for &v in nbrs {
                if (u as u32) < v {
                    out.push((u as u32, v));
                }
            }
        }
        out
    }

    /// Unweighted shortest-path (hop) distances from `src`.
    pub fn bfs(&self, src: u32) -> Vec<u32> {
        let mut dist = vec![UNREACHABLE; self.n()];
        let mut queue = VecDeque::new();
        dist[src as usize] = 0;
        queue.push_back(src);
        while let Some(u) = queue.pop_front() {
            let du = dist[u as usize];
            for &v in &self.adj[u as usize] {
                if dist[v as usize] == UNREACHABLE {
                    dist[v as usize] = du + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Connected-component labels (0-based, in discovery order).
    pub fn component_labels(&self) -> Vec<u32> {
        let mut labels = vec![UNREACHABLE; self.n()];
        let mut next = 0u32;
        let mut queue = VecDeque::new();
        for start in 0..self.n() {
            if labels[start] != UNREACHABLE {
                continue;
            }
            labels[start] = next;
            queue.push_back(start as u32);
            while let Some(u) = queue.pop_front() {
                for &v in &self.adj[u as usize] {
                    if labels[v as usize] == UNREACHABLE {
                        labels[v as usize] = next;
                        queue.push_back(v);
                    }
                }
            }
            next += 1;
        }
        labels
    }

    /// Node ids of the largest connected component (ascending). Empty graphs
    /// yield an empty set.
    pub fn largest_component(&self) -> Vec<u32> {
        if self.n() == 0 {
            return Vec::new();
        }
        let labels = self.component_labels();
        let count = labels.iter().map(|&l| l + 1).max().unwrap() as usize;
        let mut sizes = vec![0usize; count];
        for &l in &labels {
            sizes[l as usize] += 1;
        }
        let best = (0..count).max_by_key(|&i| sizes[i]).unwrap() as u32;
        (0..self.n() as u32)
            .filter(|&v| labels[v as usize] == best)
            .collect()
    }

    /// Sizes of all connected components, descending.
    pub fn component_sizes(&self) -> Vec<usize> {
        let labels = self.component_labels();
        let count = labels.iter().map(|&l| l + 1).max().unwrap_or(0) as usize;
        let mut sizes = vec![0usize; count];
        for &l in &labels {
            sizes[l as usize] += 1;
        }
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        sizes
    }

    /// Induced subgraph on `nodes` (which must be sorted ascending).
    /// Returns the subgraph and the new-index -> old-id mapping.
    pub fn induced(&self, nodes: &[u32]) -> (Graph, Vec<u32>) {
        let mut index = vec![UNREACHABLE; self.n()];
        for (new, &old) in nodes.iter().enumerate() {
            index[old as usize] = new as u32;
        }
        let mut g = Graph::new(nodes.len());
        for &old in nodes {
            let new_u = index[old as usize];
            for &v in &self.adj[old as usize] {
                let new_v = index[v as usize];
                if new_v != UNREACHABLE && new_u < new_v {
                    g.add_edge(new_u, new_v);
                }
            }
        }
        (g, nodes.to_vec())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_graph_distances() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)]);
        let d = g.bfs(0);
        assert_eq!(d, vec![0, 1, 2]);
    }

    #[test]
    fn two_cliques_largest_component() {
        // 5-clique on 0..5, 3-clique on 5..8.
        let mut g = Graph::new(8);
        for u in 0..5u32 {
            for v in u + 1..5 {
                g.add_edge(u, v);
            }
        }
        for u in 5..8u32 {
            for v in u + 1..8 {
                g.add_edge(u, v);
            }
        }
        assert_eq!(g.largest_component(), vec![0, 1, 2, 3, 4]);
        assert_eq!(g.component_sizes(), vec![5, 3]);
    }

    #[test]
    fn connected_graph_is_one_component() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]);
        assert_eq!(g.largest_component(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn induced_subgraph_reindexes() {
        let g = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (1, 3)]);
        let (sub, map) = g.induced(&[1, 2, 3]);
        assert_eq!(map, vec![1, 2, 3]);
        assert_eq!(sub.n(), 3);
        assert_eq!(sub.edge_count(), 3); // 1-2, 2-3, 1-3
    }

    #[test]
    fn bfs_unreachable_sentinel() {
        let g = Graph::from_edges(3, &[(0, 1)]);
        let d = g.bfs(0);
        assert_eq!(d[2], UNREACHABLE);
    }
}
