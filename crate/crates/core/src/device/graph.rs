use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Couplings of the 27-qubit heavy-hex Falcon layout.
pub const FALCON27_EDGES: [(usize, usize); 28] = [
    (0, 1),
    (1, 2),
    (1, 4),
    (2, 3),
    (3, 5),
    (4, 7),
    (5, 8),
    (6, 7),
    (7, 10),
    (8, 9),
    (8, 11),
    (10, 12),
    (11, 14),
    (12, 13),
    (12, 15),
    (13, 14),
    (14, 16),
    (15, 18),
    (16, 19),
    (17, 18),
    (18, 21),
    (19, 20),
    (19, 22),
    (21, 23),
    (22, 25),
    (23, 24),
    (24, 25),
    (25, 26),
];

/// Undirected qubit connectivity. Edges are stored as `(low, high)` pairs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawGraph", into = "RawGraph")]
pub struct CouplingGraph {
    n_qubits: usize,
    edges: BTreeSet<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct RawGraph {
    n_qubits: usize,
    edges: Vec<(usize, usize)>,
}

impl TryFrom<RawGraph> for CouplingGraph {
    type Error = Error;

    fn try_from(raw: RawGraph) -> Result<Self> {
        CouplingGraph::new(raw.n_qubits, raw.edges)
    }
}

impl From<CouplingGraph> for RawGraph {
    fn from(g: CouplingGraph) -> Self {
        RawGraph { n_qubits: g.n_qubits, edges: g.edges.into_iter().collect() }
    }
}

/// Old-to-new index map produced by [`CouplingGraph::extract_neighborhood`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relabeling {
    /// `new_to_old[new] = old`.
    pub new_to_old: Vec<usize>,
    pub old_to_new: BTreeMap<usize, usize>,
}

impl Relabeling {
    pub fn new_index(&self, old: usize) -> Option<usize> {
        self.old_to_new.get(&old).copied()
    }
}

impl CouplingGraph {
    pub fn new(n_qubits: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::InvalidParameter(format!("self-loop on qubit {a}")));
            }
            if a >= n_qubits || b >= n_qubits {
                return Err(Error::QubitOutOfRange { index: a.max(b), n_qubits });
            }
            set.insert((a.min(b), a.max(b)));
        }
        let mut adjacency = vec![Vec::new(); n_qubits];
        for &(a, b) in &set {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for row in &mut adjacency {
            row.sort_unstable();
        }
        Ok(Self { n_qubits, edges: set, adjacency })
    }

    pub fn falcon27() -> Self {
        Self::new(27, FALCON27_EDGES).expect("builtin layout is valid")
    }

    pub fn path(n_qubits: usize) -> Self {
        Self::new(n_qubits, (1..n_qubits).map(|q| (q - 1, q))).expect("path is valid")
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Edges in ascending order; per-edge parameter arrays follow this order.
    pub fn edges(&self) -> impl ExactSizeIterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        let key = (a.min(b), a.max(b));
        self.edges.iter().position(|&e| e == key)
    }

    pub fn contains(&self, q: usize) -> bool {
        q < self.n_qubits
    }

    pub fn degree(&self, q: usize) -> usize {
        self.adjacency[q].len()
    }

    pub fn neighbors(&self, q: usize) -> &[usize] {
        &self.adjacency[q]
    }

    pub fn are_adjacent(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    /// Qubits whose coordination number equals `n_c`, ascending.
    pub fn coordination_targets(&self, n_c: usize) -> Vec<usize> {
        (0..self.n_qubits).filter(|&q| self.degree(q) == n_c).collect()
    }

    /// Breadth-first distances from `source` (`None` when unreachable).
    pub fn distances_from(&self, source: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n_qubits];
        let mut queue = VecDeque::new();
        dist[source] = Some(0);
        queue.push_back(source);
        while let Some(q) = queue.pop_front() {
            let d = dist[q].unwrap();
            for &nb in &self.adjacency[q] {
                if dist[nb].is_none() {
                    dist[nb] = Some(d + 1);
                    queue.push_back(nb);
                }
            }
        }
        dist
    }

    /// Induced subgraph on every qubit within `radius` hops of `center`.
    ///
    /// New indices are ordered by distance, then by old index, so `center`
    /// becomes 0. `usize::MAX` selects the whole connected component.
    pub fn extract_neighborhood(&self, center: usize, radius: usize) -> Result<(CouplingGraph, Relabeling)> {
        if center >= self.n_qubits {
            return Err(Error::QubitOutOfRange { index: center, n_qubits: self.n_qubits });
        }
        let dist = self.distances_from(center);
        let mut members: Vec<(usize, usize)> = dist
            .iter()
            .enumerate()
            .filter_map(|(q, d)| d.filter(|&d| d <= radius).map(|d| (d, q)))
            .collect();
        members.sort_unstable();
        let new_to_old: Vec<usize> = members.into_iter().map(|(_, q)| q).collect();
        let old_to_new: BTreeMap<usize, usize> =
            new_to_old.iter().enumerate().map(|(new, &old)| (old, new)).collect();
        let edges = self.edges.iter().filter_map(|&(a, b)| Some((*old_to_new.get(&a)?, *old_to_new.get(&b)?)));
        let sub = CouplingGraph::new(new_to_old.len(), edges)?;
        Ok((sub, Relabeling { new_to_old, old_to_new }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn falcon27_shape() {
        let g = CouplingGraph::falcon27();
        assert_eq!(g.n_qubits(), 27);
        assert_eq!(g.n_edges(), 28);
        assert_eq!(g.degree(0), 1);
        let mut hist = [0usize; 4];
        for q in 0..27 {
            hist[g.degree(q)] += 1;
        }
        assert_eq!(hist, [0, 6, 13, 8]);
        assert_eq!((0..27).map(|q| g.degree(q)).sum::<usize>(), 56);
    }

    #[test]
    fn coordination_fixtures() {
        let g = CouplingGraph::falcon27();
        assert_eq!(g.coordination_targets(3), vec![1, 7, 8, 12, 14, 18, 19, 25]);
        assert_eq!(g.coordination_targets(1), vec![0, 6, 9, 17, 20, 26]);
        let empty = CouplingGraph::new(5, []).unwrap();
        assert!(empty.coordination_targets(3).is_empty());
    }

    #[test]
    fn neighborhoods() {
        let g = CouplingGraph::falcon27();
        let (star, relabel) = g.extract_neighborhood(1, 1).unwrap();
        assert_eq!(relabel.new_to_old, vec![1, 0, 2, 4]);
        assert_eq!(star.n_edges(), 3);
        assert_eq!(star.degree(0), 3);

        let (single, relabel) = g.extract_neighborhood(5, 0).unwrap();
        assert_eq!(single.n_qubits(), 1);
        assert_eq!(relabel.new_to_old, vec![5]);

        let (sub, relabel) = g.extract_neighborhood(12, 2).unwrap();
        let nodes: BTreeSet<usize> = relabel.new_to_old.iter().copied().collect();
        assert_eq!(nodes, BTreeSet::from([12, 10, 15, 13, 7, 18, 14]));
        assert_eq!(relabel.new_index(12), Some(0));
        assert_eq!(sub.n_edges(), 6);
    }

    #[test]
    fn infinite_radius_is_component() {
        let g = CouplingGraph::new(5, [(0, 1), (1, 2), (3, 4)]).unwrap();
        let (sub, relabel) = g.extract_neighborhood(2, usize::MAX).unwrap();
        assert_eq!(sub.n_qubits(), 3);
        assert_eq!(relabel.new_to_old, vec![2, 1, 0]);
        let (full, _) = CouplingGraph::falcon27().extract_neighborhood(0, usize::MAX).unwrap();
        assert_eq!(full.n_qubits(), 27);
        assert_eq!(full.n_edges(), 28);
    }

    #[test]
    fn rejects_bad_edges() {
        assert!(CouplingGraph::new(3, [(1, 1)]).is_err());
        assert!(CouplingGraph::new(3, [(0, 3)]).is_err());
    }

    #[test]
    fn serde_roundtrip_validates() {
        let g = CouplingGraph::path(3);
        let json = serde_json::to_string(&g).unwrap();
        let back: CouplingGraph = serde_json::from_str(&json).unwrap();
        assert_eq!(back, g);
        assert!(serde_json::from_str::<CouplingGraph>(r#"{"n_qubits":2,"edges":[[0,0]]}"#).is_err());
    }
}
