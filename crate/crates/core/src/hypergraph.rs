//! Undirected hypergraphs with hyperedges of mixed cardinality, plus the
//! canonical chain / ring / star / complete generators.
//!
//! Node ids are 1-based in the public API and in the JSON format, matching
//! the usual drawing convention; tensor and polynomial code shifts to
//! 0-based indices internally.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// 1-based node index.
pub type NodeId = usize;

/// A hyperedge: at least two distinct nodes, stored strictly increasing.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Hyperedge {
    nodes: Vec<NodeId>,
}

impl Hyperedge {
    /// Normalizes (sorts) the node list; rejects repeats and cardinality < 2.
    pub fn new(mut nodes: Vec<NodeId>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::CardinalityTooSmall {
                got: nodes.len(),
                edge: nodes,
            });
        }
        nodes.sort_unstable();
        if nodes.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::RepeatedNode { edge: nodes });
        }
        Ok(Hyperedge { nodes })
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn cardinality(&self) -> usize {
        self.nodes.len()
    }

    pub fn contains(&self, node: NodeId) -> bool {
        self.nodes.binary_search(&node).is_ok()
    }
}

impl fmt::Display for Hyperedge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.nodes.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

/// An undirected hypergraph on nodes `1..=n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hypergraph {
    n: usize,
    edges: BTreeSet<Hyperedge>,
}

impl Hypergraph {
    /// Build from raw edge lists. Edges are normalized (sorted within each
    /// edge, deduplicated across edges) and validated against `1..=n`.
    pub fn new(n: usize, edges: impl IntoIterator<Item = Vec<NodeId>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("node count must be positive".into()));
        }
        let mut set = BTreeSet::new();
        for raw in edges {
            let edge = Hyperedge::new(raw)?;
            for &v in edge.nodes() {
                if v == 0 || v > n {
                    return Err(Error::NodeOutOfRange { node: v, n });
                }
            }
            set.insert(edge);
        }
        Ok(Hypergraph { n, edges: set })
    }

    /// The edgeless hypergraph on `n` nodes.
    pub fn edgeless(n: usize) -> Result<Self> {
        Hypergraph::new(n, std::iter::empty())
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = &Hyperedge> {
        self.edges.iter()
    }

    pub fn edges_of_cardinality(&self, k: usize) -> impl Iterator<Item = &Hyperedge> {
        self.edges.iter().filter(move |e| e.cardinality() == k)
    }

    /// Maximum edge cardinality K; 0 for an edgeless hypergraph.
    pub fn max_cardinality(&self) -> usize {
        self.edges
            .iter()
            .map(Hyperedge::cardinality)
            .max()
            .unwrap_or(0)
    }

    /// The distinct cardinalities present, ascending.
    pub fn cardinalities(&self) -> Vec<usize> {
        let set: BTreeSet<usize> = self.edges.iter().map(Hyperedge::cardinality).collect();
        set.into_iter().collect()
    }

    pub fn has_edge(&self, nodes: &[NodeId]) -> bool {
        match Hyperedge::new(nodes.to_vec()) {
            Ok(e) => self.edges.contains(&e),
            Err(_) => false,
        }
    }

    /// Deduplicated union of the edge sets; node counts must agree.
    pub fn union(&self, other: &Hypergraph) -> Result<Hypergraph> {
        if self.n != other.n {
            return Err(Error::NodeCountMismatch {
                left: self.n,
                right: other.n,
            });
        }
        let mut edges = self.edges.clone();
        edges.extend(other.edges.iter().cloned());
        Ok(Hypergraph { n: self.n, edges })
    }

    /// Keep only the edges of cardinality exactly `k`; may be edgeless.
    pub fn restrict_to_cardinality(&self, k: usize) -> Hypergraph {
        Hypergraph {
            n: self.n,
            edges: self
                .edges
                .iter()
                .filter(|e| e.cardinality() == k)
                .cloned()
                .collect(),
        }
    }

    /// Rebuild with node `i` renamed to `perm[i-1]` (a permutation of 1..=n).
    pub fn relabel(&self, perm: &[NodeId]) -> Result<Hypergraph> {
        if perm.len() != self.n {
            return Err(Error::InvalidInput(format!(
                "permutation has {} entries, expected {}",
                perm.len(),
                self.n
            )));
        }
        Hypergraph::new(
            self.n,
            self.edges
                .iter()
                .map(|e| e.nodes().iter().map(|&v| perm[v - 1]).collect()),
        )
    }

    /// Short structural id used in reports: node/edge counts, max
    /// cardinality, and a content hash of the edge list.
    pub fn structural_id(&self) -> String {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut mix = |x: u64| {
            h ^= x;
            h = h.wrapping_mul(0x0000_0100_0000_01B3);
        };
        mix(self.n as u64);
        for e in &self.edges {
            for &v in e.nodes() {
                mix(v as u64);
            }
            mix(u64::MAX);
        }
        format!(
            "n{}-e{}-K{}-{:08x}",
            self.n,
            self.edges.len(),
            self.max_cardinality(),
            h as u32
        )
    }

    // -- JSON document: {"n": <int>, "edges": [[<int>...], ...]} ------------

    pub fn from_json_str(s: &str) -> Result<Hypergraph> {
        let doc: HypergraphDoc = serde_json::from_str(s)?;
        Hypergraph::new(doc.n, doc.edges)
    }

    /// Canonical JSON: edges sorted lexicographically for reproducible diffs.
    pub fn to_json_string(&self) -> String {
        let doc = HypergraphDoc {
            n: self.n,
            edges: self.edges.iter().map(|e| e.nodes().to_vec()).collect(),
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("hypergraph serializes");
        s.push('\n');
        s
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Hypergraph> {
        Hypergraph::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json_string())?;
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct HypergraphDoc {
    n: usize,
    edges: Vec<Vec<NodeId>>,
}

fn check_params(n: usize, k: usize) -> Result<()> {
    if k < 2 || k > n {
        return Err(Error::BadGeneratorParams { n, k });
    }
    Ok(())
}

/// k-uniform hyperchain: nodes `j..j+k-1` share an edge for `j = 1..=n-k+1`.
pub fn hyperchain(n: usize, k: usize) -> Result<Hypergraph> {
    check_params(n, k)?;
    Hypergraph::new(n, (1..=n - k + 1).map(|j| (j..j + k).collect()))
}

/// k-uniform hyperring: the hyperchain windows wrap around modulo `n`;
/// coinciding wrapped edges collapse to one.
pub fn hyperring(n: usize, k: usize) -> Result<Hypergraph> {
    check_params(n, k)?;
    let wrap = |j: usize| if j > n { j - n } else { j };
    Hypergraph::new(n, (1..=n).map(|j| (j..j + k).map(wrap).collect()))
}

/// k-uniform hyperstar: internal nodes `1..=k-1` sit in every edge, one edge
/// per leaf `k..=n`.
pub fn hyperstar(n: usize, k: usize) -> Result<Hypergraph> {
    check_params(n, k)?;
    Hypergraph::new(
        n,
        (k..=n).map(|leaf| {
            let mut e: Vec<NodeId> = (1..k).collect();
            e.push(leaf);
            e
        }),
    )
}

/// k-uniform complete hypergraph: all `C(n, k)` hyperedges.
pub fn complete_hypergraph(n: usize, k: usize) -> Result<Hypergraph> {
    check_params(n, k)?;
    Hypergraph::new(n, k_subsets(n, k))
}

/// All k-subsets of `1..=n` in lexicographic order.
pub(crate) fn k_subsets(n: usize, k: usize) -> Vec<Vec<NodeId>> {
    let mut out = Vec::new();
    let mut cur: Vec<NodeId> = (1..=k).collect();
    if k == 0 || k > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        // advance to the next combination
        let mut i = k;
        while i > 0 && cur[i - 1] == n - (k - i) {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        cur[i - 1] += 1;
        for j in i..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn edge_sets(g: &Hypergraph) -> Vec<Vec<usize>> {
        g.edges().map(|e| e.nodes().to_vec()).collect()
    }

    #[test]
    fn new_normalizes_and_validates() {
        let g = Hypergraph::new(3, vec![vec![3, 2, 1]]).unwrap();
        assert_eq!(edge_sets(&g), vec![vec![1, 2, 3]]);
        assert_eq!(g.max_cardinality(), 3);

        let empty = Hypergraph::new(3, vec![]).unwrap();
        assert_eq!(empty.max_cardinality(), 0);

        assert!(matches!(
            Hypergraph::new(3, vec![vec![1, 1, 2]]),
            Err(Error::RepeatedNode { .. })
        ));
        assert!(matches!(
            Hypergraph::new(3, vec![vec![1, 4]]),
            Err(Error::NodeOutOfRange { node: 4, n: 3 })
        ));
        assert!(matches!(
            Hypergraph::new(3, vec![vec![2]]),
            Err(Error::CardinalityTooSmall { .. })
        ));
        // duplicate edges collapse
        let g = Hypergraph::new(3, vec![vec![1, 2], vec![2, 1]]).unwrap();
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn hyperchain_examples() {
        let g = hyperchain(4, 2).unwrap();
        assert_eq!(edge_sets(&g), vec![vec![1, 2], vec![2, 3], vec![3, 4]]);
        let g = hyperchain(5, 3).unwrap();
        assert_eq!(
            edge_sets(&g),
            vec![vec![1, 2, 3], vec![2, 3, 4], vec![3, 4, 5]]
        );
        let g = hyperchain(3, 3).unwrap();
        assert_eq!(edge_sets(&g), vec![vec![1, 2, 3]]);
        assert!(hyperchain(3, 5).is_err());
        assert!(hyperchain(3, 1).is_err());
    }

    #[test]
    fn hyperring_examples() {
        let g = hyperring(3, 2).unwrap();
        assert_eq!(edge_sets(&g), vec![vec![1, 2], vec![1, 3], vec![2, 3]]);
        let g = hyperring(4, 3).unwrap();
        assert_eq!(
            edge_sets(&g),
            vec![vec![1, 2, 3], vec![1, 2, 4], vec![1, 3, 4], vec![2, 3, 4]]
        );
        // full wrap degeneracy: all n windows coincide
        let g = hyperring(3, 3).unwrap();
        assert_eq!(edge_sets(&g), vec![vec![1, 2, 3]]);
    }

    #[test]
    fn hyperstar_examples() {
        let g = hyperstar(5, 3).unwrap();
        assert_eq!(
            edge_sets(&g),
            vec![vec![1, 2, 3], vec![1, 2, 4], vec![1, 2, 5]]
        );
        let g = hyperstar(4, 2).unwrap();
        assert_eq!(edge_sets(&g), vec![vec![1, 2], vec![1, 3], vec![1, 4]]);
        let g = hyperstar(3, 3).unwrap();
        assert_eq!(edge_sets(&g), vec![vec![1, 2, 3]]);
    }

    #[test]
    fn complete_examples() {
        let g = complete_hypergraph(4, 3).unwrap();
        assert_eq!(
            edge_sets(&g),
            vec![vec![1, 2, 3], vec![1, 2, 4], vec![1, 3, 4], vec![2, 3, 4]]
        );
        let g = complete_hypergraph(3, 2).unwrap();
        assert_eq!(g.edge_count(), 3);
        let g = complete_hypergraph(5, 5).unwrap();
        assert_eq!(edge_sets(&g), vec![vec![1, 2, 3, 4, 5]]);
    }

    #[test]
    fn generator_edge_counts() {
        for n in 2..=7 {
            for k in 2..=n {
                assert_eq!(hyperchain(n, k).unwrap().edge_count(), n - k + 1);
                assert_eq!(hyperstar(n, k).unwrap().edge_count(), n - k + 1);
                assert!(hyperring(n, k).unwrap().edge_count() <= n);
                let c = num_integer::binomial(n as u64, k as u64) as usize;
                assert_eq!(complete_hypergraph(n, k).unwrap().edge_count(), c);
            }
        }
    }

    #[test]
    fn k2_generators_match_classical_graphs() {
        let n = 5;
        let path: Vec<Vec<usize>> = (1..n).map(|j| vec![j, j + 1]).collect();
        assert_eq!(edge_sets(&hyperchain(n, 2).unwrap()), path);

        let mut cycle = path.clone();
        cycle.push(vec![1, n]);
        cycle.sort();
        assert_eq!(edge_sets(&hyperring(n, 2).unwrap()), cycle);

        let star: Vec<Vec<usize>> = (2..=n).map(|j| vec![1, j]).collect();
        assert_eq!(edge_sets(&hyperstar(n, 2).unwrap()), star);

        let mut complete = Vec::new();
        for i in 1..=n {
            for j in i + 1..=n {
                complete.push(vec![i, j]);
            }
        }
        assert_eq!(edge_sets(&complete_hypergraph(n, 2).unwrap()), complete);
    }

    #[test]
    fn union_and_restrict() {
        let g2 = complete_hypergraph(3, 2).unwrap();
        let g3 = complete_hypergraph(3, 3).unwrap();
        let u = g2.union(&g3).unwrap();
        assert_eq!(u.edge_count(), 4);
        assert_eq!(u.max_cardinality(), 3);
        assert_eq!(u.union(&u).unwrap(), u);

        let r3 = u.restrict_to_cardinality(3);
        assert_eq!(edge_sets(&r3), vec![vec![1, 2, 3]]);
        let r5 = hyperchain(4, 2).unwrap().restrict_to_cardinality(3);
        assert_eq!(r5.edge_count(), 0);
        // identity on uniform input
        assert_eq!(g3.restrict_to_cardinality(3), g3);

        let chain = hyperchain(5, 2).unwrap();
        let extra = Hypergraph::new(5, vec![vec![1, 2, 3]]).unwrap();
        let mixed = chain.union(&extra).unwrap();
        assert_eq!(mixed.edge_count(), 5);
        assert_eq!(mixed.max_cardinality(), 3);

        assert!(matches!(
            hyperchain(4, 2).unwrap().union(&hyperchain(5, 2).unwrap()),
            Err(Error::NodeCountMismatch { .. })
        ));
    }

    #[test]
    fn json_round_trip() {
        let g = hyperring(4, 3).unwrap();
        let s = g.to_json_string();
        let back = Hypergraph::from_json_str(&s).unwrap();
        assert_eq!(back, g);
        assert_eq!(back.to_json_string(), s);
        assert!(Hypergraph::from_json_str("{\"n\":2,\"edges\":[[1,1]]}").is_err());
    }

    proptest! {
        #[test]
        fn restrict_then_union_reconstructs(
            n in 2usize..6,
            picks in proptest::collection::vec(proptest::collection::vec(1usize..6, 2..5), 0..8)
        ) {
            let edges: Vec<Vec<usize>> = picks
                .into_iter()
                .filter_map(|mut e| {
                    e.iter_mut().for_each(|v| *v = (*v - 1) % n + 1);
                    e.sort_unstable();
                    e.dedup();
                    if e.len() >= 2 { Some(e) } else { None }
                })
                .collect();
            let g = Hypergraph::new(n, edges).unwrap();
            let mut acc = Hypergraph::edgeless(n).unwrap();
            for k in 2..=g.max_cardinality() {
                acc = acc.union(&g.restrict_to_cardinality(k)).unwrap();
            }
            prop_assert_eq!(acc, g);
        }

        #[test]
        fn generators_survive_revalidation(n in 2usize..7, pick in 0usize..4) {
            for k in 2..=n {
                let g = match pick {
                    0 => hyperchain(n, k).unwrap(),
                    1 => hyperring(n, k).unwrap(),
                    2 => hyperstar(n, k).unwrap(),
                    _ => complete_hypergraph(n, k).unwrap(),
                };
                let rebuilt = Hypergraph::new(
                    g.node_count(),
                    g.edges().map(|e| e.nodes().to_vec()),
                ).unwrap();
                prop_assert_eq!(rebuilt, g);
            }
        }
    }
}
