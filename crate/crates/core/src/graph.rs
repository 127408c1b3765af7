//! Undirected simple graphs: construction, edge-list ingestion and
//! structural queries.

use std::collections::{HashMap, VecDeque};
use std::io::BufRead;
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

/// Dense 0-based node index.
pub type NodeId = usize;

/// Undirected simple graph with sorted adjacency lists.
///
/// Every node also carries the identifier it had in the source it was read
/// from (`label`), so results can be reported against the original ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adjacency: Vec<Vec<NodeId>>,
    labels: Vec<u64>,
    edge_count: usize,
}

impl Graph {
    /// Builds a graph on `n` nodes labelled `0..n`. Duplicate edges are
    /// merged, self-loops rejected.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (NodeId, NodeId)>) -> Result<Self> {
        Self::from_labelled_edges((0..n as u64).collect(), edges)
    }

    fn from_labelled_edges(
        labels: Vec<u64>,
        edges: impl IntoIterator<Item = (NodeId, NodeId)>,
    ) -> Result<Self> {
        let n = labels.len();
        let mut adjacency = vec![Vec::new(); n];
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::Config(format!(
                    "edge ({u}, {v}) references a node outside 0..{n}"
                )));
            }
            if u == v {
                return Err(Error::SelfLoop {
                    line: 0,
                    node: labels[u],
                });
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        let mut degree_sum = 0;
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
            degree_sum += list.len();
        }
        Ok(Self {
            adjacency,
            labels,
            edge_count: degree_sum / 2,
        })
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn degree(&self, i: NodeId) -> usize {
        self.adjacency[i].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    /// Neighbors of `i`, strictly ascending.
    pub fn neighbors(&self, i: NodeId) -> &[NodeId] {
        &self.adjacency[i]
    }

    pub fn has_edge(&self, i: NodeId, j: NodeId) -> bool {
        self.adjacency[i].binary_search(&j).is_ok()
    }

    /// Original identifier of node `i`.
    pub fn label(&self, i: NodeId) -> u64 {
        self.labels[i]
    }

    pub fn labels(&self) -> &[u64] {
        &self.labels
    }

    /// Unordered edges `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(i, list)| list.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
    }

    pub fn is_connected(&self) -> bool {
        let n = self.node_count();
        n == 0 || self.bfs_distances(0).iter().all(Option::is_some)
    }

    /// Hop distances from `source`; `None` for unreachable nodes.
    pub fn bfs_distances(&self, source: NodeId) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.node_count()];
        let mut queue = VecDeque::new();
        dist[source] = Some(0);
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap_or_default();
            for &v in &self.adjacency[u] {
                if dist[v].is_none() {
                    dist[v] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Longest shortest path, by BFS from every node.
    pub fn diameter(&self) -> Result<usize> {
        let mut best = 0;
        for s in 0..self.node_count() {
            for d in self.bfs_distances(s) {
                best = best.max(d.ok_or(Error::Disconnected)?);
            }
        }
        Ok(best)
    }

    /// Connected components, each a list of node ids in ascending order.
    /// Components are listed in order of their smallest node id.
    pub fn components(&self) -> Vec<Vec<NodeId>> {
        let n = self.node_count();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut comp = vec![start];
            seen[start] = true;
            let mut head = 0;
            while head < comp.len() {
                let u = comp[head];
                head += 1;
                for &v in &self.adjacency[u] {
                    if !seen[v] {
                        seen[v] = true;
                        comp.push(v);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Induced subgraph on the largest connected component.
    ///
    /// Ties go to the component containing the smallest original label.
    /// Surviving nodes keep their relative order.
    pub fn largest_connected_component(&self) -> Graph {
        let comps = self.components();
        let min_label = |c: &Vec<NodeId>| c.iter().map(|&i| self.labels[i]).min();
        let best = comps
            .iter()
            .max_by(|a, b| {
                a.len()
                    .cmp(&b.len())
                    .then_with(|| min_label(b).cmp(&min_label(a)))
            })
            .cloned()
            .unwrap_or_default();
        self.induced_subgraph(&best)
    }

    /// Induced subgraph on `nodes` (must be ascending and distinct).
    pub fn induced_subgraph(&self, nodes: &[NodeId]) -> Graph {
        let mut remap = vec![usize::MAX; self.node_count()];
        for (new, &old) in nodes.iter().enumerate() {
            remap[old] = new;
        }
        let adjacency = nodes
            .iter()
            .map(|&old| {
                self.adjacency[old]
                    .iter()
                    .filter_map(|&v| (remap[v] != usize::MAX).then_some(remap[v]))
                    .collect::<Vec<_>>()
            })
            .collect::<Vec<_>>();
        let edge_count = adjacency.iter().map(Vec::len).sum::<usize>() / 2;
        Graph {
            adjacency,
            labels: nodes.iter().map(|&i| self.labels[i]).collect(),
            edge_count,
        }
    }

    /// Graph Laplacian `L = D - A` as a dense matrix.
    pub fn laplacian(&self) -> DenseMatrix {
        let n = self.node_count();
        let mut l = DenseMatrix::zeros(n);
        for i in 0..n {
            l[(i, i)] = self.degree(i) as f64;
            for &j in &self.adjacency[i] {
                l[(i, j)] = -1.0;
            }
        }
        l
    }
}

/// Parses a SNAP-style edge list.
///
/// Lines starting with `#` are comments, data lines hold two
/// whitespace-separated non-negative integer ids. Ids are remapped densely
/// in order of first appearance.
pub fn parse_edge_list(text: &str) -> Result<Graph> {
    read_edge_list(text.as_bytes())
}

pub fn read_edge_list<R: BufRead>(reader: R) -> Result<Graph> {
    let mut index: HashMap<u64, NodeId> = HashMap::new();
    let mut labels = Vec::new();
    let mut edges = Vec::new();
    let mut intern = |id: u64| -> NodeId {
        *index.entry(id).or_insert_with(|| {
            labels.push(id);
            labels.len() - 1
        })
    };
    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.map_err(|e| Error::Format {
            line: lineno,
            msg: e.to_string(),
        })?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let (Some(a), Some(b), None) = (tokens.next(), tokens.next(), tokens.next()) else {
            return Err(Error::Format {
                line: lineno,
                msg: format!("expected two node ids, got {trimmed:?}"),
            });
        };
        let parse = |tok: &str| {
            tok.parse::<u64>().map_err(|_| Error::Format {
                line: lineno,
                msg: format!("invalid node id {tok:?}"),
            })
        };
        let (u, v) = (parse(a)?, parse(b)?);
        if u == v {
            return Err(Error::SelfLoop {
                line: lineno,
                node: u,
            });
        }
        edges.push((intern(u), intern(v)));
    }
    if edges.is_empty() {
        return Err(Error::EmptyGraph);
    }
    Graph::from_labelled_edges(labels, edges)
}

pub fn load_edge_list(path: &Path) -> Result<Graph> {
    let file = std::fs::File::open(path).map_err(|e| Error::Format {
        line: 0,
        msg: format!("{}: {e}", path.display()),
    })?;
    read_edge_list(std::io::BufReader::new(file))
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::Graph;

    pub fn triangle() -> Graph {
        Graph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    pub fn path(n: usize) -> Graph {
        Graph::from_edges(n, (1..n).map(|i| (i - 1, i))).unwrap()
    }

    pub fn cycle(n: usize) -> Graph {
        Graph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n))).unwrap()
    }

    pub fn star(n: usize) -> Graph {
        Graph::from_edges(n, (1..n).map(|i| (0, i))).unwrap()
    }

    pub fn complete(n: usize) -> Graph {
        Graph::from_edges(n, (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_path_with_comment() {
        let g = parse_edge_list("# c\n0 1\n1 2").unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.degrees(), vec![1, 2, 1]);
    }

    #[test]
    fn duplicate_and_reversed_edges_merge() {
        let g = parse_edge_list("0 1\n1 0\n0 1").unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(matches!(parse_edge_list("0 0"), Err(Error::SelfLoop { line: 1, node: 0 })));
        assert!(matches!(parse_edge_list("0 x"), Err(Error::Format { line: 1, .. })));
        assert!(matches!(parse_edge_list("0 1 2"), Err(Error::Format { .. })));
        assert_eq!(parse_edge_list("# only\n\n"), Err(Error::EmptyGraph));
    }

    #[test]
    fn sparse_ids_remap_in_first_appearance_order() {
        let g = parse_edge_list("# x\n100\t7\n7 42\n\n\n").unwrap();
        assert_eq!(g.labels(), &[100, 7, 42]);
        assert_eq!(g.neighbors(1), &[0, 2]);
    }

    #[test]
    fn largest_component() {
        let g = Graph::from_edges(5, [(0, 1), (1, 2), (3, 4)]).unwrap();
        let lcc = g.largest_connected_component();
        assert_eq!(lcc.node_count(), 3);
        assert_eq!(lcc.edge_count(), 2);
        assert_eq!(triangle().largest_connected_component(), triangle());

        let tie = Graph::from_edges(4, [(2, 3), (0, 1)]).unwrap();
        assert_eq!(tie.largest_connected_component().labels(), &[0, 1]);

        // tie rule follows original labels, not dense indices
        let g = parse_edge_list("9 8\n1 5").unwrap();
        assert_eq!(g.largest_connected_component().labels(), &[1, 5]);
    }

    #[test]
    fn connectivity() {
        assert!(path(3).is_connected());
        assert!(!Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap().is_connected());
        assert!(Graph::from_edges(1, []).unwrap().is_connected());
    }

    #[test]
    fn diameters() {
        assert_eq!(triangle().diameter(), Ok(1));
        assert_eq!(path(3).diameter(), Ok(2));
        assert_eq!(Graph::from_edges(1, []).unwrap().diameter(), Ok(0));
        for n in 2..=6 {
            assert_eq!(path(n).diameter(), Ok(n - 1));
        }
        assert_eq!(cycle(7).diameter(), Ok(3));
        assert_eq!(
            Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap().diameter(),
            Err(Error::Disconnected)
        );
    }

    #[test]
    fn laplacians() {
        let rows = |g: &Graph| g.laplacian().to_rows();
        assert_eq!(
            rows(&triangle()),
            vec![vec![2., -1., -1.], vec![-1., 2., -1.], vec![-1., -1., 2.]]
        );
        assert_eq!(rows(&path(2)), vec![vec![1., -1.], vec![-1., 1.]]);
        assert_eq!(
            rows(&path(3)),
            vec![vec![1., -1., 0.], vec![-1., 2., -1.], vec![0., -1., 1.]]
        );
    }

    fn edge_lists() -> impl Strategy<Value = Vec<(u64, u64)>> {
        prop::collection::vec((0u64..40, 0u64..40), 1..80)
            .prop_map(|v| v.into_iter().filter(|(a, b)| a != b).collect::<Vec<_>>())
            .prop_filter("need an edge", |v| !v.is_empty())
    }

    proptest! {
        #[test]
        fn parsed_graphs_are_well_formed(edges in edge_lists()) {
            let text: String = edges.iter().map(|(a, b)| format!("{a} {b}\n")).collect();
            let g = parse_edge_list(&text).unwrap();
            let degree_sum: usize = g.degrees().iter().sum();
            prop_assert_eq!(degree_sum, 2 * g.edge_count());
            for i in 0..g.node_count() {
                let nb = g.neighbors(i);
                prop_assert!(nb.windows(2).all(|w| w[0] < w[1]));
                prop_assert!(!nb.contains(&i));
                for &j in nb {
                    prop_assert!(g.has_edge(j, i));
                }
            }
            let l = g.laplacian();
            for i in 0..g.node_count() {
                prop_assert_eq!(l.row(i).iter().sum::<f64>(), 0.0);
            }
            let lcc = g.largest_connected_component();
            prop_assert!(lcc.is_connected());
            prop_assert_eq!(lcc.largest_connected_component(), lcc.clone());
            if lcc.edge_count() >= 1 {
                prop_assert!(lcc.diameter().unwrap() >= 1);
            }
        }
    }
}
