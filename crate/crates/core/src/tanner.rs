//! Tanner graphs of mixed-alphabet check matrices.

use std::collections::VecDeque;
use std::fmt::{self, Write as _};

use crate::gf2::BinaryMatrix;
use crate::matrix::GdsCheckMatrix;
use crate::pauli::Pauli;

/// Label carried by an edge: the Pauli entry for quaternary columns, `1` for
/// binary ones.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeLabel {
    Pauli(Pauli),
    One,
}

impl fmt::Display for EdgeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EdgeLabel::Pauli(p) => write!(f, "{p}"),
            EdgeLabel::One => write!(f, "1"),
        }
    }
}

/// Bipartite graph with `N + M` variable nodes and `M′` check nodes. Variable
/// `j < N` is quaternary, `j ≥ N` binary.
#[derive(Clone, Debug)]
pub struct TannerGraph {
    n_quaternary: usize,
    n_binary: usize,
    /// N(i): (variable, label) per check, ascending by variable.
    check_adj: Vec<Vec<(usize, EdgeLabel)>>,
    /// M(j): (check, label) per variable, ascending by check.
    var_adj: Vec<Vec<(usize, EdgeLabel)>>,
}

/// Shortest cycle length; `None` for forests.
pub type Girth = Option<usize>;

impl TannerGraph {
    pub fn from_gds(h: &GdsCheckMatrix) -> Self {
        let n = h.n_quaternary();
        let check_adj: Vec<Vec<(usize, EdgeLabel)>> = h
            .rows()
            .iter()
            .map(|row| {
                row.quaternary
                    .iter()
                    .map(|(c, p)| (*c, EdgeLabel::Pauli(*p)))
                    .chain(row.binary.iter().map(|c| (n + c, EdgeLabel::One)))
                    .collect()
            })
            .collect();
        TannerGraph::from_check_adjacency(n, h.m_binary(), check_adj)
    }

    /// Graph of a plain binary matrix (all variables binary).
    pub fn from_binary(b: &BinaryMatrix) -> Self {
        let check_adj = b
            .rows()
            .iter()
            .map(|r| r.ones().map(|c| (c, EdgeLabel::One)).collect())
            .collect();
        TannerGraph::from_check_adjacency(0, b.ncols(), check_adj)
    }

    fn from_check_adjacency(
        n_quaternary: usize,
        n_binary: usize,
        check_adj: Vec<Vec<(usize, EdgeLabel)>>,
    ) -> Self {
        let mut var_adj = vec![Vec::new(); n_quaternary + n_binary];
        for (i, nbrs) in check_adj.iter().enumerate() {
            for (j, label) in nbrs {
                var_adj[*j].push((i, *label));
            }
        }
        TannerGraph {
            n_quaternary,
            n_binary,
            check_adj,
            var_adj,
        }
    }

    pub fn num_checks(&self) -> usize {
        self.check_adj.len()
    }

    pub fn num_variables(&self) -> usize {
        self.var_adj.len()
    }

    pub fn n_quaternary(&self) -> usize {
        self.n_quaternary
    }

    pub fn n_binary(&self) -> usize {
        self.n_binary
    }

    pub fn num_edges(&self) -> usize {
        self.check_adj.iter().map(Vec::len).sum()
    }

    pub fn check_neighbors(&self, i: usize) -> &[(usize, EdgeLabel)] {
        &self.check_adj[i]
    }

    pub fn variable_neighbors(&self, j: usize) -> &[(usize, EdgeLabel)] {
        &self.var_adj[j]
    }

    /// Whether the graph has no cycles.
    pub fn is_forest(&self) -> bool {
        self.girth().is_none()
    }

    /// Length of a shortest cycle, by BFS from every node.
    pub fn girth(&self) -> Girth {
        let nv = self.num_variables();
        let total = nv + self.num_checks();
        // node ids: variables 0..nv, checks nv..
        let neighbors = |u: usize| -> Box<dyn Iterator<Item = usize> + '_> {
            if u < nv {
                Box::new(self.var_adj[u].iter().map(move |(i, _)| nv + i))
            } else {
                Box::new(self.check_adj[u - nv].iter().map(|(j, _)| *j))
            }
        };
        let mut best = usize::MAX;
        let mut dist = vec![usize::MAX; total];
        let mut parent = vec![usize::MAX; total];
        let mut queue = VecDeque::new();
        let mut touched = Vec::new();
        for src in 0..total {
            for &t in &touched {
                dist[t] = usize::MAX;
                parent[t] = usize::MAX;
            }
            touched.clear();
            queue.clear();
            dist[src] = 0;
            touched.push(src);
            queue.push_back(src);
            while let Some(u) = queue.pop_front() {
                if 2 * dist[u] + 1 >= best {
                    break;
                }
                for v in neighbors(u) {
                    if dist[v] == usize::MAX {
                        dist[v] = dist[u] + 1;
                        parent[v] = u;
                        touched.push(v);
                        queue.push_back(v);
                    } else if parent[u] != v {
                        best = best.min(dist[u] + dist[v] + 1);
                    }
                }
            }
        }
        (best != usize::MAX).then_some(best)
    }

    /// Graphviz rendering: variables as circles, checks as boxes, edges
    /// labelled with their symbol.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph tanner {\n");
        for j in 0..self.num_variables() {
            let label = if j < self.n_quaternary {
                format!("E{}", j + 1)
            } else {
                format!("e{}", j - self.n_quaternary + 1)
            };
            writeln!(out, "  v{j} [shape=circle, label=\"{label}\"];").unwrap();
        }
        for i in 0..self.num_checks() {
            writeln!(out, "  c{i} [shape=box, label=\"\"];").unwrap();
        }
        for (i, nbrs) in self.check_adj.iter().enumerate() {
            for (j, label) in nbrs {
                writeln!(out, "  c{i} -- v{j} [label=\"{label}\"];").unwrap();
            }
        }
        out.push_str("}\n");
        out
    }
}

/// Girth of the graph of a binary matrix.
pub fn binary_girth(b: &BinaryMatrix) -> Girth {
    TannerGraph::from_binary(b).girth()
}
