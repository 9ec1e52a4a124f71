//! Incidence and intersection graphs of a group model, tree decompositions
//! and nice tree decompositions.

mod decomposition;
mod nice;
mod treewidth;

pub use decomposition::{
    lift_intersection_to_incidence, parse_decomposition, write_decomposition, DecompositionError,
    TreeDecomposition, Violation,
};
pub use nice::{to_nice, NiceKind, NiceNode, NiceTreeDecomposition};
pub use treewidth::{compute_decomposition, elimination_decomposition, min_fill_order, DEFAULT_EXACT_WIDTH_LIMIT};

use crate::model::GroupModel;

/// Simple undirected graph on `0..n` with sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Graph {
    adj: Vec<Vec<usize>>,
}

impl Graph {
    pub fn new(n: usize) -> Self {
        Graph { adj: vec![Vec::new(); n] }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut g = Graph::new(n);
        for &(u, v) in edges {
            g.add_edge(u, v);
        }
        g
    }

    /// Adds `{u, v}`; self-loops and repeated edges are ignored.
    pub fn add_edge(&mut self, u: usize, v: usize) {
        if u == v {
            return;
        }
        if let Err(pos) = self.adj[u].binary_search(&v) {
            self.adj[u].insert(pos, v);
            let pos = self.adj[v].binary_search(&u).unwrap_err();
            self.adj[v].insert(pos, u);
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.adj.len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    pub fn num_edges(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edges `(u, v)` with `u < v`, lexicographic.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.num_edges());
        for (u, nb) in self.adj.iter().enumerate() {
            for &v in nb {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }
}

/// Bipartite element/group graph. Element `i` is vertex `i`, group `j` is vertex `N + j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncidenceGraph {
    pub num_elements: usize,
    pub num_groups: usize,
    pub graph: Graph,
}

impl IncidenceGraph {
    pub fn element_vertex(&self, i: usize) -> usize {
        i
    }

    pub fn group_vertex(&self, j: usize) -> usize {
        self.num_elements + j
    }

    pub fn is_group(&self, v: usize) -> bool {
        v >= self.num_elements
    }
}

/// Groups are adjacent when they share an element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntersectionGraph {
    pub graph: Graph,
}

pub fn incidence_graph(model: &GroupModel) -> IncidenceGraph {
    let n = model.ground_size();
    let m = model.num_groups();
    let mut graph = Graph::new(n + m);
    for (j, g) in model.groups().iter().enumerate() {
        for &i in g {
            graph.add_edge(i, n + j);
        }
    }
    IncidenceGraph { num_elements: n, num_groups: m, graph }
}

pub fn intersection_graph(model: &GroupModel) -> IntersectionGraph {
    let mut graph = Graph::new(model.num_groups());
    for i in 0..model.ground_size() {
        let owners = model.memberships(i);
        for (a, &ga) in owners.iter().enumerate() {
            for &gb in &owners[a + 1..] {
                graph.add_edge(ga, gb);
            }
        }
    }
    IntersectionGraph { graph }
}

pub fn build_graphs(model: &GroupModel) -> (IncidenceGraph, IntersectionGraph) {
    (incidence_graph(model), intersection_graph(model))
}
