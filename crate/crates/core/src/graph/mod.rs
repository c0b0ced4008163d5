//! Immutable CSR adjacency shared by every other module.
//!
//! A vertex's neighbor slice is the set of vertices its hidden state depends
//! on. In undirected mode the adjacency is symmetric; in directed mode an
//! input pair `(u, v)` means `u -> v`, so `u` is stored in the slice of `v`.
//! Slices are sorted ascending and deduplicated, and self-loops are dropped.

mod gen;
mod io;

pub use gen::{gen_planted_partition_graph, gen_random_graph, planted_block_of};
pub use io::{load_edge_list, parse_edge_list, save_edge_list, write_edge_list};

use serde::Serialize;

use crate::error::{Error, Result};

pub type VertexId = u32;

/// Feature width used when a graph is built without one.
pub const DEFAULT_FEATURE_DIM: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    row_offsets: Vec<usize>,
    col_indices: Vec<VertexId>,
    feature_dim: usize,
    undirected: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GraphStats {
    pub avg_degree: f64,
    pub max_degree: usize,
    pub num_isolated: usize,
}

impl Graph {
    /// Builds a canonical CSR graph from an edge list. Duplicates are merged.
    pub fn build(edges: &[(VertexId, VertexId)], num_vertices: usize, undirected: bool) -> Result<Self> {
        if num_vertices == 0 {
            return Err(Error::input("graph must have at least one vertex"));
        }
        if num_vertices > VertexId::MAX as usize {
            return Err(Error::input(format!("{num_vertices} vertices exceeds the u32 id space")));
        }
        let mut pairs = Vec::with_capacity(if undirected { edges.len() * 2 } else { edges.len() });
        for &(u, v) in edges {
            for id in [u, v] {
                if id as usize >= num_vertices {
                    return Err(Error::input(format!(
                        "vertex id {id} out of range for {num_vertices} vertices"
                    )));
                }
            }
            if u == v {
                continue;
            }
            // (row, neighbor)
            pairs.push((v, u));
            if undirected {
                pairs.push((u, v));
            }
        }
        pairs.sort_unstable();
        pairs.dedup();

        let mut row_offsets = vec![0usize; num_vertices + 1];
        for &(row, _) in &pairs {
            row_offsets[row as usize + 1] += 1;
        }
        for i in 0..num_vertices {
            row_offsets[i + 1] += row_offsets[i];
        }
        let col_indices = pairs.into_iter().map(|(_, c)| c).collect();
        Ok(Graph {
            row_offsets,
            col_indices,
            feature_dim: DEFAULT_FEATURE_DIM,
            undirected,
        })
    }

    /// Builds an undirected graph from per-vertex lists of strictly larger,
    /// ascending neighbor ids. Used by the generators to avoid a global sort.
    pub(crate) fn from_upper_lists(upper: Vec<Vec<VertexId>>) -> Self {
        let n = upper.len();
        let mut degree = vec![0usize; n];
        for (u, list) in upper.iter().enumerate() {
            degree[u] += list.len();
            for &v in list {
                degree[v as usize] += 1;
            }
        }
        let mut row_offsets = vec![0usize; n + 1];
        for i in 0..n {
            row_offsets[i + 1] = row_offsets[i] + degree[i];
        }
        let mut cursor = row_offsets[..n].to_vec();
        let mut col_indices = vec![0 as VertexId; row_offsets[n]];
        // Lower neighbors arrive in ascending order of u, then each row's own
        // upper list (all ids greater than the row) is appended.
        for (u, list) in upper.iter().enumerate() {
            for &v in list {
                col_indices[cursor[v as usize]] = u as VertexId;
                cursor[v as usize] += 1;
            }
        }
        for (u, list) in upper.into_iter().enumerate() {
            let start = cursor[u];
            col_indices[start..start + list.len()].copy_from_slice(&list);
        }
        Graph {
            row_offsets,
            col_indices,
            feature_dim: DEFAULT_FEATURE_DIM,
            undirected: true,
        }
    }

    pub fn with_feature_dim(mut self, feature_dim: usize) -> Self {
        self.feature_dim = feature_dim;
        self
    }

    pub fn num_vertices(&self) -> usize {
        self.row_offsets.len() - 1
    }

    /// Number of stored (directed) adjacency entries.
    pub fn num_edges(&self) -> usize {
        self.col_indices.len()
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn is_undirected(&self) -> bool {
        self.undirected
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[VertexId] {
        &self.col_indices
    }

    #[inline]
    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        let v = v as usize;
        &self.col_indices[self.row_offsets[v]..self.row_offsets[v + 1]]
    }

    #[inline]
    pub fn degree(&self, v: VertexId) -> usize {
        let v = v as usize;
        self.row_offsets[v + 1] - self.row_offsets[v]
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> {
        0..self.num_vertices() as VertexId
    }

    /// Iterates `(v, u)` for every stored entry, `u` being a dependency of `v`.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.vertices()
            .flat_map(move |v| self.neighbors(v).iter().map(move |&u| (v, u)))
    }

    /// Number of undirected pairs for symmetric graphs, entries otherwise.
    pub fn num_edge_pairs(&self) -> usize {
        if self.undirected {
            self.num_edges() / 2
        } else {
            self.num_edges()
        }
    }

    pub fn stats(&self) -> GraphStats {
        let mut max_degree = 0;
        let mut num_isolated = 0;
        for v in self.vertices() {
            let d = self.degree(v);
            max_degree = max_degree.max(d);
            if d == 0 {
                num_isolated += 1;
            }
        }
        GraphStats {
            avg_degree: self.num_edges() as f64 / self.num_vertices() as f64,
            max_degree,
            num_isolated,
        }
    }

    /// Subgraph induced by `vertices` (sorted, unique). Local id `i` maps to
    /// `vertices[i]`; since the map is monotone, neighbor slices stay sorted.
    pub fn induced(&self, vertices: &[VertexId]) -> Graph {
        debug_assert!(vertices.windows(2).all(|w| w[0] < w[1]));
        let mut local = vec![u32::MAX; self.num_vertices()];
        for (i, &v) in vertices.iter().enumerate() {
            local[v as usize] = i as u32;
        }
        let mut row_offsets = Vec::with_capacity(vertices.len() + 1);
        row_offsets.push(0);
        let mut col_indices = Vec::new();
        for &v in vertices {
            col_indices.extend(
                self.neighbors(v)
                    .iter()
                    .map(|&u| local[u as usize])
                    .filter(|&l| l != u32::MAX),
            );
            row_offsets.push(col_indices.len());
        }
        Graph {
            row_offsets,
            col_indices,
            feature_dim: self.feature_dim,
            undirected: self.undirected,
        }
    }

    /// Relabels vertex `v` to `perm[v]`.
    pub fn permuted(&self, perm: &[VertexId]) -> Graph {
        assert_eq!(perm.len(), self.num_vertices());
        let edges: Vec<_> = self
            .edges()
            .map(|(v, u)| (perm[u as usize], perm[v as usize]))
            .collect();
        Graph::build(&edges, self.num_vertices(), false)
            .map(|mut g| {
                g.undirected = self.undirected;
                g.feature_dim = self.feature_dim;
                g
            })
            .expect("permutation of a valid graph is valid")
    }

    /// Checks the structural invariants; used by tests and after loading.
    pub fn validate(&self) -> Result<()> {
        let n = self.num_vertices();
        if self.row_offsets[0] != 0 || self.row_offsets[n] != self.col_indices.len() {
            return Err(Error::Consistency("row offsets do not span the column array".into()));
        }
        for v in self.vertices() {
            let s = self.neighbors(v);
            if self.row_offsets[v as usize] > self.row_offsets[v as usize + 1] {
                return Err(Error::Consistency(format!("row offsets decrease at {v}")));
            }
            if s.iter().any(|&u| u as usize >= n || u == v) {
                return Err(Error::Consistency(format!("bad neighbor id in row {v}")));
            }
            if s.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Consistency(format!("row {v} is not strictly ascending")));
            }
            if self.undirected && s.iter().any(|&u| self.neighbors(u).binary_search(&v).is_err()) {
                return Err(Error::Consistency(format!("row {v} breaks symmetry")));
            }
        }
        Ok(())
    }
}
