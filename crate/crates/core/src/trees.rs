//! Tree metrics as symmetric-difference kernels.
//!
//! Rooting a tree at a vertex o assigns each vertex x the geodesic [o, x],
//! a union of whole edges. The symmetric difference of two geodesics is
//! exactly the path between their endpoints, so path distance is the
//! measure of a symmetric difference: one ground point per edge, weighted
//! by its length. The kernel does not depend on the chosen root.

use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::measure::GroundedRepresentation;
use crate::pattern::Pattern;

/// A finite rooted tree with positive edge lengths. Vertices are the
/// labels occurring in the edges plus the root; construction validates
/// the tree axioms.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(try_from = "TreeData")]
pub struct Tree {
    root: String,
    edges: Vec<(String, String, f64)>,
    vertices: Vec<String>,
    /// Per edge, the membership pattern over sorted vertices: 1 exactly on
    /// the subtree hanging below the edge (the side away from the root).
    edge_patterns: Vec<Pattern>,
}

#[derive(Deserialize)]
struct TreeData {
    root: String,
    edges: Vec<(String, String, f64)>,
}

impl TryFrom<TreeData> for Tree {
    type Error = Error;

    fn try_from(data: TreeData) -> Result<Self> {
        Tree::new(data.root, data.edges)
    }
}

impl Serialize for Tree {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut state = serializer.serialize_struct("Tree", 2)?;
        state.serialize_field("root", &self.root)?;
        state.serialize_field("edges", &self.edges)?;
        state.end()
    }
}

impl Tree {
    pub fn new(root: impl Into<String>, edges: Vec<(String, String, f64)>) -> Result<Self> {
        let root = root.into();
        let mut vertices: Vec<String> = edges
            .iter()
            .flat_map(|(u, v, _)| [u.clone(), v.clone()])
            .chain(std::iter::once(root.clone()))
            .collect();
        vertices.sort();
        vertices.dedup();
        let n = vertices.len();
        if n > Pattern::MAX_LEN {
            return Err(Error::SizeLimit { n, cap: Pattern::MAX_LEN, what: "tree vertices" });
        }
        let index = |label: &str| vertices.iter().position(|v| v == label).expect("collected");

        let mut seen_pairs: Vec<(usize, usize)> = Vec::with_capacity(edges.len());
        for (u, v, len) in &edges {
            if u == v {
                return Err(Error::validation(format!("self-loop at {u:?}")));
            }
            if !(len.is_finite() && *len > 0.0) {
                return Err(Error::validation(format!(
                    "edge ({u:?}, {v:?}) needs a positive finite length, got {len}"
                )));
            }
            let (a, b) = (index(u), index(v));
            let key = (a.min(b), a.max(b));
            if seen_pairs.contains(&key) {
                return Err(Error::validation(format!("duplicate edge ({u:?}, {v:?})")));
            }
            seen_pairs.push(key);
        }
        if edges.len() != n - 1 {
            return Err(Error::validation(format!(
                "a tree on {n} vertices needs {} edges, got {}",
                n - 1,
                edges.len()
            )));
        }

        // Breadth-first walk from the root; a tree is connected with
        // |V| - 1 edges, so full coverage certifies the shape.
        let mut adjacency = vec![Vec::new(); n];
        for (e, &(a, b)) in seen_pairs.iter().enumerate() {
            adjacency[a].push((b, e));
            adjacency[b].push((a, e));
        }
        let root_idx = index(&root);
        let mut parent_edge = vec![usize::MAX; n];
        let mut order = vec![root_idx];
        let mut visited = vec![false; n];
        visited[root_idx] = true;
        let mut head = 0;
        while head < order.len() {
            let v = order[head];
            head += 1;
            for &(w, e) in &adjacency[v] {
                if !visited[w] {
                    visited[w] = true;
                    parent_edge[w] = e;
                    order.push(w);
                }
            }
        }
        if order.len() != n {
            return Err(Error::validation(
                "edges do not connect all vertices to the root".to_string(),
            ));
        }

        // Subtree masks accumulate bottom-up along the reversed walk.
        let mut subtree = vec![0u64; n];
        let mut edge_masks = vec![0u64; edges.len()];
        for &v in order.iter().rev() {
            subtree[v] |= 1 << v;
            let e = parent_edge[v];
            if e != usize::MAX {
                edge_masks[e] = subtree[v];
                let (a, b) = seen_pairs[e];
                let p = if a == v { b } else { a };
                subtree[p] |= subtree[v];
            }
        }
        let edge_patterns = edge_masks
            .into_iter()
            .map(|bits| Pattern::from_bits(bits, n).expect("n fits"))
            .collect();

        Ok(Tree { root, edges, vertices, edge_patterns })
    }

    pub fn root(&self) -> &str {
        &self.root
    }

    /// Sorted vertex labels; the label order of every derived kernel.
    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn edges(&self) -> &[(String, String, f64)] {
        &self.edges
    }
}

/// One ground point per edge, weighted by its length, with membership
/// pattern marking the vertices whose root geodesic uses the edge. The
/// derived kernel is the path-distance kernel.
pub fn tree_representation(tree: &Tree) -> GroundedRepresentation {
    let points = tree
        .edge_patterns
        .iter()
        .zip(&tree.edges)
        .map(|(pattern, (_, _, len))| (*pattern, *len))
        .collect();
    GroundedRepresentation::new(tree.vertices.clone(), points)
        .expect("tree invariants imply a valid representation")
}

/// Shortest-path distances between all vertices. Computed through the
/// grounded representation, whose edge order fixes the summation order,
/// so the result is bitwise independent of the root.
pub fn distance_kernel(tree: &Tree) -> Result<Kernel> {
    tree_representation(tree).symmetric_difference_kernel()
}
