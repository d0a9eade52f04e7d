use serde::{Deserialize, Serialize};

use super::barcode::{Barcode, Interval};
use crate::complexes::delaunay_2d;
use crate::geometry::{DistanceMatrix, MetricSpace, PointCloud};

/// Disjoint-set forest with path halving and union by size.
#[derive(Debug, Clone)]
pub(crate) struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    pub(crate) fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let p = self.parent[x as usize];
            self.parent[x as usize] = self.parent[p as usize];
            x = p;
        }
        x
    }

    /// Merges the sets of `a` and `b`; returns the new root, or `None` if already joined.
    pub(crate) fn union(&mut self, a: u32, b: u32) -> Option<u32> {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return None;
        }
        if self.size[ra as usize] < self.size[rb as usize] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb as usize] = ra;
        self.size[ra as usize] += self.size[rb as usize];
        Some(ra)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MstEdge {
    pub i: usize,
    pub j: usize,
    pub length: f64,
}

/// A minimal spanning tree, edges sorted by `(length, i, j)` with `i < j`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MstResult {
    pub edges: Vec<MstEdge>,
}

impl MstResult {
    pub fn total_length(&self) -> f64 {
        self.edges.iter().map(|e| e.length).sum()
    }

    pub fn lengths(&self) -> Vec<f64> {
        self.edges.iter().map(|e| e.length).collect()
    }
}

fn kruskal(n: usize, mut candidates: Vec<MstEdge>) -> MstResult {
    candidates.sort_by(|a, b| {
        a.length
            .total_cmp(&b.length)
            .then(a.i.cmp(&b.i))
            .then(a.j.cmp(&b.j))
    });
    let mut uf = UnionFind::new(n);
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    for e in candidates {
        if uf.union(e.i as u32, e.j as u32).is_some() {
            edges.push(e);
            if edges.len() + 1 == n {
                break;
            }
        }
    }
    MstResult { edges }
}

/// Kruskal's algorithm on the complete graph of a distance matrix.
pub fn mst(d: &DistanceMatrix) -> MstResult {
    let n = d.len();
    let mut candidates = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            candidates.push(MstEdge { i, j, length: d.get(i, j) });
        }
    }
    kruskal(n, candidates)
}

/// Minimal spanning tree of a cloud without materialising the distance matrix.
///
/// Planar clouds use Kruskal on the Delaunay edges, which contain a Euclidean
/// MST; anything else runs dense Prim in `O(n²)` time and `O(n)` memory.
pub fn mst_of_cloud(cloud: &PointCloud) -> MstResult {
    let n = cloud.len();
    if cloud.space() == (MetricSpace::Euclidean { dim: 2 }) && n >= 3 {
        if let Ok(tri) = delaunay_2d(cloud) {
            let candidates = tri
                .edges()
                .into_iter()
                .chain(tri.duplicates().iter().map(|&(a, b)| (a.min(b), a.max(b))))
                .map(|(i, j)| MstEdge {
                    i,
                    j,
                    length: cloud.distance(i, j),
                })
                .collect();
            return kruskal(n, candidates);
        }
    }
    prim(cloud)
}

fn prim(cloud: &PointCloud) -> MstResult {
    let n = cloud.len();
    if n < 2 {
        return MstResult::default();
    }
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut parent = vec![0usize; n];
    let mut edges = Vec::with_capacity(n - 1);
    let mut current = 0;
    in_tree[0] = true;
    for _ in 1..n {
        let p = cloud.point(current);
        let mut next = usize::MAX;
        let mut next_d = f64::INFINITY;
        for v in 0..n {
            if in_tree[v] {
                continue;
            }
            let d = cloud.space().distance(p, cloud.point(v));
            if d < best[v] {
                best[v] = d;
                parent[v] = current;
            }
            if best[v] < next_d || next == usize::MAX {
                next_d = best[v];
                next = v;
            }
        }
        in_tree[next] = true;
        let (i, j) = (parent[next].min(next), parent[next].max(next));
        edges.push(MstEdge { i, j, length: next_d });
        current = next;
    }
    edges.sort_by(|a, b| {
        a.length
            .total_cmp(&b.length)
            .then(a.i.cmp(&b.i))
            .then(a.j.cmp(&b.j))
    });
    MstResult { edges }
}

/// Degree-0 reduced barcode from a spanning tree: one `(0, |e|/2)` per edge.
///
/// Edges of length zero (coincident points) give empty intervals and are dropped.
pub fn ph0_from_mst(tree: &MstResult) -> Barcode {
    let finite = tree
        .edges
        .iter()
        .filter(|e| e.length > 0.0)
        .map(|e| Interval {
            birth: 0.0,
            death: e.length / 2.0,
        })
        .collect();
    Barcode::from_parts(vec![finite], vec![])
}

/// Degree-0 reduced barcode of the Čech (equivalently Rips) filtration.
pub fn ph0_reduced(d: &DistanceMatrix) -> Barcode {
    ph0_from_mst(&mst(d))
}
