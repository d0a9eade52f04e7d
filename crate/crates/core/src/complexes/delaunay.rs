//! Incremental Bowyer–Watson Delaunay triangulation in the plane.
//!
//! The convex hull is closed off with ghost triangles `(a, b, ∞)`, so points
//! outside the current hull are inserted by the same cavity procedure as
//! interior points. Orientation and incircle signs come from exact adaptive
//! predicates.
//!
//! Points are inserted in index order after the seed triangle (the first
//! three non-collinear points). A point on the circumcircle of an existing
//! triangle is not in conflict with it, so cocircular configurations keep the
//! triangles built from lower-index points. Exact duplicates of an earlier
//! point are not inserted and are reported in [`Triangulation2D::duplicates`].

use std::collections::HashMap;

use robust::{incircle, orient2d, Coord};

use crate::error::{input, Error, Result};
use crate::geometry::{MetricSpace, PointCloud};

const GHOST: u32 = u32::MAX;
const NONE: u32 = u32::MAX;

/// A planar Delaunay triangulation of a point cloud.
#[derive(Debug, Clone, PartialEq)]
pub struct Triangulation2D {
    points: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    duplicates: Vec<(usize, usize)>,
    hull_size: usize,
}

impl Triangulation2D {
    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    /// Counter-clockwise triangles, each starting at its smallest vertex, sorted.
    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    /// `(duplicate, original)` index pairs for coincident input points.
    pub fn duplicates(&self) -> &[(usize, usize)] {
        &self.duplicates
    }

    /// Number of vertices on the convex hull boundary (collinear ones included).
    pub fn hull_size(&self) -> usize {
        self.hull_size
    }

    /// Distinct edges as sorted `(u, v)` pairs, ascending.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut edges: Vec<(usize, usize)> = self
            .triangles
            .iter()
            .flat_map(|t| {
                [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])]
                    .into_iter()
                    .map(|(a, b)| (a.min(b), a.max(b)))
            })
            .collect();
        edges.sort_unstable();
        edges.dedup();
        edges
    }

    /// True when no input point lies strictly inside any triangle's circumcircle.
    pub fn is_delaunay(&self) -> bool {
        let c = |i: usize| Coord {
            x: self.points[i][0],
            y: self.points[i][1],
        };
        self.triangles.iter().all(|t| {
            (0..self.points.len())
                .filter(|p| !t.contains(p))
                .all(|p| incircle(c(t[0]), c(t[1]), c(t[2]), c(p)) <= 0.0)
        })
    }
}

/// Simplex counts of a triangulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DelaunayCounts {
    pub vertices: usize,
    pub edges: usize,
    pub triangles: usize,
}

impl DelaunayCounts {
    pub fn total(&self) -> usize {
        self.vertices + self.edges + self.triangles
    }
}

pub fn count_delaunay_simplices(tri: &Triangulation2D) -> DelaunayCounts {
    DelaunayCounts {
        vertices: tri.points.len() - tri.duplicates.len(),
        edges: tri.edges().len(),
        triangles: tri.triangles.len(),
    }
}

#[derive(Debug, Clone, Copy)]
struct Tri {
    v: [u32; 3],
    nb: [u32; 3],
    alive: bool,
}

enum Located {
    Triangle(u32),
    Duplicate(u32),
}

struct Builder<'a> {
    pts: &'a [[f64; 2]],
    tris: Vec<Tri>,
    free: Vec<u32>,
    last: u32,
    mark: Vec<u32>,
    epoch: u32,
    walk_offset: usize,
}

impl<'a> Builder<'a> {
    fn coord(&self, v: u32) -> Coord<f64> {
        let p = self.pts[v as usize];
        Coord { x: p[0], y: p[1] }
    }

    fn alloc(&mut self, v: [u32; 3]) -> u32 {
        let tri = Tri {
            v,
            nb: [NONE; 3],
            alive: true,
        };
        if let Some(id) = self.free.pop() {
            self.tris[id as usize] = tri;
            id
        } else {
            self.tris.push(tri);
            self.mark.push(0);
            (self.tris.len() - 1) as u32
        }
    }

    fn conflicts(&self, t: u32, p: Coord<f64>) -> bool {
        let tri = &self.tris[t as usize];
        let (a, b) = (self.coord(tri.v[0]), self.coord(tri.v[1]));
        if tri.v[2] == GHOST {
            let o = orient2d(a, b, p);
            if o != 0.0 {
                return o > 0.0;
            }
            // on the hull line: conflict only strictly inside the segment
            let along_a = (p.x - a.x) * (b.x - a.x) + (p.y - a.y) * (b.y - a.y);
            let along_b = (p.x - b.x) * (a.x - b.x) + (p.y - b.y) * (a.y - b.y);
            along_a > 0.0 && along_b > 0.0
        } else {
            incircle(a, b, self.coord(tri.v[2]), p) > 0.0
        }
    }

    fn locate(&mut self, p: Coord<f64>) -> Located {
        let mut t = self.last;
        loop {
            let tri = self.tris[t as usize];
            let mut moved = false;
            self.walk_offset = (self.walk_offset + 1) % 3;
            for step in 0..3 {
                let k = (step + self.walk_offset) % 3;
                let (a, b) = (tri.v[(k + 1) % 3], tri.v[(k + 2) % 3]);
                if orient2d(self.coord(a), self.coord(b), p) < 0.0 {
                    let nb = tri.nb[k];
                    if self.tris[nb as usize].v[2] == GHOST {
                        return Located::Triangle(nb);
                    }
                    t = nb;
                    moved = true;
                    break;
                }
            }
            if !moved {
                for &v in &tri.v {
                    let q = self.coord(v);
                    if q.x == p.x && q.y == p.y {
                        return Located::Duplicate(v);
                    }
                }
                return Located::Triangle(t);
            }
        }
    }

    /// Links `ids` to one another wherever they share a directed edge pair.
    fn link(&mut self, ids: &[u32], edges: &mut HashMap<(u32, u32), (u32, usize)>) {
        for &id in ids {
            let v = self.tris[id as usize].v;
            for s in 0..3 {
                let key = (v[(s + 1) % 3], v[(s + 2) % 3]);
                if let Some((other, slot)) = edges.remove(&(key.1, key.0)) {
                    self.tris[id as usize].nb[s] = other;
                    self.tris[other as usize].nb[slot] = id;
                } else {
                    edges.insert(key, (id, s));
                }
            }
        }
    }

    fn insert(&mut self, pi: u32) -> Option<u32> {
        let p = self.coord(pi);
        let seed = match self.locate(p) {
            Located::Duplicate(v) => return Some(v),
            Located::Triangle(t) => t,
        };
        self.epoch += 1;
        let (inside, outside) = (2 * self.epoch, 2 * self.epoch + 1);
        self.mark[seed as usize] = inside;
        let mut cavity = vec![seed];
        let mut stack = vec![seed];
        let mut boundary: Vec<([u32; 3], usize, u32)> = Vec::new();
        while let Some(t) = stack.pop() {
            let tri = self.tris[t as usize];
            for k in 0..3 {
                let nb = tri.nb[k];
                let m = self.mark[nb as usize];
                if m == inside {
                    continue;
                }
                if m != outside && self.conflicts(nb, p) {
                    self.mark[nb as usize] = inside;
                    stack.push(nb);
                    cavity.push(nb);
                } else {
                    self.mark[nb as usize] = outside;
                    boundary.push((tri.v, k, nb));
                }
            }
        }
        for &t in &cavity {
            self.tris[t as usize].alive = false;
            self.free.push(t);
        }
        let mut created = Vec::with_capacity(boundary.len());
        for (v, k, nb) in boundary {
            let mut w = v;
            w[k] = pi;
            let edge = (v[(k + 1) % 3], v[(k + 2) % 3]);
            let rot = w.iter().position(|&x| x == GHOST).map_or(0, |g| (g + 1) % 3);
            let w = [w[rot], w[(rot + 1) % 3], w[(rot + 2) % 3]];
            let id = self.alloc(w);
            let slot = (k + 3 - rot) % 3;
            self.tris[id as usize].nb[slot] = nb;
            let outer = &mut self.tris[nb as usize];
            for j in 0..3 {
                if outer.v[(j + 1) % 3] == edge.1 && outer.v[(j + 2) % 3] == edge.0 {
                    outer.nb[j] = id;
                }
            }
            created.push(id);
        }
        let mut edges = HashMap::with_capacity(created.len() * 2);
        for &id in &created {
            let tri = self.tris[id as usize];
            for s in 0..3 {
                if tri.nb[s] != NONE {
                    continue;
                }
                let key = (tri.v[(s + 1) % 3], tri.v[(s + 2) % 3]);
                if let Some((other, slot)) = edges.remove(&(key.1, key.0)) {
                    self.tris[id as usize].nb[s] = other;
                    self.tris[other as usize].nb[slot] = id;
                } else {
                    edges.insert(key, (id, s));
                }
            }
        }
        debug_assert!(edges.is_empty());
        if let Some(&real) = created.iter().find(|&&id| self.tris[id as usize].v[2] != GHOST) {
            self.last = real;
        }
        None
    }
}

/// Delaunay triangulation of a planar cloud.
pub fn delaunay_2d(cloud: &PointCloud) -> Result<Triangulation2D> {
    if cloud.space() != (MetricSpace::Euclidean { dim: 2 }) {
        return input("Delaunay triangulation needs a cloud in R^2");
    }
    let pts: Vec<[f64; 2]> = cloud.points().map(|p| [p[0], p[1]]).collect();
    let n = pts.len();
    if n < 3 {
        return Err(Error::Degenerate(format!("{n} points cannot be triangulated")));
    }
    if n >= GHOST as usize {
        return input("too many points");
    }
    let c = |i: usize| Coord {
        x: pts[i][0],
        y: pts[i][1],
    };
    let i1 = (1..n)
        .find(|&j| pts[j] != pts[0])
        .ok_or_else(|| Error::Degenerate("all points coincide".into()))?;
    let i2 = (i1 + 1..n)
        .find(|&j| orient2d(c(0), c(i1), c(j)) != 0.0)
        .ok_or_else(|| Error::Degenerate("all points are collinear".into()))?;
    let seed = if orient2d(c(0), c(i1), c(i2)) > 0.0 {
        [0, i1 as u32, i2 as u32]
    } else {
        [0, i2 as u32, i1 as u32]
    };

    let mut b = Builder {
        pts: &pts,
        tris: Vec::with_capacity(2 * n + 4),
        free: Vec::new(),
        last: 0,
        mark: Vec::with_capacity(2 * n + 4),
        epoch: 0,
        walk_offset: 0,
    };
    let mut ids = vec![b.alloc(seed)];
    for k in 0..3 {
        ids.push(b.alloc([seed[(k + 2) % 3], seed[(k + 1) % 3], GHOST]));
    }
    b.link(&ids, &mut HashMap::new());

    let mut duplicates = Vec::new();
    for i in (1..n).filter(|&i| i != i1 && i != i2) {
        if let Some(original) = b.insert(i as u32) {
            duplicates.push((i, original as usize));
        }
    }

    let mut triangles = Vec::new();
    let mut hull_size = 0;
    for t in b.tris.iter().filter(|t| t.alive) {
        if t.v[2] == GHOST {
            hull_size += 1;
            continue;
        }
        let v = t.v.map(|x| x as usize);
        let r = (0..3).min_by_key(|&k| v[k]).unwrap();
        triangles.push([v[r], v[(r + 1) % 3], v[(r + 2) % 3]]);
    }
    triangles.sort_unstable();
    duplicates.sort_unstable();
    Ok(Triangulation2D {
        points: pts,
        triangles,
        duplicates,
        hull_size,
    })
}
