//! Filtered simplicial complexes built from point clouds.
//!
//! Filtration values are radii: the value of a simplex is the smallest `ε`
//! at which it enters the complex.

mod alpha;
mod cech;
mod delaunay;
mod rips;

pub use alpha::{build_alpha_2d, circumradius};
pub use cech::{build_cech_oracle, build_cech_oracle_with_limit, miniball_radius, CECH_ORACLE_MAX_POINTS};
pub use delaunay::{count_delaunay_simplices, delaunay_2d, DelaunayCounts, Triangulation2D};
pub use rips::{build_rips, default_rips_scale};

use std::cmp::Ordering;
use std::fmt;
use std::io::{BufRead, Write};

use smallvec::SmallVec;

use crate::error::{input, Error, Result};

/// Vertex list of a simplex, strictly increasing.
pub type Vertices = SmallVec<[u32; 4]>;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Simplex {
    vertices: Vertices,
}

impl Simplex {
    pub fn new(mut vertices: Vertices) -> Result<Self> {
        vertices.sort_unstable();
        if vertices.is_empty() || vertices.windows(2).any(|w| w[0] == w[1]) {
            return input("a simplex needs distinct vertices");
        }
        Ok(Simplex { vertices })
    }

    pub fn from_slice(vertices: &[u32]) -> Result<Self> {
        Self::new(vertices.iter().copied().collect())
    }

    /// Caller guarantees strictly increasing vertices.
    pub(crate) fn from_sorted(vertices: Vertices) -> Self {
        debug_assert!(vertices.windows(2).all(|w| w[0] < w[1]));
        Simplex { vertices }
    }

    pub fn vertices(&self) -> &[u32] {
        &self.vertices
    }

    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    /// Codimension-one faces, the `k`-th omitting vertex `k`.
    pub fn facets(&self) -> impl Iterator<Item = Vertices> + '_ {
        let len = if self.vertices.len() > 1 { self.vertices.len() } else { 0 };
        (0..len).map(move |k| {
            self.vertices
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != k)
                .map(|(_, &v)| v)
                .collect()
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilteredSimplex {
    pub simplex: Simplex,
    pub value: f64,
}

fn canonical(a: &FilteredSimplex, b: &FilteredSimplex) -> Ordering {
    a.value
        .total_cmp(&b.value)
        .then(a.simplex.dim().cmp(&b.simplex.dim()))
        .then_with(|| a.simplex.vertices.cmp(&b.simplex.vertices))
}

/// Simplices with filtration values, sorted by `(value, dim, vertices)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Filtration {
    simplices: Vec<FilteredSimplex>,
}

impl Filtration {
    /// Sorts into canonical order and validates values.
    ///
    /// Face monotonicity is not checked here; see [`Filtration::check_face_monotone`].
    pub fn new(mut simplices: Vec<FilteredSimplex>) -> Result<Self> {
        if let Some(bad) = simplices.iter().find(|s| !(s.value.is_finite() && s.value >= 0.0)) {
            return input(format!("simplex {:?} has value {}", bad.simplex.vertices(), bad.value));
        }
        simplices.sort_by(canonical);
        if simplices.windows(2).any(|w| w[0].simplex == w[1].simplex) {
            return input("filtration lists a simplex twice");
        }
        Ok(Filtration { simplices })
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn simplices(&self) -> &[FilteredSimplex] {
        &self.simplices
    }

    pub fn iter(&self) -> std::slice::Iter<'_, FilteredSimplex> {
        self.simplices.iter()
    }

    pub fn max_dim(&self) -> Option<usize> {
        self.simplices.iter().map(|s| s.simplex.dim()).max()
    }

    pub fn count_by_dim(&self) -> Vec<usize> {
        let mut counts = vec![0; self.max_dim().map_or(0, |d| d + 1)];
        for s in &self.simplices {
            counts[s.simplex.dim()] += 1;
        }
        counts
    }

    /// Checks that every facet is present with a value no larger than its coface.
    pub fn check_face_monotone(&self) -> Result<()> {
        let index = SimplexIndex::new(self);
        for (k, s) in self.simplices.iter().enumerate() {
            for facet in s.simplex.facets() {
                match index.get(&facet) {
                    None => {
                        return input(format!(
                            "facet {:?} of {:?} is missing",
                            facet.as_slice(),
                            s.simplex.vertices()
                        ))
                    }
                    Some(f) if f >= k => {
                        return input(format!(
                            "facet {:?} enters after {:?}",
                            facet.as_slice(),
                            s.simplex.vertices()
                        ))
                    }
                    Some(_) => {}
                }
            }
        }
        Ok(())
    }

    /// Writes one `value dim v0 v1 ...` line per simplex in canonical order.
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        for s in &self.simplices {
            write!(w, "{} {}", s.value, s.simplex.dim())?;
            for v in s.simplex.vertices() {
                write!(w, " {v}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<Self> {
        let mut simplices = Vec::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = || Error::Input(format!("malformed filtration line {}", lineno + 1));
            let mut fields = line.split_whitespace();
            let value: f64 = fields.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
            let dim: usize = fields.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
            let vertices = fields
                .map(|f| f.parse::<u32>().map_err(|_| bad()))
                .collect::<Result<Vertices>>()?;
            if vertices.len() != dim + 1 {
                return Err(bad());
            }
            simplices.push(FilteredSimplex {
                simplex: Simplex::new(vertices)?,
                value,
            });
        }
        Self::new(simplices)
    }
}

impl fmt::Display for Filtration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut buf = Vec::new();
        self.write_text(&mut buf).map_err(|_| fmt::Error)?;
        f.write_str(&String::from_utf8_lossy(&buf))
    }
}

/// Lookup from vertex list to filtration position.
///
/// One lexicographically sorted table per dimension; lookups binary-search.
pub(crate) struct SimplexIndex {
    by_dim: Vec<Vec<(Vertices, u32)>>,
}

impl SimplexIndex {
    pub(crate) fn new(f: &Filtration) -> Self {
        let mut by_dim: Vec<Vec<(Vertices, u32)>> = vec![Vec::new(); f.max_dim().map_or(0, |d| d + 1)];
        for (k, s) in f.simplices.iter().enumerate() {
            by_dim[s.simplex.dim()].push((s.simplex.vertices.clone(), k as u32));
        }
        for table in &mut by_dim {
            table.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        }
        SimplexIndex { by_dim }
    }

    pub(crate) fn get(&self, vertices: &[u32]) -> Option<usize> {
        let table = self.by_dim.get(vertices.len().checked_sub(1)?)?;
        table
            .binary_search_by(|(v, _)| v.as_slice().cmp(vertices))
            .ok()
            .map(|pos| table[pos].1 as usize)
    }
}

/// Shorthand used by builders for vertex lists.
pub(crate) fn verts(vs: &[u32]) -> Vertices {
    vs.iter().copied().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fs(vs: &[u32], value: f64) -> FilteredSimplex {
        FilteredSimplex {
            simplex: Simplex::from_slice(vs).unwrap(),
            value,
        }
    }

    #[test]
    fn canonical_order_breaks_ties_by_dim_then_vertices() {
        let f = Filtration::new(vec![
            fs(&[0, 1], 0.5),
            fs(&[1], 0.0),
            fs(&[0], 0.0),
            fs(&[1, 2], 0.5),
            fs(&[2], 0.0),
            fs(&[0, 1, 2], 0.5),
            fs(&[0, 2], 0.5),
        ])
        .unwrap();
        let order: Vec<Vec<u32>> = f.iter().map(|s| s.simplex.vertices().to_vec()).collect();
        assert_eq!(
            order,
            vec![vec![0], vec![1], vec![2], vec![0, 1], vec![0, 2], vec![1, 2], vec![0, 1, 2]]
        );
        assert!(f.check_face_monotone().is_ok());
    }

    #[test]
    fn detects_missing_and_late_faces() {
        let missing = Filtration::new(vec![fs(&[0], 0.0), fs(&[0, 1], 1.0)]).unwrap();
        assert!(missing.check_face_monotone().is_err());
        let late = Filtration::new(vec![fs(&[0], 0.0), fs(&[1], 2.0), fs(&[0, 1], 1.0)]).unwrap();
        assert!(late.check_face_monotone().is_err());
    }

    #[test]
    fn rejects_bad_values_and_duplicates() {
        assert!(Filtration::new(vec![fs(&[0], -1.0)]).is_err());
        assert!(Filtration::new(vec![fs(&[0], f64::NAN)]).is_err());
        assert!(Filtration::new(vec![fs(&[0], 0.0), fs(&[0], 1.0)]).is_err());
        assert!(Simplex::from_slice(&[1, 1]).is_err());
    }

    #[test]
    fn text_round_trip() {
        let f = Filtration::new(vec![
            fs(&[0], 0.0),
            fs(&[1], 0.0),
            fs(&[0, 1], 0.1 + 0.2),
        ])
        .unwrap();
        let text = f.to_string();
        assert_eq!(text, "0 0 0\n0 0 1\n0.30000000000000004 1 0 1\n");
        assert_eq!(Filtration::read_text(text.as_bytes()).unwrap(), f);
        assert!(Filtration::read_text("0.5 1 0\n".as_bytes()).is_err());
    }
}
