use std::collections::HashMap;

use super::{delaunay_2d, verts, FilteredSimplex, Filtration, Simplex};
use crate::error::Result;
use crate::geometry::{euclidean, PointCloud};

/// Circumradius of a triangle in any dimension, from its side lengths.
///
/// Uses the cancellation-safe form of Heron's formula; returns infinity for
/// collinear vertices.
pub fn circumradius(a: &[f64], b: &[f64], c: &[f64]) -> f64 {
    let mut s = [euclidean(a, b), euclidean(b, c), euclidean(c, a)];
    s.sort_by(|x, y| y.total_cmp(x));
    let [x, y, z] = s;
    let q = (x + (y + z)) * (z - (x - y)) * (z + (x - y)) * (x + (y - z));
    if q <= 0.0 {
        return f64::INFINITY;
    }
    let area = 0.25 * q.sqrt();
    x * y * z / (4.0 * area)
}

/// Alpha filtration of a planar cloud on its Delaunay triangulation.
///
/// Triangles enter at their circumradius. An edge whose diametral disc is
/// empty (Gabriel) enters at half its length; any other edge enters with the
/// smallest of its incident triangles. Coincident points are joined by an
/// edge at value zero.
pub fn build_alpha_2d(cloud: &PointCloud) -> Result<Filtration> {
    let tri = delaunay_2d(cloud)?;
    let n = cloud.len();
    let mut out: Vec<FilteredSimplex> = Vec::with_capacity(n + 3 * tri.triangles().len() + 1);
    for v in 0..n as u32 {
        out.push(FilteredSimplex {
            simplex: Simplex::from_sorted(verts(&[v])),
            value: 0.0,
        });
    }

    let tri_values: Vec<f64> = tri
        .triangles()
        .iter()
        .map(|t| circumradius(cloud.point(t[0]), cloud.point(t[1]), cloud.point(t[2])))
        .collect();

    // edge -> (attached by an incident triangle, smallest incident triangle value)
    let mut edges: HashMap<(usize, usize), (bool, f64)> = HashMap::with_capacity(3 * tri_values.len());
    for (t, &r) in tri.triangles().iter().zip(&tri_values) {
        for k in 0..3 {
            let (u, v, w) = (t[k], t[(k + 1) % 3], t[(k + 2) % 3]);
            let (pu, pv, pw) = (cloud.point(u), cloud.point(v), cloud.point(w));
            let dot: f64 = (0..2).map(|a| (pu[a] - pw[a]) * (pv[a] - pw[a])).sum();
            let entry = edges.entry((u.min(v), u.max(v))).or_insert((false, f64::INFINITY));
            entry.0 |= dot < 0.0;
            entry.1 = entry.1.min(r);
        }
    }
    let mut edge_values: HashMap<(usize, usize), f64> = HashMap::with_capacity(edges.len());
    for (&(u, v), &(attached, smallest)) in &edges {
        let half = euclidean(cloud.point(u), cloud.point(v)) / 2.0;
        let value = if attached { smallest.max(half) } else { half };
        edge_values.insert((u, v), value);
        out.push(FilteredSimplex {
            simplex: Simplex::from_sorted(verts(&[u as u32, v as u32])),
            value,
        });
    }
    for &(dup, original) in tri.duplicates() {
        let (u, v) = (dup.min(original) as u32, dup.max(original) as u32);
        out.push(FilteredSimplex {
            simplex: Simplex::from_sorted(verts(&[u, v])),
            value: 0.0,
        });
    }
    for (t, &r) in tri.triangles().iter().zip(&tri_values) {
        let mut vs = *t;
        vs.sort_unstable();
        let facets = [(vs[0], vs[1]), (vs[0], vs[2]), (vs[1], vs[2])];
        let value = facets.iter().map(|e| edge_values[e]).fold(r, f64::max);
        out.push(FilteredSimplex {
            simplex: Simplex::from_sorted(verts(&[vs[0] as u32, vs[1] as u32, vs[2] as u32])),
            value,
        });
    }
    Filtration::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::MetricSpace;

    fn cloud(points: &[[f64; 2]]) -> PointCloud {
        PointCloud::new(
            MetricSpace::Euclidean { dim: 2 },
            points.iter().map(|p| p.to_vec()).collect(),
        )
        .unwrap()
    }

    fn value_of(f: &Filtration, vs: &[u32]) -> f64 {
        f.iter().find(|s| s.simplex.vertices() == vs).unwrap().value
    }

    #[test]
    fn circumradius_formulas() {
        let s3 = 3f64.sqrt();
        assert!((circumradius(&[0.0, 0.0], &[1.0, 0.0], &[0.5, s3 / 2.0]) - 1.0 / s3).abs() < 1e-15);
        assert!((circumradius(&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]) - 2f64.sqrt() / 2.0).abs() < 1e-15);
        assert_eq!(circumradius(&[0.0, 0.0], &[1.0, 0.0], &[2.0, 0.0]), f64::INFINITY);
    }

    #[test]
    fn equilateral_triangle_values() {
        let s3 = 3f64.sqrt();
        let f = build_alpha_2d(&cloud(&[[0.0, 0.0], [1.0, 0.0], [0.5, s3 / 2.0]])).unwrap();
        for e in [[0, 1], [0, 2], [1, 2]] {
            assert!((value_of(&f, &e) - 0.5).abs() < 1e-15);
        }
        assert!((value_of(&f, &[0, 1, 2]) - 1.0 / s3).abs() < 1e-15);
    }

    #[test]
    fn unit_square_values() {
        let f = build_alpha_2d(&cloud(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])).unwrap();
        let h = 2f64.sqrt() / 2.0;
        for e in [[0, 1], [1, 2], [2, 3], [0, 3]] {
            assert_eq!(value_of(&f, &e), 0.5);
        }
        assert!((value_of(&f, &[0, 2]) - h).abs() < 1e-15);
        assert!((value_of(&f, &[0, 1, 2]) - h).abs() < 1e-15);
        assert!((value_of(&f, &[0, 2, 3]) - h).abs() < 1e-15);
        assert_eq!(f.count_by_dim(), vec![4, 5, 2]);
    }

    #[test]
    fn obtuse_triangle_edge_is_attached() {
        // the long edge sees the apex at an obtuse angle
        let f = build_alpha_2d(&cloud(&[[0.0, 0.0], [2.0, 0.0], [1.0, 0.2]])).unwrap();
        let r = circumradius(&[0.0, 0.0], &[2.0, 0.0], &[1.0, 0.2]);
        assert_eq!(value_of(&f, &[0, 1]), r);
        assert_eq!(value_of(&f, &[0, 1, 2]), r);
        assert!(f.check_face_monotone().is_ok());
    }

    #[test]
    fn two_points_are_degenerate() {
        assert!(build_alpha_2d(&cloud(&[[0.0, 0.0], [1.0, 0.0]])).is_err());
    }

    #[test]
    fn duplicates_join_at_zero() {
        let f = build_alpha_2d(&cloud(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 0.0]])).unwrap();
        assert_eq!(value_of(&f, &[1, 3]), 0.0);
        assert!(f.check_face_monotone().is_ok());
    }
}
