use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

use super::{circumradius, FilteredSimplex, Filtration, Simplex, Vertices};
use crate::error::{input, Error, Result};
use crate::geometry::{euclidean, MetricSpace, PointCloud};

/// Default size guard for the exhaustive Čech builder.
pub const CECH_ORACLE_MAX_POINTS: usize = 32;

struct Ball {
    center: Vec<f64>,
    radius2: f64,
}

impl Ball {
    fn empty() -> Self {
        Ball {
            center: Vec::new(),
            radius2: -1.0,
        }
    }

    fn contains(&self, p: &[f64]) -> bool {
        if self.radius2 < 0.0 {
            return false;
        }
        let d2: f64 = self.center.iter().zip(p).map(|(c, x)| (c - x) * (c - x)).sum();
        d2 <= self.radius2 * (1.0 + 1e-12) + 1e-300
    }
}

/// Smallest sphere through all of `support`, centred in its affine hull.
fn circumball(support: &[&[f64]]) -> Option<Ball> {
    match support.len() {
        0 => return Some(Ball::empty()),
        1 => {
            return Some(Ball {
                center: support[0].to_vec(),
                radius2: 0.0,
            })
        }
        _ => {}
    }
    let base = support[0];
    let k = support.len() - 1;
    let rel: Vec<Vec<f64>> = support[1..]
        .iter()
        .map(|p| p.iter().zip(base).map(|(x, b)| x - b).collect())
        .collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let gram = DMatrix::from_fn(k, k, |r, c| 2.0 * dot(&rel[r], &rel[c]));
    let rhs = DVector::from_fn(k, |r, _| dot(&rel[r], &rel[r]));
    let scale = gram.diagonal().max();
    if gram.determinant().abs() <= 1e-12 * scale.powi(k as i32) {
        return None;
    }
    let lambda = gram.lu().solve(&rhs)?;
    let mut center = base.to_vec();
    for (l, r) in lambda.iter().zip(&rel) {
        for (c, x) in center.iter_mut().zip(r) {
            *c += l * x;
        }
    }
    let radius2 = support
        .iter()
        .map(|p| p.iter().zip(&center).map(|(x, c)| (x - c) * (x - c)).sum::<f64>())
        .fold(0.0, f64::max);
    Some(Ball { center, radius2 })
}

/// Smallest ball containing every support point, for affinely dependent supports.
fn fallback_ball(support: &[&[f64]]) -> Ball {
    let k = support.len();
    let mut best = Ball::empty();
    for mask in 1u32..(1 << k) {
        let subset: Vec<&[f64]> = (0..k).filter(|&i| mask >> i & 1 == 1).map(|i| support[i]).collect();
        if let Some(ball) = circumball(&subset) {
            let better = best.radius2 < 0.0 || ball.radius2 < best.radius2;
            if better && support.iter().all(|p| ball.contains(p)) {
                best = ball;
            }
        }
    }
    best
}

fn welzl<'a>(points: &[&'a [f64]], boundary: &mut Vec<&'a [f64]>, dim: usize) -> Ball {
    if points.is_empty() || boundary.len() == dim + 1 {
        return circumball(boundary).unwrap_or_else(|| fallback_ball(boundary));
    }
    let (p, rest) = points.split_last().unwrap();
    let ball = welzl(rest, boundary, dim);
    if ball.contains(p) {
        return ball;
    }
    boundary.push(p);
    let ball = welzl(rest, boundary, dim);
    boundary.pop();
    ball
}

/// Radius of the minimal enclosing ball of a point set (Welzl's algorithm).
///
/// Two points give half their distance; three give half the longest side when
/// the triangle is right or obtuse and the circumradius otherwise.
pub fn miniball_radius(points: &[&[f64]]) -> f64 {
    match points.len() {
        0 | 1 => 0.0,
        2 => euclidean(points[0], points[1]) / 2.0,
        3 => {
            for k in 0..3 {
                let (u, v, w) = (points[k], points[(k + 1) % 3], points[(k + 2) % 3]);
                let dot: f64 = u.iter().zip(v).zip(w).map(|((a, b), c)| (a - c) * (b - c)).sum();
                if dot <= 0.0 {
                    return euclidean(u, v) / 2.0;
                }
            }
            circumradius(points[0], points[1], points[2])
        }
        _ => {
            let dim = points[0].len();
            welzl(points, &mut Vec::with_capacity(dim + 1), dim).radius2.max(0.0).sqrt()
        }
    }
}

/// Exhaustive Čech filtration with the default size guard.
pub fn build_cech_oracle(cloud: &PointCloud, max_dim: usize) -> Result<Filtration> {
    build_cech_oracle_with_limit(cloud, max_dim, CECH_ORACLE_MAX_POINTS)
}

/// Čech filtration on every vertex subset of size at most `max_dim + 1`.
///
/// Each simplex enters at the radius of the minimal enclosing ball of its vertices.
pub fn build_cech_oracle_with_limit(cloud: &PointCloud, max_dim: usize, max_points: usize) -> Result<Filtration> {
    let MetricSpace::Euclidean { .. } = cloud.space() else {
        return input("the Čech oracle needs a Euclidean cloud");
    };
    let n = cloud.len();
    if n > max_points {
        return Err(Error::TooLarge(format!(
            "Čech oracle enumerates all subsets; {n} points exceeds the guard of {max_points}"
        )));
    }
    let mut values: HashMap<Vertices, f64> = HashMap::new();
    let mut out = Vec::new();
    let mut layer: Vec<Vertices> = (0..n as u32).map(|v| Vertices::from_slice(&[v])).collect();
    for dim in 0..=max_dim {
        let mut next = Vec::new();
        for s in &layer {
            let pts: Vec<&[f64]> = s.iter().map(|&v| cloud.point(v as usize)).collect();
            let simplex = Simplex::from_sorted(s.clone());
            let value = simplex
                .facets()
                .map(|f| values[&f])
                .fold(miniball_radius(&pts), f64::max);
            values.insert(s.clone(), value);
            out.push(FilteredSimplex { simplex, value });
            if dim < max_dim {
                for w in s.last().map_or(0, |&l| l + 1)..n as u32 {
                    let mut t = s.clone();
                    t.push(w);
                    next.push(t);
                }
            }
        }
        layer = next;
    }
    Filtration::new(out)
}
