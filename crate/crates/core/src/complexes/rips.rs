use super::{FilteredSimplex, Filtration, Simplex, Vertices};
use crate::error::{input, Result};
use crate::geometry::DistanceMatrix;

/// Default truncation radius for Rips filtrations on `n` points of an
/// `m`-dimensional sample with metric diameter `diameter`.
///
/// `3 (ln n / n)^{1/m}` times the diameter in radius units (`diameter / 2`).
pub fn default_rips_scale(n: usize, m: usize, diameter: f64) -> f64 {
    let n = n.max(2) as f64;
    3.0 * (n.ln() / n).powf(1.0 / m as f64) * diameter / 2.0
}

/// Vietoris–Rips filtration up to dimension `max_dim`.
///
/// A simplex is included when all its pairwise distances are at most
/// `2 · max_scale`; its value is half its longest edge.
pub fn build_rips(d: &DistanceMatrix, max_dim: usize, max_scale: f64) -> Result<Filtration> {
    if !(max_scale > 0.0) {
        return input("Rips truncation radius must be positive");
    }
    let n = d.len();
    let threshold = 2.0 * max_scale;
    let mut out: Vec<FilteredSimplex> = (0..n as u32)
        .map(|v| FilteredSimplex {
            simplex: Simplex::from_sorted(Vertices::from_slice(&[v])),
            value: 0.0,
        })
        .collect();
    if max_dim == 0 {
        return Filtration::new(out);
    }
    // upper neighbours, ascending
    let upper: Vec<Vec<u32>> = (0..n)
        .map(|i| {
            (i + 1..n)
                .filter(|&j| d.get(i, j) <= threshold)
                .map(|j| j as u32)
                .collect()
        })
        .collect();
    let mut clique = Vertices::new();
    for v in 0..n {
        clique.clear();
        clique.push(v as u32);
        expand(d, &upper, max_dim, &mut clique, &upper[v], 0.0, &mut out);
    }
    Filtration::new(out)
}

fn expand(
    d: &DistanceMatrix,
    upper: &[Vec<u32>],
    max_dim: usize,
    clique: &mut Vertices,
    candidates: &[u32],
    value: f64,
    out: &mut Vec<FilteredSimplex>,
) {
    for (k, &w) in candidates.iter().enumerate() {
        let reach = clique
            .iter()
            .map(|&u| d.get(u as usize, w as usize) / 2.0)
            .fold(value, f64::max);
        clique.push(w);
        out.push(FilteredSimplex {
            simplex: Simplex::from_sorted(clique.clone()),
            value: reach,
        });
        if clique.len() <= max_dim {
            let next: Vec<u32> = intersect(&candidates[k + 1..], &upper[w as usize]);
            if !next.is_empty() {
                expand(d, upper, max_dim, clique, &next, reach, out);
            }
        }
        clique.pop();
    }
}

fn intersect(a: &[u32], b: &[u32]) -> Vec<u32> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}
