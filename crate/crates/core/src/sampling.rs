//! Seeded i.i.d. samplers.
//!
//! Every sampler is a pure function of `(measure, n, seed)`. The generator is
//! ChaCha8 from `rand_chacha`, initialised with `SeedableRng::seed_from_u64`;
//! Gaussian draws use `rand_distr::StandardNormal`. Concurrent trials derive
//! their seeds with [`trial_seed`] and never share generator state.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::geometry::{MetricSpace, PointCloud};

/// Relative Gram-determinant floor below which a simplex counts as degenerate.
const DEGENERATE_GRAM: f64 = 1e-24;

/// A probability measure to draw samples from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Measure {
    /// Uniform on `[0, side]^dim`.
    UniformCube { dim: usize, side: f64 },
    /// Uniform on the centred ball of the given radius in `R^dim`.
    UniformBall { dim: usize, radius: f64 },
    /// Uniform on the unit sphere `S^dim ⊂ R^{dim+1}`.
    UniformSphere { dim: usize },
    /// Uniform (by m-volume) on a pure m-dimensional Euclidean simplicial complex.
    SimplicialComplex {
        vertices: Vec<Vec<f64>>,
        simplices: Vec<Vec<usize>>,
    },
    /// With probability `weight`, uniform on the box `[lower, upper)`;
    /// otherwise a uniformly chosen atom. Atoms lie outside the box, so the
    /// measure is comparable to volume on the box with constant
    /// `weight / vol(box)` on both sides.
    LocallyBoundedMixture {
        weight: f64,
        lower: Vec<f64>,
        upper: Vec<f64>,
        atoms: Vec<Vec<f64>>,
    },
}

impl Measure {
    pub fn space(&self) -> MetricSpace {
        match self {
            Measure::UniformCube { dim, .. } | Measure::UniformBall { dim, .. } => {
                MetricSpace::Euclidean { dim: *dim }
            }
            Measure::UniformSphere { dim } => MetricSpace::Sphere { dim: *dim },
            Measure::SimplicialComplex { vertices, .. } => MetricSpace::Euclidean {
                dim: vertices.first().map_or(0, Vec::len),
            },
            Measure::LocallyBoundedMixture { lower, .. } => MetricSpace::Euclidean { dim: lower.len() },
        }
    }

    /// Dimension `m` of the support (the exponent in the scaling laws).
    pub fn intrinsic_dim(&self) -> usize {
        match self {
            Measure::SimplicialComplex { simplices, .. } => {
                simplices.first().map_or(0, |s| s.len().saturating_sub(1))
            }
            other => other.space().intrinsic_dim(),
        }
    }

    /// Volume of the box carrying the regular part of a mixture.
    pub fn regular_box_volume(&self) -> Option<f64> {
        match self {
            Measure::LocallyBoundedMixture { lower, upper, .. } => {
                Some(lower.iter().zip(upper).map(|(a, b)| b - a).product())
            }
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.space().validate()?;
        match self {
            Measure::UniformCube { side, .. } if !(side.is_finite() && *side > 0.0) => {
                input("cube side must be positive")
            }
            Measure::UniformBall { radius, .. } if !(radius.is_finite() && *radius > 0.0) => {
                input("ball radius must be positive")
            }
            Measure::SimplicialComplex { .. } => self.complex_weights().map(|_| ()),
            Measure::LocallyBoundedMixture {
                weight,
                lower,
                upper,
                atoms,
            } => {
                if !(*weight > 0.0 && *weight < 1.0) {
                    return input("mixture weight must lie in (0, 1)");
                }
                if upper.len() != lower.len() || lower.iter().zip(upper).any(|(a, b)| !(a < b)) {
                    return input("mixture box needs lower < upper on every axis");
                }
                if atoms.is_empty() {
                    return input("mixture needs at least one atom");
                }
                for a in atoms {
                    if a.len() != lower.len() {
                        return input("atom dimension does not match the box");
                    }
                    let inside = a
                        .iter()
                        .zip(lower.iter().zip(upper))
                        .all(|(x, (lo, hi))| lo <= x && x <= hi);
                    if inside {
                        return input("atoms must lie outside the regular box");
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    fn complex_weights(&self) -> Result<Vec<f64>> {
        match self {
            Measure::SimplicialComplex {
                vertices,
                simplices,
            } => complex_volume_table(vertices, simplices),
            _ => input("not a simplicial-complex measure"),
        }
    }
}

/// Normalised m-volumes of the simplices of a pure simplicial complex.
///
/// Volumes come from the Gram determinant, `vol = sqrt(det(V Vᵀ)) / m!`
/// where the rows of `V` are the edge vectors from the first vertex.
pub fn complex_volume_table(vertices: &[Vec<f64>], simplices: &[Vec<usize>]) -> Result<Vec<f64>> {
    if simplices.is_empty() {
        return Err(Error::Degenerate("simplicial complex has no simplices".into()));
    }
    let ambient = vertices.first().map_or(0, Vec::len);
    if ambient == 0 || vertices.iter().any(|v| v.len() != ambient) {
        return input("vertex table must be nonempty with a common dimension");
    }
    let m = simplices[0].len().saturating_sub(1);
    if m == 0 || m > ambient {
        return input(format!("simplices of dimension {m} do not fit in R^{ambient}"));
    }
    let mut volumes = Vec::with_capacity(simplices.len());
    for (s, simplex) in simplices.iter().enumerate() {
        if simplex.len() != m + 1 {
            return input("simplicial complex must be pure");
        }
        if simplex.iter().any(|&v| v >= vertices.len()) {
            return input(format!("simplex {s} references a missing vertex"));
        }
        let base = &vertices[simplex[0]];
        let edges = DMatrix::from_fn(m, ambient, |r, c| vertices[simplex[r + 1]][c] - base[c]);
        let gram = &edges * edges.transpose();
        let det = gram.determinant();
        let scale = (0..m).map(|r| gram[(r, r)]).product::<f64>();
        if !(det > DEGENERATE_GRAM * scale) {
            return Err(Error::Degenerate(format!("simplex {s} has zero volume")));
        }
        let factorial: f64 = (1..=m).map(|k| k as f64).product();
        volumes.push(det.sqrt() / factorial);
    }
    let total: f64 = volumes.iter().sum();
    Ok(volumes.into_iter().map(|v| v / total).collect())
}

/// SplitMix64 finaliser.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for trial `trial` at sample size `n` under a master seed.
pub fn trial_seed(master: u64, n: usize, trial: usize) -> u64 {
    splitmix64(master ^ splitmix64(((n as u64) << 32) | trial as u64))
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian_direction<R: Rng + ?Sized>(dim: usize, rng: &mut R, out: &mut Vec<f64>) {
    loop {
        let start = out.len();
        let mut norm2 = 0.0;
        for _ in 0..dim {
            let g: f64 = rng.sample(StandardNormal);
            norm2 += g * g;
            out.push(g);
        }
        if norm2 > 0.0 {
            let norm = norm2.sqrt();
            out[start..].iter_mut().for_each(|x| *x /= norm);
            return;
        }
        out.truncate(start);
    }
}

/// Draws `n` i.i.d. points from `measure`.
pub fn sample(measure: &Measure, n: usize, seed: u64) -> Result<PointCloud> {
    measure.validate()?;
    let mut rng = rng_from_seed(seed);
    let space = measure.space();
    let dim = space.ambient_dim();
    let mut coords = Vec::with_capacity(n * dim);
    match measure {
        Measure::UniformCube { side, .. } => {
            for _ in 0..n * dim {
                coords.push(side * rng.random::<f64>());
            }
        }
        Measure::UniformBall { radius, .. } => {
            for _ in 0..n {
                let start = coords.len();
                gaussian_direction(dim, &mut rng, &mut coords);
                let r = radius * rng.random::<f64>().powf(1.0 / dim as f64);
                coords[start..].iter_mut().for_each(|x| *x *= r);
            }
        }
        Measure::UniformSphere { .. } => {
            for _ in 0..n {
                gaussian_direction(dim, &mut rng, &mut coords);
            }
        }
        Measure::SimplicialComplex {
            vertices,
            simplices,
        } => {
            let weights = measure.complex_weights()?;
            let mut cumulative = Vec::with_capacity(weights.len());
            let mut acc = 0.0;
            for w in &weights {
                acc += w;
                cumulative.push(acc);
            }
            let m = simplices[0].len() - 1;
            let mut cuts = vec![0.0; m];
            for _ in 0..n {
                let u: f64 = rng.random::<f64>() * acc;
                let s = cumulative.partition_point(|&c| c <= u).min(simplices.len() - 1);
                cuts.iter_mut().for_each(|c| *c = rng.random::<f64>());
                cuts.sort_by(f64::total_cmp);
                let start = coords.len();
                coords.resize(start + dim, 0.0);
                let mut prev = 0.0;
                for k in 0..=m {
                    let next = if k < m { cuts[k] } else { 1.0 };
                    let w = next - prev;
                    prev = next;
                    for (c, x) in coords[start..].iter_mut().zip(&vertices[simplices[s][k]]) {
                        *c += w * x;
                    }
                }
            }
        }
        Measure::LocallyBoundedMixture {
            weight,
            lower,
            upper,
            atoms,
        } => {
            for _ in 0..n {
                if rng.random::<f64>() < *weight {
                    for (lo, hi) in lower.iter().zip(upper) {
                        coords.push(lo + (hi - lo) * rng.random::<f64>());
                    }
                } else {
                    let k = rng.random_range(0..atoms.len());
                    coords.extend_from_slice(&atoms[k]);
                }
            }
        }
    }
    PointCloud::from_flat(space, coords)
}
