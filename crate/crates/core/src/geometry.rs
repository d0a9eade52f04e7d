//! Point clouds, metric spaces and bi-Lipschitz maps.

use std::io::{Read, Write};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};

/// Allowed deviation of a sphere sample from unit norm.
pub const SPHERE_NORM_TOLERANCE: f64 = 1e-12;

/// The metric space a cloud lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MetricSpace {
    /// `R^dim` with the Euclidean metric.
    Euclidean { dim: usize },
    /// The unit sphere `S^dim ⊂ R^{dim+1}` with the intrinsic (great-circle) metric.
    Sphere { dim: usize },
}

impl MetricSpace {
    /// Number of coordinates stored per point.
    pub fn ambient_dim(&self) -> usize {
        match *self {
            MetricSpace::Euclidean { dim } => dim,
            MetricSpace::Sphere { dim } => dim + 1,
        }
    }

    /// Topological dimension of the space.
    pub fn intrinsic_dim(&self) -> usize {
        match *self {
            MetricSpace::Euclidean { dim } | MetricSpace::Sphere { dim } => dim,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.intrinsic_dim() == 0 {
            return input("metric space dimension must be at least 1");
        }
        Ok(())
    }

    /// Distance between two coordinate slices of length [`Self::ambient_dim`].
    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            MetricSpace::Euclidean { .. } => euclidean(a, b),
            MetricSpace::Sphere { .. } => geodesic(a, b),
        }
    }
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Great-circle distance between unit vectors.
pub fn geodesic(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    dot.clamp(-1.0, 1.0).acos()
}

/// An ordered list of sample points in a metric space.
///
/// Coordinates are stored row-major; the index of a point identifies the sample.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    space: MetricSpace,
    coords: Vec<f64>,
}

impl PointCloud {
    pub fn new(space: MetricSpace, points: Vec<Vec<f64>>) -> Result<Self> {
        space.validate()?;
        let dim = space.ambient_dim();
        let mut coords = Vec::with_capacity(points.len() * dim);
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return input(format!(
                    "point {i} has {} coordinates, expected {dim}",
                    p.len()
                ));
            }
            coords.extend_from_slice(p);
        }
        Self::from_flat(space, coords)
    }

    /// Builds a cloud from row-major coordinates.
    pub fn from_flat(space: MetricSpace, coords: Vec<f64>) -> Result<Self> {
        space.validate()?;
        let dim = space.ambient_dim();
        if coords.len() % dim != 0 {
            return input(format!(
                "{} coordinates do not divide into points of dimension {dim}",
                coords.len()
            ));
        }
        let cloud = PointCloud { space, coords };
        for (i, p) in cloud.points().enumerate() {
            if p.iter().any(|x| !x.is_finite()) {
                return input(format!("point {i} has a non-finite coordinate"));
            }
            if let MetricSpace::Sphere { .. } = space {
                let norm = p.iter().map(|x| x * x).sum::<f64>().sqrt();
                if (norm - 1.0).abs() > SPHERE_NORM_TOLERANCE {
                    return input(format!("point {i} has norm {norm}, not on the unit sphere"));
                }
            }
        }
        Ok(cloud)
    }

    pub fn empty(space: MetricSpace) -> Self {
        PointCloud {
            space,
            coords: Vec::new(),
        }
    }

    pub fn space(&self) -> MetricSpace {
        self.space
    }

    pub fn dim(&self) -> usize {
        self.space.ambient_dim()
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.coords[i * d..(i + 1) * d]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim())
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.space.distance(self.point(i), self.point(j))
    }

    /// Largest pairwise distance, `0` for fewer than two points.
    pub fn diameter(&self) -> f64 {
        let n = self.len();
        let mut best = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                best = best.max(self.distance(i, j));
            }
        }
        best
    }

    /// Writes `x0,x1,...` headed CSV, one row per point.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record((0..self.dim()).map(|k| format!("x{k}")))?;
        for p in self.points() {
            w.write_record(p.iter().map(|x| x.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(space: MetricSpace, reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let width = r.headers()?.len();
        if width != space.ambient_dim() {
            return input(format!(
                "csv has {width} columns, space needs {}",
                space.ambient_dim()
            ));
        }
        let mut coords = Vec::new();
        for record in r.records() {
            let record = record?;
            for field in record.iter() {
                let x: f64 = field
                    .trim()
                    .parse()
                    .map_err(|_| Error::Input(format!("bad coordinate `{field}`")))?;
                coords.push(x);
            }
        }
        Self::from_flat(space, coords)
    }
}

/// Symmetric matrix of pairwise distances with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl DistanceMatrix {
    /// Builds a matrix from a full row-major table, checking symmetry and the diagonal.
    pub fn from_full(n: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != n * n {
            return input("distance table has wrong size");
        }
        for i in 0..n {
            if entries[i * n + i] != 0.0 {
                return input(format!("nonzero diagonal at {i}"));
            }
            for j in 0..i {
                let v = entries[i * n + j];
                if v != entries[j * n + i] || v.is_nan() || v < 0.0 {
                    return input(format!("entry ({i},{j}) is asymmetric or negative"));
                }
            }
        }
        Ok(DistanceMatrix { n, entries })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn max_entry(&self) -> f64 {
        self.entries.iter().copied().fold(0.0, f64::max)
    }
}

/// Euclidean or geodesic distances between all pairs of points.
///
/// Each pair is computed once and mirrored, so the result is exactly symmetric.
pub fn pairwise_distances(cloud: &PointCloud) -> DistanceMatrix {
    let n = cloud.len();
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let d = cloud.distance(i, j);
            entries[i * n + j] = d;
            entries[j * n + i] = d;
        }
    }
    DistanceMatrix { n, entries }
}

/// A monotone increasing piecewise-linear map `R → R` fixing the origin.
///
/// `slopes[0]` applies left of `breakpoints[0]`, `slopes[k]` between
/// `breakpoints[k-1]` and `breakpoints[k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinear {
    pub breakpoints: Vec<f64>,
    pub slopes: Vec<f64>,
}

impl PiecewiseLinear {
    pub fn validate(&self) -> Result<()> {
        if self.slopes.len() != self.breakpoints.len() + 1 {
            return input("piecewise-linear map needs one more slope than breakpoints");
        }
        if self.slopes.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return input("piecewise-linear slopes must be positive and finite");
        }
        if self.breakpoints.windows(2).any(|w| w[0] >= w[1])
            || self.breakpoints.iter().any(|b| !b.is_finite())
        {
            return input("breakpoints must be finite and strictly increasing");
        }
        Ok(())
    }

    pub fn eval(&self, x: f64) -> f64 {
        let mut y = self.slopes[0] * x;
        for (k, b) in self.breakpoints.iter().enumerate() {
            y += (self.slopes[k + 1] - self.slopes[k]) * (x - b).max(0.0);
        }
        y
    }

    fn lipschitz(&self) -> f64 {
        self.slopes
            .iter()
            .map(|&s| s.max(1.0 / s))
            .fold(1.0, f64::max)
    }
}

/// A bi-Lipschitz self-map of Euclidean space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BiLipschitzMap {
    Identity,
    UniformScale { factor: f64 },
    /// `x ↦ A x` for an invertible square matrix (row-major rows).
    Linear { matrix: Vec<Vec<f64>> },
    /// Independent monotone piecewise-linear map per axis.
    Coordinatewise { axes: Vec<PiecewiseLinear> },
}

impl BiLipschitzMap {
    pub fn validate(&self) -> Result<()> {
        match self {
            BiLipschitzMap::Identity => Ok(()),
            BiLipschitzMap::UniformScale { factor } => {
                if factor.is_finite() && *factor > 0.0 {
                    Ok(())
                } else {
                    input("scale factor must be positive")
                }
            }
            BiLipschitzMap::Linear { matrix } => {
                let k = matrix.len();
                if k == 0 || matrix.iter().any(|r| r.len() != k) {
                    return input("linear map needs a nonempty square matrix");
                }
                let (lo, _) = self.singular_range();
                if !(lo > 0.0) {
                    return input("linear map is singular");
                }
                Ok(())
            }
            BiLipschitzMap::Coordinatewise { axes } => {
                if axes.is_empty() {
                    return input("coordinatewise map needs at least one axis");
                }
                axes.iter().try_for_each(PiecewiseLinear::validate)
            }
        }
    }

    fn singular_range(&self) -> (f64, f64) {
        match self {
            BiLipschitzMap::Linear { matrix } => {
                let k = matrix.len();
                let m = DMatrix::from_fn(k, k, |r, c| matrix[r][c]);
                let sv = m.singular_values();
                let lo = sv.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = sv.iter().copied().fold(0.0, f64::max);
                (lo, hi)
            }
            _ => (1.0, 1.0),
        }
    }

    /// The bi-Lipschitz constant `L ≥ 1`.
    pub fn lipschitz_constant(&self) -> f64 {
        match self {
            BiLipschitzMap::Identity => 1.0,
            BiLipschitzMap::UniformScale { factor } => factor.max(1.0 / factor),
            BiLipschitzMap::Linear { .. } => {
                let (lo, hi) = self.singular_range();
                hi.max(1.0 / lo).max(1.0)
            }
            BiLipschitzMap::Coordinatewise { axes } => axes
                .iter()
                .map(PiecewiseLinear::lipschitz)
                .fold(1.0, f64::max),
        }
    }

    /// Dimension the map acts on, if fixed.
    pub fn domain_dim(&self) -> Option<usize> {
        match self {
            BiLipschitzMap::Identity | BiLipschitzMap::UniformScale { .. } => None,
            BiLipschitzMap::Linear { matrix } => Some(matrix.len()),
            BiLipschitzMap::Coordinatewise { axes } => Some(axes.len()),
        }
    }

    /// Random coordinatewise map whose slopes lie in `[1/L, L]`.
    ///
    /// Slopes are log-uniform; the first slope of the first axis is exactly `L`
    /// so the returned map attains its constant.
    pub fn random_coordinatewise<R: rand::Rng + ?Sized>(
        dim: usize,
        lipschitz: f64,
        pieces: usize,
        extent: (f64, f64),
        rng: &mut R,
    ) -> Self {
        let ln_l = lipschitz.ln();
        let axes = (0..dim)
            .map(|axis| {
                let mut breakpoints: Vec<f64> = (0..pieces.saturating_sub(1))
                    .map(|_| rng.random_range(extent.0..extent.1))
                    .collect();
                breakpoints.sort_by(f64::total_cmp);
                breakpoints.dedup();
                let slopes = (0..=breakpoints.len())
                    .map(|k| {
                        if axis == 0 && k == 0 {
                            lipschitz
                        } else {
                            rng.random_range(-ln_l..=ln_l).exp()
                        }
                    })
                    .collect();
                PiecewiseLinear {
                    breakpoints,
                    slopes,
                }
            })
            .collect();
        BiLipschitzMap::Coordinatewise { axes }
    }
}

/// Applies a bi-Lipschitz map to every point of a Euclidean cloud.
pub fn apply_bilipschitz(map: &BiLipschitzMap, cloud: &PointCloud) -> Result<PointCloud> {
    map.validate()?;
    let MetricSpace::Euclidean { dim } = cloud.space() else {
        return input("bi-Lipschitz maps apply to Euclidean clouds only");
    };
    if let Some(k) = map.domain_dim() {
        if k != dim {
            return input(format!("map acts on R^{k}, cloud lives in R^{dim}"));
        }
    }
    let mut coords = Vec::with_capacity(cloud.coords().len());
    for p in cloud.points() {
        match map {
            BiLipschitzMap::Identity => coords.extend_from_slice(p),
            BiLipschitzMap::UniformScale { factor } => coords.extend(p.iter().map(|x| x * factor)),
            BiLipschitzMap::Linear { matrix } => {
                coords.extend(matrix.iter().map(|row| row.iter().zip(p).map(|(a, x)| a * x).sum::<f64>()))
            }
            BiLipschitzMap::Coordinatewise { axes } => {
                coords.extend(axes.iter().zip(p).map(|(f, &x)| f.eval(x)))
            }
        }
    }
    PointCloud::from_flat(cloud.space(), coords)
}
