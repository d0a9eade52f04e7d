//! Weighted sums, scaling regressions, dimension estimates and bound probes.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{input, Error, Result};
use crate::geometry::PointCloud;
use crate::persistence::{count_spanning, Barcode, MstResult};

/// `E_α^i`: the sum of `(d − b)^α` over the finite degree-`i` intervals.
pub fn e_alpha_sum(bc: &Barcode, i: usize, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return input(format!("weight exponent must be positive, got {alpha}"));
    }
    Ok(bc.intervals(i).iter().map(|it| it.length().powf(alpha)).sum())
}

/// `2^{−α} Σ |e|^α` over the edges of a spanning tree.
pub fn mst_alpha_weight(tree: &MstResult, alpha: f64) -> f64 {
    tree.edges.iter().map(|e| (e.length / 2.0).powf(alpha)).sum()
}

/// One Monte Carlo trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub n: usize,
    pub trial: usize,
    pub e_alpha: f64,
    pub ph_count: usize,
    pub n_spanning: usize,
    /// Wall-clock seconds; kept out of `scaling.csv` so reruns compare byte for byte.
    #[serde(skip)]
    pub elapsed: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Response {
    EAlpha,
    PhCount,
    NSpanning,
}

impl Response {
    pub fn of(self, row: &ScalingRow) -> f64 {
        match self {
            Response::EAlpha => row.e_alpha,
            Response::PhCount => row.ph_count as f64,
            Response::NSpanning => row.n_spanning as f64,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Response::EAlpha => "e_alpha",
            Response::PhCount => "ph_count",
            Response::NSpanning => "n_spanning",
        }
    }
}

/// Trial rows sorted by `(n, trial)`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ScalingTable {
    rows: Vec<ScalingRow>,
}

impl ScalingTable {
    pub fn new(mut rows: Vec<ScalingRow>) -> Self {
        rows.sort_by_key(|r| (r.n, r.trial));
        ScalingTable { rows }
    }

    pub fn rows(&self) -> &[ScalingRow] {
        &self.rows
    }

    /// Distinct sample sizes, ascending.
    pub fn ns(&self) -> Vec<usize> {
        let mut ns: Vec<usize> = self.rows.iter().map(|r| r.n).collect();
        ns.dedup();
        ns
    }

    pub fn values_at(&self, n: usize, response: Response) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.n == n)
            .map(|r| response.of(r))
            .collect()
    }

    /// Mean response for each `n`.
    pub fn means(&self, response: Response) -> Vec<(usize, f64)> {
        let mut groups: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
        for r in &self.rows {
            let g = groups.entry(r.n).or_default();
            g.0 += response.of(r);
            g.1 += 1;
        }
        groups.into_iter().map(|(n, (s, k))| (n, s / k as f64)).collect()
    }

    /// Shortfalls against the shape a regression wants: 3 sizes, 5 trials each.
    pub fn shape_warnings(&self) -> Vec<String> {
        let ns = self.ns();
        let mut out = Vec::new();
        if ns.len() < 3 {
            out.push(format!("only {} distinct n values", ns.len()));
        }
        for n in ns {
            let k = self.rows.iter().filter(|r| r.n == n).count();
            if k < 5 {
                out.push(format!("only {k} trials at n = {n}"));
            }
        }
        out
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    /// `n,trial,elapsed` rows.
    pub fn write_timings_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["n", "trial", "elapsed"])?;
        for r in &self.rows {
            w.write_record([r.n.to_string(), r.trial.to_string(), format!("{:.6}", r.elapsed)])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let rows = r.deserialize().collect::<std::result::Result<Vec<ScalingRow>, _>>()?;
        Ok(Self::new(rows))
    }
}

/// Ordinary least squares `y = intercept + slope · x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionResult {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub residuals: Vec<f64>,
    pub slope_stderr: f64,
    /// Two-sided 95% interval for the slope from Student's t.
    pub slope_ci95: (f64, f64),
    /// The fitted `(x, y)` pairs.
    pub points: Vec<(f64, f64)>,
    pub warnings: Vec<String>,
}

impl RegressionResult {
    pub fn predict(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }
}

pub fn fit_line(points: &[(f64, f64)]) -> Result<RegressionResult> {
    let k = points.len();
    if k < 3 {
        return Err(Error::Undefined(format!("a fit needs at least 3 points, got {k}")));
    }
    let kf = k as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / kf;
    let my = points.iter().map(|p| p.1).sum::<f64>() / kf;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Undefined("all x values coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = points.iter().map(|p| p.1 - intercept - slope * p.0).collect();
    let sse: f64 = residuals.iter().map(|r| r * r).sum();
    let r_squared = if syy > 0.0 { (1.0 - sse / syy).clamp(0.0, 1.0) } else { 1.0 };
    let dof = kf - 2.0;
    let slope_stderr = (sse / dof / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, dof)
        .map_err(|e| Error::Undefined(e.to_string()))?
        .inverse_cdf(0.975);
    Ok(RegressionResult {
        slope,
        intercept,
        r_squared,
        residuals,
        slope_stderr,
        slope_ci95: (slope - t * slope_stderr, slope + t * slope_stderr),
        points: points.to_vec(),
        warnings: Vec::new(),
    })
}

/// Per-`n` means over positive responses; nonpositive rows are dropped with a warning.
fn positive_means(table: &ScalingTable, response: Response) -> (Vec<(usize, f64)>, Vec<String>) {
    let mut warnings = Vec::new();
    let mut out = Vec::new();
    for n in table.ns() {
        let values = table.values_at(n, response);
        let kept: Vec<f64> = values.iter().copied().filter(|v| *v > 0.0).collect();
        if kept.len() < values.len() {
            warnings.push(format!(
                "n = {n}: excluded {} nonpositive {} values",
                values.len() - kept.len(),
                response.name()
            ));
        }
        if !kept.is_empty() {
            out.push((n, kept.iter().sum::<f64>() / kept.len() as f64));
        }
    }
    (out, warnings)
}

/// Least squares of `log(mean response)` against `log n`.
pub fn fit_loglog(table: &ScalingTable, response: Response) -> Result<RegressionResult> {
    let (means, warnings) = positive_means(table, response);
    if means.len() < 3 {
        return Err(Error::Undefined(format!(
            "log-log fit of {} needs 3 sample sizes with positive responses, got {}",
            response.name(),
            means.len()
        )));
    }
    let points: Vec<(f64, f64)> = means.iter().map(|&(n, y)| ((n as f64).ln(), y.ln())).collect();
    let mut fit = fit_line(&points)?;
    fit.warnings = warnings;
    Ok(fit)
}

/// Least squares of the mean response against `log n`.
pub fn fit_against_log(table: &ScalingTable, response: Response) -> Result<RegressionResult> {
    let points: Vec<(f64, f64)> = table
        .means(response)
        .into_iter()
        .map(|(n, y)| ((n as f64).ln(), y))
        .collect();
    fit_line(&points)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionEstimate {
    pub alpha_used: f64,
    pub slope: f64,
    pub m_hat: f64,
}

/// `m̂ = α / (1 − s)`, defined for `s < 1`.
pub fn dimension_from_slope(alpha: f64, slope: f64) -> Result<DimensionEstimate> {
    if !(slope < 1.0) {
        return Err(Error::Undefined(format!("slope {slope} is not below 1")));
    }
    if !(alpha > 0.0) {
        return input(format!("weight exponent must be positive, got {alpha}"));
    }
    Ok(DimensionEstimate {
        alpha_used: alpha,
        slope,
        m_hat: alpha / (1.0 - slope),
    })
}

pub fn estimate_dimension(table: &ScalingTable, alpha: f64) -> Result<DimensionEstimate> {
    let fit = fit_loglog(table, Response::EAlpha)?;
    dimension_from_slope(alpha, fit.slope)
}

/// `sup_δ #{intervals of length ≥ δ} · δ^m` over the interval lengths in degree `i`.
pub fn tail_statistic(bc: &Barcode, i: usize, m: usize) -> f64 {
    let mut lengths: Vec<f64> = bc.intervals(i).iter().map(|it| it.length()).collect();
    lengths.sort_by(|a, b| b.total_cmp(a));
    lengths
        .iter()
        .enumerate()
        .map(|(j, l)| (j + 1) as f64 * l.powi(m as i32))
        .fold(0.0, f64::max)
}

/// `E_α^i / |PH_i|^{(m−α)/m}`, or `E_m^i / log |PH_i|` when `α = m`,
/// on the barcode rescaled so that every death is at most 1.
pub fn upper_bound_check(bc: &Barcode, i: usize, m: usize, alpha: f64) -> Result<f64> {
    let mf = m as f64;
    if alpha > mf {
        return input(format!("weight exponent {alpha} exceeds dimension {m}"));
    }
    let k = bc.count(i);
    let at_m = alpha == mf;
    if k == 0 || (at_m && k < 2) {
        return Err(Error::Undefined(format!("{k} intervals in degree {i}")));
    }
    let max_death = bc.intervals(i).iter().map(|it| it.death).fold(0.0, f64::max);
    let e = if max_death > 1.0 {
        e_alpha_sum(&bc.scaled(1.0 / max_death), i, alpha)?
    } else {
        e_alpha_sum(bc, i, alpha)?
    };
    let kf = k as f64;
    Ok(if at_m {
        e / kf.ln()
    } else {
        e / kf.powf((mf - alpha) / mf)
    })
}

/// One failed probe of the interleaving inequalities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterleavingViolation {
    pub b: f64,
    pub d: f64,
    /// `N_X(b/L, L·d)`.
    pub lower: usize,
    /// `N_ψX(b, d)`.
    pub middle: usize,
    /// `N_X(L·b, d/L)`.
    pub upper: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct InterleavingReport {
    pub checked: usize,
    pub skipped: Vec<(f64, f64)>,
    pub violations: Vec<InterleavingViolation>,
}

impl InterleavingReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `N_X(b/L, L d) ≤ N_ψX(b, d) ≤ N_X(L b, d/L)` in degree `i` at each probe.
///
/// Probes with `L·b ≥ d/L` have an empty upper window and are skipped.
pub fn interleaving_check(
    bc_x: &Barcode,
    bc_psi: &Barcode,
    i: usize,
    lipschitz: f64,
    probes: &[(f64, f64)],
) -> Result<InterleavingReport> {
    if !(lipschitz >= 1.0) {
        return input(format!("Lipschitz constant must be at least 1, got {lipschitz}"));
    }
    let l = lipschitz;
    let mut report = InterleavingReport::default();
    for &(b, d) in probes {
        if !(l * b < d / l) {
            log::warn!("skipping probe ({b}, {d}): L·b ≥ d/L");
            report.skipped.push((b, d));
            continue;
        }
        let lower = count_spanning(bc_x, i, b / l, l * d)?;
        let middle = count_spanning(bc_psi, i, b, d)?;
        let upper = count_spanning(bc_x, i, l * b, d / l)?;
        report.checked += 1;
        if !(lower <= middle && middle <= upper) {
            report.violations.push(InterleavingViolation { b, d, lower, middle, upper });
        }
    }
    Ok(report)
}

/// A half-open axis-aligned box `[lower, upper)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl AxisBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return input("box corners must have equal, nonzero dimension");
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(l < u)) {
            return input(format!("box {lower:?}..{upper:?} is empty"));
        }
        Ok(AxisBox { lower, upper })
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(x, (l, u))| l <= x && x < u)
    }

    pub fn volume(&self) -> f64 {
        self.lower.iter().zip(&self.upper).map(|(l, u)| u - l).product()
    }

    pub fn overlaps(&self, other: &AxisBox) -> bool {
        self.lower
            .iter()
            .zip(&self.upper)
            .zip(other.lower.iter().zip(&other.upper))
            .all(|((la, ua), (lb, ub))| la < ub && lb < ua)
    }
}

/// `ξ`: true iff every `a` box is empty of points and every `b` box holds one.
pub fn occupancy_xi(cloud: &PointCloud, a: &[AxisBox], b: &[AxisBox]) -> Result<bool> {
    let all: Vec<&AxisBox> = a.iter().chain(b).collect();
    for (k, x) in all.iter().enumerate() {
        if x.lower.len() != cloud.dim() {
            return input(format!("box dimension {} differs from cloud dimension {}", x.lower.len(), cloud.dim()));
        }
        if all[k + 1..].iter().any(|y| x.overlaps(y)) {
            return input("occupancy boxes overlap");
        }
    }
    let occupied = |bx: &AxisBox| cloud.points().any(|p| bx.contains(p));
    Ok(!a.iter().any(occupied) && b.iter().all(occupied))
}

/// Whether every value lies in `[reference / factor, reference · factor]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandCheck {
    pub reference: f64,
    pub factor: f64,
    pub values: Vec<f64>,
    pub passed: bool,
}

pub fn band_check(values: &[f64], factor: f64) -> BandCheck {
    let reference = values.first().copied().unwrap_or(f64::NAN);
    let passed = reference > 0.0
        && values
            .iter()
            .all(|v| *v >= reference / factor && *v <= reference * factor);
    BandCheck {
        reference,
        factor,
        values: values.to_vec(),
        passed,
    }
}

/// Fraction of `values` within relative distance `rel` of `prediction`.
pub fn fraction_within(values: &[f64], prediction: f64, rel: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let hits = values
        .iter()
        .filter(|v| (*v - prediction).abs() <= rel * prediction.abs())
        .count();
    hits as f64 / values.len() as f64
}
