use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ComplexSpec, ExperimentConfig};
use super::report::{RunReport, Verdict};
use crate::complexes::{build_alpha_2d, build_cech_oracle, build_rips, default_rips_scale};
use crate::error::{Error, Result};
use crate::geometry::{apply_bilipschitz, pairwise_distances};
use crate::persistence::{count_spanning, mst_of_cloud, ph0_from_mst, reduce, reduce_dual, Barcode};
use crate::sampling::{sample, trial_seed};
use crate::statistics::{
    band_check, dimension_from_slope, e_alpha_sum, fit_against_log, fit_loglog, fraction_within,
    tail_statistic, upper_bound_check, RegressionResult, Response, ScalingRow, ScalingTable,
};

/// Interval-count window `(ω b₀, ω d₀)` with `ω = (n₀ / n)^{1/m}`.
pub const WINDOW_B0: f64 = 0.05;
pub const WINDOW_D0: f64 = 0.15;
pub const WINDOW_N0: usize = 64;
/// Fewer spanning intervals than this over a whole run make the window verdict inconclusive.
pub const WINDOW_MIN_EVENTS: usize = 10;

pub fn window(n: usize, m: usize) -> (f64, f64) {
    let omega = (WINDOW_N0 as f64 / n as f64).powf(1.0 / m as f64);
    (omega * WINDOW_B0, omega * WINDOW_D0)
}

/// Everything recorded for one `(n, trial)` pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub n: usize,
    pub trial: usize,
    pub e_alpha: f64,
    pub ph_count: usize,
    pub n_spanning: usize,
    /// Empirical tail constant, see [`tail_statistic`].
    pub tail: f64,
    /// See [`upper_bound_check`]; absent when too few intervals.
    pub upper_ratio: Option<f64>,
    /// `|PH_0| + |PH_1|`.
    pub low_degree_count: usize,
    /// Number of simplices in the filtration; absent on the MST path.
    pub complex_size: Option<usize>,
    pub violations: usize,
    pub elapsed: f64,
}

impl TrialRecord {
    pub fn row(&self) -> ScalingRow {
        ScalingRow {
            n: self.n,
            trial: self.trial,
            e_alpha: self.e_alpha,
            ph_count: self.ph_count,
            n_spanning: self.n_spanning,
            elapsed: self.elapsed,
        }
    }
}

/// Samples, maps, filters and reduces one trial.
pub fn trial_barcode(cfg: &ExperimentConfig, n: usize, trial: usize) -> Result<(Barcode, Option<usize>)> {
    let mut cloud = sample(&cfg.measure, n, trial_seed(cfg.seed, n, trial))?;
    if let Some(map) = &cfg.map {
        cloud = apply_bilipschitz(map, &cloud)?;
    }
    if cfg.degree == 0 {
        return Ok((ph0_from_mst(&mst_of_cloud(&cloud)), None));
    }
    let (bc, size) = match &cfg.complex {
        ComplexSpec::Alpha2d => {
            let f = build_alpha_2d(&cloud)?;
            (reduce(&f)?, f.len())
        }
        ComplexSpec::Rips { max_dim, max_scale } => {
            let d = pairwise_distances(&cloud);
            let scale = max_scale.unwrap_or_else(|| default_rips_scale(n, cfg.m(), d.max_entry()));
            let f = build_rips(&d, *max_dim, scale)?;
            (reduce_dual(&f)?, f.len())
        }
        ComplexSpec::CechOracle { max_dim } => {
            let f = build_cech_oracle(&cloud, *max_dim)?;
            (reduce(&f)?, f.len())
        }
    };
    Ok((bc, Some(size)))
}

pub fn run_trial(cfg: &ExperimentConfig, n: usize, trial: usize) -> Result<TrialRecord> {
    let start = Instant::now();
    let (bc, complex_size) = trial_barcode(cfg, n, trial)?;
    let i = cfg.degree;
    let m = cfg.m();
    let (b, d) = window(n, m);
    Ok(TrialRecord {
        n,
        trial,
        e_alpha: e_alpha_sum(&bc, i, cfg.alpha)?,
        ph_count: bc.count(i),
        n_spanning: count_spanning(&bc, i, b, d)?,
        tail: tail_statistic(&bc, i, m),
        upper_ratio: upper_bound_check(&bc, i, m, cfg.alpha).ok(),
        low_degree_count: bc.count(0) + bc.count(1),
        complex_size,
        violations: bc.violations().len(),
        elapsed: start.elapsed().as_secs_f64(),
    })
}

fn trial_path(dir: &Path, n: usize, trial: usize) -> PathBuf {
    dir.join(format!("n{n}_t{trial}.json"))
}

/// Writes through a temporary file and a rename so a crash never leaves a partial record.
fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// The configuration fields that determine trial results.
fn fingerprint(cfg: &ExperimentConfig) -> String {
    let mut c = cfg.clone();
    c.output = None;
    c.jobs = None;
    c.tolerances = Default::default();
    c.to_toml_string()
}

fn prepare_output(cfg: &ExperimentConfig, out: &Path) -> Result<PathBuf> {
    let trials = out.join("trials");
    fs::create_dir_all(&trials)?;
    let stamp = out.join("config.toml");
    let fp = fingerprint(cfg);
    match fs::read_to_string(&stamp) {
        Ok(existing) if existing != fp => {
            return Err(Error::Config(format!(
                "{} holds results of a different experiment",
                out.display()
            )))
        }
        Ok(_) => {}
        Err(_) => write_atomic(&stamp, fp.as_bytes())?,
    }
    Ok(trials)
}

/// Runs every `(n, trial)` pair, reusing finished trials stored under the output directory.
pub fn run_trials(cfg: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    cfg.validate()?;
    let store = match &cfg.output {
        Some(out) => Some(prepare_output(cfg, out)?),
        None => None,
    };
    let work: Vec<(usize, usize)> = cfg
        .n_grid
        .iter()
        .flat_map(|&n| (0..cfg.trials).map(move |t| (n, t)))
        .collect();
    let job = |&(n, t): &(usize, usize)| -> Result<TrialRecord> {
        if let Some(dir) = &store {
            let path = trial_path(dir, n, t);
            if let Ok(text) = fs::read_to_string(&path) {
                if let Ok(rec) = serde_json::from_str::<TrialRecord>(&text) {
                    log::debug!("reusing n = {n}, trial {t}");
                    return Ok(rec);
                }
            }
            let rec = run_trial(cfg, n, t)?;
            write_atomic(&path, serde_json::to_string(&rec)?.as_bytes())?;
            Ok(rec)
        } else {
            run_trial(cfg, n, t)
        }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let mut records = pool.install(|| work.par_iter().map(job).collect::<Result<Vec<_>>>())?;
    records.sort_by_key(|r| (r.n, r.trial));
    Ok(records)
}

pub fn write_trials_csv<W: std::io::Write>(records: &[TrialRecord], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "n",
        "trial",
        "e_alpha",
        "ph_count",
        "n_spanning",
        "tail",
        "upper_ratio",
        "low_degree_count",
        "complex_size",
    ])?;
    let opt = |v: Option<String>| v.unwrap_or_default();
    for r in records {
        w.write_record([
            r.n.to_string(),
            r.trial.to_string(),
            r.e_alpha.to_string(),
            r.ph_count.to_string(),
            r.n_spanning.to_string(),
            r.tail.to_string(),
            opt(r.upper_ratio.map(|x| x.to_string())),
            r.low_degree_count.to_string(),
            opt(r.complex_size.map(|x| x.to_string())),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Results of a scaling experiment.
#[derive(Debug, Clone)]
pub struct ScalingRun {
    pub report: RunReport,
    pub table: ScalingTable,
    pub trials: Vec<TrialRecord>,
}

fn per_n_means(records: &[TrialRecord], f: impl Fn(&TrialRecord) -> Option<f64>) -> Vec<(usize, f64)> {
    let mut out: Vec<(usize, f64)> = Vec::new();
    let mut ns: Vec<usize> = records.iter().map(|r| r.n).collect();
    ns.dedup();
    for n in ns {
        let vals: Vec<f64> = records.iter().filter(|r| r.n == n).filter_map(&f).collect();
        if !vals.is_empty() {
            out.push((n, vals.iter().sum::<f64>() / vals.len() as f64));
        }
    }
    out
}

fn fmt_series(v: &[(usize, f64)]) -> String {
    v.iter()
        .map(|(n, x)| format!("{n}:{x:.4}"))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Exponent, regime and window verdicts for a finished scaling run.
pub fn scaling_verdicts(
    cfg: &ExperimentConfig,
    table: &ScalingTable,
    records: &[TrialRecord],
) -> (Option<RegressionResult>, Vec<Verdict>) {
    let tol = &cfg.tolerances;
    let m = cfg.m();
    let ns = table.ns();
    let mut verdicts = Vec::new();

    let bad: usize = records.iter().map(|r| r.violations).sum();
    verdicts.push(Verdict::new(
        "barcode_invariants",
        "every interval has 0 ≤ birth < death < ∞",
        "exact",
        bad == 0,
        format!("{bad} violations"),
    ));

    let mut regression = None;
    let at_m = cfg.alpha == m as f64;
    if ns.len() < 3 {
        let what = if at_m { "log_regime_ratio" } else { "exponent" };
        verdicts.push(Verdict::skipped(
            what,
            "growth of E_α^i in n",
            format!("insufficient n: {} distinct sizes, need 3", ns.len()),
        ));
    } else if !at_m {
        let expected = cfg.expected_slope();
        match fit_loglog(table, Response::EAlpha) {
            Ok(fit) => {
                verdicts.push(Verdict::new(
                    "exponent",
                    &format!("log-log slope of mean E_α^i equals (m − α)/m = {expected:.4}"),
                    format!("±{}", tol.slope),
                    (fit.slope - expected).abs() <= tol.slope,
                    format!(
                        "slope {:.4}, r² {:.4}, 95% CI [{:.4}, {:.4}]",
                        fit.slope, fit.r_squared, fit.slope_ci95.0, fit.slope_ci95.1
                    ),
                ));
                let n_max = *ns.last().unwrap();
                let prediction = fit.predict((n_max as f64).ln()).exp();
                let values = table.values_at(n_max, Response::EAlpha);
                let frac = fraction_within(&values, prediction, tol.quorum_rel);
                verdicts.push(Verdict::new(
                    "concentration",
                    "largest-n trial values lie near the fitted mean",
                    format!("{:.0}% within ±{:.0}%", tol.quorum * 100.0, tol.quorum_rel * 100.0),
                    frac >= tol.quorum,
                    format!("{:.0}% of {} trials at n = {n_max}", frac * 100.0, values.len()),
                ));
                regression = Some(fit);
            }
            Err(e) => verdicts.push(Verdict::new(
                "exponent",
                "log-log slope of mean E_α^i",
                "-",
                false,
                e.to_string(),
            )),
        }
    } else {
        let ratios: Vec<(usize, f64)> = table
            .means(Response::EAlpha)
            .into_iter()
            .map(|(n, e)| (n, e / (n as f64).ln()))
            .collect();
        let values: Vec<f64> = ratios.iter().map(|r| r.1).collect();
        let band = band_check(&values, tol.band_factor);
        verdicts.push(Verdict::new(
            "log_regime_ratio",
            "mean E_m^i / log n stays bounded",
            format!("within ×{} of the smallest-n value", tol.band_factor),
            band.passed,
            fmt_series(&ratios),
        ));
        regression = fit_against_log(table, Response::EAlpha).ok();
    }

    let window_means = per_n_means(records, |r| Some(r.n_spanning as f64 / r.n as f64));
    let events: usize = records.iter().map(|r| r.n_spanning).sum();
    if events < WINDOW_MIN_EVENTS {
        verdicts.push(Verdict::skipped(
            "window_count",
            "N(ωb₀, ωd₀)/n stays bounded below",
            format!("only {events} intervals span the window over all trials, need {WINDOW_MIN_EVENTS}"),
        ));
    } else if window_means.len() >= 2 {
        let first = window_means[0].1;
        let last = window_means.last().unwrap().1;
        let ok = window_means.iter().all(|w| w.1 > 0.0) && last >= first / tol.band_factor;
        verdicts.push(Verdict::new(
            "window_count",
            "N(ωb₀, ωd₀)/n stays bounded below",
            format!("positive, largest-n value ≥ smallest-n value / {}", tol.band_factor),
            ok,
            fmt_series(&window_means),
        ));
    } else {
        verdicts.push(Verdict::skipped(
            "window_count",
            "N(ωb₀, ωd₀)/n stays bounded below",
            "insufficient n",
        ));
    }

    if cfg.degree >= 1 && cfg.complex == ComplexSpec::Alpha2d {
        let over: Vec<&TrialRecord> = records
            .iter()
            .filter(|r| r.complex_size.is_some_and(|s| r.low_degree_count > s))
            .collect();
        verdicts.push(Verdict::new(
            "delaunay_count",
            "|PH_0| + |PH_1| ≤ number of Delaunay simplices",
            "exact",
            over.is_empty(),
            format!("{} of {} trials exceed", over.len(), records.len()),
        ));
    }
    (regression, verdicts)
}

fn write_outputs(out: &Path, run: &ScalingRun) -> Result<()> {
    let mut buf = Vec::new();
    run.table.write_csv(&mut buf)?;
    write_atomic(&out.join("scaling.csv"), &buf)?;
    buf.clear();
    write_trials_csv(&run.trials, &mut buf)?;
    write_atomic(&out.join("trials.csv"), &buf)?;
    buf.clear();
    run.table.write_timings_csv(&mut buf)?;
    write_atomic(&out.join("timings.csv"), &buf)?;
    write_atomic(&out.join("report.json"), run.report.to_json().as_bytes())?;
    Ok(())
}

/// Monte Carlo scaling experiment: runs all trials, fits the exponent and
/// writes `scaling.csv`, `trials.csv`, `timings.csv` and `report.json` when
/// an output directory is configured.
pub fn run_scaling(cfg: &ExperimentConfig) -> Result<ScalingRun> {
    let start = Instant::now();
    let trials = run_trials(cfg)?;
    let table = ScalingTable::new(trials.iter().map(TrialRecord::row).collect());
    for w in table.shape_warnings() {
        log::warn!("{w}");
    }
    let (regression, verdicts) = scaling_verdicts(cfg, &table, &trials);
    let report = RunReport {
        config: Some(cfg.clone()),
        table_path: cfg
            .output
            .as_ref()
            .map(|o| o.join("scaling.csv").display().to_string()),
        regression,
        verdicts,
        wall_seconds: start.elapsed().as_secs_f64(),
        ..Default::default()
    };
    let run = ScalingRun { report, table, trials };
    if let Some(out) = &cfg.output {
        write_outputs(out, &run)?;
    }
    Ok(run)
}

/// Weight exponents used by the dimension scan.
pub const SCAN_ALPHAS: [f64; 3] = [0.5, 1.0, 1.5];

/// Scaling run followed by `m̂ = α / (1 − slope)`; with `scan`, repeats the
/// estimate for each exponent in [`SCAN_ALPHAS`] below `m`.
pub fn run_dimension(cfg: &ExperimentConfig, scan: bool) -> Result<RunReport> {
    let start = Instant::now();
    let m = cfg.m() as f64;
    let tol = cfg.tolerances.dimension_rel * m;
    let tolerance = format!("±{tol:.3}");
    let base = run_scaling(cfg)?;
    let mut report = base.report;
    match &report.regression {
        Some(fit) if cfg.alpha < m => match dimension_from_slope(cfg.alpha, fit.slope) {
            Ok(est) => {
                report.verdicts.push(Verdict::new(
                    "dimension",
                    &format!("m̂ = α / (1 − slope) recovers m = {m}"),
                    tolerance.clone(),
                    (est.m_hat - m).abs() <= tol,
                    format!("m̂ = {:.4} from slope {:.4}", est.m_hat, est.slope),
                ));
                report.dimension = Some(est);
            }
            Err(e) => report.verdicts.push(Verdict::new("dimension", "m̂ is defined", "slope < 1", false, e.to_string())),
        },
        _ => report.verdicts.push(Verdict::skipped(
            "dimension",
            "m̂ = α / (1 − slope)",
            "needs a log-log fit with α < m",
        )),
    }
    if scan {
        for &alpha in SCAN_ALPHAS.iter().filter(|&&a| a < m) {
            let mut c = cfg.clone();
            c.alpha = alpha;
            c.output = cfg.output.as_ref().map(|o| o.join(format!("alpha_{alpha}")));
            let run = run_scaling(&c)?;
            if let Some(fit) = run.report.regression {
                if let Ok(est) = dimension_from_slope(alpha, fit.slope) {
                    report.dimension_scan.push(est);
                }
            }
        }
        let ok = !report.dimension_scan.is_empty()
            && report.dimension_scan.iter().all(|e| (e.m_hat - m).abs() <= tol);
        let detail = report
            .dimension_scan
            .iter()
            .map(|e| format!("α={}: m̂={:.3}", e.alpha_used, e.m_hat))
            .collect::<Vec<_>>()
            .join(", ");
        report.verdicts.push(Verdict::new(
            "dimension_scan",
            "m̂ agrees across weight exponents",
            tolerance,
            ok,
            detail,
        ));
    }
    report.wall_seconds = start.elapsed().as_secs_f64();
    if let Some(out) = &cfg.output {
        write_atomic(&out.join("report.json"), report.to_json().as_bytes())?;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::Status;
    use crate::sampling::Measure;

    fn square(degree: usize, n_grid: Vec<usize>, trials: usize) -> ExperimentConfig {
        ExperimentConfig {
            seed: 3,
            degree,
            alpha: 1.0,
            n_grid,
            trials,
            measure: Measure::UniformCube { dim: 2, side: 1.0 },
            complex: ComplexSpec::Alpha2d,
            map: None,
            output: None,
            jobs: Some(2),
            tolerances: Default::default(),
        }
    }

    #[test]
    fn single_size_reports_insufficient_n() {
        let run = run_scaling(&square(0, vec![16], 1)).unwrap();
        assert_eq!(run.table.rows().len(), 1);
        assert!(run.report.regression.is_none());
        let v = run.report.verdict("exponent").unwrap();
        assert_eq!(v.status, Status::Skipped);
        assert!(v.detail.contains("insufficient n"));
        assert!(run.report.passed());
    }

    #[test]
    fn mst_path_matches_alpha_path_in_degree_zero() {
        let cfg0 = square(0, vec![40], 1);
        let (mst_bc, _) = trial_barcode(&cfg0, 40, 0).unwrap();
        let cloud = sample(&cfg0.measure, 40, trial_seed(3, 40, 0)).unwrap();
        let full = reduce(&build_alpha_2d(&cloud).unwrap()).unwrap();
        let a: Vec<f64> = mst_bc.intervals(0).iter().map(|i| i.death).collect();
        let mut b: Vec<f64> = full.intervals(0).iter().map(|i| i.death).collect();
        b.sort_by(f64::total_cmp);
        assert_eq!(a.len(), b.len());
        assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-12));
    }

    #[test]
    fn resumes_from_trial_files_and_rejects_foreign_dirs() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = square(1, vec![32, 64, 128], 2);
        cfg.output = Some(dir.path().to_path_buf());
        let first = run_scaling(&cfg).unwrap();
        let scaling = fs::read(dir.path().join("scaling.csv")).unwrap();
        // a planted record proves the second run reads trial files instead of recomputing
        let path = trial_path(&dir.path().join("trials"), 64, 1);
        let mut planted: TrialRecord = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
        planted.e_alpha = 123.0;
        fs::write(&path, serde_json::to_string(&planted).unwrap()).unwrap();
        let second = run_scaling(&cfg).unwrap();
        assert_eq!(second.table.values_at(64, Response::EAlpha)[1], 123.0);
        assert_eq!(first.table.rows()[0], second.table.rows()[0]);
        fs::remove_dir_all(dir.path().join("trials")).unwrap();
        run_scaling(&cfg).unwrap();
        assert_eq!(fs::read(dir.path().join("scaling.csv")).unwrap(), scaling);

        let mut other = cfg.clone();
        other.seed = 99;
        assert!(matches!(run_scaling(&other), Err(Error::Config(_))));
    }

    #[test]
    fn log_regime_uses_ratio_band() {
        let mut cfg = square(1, vec![64, 128, 256], 3);
        cfg.alpha = 2.0;
        let run = run_scaling(&cfg).unwrap();
        assert!(run.report.verdict("log_regime_ratio").is_some());
        assert!(run.report.verdict("exponent").is_none());
    }
}
