use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{ComplexSpec, ExperimentConfig};
use super::report::{RunReport, Verdict};
use super::scaling::{run_scaling, run_trials, write_trials_csv};
use crate::complexes::{build_alpha_2d, build_cech_oracle, build_rips};
use crate::error::Result;
use crate::geometry::{apply_bilipschitz, pairwise_distances, BiLipschitzMap};
use crate::persistence::{mst, ph0_reduced, reduce, Barcode, Interval};
use crate::sampling::{sample, splitmix64, Measure};
use crate::statistics::{band_check, e_alpha_sum, fit_loglog, interleaving_check, mst_alpha_weight, Response};

/// A deliberate defect planted to show the suite catches it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fault {
    /// An interval whose birth exceeds its death.
    InvertedInterval,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Sample sizes of the planar degree-1 experiment behind the bound probes.
    pub sizes: Vec<usize>,
    pub trials: usize,
    pub jobs: Option<usize>,
    pub inject: Option<Fault>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            seed: 20240601,
            sizes: vec![256, 512, 1024, 2048, 4096],
            trials: 5,
            jobs: None,
            inject: None,
        }
    }
}

/// Whether two barcodes agree, as sorted multisets, in degrees `0..=max_degree`.
pub fn barcodes_close(a: &Barcode, b: &Barcode, max_degree: usize, tol: f64) -> bool {
    (0..=max_degree).all(|i| {
        let (x, y) = (a.intervals(i), b.intervals(i));
        x.len() == y.len()
            && x.iter().zip(y).all(|(p, q)| {
                (p.birth - q.birth).abs() <= tol && (p.death - q.death).abs() <= tol
            })
    })
}

fn mst_identity(seed: u64) -> Result<Verdict> {
    let mut worst_death = 0.0f64;
    let mut worst_sum = 0.0f64;
    let clouds = 20;
    for k in 0..clouds {
        let dim = 2 + k % 2;
        let cloud = sample(&Measure::UniformCube { dim, side: 1.0 }, 30, splitmix64(seed ^ k as u64))?;
        let d = pairwise_distances(&cloud);
        let rips = reduce(&build_rips(&d, 1, f64::INFINITY)?)?;
        let tree = mst(&d);
        let mut deaths: Vec<f64> = tree.edges.iter().map(|e| e.length / 2.0).collect();
        deaths.sort_by(f64::total_cmp);
        let mut from_rips: Vec<f64> = rips.intervals(0).iter().map(|i| i.death).collect();
        from_rips.sort_by(f64::total_cmp);
        if deaths.len() != from_rips.len() {
            worst_death = f64::INFINITY;
        }
        for (a, b) in deaths.iter().zip(&from_rips) {
            worst_death = worst_death.max((a - b).abs());
        }
        let ph0 = ph0_reduced(&d);
        for alpha in [0.5, 1.0, 2.0] {
            worst_sum = worst_sum.max((e_alpha_sum(&ph0, 0, alpha)? - mst_alpha_weight(&tree, alpha)).abs());
        }
    }
    Ok(Verdict::new(
        "mst_ph0",
        "degree-0 deaths are half the MST edge lengths and E_α^0 = 2^{−α} Σ|e|^α",
        "1e-9 deaths, 1e-12 sums",
        worst_death <= 1e-9 && worst_sum <= 1e-12,
        format!("{clouds} clouds, max death gap {worst_death:.2e}, max sum gap {worst_sum:.2e}"),
    ))
}

fn alpha_cech(seed: u64) -> Result<Verdict> {
    let clouds = 10;
    let mut agree = 0;
    for k in 0..clouds {
        let cloud = sample(&Measure::UniformCube { dim: 2, side: 1.0 }, 12, splitmix64(seed.wrapping_add(k)))?;
        let a = reduce(&build_alpha_2d(&cloud)?)?;
        let c = reduce(&build_cech_oracle(&cloud, 2)?)?;
        if barcodes_close(&a, &c, 1, 1e-9) {
            agree += 1;
        }
    }
    Ok(Verdict::new(
        "alpha_cech",
        "alpha and Čech barcodes agree in degrees 0 and 1",
        "1e-9",
        agree == clouds,
        format!("{agree} of {clouds} clouds agree"),
    ))
}

/// Probes `(b, d)` with `L b < d / L`, so both interleaving windows are nonempty.
pub fn random_probes(rng: &mut impl Rng, lipschitz: f64, count: usize, max_birth: f64) -> Vec<(f64, f64)> {
    (0..count)
        .map(|_| {
            let b = rng.random_range(0.0..max_birth);
            let d = b * lipschitz * lipschitz * rng.random_range(1.05..3.0) + rng.random_range(0.0..0.05);
            (b, d)
        })
        .collect()
}

fn interleaving(seed: u64) -> Result<Verdict> {
    let lipschitz = 1.5;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut checked, mut violations) = (0, 0);
    let clouds = 10;
    for k in 0..clouds {
        let cloud = sample(&Measure::UniformCube { dim: 2, side: 1.0 }, 20, splitmix64(seed ^ (k << 8)))?;
        let map = BiLipschitzMap::random_coordinatewise(2, lipschitz, 4, (0.0, 1.0), &mut rng);
        let mapped = apply_bilipschitz(&map, &cloud)?;
        let bx = reduce(&build_cech_oracle(&cloud, 2)?)?;
        let bpsi = reduce(&build_cech_oracle(&mapped, 2)?)?;
        let probes = random_probes(&mut rng, lipschitz, 20, 0.2);
        for i in 0..=1 {
            let r = interleaving_check(&bx, &bpsi, i, lipschitz, &probes)?;
            checked += r.checked;
            violations += r.violations.len();
        }
    }
    Ok(Verdict::new(
        "interleaving",
        "N_X(b/L, Ld) ≤ N_ψX(b, d) ≤ N_X(Lb, d/L) under an L-bi-Lipschitz map",
        "exact counts",
        violations == 0 && checked > 0,
        format!("{checked} probes, {violations} violations, L = {lipschitz}"),
    ))
}

fn determinism(seed: u64) -> Result<Verdict> {
    let cfg = ExperimentConfig {
        seed,
        degree: 1,
        alpha: 1.0,
        n_grid: vec![64, 128, 256],
        trials: 3,
        measure: Measure::UniformCube { dim: 2, side: 1.0 },
        complex: ComplexSpec::Alpha2d,
        map: None,
        output: None,
        jobs: None,
        tolerances: Default::default(),
    };
    let csv = |jobs| -> Result<Vec<u8>> {
        let mut c = cfg.clone();
        c.jobs = Some(jobs);
        let run = run_scaling(&c)?;
        let mut buf = Vec::new();
        run.table.write_csv(&mut buf)?;
        write_trials_csv(&run.trials, &mut buf)?;
        Ok(buf)
    };
    let same = csv(1)? == csv(4)?;
    Ok(Verdict::new(
        "determinism",
        "identical configuration and seed give byte-identical CSV output",
        "exact bytes",
        same,
        "1 worker vs 4 workers",
    ))
}

/// Runs the cross-module oracle battery and the bound probes on a planar
/// degree-1 experiment. Failures are verdicts, not errors.
pub fn run_verify(opts: &VerifyOptions) -> Result<RunReport> {
    let start = Instant::now();
    let mut verdicts = vec![
        mst_identity(opts.seed)?,
        alpha_cech(opts.seed)?,
        interleaving(opts.seed)?,
        determinism(opts.seed)?,
    ];

    let cfg = ExperimentConfig {
        seed: opts.seed,
        degree: 1,
        alpha: 1.0,
        n_grid: opts.sizes.clone(),
        trials: opts.trials,
        measure: Measure::UniformCube { dim: 2, side: 1.0 },
        complex: ComplexSpec::Alpha2d,
        map: None,
        output: None,
        jobs: opts.jobs,
        tolerances: Default::default(),
    };
    let records = run_trials(&cfg)?;
    let factor = cfg.tolerances.band_factor;

    let mut bad: Vec<String> = records
        .iter()
        .filter(|r| r.violations > 0)
        .map(|r| format!("n = {}, trial {}: {} bad intervals", r.n, r.trial, r.violations))
        .collect();
    if opts.inject == Some(Fault::InvertedInterval) {
        let planted = Barcode::from_parts(vec![vec![], vec![Interval { birth: 0.7, death: 0.2 }]], vec![]);
        bad.extend(planted.violations());
    }
    verdicts.push(Verdict::new(
        "barcode_invariants",
        "every interval has 0 ≤ birth < death < ∞",
        "exact",
        bad.is_empty(),
        if bad.is_empty() { "none".to_string() } else { bad.join("; ") },
    ));

    let over = records
        .iter()
        .filter(|r| r.complex_size.is_some_and(|s| r.low_degree_count > s))
        .count();
    verdicts.push(Verdict::new(
        "delaunay_count",
        "|PH_0| + |PH_1| ≤ number of Delaunay simplices",
        "exact",
        over == 0,
        format!("{over} of {} trials exceed", records.len()),
    ));

    let mut ns: Vec<usize> = records.iter().map(|r| r.n).collect();
    ns.dedup();
    let mean_at = |n: usize, f: &dyn Fn(&super::scaling::TrialRecord) -> Option<f64>| {
        let v: Vec<f64> = records.iter().filter(|r| r.n == n).filter_map(f).collect();
        v.iter().sum::<f64>() / v.len().max(1) as f64
    };
    let probes: [(&str, &str, &dyn Fn(&super::scaling::TrialRecord) -> Option<f64>); 2] = [
        ("tail_bound", "sup_δ #{length ≥ δ}·δ^m stays bounded as n grows", &|r| Some(r.tail)),
        ("upper_bound", "E_α^i / |PH_i|^{(m−α)/m} stays bounded as n grows", &|r| r.upper_ratio),
    ];
    for (name, property, f) in probes {
        if ns.len() < 2 {
            verdicts.push(Verdict::skipped(name, property, "insufficient n"));
            continue;
        }
        let series: Vec<f64> = ns.iter().map(|&n| mean_at(n, f)).collect();
        let band = band_check(&series, factor);
        verdicts.push(Verdict::new(
            name,
            property,
            format!("within ×{factor} of the smallest-n value"),
            band.passed,
            format!("{series:.4?}"),
        ));
    }

    let table = crate::statistics::ScalingTable::new(records.iter().map(|r| r.row()).collect());
    if ns.len() < 3 {
        verdicts.push(Verdict::skipped(
            "linear_count",
            "|PH_1| grows linearly in n",
            format!("insufficient n: {} distinct sizes, need 3", ns.len()),
        ));
    } else {
        let fit = fit_loglog(&table, Response::PhCount)?;
        verdicts.push(Verdict::new(
            "linear_count",
            "|PH_1| grows linearly in n",
            "log-log slope 1 ± 0.1",
            (fit.slope - 1.0).abs() <= 0.1,
            format!("slope {:.4}", fit.slope),
        ));
    }

    Ok(RunReport {
        verdicts,
        wall_seconds: start.elapsed().as_secs_f64(),
        ..Default::default()
    })
}
