use std::fs::{self, File};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use phsums::complexes::{build_alpha_2d, build_cech_oracle, build_rips, default_rips_scale};
use phsums::geometry::{apply_bilipschitz, pairwise_distances, MetricSpace, PointCloud};
use phsums::harness::{run_dimension, run_scaling, run_verify, ExperimentConfig, Fault, RunReport, VerifyOptions};
use phsums::persistence::{mst_of_cloud, ph0_from_mst, reduce, reduce_dual, Barcode};
use phsums::sampling::sample;
use phsums::statistics::e_alpha_sum;

#[derive(Parser)]
#[command(name = "phsums", version, about = "Weighted persistent-homology sums of random point clouds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a point cloud from the measure of a config file.
    Sample(SampleArgs),
    /// Compute the reduced barcode of a point cloud.
    Barcode(BarcodeArgs),
    /// Compute E_α^i of a point cloud.
    Esum(EsumArgs),
    /// Run a Monte Carlo scaling experiment.
    Scaling(RunArgs),
    /// Run a scaling experiment and estimate the dimension.
    Dimension(DimensionArgs),
    /// Run the verification battery.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum ComplexKind {
    Alpha2d,
    Rips,
    Cech,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    n: usize,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CloudArgs {
    /// Point cloud CSV with header `x0,x1,...`.
    #[arg(long, conflicts_with_all = ["config", "n"])]
    input: Option<PathBuf>,
    /// Metric of `--input`: `euclidean` or `sphere`.
    #[arg(long, default_value = "euclidean")]
    space: String,
    /// Sample from this config's measure instead of reading `--input`.
    #[arg(long, requires = "n")]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value = "alpha2d")]
    complex: ComplexKind,
    /// Top simplex dimension for Rips and Čech.
    #[arg(long, default_value_t = 2)]
    max_dim: usize,
    /// Rips truncation radius; defaults to the scale rule.
    #[arg(long)]
    max_scale: Option<f64>,
}

#[derive(Args)]
struct BarcodeArgs {
    #[command(flatten)]
    cloud: CloudArgs,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EsumArgs {
    #[command(flatten)]
    cloud: CloudArgs,
    #[arg(long)]
    degree: usize,
    #[arg(long)]
    alpha: f64,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides the config.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    jobs: Option<usize>,
    /// `json` prints the report, `csv` the scaling table.
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct DimensionArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Repeat the estimate for α ∈ {0.5, 1, 1.5}.
    #[arg(long)]
    scan: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    seed: Option<u64>,
    /// Sample sizes of the bound probes, comma separated.
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    jobs: Option<usize>,
    /// Plant a defect to check that the suite reports it.
    #[arg(long, value_enum)]
    inject: Option<InjectKind>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Writes report.json into this directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum InjectKind {
    InvertedInterval,
}

fn sink(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    })
}

fn load_config(path: &Path, seed: Option<u64>) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(path).with_context(|| format!("loading {}", path.display()))?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn parse_space(text: &str, dim: usize) -> Result<MetricSpace> {
    match text {
        "euclidean" => Ok(MetricSpace::Euclidean { dim }),
        "sphere" if dim >= 2 => Ok(MetricSpace::Sphere { dim: dim - 1 }),
        other => bail!("unknown space `{other}`; use euclidean or sphere"),
    }
}

fn load_cloud(args: &CloudArgs) -> Result<PointCloud> {
    if let Some(path) = &args.input {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let dim = text.lines().next().map_or(0, |h| h.split(',').count());
        let space = parse_space(&args.space, dim)?;
        return Ok(PointCloud::read_csv(space, text.as_bytes())?);
    }
    let (Some(path), Some(n)) = (&args.config, args.n) else {
        bail!("give either --input or --config with --n");
    };
    let cfg = load_config(path, args.seed)?;
    let mut cloud = sample(&cfg.measure, n, cfg.seed)?;
    if let Some(map) = &cfg.map {
        cloud = apply_bilipschitz(map, &cloud)?;
    }
    Ok(cloud)
}

fn compute_barcode(args: &CloudArgs, cloud: &PointCloud) -> Result<Barcode> {
    Ok(match args.complex {
        ComplexKind::Alpha2d => reduce(&build_alpha_2d(cloud)?)?,
        ComplexKind::Cech => reduce(&build_cech_oracle(cloud, args.max_dim)?)?,
        ComplexKind::Rips => {
            let d = pairwise_distances(cloud);
            let m = cloud.space().intrinsic_dim();
            let scale = args
                .max_scale
                .unwrap_or_else(|| default_rips_scale(cloud.len(), m, d.max_entry()));
            reduce_dual(&build_rips(&d, args.max_dim, scale)?)?
        }
    })
}

fn emit_report(report: &RunReport, format: Format, table: Option<&phsums::statistics::ScalingTable>) -> Result<()> {
    for v in &report.verdicts {
        eprintln!("{v}");
    }
    match (format, table) {
        (Format::Csv, Some(t)) => t.write_csv(io::stdout().lock())?,
        _ => println!("{}", report.to_json()),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Sample(a) => {
            let cfg = load_config(&a.config, a.seed)?;
            let mut cloud = sample(&cfg.measure, a.n, cfg.seed)?;
            if let Some(map) = &cfg.map {
                cloud = apply_bilipschitz(map, &cloud)?;
            }
            cloud.write_csv(sink(a.out.as_deref())?)?;
        }
        Command::Barcode(a) => {
            let cloud = load_cloud(&a.cloud)?;
            let bc = if a.cloud.input.is_none() && a.cloud.n.is_some() && a.cloud.max_dim == 0 {
                ph0_from_mst(&mst_of_cloud(&cloud))
            } else {
                compute_barcode(&a.cloud, &cloud)?
            };
            let mut w = sink(a.out.as_deref())?;
            match a.format {
                Format::Csv => bc.write_csv(w)?,
                Format::Json => {
                    let value: Vec<_> = (0..=bc.max_degree())
                        .map(|i| {
                            serde_json::json!({
                                "degree": i,
                                "intervals": bc.intervals(i).iter().map(|it| [it.birth, it.death]).collect::<Vec<_>>(),
                                "essential": bc.essential(i),
                            })
                        })
                        .collect();
                    writeln!(w, "{}", serde_json::to_string_pretty(&value)?)?;
                }
            }
        }
        Command::Esum(a) => {
            let cloud = load_cloud(&a.cloud)?;
            let bc = if a.degree == 0 {
                ph0_from_mst(&mst_of_cloud(&cloud))
            } else {
                compute_barcode(&a.cloud, &cloud)?
            };
            let e = e_alpha_sum(&bc, a.degree, a.alpha)?;
            match a.format {
                Format::Csv => println!("degree,alpha,n,ph_count,e_alpha\n{},{},{},{},{}", a.degree, a.alpha, cloud.len(), bc.count(a.degree), e),
                Format::Json => println!(
                    "{}",
                    serde_json::json!({"degree": a.degree, "alpha": a.alpha, "n": cloud.len(), "ph_count": bc.count(a.degree), "e_alpha": e})
                ),
            }
        }
        Command::Scaling(a) => {
            let cfg = run_config(&a)?;
            let run = run_scaling(&cfg)?;
            emit_report(&run.report, a.format, Some(&run.table))?;
            return Ok(run.report.passed());
        }
        Command::Dimension(a) => {
            let cfg = run_config(&a.run)?;
            let report = run_dimension(&cfg, a.scan)?;
            emit_report(&report, a.run.format, None)?;
            return Ok(report.passed());
        }
        Command::Verify(a) => {
            let mut opts = VerifyOptions::default();
            if let Some(s) = a.seed {
                opts.seed = s;
            }
            if let Some(s) = a.sizes {
                opts.sizes = s;
            }
            if let Some(t) = a.trials {
                opts.trials = t;
            }
            opts.jobs = a.jobs;
            opts.inject = a.inject.map(|InjectKind::InvertedInterval| Fault::InvertedInterval);
            let report = run_verify(&opts)?;
            if let Some(dir) = &a.out {
                fs::create_dir_all(dir)?;
                fs::write(dir.join("report.json"), report.to_json())?;
            }
            emit_report(&report, a.format, None)?;
            return Ok(report.passed());
        }
    }
    Ok(true)
}

fn run_config(a: &RunArgs) -> Result<ExperimentConfig> {
    let mut cfg = load_config(&a.config, a.seed)?;
    if let Some(out) = &a.out {
        cfg.output = Some(out.clone());
    }
    if a.jobs.is_some() {
        cfg.jobs = a.jobs;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
