use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use kmu::bench::{self, RunParams};
use kmu::io::{save_dataset, CsvOptions};
use kmu::report::{read_reports, write_reports, write_reports_to, write_trace};
use kmu::{Algorithm, ExperimentPlan};
use kmu_core::analytic;
use kmu_core::datagen::{self, GridSpec, MixtureSpec, OneDSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Parser, Debug)]
#[command(
    name = "kmu",
    version,
    about = "k-means with utility-guided center jumps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic dataset as CSV.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
        #[arg(long, global = true)]
        out: Option<PathBuf>,
    },
    /// Cluster one dataset with one algorithm and emit a run report.
    Run(RunArgs),
    /// Execute an experiment plan and write runs.csv and summary.csv.
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write the kms jump traces as traces.jsonl.
        #[arg(long)]
        traces: bool,
    },
    /// Print closed-form seeding quantities.
    Analyze {
        #[command(subcommand)]
        what: Analysis,
    },
    /// Rebuild summary.csv from a runs.csv.
    Report {
        #[arg(long)]
        runs: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum GenKind {
    /// Square grid of square point clusters (defaults: 6x6 clusters of 6x6 points).
    GridA {
        #[arg(long, default_value_t = 6)]
        clusters: usize,
        #[arg(long, default_value_t = 6)]
        points: usize,
        #[arg(long, default_value_t = 1.0 / 72.0)]
        spacing: f64,
        #[arg(long, default_value_t = 1.0 / 6.0)]
        pitch: f64,
    },
    /// Uniform n_side x n_side lattice on the unit square.
    FlatB {
        #[arg(long, default_value_t = 36)]
        n_side: usize,
    },
    /// `g` 1-D clusters of `h` points, length `a`, gaps `a*eta`.
    Oned {
        #[arg(long)]
        g: usize,
        #[arg(long, default_value_t = 1000)]
        h: usize,
        #[arg(long, default_value_t = 1.0)]
        a: f64,
        #[arg(long)]
        eta: f64,
    },
    /// Gaussian mixture with means uniform in the unit cube.
    Gmm {
        #[arg(long, default_value_t = 5)]
        d: usize,
        #[arg(long, default_value_t = 50)]
        g: usize,
        #[arg(long, default_value_t = 2000)]
        n: usize,
        #[arg(long, default_value_t = 1e-5)]
        sigma: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long, value_enum)]
    algo: Algorithm,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = b',' as char)]
    delimiter: char,
    #[arg(long)]
    header: bool,
    /// Zero-based columns to keep, comma separated.
    #[arg(long, value_delimiter = ',')]
    columns: Option<Vec<usize>>,
    /// Standardize every dimension before clustering.
    #[arg(long)]
    scale: bool,
    #[arg(long, default_value_t = 2)]
    retries: usize,
    #[arg(long, default_value_t = 0.01)]
    epsilon: f64,
    #[arg(long, default_value_t = 10)]
    restarts: usize,
    #[arg(long)]
    candidates: Option<usize>,
    #[arg(long, default_value_t = 300)]
    max_iterations: usize,
    /// Report CSV; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Jump trace as JSON lines (kmu and kms only).
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Final centers as CSV.
    #[arg(long)]
    centers: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Analysis {
    /// Probability of one-center-per-cluster D² seeding.
    Pcorr {
        #[arg(long)]
        g: usize,
        /// Tabulate every g up to this value.
        #[arg(long)]
        through: Option<usize>,
    },
    /// Bound on seeding into an already covered cluster.
    Pf {
        #[arg(long)]
        i: usize,
        #[arg(long)]
        g: usize,
        #[arg(long)]
        eta: f64,
    },
    /// Cluster error with one versus two centers.
    FRatio {
        #[arg(long, default_value_t = 1.0)]
        a: f64,
    },
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn gen(kind: GenKind, out: Option<PathBuf>) -> Result<()> {
    let data = match kind {
        GenKind::GridA {
            clusters,
            points,
            spacing,
            pitch,
        } => datagen::gen_grid(&GridSpec {
            clusters_per_side: clusters,
            points_per_side: points,
            intra_spacing: spacing,
            cluster_pitch: pitch,
        })?,
        GenKind::FlatB { n_side } => datagen::gen_uniform_grid(n_side)?,
        GenKind::Oned { g, h, a, eta } => datagen::gen_1d(&OneDSpec { g, h, a, eta })?,
        GenKind::Gmm {
            d,
            g,
            n,
            sigma,
            seed,
        } => {
            let spec = MixtureSpec { d, g, sigma, n };
            datagen::gen_mixture(&spec, &mut ChaCha8Rng::seed_from_u64(seed))?.data
        }
    };
    match out {
        Some(path) => save_dataset(&path, &data)?,
        None => {
            let mut stdout = io::stdout().lock();
            kmu::io::write_dataset(&mut stdout, &data)?;
            stdout.flush()?;
        }
    }
    eprintln!(
        "{}: {} points in {} dimensions",
        data.name(),
        data.len(),
        data.dim()
    );
    Ok(())
}

fn run(args: RunArgs) -> Result<()> {
    let delimiter = u8::try_from(args.delimiter).context("delimiter must be a single byte")?;
    let opts = CsvOptions {
        delimiter,
        header: args.header,
        columns: args.columns,
    };
    let mut data = kmu::load_csv(&args.input, &opts)?;
    if args.scale {
        data = kmu::standardize(&data)?.0;
    }
    if args.trace.is_some() && !matches!(args.algo, Algorithm::Kmu | Algorithm::Kms) {
        bail!("--trace requires --algo kmu or kms");
    }
    let params = RunParams {
        restarts: args.restarts,
        candidates: args.candidates,
        epsilon: args.epsilon,
        retry_max: args.retries,
        max_iterations: args.max_iterations,
        ..RunParams::default()
    };
    let outcome = bench::run_single(&data, args.algo, args.k, args.seed, &params)?;

    match &args.out {
        Some(path) => write_reports(path, std::slice::from_ref(&outcome.report))?,
        None => write_reports_to(io::stdout().lock(), std::slice::from_ref(&outcome.report))?,
    }
    if let (Some(path), Some(trace)) = (&args.trace, &outcome.trace) {
        let mut out = create(path)?;
        write_trace(&mut out, trace)?;
        out.flush()?;
    }
    if let Some(path) = &args.centers {
        let centers = kmu_core::Dataset::new(
            "centers",
            outcome.result.centers.dim(),
            outcome.result.centers.as_slice().to_vec(),
        )?;
        save_dataset(path, &centers)?;
    }
    Ok(())
}

fn run_bench(config: &Path, out: &Path, traces: bool) -> Result<()> {
    let text =
        fs::read_to_string(config).with_context(|| format!("cannot read {}", config.display()))?;
    let plan =
        ExperimentPlan::from_toml(&text).with_context(|| format!("in {}", config.display()))?;
    let outcome = bench::run_experiment_in(&plan, config.parent())?;

    fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))?;
    write_reports(out.join("runs.csv"), &outcome.reports)?;
    bench::write_summary(create(&out.join("summary.csv"))?, &outcome.summaries)?;
    if traces {
        let mut w = create(&out.join("traces.jsonl"))?;
        for ((k, run), trace) in &outcome.kms_traces {
            for rec in &trace.records {
                let line = serde_json::json!({ "k": k, "run": run, "record": rec });
                writeln!(w, "{line}")?;
            }
        }
        w.flush()?;
    }

    for s in &outcome.summaries {
        eprintln!(
            "k={:<4} kmu {:>7.3}% (ovh {:>6.1}%)  kms {:>7.3}% (ovh {:>6.1}%)",
            s.k, s.kmu.mean_impr, s.kmu.overhead_pct, s.kms.mean_impr, s.kms.overhead_pct
        );
    }
    for f in &outcome.failures {
        eprintln!("failed: k={} run={}: {}", f.k, f.run, f.message);
    }
    if !outcome.failures.is_empty() {
        bail!("{} of the cells failed", outcome.failures.len());
    }
    Ok(())
}

fn analyze(what: Analysis) -> Result<()> {
    let mut stdout = io::stdout().lock();
    match what {
        Analysis::Pcorr { g, through } => {
            let last = through.unwrap_or(g);
            if last < g {
                bail!("--through must be at least --g");
            }
            writeln!(stdout, "g,pcorr")?;
            for g in g..=last {
                writeln!(stdout, "{g},{:e}", analytic::pcorr(g)?)?;
            }
        }
        Analysis::Pf { i, g, eta } => {
            writeln!(stdout, "{:e}", analytic::pf_wrong_seeding(i, g, eta)?)?;
        }
        Analysis::FRatio { a } => {
            writeln!(stdout, "f1,f2,ratio")?;
            writeln!(
                stdout,
                "{:e},{:e},{}",
                analytic::f1(a),
                analytic::f2(a),
                analytic::f1(a) / analytic::f2(a)
            )?;
        }
    }
    Ok(())
}

fn report(runs: &Path, out: Option<PathBuf>) -> Result<()> {
    let reports = read_reports(runs)?;
    let summaries = bench::summarize(&reports)?;
    match out {
        Some(path) => bench::write_summary(create(&path)?, &summaries)?,
        None => bench::write_summary(io::stdout().lock(), &summaries)?,
    }
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Gen { kind, out } => gen(kind, out),
        Command::Run(args) => run(args),
        Command::Bench {
            config,
            out,
            traces,
        } => run_bench(&config, &out, traces),
        Command::Analyze { what } => analyze(what),
        Command::Report { runs, out } => report(&runs, out),
    }
}
