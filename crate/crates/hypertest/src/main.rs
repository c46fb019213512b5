//! Command-line front end: simulate patterns, compute scattering samples,
//! test for hyperuniformity, calibrate the null law, and estimate power.
//!
//! Every stochastic subcommand takes a seed (default 0) and records it in
//! the output header; identical invocations produce byte-identical data
//! files. Exit codes: 0 success, 1 usage or input error, 2 numerical or
//! stochastic failure.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hypertest::calibrate::{
    calibrate_null, critical_value, read_null_model, run_power, test_report, write_null_model,
    NullModel, PowerConfig, DEFAULT_CALIBRATION_REPS, DEFAULT_CUTOFF, DEFAULT_LEVEL,
    DEFAULT_POWER_REPS,
};
use hypertest::error::{Error, Result};
use hypertest::fit::lr_statistic;
use hypertest::grid::build_wave_grid;
use hypertest::pattern::{read_pattern_path, write_pattern_path};
use hypertest::simulate::{simulate, Model, ModelConfig};
use hypertest::spectral::{read_sample_path, scaled_ccdf, write_sample_path};
use hypertest::verify::scan_negative_branch;

#[derive(Parser)]
#[command(
    name = "hypertest",
    version,
    about = "Likelihood-ratio testing for hyperuniformity of point patterns"
)]
struct Cli {
    /// Worker threads for replicate loops (default: all cores). Results are
    /// independent of this setting by the per-replicate stream contract.
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate point patterns, writing one text file per replicate.
    Simulate(SimulateArgs),
    /// Scattering intensities of one pattern at its admissible wave vectors.
    Scatter(ScatterArgs),
    /// Complementary CDF of mean-scaled intensities, for log-scale plots.
    Ccdf(CcdfArgs),
    /// Likelihood-ratio test of hyperuniformity on one spectral sample.
    Test(TestArgs),
    /// Monte-Carlo calibration of the null law of the statistic.
    Calibrate(CalibrateArgs),
    /// Rejection-rate table over thinned matching patterns.
    Power(PowerArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Model: poisson | thomas | rsa | url | matching.
    #[arg(long)]
    model: String,
    /// Dimension (1, 2, or 3).
    #[arg(long)]
    dim: usize,
    /// Torus side length (integer for url and matching).
    #[arg(long)]
    length: f64,
    /// Target points per unit volume.
    #[arg(long, default_value_t = 1.0)]
    intensity: f64,
    /// Matching: intensity of the Poisson partner process.
    #[arg(long, default_value_t = 3.0)]
    alpha: f64,
    /// Thomas: mean children per cluster.
    #[arg(long, default_value_t = 10.0)]
    cluster_size: f64,
    /// Thomas: standard deviation of the child displacement.
    #[arg(long, default_value_t = 1.0)]
    cluster_std: f64,
    /// RSA: number of spheres (default: intensity times volume).
    #[arg(long)]
    count: Option<usize>,
    /// RSA: target volume fraction (default 0.747 / 0.547 / 0.384 by dim).
    #[arg(long)]
    fraction: Option<f64>,
    /// Retention probability of a final independent thinning.
    #[arg(long, default_value_t = 1.0)]
    thin: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of replicates; replicate i uses stream i of the seed.
    #[arg(long, default_value_t = 1)]
    reps: u64,
    /// Output directory, one `rep-NNNNNN.txt` file per replicate.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ScatterArgs {
    /// Input point-pattern file.
    #[arg(long = "in")]
    input: PathBuf,
    /// Wave-vector norm cutoff.
    #[arg(long, default_value_t = DEFAULT_CUTOFF)]
    cutoff: f64,
    /// Output `kappa,x` CSV.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CcdfArgs {
    /// Input sample CSVs; values pool across all files.
    #[arg(long = "in", num_args = 1.., required = true)]
    input: Vec<PathBuf>,
    /// Use only the entry at this index in each file (a fixed wave vector)
    /// instead of pooling every entry.
    #[arg(long)]
    vector: Option<usize>,
    /// Output `z,ccdf` CSV.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TestArgs {
    /// Input `kappa,x` sample CSV.
    #[arg(long = "in")]
    input: PathBuf,
    /// Calibrated null-model JSON; defaults to the built-in reference null.
    #[arg(long)]
    null: Option<PathBuf>,
    /// Significance level.
    #[arg(long, default_value_t = DEFAULT_LEVEL)]
    level: f64,
    /// Also scan the negative-slope branch of the parameter cone for
    /// likelihood values above the reported maximum.
    #[arg(long)]
    verify: bool,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CalibrateArgs {
    /// Dimension of the reference grid (1, 2, or 3).
    #[arg(long)]
    dim: usize,
    /// Torus side length of the reference grid.
    #[arg(long)]
    length: f64,
    /// Wave-vector norm cutoff of the reference grid.
    #[arg(long, default_value_t = DEFAULT_CUTOFF)]
    cutoff: f64,
    /// Synthetic null replicates.
    #[arg(long, default_value_t = DEFAULT_CALIBRATION_REPS)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output null-model JSON (written atomically).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PowerArgs {
    /// Only `matching` is supported.
    #[arg(long, default_value = "matching")]
    model: String,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// Matching: intensity of the Poisson partner process.
    #[arg(long, default_value_t = 3.0)]
    alpha: f64,
    #[arg(long, default_value_t = DEFAULT_CUTOFF)]
    cutoff: f64,
    /// Thinning retentions p, one table row s = 1 - p each.
    #[arg(long, value_delimiter = ',', required = true)]
    thin_list: Vec<f64>,
    /// Box lengths, one table column each.
    #[arg(long, value_delimiter = ',', required = true)]
    length_list: Vec<f64>,
    #[arg(long, default_value_t = DEFAULT_POWER_REPS)]
    reps: usize,
    #[arg(long, default_value_t = DEFAULT_LEVEL)]
    level: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Calibrated null-model JSON; defaults to the built-in reference null.
    #[arg(long)]
    null: Option<PathBuf>,
    /// Output CSV, rows s, columns L.
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let ok = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let _ = e.print();
            return if ok { ExitCode::SUCCESS } else { ExitCode::from(1) };
        }
    };
    if let Some(workers) = cli.workers {
        if workers > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(workers).build_global();
        }
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Scatter(args) => cmd_scatter(args),
        Command::Ccdf(args) => cmd_ccdf(args),
        Command::Test(args) => cmd_test(args),
        Command::Calibrate(args) => cmd_calibrate(args),
        Command::Power(args) => cmd_power(args),
    }
}

/// First provenance lines of every output: tool version and the invocation.
fn provenance() -> Vec<String> {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    vec![
        format!("hypertest v{}", env!("CARGO_PKG_VERSION")),
        format!("command {}", argv.join(" ")),
    ]
}

fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    let model: Model = args.model.parse()?;
    let mut config = ModelConfig::new(model, args.dim, args.length);
    config.target_intensity = args.intensity;
    config.alpha = args.alpha;
    config.mean_cluster_size = args.cluster_size;
    config.cluster_std = args.cluster_std;
    config.rsa_count = args.count;
    config.volume_fraction = args.fraction;
    config.thin = args.thin;
    config.validate()?;
    fs::create_dir_all(&args.out)?;
    let config_json = serde_json::to_string(&config)?;
    for rep in 0..args.reps {
        let pattern = simulate(&config, args.seed, rep)?;
        let mut comments = provenance();
        comments.push(format!("config {config_json}"));
        comments.push(format!("seed {}", args.seed));
        comments.push(format!("replicate {rep}"));
        let path = args.out.join(format!("rep-{rep:06}.txt"));
        write_pattern_path(path, &pattern, &comments)?;
    }
    Ok(())
}

fn cmd_scatter(args: ScatterArgs) -> Result<()> {
    let pattern = read_pattern_path(&args.input)?;
    let grid = build_wave_grid(pattern.dim(), pattern.box_length(), args.cutoff)?;
    let mut sample = hypertest::spectral::spectral_sample(&pattern, &grid)?;
    sample.meta.source = args.input.display().to_string();
    write_sample_path(&args.out, &sample, &provenance())?;
    Ok(())
}

fn cmd_ccdf(args: CcdfArgs) -> Result<()> {
    let mut values = Vec::new();
    for path in &args.input {
        let sample = read_sample_path(path)?;
        match args.vector {
            Some(idx) => {
                let Some(&(_, x)) = sample.entries.get(idx) else {
                    return Err(Error::Config(format!(
                        "vector index {idx} out of range: {} has {} entries",
                        path.display(),
                        sample.len()
                    )));
                };
                values.push(x);
            }
            None => values.extend(sample.entries.iter().map(|&(_, x)| x)),
        }
    }
    let table = scaled_ccdf(&values)?;
    let mut w = BufWriter::new(fs::File::create(&args.out)?);
    for line in provenance() {
        writeln!(w, "# {line}")?;
    }
    writeln!(w, "# values {}", values.len())?;
    writeln!(w, "z,ccdf")?;
    for (z, c) in table {
        writeln!(w, "{z},{c}")?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_test(args: TestArgs) -> Result<()> {
    let sample = read_sample_path(&args.input)?;
    let fit = lr_statistic(&sample)?;
    let null = match &args.null {
        Some(path) => read_null_model(path)?,
        None => NullModel::builtin(),
    };
    let report = test_report(&fit, &null, args.level)?;

    let mut lines = Vec::new();
    for line in provenance() {
        lines.push(format!("# {line}"));
    }
    lines.push(format!("t0_hat {}", fit.t0_hat));
    lines.push(format!("s_hat {}", fit.s_hat));
    lines.push(format!("t1_hat {}", fit.t1_hat));
    lines.push(format!("T {}", fit.t_stat));
    lines.push(format!("p_value {}", report.p_value));
    lines.push(format!("level {}", report.level));
    lines.push(format!("reject {}", report.reject));
    lines.push(format!("null {}", report.null_id));
    if args.verify {
        let hits = scan_negative_branch(&sample, fit.h1)?;
        match hits.iter().max_by(|a, b| a.excess.partial_cmp(&b.excess).unwrap()) {
            None => lines.push("verify negative_branch clean".to_string()),
            Some(top) => lines.push(format!(
                "verify negative_branch hits {} max_excess {} at_y {}",
                hits.len(),
                top.excess,
                top.y
            )),
        }
    }

    match &args.out {
        Some(path) => {
            let mut w = BufWriter::new(fs::File::create(path)?);
            for line in &lines {
                writeln!(w, "{line}")?;
            }
            w.flush()?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut w = stdout.lock();
            for line in &lines {
                writeln!(w, "{line}")?;
            }
        }
    }
    Ok(())
}

fn cmd_calibrate(args: CalibrateArgs) -> Result<()> {
    let calibration = calibrate_null(args.dim, args.length, args.cutoff, args.reps, args.seed)?;
    let null = &calibration.null;
    write_null_model(&args.out, null)?;
    println!("p0 {}", null.p0);
    println!("dof {}", null.dof);
    println!("diag_shape {}", null.diag_shape);
    println!("diag_rate {}", null.diag_rate);
    if DEFAULT_LEVEL < 1.0 - null.p0 {
        println!("critical_{DEFAULT_LEVEL} {}", critical_value(null, DEFAULT_LEVEL)?);
    }
    println!("failures {}", calibration.failures);
    println!("written {}", args.out.display());
    Ok(())
}

fn cmd_power(args: PowerArgs) -> Result<()> {
    let model: Model = args.model.parse()?;
    if model != Model::Matching {
        return Err(Error::Config(format!(
            "power studies support only the matching model, got '{}'",
            model.name()
        )));
    }
    if args.thin_list.iter().any(|&p| !(p > 0.0 && p <= 1.0)) {
        return Err(Error::Config("thinning retentions must lie in (0, 1]".into()));
    }
    let s_values: Vec<f64> = args.thin_list.iter().map(|&p| 1.0 - p).collect();
    let null = match &args.null {
        Some(path) => read_null_model(path)?,
        None => NullModel::builtin(),
    };
    let cfg = PowerConfig {
        dim: args.dim,
        alpha: args.alpha,
        cutoff: args.cutoff,
        level: args.level,
        reps: args.reps,
        seed: args.seed,
    };
    let table = run_power(&cfg, &s_values, &args.length_list, &null)?;

    let mut rows = Vec::new();
    let mut header = String::from("s");
    for length in &table.box_lengths {
        header.push(',');
        header.push_str(&format!("{length}"));
    }
    rows.push(header);
    for (i, &s) in table.s_values.iter().enumerate() {
        let mut row = format!("{s}");
        for rate in &table.rates[i] {
            row.push(',');
            row.push_str(&format!("{rate}"));
        }
        rows.push(row);
    }

    let mut w = BufWriter::new(fs::File::create(&args.out)?);
    for line in provenance() {
        writeln!(w, "# {line}")?;
    }
    writeln!(w, "# level {} reps {} seed {} null {}", table.level, table.reps, table.seed, null.id())?;
    writeln!(w, "# failures {}", table.failures)?;
    for row in &rows {
        writeln!(w, "{row}")?;
    }
    w.flush()?;
    for row in &rows {
        println!("{row}");
    }
    Ok(())
}
