//! `mlnoise`: generate Mittag-Leffler correlated Gaussian noise, estimate its
//! autocorrelation and mean squared displacement, and validate the generator.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mlnoise::validation::{run_all, ValidationConfig, DEFAULT_SEED};
use mlnoise::{
    acf_empirical_with_mode, acf_theoretical, generate, generate_streaming, integrate_trajectories, msd_empirical,
    msd_theoretical, plan, AcfMode, MlParams, SeedPolicy, DEFAULT_LADDER_CAP,
};
use mlnoise_cli::formats::{self, Format};
use mlnoise_cli::manifest::{ParamsRecord, RunManifest};
use mlnoise_cli::svg::{line_chart, Chart};
use mlnoise_cli::{Failure, EXIT_FAILED};

#[derive(Parser)]
#[command(name = "mlnoise", version, about = "Gaussian noise with Mittag-Leffler correlations")]
struct Cli {
    /// Worker threads for generation and estimation [default: all cores]
    #[arg(long, env = "MLN_THREADS", global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate N noise sequences of length T
    #[command(allow_negative_numbers = true)]
    Generate(GenerateArgs),
    /// Empirical autocorrelation of a generated batch
    Acf(AcfArgs),
    /// Theoretical autocorrelation C(t) = C/tau^lambda E_lambda(-(t/tau)^lambda)
    #[command(allow_negative_numbers = true)]
    Acft(AcftArgs),
    /// Mean squared displacement, empirical (--input) or theoretical (law flags)
    #[command(allow_negative_numbers = true)]
    Msd(MsdArgs),
    /// Run the end-to-end validation suite
    Validate(ValidateArgs),
}

#[derive(Args)]
struct LawArgs {
    /// Amplitude C > 0
    #[arg(long)]
    c: f64,
    /// Order lambda in (0,2)
    #[arg(long, alias = "lamda")]
    lambda: f64,
    /// Time scale tau in (0,10000]
    #[arg(long)]
    tau: f64,
}

impl LawArgs {
    fn params(&self) -> Result<MlParams, Failure> {
        Ok(MlParams::new(self.c, self.lambda, self.tau)?)
    }
}

#[derive(Args)]
struct GenerateArgs {
    /// Number of sequences
    #[arg(long)]
    n: usize,
    /// Length of each sequence
    #[arg(long)]
    t: usize,
    #[command(flatten)]
    law: LawArgs,
    /// Master seed; drawn from the OS and recorded in the manifest when absent
    #[arg(long)]
    seed: Option<u64>,
    /// Output file [default: noise.csv or noise.bin]
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format [default: from the extension of --out, else csv]
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Largest half-length tried for the circulant embedding
    #[arg(long, default_value_t = DEFAULT_LADDER_CAP)]
    ladder_cap: usize,
}

#[derive(Args)]
struct SeriesOutput {
    /// Output CSV; a manifest sidecar is written next to it [default: stdout]
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a line chart
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Estimator {
    TimeAveraged,
    OriginOnly,
}

#[derive(Args)]
struct AcfArgs {
    /// Batch written by `generate` (CSV or binary)
    #[arg(long)]
    input: PathBuf,
    /// Largest lag; must be below T
    #[arg(long)]
    tmax: usize,
    /// Lag spacing
    #[arg(long, default_value_t = 1)]
    dt: usize,
    #[arg(long, value_enum, default_value = "time-averaged")]
    estimator: Estimator,
    #[command(flatten)]
    output: SeriesOutput,
}

#[derive(Args)]
struct AcftArgs {
    #[command(flatten)]
    law: LawArgs,
    /// Largest lag
    #[arg(long)]
    tmax: usize,
    /// Lag spacing
    #[arg(long, default_value_t = 1)]
    dt: usize,
    #[command(flatten)]
    output: SeriesOutput,
}

#[derive(Args)]
struct MsdArgs {
    /// Batch written by `generate`; its cumulative sums are the trajectories
    #[arg(long, conflicts_with_all = ["c", "lambda", "tau"])]
    input: Option<PathBuf>,
    /// Amplitude C > 0 (theoretical mode)
    #[arg(long, required_unless_present = "input")]
    c: Option<f64>,
    /// Order lambda in (0,2) (theoretical mode)
    #[arg(long, alias = "lamda", required_unless_present = "input")]
    lambda: Option<f64>,
    /// Time scale tau in (0,10000] (theoretical mode)
    #[arg(long, required_unless_present = "input")]
    tau: Option<f64>,
    /// Largest time
    #[arg(long)]
    tmax: usize,
    /// Time spacing
    #[arg(long, default_value_t = 1)]
    dt: usize,
    /// Plot with linear instead of logarithmic axes
    #[arg(long)]
    linear: bool,
    #[command(flatten)]
    output: SeriesOutput,
}

#[derive(Args)]
struct ValidateArgs {
    /// Fewer sequences, with tolerances widened to match
    #[arg(long)]
    quick: bool,
    /// Master seed of the statistical checks
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Multiplies every tolerance (for exercising the failure path)
    #[arg(long, hide = true, default_value_t = 1.0)]
    tolerance_scale: f64,
}

fn display(path: &Path) -> String {
    path.display().to_string()
}

fn cmd_generate(args: &GenerateArgs) -> Result<(), Failure> {
    let params = args.law.params()?;
    if args.n == 0 || args.t == 0 {
        return Err(Failure::usage("--n and --t must be at least 1"));
    }
    let spec = plan(&params, args.t, args.ladder_cap)?;
    let policy = SeedPolicy::from_option(args.seed);
    let seed = policy.master_seed();
    let format = args
        .format
        .or_else(|| args.out.as_deref().map(Format::from_path))
        .unwrap_or(Format::Csv);
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("noise.{}", format.as_str())));

    let mut manifest = RunManifest::new("generate");
    manifest.params = Some(ParamsRecord::from(&params));
    manifest.n = Some(args.n);
    manifest.t = Some(args.t);
    manifest.seed = Some(seed);
    manifest.t_opt = Some(spec.t_opt());
    manifest.format = Some(format.as_str().to_string());

    let write_err = |e: io::Error| Failure::io(&display(&out), e);
    match format {
        Format::Csv => {
            let batch = generate(&spec, args.n, args.t, Some(seed))?;
            formats::write_noise(&out, &batch, format, &manifest.header_lines()).map_err(write_err)?;
        }
        Format::Bin => {
            // stream sequence by sequence so large batches never sit in memory
            let mut w = BufWriter::new(fs::File::create(&out).map_err(write_err)?);
            formats::write_bin_header(&mut w, args.n, args.t).map_err(write_err)?;
            generate_streaming(&spec, args.n, args.t, &SeedPolicy::fixed(seed), |_, row| {
                formats::write_bin_row(&mut w, row)
            })
            .map_err(|e| Failure::new(EXIT_FAILED, format!("{}: {e}", out.display())))?;
            w.flush().map_err(write_err)?;
        }
    }
    manifest.stamped().write_sidecar(&out).map_err(write_err)?;
    eprintln!(
        "wrote {} x {} samples to {} (T_opt {}, seed {seed})",
        args.n,
        args.t,
        out.display(),
        spec.t_opt()
    );
    Ok(())
}

fn load_batch(path: &Path) -> Result<mlnoise::NoiseBatch, Failure> {
    Ok(formats::read_noise(path)?)
}

/// Writes a two-column series to `--out` (plus sidecar) or stdout, and the
/// optional chart.
fn emit_series(
    output: &SeriesOutput,
    manifest: RunManifest,
    columns: (&str, &str),
    xs: &[usize],
    values: &[f64],
    chart: Chart,
) -> Result<(), Failure> {
    let header = manifest.header_lines();
    match &output.out {
        Some(path) => {
            let err = |e: io::Error| Failure::io(&display(path), e);
            let mut w = BufWriter::new(fs::File::create(path).map_err(err)?);
            formats::write_series_csv(&mut w, &header, columns, xs, values).map_err(err)?;
            w.flush().map_err(err)?;
            manifest.stamped().write_sidecar(path).map_err(err)?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            formats::write_series_csv(&mut w, &header, columns, xs, values).map_err(|e| Failure::io("stdout", e))?;
        }
    }
    if let Some(svg) = &output.svg {
        let xf: Vec<f64> = xs.iter().map(|&x| x as f64).collect();
        fs::write(svg, line_chart(&chart, &xf, values)).map_err(|e| Failure::io(&display(svg), e))?;
    }
    Ok(())
}

fn cmd_acf(args: &AcfArgs, workers: usize) -> Result<(), Failure> {
    let batch = load_batch(&args.input)?;
    let mode = match args.estimator {
        Estimator::TimeAveraged => AcfMode::TimeAveraged,
        Estimator::OriginOnly => AcfMode::OriginOnly,
    };
    let acf = acf_empirical_with_mode(&batch, args.tmax, args.dt, workers, mode)?;
    let mut manifest = RunManifest::new("acf");
    manifest.n = Some(batch.n());
    manifest.t = Some(batch.t());
    manifest.tmax = Some(args.tmax);
    manifest.dt = Some(args.dt);
    manifest.input = Some(display(&args.input));
    manifest.kind = Some("empirical".into());
    manifest.estimator = Some(mode.as_str().into());
    let chart = Chart {
        title: "empirical autocorrelation".into(),
        x_label: "lag t".into(),
        y_label: "C(t)".into(),
        loglog: false,
    };
    emit_series(&args.output, manifest, ("lag", "acf"), &acf.lags, &acf.values, chart)
}

fn cmd_acft(args: &AcftArgs) -> Result<(), Failure> {
    let params = args.law.params()?;
    let acf = acf_theoretical(&params, args.tmax, args.dt)?;
    let mut manifest = RunManifest::new("acft");
    manifest.params = Some(ParamsRecord::from(&params));
    manifest.tmax = Some(args.tmax);
    manifest.dt = Some(args.dt);
    manifest.kind = Some("theoretical".into());
    let chart = Chart {
        title: format!("C(t), lambda={} tau={}", params.lambda(), params.tau()),
        x_label: "lag t".into(),
        y_label: "C(t)".into(),
        loglog: false,
    };
    emit_series(&args.output, manifest, ("lag", "acf"), &acf.lags, &acf.values, chart)
}

fn cmd_msd(args: &MsdArgs) -> Result<(), Failure> {
    let mut manifest = RunManifest::new("msd");
    manifest.tmax = Some(args.tmax);
    manifest.dt = Some(args.dt);
    let msd = match &args.input {
        Some(input) => {
            let batch = load_batch(input)?;
            manifest.n = Some(batch.n());
            manifest.t = Some(batch.t());
            manifest.input = Some(display(input));
            manifest.kind = Some("empirical".into());
            msd_empirical(&integrate_trajectories(&batch), args.tmax, args.dt)?
        }
        None => {
            // clap guarantees the three law flags when --input is absent
            let law = LawArgs {
                c: args.c.unwrap_or_default(),
                lambda: args.lambda.unwrap_or_default(),
                tau: args.tau.unwrap_or_default(),
            };
            let params = law.params()?;
            manifest.params = Some(ParamsRecord::from(&params));
            manifest.kind = Some("theoretical".into());
            msd_theoretical(&params, args.tmax, args.dt)?
        }
    };
    let chart = Chart {
        title: "mean squared displacement".into(),
        x_label: "t".into(),
        y_label: "MSD(t)".into(),
        loglog: !args.linear,
    };
    emit_series(&args.output, manifest, ("t", "msd"), &msd.times, &msd.values, chart)
}

fn cmd_validate(args: &ValidateArgs) -> Result<(), Failure> {
    let cfg = ValidationConfig {
        seed: args.seed,
        quick: args.quick,
        tolerance_scale: args.tolerance_scale,
    };
    let report = run_all(&cfg)?;
    println!(
        "validation: seed {}, N = {}{}",
        cfg.seed,
        cfg.n(),
        if cfg.quick { " (quick)" } else { "" }
    );
    print!("{}", report.render());
    let failures = report.failures();
    if failures.is_empty() {
        return Ok(());
    }
    let listed: Vec<String> = failures
        .iter()
        .map(|r| {
            format!(
                "  [{}] {}: {:.4e} > {:.4e}",
                r.criterion, r.label, r.measured, r.tolerance
            )
        })
        .collect();
    Err(Failure::new(
        EXIT_FAILED,
        format!("{} check(s) failed:\n{}", failures.len(), listed.join("\n")),
    ))
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let workers = match cli.threads {
        Some(0) => return Err(Failure::usage("--threads must be at least 1")),
        Some(k) => k,
        None => rayon::current_num_threads(),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Failure::new(EXIT_FAILED, e.to_string()))?;
    pool.install(|| match &cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Acf(a) => cmd_acf(a, workers),
        Command::Acft(a) => cmd_acft(a),
        Command::Msd(a) => cmd_msd(a),
        Command::Validate(a) => cmd_validate(a),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
