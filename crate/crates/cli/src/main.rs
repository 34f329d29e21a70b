use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use condind::harness::{ensemble_m, find_min_m, run_power_experiment, to_csv, ExperimentPlan, MinMOptions, TrialSetup};
use condind::instances::{generate, EnsembleSpec, Family};
use condind::io;
use condind::rng::role;
use condind::testers::{calibrate_threshold, run_tester, DEFAULT_EXCEED_FRACTION};
use condind::{
    implicit_flattening, sample_fixed, sample_poissonized, unbiased_estimate, Error, Mode, SampleSet, TesterConfig,
    TesterInput,
};

#[derive(Parser)]
#[command(name = "cit", version, about = "Conditional independence testing from samples")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a tester on a distribution or a sample file.
    Test(TestArgs),
    /// Generate an instance and write it as a distribution file.
    Gen(GenArgs),
    /// Draw samples from a distribution file.
    Sample(SampleArgs),
    /// Run a power experiment described by a plan file.
    Power(PowerArgs),
    /// Calibrate a threshold on a null family.
    Calibrate(CalibrateArgs),
    /// Search for the smallest m that separates a family pair.
    Minm(MinmArgs),
    /// Dump the flattening grid of one bin as CSV.
    Flatten(FlattenArgs),
    /// Evaluate the unbiased estimator of a polynomial on a fingerprint.
    Estimate(EstimateArgs),
}

#[derive(Args)]
struct TestArgs {
    #[arg(long)]
    mode: Mode,
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    m: Option<u64>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long, default_value_t = 2.0)]
    beta: f64,
    #[arg(long, default_value_t = 2.0)]
    zeta: f64,
    #[arg(long)]
    seed: u64,
    #[arg(long, conflicts_with = "samples", required_unless_present = "samples")]
    dist: Option<PathBuf>,
    #[arg(long)]
    samples: Option<PathBuf>,
    /// Print the full verdict as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    family: Family,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    eps: f64,
    /// Heavy-bin parameter of the binary ensembles.
    #[arg(long, default_value_t = 1.0)]
    m: f64,
    #[arg(long, default_value_t = 2)]
    l1: usize,
    #[arg(long, default_value_t = 2)]
    l2: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    dist: PathBuf,
    /// Number of samples, or the Poisson rate with `--poisson`.
    #[arg(long)]
    m: f64,
    #[arg(long)]
    poisson: bool,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PowerArgs {
    #[arg(long)]
    plan: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CalibrateArgs {
    #[arg(long, default_value = "binary")]
    mode: Mode,
    #[arg(long)]
    family: Family,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    m: u64,
    #[arg(long, default_value_t = 2)]
    l1: usize,
    #[arg(long, default_value_t = 2)]
    l2: usize,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = DEFAULT_EXCEED_FRACTION)]
    exceed: f64,
    #[arg(long, default_value_t = 0.1)]
    ens_m_ratio: f64,
    #[arg(long)]
    seed: u64,
}

#[derive(Args)]
struct MinmArgs {
    #[arg(long, default_value = "binary")]
    mode: Mode,
    #[arg(long)]
    null: Family,
    #[arg(long)]
    alt: Family,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    eps: f64,
    #[arg(long, default_value_t = 0.75)]
    target: f64,
    #[arg(long, default_value_t = 2)]
    l1: usize,
    #[arg(long, default_value_t = 2)]
    l2: usize,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 200)]
    calibration_trials: usize,
    #[arg(long, default_value_t = 64)]
    m_start: u64,
    #[arg(long, default_value_t = 1 << 24)]
    m_max: u64,
    #[arg(long)]
    seed: u64,
}

#[derive(Args)]
struct FlattenArgs {
    #[arg(long)]
    samples: PathBuf,
    /// 1-based bin index.
    #[arg(long)]
    z: usize,
    #[arg(long)]
    t1: usize,
    #[arg(long)]
    t2: usize,
}

#[derive(Args)]
struct EstimateArgs {
    /// Polynomial file, one `coef : i^e ...` term per line.
    #[arg(long)]
    poly: PathBuf,
    /// Fingerprint as `i:count` pairs.
    #[arg(long)]
    fingerprint: String,
    #[arg(long)]
    vars: usize,
}

fn open(path: &Path) -> Result<BufReader<File>, Error> {
    File::open(path).map(BufReader::new).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn create(path: &Path) -> Result<BufWriter<File>, Error> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn read_text(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn cmd_test(a: TestArgs) -> Result<(), Error> {
    let mut cfg = TesterConfig { beta: a.beta, zeta: a.zeta, ..TesterConfig::new(a.mode, a.eps) }.with_seed(a.seed);
    cfg.m_override = a.m;
    cfg.tau_override = a.tau;
    let verdict = match (&a.dist, &a.samples) {
        (Some(d), _) => {
            let p = io::read_distribution(open(d)?)?;
            run_tester(TesterInput::Distribution(&p), &cfg)?
        }
        (None, Some(s)) => {
            let s = io::read_samples(open(s)?)?;
            run_tester(TesterInput::Samples(&s), &cfg)?
        }
        (None, None) => unreachable!("clap requires one input"),
    };
    if a.json {
        println!("{}", serde_json::to_string(&verdict).map_err(|e| Error::Io(e.to_string()))?);
    } else {
        println!(
            "{} A={} tau={} m={} samples={}",
            if verdict.accept { "accept" } else { "reject" },
            verdict.statistic_a,
            verdict.threshold_tau,
            verdict.m_used,
            verdict.samples_drawn
        );
    }
    Ok(())
}

fn cmd_gen(a: GenArgs) -> Result<(), Error> {
    let spec = EnsembleSpec::new(a.family, a.n, a.eps, a.seed).with_m(a.m).with_sides(a.l1, a.l2);
    let inst = generate(&spec)?;
    let mut w = create(&a.out)?;
    io::write_distribution(&mut w, &inst.dist)?;
    w.flush()?;
    println!("{} n={} raw_mass={}", a.family, a.n, inst.raw_total);
    Ok(())
}

fn cmd_sample(a: SampleArgs) -> Result<(), Error> {
    let p = io::read_distribution(open(&a.dist)?)?;
    let triples = if a.poisson {
        sample_poissonized(&p, a.m, a.seed)?
    } else {
        if !(a.m >= 0.0 && a.m.fract() == 0.0) {
            return Err(Error::InvalidParameter(format!("sample count {} is not a whole number", a.m)));
        }
        sample_fixed(&p, a.m as usize, a.seed)?
    };
    let set = SampleSet::new(p.dims(), triples)?;
    let mut w = create(&a.out)?;
    io::write_samples(&mut w, &set)?;
    w.flush()?;
    println!("samples={}", set.len());
    Ok(())
}

fn cmd_power(a: PowerArgs) -> Result<(), Error> {
    let plan = ExperimentPlan::parse(&read_text(&a.plan)?)?;
    let rows = run_power_experiment(&plan)?;
    let mut w = create(&a.out)?;
    w.write_all(to_csv(&rows).as_bytes())?;
    w.flush()?;
    println!("rows={} skipped={}", rows.len(), rows.iter().filter(|r| r.skipped).count());
    Ok(())
}

fn cmd_calibrate(a: CalibrateArgs) -> Result<(), Error> {
    let setup = TrialSetup {
        mode: a.mode,
        n: a.n,
        l1: a.l1,
        l2: a.l2,
        eps: a.eps,
        m: a.m,
        ens_m: ensemble_m(a.n, a.ens_m_ratio),
        beta: 1.0,
        zeta: 1.0,
    };
    let tau = calibrate_threshold(
        |t| setup.null_statistic(a.family, a.seed, &[role::CALIBRATION], t),
        a.trials,
        a.exceed,
    )?;
    println!("tau={tau}");
    Ok(())
}

fn cmd_minm(a: MinmArgs) -> Result<(), Error> {
    let opts = MinMOptions {
        mode: a.mode,
        l1: a.l1,
        l2: a.l2,
        trials: a.trials,
        calibration_trials: a.calibration_trials,
        m_start: a.m_start,
        m_max: a.m_max,
        ..MinMOptions::default()
    };
    let m = find_min_m(a.n, a.eps, (a.null, a.alt), a.target, a.seed, &opts)?;
    println!("m={m}");
    Ok(())
}

fn cmd_flatten(a: FlattenArgs) -> Result<(), Error> {
    let s = io::read_samples(open(&a.samples)?)?;
    let d = s.dims();
    if a.z == 0 || a.z > d.n {
        return Err(Error::InvalidParameter(format!("bin {} outside 1..={}", a.z, d.n)));
    }
    let bins = s.bins(s.len());
    let f = implicit_flattening(&bins[a.z - 1], d.l1, d.l2, a.t1, a.t2)?;
    let grid = f.grid();
    let mut out = std::io::stdout().lock();
    for row in grid.chunks(d.l2) {
        let line: Vec<String> = row.iter().map(u64::to_string).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}

fn cmd_estimate(a: EstimateArgs) -> Result<(), Error> {
    let q = io::parse_polynomial(&read_text(&a.poly)?, a.vars)?;
    let f = io::parse_fingerprint(&a.fingerprint, a.vars)?;
    println!("{}", unbiased_estimate(&q, &f)?);
    Ok(())
}

fn exit_code(cmd_is_power: bool, e: &Error) -> u8 {
    match e {
        Error::BudgetExhausted(_) => 3,
        Error::Parse { .. } | Error::InvalidParameter(_) if cmd_is_power => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let is_power = matches!(cli.cmd, Cmd::Power(_));
    let res = match cli.cmd {
        Cmd::Test(a) => cmd_test(a),
        Cmd::Gen(a) => cmd_gen(a),
        Cmd::Sample(a) => cmd_sample(a),
        Cmd::Power(a) => cmd_power(a),
        Cmd::Calibrate(a) => cmd_calibrate(a),
        Cmd::Minm(a) => cmd_minm(a),
        Cmd::Flatten(a) => cmd_flatten(a),
        Cmd::Estimate(a) => cmd_estimate(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(is_power, &e))
        }
    }
}
