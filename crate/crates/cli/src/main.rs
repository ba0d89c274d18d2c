use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use esn_force::harness::{compare_methods, seed_sweep, Experiment};
use esn_force::signal::MackeyGlass;
use esn_force::{io, ExperimentConfig};

mod plot;

#[derive(Parser)]
#[command(
    name = "esn-force",
    version,
    about = "FORCE-trained chaotic echo state networks on the Mackey-Glass benchmark"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train and free-run a single network.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run one method over a range of seeds.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "1..10")]
        seeds: String,
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// Run all three methods over a range of seeds and tabulate the MSEs.
    Compare {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "1..10")]
        seeds: String,
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// Write the target sequence as `step,f` CSV.
    SignalDump {
        #[command(flatten)]
        common: Common,
        /// Number of values; defaults to train_steps + predict_steps.
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Render an SVG chart from a run CSV or a compare table.
    Plot {
        #[arg(long, value_enum)]
        kind: PlotKind,
        #[arg(long)]
        input: PathBuf,
        /// Step window `START..END` (end exclusive).
        #[arg(long)]
        window: Option<String>,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
}

#[derive(Args, Clone)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    /// `key=value` override, applied after the config file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    method: Option<String>,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum PlotKind {
    OutputVsTarget,
    WeightNorm,
    WeightElements,
    NodeActivity,
    MseBar,
}

/// Distinguishes a completed-but-diverged run from an ordinary failure.
#[derive(Debug)]
struct Diverged(String);

impl std::fmt::Display for Diverged {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Diverged {}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<Diverged>() => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Run { common, seed } => cmd_run(&common, seed),
        Command::Sweep { common, seeds, jobs } => cmd_sweep(&common, &seeds, jobs),
        Command::Compare { common, seeds, jobs } => cmd_compare(&common, &seeds, jobs),
        Command::SignalDump { common, steps } => cmd_signal_dump(&common, steps),
        Command::Plot { kind, input, window, output, out_dir } => {
            let window = window.as_deref().map(parse_window).transpose()?;
            let output = output.unwrap_or_else(|| out_dir.join(format!("{}.svg", plot::kind_name(kind))));
            if let Some(parent) = output.parent() {
                fs::create_dir_all(parent)?;
            }
            let svg = plot::render(kind, &input, window)?;
            fs::write(&output, svg).with_context(|| format!("writing {}", output.display()))?;
            println!("wrote {}", output.display());
            Ok(())
        }
    }
}

fn load_config(common: &Common) -> Result<ExperimentConfig> {
    let text = match &common.config {
        Some(path) => fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?,
        None => String::new(),
    };
    let mut cfg = ExperimentConfig::load(&text)?;
    for ov in &common.overrides {
        let (k, v) = ov.split_once('=').with_context(|| format!("override `{ov}` is not KEY=VALUE"))?;
        cfg.set_raw(k.trim(), v.trim())?;
    }
    if let Some(m) = &common.method {
        cfg.method = io::parse_method(m)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn prepare_out(common: &Common, cfg: &ExperimentConfig) -> Result<()> {
    fs::create_dir_all(&common.out_dir).with_context(|| format!("creating {}", common.out_dir.display()))?;
    write(&common.out_dir.join("effective_config.txt"), &cfg.to_text())
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

/// `N..M` (inclusive) or a comma-separated list.
fn parse_seeds(spec: &str) -> Result<Vec<u64>> {
    let seeds: Vec<u64> = if let Some((a, b)) = spec.split_once("..") {
        let (a, b): (u64, u64) = (a.trim().parse()?, b.trim().parse()?);
        (a..=b).collect()
    } else {
        spec.split(',').filter(|s| !s.trim().is_empty()).map(|s| s.trim().parse()).collect::<Result<_, _>>()?
    };
    if seeds.is_empty() {
        bail!("seed list `{spec}` is empty");
    }
    Ok(seeds)
}

fn parse_window(spec: &str) -> Result<(usize, usize)> {
    let (a, b) = spec.split_once("..").with_context(|| format!("window `{spec}` is not START..END"))?;
    let (a, b) = (a.trim().parse()?, b.trim().parse()?);
    if a >= b {
        bail!("window `{spec}` is empty");
    }
    Ok((a, b))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6e}")).unwrap_or_else(|| "n/a".into())
}

fn cmd_run(common: &Common, seed: Option<u64>) -> Result<()> {
    let mut cfg = load_config(common)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    prepare_out(common, &cfg)?;
    let mut exp = Experiment::new(&cfg)?;
    let record = exp.run()?;
    let stem = format!("{}_{}", cfg.method, cfg.seed);
    write(&common.out_dir.join(format!("run_{stem}.csv")), &io::run_csv(&record))?;
    write(&common.out_dir.join(format!("model_{stem}.txt")), &io::write_snapshot(exp.model()))?;
    if let Some(step) = record.diverged_at {
        return Err(Diverged(format!("{} seed {} diverged at step {step}", cfg.method, cfg.seed)).into());
    }
    println!(
        "method={} seed={} train_mse={} predict_mse={}",
        cfg.method,
        cfg.seed,
        fmt_opt(record.train_mse),
        fmt_opt(record.predict_mse)
    );
    Ok(())
}

fn cmd_sweep(common: &Common, seeds: &str, jobs: usize) -> Result<()> {
    let cfg = load_config(common)?;
    let seeds = parse_seeds(seeds)?;
    prepare_out(common, &cfg)?;
    let sweep = seed_sweep(&cfg, &seeds, jobs)?;
    let sweeps = [sweep];
    write(&common.out_dir.join(format!("sweep_{}.csv", cfg.method)), &io::summary_csv(&sweeps))?;
    print!("{}", io::compare_text(&sweeps));
    report_divergence(&sweeps)
}

fn cmd_compare(common: &Common, seeds: &str, jobs: usize) -> Result<()> {
    let cfg = load_config(common)?;
    let seeds = parse_seeds(seeds)?;
    prepare_out(common, &cfg)?;
    let sweeps = compare_methods(&cfg, &seeds, jobs)?;
    write(&common.out_dir.join("compare_summary.csv"), &io::summary_csv(&sweeps))?;
    write(&common.out_dir.join("compare_table.csv"), &io::compare_csv(&sweeps))?;
    let table = io::compare_text(&sweeps);
    write(&common.out_dir.join("compare_table.txt"), &table)?;
    print!("{table}");
    report_divergence(&sweeps)
}

fn report_divergence(sweeps: &[esn_force::harness::SweepResult]) -> Result<()> {
    let diverged: Vec<String> = sweeps
        .iter()
        .flat_map(|s| s.records.iter())
        .filter_map(|r| r.diverged_at.map(|k| format!("{} seed {} at step {k}", r.method, r.seed)))
        .collect();
    if diverged.is_empty() {
        Ok(())
    } else {
        Err(Diverged(format!("diverged runs: {}", diverged.join("; "))).into())
    }
}

fn cmd_signal_dump(common: &Common, steps: Option<usize>) -> Result<()> {
    let cfg = load_config(common)?;
    prepare_out(common, &cfg)?;
    let steps = steps.unwrap_or(cfg.washout_steps + cfg.train_steps + cfg.predict_steps);
    let seq = MackeyGlass::sequence(cfg.mgs_tau, cfg.mgs_init, steps)?;
    let mut out = String::from("step,f\n");
    for (k, f) in seq.iter().enumerate() {
        out += &format!("{k},{f}\n");
    }
    let path = common.out_dir.join("signal.csv");
    write(&path, &out)?;
    println!("wrote {} ({} values)", path.display(), steps);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_specs() {
        assert_eq!(parse_seeds("1..3").unwrap(), vec![1, 2, 3]);
        assert_eq!(parse_seeds("4, 9").unwrap(), vec![4, 9]);
        assert!(parse_seeds("5..4").is_err());
        assert!(parse_seeds("").is_err());
    }

    #[test]
    fn window_specs() {
        assert_eq!(parse_window("5000..5500").unwrap(), (5000, 5500));
        assert!(parse_window("10..10").is_err());
        assert!(parse_window("10").is_err());
    }
}
