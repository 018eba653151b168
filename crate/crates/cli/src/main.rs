use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use swapobf::distribution::tvd_pct;
use swapobf::features::{features_csv, score_candidates};
use swapobf::simulator::{basis_inputs, simulate_mode, Aggregate, InputPolicy, SimMode};
use swapobf::{
    compare_metrics, obfuscate, overhead_report, parse_qasm, restore, run_sweep, serialize_qasm, tvd, Circuit,
    Distribution, MetricId, NoiseSpec, ObfuscationKey, SimConfig, SweepReport,
};

#[derive(Parser)]
#[command(name = "swapobf", version, about = "Obfuscate quantum circuits with dummy SWAP gates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the feature table of every insertion point as CSV
    Features {
        #[arg(long = "in")]
        input: PathBuf,
        /// Write to a file instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Insert one dummy SWAP chosen by a metric
    Obfuscate {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=6))]
        metric: u8,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        key: PathBuf,
        /// Also write the selection outcome (survivors and pruning trace)
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Remove the dummy SWAPs recorded in a key
    Restore {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare gate count and depth of two circuits
    Overhead {
        #[arg(long)]
        orig: PathBuf,
        #[arg(long)]
        obf: PathBuf,
    },
    /// Simulate a circuit and write its output distribution
    Simulate {
        #[arg(long = "in")]
        input: PathBuf,
        /// Input bitstring (most significant qubit first) or `all`
        #[arg(long = "input")]
        bits: String,
        #[command(flatten)]
        mode: ModeArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Total variation distance between two distribution files
    Tvd { a: PathBuf, b: PathBuf },
    /// Evaluate every insertion point and score the six metrics
    Sweep {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        mode: ModeArgs,
        /// `all`, `uniform` or one input bitstring
        #[arg(long, default_value = "all")]
        inputs: String,
        /// How per-input distances combine under `--inputs all`
        #[arg(long, value_enum, default_value_t = AggregateArg::Mean)]
        aggregate: AggregateArg,
        #[arg(long)]
        report: PathBuf,
        /// Also write the candidate table as CSV
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Evaluate candidates one at a time
        #[arg(long)]
        serial: bool,
    },
    /// Summarize metric performance over several sweep reports
    Compare {
        /// Glob pattern matching report files
        #[arg(long)]
        reports: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ModeArgs {
    /// Exact probabilities (the default)
    #[arg(long, conflicts_with_all = ["shots", "noise"])]
    exact: bool,
    /// Sample this many shots from the exact distribution
    #[arg(long, conflicts_with = "noise")]
    shots: Option<u64>,
    #[arg(long, default_value_t = 0, requires = "shots")]
    seed: u64,
    /// Depolarizing noise as `p1,p2,trajectories,seed`
    #[arg(long, value_parser = parse_noise)]
    noise: Option<NoiseSpec>,
}

impl ModeArgs {
    fn mode(&self) -> SimMode {
        match (self.shots, self.noise) {
            (Some(shots), _) => SimMode::Shots { shots, seed: self.seed },
            (None, Some(spec)) => SimMode::Noisy(spec),
            _ => SimMode::Exact,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum AggregateArg {
    Mean,
    Max,
}

fn parse_noise(s: &str) -> Result<NoiseSpec, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [p1, p2, traj, seed] = parts[..] else {
        return Err(format!("expected p1,p2,trajectories,seed, got `{s}`"));
    };
    let spec = NoiseSpec {
        p1: p1.parse().map_err(|e| format!("p1: {e}"))?,
        p2: p2.parse().map_err(|e| format!("p2: {e}"))?,
        trajectories: traj.parse().map_err(|e| format!("trajectories: {e}"))?,
        seed: seed.parse().map_err(|e| format!("seed: {e}"))?,
    };
    spec.validate().map_err(|e| e.to_string())?;
    Ok(spec)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn load_circuit(path: &Path) -> Result<Circuit> {
    parse_qasm(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn load_key(path: &Path) -> Result<ObfuscationKey> {
    ObfuscationKey::from_json(&read(path)?).with_context(|| format!("parsing key {}", path.display()))
}

/// A distribution file holds either one distribution or a map from input
/// bitstring to distribution.
enum DistFile {
    Single(Distribution),
    PerInput(BTreeMap<String, Distribution>),
}

fn load_distributions(path: &Path) -> Result<DistFile> {
    let text = read(path)?;
    let value: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    if value.get("counts").is_some() {
        let d = Distribution::from_json(&text).with_context(|| format!("invalid distribution in {}", path.display()))?;
        return Ok(DistFile::Single(d));
    }
    let map: BTreeMap<String, Distribution> =
        serde_json::from_value(value).with_context(|| format!("parsing {}", path.display()))?;
    for (input, d) in &map {
        d.validate().with_context(|| format!("input {input} in {}", path.display()))?;
    }
    Ok(DistFile::PerInput(map))
}

fn input_policy(inputs: &str, aggregate: AggregateArg) -> InputPolicy {
    match inputs {
        "all" => InputPolicy::AllBasis {
            aggregate: match aggregate {
                AggregateArg::Mean => Aggregate::Mean,
                AggregateArg::Max => Aggregate::Max,
            },
        },
        "uniform" => InputPolicy::UniformSuperposition,
        bits => InputPolicy::Fixed { bits: bits.to_string() },
    }
}

fn circuit_name(path: &Path) -> String {
    path.file_stem().map_or_else(|| "circuit".into(), |s| s.to_string_lossy().into_owned())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |x| format!("{x:.4}"))
}

fn print_report(r: &SweepReport) {
    println!(
        "{}: {} candidates, best {} worst {} average {}{}",
        r.circuit_name,
        r.candidate_rows.len(),
        fmt_opt(r.best_tvd),
        fmt_opt(r.worst_tvd),
        fmt_opt(r.average_tvd),
        if r.complete { "" } else { " (incomplete)" }
    );
    if r.obfuscation_resistant {
        println!("no insertion point changes the output");
    }
    for m in &r.metric_rows {
        println!(
            "  metric {}  position {:>3}  tvd {}  vs best {}  vs average {}{}",
            m.metric_id.get(),
            m.chosen_position,
            fmt_opt(m.tvd),
            fmt_opt(m.delta_vs_best_pct),
            fmt_opt(m.delta_vs_average_pct),
            if m.fallback { "  (fallback)" } else { "" }
        );
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Features { input, out } => {
            let csv = features_csv(&score_candidates(&load_circuit(&input)?)?);
            match out {
                Some(path) => write(&path, &csv)?,
                None => print!("{csv}"),
            }
        }
        Command::Obfuscate { input, metric, out, key, report } => {
            let circuit = load_circuit(&input)?;
            let result = obfuscate(&circuit, MetricId::new(metric)?)?;
            write(&out, &serialize_qasm(&result.circuit))?;
            write(&key, &result.key.to_json())?;
            if let Some(path) = report {
                write(&path, &serde_json::to_string_pretty(&result.outcome)?)?;
            }
            let c = result.outcome.chosen.candidate;
            println!(
                "inserted swap q[{}],q[{}] after slice {} (position {}, score {})",
                c.qubit_a.0, c.qubit_b.0, c.slice_index, c.position_id, result.outcome.chosen.score
            );
        }
        Command::Restore { input, key, out } => {
            let restored = restore(&load_circuit(&input)?, &load_key(&key)?)?;
            write(&out, &serialize_qasm(&restored))?;
        }
        Command::Overhead { orig, obf } => {
            let report = overhead_report(&load_circuit(&orig)?, &load_circuit(&obf)?)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
        Command::Simulate { input, bits, mode, out } => {
            let circuit = load_circuit(&input)?;
            let mode = mode.mode();
            let text = if bits == "all" {
                let mut all = BTreeMap::new();
                for (i, b) in basis_inputs(&circuit).into_iter().enumerate() {
                    let d = simulate_mode(&circuit, &b, &mode, i as u64)?;
                    all.insert(b, d);
                }
                serde_json::to_string_pretty(&all)?
            } else {
                simulate_mode(&circuit, &bits, &mode, 0)?.to_json()
            };
            write(&out, &text)?;
        }
        Command::Tvd { a, b } => {
            let value = match (load_distributions(&a)?, load_distributions(&b)?) {
                (DistFile::Single(x), DistFile::Single(y)) => tvd(&x, &y)?,
                (DistFile::PerInput(x), DistFile::PerInput(y)) => {
                    ensure!(
                        x.keys().eq(y.keys()),
                        "the two files cover different inputs"
                    );
                    ensure!(!x.is_empty(), "no inputs in {}", a.display());
                    let mut total = 0.0;
                    for (k, d) in &x {
                        total += tvd(d, &y[k])?;
                    }
                    total / x.len() as f64
                }
                _ => bail!("cannot compare a single distribution with a per-input file"),
            };
            println!("tvd {value}");
            println!("pct {}", tvd_pct(value));
        }
        Command::Sweep { input, mode, inputs, aggregate, report, csv, serial } => {
            let circuit = load_circuit(&input)?;
            let config = SimConfig { mode: mode.mode(), inputs: input_policy(&inputs, aggregate) };
            let r = run_sweep(&circuit_name(&input), &circuit, &config, !serial)?;
            write(&report, &r.to_json())?;
            if let Some(path) = csv {
                write(&path, &r.candidates_csv())?;
            }
            print_report(&r);
        }
        Command::Compare { reports, out, csv } => {
            let mut paths: Vec<PathBuf> = glob::glob(&reports)
                .with_context(|| format!("bad pattern `{reports}`"))?
                .collect::<Result<_, _>>()?;
            paths.sort();
            ensure!(!paths.is_empty(), "no reports match `{reports}`");
            let loaded = paths
                .iter()
                .map(|p| SweepReport::from_json(&read(p)?).with_context(|| format!("parsing {}", p.display())))
                .collect::<Result<Vec<_>>>()?;
            let summary = compare_metrics(&loaded);
            ensure!(!summary.circuits.is_empty(), "none of the {} reports is complete", loaded.len());
            write(&out, &summary.to_json())?;
            if let Some(path) = csv {
                write(&path, &summary.to_csv())?;
            }
            for s in &summary.skipped {
                eprintln!("skipped incomplete report {s}");
            }
            for m in &summary.metrics {
                println!(
                    "metric {}  circuits {}  vs best {:.3}  vs average {:.3}  beats average {}",
                    m.metric_id.get(),
                    m.circuits,
                    m.mean_delta_vs_best_pct,
                    m.mean_delta_vs_average_pct,
                    m.beats_average
                );
            }
        }
    }
    Ok(())
}

fn main() -> Result<()> {
    run(Cli::parse())
}
