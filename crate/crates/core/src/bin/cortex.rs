use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, ValueEnum};

use cortex_core::harness::{
    bench_compression, bench_injection, bench_landmarks, bench_memory, bench_throughput, demo, demo_scripts,
    BenchReport, LandmarkSettings, DEFAULT_AGENT_COUNTS, DEFAULT_LENGTHS, DEMO_PROMPT,
};
use cortex_core::model::{init_weights, ModelConfig};
use cortex_core::scheduler::{write_audit_csv, RunOutput, RuntimeConfig, Script};
use cortex_core::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Bench {
    Memory,
    Compression,
    Landmarks,
    Injection,
    Demo,
    /// River cadence with and without stream agents (never gates the exit code).
    Throughput,
}

/// Shared-weight multi-agent runtime: benchmarks and a scripted demo.
#[derive(Debug, Parser)]
#[command(name = "cortex", version)]
struct Cli {
    #[arg(long, value_enum)]
    bench: Bench,

    /// Agent counts for the memory sweep, or the stream-agent cap elsewhere.
    #[arg(long, value_delimiter = ',')]
    agents: Vec<usize>,

    #[arg(long, default_value_t = 64)]
    k: usize,

    #[arg(long, default_value_t = 0.5)]
    lambda: f64,

    #[arg(long, default_value_t = 0.5)]
    theta: f64,

    /// Model and benchmark seed. CORTEX_SEED takes precedence.
    #[arg(long, default_value_t = 42)]
    seed: u64,

    /// Directory for CSV/JSON reports.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Run stream agents inline at token boundaries.
    #[arg(long)]
    single_lane: bool,

    /// Demo prompt; with --script, runs one custom scenario.
    #[arg(long)]
    prompt: Option<String>,

    /// JSON script file for the demo.
    #[arg(long)]
    script: Option<PathBuf>,

    /// River tokens to generate after the prompt.
    #[arg(long, default_value_t = 64)]
    max_new_tokens: usize,
}

fn seed(cli: &Cli) -> u64 {
    match std::env::var("CORTEX_SEED") {
        Ok(v) => v.trim().parse().unwrap_or_else(|_| {
            eprintln!("warning: ignoring unparsable CORTEX_SEED={v:?}");
            cli.seed
        }),
        Err(_) => cli.seed,
    }
}

fn emit(report: &BenchReport, out: Option<&PathBuf>) -> Result<()> {
    print!("{}", report.to_csv()?);
    for note in &report.notes {
        println!("# {note}");
    }
    for v in &report.verdicts {
        println!("{v}");
    }
    if let Some(dir) = out {
        for p in report.write_to(dir)? {
            eprintln!("wrote {}", p.display());
        }
    }
    Ok(())
}

fn write_run(run: &RunOutput, name: &str, out: Option<&PathBuf>) -> Result<()> {
    println!("--- {name} ---\n{}\n", run.transcript.text());
    let mut audit = Vec::new();
    write_audit_csv(&run.audit, &mut audit)?;
    let Some(dir) = out else { return Ok(()) };
    fs::create_dir_all(dir)?;
    fs::write(dir.join(format!("{name}_transcript.txt")), run.transcript.text())?;
    fs::write(dir.join(format!("{name}_transcript.json")), run.transcript.to_json()?)?;
    fs::write(dir.join(format!("{name}_audit.csv")), &audit)?;

    let mut w = csv::Writer::from_path(dir.join(format!("{name}_triggers.csv")))?;
    w.write_record(["trigger_id", "stream_position", "payload"])?;
    for t in &run.triggers {
        w.write_record([t.trigger_id.to_string(), t.stream_position.to_string(), t.payload.clone()])?;
    }
    w.flush()?;
    let mut w = csv::Writer::from_path(dir.join(format!("{name}_injections.csv")))?;
    for r in &run.injections {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn run(cli: &Cli) -> Result<bool> {
    let seed = seed(cli);
    let weights = Arc::new(init_weights(&ModelConfig::default().with_seed(seed))?);
    let out = cli.out.as_ref();
    let runtime = RuntimeConfig {
        k: cli.k,
        lambda: cli.lambda,
        theta: cli.theta,
        max_stream_agents: cli.agents.first().copied().unwrap_or(RuntimeConfig::default().max_stream_agents),
        max_new_tokens: cli.max_new_tokens,
        single_lane: cli.single_lane,
        ..RuntimeConfig::default()
    };
    runtime.validate()?;

    let reports = match cli.bench {
        Bench::Memory => {
            let counts = if cli.agents.is_empty() { DEFAULT_AGENT_COUNTS.to_vec() } else { cli.agents.clone() };
            vec![bench_memory(weights, &counts, cli.k)?]
        }
        Bench::Compression => vec![bench_compression(weights.config(), &DEFAULT_LENGTHS, cli.k, seed)?],
        Bench::Landmarks => {
            let settings = LandmarkSettings { seed, lambda: cli.lambda, ..LandmarkSettings::default() };
            vec![bench_landmarks(&settings)?]
        }
        Bench::Injection => vec![bench_injection(weights, seed, 20)?],
        Bench::Throughput => {
            let agents = cli.agents.first().copied().unwrap_or(8);
            vec![bench_throughput(weights, agents, cli.max_new_tokens.max(agents * 16))?]
        }
        Bench::Demo => {
            let scenarios: Vec<(String, String, Option<Script>)> = match &cli.script {
                Some(path) => {
                    let script = Script::from_json(&fs::read_to_string(path)?)?;
                    let prompt = cli.prompt.clone().unwrap_or_else(|| DEMO_PROMPT.to_string());
                    vec![("custom".into(), prompt, Some(script))]
                }
                None => {
                    let prompt = cli.prompt.clone().unwrap_or_else(|| DEMO_PROMPT.to_string());
                    demo_scripts().into_iter().map(|(n, s)| (n.to_string(), prompt.clone(), s)).collect()
                }
            };
            let mut reports = Vec::new();
            for (name, prompt, script) in scenarios {
                let (run, report) = demo(weights.clone(), runtime, &name, &prompt, script.as_ref())?;
                write_run(&run, &name, out)?;
                reports.push(report);
            }
            reports
        }
    };

    let mut ok = true;
    for r in &reports {
        emit(r, out)?;
        ok &= r.passed();
    }
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
