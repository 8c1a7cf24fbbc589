use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use tentlab::dynamics::OrbitOutcome;
use tentlab::harness::{
    emit_report, preset, run_experiment, ExperimentConfig, ExperimentKind, RunOutput, RunResult,
    PRESET_IDS,
};
use tentlab::Error;

#[derive(Parser)]
#[command(
    name = "tentlab",
    version,
    about = "Tent-map dynamics under finite precision"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print a forward trajectory
    Iterate(Common),
    /// Find the transient and cycle of a trajectory
    Cycle(Common),
    /// Integer preimage tree of the cycle reached from x0
    Basin {
        #[command(flatten)]
        common: Common,
        /// Use this integer cycle instead of searching from x0
        #[arg(long, value_delimiter = ',')]
        cycle: Option<Vec<u64>>,
    },
    /// Random backward walk, its histogram and a forward check
    Backward {
        #[command(flatten)]
        common: Common,
        /// Fractional-bit cap of the exact walk
        #[arg(long, default_value_t = tentlab::preimage::DEFAULT_PRECISION_CAP)]
        cap: u32,
        /// Fractional bits of the fixed-point forward check
        #[arg(long, default_value_t = 20)]
        check_q: u32,
        /// Length of the walk prefix that is checked
        #[arg(long, default_value_t = 40)]
        check_steps: usize,
    },
    /// Histogram of a forward trajectory
    Histogram(Common),
    /// Accumulated error against exact arithmetic
    Errsum(Common),
    /// Re-run a named experiment
    Repro {
        /// Experiment id
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(PRESET_IDS))]
        id: String,
        /// Report directory
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// Domain bound N (decimal or p/q)
    #[arg(long = "N", default_value = "100")]
    n: String,
    /// Slope a
    #[arg(long = "a", default_value = "2")]
    a: String,
    /// Initial condition (decimal or p/q)
    #[arg(long, default_value = "67.2")]
    x0: String,
    /// rational | fixed:p,q | fixed:q | f64 | f32
    #[arg(long, default_value = "f64")]
    backend: String,
    /// Steps, or the step budget for cycle searches
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long, default_value_t = 20)]
    bins: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Report directory; without it a summary is printed
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn config(&self, kind: ExperimentKind) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(kind_name(kind), kind);
        c.slope = self.a.clone();
        c.bound = self.n.clone();
        c.x0 = self.x0.clone();
        c.backend = self.backend.clone();
        c.steps = self.steps.unwrap_or(match kind {
            ExperimentKind::Iterate => 20,
            ExperimentKind::Errsum => 1000,
            ExperimentKind::Backward | ExperimentKind::Histogram => 60_000,
            _ => 1_000_000,
        });
        c.bins = self.bins;
        c.seed = self.seed;
        c
    }
}

fn kind_name(kind: ExperimentKind) -> &'static str {
    match kind {
        ExperimentKind::Iterate => "iterate",
        ExperimentKind::Cycle => "cycle",
        ExperimentKind::Basin => "basin",
        ExperimentKind::Backward => "backward",
        ExperimentKind::Histogram => "histogram",
        ExperimentKind::Errsum => "errsum",
        ExperimentKind::SineMap => "sine-map",
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn run(cli: Cli) -> tentlab::Result<()> {
    let (name, configs, out) = match cli.command {
        Command::Iterate(c) => single(c, ExperimentKind::Iterate),
        Command::Cycle(c) => single(c, ExperimentKind::Cycle),
        Command::Histogram(c) => single(c, ExperimentKind::Histogram),
        Command::Errsum(c) => single(c, ExperimentKind::Errsum),
        Command::Basin { common, cycle } => {
            let mut cfg = common.config(ExperimentKind::Basin);
            cfg.cycle = cycle;
            ("basin".to_string(), vec![cfg], common.out)
        }
        Command::Backward {
            common,
            cap,
            check_q,
            check_steps,
        } => {
            let mut cfg = common.config(ExperimentKind::Backward);
            cfg.backend = "rational".into();
            cfg.precision_cap = cap;
            cfg.check_q = check_q;
            cfg.check_steps = check_steps;
            ("backward".to_string(), vec![cfg], common.out)
        }
        Command::Repro { id, out } => {
            let configs = preset(&id).expect("id checked by the parser");
            (id, configs, out)
        }
    };
    for c in &configs {
        c.validate()?;
    }
    let runs = configs
        .iter()
        .map(run_experiment)
        .collect::<tentlab::Result<Vec<_>>>()?;
    for run in &runs {
        print_summary(run, configs.len() > 1);
    }
    if let Some(dir) = out {
        let files = emit_report(&dir, &name, &runs)?;
        println!(
            "wrote {} files and manifest.json to {}",
            files.len(),
            dir.display()
        );
    }
    Ok(())
}

fn single(c: Common, kind: ExperimentKind) -> (String, Vec<ExperimentConfig>, Option<PathBuf>) {
    let cfg = c.config(kind);
    (kind_name(kind).to_string(), vec![cfg], c.out)
}

fn print_summary(run: &RunOutput, labelled: bool) {
    if labelled {
        println!("[{}]", run.config.id);
    }
    if let Some(n) = &run.represented_bound {
        println!("N = {n}");
    }
    if let Some(x0) = &run.represented_x0 {
        println!("x0 = {x0}");
    }
    for e in &run.errata {
        println!(
            "erratum at step {}: reference {} ({}) but the map gives {} ({})",
            e.step, e.reference, e.reference_decimal, e.expected, e.expected_decimal
        );
    }
    match &run.result {
        RunResult::Trajectory(values) => {
            for (t, v) in values.iter().enumerate() {
                match v.bit_string() {
                    Some(bits) => println!("{t}\t{v}\t{bits}", v = v.to_decimal_string()),
                    None => println!("{t}\t{}", v.to_decimal_string()),
                }
            }
        }
        RunResult::Orbit(outcome) => print_outcome(outcome),
        RunResult::Basin { forest, .. } => {
            println!("cycle {:?}: {} nodes", forest.cycle, forest.len());
            print!("{}", forest.render_text());
        }
        RunResult::Backward {
            walk,
            histogram,
            consistency,
        } => {
            println!(
                "walk: {} steps, seed {}, {}",
                walk.steps(),
                walk.seed,
                match walk.truncated_from {
                    Some(k) => format!("truncated from step {k}"),
                    None => "exact".into(),
                }
            );
            println!(
                "histogram: sup-norm {:.5}, chi-square {:.3}",
                histogram.sup_norm, histogram.chi_square
            );
            println!(
                "forward check over {} steps: exact reproduction {}, {} diverges at {}",
                consistency.steps,
                consistency.exact_reproduced,
                consistency.fixed_backend,
                consistency
                    .first_divergence
                    .map_or("never".into(), |t| t.to_string())
            );
            print_outcome(&consistency.terminal);
        }
        RunResult::ForwardHistogram { outcome, histogram } => {
            print_outcome(outcome);
            println!(
                "histogram: {} samples, sup-norm {:.5}, chi-square {:.3}",
                histogram.total, histogram.sup_norm, histogram.chi_square
            );
        }
        RunResult::Errors(series) => {
            println!(
                "E_{} = {} ({})",
                series.deviations.len() - 1,
                series.total(),
                series.total().to_f64()
            );
        }
        RunResult::Sine(orbit) => println!("{orbit}"),
    }
}

fn print_outcome(outcome: &OrbitOutcome) {
    match outcome {
        OrbitOutcome::Cycle(r) => {
            let cycle: Vec<String> = r.cycle.iter().map(|v| v.to_decimal_string()).collect();
            println!(
                "transient {}, period {}, first integer at {}, cycle [{}]{}",
                r.transient,
                r.period,
                r.first_integer_step
                    .map_or("never".into(), |t| t.to_string()),
                cycle.join(", "),
                if r.even_cycle { " (even integers)" } else { "" }
            );
        }
        OrbitOutcome::NoRevisit(b) => {
            println!("no revisit within {} steps", b.steps);
        }
    }
}
