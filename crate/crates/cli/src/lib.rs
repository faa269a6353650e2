//! Multi-seed experiment harness: runs the learner, writes learning curves,
//! convergence summaries and inferred automata.

mod config;
mod convergence;

pub use config::{task_defaults, EnvKind, ExperimentConfig};
pub use convergence::{window_episodes, ConvergenceTracker};

use std::collections::VecDeque;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use afrai_core::automata::{fra_from_text, fra_to_dot, fra_to_text, FiniteRewardAutomaton};
use afrai_core::env::Environment;
use afrai_core::oracle::{finite_horizon_optimum, product_mdp};
use afrai_core::orchestrator::{afrai_run, MetricsSink, Phase, RunConfig, RunReport};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Relative distance from the optimum still counted as converged.
pub const CONVERGENCE_TOLERANCE: f64 = 0.05;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid value for --{field}: {message}")]
    Field { field: &'static str, message: String },
    #[error("i/o error: {0}")]
    Io(String),
    #[error("run failed: {0}")]
    Run(String),
    #[error("{0}")]
    Parse(String),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

/// Best expected reward per step over one episode, with the true task known.
pub fn optimal_reward_per_step<E: Environment>(env: &E, task: &FiniteRewardAutomaton, eplength: usize) -> f64 {
    finite_horizon_optimum(&product_mdp(env, task), eplength) / eplength as f64
}

/// Streams per-step records to `rewards_seed<k>.csv` and tracks convergence.
pub struct CsvSink<W: Write> {
    writer: csv::Writer<W>,
    last: VecDeque<f64>,
    tracker: ConvergenceTracker,
    error: Option<csv::Error>,
}

impl<W: Write> CsvSink<W> {
    pub fn new(out: W, tracker: ConvergenceTracker) -> Result<Self, CliError> {
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(["step", "reward", "avg10", "phase", "hyp_states"])?;
        Ok(CsvSink { writer, last: VecDeque::with_capacity(10), tracker, error: None })
    }

    pub fn finish(mut self) -> Result<ConvergenceTracker, CliError> {
        if let Some(e) = self.error.take() {
            return Err(e.into());
        }
        self.writer.flush()?;
        Ok(self.tracker)
    }
}

impl<W: Write> MetricsSink for CsvSink<W> {
    fn record(&mut self, step: u64, reward: f64, phase: Phase, hypothesis_states: usize) {
        if self.last.len() == 10 {
            self.last.pop_front();
        }
        self.last.push_back(reward);
        self.tracker.push(step, reward);
        if self.error.is_some() {
            return;
        }
        let avg = self.last.iter().sum::<f64>() / self.last.len() as f64;
        let row = [step.to_string(), reward.to_string(), avg.to_string(), phase.as_str().to_string(), hypothesis_states.to_string()];
        if let Err(e) = self.writer.write_record(&row) {
            self.error = Some(e);
        }
    }
}

#[derive(Clone, Debug)]
pub struct SeedResult {
    pub seed: u64,
    pub convergence_step: Option<u64>,
    pub optimum_per_step: f64,
    pub report: RunReport,
}

/// One seeded run against `env`, writing its CSV, DOT and automaton files to `out_dir`.
pub fn run_seed<E: Environment>(
    env: &mut E,
    task: &FiniteRewardAutomaton,
    run: &RunConfig,
    seed: u64,
    out_dir: &Path,
) -> Result<SeedResult, CliError> {
    let optimum = optimal_reward_per_step(env, task, run.hyper.eplength);
    let tracker = ConvergenceTracker::new(run.hyper.eplength, optimum, CONVERGENCE_TOLERANCE);
    let file = File::create(out_dir.join(format!("rewards_seed{seed}.csv")))?;
    let mut sink = CsvSink::new(BufWriter::new(file), tracker)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let report = afrai_run(env, run.clone(), &mut rng, &mut sink).map_err(|e| CliError::Run(e.to_string()))?;
    let tracker = sink.finish()?;
    std::fs::write(out_dir.join(format!("hypothesis_seed{seed}.dot")), fra_to_dot(&report.hypothesis))?;
    std::fs::write(out_dir.join(format!("hypothesis_seed{seed}.fra")), fra_to_text(&report.hypothesis))?;
    Ok(SeedResult { seed, convergence_step: tracker.convergence_step(), optimum_per_step: optimum, report })
}

pub fn write_summary(path: &Path, results: &[SeedResult]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "seed",
        "converged",
        "convergence_step",
        "optimum_per_step",
        "hyp_states",
        "membership_queries",
        "rl_membership_queries",
        "equivalence_queries",
        "steps",
    ])?;
    for r in results {
        w.write_record([
            r.seed.to_string(),
            r.convergence_step.is_some().to_string(),
            r.convergence_step.map(|s| s.to_string()).unwrap_or_default(),
            r.optimum_per_step.to_string(),
            r.report.hypothesis.num_states().to_string(),
            r.report.membership_queries.to_string(),
            r.report.rl_membership_queries.to_string(),
            r.report.equivalence_queries.to_string(),
            r.report.steps.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Runs every seed on a bounded pool of threads and writes `summary.csv`.
///
/// Results come back in the order of `config.seeds`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<SeedResult>, CliError> {
    config.validate()?;
    // fail on a bad map before spawning anything
    config.build_env()?;
    std::fs::create_dir_all(&config.out_dir).map_err(|e| CliError::Io(format!("{}: {e}", config.out_dir.display())))?;
    let run = config.run_config();
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(config.seeds.len());
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<SeedResult, CliError>>>> =
        Mutex::new((0..config.seeds.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&seed) = config.seeds.get(i) else { break };
                let result = config.build_env().and_then(|mut env| {
                    let task = env.task().clone();
                    run_seed(&mut env, &task, &run, seed, &config.out_dir)
                });
                slots.lock().expect("no worker panicked")[i] = Some(result);
            });
        }
    });
    let results: Vec<SeedResult> = slots
        .into_inner()
        .expect("no worker panicked")
        .into_iter()
        .map(|r| r.expect("every seed ran"))
        .collect::<Result<_, _>>()?;
    write_summary(&config.out_dir.join("summary.csv"), &results)?;
    Ok(results)
}

/// Human-readable transition listing of a serialized automaton.
pub fn inspect_automaton(path: &Path) -> Result<String, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let fra = fra_from_text(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    Ok(render_table(&fra))
}

pub fn render_table(fra: &FiniteRewardAutomaton) -> String {
    let mut out = format!(
        "{} states, initial {}, {} labels, rewards {}\n",
        fra.num_states(),
        fra.initial(),
        fra.input_alphabet().len(),
        fra.reward_alphabet().iter().map(|r| r.to_string()).collect::<Vec<_>>().join(" ")
    );
    let width = fra.input_alphabet().iter().map(|l| l.to_string().len()).max().unwrap_or(0).max(5);
    out.push_str(&format!("{:<6} {:<width$} {:<6} {}\n", "state", "label", "next", "reward"));
    for (w, l, next, r) in fra.transitions() {
        out.push_str(&format!("{:<6} {:<width$} {:<6} {}\n", w, l.to_string(), next, r));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use afrai_core::env::make_corridor_world;

    #[test]
    fn corridor_optimum() {
        let env = make_corridor_world();
        assert_eq!(optimal_reward_per_step(&env, env.task(), 10), 0.1);
    }

    #[test]
    fn table_lists_every_transition() {
        let fra = FiniteRewardAutomaton::constant_zero([afrai_core::automata::Label::EMPTY]);
        let t = render_table(&fra);
        assert_eq!(t.lines().count(), 3);
        assert!(t.starts_with("1 states, initial 0, 1 labels, rewards 0"));
    }

    #[test]
    fn avg10_window() {
        let mut buf = Vec::new();
        {
            let mut sink = CsvSink::new(&mut buf, ConvergenceTracker::new(5, 0.2, 0.05)).unwrap();
            for i in 0..12u64 {
                sink.record(i + 1, (i % 2) as f64, Phase::Bootstrap, 1);
            }
            sink.finish().unwrap();
        }
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "step,reward,avg10,phase,hyp_states");
        assert_eq!(lines[2], "2,1,0.5,bootstrap,1");
        assert_eq!(lines[12], "12,1,0.5,bootstrap,1");
    }
}
