use std::path::PathBuf;

use afrai_core::env::{load_grid_config, make_minecraft_world, make_office_world, GridWorld};
use afrai_core::orchestrator::RunConfig;
use afrai_core::rl::Hyperparams;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum EnvKind {
    Office,
    Craft,
}

impl EnvKind {
    pub fn name(self) -> &'static str {
        match self {
            EnvKind::Office => "office",
            EnvKind::Craft => "craft",
        }
    }
}

/// Default `(eplength, total_steps)` for each published task.
pub fn task_defaults(env: EnvKind, task: u32) -> Option<(usize, u64)> {
    match (env, task) {
        (EnvKind::Office, 1) => Some((200, 1_000_000)),
        (EnvKind::Office, 2) => Some((800, 2_000_000)),
        (EnvKind::Office, 3) => Some((800, 6_000_000)),
        (EnvKind::Craft, 1) => Some((400, 400_000)),
        (EnvKind::Craft, 2) => Some((400, 250_000)),
        _ => None,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub env: EnvKind,
    pub task: u32,
    pub seeds: Vec<u64>,
    pub total_steps: u64,
    pub eplength: usize,
    pub budget_c: usize,
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon: f64,
    pub compress_empty: bool,
    pub map: Option<PathBuf>,
    pub out_dir: PathBuf,
}

impl ExperimentConfig {
    /// Defaults for a task, with seeds `0..10` and output in `out`.
    pub fn for_task(env: EnvKind, task: u32) -> Result<Self, CliError> {
        let (eplength, total_steps) = task_defaults(env, task).ok_or(CliError::Field {
            field: "task",
            message: format!("no task {task} in the {} world", env.name()),
        })?;
        Ok(ExperimentConfig {
            env,
            task,
            seeds: (0..10).collect(),
            total_steps,
            eplength,
            budget_c: 500,
            alpha: 0.1,
            gamma: 0.9,
            epsilon: 0.1,
            compress_empty: true,
            map: None,
            out_dir: PathBuf::from("out"),
        })
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |field, message: String| Err(CliError::Field { field, message });
        if task_defaults(self.env, self.task).is_none() {
            return bad("task", format!("no task {} in the {} world", self.task, self.env.name()));
        }
        if self.seeds.is_empty() {
            return bad("seeds", "at least one seed is required".into());
        }
        if self.eplength == 0 {
            return bad("eplength", "must be positive".into());
        }
        if self.total_steps < self.eplength as u64 {
            return bad("total-steps", format!("must be at least one episode ({})", self.eplength));
        }
        if self.budget_c == 0 {
            return bad("budget-c", "must be positive".into());
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad("alpha", format!("must lie in (0, 1], got {}", self.alpha));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return bad("gamma", format!("must lie in (0, 1), got {}", self.gamma));
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return bad("epsilon", format!("must lie in [0, 1], got {}", self.epsilon));
        }
        Ok(())
    }

    pub fn run_config(&self) -> RunConfig {
        RunConfig {
            hyper: Hyperparams { alpha: self.alpha, gamma: self.gamma, epsilon: self.epsilon, eplength: self.eplength },
            budget_c: self.budget_c,
            total_steps: self.total_steps,
            compress_empty: self.compress_empty,
            bootstrap_steps: None,
            warm_start_queries: true,
        }
    }

    pub fn build_env(&self) -> Result<GridWorld, CliError> {
        let spec = match &self.map {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
                Some(load_grid_config(&text).map_err(|e| CliError::Field { field: "map", message: e.to_string() })?)
            }
            None => None,
        };
        let world = match self.env {
            EnvKind::Office => make_office_world(self.task, spec),
            EnvKind::Craft => make_minecraft_world(self.task, spec),
        };
        world.map_err(|e| CliError::Field { field: "map", message: e.to_string() })
    }
}
