//! The learning loop: L* whose queries are answered by running Q-learning
//! episodes in the environment.

use std::collections::BTreeMap;

use rand::Rng;
use thiserror::Error;

use crate::automata::{build_query_fra, FiniteRewardAutomaton, Label, RewardValue, Symbol, Trace, Word};
use crate::env::Environment;
use crate::lstar::{ObservationTable, SampleStore, TableError};
use crate::rl::{run_episode, Hyperparams, QTable, QueryKind, RlError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RunError {
    #[error(transparent)]
    Table(#[from] TableError),
    #[error(transparent)]
    Rl(#[from] RlError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("no reward seen in the first {0} exploration steps; try a longer episode length")]
    Bootstrap(u64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Phase {
    Bootstrap,
    Membership,
    Equivalence,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Bootstrap => "bootstrap",
            Phase::Membership => "membership",
            Phase::Equivalence => "equivalence",
        }
    }
}

/// Receives one record per environment step.
pub trait MetricsSink {
    fn record(&mut self, step: u64, reward: f64, phase: Phase, hypothesis_states: usize);
}

impl MetricsSink for () {
    fn record(&mut self, _: u64, _: f64, _: Phase, _: usize) {}
}

/// Keeps every record in memory; meant for tests and short runs.
#[derive(Clone, Debug, Default)]
pub struct VecSink {
    pub records: Vec<(u64, f64, Phase, usize)>,
}

impl MetricsSink for VecSink {
    fn record(&mut self, step: u64, reward: f64, phase: Phase, hypothesis_states: usize) {
        self.records.push((step, reward, phase, hypothesis_states));
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub hyper: Hyperparams,
    /// Episodes a membership query may spend before answering 0.
    pub budget_c: usize,
    /// Environment steps for the whole run. Episodes never straddle the limit.
    pub total_steps: u64,
    /// Drop `(∅, 0)` steps before traces reach the learner.
    pub compress_empty: bool,
    /// Steps the random bootstrap may use before giving up; the whole budget if unset.
    pub bootstrap_steps: Option<u64>,
    /// Seed each new membership-query q-table from the stored one sharing the
    /// longest label prefix.
    pub warm_start_queries: bool,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), RunError> {
        self.hyper.validate()?;
        if self.total_steps < self.hyper.eplength as u64 {
            return Err(RunError::Config("total_steps is shorter than one episode".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct RunReport {
    /// Last hypothesis, over the learner's label alphabet.
    pub hypothesis: FiniteRewardAutomaton,
    pub table: ObservationTable,
    pub steps: u64,
    pub episodes: u64,
    /// Membership queries asked by the table, however they were answered.
    pub membership_queries: u64,
    /// Membership queries that needed environment episodes.
    pub rl_membership_queries: u64,
    pub equivalence_queries: u64,
    pub counterexamples: u64,
    pub sample_size: usize,
}

/// Shortest prefix of `trace` on which `hypothesis` predicts a different
/// reward, or which uses a label the hypothesis does not know.
pub fn find_counterexample(hypothesis: &FiniteRewardAutomaton, trace: &Trace) -> Option<Word> {
    let mut w = hypothesis.initial();
    for (i, sym) in trace.symbols().enumerate() {
        match hypothesis.step(w, sym.label) {
            Ok((next, r)) if r == sym.reward => w = next,
            _ => return Some(trace.to_word()[..=i].to_vec()),
        }
    }
    None
}

struct BudgetExhausted;

enum Halt {
    Budget,
    Error(RunError),
}

impl From<BudgetExhausted> for Halt {
    fn from(_: BudgetExhausted) -> Self {
        Halt::Budget
    }
}

impl From<TableError> for Halt {
    fn from(e: TableError) -> Self {
        Halt::Error(e.into())
    }
}

/// Mutable state of one learning run.
pub struct Learner<'a, E: Environment, R: Rng, S: MetricsSink> {
    env: &'a mut E,
    rng: &'a mut R,
    sink: &'a mut S,
    config: RunConfig,
    env_labels: Vec<Label>,
    table: ObservationTable,
    store: SampleStore,
    q_hyp: QTable,
    hyp_key: Option<FiniteRewardAutomaton>,
    q_query: BTreeMap<Vec<Label>, QTable>,
    hypothesis: FiniteRewardAutomaton,
    steps: u64,
    episodes: u64,
    membership_queries: u64,
    rl_membership_queries: u64,
    equivalence_queries: u64,
    counterexamples: u64,
}

impl<'a, E: Environment, R: Rng, S: MetricsSink> Learner<'a, E, R, S> {
    pub fn new(env: &'a mut E, config: RunConfig, rng: &'a mut R, sink: &'a mut S) -> Result<Self, RunError> {
        config.validate()?;
        let env_labels = env.label_alphabet();
        let learner_labels: Vec<Label> =
            env_labels.iter().copied().filter(|l| !(config.compress_empty && l.is_empty())).collect();
        let table = ObservationTable::new(learner_labels.iter().copied(), [RewardValue::ZERO, RewardValue::ONE]);
        let hypothesis = FiniteRewardAutomaton::constant_zero(learner_labels);
        let q_hyp = QTable::new(env.num_states(), 1, env.num_actions(), 0.0);
        Ok(Learner {
            env,
            rng,
            sink,
            config,
            env_labels,
            table,
            store: SampleStore::new(),
            q_hyp,
            hyp_key: None,
            q_query: BTreeMap::new(),
            hypothesis,
            steps: 0,
            episodes: 0,
            membership_queries: 0,
            rl_membership_queries: 0,
            equivalence_queries: 0,
            counterexamples: 0,
        })
    }

    fn episode(&mut self, kind: QueryKind, fra: &FiniteRewardAutomaton, q: &mut QTable, phase: Phase) -> Result<Trace, BudgetExhausted> {
        let len = self.config.hyper.eplength as u64;
        if self.steps + len > self.config.total_steps {
            return Err(BudgetExhausted);
        }
        let trace = run_episode(kind, fra, q, self.env, &self.config.hyper, self.rng);
        let hyp_states = self.hypothesis.num_states();
        for r in trace.rewards() {
            self.steps += 1;
            self.sink.record(self.steps, r.to_f64(), phase, hyp_states);
        }
        self.episodes += 1;
        Ok(trace)
    }

    /// Stores an observed trace. Returns the form the learner sees and
    /// whether an `Nsample` entry flipped to 1.
    fn observe(&mut self, trace: &Trace) -> Result<(Trace, bool), TableError> {
        let trace = if self.config.compress_empty { trace.compress_empty() } else { trace.clone() };
        let new_labels: Vec<Label> = trace.labels().iter().copied().filter(|l| !self.table.inputs().contains(l)).collect();
        let new_rewards: Vec<RewardValue> =
            trace.rewards().iter().copied().filter(|r| !self.table.rewards().contains(r)).collect();
        self.table.extend_alphabet(new_labels, new_rewards);
        self.store.add_sample(trace.clone())?;
        let flipped = self.store.check_nsample(&trace, &mut self.table);
        Ok((trace, flipped))
    }

    /// Fully exploring episodes under the all-zero hypothesis until one earns
    /// a reward; that trace is the first counterexample.
    fn bootstrap(&mut self) -> Result<Word, Halt> {
        let cap = self.config.bootstrap_steps.unwrap_or(self.config.total_steps);
        let trivial = FiniteRewardAutomaton::constant_zero(self.env_labels.iter().copied());
        let mut q = QTable::new(self.env.num_states(), 1, self.env.num_actions(), 0.0);
        let explore = Hyperparams { epsilon: 1.0, ..self.config.hyper };
        let saved = std::mem::replace(&mut self.config.hyper, explore);
        let result = (|| -> Result<Word, Halt> {
            while self.steps + self.config.hyper.eplength as u64 <= cap {
                let trace = self.episode(QueryKind::Equivalence, &trivial, &mut q, Phase::Bootstrap)?;
                let (seen, _) = self.observe(&trace)?;
                if let Some(cex) = find_counterexample(&self.hypothesis, &seen) {
                    return Ok(cex);
                }
            }
            match self.config.bootstrap_steps {
                Some(cap) => Err(Halt::Error(RunError::Bootstrap(cap))),
                None => Err(Halt::Budget),
            }
        })();
        self.config.hyper = saved;
        result
    }

    /// Answers one cell. Returns true if an `Nsample` flip cut the query short.
    fn membership(&mut self, word: &[Symbol]) -> Result<bool, Halt> {
        if self.table.get(word).is_some() {
            return Ok(false);
        }
        self.membership_queries += 1;
        if word.is_empty() {
            self.table.set(Vec::new(), true);
            return Ok(false);
        }
        if let Some(v) = self.store.check(word) {
            self.table.set(word.to_vec(), v);
            return Ok(false);
        }
        // answers are prefix-closed, so a refuted prefix refutes the word
        if (1..word.len()).any(|k| self.store.in_nsample(&word[..k])) || self.config.budget_c == 0 {
            self.reject(word);
            return Ok(false);
        }
        self.rl_membership_queries += 1;
        let zeta = Trace::from_symbols(word.iter().copied());
        let fra = build_query_fra(&zeta, self.table.inputs());
        // the query automaton only depends on the labels
        let key = zeta.labels().to_vec();
        let mut q = match self.q_query.remove(&key) {
            Some(q) => q,
            None => self.fresh_query_table(&key, fra.num_states()),
        };
        let mut outcome = Ok(None);
        let mut flipped = false;
        for _ in 0..self.config.budget_c {
            let trace = match self.episode(QueryKind::Membership, &fra, &mut q, Phase::Membership) {
                Ok(t) => t,
                Err(e) => {
                    outcome = Err(Halt::from(e));
                    break;
                }
            };
            match self.observe(&trace) {
                Ok((_, f)) => flipped = f,
                Err(e) => {
                    outcome = Err(e.into());
                    break;
                }
            }
            if let Some(v) = self.store.check(word) {
                outcome = Ok(Some(v));
                break;
            }
            if flipped {
                break;
            }
        }
        self.q_query.insert(key, q);
        match outcome? {
            Some(v) => self.table.set(word.to_vec(), v),
            // the table changed under us; the caller asks again
            None if flipped => return Ok(true),
            None => self.reject(word),
        }
        Ok(false)
    }

    /// New q-table for a query over `labels`. With warm starts, the states
    /// shared with the stored query of longest common label prefix are copied.
    fn fresh_query_table(&self, labels: &[Label], num_states: usize) -> QTable {
        let mut q = QTable::new(self.env.num_states(), num_states, self.env.num_actions(), 0.0);
        if !self.config.warm_start_queries {
            return q;
        }
        let common = |other: &[Label]| other.iter().zip(labels).take_while(|(a, b)| a == b).count();
        let mut best: Option<(&Vec<Label>, usize)> = None;
        for other in self.q_query.keys() {
            let n = common(other);
            if n > 0 && best.is_none_or(|(_, m)| n > m) {
                best = Some((other, n));
            }
        }
        if let Some((other, n)) = best {
            let src = &self.q_query[other];
            for x in 0..q.num_env_states() {
                for w in 0..n {
                    for a in 0..q.num_actions() {
                        q.set(x, w, a, src.get(x, w, a));
                    }
                }
            }
        }
        q
    }

    fn reject(&mut self, word: &[Symbol]) {
        self.table.set(word.to_vec(), false);
        self.store.add_nsample(word.to_vec());
    }

    fn answer_unknown(&mut self) -> Result<(), Halt> {
        for w in self.table.unknown_words() {
            if self.membership(&w)? {
                break;
            }
        }
        Ok(())
    }

    /// Answers queries until the table is closed, consistent and complete.
    fn repair(&mut self) -> Result<(), Halt> {
        loop {
            self.answer_unknown()?;
            if !self.table.unknown_words().is_empty() {
                continue;
            }
            if self.table.is_closed()? && self.table.is_consistent()? {
                return Ok(());
            }
            self.table.check_obs_table()?;
        }
    }

    fn equivalence(&mut self) -> Result<Word, Halt> {
        self.equivalence_queries += 1;
        if self.hyp_key.as_ref() != Some(&self.hypothesis) {
            self.q_hyp = QTable::new(self.env.num_states(), self.hypothesis.num_states(), self.env.num_actions(), 0.0);
            self.hyp_key = Some(self.hypothesis.clone());
        }
        let hyp = self.hypothesis.clone();
        let mut q = std::mem::replace(&mut self.q_hyp, QTable::new(0, 0, 0, 0.0));
        let result = loop {
            let trace = match self.episode(QueryKind::Equivalence, &hyp, &mut q, Phase::Equivalence) {
                Ok(t) => t,
                Err(e) => break Err(Halt::from(e)),
            };
            let seen = match self.observe(&trace) {
                Ok((t, _)) => t,
                Err(e) => break Err(e.into()),
            };
            if let Some(cex) = find_counterexample(&hyp, &seen) {
                break Ok(cex);
            }
        };
        self.q_hyp = q;
        result
    }

    fn learn(&mut self) -> Result<(), Halt> {
        let mut cex = self.bootstrap()?;
        loop {
            self.counterexamples += 1;
            self.table.add_counterexample(&cex);
            self.repair()?;
            self.hypothesis = self.table.hypothesis_fra()?;
            cex = self.equivalence()?;
        }
    }

    /// Runs until the step budget is spent.
    pub fn run(mut self) -> Result<RunReport, RunError> {
        match self.learn() {
            Err(Halt::Error(e)) => return Err(e),
            Err(Halt::Budget) | Ok(()) => {}
        }
        Ok(RunReport {
            hypothesis: self.hypothesis,
            table: self.table,
            steps: self.steps,
            episodes: self.episodes,
            membership_queries: self.membership_queries,
            rl_membership_queries: self.rl_membership_queries,
            equivalence_queries: self.equivalence_queries,
            counterexamples: self.counterexamples,
            sample_size: self.store.sample().len(),
        })
    }
}

/// Convenience wrapper around [`Learner`].
pub fn afrai_run<E: Environment, R: Rng, S: MetricsSink>(
    env: &mut E,
    config: RunConfig,
    rng: &mut R,
    sink: &mut S,
) -> Result<RunReport, RunError> {
    Learner::new(env, config, rng, sink)?.run()
}
