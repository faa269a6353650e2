/// Tracks when a learning curve settles near a target average reward.
///
/// Averages are taken over the last `window` whole episodes, evaluated at
/// episode ends. The curve has converged at the end of the first window after
/// which every window averages at least `(1 - tolerance) · optimum` per step.
#[derive(Clone, Debug)]
pub struct ConvergenceTracker {
    eplength: usize,
    window: usize,
    threshold: f64,
    episode_totals: std::collections::VecDeque<f64>,
    current: f64,
    in_episode: usize,
    candidate: Option<u64>,
}

/// Whole episodes covering at least 1000 steps.
pub fn window_episodes(eplength: usize) -> usize {
    1000usize.div_ceil(eplength.max(1))
}

impl ConvergenceTracker {
    pub fn new(eplength: usize, optimum_per_step: f64, tolerance: f64) -> Self {
        ConvergenceTracker {
            eplength,
            window: window_episodes(eplength),
            threshold: (1.0 - tolerance) * optimum_per_step,
            episode_totals: Default::default(),
            current: 0.0,
            in_episode: 0,
            candidate: None,
        }
    }

    pub fn push(&mut self, step: u64, reward: f64) {
        self.current += reward;
        self.in_episode += 1;
        if self.in_episode < self.eplength {
            return;
        }
        self.episode_totals.push_back(self.current);
        self.current = 0.0;
        self.in_episode = 0;
        if self.episode_totals.len() > self.window {
            self.episode_totals.pop_front();
        }
        if self.episode_totals.len() < self.window {
            return;
        }
        let avg = self.episode_totals.iter().sum::<f64>() / (self.window * self.eplength) as f64;
        // tiny slack absorbs float noise in the optimum
        if avg + 1e-12 >= self.threshold {
            self.candidate.get_or_insert(step);
        } else {
            self.candidate = None;
        }
    }

    pub fn convergence_step(&self) -> Option<u64> {
        self.candidate
    }
}
