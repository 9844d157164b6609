use rand_chacha::ChaCha8Rng;

use homeostat_envs::Environment;

use crate::neural::{sample_action, PolicyParams, RecurrentState};
use crate::AgentError;

/// Time-major experience from one collection phase.
///
/// Indexing is `[t * n_streams + s]`; `dones` marks transitions that ended an
/// episode, which is exactly where the recurrent state was zeroed before the
/// following step.
#[derive(Debug, Clone)]
pub struct RolloutBatch {
    pub steps: usize,
    pub n_streams: usize,
    pub obs_dim: usize,
    pub n_actions: usize,
    pub obs: Vec<f64>,
    pub actions: Vec<usize>,
    pub log_probs: Vec<f64>,
    pub values: Vec<f64>,
    pub rewards: Vec<f64>,
    pub dones: Vec<bool>,
    /// Value of the state following the final transition, per stream.
    pub bootstrap_values: Vec<f64>,
    /// Recurrent state entering step 0, per stream.
    pub initial_states: Vec<RecurrentState>,
}

/// Completed-episode record emitted during collection.
#[derive(Debug, Clone, Copy)]
pub struct EpisodeStat {
    pub length: u32,
    pub terminated: bool,
}

/// Steps a fleet of environments with a shared policy, carrying recurrent
/// state per stream across collection phases.
///
/// A multi-agent environment contributes one stream per agent; all of its
/// streams share episode boundaries.
pub struct RolloutCollector<E: Environment> {
    envs: Vec<E>,
    agents_per_env: usize,
    obs_dim: usize,
    n_actions: usize,
    current_obs: Vec<Vec<f64>>,
    states: Vec<RecurrentState>,
    episode_len: Vec<u32>,
}

impl<E: Environment> RolloutCollector<E> {
    pub fn new(mut envs: Vec<E>, hidden_dim: usize) -> Result<Self, AgentError> {
        let first = envs
            .first()
            .ok_or_else(|| AgentError::InvalidConfig("no environments".into()))?;
        let agents_per_env = first.n_agents();
        let obs_dim = first.obs_dim();
        let n_actions = first.n_actions();
        let n_envs = envs.len();

        let mut current_obs = Vec::with_capacity(n_envs * agents_per_env);
        for env in envs.iter_mut() {
            if env.n_agents() != agents_per_env || env.obs_dim() != obs_dim {
                return Err(AgentError::InvalidConfig(
                    "environments must share one shape".into(),
                ));
            }
            current_obs.extend(env.reset());
        }
        let n_streams = n_envs * agents_per_env;
        Ok(Self {
            envs,
            agents_per_env,
            obs_dim,
            n_actions,
            current_obs,
            states: vec![RecurrentState::zeroed(hidden_dim); n_streams],
            episode_len: vec![0; n_envs],
        })
    }

    pub fn n_streams(&self) -> usize {
        self.envs.len() * self.agents_per_env
    }

    pub fn obs_dim(&self) -> usize {
        self.obs_dim
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn envs(&self) -> &[E] {
        &self.envs
    }

    /// Collects `steps` transitions per stream and the bootstrap values for
    /// the states left at the end.
    pub fn collect(
        &mut self,
        params: &PolicyParams,
        steps: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<(RolloutBatch, Vec<EpisodeStat>), AgentError> {
        let n_streams = self.n_streams();
        let obs_dim = self.obs_dim;
        let mut batch = RolloutBatch {
            steps,
            n_streams,
            obs_dim,
            n_actions: self.n_actions,
            obs: vec![0.0; steps * n_streams * obs_dim],
            actions: vec![0; steps * n_streams],
            log_probs: vec![0.0; steps * n_streams],
            values: vec![0.0; steps * n_streams],
            rewards: vec![0.0; steps * n_streams],
            dones: vec![false; steps * n_streams],
            bootstrap_values: vec![0.0; n_streams],
            initial_states: self.states.clone(),
        };
        let mut episodes = Vec::new();
        let mut actions_buf = vec![0usize; self.agents_per_env];

        for t in 0..steps {
            // Policy pass for every stream, in stream order.
            for s in 0..n_streams {
                let out = params.forward_step(&self.current_obs[s], &self.states[s]);
                let (action, log_prob) = sample_action(&out.probs, rng);
                let idx = t * n_streams + s;
                batch.obs[idx * obs_dim..(idx + 1) * obs_dim]
                    .copy_from_slice(&self.current_obs[s]);
                batch.actions[idx] = action;
                batch.log_probs[idx] = log_prob;
                batch.values[idx] = out.value;
                self.states[s] = out.state;
            }
            // Environment pass.
            for (e, env) in self.envs.iter_mut().enumerate() {
                let base = e * self.agents_per_env;
                for a in 0..self.agents_per_env {
                    actions_buf[a] = batch.actions[t * n_streams + base + a];
                }
                let step = env.step(&actions_buf[..self.agents_per_env])?;
                self.episode_len[e] += 1;
                for a in 0..self.agents_per_env {
                    let idx = t * n_streams + base + a;
                    batch.rewards[idx] = step.rewards[a];
                    batch.dones[idx] = step.done();
                }
                if step.done() {
                    episodes.push(EpisodeStat {
                        length: self.episode_len[e],
                        terminated: step.terminated,
                    });
                    self.episode_len[e] = 0;
                    let fresh = env.reset();
                    for a in 0..self.agents_per_env {
                        self.current_obs[base + a] = fresh[a].clone();
                        self.states[base + a].reset();
                    }
                } else {
                    for a in 0..self.agents_per_env {
                        self.current_obs[base + a] = step.observations[a].clone();
                    }
                }
            }
        }

        for s in 0..n_streams {
            let out = params.forward_step(&self.current_obs[s], &self.states[s]);
            batch.bootstrap_values[s] = out.value;
        }

        Ok((batch, episodes))
    }
}

impl RolloutBatch {
    /// Copies one stream's observations into a contiguous `steps x obs_dim`
    /// buffer for sequence replay.
    pub fn gather_stream_obs(&self, stream: usize, out: &mut Vec<f64>) {
        out.clear();
        out.reserve(self.steps * self.obs_dim);
        for t in 0..self.steps {
            let idx = t * self.n_streams + stream;
            out.extend_from_slice(&self.obs[idx * self.obs_dim..(idx + 1) * self.obs_dim]);
        }
    }

    /// Reset flags for sequence replay: the state was zeroed before step `t`
    /// exactly when the previous transition ended an episode.
    pub fn stream_resets(&self, stream: usize, out: &mut Vec<bool>) {
        out.clear();
        out.reserve(self.steps);
        out.push(false);
        for t in 1..self.steps {
            out.push(self.dones[(t - 1) * self.n_streams + stream]);
        }
    }
}
