use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use homeostat_envs::Environment;

use crate::neural::PolicyParams;
use crate::{seed, AgentError};

use super::adam::Adam;
use super::config::PpoConfig;
use super::gae::compute_gae;
use super::rollout::{EpisodeStat, RolloutCollector};
use super::update::{ppo_update, UpdateStats};

/// Per-iteration training record handed to the metrics sink.
#[derive(Debug, Clone)]
pub struct IterationReport {
    pub iteration: u64,
    /// Cumulative environment steps after this iteration.
    pub env_steps: u64,
    /// Episodes completed during this iteration's rollout.
    pub episodes: Vec<EpisodeStat>,
    pub stats: UpdateStats,
}

/// Training loop: collect, estimate advantages, update, repeat.
///
/// Fully deterministic given the seed: environments are reseeded from it and
/// action sampling plus minibatch shuffling share one counter-based stream.
pub struct Trainer<E: Environment> {
    cfg: PpoConfig,
    collector: RolloutCollector<E>,
    params: PolicyParams,
    adam: Adam,
    rng: ChaCha8Rng,
    iteration: u64,
    env_steps: u64,
}

impl<E: Environment> Trainer<E> {
    pub fn new(
        mut envs: Vec<E>,
        params: PolicyParams,
        cfg: PpoConfig,
        master_seed: u64,
    ) -> Result<Self, AgentError> {
        if envs.len() != cfg.n_workers {
            return Err(AgentError::InvalidConfig(format!(
                "{} environments for {} workers",
                envs.len(),
                cfg.n_workers
            )));
        }
        for (i, env) in envs.iter_mut().enumerate() {
            env.reseed(seed::derive(master_seed, 100 + i as u64));
            if env.obs_dim() != params.cfg.obs_dim || env.n_actions() != params.cfg.n_actions {
                return Err(AgentError::InvalidConfig(
                    "network shape does not match environment".into(),
                ));
            }
        }
        let collector = RolloutCollector::new(envs, params.cfg.hidden_dim)?;
        cfg.validate(collector.n_streams())?;
        let adam = Adam::new(cfg.learning_rate, params.param_count());
        Ok(Self {
            cfg,
            collector,
            params,
            adam,
            rng: ChaCha8Rng::seed_from_u64(seed::derive(master_seed, 1)),
            iteration: 0,
            env_steps: 0,
        })
    }

    pub fn params(&self) -> &PolicyParams {
        &self.params
    }

    pub fn into_params(self) -> PolicyParams {
        self.params
    }

    pub fn config(&self) -> &PpoConfig {
        &self.cfg
    }

    /// Number of iterations needed to reach the configured step budget.
    pub fn planned_iterations(&self) -> u64 {
        self.cfg.total_timesteps.div_ceil(self.cfg.batch_env_steps())
    }

    /// One collect/estimate/update cycle.
    pub fn train_iteration(&mut self) -> Result<IterationReport, AgentError> {
        let (batch, episodes) =
            self.collector
                .collect(&self.params, self.cfg.rollout_steps, &mut self.rng)?;
        let (advantages, returns) = compute_gae(&batch, self.cfg.gamma, self.cfg.gae_lambda);
        let stats = ppo_update(
            &mut self.params,
            &mut self.adam,
            &batch,
            &advantages,
            &returns,
            &self.cfg,
            &mut self.rng,
            self.iteration,
        )?;
        self.iteration += 1;
        self.env_steps += self.cfg.batch_env_steps();
        Ok(IterationReport {
            iteration: self.iteration,
            env_steps: self.env_steps,
            episodes,
            stats,
        })
    }

    /// Runs the full configured step budget, invoking the sink after every
    /// iteration.
    pub fn run(
        &mut self,
        mut on_iteration: impl FnMut(&IterationReport),
    ) -> Result<(), AgentError> {
        let planned = self.planned_iterations();
        for _ in 0..planned {
            let report = self.train_iteration()?;
            on_iteration(&report);
        }
        Ok(())
    }
}
