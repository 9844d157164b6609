use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;

use crate::neural::PolicyParams;
use crate::AgentError;

use super::adam::Adam;
use super::config::PpoConfig;
use super::rollout::RolloutBatch;

/// Aggregate statistics of one PPO update (all epochs and minibatches).
#[derive(Debug, Clone, Copy, Default)]
pub struct UpdateStats {
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub clip_fraction: f64,
    /// Mean pre-clip global gradient norm across optimizer steps.
    pub grad_norm: f64,
    /// Mean approximate KL divergence between old and new policies.
    pub approx_kl: f64,
    /// Largest |new log-prob - stored log-prob| observed during the first
    /// epoch; a correct recurrent replay keeps this at rounding level.
    pub replay_max_abs_err: f64,
}

/// Rescales `grad` so its global L2 norm does not exceed `max_norm`; returns
/// the pre-clip norm.
pub fn clip_gradient(grad: &mut [f64], max_norm: f64) -> f64 {
    let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
    if norm > max_norm {
        let scale = max_norm / norm;
        for g in grad.iter_mut() {
            *g *= scale;
        }
    }
    norm
}

/// Clipped-surrogate objective value for a single sample; exposed for tests.
pub(crate) fn clipped_surrogate(ratio: f64, advantage: f64, clip: f64) -> f64 {
    let unclipped = ratio * advantage;
    let clipped = ratio.clamp(1.0 - clip, 1.0 + clip) * advantage;
    unclipped.min(clipped)
}

/// Standardizes a minibatch of advantages to zero mean and unit deviation.
pub fn normalize_advantages(adv: &mut [f64]) {
    let n = adv.len() as f64;
    let mean = adv.iter().sum::<f64>() / n;
    let var = adv.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n;
    let std = var.sqrt();
    for a in adv.iter_mut() {
        *a = (*a - mean) / (std + 1e-8);
    }
}

/// Forward-only evaluation of the PPO objective over a whole batch treated
/// as one minibatch (advantages normalized when configured). Used to verify
/// that update steps actually descend the objective.
pub fn evaluate_loss(
    params: &PolicyParams,
    batch: &RolloutBatch,
    advantages: &[f64],
    returns: &[f64],
    cfg: &PpoConfig,
) -> f64 {
    let steps = batch.steps;
    let streams = batch.n_streams;
    let n_actions = batch.n_actions;
    let n_samples = (steps * streams) as f64;

    let mut adv = advantages.to_vec();
    if cfg.normalize_advantage {
        normalize_advantages(&mut adv);
    }

    let mut obs_seq = Vec::new();
    let mut resets = Vec::new();
    let mut pg_sum = 0.0;
    let mut vl_sum = 0.0;
    let mut ent_sum = 0.0;
    for s in 0..streams {
        batch.gather_stream_obs(s, &mut obs_seq);
        batch.stream_resets(s, &mut resets);
        let fwd = params.forward_sequence(&obs_seq, &resets, &batch.initial_states[s]);
        for t in 0..steps {
            let idx = t * streams + s;
            let logits_t = &fwd.logits[t * n_actions..(t + 1) * n_actions];
            let probs_t = &fwd.probs[t * n_actions..(t + 1) * n_actions];
            let ratio = (crate::neural::log_prob_of(logits_t, batch.actions[idx])
                - batch.log_probs[idx])
                .exp();
            pg_sum += -clipped_surrogate(ratio, adv[idx], cfg.clip_coef);
            for &p in probs_t {
                if p > 0.0 {
                    ent_sum -= p * p.ln();
                }
            }
            let v = fwd.values[t];
            let ret = returns[idx];
            if cfg.clip_value_loss {
                let v_old = batch.values[idx];
                let v_clipped = v_old + (v - v_old).clamp(-cfg.clip_coef, cfg.clip_coef);
                vl_sum +=
                    0.5 * ((v - ret) * (v - ret)).max((v_clipped - ret) * (v_clipped - ret));
            } else {
                vl_sum += 0.5 * (v - ret) * (v - ret);
            }
        }
    }
    (pg_sum + cfg.value_coef * vl_sum - cfg.entropy_coef * ent_sum) / n_samples
}

/// One PPO update over a collected batch: `update_epochs` passes over
/// sequence-preserving minibatches of whole worker segments.
///
/// Recurrent states are replayed from the stored segment-initial states with
/// resets at episode boundaries, so the first epoch reproduces the
/// collection-time log-probs exactly (up to rounding).
#[allow(clippy::too_many_arguments)]
pub fn ppo_update(
    params: &mut PolicyParams,
    adam: &mut Adam,
    batch: &RolloutBatch,
    advantages: &[f64],
    returns: &[f64],
    cfg: &PpoConfig,
    rng: &mut ChaCha8Rng,
    iteration: u64,
) -> Result<UpdateStats, AgentError> {
    let steps = batch.steps;
    let streams = batch.n_streams;
    let n_actions = batch.n_actions;
    assert_eq!(advantages.len(), steps * streams);
    assert_eq!(returns.len(), steps * streams);

    let streams_per_minibatch = streams / cfg.n_minibatches;
    let mut order: Vec<usize> = (0..streams).collect();

    let mut grad = params.grad_buffer();
    let mut obs_seq: Vec<f64> = Vec::new();
    let mut resets: Vec<bool> = Vec::new();
    let mut dlogits = vec![0.0; steps * n_actions];
    let mut dvalues = vec![0.0; steps];

    let mut stats = UpdateStats::default();
    let mut opt_steps = 0u64;
    let mut sample_batches = 0u64;

    for epoch in 0..cfg.update_epochs {
        order.shuffle(rng);
        for minibatch in order.chunks(streams_per_minibatch) {
            let n_samples = (minibatch.len() * steps) as f64;

            // Per-minibatch advantage normalization; index [pos * steps + t].
            let mut mb_adv: Vec<f64> = Vec::with_capacity(minibatch.len() * steps);
            for &s in minibatch {
                for t in 0..steps {
                    mb_adv.push(advantages[t * streams + s]);
                }
            }
            if cfg.normalize_advantage {
                normalize_advantages(&mut mb_adv);
            }

            grad.fill(0.0);
            let mut pg_sum = 0.0;
            let mut vl_sum = 0.0;
            let mut ent_sum = 0.0;
            let mut clip_count = 0.0;
            let mut kl_sum = 0.0;

            for (pos, &s) in minibatch.iter().enumerate() {
                batch.gather_stream_obs(s, &mut obs_seq);
                batch.stream_resets(s, &mut resets);
                let init = &batch.initial_states[s];
                let fwd = params.forward_sequence(&obs_seq, &resets, init);

                dlogits.fill(0.0);
                for t in 0..steps {
                    let idx = t * streams + s;
                    let action = batch.actions[idx];
                    let logits_t = &fwd.logits[t * n_actions..(t + 1) * n_actions];
                    let probs_t = &fwd.probs[t * n_actions..(t + 1) * n_actions];

                    let log_prob_new = crate::neural::log_prob_of(logits_t, action);
                    let log_ratio = log_prob_new - batch.log_probs[idx];
                    let ratio = log_ratio.exp();
                    if epoch == 0 {
                        let err = log_ratio.abs();
                        if err > stats.replay_max_abs_err {
                            stats.replay_max_abs_err = err;
                        }
                    }

                    let adv = mb_adv[pos * steps + t];
                    let unclipped = ratio * adv;
                    let clipped = ratio.clamp(1.0 - cfg.clip_coef, 1.0 + cfg.clip_coef) * adv;
                    let surrogate = unclipped.min(clipped);
                    pg_sum += -surrogate;
                    if (ratio - 1.0).abs() > cfg.clip_coef {
                        clip_count += 1.0;
                    }
                    kl_sum += (ratio - 1.0) - log_ratio;

                    // d(-surrogate)/d(log-prob): the clipped branch is only
                    // selected when the clamp saturates, where the gradient
                    // vanishes.
                    let dsurr_dlogp = if unclipped <= clipped { unclipped } else { 0.0 };
                    let dpg_dlogp = -dsurr_dlogp / n_samples;

                    // Entropy bonus.
                    let mut entropy = 0.0;
                    for &p in probs_t {
                        if p > 0.0 {
                            entropy -= p * p.ln();
                        }
                    }
                    ent_sum += entropy;

                    let dl = &mut dlogits[t * n_actions..(t + 1) * n_actions];
                    for (j, (dlj, &pj)) in dl.iter_mut().zip(probs_t).enumerate() {
                        // Policy-gradient term through log softmax.
                        let indicator = if j == action { 1.0 } else { 0.0 };
                        *dlj = dpg_dlogp * (indicator - pj);
                        // Entropy term: dH/dz_j = -p_j (ln p_j + H).
                        if pj > 0.0 {
                            *dlj += cfg.entropy_coef * pj * (pj.ln() + entropy) / n_samples;
                        }
                    }

                    // Value loss (optionally clipped around the old value).
                    let v = fwd.values[t];
                    let ret = returns[idx];
                    let dv = if cfg.clip_value_loss {
                        let v_old = batch.values[idx];
                        let v_clipped =
                            v_old + (v - v_old).clamp(-cfg.clip_coef, cfg.clip_coef);
                        let loss_unclipped = (v - ret) * (v - ret);
                        let loss_clipped = (v_clipped - ret) * (v_clipped - ret);
                        vl_sum += 0.5 * loss_unclipped.max(loss_clipped);
                        if loss_unclipped >= loss_clipped {
                            v - ret
                        } else if (v - v_old).abs() < cfg.clip_coef {
                            v_clipped - ret
                        } else {
                            0.0
                        }
                    } else {
                        vl_sum += 0.5 * (v - ret) * (v - ret);
                        v - ret
                    };
                    dvalues[t] = cfg.value_coef * dv / n_samples;
                }

                params.backward_sequence(
                    &obs_seq, &resets, init, &fwd, &dlogits, &dvalues, &mut grad,
                );
            }

            let pg_loss = pg_sum / n_samples;
            let v_loss = vl_sum / n_samples;
            let entropy = ent_sum / n_samples;
            if !(pg_loss.is_finite() && v_loss.is_finite() && entropy.is_finite()) {
                return Err(AgentError::NonFiniteLoss {
                    iteration,
                    policy_loss: pg_loss,
                    value_loss: v_loss,
                    entropy,
                });
            }

            stats.policy_loss += pg_loss;
            stats.value_loss += v_loss;
            stats.entropy += entropy;
            stats.clip_fraction += clip_count / n_samples;
            stats.approx_kl += kl_sum / n_samples;
            sample_batches += 1;

            stats.grad_norm += clip_gradient(&mut grad, cfg.max_grad_norm);
            adam.step(&mut params.theta, &grad);
            opt_steps += 1;
        }
    }

    let nb = sample_batches as f64;
    stats.policy_loss /= nb;
    stats.value_loss /= nb;
    stats.entropy /= nb;
    stats.clip_fraction /= nb;
    stats.approx_kl /= nb;
    stats.grad_norm /= opt_steps as f64;
    Ok(stats)
}
