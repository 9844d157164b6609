use super::rollout::RolloutBatch;

/// Generalized advantage estimation over a time-major batch.
///
/// delta_t = r_t + gamma * V(s_{t+1}) * (1 - done_t) - V(s_t)
/// A_t     = delta_t + gamma * lambda * (1 - done_t) * A_{t+1}
///
/// `done_t` marks transitions that ended an episode, so neither bootstrap
/// value nor accumulated advantage leaks across episode boundaries. Returns
/// are advantages plus values.
pub fn compute_gae(batch: &RolloutBatch, gamma: f64, lambda: f64) -> (Vec<f64>, Vec<f64>) {
    let steps = batch.steps;
    let streams = batch.n_streams;
    let mut advantages = vec![0.0; steps * streams];
    let mut returns = vec![0.0; steps * streams];

    for s in 0..streams {
        let mut next_adv = 0.0;
        for t in (0..steps).rev() {
            let idx = t * streams + s;
            let nonterminal = if batch.dones[idx] { 0.0 } else { 1.0 };
            let next_value = if t + 1 == steps {
                batch.bootstrap_values[s]
            } else {
                batch.values[(t + 1) * streams + s]
            };
            let delta =
                batch.rewards[idx] + gamma * next_value * nonterminal - batch.values[idx];
            next_adv = delta + gamma * lambda * nonterminal * next_adv;
            advantages[idx] = next_adv;
            returns[idx] = next_adv + batch.values[idx];
        }
    }
    (advantages, returns)
}
