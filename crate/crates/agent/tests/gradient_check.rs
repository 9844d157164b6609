//! Finite-difference validation of the hand-derived backward pass.
//!
//! A scalar loss that is linear in the per-step logits and values exercises
//! every parameter through the full sequence graph; central differences with
//! eps = 1e-4 must agree with the analytic gradients to 1e-3 relative.

use homeostat_agent::{NetConfig, PolicyParams, RecurrentState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct LossSpec {
    obs: Vec<f64>,
    resets: Vec<bool>,
    dlogits: Vec<f64>,
    dvalues: Vec<f64>,
    steps: usize,
}

fn make_spec(cfg: NetConfig, steps: usize, resets: Vec<bool>, seed: u64) -> LossSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let obs: Vec<f64> = (0..steps * cfg.obs_dim)
        .map(|_| rng.gen::<f64>() * 2.0 - 1.0)
        .collect();
    let dlogits: Vec<f64> = (0..steps * cfg.n_actions)
        .map(|_| rng.gen::<f64>() * 2.0 - 1.0)
        .collect();
    let dvalues: Vec<f64> = (0..steps).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
    LossSpec {
        obs,
        resets,
        dlogits,
        dvalues,
        steps,
    }
}

fn loss_value(params: &PolicyParams, spec: &LossSpec, init: &RecurrentState) -> f64 {
    let out = params.forward_sequence(&spec.obs, &spec.resets, init);
    let mut loss = 0.0;
    for t in 0..spec.steps {
        for a in 0..params.cfg.n_actions {
            loss += spec.dlogits[t * params.cfg.n_actions + a]
                * out.logits[t * params.cfg.n_actions + a];
        }
        loss += spec.dvalues[t] * out.values[t];
    }
    loss
}

fn check_gradients(cfg: NetConfig, resets: Vec<bool>, seed: u64) {
    let steps = resets.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params = PolicyParams::orthogonal_init(cfg, &mut rng);
    // Non-zero biases so their gradients are exercised from a generic point.
    {
        let n = params.theta.len();
        for v in params.theta.iter_mut().skip(n / 2) {
            *v += 0.01;
        }
    }
    let init = RecurrentState {
        cell: (0..cfg.hidden_dim).map(|i| 0.1 * (i as f64).sin()).collect(),
        output: (0..cfg.hidden_dim).map(|i| 0.1 * (i as f64).cos()).collect(),
    };
    let spec = make_spec(cfg, steps, resets, seed + 1);

    let out = params.forward_sequence(&spec.obs, &spec.resets, &init);
    let mut analytic = params.grad_buffer();
    params.backward_sequence(
        &spec.obs,
        &spec.resets,
        &init,
        &out,
        &spec.dlogits,
        &spec.dvalues,
        &mut analytic,
    );

    let eps = 1e-4;
    let mut worst_rel = 0.0f64;
    for k in 0..params.param_count() {
        let saved = params.theta[k];
        params.theta[k] = saved + eps;
        let plus = loss_value(&params, &spec, &init);
        params.theta[k] = saved - eps;
        let minus = loss_value(&params, &spec, &init);
        params.theta[k] = saved;
        let numeric = (plus - minus) / (2.0 * eps);
        let denom = numeric.abs().max(analytic[k].abs()).max(1e-8);
        let rel = (numeric - analytic[k]).abs() / denom;
        worst_rel = worst_rel.max(rel);
        assert!(
            rel <= 1e-3,
            "param {k}: analytic {} vs numeric {numeric} (rel {rel})",
            analytic[k]
        );
    }
    // The check should be comfortably inside the tolerance in f64.
    assert!(worst_rel < 1e-3, "worst relative error {worst_rel}");
}

#[test]
fn gradients_match_finite_differences_on_three_step_sequence() {
    check_gradients(NetConfig::new(3, 8, 4), vec![false, false, false], 42);
}

#[test]
fn gradients_match_finite_differences_with_midsequence_reset() {
    check_gradients(
        NetConfig::new(2, 6, 3),
        vec![false, false, true, false, false],
        7,
    );
}

#[test]
fn gradients_match_for_scalar_observation_network() {
    check_gradients(NetConfig::new(1, 4, 2), vec![false, true, false], 11);
}

#[test]
fn constant_loss_has_zero_gradient() {
    let cfg = NetConfig::new(3, 8, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let params = PolicyParams::orthogonal_init(cfg, &mut rng);
    let spec = LossSpec {
        obs: vec![0.3; 3 * cfg.obs_dim],
        resets: vec![false; 3],
        dlogits: vec![0.0; 3 * cfg.n_actions],
        dvalues: vec![0.0; 3],
        steps: 3,
    };
    let init = RecurrentState::zeroed(cfg.hidden_dim);
    let out = params.forward_sequence(&spec.obs, &spec.resets, &init);
    let mut grad = params.grad_buffer();
    params.backward_sequence(
        &spec.obs,
        &spec.resets,
        &init,
        &out,
        &spec.dlogits,
        &spec.dvalues,
        &mut grad,
    );
    assert!(grad.iter().all(|&g| g == 0.0));
}

#[test]
fn no_gradient_flows_across_reset_boundaries() {
    // Loss on the post-reset suffix must produce the same gradients as
    // running the suffix alone from a zero state.
    let cfg = NetConfig::new(2, 6, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let params = PolicyParams::orthogonal_init(cfg, &mut rng);
    let mut spec = make_spec(cfg, 4, vec![false, false, true, false], 9);
    // Zero out the loss contribution of the prefix (steps 0 and 1).
    for t in 0..2 {
        for a in 0..cfg.n_actions {
            spec.dlogits[t * cfg.n_actions + a] = 0.0;
        }
        spec.dvalues[t] = 0.0;
    }
    let init = RecurrentState::zeroed(cfg.hidden_dim);
    let out = params.forward_sequence(&spec.obs, &spec.resets, &init);
    let mut grad_full = params.grad_buffer();
    params.backward_sequence(
        &spec.obs,
        &spec.resets,
        &init,
        &out,
        &spec.dlogits,
        &spec.dvalues,
        &mut grad_full,
    );

    // Suffix alone.
    let suffix_obs = spec.obs[2 * cfg.obs_dim..].to_vec();
    let suffix_resets = vec![true, false];
    let suffix_dlogits = spec.dlogits[2 * cfg.n_actions..].to_vec();
    let suffix_dvalues = spec.dvalues[2..].to_vec();
    let out2 = params.forward_sequence(&suffix_obs, &suffix_resets, &init);
    let mut grad_suffix = params.grad_buffer();
    params.backward_sequence(
        &suffix_obs,
        &suffix_resets,
        &init,
        &out2,
        &suffix_dlogits,
        &suffix_dvalues,
        &mut grad_suffix,
    );

    for k in 0..params.param_count() {
        assert!(
            (grad_full[k] - grad_suffix[k]).abs() < 1e-12,
            "param {k}: {} vs {}",
            grad_full[k],
            grad_suffix[k]
        );
    }
}
