use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::params::{PolicyParams, RecurrentState};

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Numerically stable softmax; the output sums to one up to a final
/// normalizing division.
pub(crate) fn softmax_into(logits: &[f64], probs: &mut [f64]) {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for (p, &z) in probs.iter_mut().zip(logits) {
        *p = (z - max).exp();
        sum += *p;
    }
    for p in probs.iter_mut() {
        *p /= sum;
    }
}

/// log softmax evaluated at one index.
pub(crate) fn log_prob_of(logits: &[f64], index: usize) -> f64 {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse: f64 = logits.iter().map(|&z| (z - max).exp()).sum::<f64>().ln() + max;
    logits[index] - lse
}

/// Samples an action index from a categorical distribution and returns its
/// log probability.
pub fn sample_action(probs: &[f64], rng: &mut ChaCha8Rng) -> (usize, f64) {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut chosen = probs.len() - 1;
    for (idx, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            chosen = idx;
            break;
        }
    }
    // Guard against rounding at the top of the cumulative sum.
    while probs[chosen] == 0.0 && chosen > 0 {
        chosen -= 1;
    }
    (chosen, probs[chosen].ln())
}

/// One forward step through encoder, LSTM cell, and both heads.
///
/// Writes every intermediate needed for backpropagation into the provided
/// slices and returns the value estimate. The single-step and sequence paths
/// share this function so replayed sequences reproduce collection-time
/// outputs exactly.
#[allow(clippy::too_many_arguments)]
fn cell_forward(
    params: &PolicyParams,
    obs: &[f64],
    h_prev: &[f64],
    c_prev: &[f64],
    enc: &mut [f64],
    gates: &mut [f64],
    cell: &mut [f64],
    tanh_cell: &mut [f64],
    hidden: &mut [f64],
    logits: &mut [f64],
) -> f64 {
    let h = params.cfg.hidden_dim;
    let o = params.cfg.obs_dim;
    let a = params.cfg.n_actions;
    debug_assert_eq!(obs.len(), o);

    let enc_w = params.enc_w();
    let enc_b = params.enc_b();
    for j in 0..h {
        let row = &enc_w[j * o..(j + 1) * o];
        let mut acc = enc_b[j];
        for (w, x) in row.iter().zip(obs) {
            acc += w * x;
        }
        enc[j] = acc.max(0.0);
    }

    let wx = params.lstm_wx();
    let wh = params.lstm_wh();
    let b = params.lstm_b();
    for k in 0..4 * h {
        let wx_row = &wx[k * h..(k + 1) * h];
        let wh_row = &wh[k * h..(k + 1) * h];
        let mut acc = b[k];
        for (w, e) in wx_row.iter().zip(enc.iter()) {
            acc += w * e;
        }
        for (w, hp) in wh_row.iter().zip(h_prev) {
            acc += w * hp;
        }
        gates[k] = acc;
    }
    // Gate order: input, forget, cell candidate, output.
    for j in 0..h {
        gates[j] = sigmoid(gates[j]);
        gates[h + j] = sigmoid(gates[h + j]);
        gates[2 * h + j] = gates[2 * h + j].tanh();
        gates[3 * h + j] = sigmoid(gates[3 * h + j]);
    }
    for j in 0..h {
        cell[j] = gates[h + j] * c_prev[j] + gates[j] * gates[2 * h + j];
        tanh_cell[j] = cell[j].tanh();
        hidden[j] = gates[3 * h + j] * tanh_cell[j];
    }

    let pol_w = params.pol_w();
    let pol_b = params.pol_b();
    for i in 0..a {
        let row = &pol_w[i * h..(i + 1) * h];
        let mut acc = pol_b[i];
        for (w, hh) in row.iter().zip(hidden.iter()) {
            acc += w * hh;
        }
        logits[i] = acc;
    }
    let mut value = params.val_b();
    for (w, hh) in params.val_w().iter().zip(hidden.iter()) {
        value += w * hh;
    }
    value
}

/// Output of a single forward step.
#[derive(Debug, Clone)]
pub struct StepOutput {
    pub logits: Vec<f64>,
    pub probs: Vec<f64>,
    pub value: f64,
    pub state: RecurrentState,
}

impl PolicyParams {
    /// Forward pass for one observation; pure in (obs, state, params).
    pub fn forward_step(&self, obs: &[f64], state: &RecurrentState) -> StepOutput {
        assert_eq!(obs.len(), self.cfg.obs_dim, "observation dim mismatch");
        let h = self.cfg.hidden_dim;
        let a = self.cfg.n_actions;
        let mut enc = vec![0.0; h];
        let mut gates = vec![0.0; 4 * h];
        let mut next = RecurrentState::zeroed(h);
        let mut tanh_cell = vec![0.0; h];
        let mut logits = vec![0.0; a];
        let value = cell_forward(
            self,
            obs,
            &state.output,
            &state.cell,
            &mut enc,
            &mut gates,
            &mut next.cell,
            &mut tanh_cell,
            &mut next.output,
            &mut logits,
        );
        let mut probs = vec![0.0; a];
        softmax_into(&logits, &mut probs);
        StepOutput {
            logits,
            probs,
            value,
            state: next,
        }
    }

    /// Forward pass over a `steps`-long sequence with recorded activations.
    ///
    /// `resets[t]` marks the recurrent state as zeroed before step `t`
    /// (episode boundaries); `init` is the carry entering step 0.
    pub fn forward_sequence(
        &self,
        obs: &[f64],
        resets: &[bool],
        init: &RecurrentState,
    ) -> SequenceOutput {
        let o = self.cfg.obs_dim;
        let h = self.cfg.hidden_dim;
        let a = self.cfg.n_actions;
        let steps = resets.len();
        assert_eq!(obs.len(), steps * o, "observation buffer shape mismatch");
        assert_eq!(init.cell.len(), h, "recurrent state dim mismatch");

        let mut cache = SequenceCache {
            steps,
            enc: vec![0.0; steps * h],
            gates: vec![0.0; steps * 4 * h],
            cell: vec![0.0; steps * h],
            tanh_cell: vec![0.0; steps * h],
            hidden: vec![0.0; steps * h],
        };
        let mut logits = vec![0.0; steps * a];
        let mut probs = vec![0.0; steps * a];
        let mut values = vec![0.0; steps];
        let zeros = vec![0.0; h];

        for t in 0..steps {
            // Split disjoint cache rows: earlier steps are read as the carry,
            // this step's row is written.
            let (hidden_done, hidden_rest) = cache.hidden.split_at_mut(t * h);
            let (cell_done, cell_rest) = cache.cell.split_at_mut(t * h);
            let h_prev: &[f64] = if resets[t] {
                &zeros
            } else if t == 0 {
                &init.output
            } else {
                &hidden_done[(t - 1) * h..]
            };
            let c_prev: &[f64] = if resets[t] {
                &zeros
            } else if t == 0 {
                &init.cell
            } else {
                &cell_done[(t - 1) * h..]
            };
            values[t] = cell_forward(
                self,
                &obs[t * o..(t + 1) * o],
                h_prev,
                c_prev,
                &mut cache.enc[t * h..(t + 1) * h],
                &mut cache.gates[t * 4 * h..(t + 1) * 4 * h],
                &mut cell_rest[..h],
                &mut cache.tanh_cell[t * h..(t + 1) * h],
                &mut hidden_rest[..h],
                &mut logits[t * a..(t + 1) * a],
            );
            softmax_into(
                &logits[t * a..(t + 1) * a],
                &mut probs[t * a..(t + 1) * a],
            );
        }

        let final_state = RecurrentState {
            cell: cache.cell[(steps - 1) * h..steps * h].to_vec(),
            output: cache.hidden[(steps - 1) * h..steps * h].to_vec(),
        };
        SequenceOutput {
            logits,
            probs,
            values,
            final_state,
            cache,
        }
    }

    /// Exact reverse-mode gradients of a scalar loss whose derivatives with
    /// respect to the per-step logits and values are supplied.
    ///
    /// Gradients accumulate into `grad` (same layout as `theta`). No gradient
    /// flows across reset boundaries: the carry entering a reset step is a
    /// constant zero.
    #[allow(clippy::too_many_arguments)]
    pub fn backward_sequence(
        &self,
        obs: &[f64],
        resets: &[bool],
        init: &RecurrentState,
        out: &SequenceOutput,
        dlogits: &[f64],
        dvalues: &[f64],
        grad: &mut [f64],
    ) {
        let o = self.cfg.obs_dim;
        let h = self.cfg.hidden_dim;
        let a = self.cfg.n_actions;
        let steps = resets.len();
        let cache = &out.cache;
        assert_eq!(cache.steps, steps);
        assert_eq!(dlogits.len(), steps * a);
        assert_eq!(dvalues.len(), steps);
        assert_eq!(grad.len(), self.layout.total);

        let l = self.layout;
        let zeros = vec![0.0; h];
        let mut dh_next = vec![0.0; h];
        let mut dc_next = vec![0.0; h];
        let mut dh = vec![0.0; h];
        let mut dc = vec![0.0; h];
        let mut dz = vec![0.0; 4 * h];
        let mut de = vec![0.0; h];
        let mut dh_prev = vec![0.0; h];

        let wx = self.lstm_wx();
        let wh = self.lstm_wh();
        let pol_w = self.pol_w();
        let val_w = self.val_w();

        for t in (0..steps).rev() {
            let enc = &cache.enc[t * h..(t + 1) * h];
            let gates = &cache.gates[t * 4 * h..(t + 1) * 4 * h];
            let tanh_cell = &cache.tanh_cell[t * h..(t + 1) * h];
            let hidden = &cache.hidden[t * h..(t + 1) * h];
            let (h_prev, c_prev): (&[f64], &[f64]) = if resets[t] {
                (&zeros, &zeros)
            } else if t == 0 {
                (&init.output, &init.cell)
            } else {
                (
                    &cache.hidden[(t - 1) * h..t * h],
                    &cache.cell[(t - 1) * h..t * h],
                )
            };
            let dl = &dlogits[t * a..(t + 1) * a];
            let dv = dvalues[t];
            let obs_t = &obs[t * o..(t + 1) * o];

            // Head gradients and dL/dh.
            for j in 0..h {
                dh[j] = dh_next[j] + val_w[j] * dv;
            }
            grad[l.val_b] += dv;
            for j in 0..h {
                grad[l.val_w + j] += dv * hidden[j];
            }
            for i in 0..a {
                let dli = dl[i];
                if dli == 0.0 {
                    continue;
                }
                let row = &pol_w[i * h..(i + 1) * h];
                for j in 0..h {
                    dh[j] += row[j] * dli;
                    grad[l.pol_w + i * h + j] += dli * hidden[j];
                }
                grad[l.pol_b + i] += dli;
            }

            // Through the cell nonlinearities.
            for j in 0..h {
                let o_gate = gates[3 * h + j];
                let tc = tanh_cell[j];
                let d_o = dh[j] * tc;
                dc[j] = dc_next[j] + dh[j] * o_gate * (1.0 - tc * tc);
                let i_gate = gates[j];
                let f_gate = gates[h + j];
                let g_gate = gates[2 * h + j];
                let d_i = dc[j] * g_gate;
                let d_f = dc[j] * c_prev[j];
                let d_g = dc[j] * i_gate;
                dz[j] = d_i * i_gate * (1.0 - i_gate);
                dz[h + j] = d_f * f_gate * (1.0 - f_gate);
                dz[2 * h + j] = d_g * (1.0 - g_gate * g_gate);
                dz[3 * h + j] = d_o * o_gate * (1.0 - o_gate);
                // Carry into the previous cell state.
                dc_next[j] = dc[j] * f_gate;
            }

            de.fill(0.0);
            dh_prev.fill(0.0);
            for k in 0..4 * h {
                let dzk = dz[k];
                grad[l.lstm_b + k] += dzk;
                if dzk == 0.0 {
                    continue;
                }
                let wx_row = &wx[k * h..(k + 1) * h];
                let wh_row = &wh[k * h..(k + 1) * h];
                let gwx = &mut grad[l.lstm_wx + k * h..l.lstm_wx + (k + 1) * h];
                for j in 0..h {
                    gwx[j] += dzk * enc[j];
                    de[j] += wx_row[j] * dzk;
                }
                let gwh = &mut grad[l.lstm_wh + k * h..l.lstm_wh + (k + 1) * h];
                for j in 0..h {
                    gwh[j] += dzk * h_prev[j];
                    dh_prev[j] += wh_row[j] * dzk;
                }
            }

            // Rectifier mask, then the encoder affine map.
            for j in 0..h {
                if enc[j] <= 0.0 {
                    de[j] = 0.0;
                }
            }
            for j in 0..h {
                let dej = de[j];
                if dej == 0.0 {
                    continue;
                }
                grad[l.enc_b + j] += dej;
                let gw = &mut grad[l.enc_w + j * o..l.enc_w + (j + 1) * o];
                for (g, x) in gw.iter_mut().zip(obs_t) {
                    *g += dej * x;
                }
            }

            // Propagate to t-1 unless this step started from a reset carry.
            if resets[t] {
                dh_next.fill(0.0);
                dc_next.fill(0.0);
            } else {
                dh_next.copy_from_slice(&dh_prev);
                // dc_next already updated in the gate loop.
            }
        }
    }
}

/// Recorded activations of a sequence forward pass.
#[derive(Debug, Clone)]
pub struct SequenceCache {
    steps: usize,
    enc: Vec<f64>,
    gates: Vec<f64>,
    cell: Vec<f64>,
    tanh_cell: Vec<f64>,
    hidden: Vec<f64>,
}

/// Per-step outputs of a sequence forward pass plus the cache for backward.
#[derive(Debug, Clone)]
pub struct SequenceOutput {
    pub logits: Vec<f64>,
    pub probs: Vec<f64>,
    pub values: Vec<f64>,
    pub final_state: RecurrentState,
    pub cache: SequenceCache,
}
