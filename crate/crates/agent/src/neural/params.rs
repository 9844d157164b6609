use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Shapes of the network, fixed by the environment and empathy condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetConfig {
    pub obs_dim: usize,
    pub hidden_dim: usize,
    pub n_actions: usize,
}

impl NetConfig {
    pub fn new(obs_dim: usize, hidden_dim: usize, n_actions: usize) -> Self {
        assert!(obs_dim > 0 && hidden_dim > 0 && n_actions > 0);
        Self {
            obs_dim,
            hidden_dim,
            n_actions,
        }
    }
}

/// Offsets of each tensor inside the flat parameter vector.
///
/// Layout (row-major everywhere):
/// encoder W (H x O), encoder b (H), LSTM W_x (4H x H), LSTM W_h (4H x H),
/// LSTM b (4H), policy W (A x H), policy b (A), value W (H), value b (1).
/// Gate rows within the 4H blocks are ordered input, forget, cell, output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamLayout {
    pub enc_w: usize,
    pub enc_b: usize,
    pub lstm_wx: usize,
    pub lstm_wh: usize,
    pub lstm_b: usize,
    pub pol_w: usize,
    pub pol_b: usize,
    pub val_w: usize,
    pub val_b: usize,
    pub total: usize,
}

impl ParamLayout {
    pub fn of(cfg: NetConfig) -> Self {
        let (o, h, a) = (cfg.obs_dim, cfg.hidden_dim, cfg.n_actions);
        let enc_w = 0;
        let enc_b = enc_w + h * o;
        let lstm_wx = enc_b + h;
        let lstm_wh = lstm_wx + 4 * h * h;
        let lstm_b = lstm_wh + 4 * h * h;
        let pol_w = lstm_b + 4 * h;
        let pol_b = pol_w + a * h;
        let val_w = pol_b + a;
        let val_b = val_w + h;
        Self {
            enc_w,
            enc_b,
            lstm_wx,
            lstm_wh,
            lstm_b,
            pol_w,
            pol_b,
            val_w,
            val_b,
            total: val_b + 1,
        }
    }
}

/// LSTM carry: cell state and the cell's output (hidden) vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecurrentState {
    pub cell: Vec<f64>,
    pub output: Vec<f64>,
}

impl RecurrentState {
    /// Fresh state, as used at every episode start.
    pub fn zeroed(hidden_dim: usize) -> Self {
        Self {
            cell: vec![0.0; hidden_dim],
            output: vec![0.0; hidden_dim],
        }
    }

    pub fn reset(&mut self) {
        self.cell.fill(0.0);
        self.output.fill(0.0);
    }
}

/// All network weights in one flat vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyParams {
    pub cfg: NetConfig,
    pub layout: ParamLayout,
    pub theta: Vec<f64>,
}

impl PolicyParams {
    /// All-zero parameters: uniform policy, zero value.
    pub fn zeroed(cfg: NetConfig) -> Self {
        let layout = ParamLayout::of(cfg);
        Self {
            cfg,
            layout,
            theta: vec![0.0; layout.total],
        }
    }

    /// Orthogonal initialization, gain 1.0 for every linear map except the
    /// policy head (gain 0.01 so the initial action distribution is close to
    /// uniform). Biases start at zero.
    pub fn orthogonal_init(cfg: NetConfig, rng: &mut ChaCha8Rng) -> Self {
        let mut p = Self::zeroed(cfg);
        let (o, h, a) = (cfg.obs_dim, cfg.hidden_dim, cfg.n_actions);
        let l = p.layout;
        fill_orthogonal(&mut p.theta[l.enc_w..l.enc_w + h * o], h, o, 1.0, rng);
        fill_orthogonal(&mut p.theta[l.lstm_wx..l.lstm_wx + 4 * h * h], 4 * h, h, 1.0, rng);
        fill_orthogonal(&mut p.theta[l.lstm_wh..l.lstm_wh + 4 * h * h], 4 * h, h, 1.0, rng);
        fill_orthogonal(&mut p.theta[l.pol_w..l.pol_w + a * h], a, h, 0.01, rng);
        fill_orthogonal(&mut p.theta[l.val_w..l.val_w + h], 1, h, 1.0, rng);
        p
    }

    pub fn param_count(&self) -> usize {
        self.layout.total
    }

    pub fn grad_buffer(&self) -> Vec<f64> {
        vec![0.0; self.layout.total]
    }

    pub(crate) fn enc_w(&self) -> &[f64] {
        let l = self.layout;
        &self.theta[l.enc_w..l.enc_b]
    }

    pub(crate) fn enc_b(&self) -> &[f64] {
        let l = self.layout;
        &self.theta[l.enc_b..l.lstm_wx]
    }

    pub(crate) fn lstm_wx(&self) -> &[f64] {
        let l = self.layout;
        &self.theta[l.lstm_wx..l.lstm_wh]
    }

    pub(crate) fn lstm_wh(&self) -> &[f64] {
        let l = self.layout;
        &self.theta[l.lstm_wh..l.lstm_b]
    }

    pub(crate) fn lstm_b(&self) -> &[f64] {
        let l = self.layout;
        &self.theta[l.lstm_b..l.pol_w]
    }

    pub(crate) fn pol_w(&self) -> &[f64] {
        let l = self.layout;
        &self.theta[l.pol_w..l.pol_b]
    }

    pub(crate) fn pol_b(&self) -> &[f64] {
        let l = self.layout;
        &self.theta[l.pol_b..l.val_w]
    }

    pub(crate) fn val_w(&self) -> &[f64] {
        let l = self.layout;
        &self.theta[l.val_w..l.val_b]
    }

    pub(crate) fn val_b(&self) -> f64 {
        self.theta[self.layout.val_b]
    }
}

/// Standard normal draw via Box-Muller.
fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>(); // (0, 1]
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Writes a (rows x cols) orthogonal matrix scaled by `gain`.
///
/// The smaller dimension's vectors are orthonormalized with twice-applied
/// modified Gram-Schmidt on a Gaussian draw.
fn fill_orthogonal(out: &mut [f64], rows: usize, cols: usize, gain: f64, rng: &mut ChaCha8Rng) {
    assert_eq!(out.len(), rows * cols);
    let (m, n) = (rows.min(cols), rows.max(cols));
    // m vectors of dimension n.
    let mut basis = vec![0.0f64; m * n];
    for v in basis.iter_mut() {
        *v = gaussian(rng);
    }
    for i in 0..m {
        for _pass in 0..2 {
            for k in 0..i {
                let dot: f64 = (0..n).map(|j| basis[i * n + j] * basis[k * n + j]).sum();
                for j in 0..n {
                    basis[i * n + j] -= dot * basis[k * n + j];
                }
            }
        }
        let norm: f64 = (0..n)
            .map(|j| basis[i * n + j] * basis[i * n + j])
            .sum::<f64>()
            .sqrt();
        // A zero draw is astronomically unlikely; re-draw defensively.
        let inv = if norm > 0.0 { 1.0 / norm } else { 0.0 };
        for j in 0..n {
            basis[i * n + j] *= inv;
        }
    }
    if rows <= cols {
        for r in 0..rows {
            for c in 0..cols {
                out[r * cols + c] = gain * basis[r * n + c];
            }
        }
    } else {
        // Generated orthonormal rows of the transpose: orthonormal columns.
        for r in 0..rows {
            for c in 0..cols {
                out[r * cols + c] = gain * basis[c * n + r];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn layout_covers_every_parameter_once() {
        let cfg = NetConfig::new(3, 8, 5);
        let l = ParamLayout::of(cfg);
        let expected =
            8 * 3 + 8 + 4 * 8 * 8 + 4 * 8 * 8 + 4 * 8 + 5 * 8 + 5 + 8 + 1;
        assert_eq!(l.total, expected);
        assert!(l.enc_w < l.enc_b && l.enc_b < l.lstm_wx && l.lstm_wx < l.lstm_wh);
        assert!(l.lstm_wh < l.lstm_b && l.lstm_b < l.pol_w && l.pol_w < l.pol_b);
        assert!(l.pol_b < l.val_w && l.val_w < l.val_b);
    }

    #[test]
    fn orthogonal_init_produces_orthonormal_maps() {
        let cfg = NetConfig::new(4, 16, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let p = PolicyParams::orthogonal_init(cfg, &mut rng);
        // Encoder: 16x4, columns orthonormal.
        let w = p.enc_w();
        for c1 in 0..4 {
            for c2 in 0..4 {
                let dot: f64 = (0..16).map(|r| w[r * 4 + c1] * w[r * 4 + c2]).sum();
                let expected = if c1 == c2 { 1.0 } else { 0.0 };
                assert!((dot - expected).abs() < 1e-10, "cols {c1},{c2}: {dot}");
            }
        }
        // Policy head: 3x16, rows orthogonal with norm = gain.
        let w = p.pol_w();
        for r1 in 0..3 {
            for r2 in 0..3 {
                let dot: f64 = (0..16).map(|c| w[r1 * 16 + c] * w[r2 * 16 + c]).sum();
                let expected = if r1 == r2 { 0.01 * 0.01 } else { 0.0 };
                assert!((dot - expected).abs() < 1e-10, "rows {r1},{r2}: {dot}");
            }
        }
        // Biases zero.
        assert!(p.enc_b().iter().all(|&b| b == 0.0));
        assert!(p.lstm_b().iter().all(|&b| b == 0.0));
        assert_eq!(p.val_b(), 0.0);
    }

    #[test]
    fn recurrent_state_resets_to_zero() {
        let mut s = RecurrentState::zeroed(4);
        s.cell[1] = 3.0;
        s.output[2] = -1.0;
        s.reset();
        assert_eq!(s, RecurrentState::zeroed(4));
    }
}
