use homeostat_core::{
    couple_drives, drive_quadratic, homeostatic_reward, ContinuousEnergy, Drive, EmpathyCondition,
    RewardScale,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{check_actions, one_hot_flag, EnvError, EnvStep, Environment};

/// Possessor action set on the five-cell line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridAction {
    Left,
    Right,
    Eat,
    Get,
    Pass,
}

impl GridAction {
    pub const COUNT: usize = 5;

    pub fn from_index(index: usize) -> Result<Self, EnvError> {
        match index {
            0 => Ok(GridAction::Left),
            1 => Ok(GridAction::Right),
            2 => Ok(GridAction::Eat),
            3 => Ok(GridAction::Get),
            4 => Ok(GridAction::Pass),
            other => Err(EnvError::InvalidAction(other)),
        }
    }

    pub fn index(self) -> usize {
        match self {
            GridAction::Left => 0,
            GridAction::Right => 1,
            GridAction::Eat => 2,
            GridAction::Get => 3,
            GridAction::Pass => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct GridConfig {
    /// Per-step energy consumption.
    pub delta_d: f64,
    /// Energy restored by ingesting one food unit.
    pub ingest: f64,
    /// Step cap; reaching it truncates without failing.
    pub max_steps: u32,
    /// Reward scaling beta.
    pub beta: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            delta_d: 0.003,
            ingest: 0.1,
            max_steps: 2000,
            beta: 100.0,
        }
    }
}

/// Number of cells on the line; the Partner sits beyond cell 0, food beyond
/// cell 4.
pub const GRID_CELLS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridState {
    /// Possessor cell in [0, 4]; 0 is adjacent to the Partner.
    pub possessor_pos: usize,
    pub has_food: bool,
    pub possessor_energy: ContinuousEnergy,
    pub partner_energy: ContinuousEnergy,
    pub t: u32,
}

/// Linear shuttle environment: the Possessor fetches food at the right end
/// and can carry it left to feed the immobile Partner.
///
/// Contextually invalid actions (EAT without food, GET away from the food
/// cell, PASS away from the Partner) are legal no-ops; the energy drift
/// applies every step regardless.
pub struct GridEnv {
    config: GridConfig,
    condition: EmpathyCondition,
    state: GridState,
    done: bool,
    rng: ChaCha8Rng,
}

impl GridEnv {
    pub fn new(config: GridConfig, condition: EmpathyCondition, seed: u64) -> Self {
        Self {
            config,
            condition,
            state: GridState {
                possessor_pos: 0,
                has_food: false,
                possessor_energy: ContinuousEnergy(0.0),
                partner_energy: ContinuousEnergy(0.0),
                t: 0,
            },
            done: true,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn condition(&self) -> EmpathyCondition {
        self.condition
    }

    pub fn config(&self) -> &GridConfig {
        &self.config
    }

    pub fn state(&self) -> GridState {
        self.state
    }

    /// Overwrites the simulator state; test and analysis hook.
    pub fn set_state(&mut self, state: GridState) {
        self.state = state;
        self.done = false;
    }

    pub fn step_action(&mut self, action: GridAction) -> Result<EnvStep, EnvError> {
        self.advance(action)
    }

    fn possessor_drive(&self) -> Drive {
        drive_quadratic(self.state.possessor_energy)
    }

    fn partner_drive(&self) -> Drive {
        drive_quadratic(self.state.partner_energy)
    }

    fn coupled_drive(&self) -> Drive {
        couple_drives(self.possessor_drive(), self.partner_drive(), self.condition)
    }

    fn observation(&self) -> Vec<f64> {
        let mut obs = vec![0.0; GRID_CELLS];
        obs[self.state.possessor_pos] = 1.0;
        obs.extend_from_slice(&one_hot_flag(self.state.has_food));
        obs.push(self.state.possessor_energy.value());
        if self.condition.observes_partner() {
            obs.push(self.state.partner_energy.value());
        }
        obs
    }

    fn advance(&mut self, action: GridAction) -> Result<EnvStep, EnvError> {
        if self.done {
            return Err(EnvError::EpisodeOver);
        }
        let scale = RewardScale::new(self.config.beta).expect("beta validated by config");
        let drive_before = self.coupled_drive();

        let mut possessor_ingest = 0.0;
        let mut partner_ingest = 0.0;
        match action {
            GridAction::Left => {
                self.state.possessor_pos = self.state.possessor_pos.saturating_sub(1);
            }
            GridAction::Right => {
                self.state.possessor_pos = (self.state.possessor_pos + 1).min(GRID_CELLS - 1);
            }
            GridAction::Get => {
                if self.state.possessor_pos == GRID_CELLS - 1 && !self.state.has_food {
                    self.state.has_food = true;
                }
            }
            GridAction::Eat => {
                if self.state.has_food {
                    self.state.has_food = false;
                    possessor_ingest = self.config.ingest;
                }
            }
            GridAction::Pass => {
                // The Partner ingests immediately; it has no actions of its own.
                if self.state.possessor_pos == 0 && self.state.has_food {
                    self.state.has_food = false;
                    partner_ingest = self.config.ingest;
                }
            }
        }

        self.state.possessor_energy =
            ContinuousEnergy(self.state.possessor_energy.value() - self.config.delta_d + possessor_ingest);
        self.state.partner_energy =
            ContinuousEnergy(self.state.partner_energy.value() - self.config.delta_d + partner_ingest);
        self.state.t += 1;

        let terminated = !self.state.possessor_energy.in_live_range()
            || !self.state.partner_energy.in_live_range();
        let truncated = !terminated && self.state.t >= self.config.max_steps;
        self.done = terminated || truncated;

        let reward = homeostatic_reward(drive_before, self.coupled_drive(), scale);

        Ok(EnvStep {
            observations: vec![self.observation()],
            rewards: vec![reward],
            terminated,
            truncated,
        })
    }
}

impl Environment for GridEnv {
    fn n_agents(&self) -> usize {
        1
    }

    fn obs_dim(&self) -> usize {
        let base = GRID_CELLS + 2 + 1;
        if self.condition.observes_partner() {
            base + 1
        } else {
            base
        }
    }

    fn n_actions(&self) -> usize {
        GridAction::COUNT
    }

    fn max_steps(&self) -> u32 {
        self.config.max_steps
    }

    fn reseed(&mut self, seed: u64) {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
    }

    fn reset(&mut self) -> Vec<Vec<f64>> {
        // Deterministic initial conditions: the Possessor starts next to the
        // Partner, empty-handed, both energies at the setpoint.
        let _ = &self.rng;
        self.state = GridState {
            possessor_pos: 0,
            has_food: false,
            possessor_energy: ContinuousEnergy(0.0),
            partner_energy: ContinuousEnergy(0.0),
            t: 0,
        };
        self.done = false;
        vec![self.observation()]
    }

    fn step(&mut self, actions: &[usize]) -> Result<EnvStep, EnvError> {
        check_actions(actions.len(), 1)?;
        self.advance(GridAction::from_index(actions[0])?)
    }

    fn drives(&self) -> Vec<f64> {
        vec![self.possessor_drive().value(), self.partner_drive().value()]
    }

    fn coupled_drives(&self) -> Vec<f64> {
        vec![self.coupled_drive().value()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env(condition: EmpathyCondition) -> GridEnv {
        GridEnv::new(GridConfig::default(), condition, 0)
    }

    #[test]
    fn reset_starts_at_setpoint_next_to_partner() {
        let mut e = env(EmpathyCondition::None);
        e.reset();
        let s = e.state();
        assert_eq!(s.possessor_pos, 0);
        assert!(!s.has_food);
        assert_eq!(s.possessor_energy.value(), 0.0);
        assert_eq!(s.partner_energy.value(), 0.0);
        assert_eq!(e.drives(), vec![0.0, 0.0]);
    }

    #[test]
    fn observation_lengths() {
        for (cond, len) in [
            (EmpathyCondition::None, 8),
            (EmpathyCondition::Affective, 8),
            (EmpathyCondition::Cognitive, 9),
            (EmpathyCondition::Full, 9),
        ] {
            let mut e = env(cond);
            assert_eq!(e.reset()[0].len(), len, "{cond}");
            assert_eq!(e.obs_dim(), len);
        }
    }

    #[test]
    fn reset_is_deterministic() {
        let mut a = env(EmpathyCondition::Full);
        let mut b = env(EmpathyCondition::Full);
        assert_eq!(a.reset(), b.reset());
    }

    #[test]
    fn observation_layout_at_food_cell() {
        let mut e = env(EmpathyCondition::None);
        e.reset();
        for _ in 0..4 {
            e.step_action(GridAction::Right).unwrap();
        }
        let step = e.step_action(GridAction::Get).unwrap();
        let obs = &step.observations[0];
        let energy = e.state().possessor_energy.value();
        assert_eq!(obs[..7], [0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 1.0]);
        assert_eq!(obs[7], energy);
    }

    #[test]
    fn none_and_affective_observations_match() {
        let mut a = env(EmpathyCondition::None);
        let mut b = env(EmpathyCondition::Affective);
        assert_eq!(a.reset(), b.reset());
        let actions = [GridAction::Right, GridAction::Get, GridAction::Eat, GridAction::Left];
        for action in actions {
            let sa = a.step_action(action).unwrap();
            let sb = b.step_action(action).unwrap();
            assert_eq!(sa.observations, sb.observations);
        }
    }

    #[test]
    fn eat_with_food_restores_energy() {
        let mut e = env(EmpathyCondition::None);
        e.reset();
        for _ in 0..4 {
            e.step_action(GridAction::Right).unwrap();
        }
        e.step_action(GridAction::Get).unwrap();
        assert!(e.state().has_food);
        let before = e.state().possessor_energy.value();
        e.step_action(GridAction::Eat).unwrap();
        let delta = e.state().possessor_energy.value() - before;
        assert!((delta - 0.097).abs() < 1e-12, "delta {delta}");
        assert!(!e.state().has_food);
    }

    #[test]
    fn eat_from_setpoint_lands_at_0_097() {
        let mut e = env(EmpathyCondition::None);
        e.reset();
        let mut s = e.state();
        s.has_food = true;
        e.set_state(s);
        e.step_action(GridAction::Eat).unwrap();
        assert_eq!(e.state().possessor_energy.value(), 0.0 - 0.003 + 0.1);
        assert!((e.state().possessor_energy.value() - 0.097).abs() < 1e-15);
    }

    #[test]
    fn idle_step_drift_and_reward() {
        // From energy 0.5 an idle step drifts to 0.497 and pays 0.2991 under
        // the None condition with beta = 100.
        let mut e = env(EmpathyCondition::None);
        e.reset();
        // Drift up to 0.5 via scripted eating is slow; instead drift down from
        // 0.5 synthetically by running the drive arithmetic end to end.
        let d0 = 0.5f64 * 0.5;
        let d1 = 0.497f64 * 0.497;
        assert!((100.0 * (d0 - d1) - 0.2991).abs() < 1e-9);

        // And through the simulator: an idle step subtracts exactly delta_d.
        let before = e.state().possessor_energy.value();
        let step = e.step_action(GridAction::Eat).unwrap(); // no food: no-op + drift
        let after = e.state().possessor_energy.value();
        assert!((before - after - 0.003).abs() < 1e-15);
        assert!(step.rewards[0].abs() < 1.0);
    }

    #[test]
    fn energy_delta_is_drift_or_ingest() {
        let mut e = env(EmpathyCondition::None);
        e.reset();
        let mut rng_actions = [
            GridAction::Right,
            GridAction::Get,
            GridAction::Eat,
            GridAction::Left,
            GridAction::Pass,
            GridAction::Right,
            GridAction::Get,
            GridAction::Right,
            GridAction::Eat,
        ];
        rng_actions.rotate_left(3);
        let mut prev = e.state().possessor_energy.value();
        for action in rng_actions.iter().cycle().take(400) {
            let step = e.step_action(*action).unwrap();
            let next = e.state().possessor_energy.value();
            let delta = next - prev;
            let matches_drift = (delta + 0.003).abs() < 1e-12;
            let matches_ingest = (delta - 0.097).abs() < 1e-12;
            assert!(matches_drift || matches_ingest, "delta {delta}");
            prev = next;
            if step.done() {
                break;
            }
        }
    }

    #[test]
    fn pass_and_get_out_of_place_are_noops() {
        let mut e = env(EmpathyCondition::None);
        e.reset();
        // GET away from the food cell.
        e.step_action(GridAction::Get).unwrap();
        assert!(!e.state().has_food);
        // Fetch food, then PASS away from the Partner.
        for _ in 0..4 {
            e.step_action(GridAction::Right).unwrap();
        }
        e.step_action(GridAction::Get).unwrap();
        assert!(e.state().has_food);
        e.step_action(GridAction::Pass).unwrap();
        assert!(e.state().has_food, "PASS at pos > 0 must keep the food");
        // GET while already carrying.
        e.step_action(GridAction::Get).unwrap();
        assert!(e.state().has_food);
    }

    #[test]
    fn untouched_partner_starves_after_334_steps() {
        // Drift-only oracle: 0.003 * 334 exceeds 1.
        let mut drift = 0.0f64;
        let mut oracle_steps = 0u32;
        while ContinuousEnergy(drift).in_live_range() {
            drift -= 0.003;
            oracle_steps += 1;
        }
        assert_eq!(oracle_steps, 334);

        let mut cfg = GridConfig::default();
        cfg.max_steps = 10_000;
        let mut e = GridEnv::new(cfg, EmpathyCondition::None, 0);
        e.reset();
        let mut t = 0u32;
        loop {
            // Idle against the left wall: pure drift for both agents.
            let step = e.step_action(GridAction::Left).unwrap();
            t += 1;
            if step.done() {
                assert!(step.terminated);
                break;
            }
        }
        assert_eq!(t, oracle_steps);
        assert!(e.state().partner_energy.value() <= -1.0);
    }

    #[test]
    fn scripted_shuttle_sustains_both_agents_past_cap() {
        // Feed the Partner once and the Possessor once per 33-step cycle:
        // ingestion (+0.1) almost exactly offsets 33 steps of drift (-0.099).
        let mut e = env(EmpathyCondition::None);
        e.reset();
        let feed_partner = [
            GridAction::Right,
            GridAction::Right,
            GridAction::Right,
            GridAction::Right,
            GridAction::Get,
            GridAction::Left,
            GridAction::Left,
            GridAction::Left,
            GridAction::Left,
            GridAction::Pass,
        ];
        let feed_self = [
            GridAction::Right,
            GridAction::Right,
            GridAction::Right,
            GridAction::Right,
            GridAction::Get,
            GridAction::Eat,
            GridAction::Left,
            GridAction::Left,
            GridAction::Left,
            GridAction::Left,
        ];
        let mut cycle: Vec<GridAction> = Vec::new();
        cycle.extend_from_slice(&feed_partner);
        cycle.extend_from_slice(&feed_self);
        // Idle out the rest of the cycle bumping against the left wall.
        while cycle.len() < 33 {
            cycle.push(GridAction::Left);
        }
        let mut survived = 0u32;
        'outer: loop {
            for action in &cycle {
                let step = e.step_action(*action).unwrap();
                survived += 1;
                if step.terminated {
                    panic!("shuttle policy failed at step {survived}");
                }
                if step.truncated {
                    break 'outer;
                }
            }
        }
        assert_eq!(survived, 2000);
        assert!(e.state().possessor_energy.in_live_range());
        assert!(e.state().partner_energy.in_live_range());
    }

    #[test]
    fn episode_rewards_telescope_to_drive_difference() {
        for cond in EmpathyCondition::ALL {
            let mut e = env(cond);
            e.reset();
            let d0 = e.coupled_drives()[0];
            let mut total = 0.0;
            let mut k = 0usize;
            loop {
                let action = [
                    GridAction::Right,
                    GridAction::Get,
                    GridAction::Eat,
                    GridAction::Left,
                    GridAction::Pass,
                ][k % 5];
                k += 1;
                let step = e.step_action(action).unwrap();
                total += step.rewards[0];
                if step.done() {
                    break;
                }
            }
            let dt = e.coupled_drives()[0];
            let expected = 100.0 * (d0 - dt);
            assert!(
                (total - expected).abs() < 1e-9,
                "{cond}: sum {total} vs {expected}"
            );
        }
    }
}
