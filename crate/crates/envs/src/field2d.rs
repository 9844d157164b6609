use homeostat_core::{
    couple_drives, drive_quadratic, homeostatic_reward, ContinuousEnergy, Drive, EmpathyCondition,
    RewardScale,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{check_actions, one_hot_flag, EnvError, EnvStep, Environment};

/// Action set for each mobile agent on the unit square.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field2DAction {
    Up,
    Down,
    Left,
    Right,
    Get,
    Eat,
    Pass,
}

impl Field2DAction {
    pub const COUNT: usize = 7;

    pub fn from_index(index: usize) -> Result<Self, EnvError> {
        match index {
            0 => Ok(Field2DAction::Up),
            1 => Ok(Field2DAction::Down),
            2 => Ok(Field2DAction::Left),
            3 => Ok(Field2DAction::Right),
            4 => Ok(Field2DAction::Get),
            5 => Ok(Field2DAction::Eat),
            6 => Ok(Field2DAction::Pass),
            other => Err(EnvError::InvalidAction(other)),
        }
    }

    pub fn index(self) -> usize {
        match self {
            Field2DAction::Up => 0,
            Field2DAction::Down => 1,
            Field2DAction::Left => 2,
            Field2DAction::Right => 3,
            Field2DAction::Get => 4,
            Field2DAction::Eat => 5,
            Field2DAction::Pass => 6,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct Field2DConfig {
    /// Per-step energy consumption.
    pub delta_d: f64,
    /// Energy restored by ingesting one food unit.
    pub ingest: f64,
    /// Displacement per movement action.
    pub move_delta: f64,
    /// Radius within which GET and PASS succeed.
    pub interact_radius: f64,
    /// Per-step accident probability for each movable agent.
    pub accident_p: f64,
    /// Energy at or below which an agent cannot move.
    pub immobility_threshold: f64,
    /// Step cap; reaching it truncates without failing.
    pub max_steps: u32,
    /// Reward scaling beta.
    pub beta: f64,
}

impl Default for Field2DConfig {
    fn default() -> Self {
        Self {
            delta_d: 0.001,
            ingest: 0.3,
            move_delta: 0.05,
            interact_radius: 0.1,
            accident_p: 0.0005,
            immobility_threshold: -0.7,
            max_steps: 2000,
            beta: 100.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentState {
    /// Position inside the unit square.
    pub position: [f64; 2],
    pub energy: ContinuousEnergy,
    pub has_food: bool,
    pub movable: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Field2DState {
    pub agents: [AgentState; 2],
    pub food_position: [f64; 2],
    pub food_present: bool,
    pub t: u32,
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    (dx * dx + dy * dy).sqrt()
}

/// Two symmetric mobile agents sharing one food source.
///
/// Both agents act in the same step() call; conflicting interactions are
/// resolved in agent-index order. An agent whose energy falls to the
/// immobility threshold (or that suffers a random accident) cannot move
/// until fed back above threshold; it can still EAT, PASS, and GET.
pub struct Field2DEnv {
    config: Field2DConfig,
    condition: EmpathyCondition,
    state: Field2DState,
    done: bool,
    rng: ChaCha8Rng,
}

impl Field2DEnv {
    pub fn new(config: Field2DConfig, condition: EmpathyCondition, seed: u64) -> Self {
        let agent = AgentState {
            position: [0.5, 0.5],
            energy: ContinuousEnergy(0.0),
            has_food: false,
            movable: true,
        };
        Self {
            config,
            condition,
            state: Field2DState {
                agents: [agent, agent],
                food_position: [0.5, 0.5],
                food_present: true,
                t: 0,
            },
            done: true,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn condition(&self) -> EmpathyCondition {
        self.condition
    }

    pub fn config(&self) -> &Field2DConfig {
        &self.config
    }

    pub fn state(&self) -> Field2DState {
        self.state
    }

    /// Overwrites the simulator state; test and analysis hook.
    pub fn set_state(&mut self, state: Field2DState) {
        self.state = state;
        self.done = false;
    }

    pub fn step_actions(
        &mut self,
        actions: [Field2DAction; 2],
    ) -> Result<EnvStep, EnvError> {
        self.advance(actions)
    }

    fn raw_drive(&self, idx: usize) -> Drive {
        drive_quadratic(self.state.agents[idx].energy)
    }

    fn coupled_drive(&self, idx: usize) -> Drive {
        couple_drives(self.raw_drive(idx), self.raw_drive(1 - idx), self.condition)
    }

    fn observation(&self, idx: usize) -> Vec<f64> {
        let agent = &self.state.agents[idx];
        let mut obs = Vec::with_capacity(self.obs_dim());
        obs.extend_from_slice(&agent.position);
        obs.extend_from_slice(&self.state.food_position);
        obs.extend_from_slice(&one_hot_flag(agent.has_food));
        obs.extend_from_slice(&one_hot_flag(agent.movable));
        obs.push(agent.energy.value());
        if self.condition.observes_partner() {
            obs.push(self.state.agents[1 - idx].energy.value());
        }
        obs
    }

    fn observations(&self) -> Vec<Vec<f64>> {
        vec![self.observation(0), self.observation(1)]
    }

    fn apply_action(&mut self, idx: usize, action: Field2DAction) -> f64 {
        let delta = self.config.move_delta;
        let radius = self.config.interact_radius;
        let mut ingested = 0.0;
        match action {
            Field2DAction::Up | Field2DAction::Down | Field2DAction::Left
            | Field2DAction::Right => {
                if self.state.agents[idx].movable {
                    let pos = &mut self.state.agents[idx].position;
                    match action {
                        Field2DAction::Up => pos[1] += delta,
                        Field2DAction::Down => pos[1] -= delta,
                        Field2DAction::Left => pos[0] -= delta,
                        Field2DAction::Right => pos[0] += delta,
                        _ => unreachable!(),
                    }
                    pos[0] = pos[0].clamp(0.0, 1.0);
                    pos[1] = pos[1].clamp(0.0, 1.0);
                }
            }
            Field2DAction::Get => {
                if self.state.food_present
                    && !self.state.agents[idx].has_food
                    && dist(self.state.agents[idx].position, self.state.food_position) <= radius
                {
                    self.state.agents[idx].has_food = true;
                    self.state.food_present = false;
                }
            }
            Field2DAction::Eat => {
                if self.state.agents[idx].has_food {
                    self.state.agents[idx].has_food = false;
                    ingested = self.config.ingest;
                }
            }
            Field2DAction::Pass => {
                let other = 1 - idx;
                if self.state.agents[idx].has_food
                    && !self.state.agents[other].has_food
                    && dist(
                        self.state.agents[idx].position,
                        self.state.agents[other].position,
                    ) <= radius
                {
                    self.state.agents[idx].has_food = false;
                    self.state.agents[other].has_food = true;
                }
            }
        }
        ingested
    }

    fn advance(&mut self, actions: [Field2DAction; 2]) -> Result<EnvStep, EnvError> {
        if self.done {
            return Err(EnvError::EpisodeOver);
        }
        let scale = RewardScale::new(self.config.beta).expect("beta validated by config");
        let drives_before = [self.coupled_drive(0), self.coupled_drive(1)];

        // Actions resolve in agent-index order.
        let mut ingest = [0.0f64; 2];
        for idx in 0..2 {
            ingest[idx] = self.apply_action(idx, actions[idx]);
        }

        // Energy drift plus any ingestion.
        for idx in 0..2 {
            let e = self.state.agents[idx].energy.value();
            self.state.agents[idx].energy =
                ContinuousEnergy(e - self.config.delta_d + ingest[idx]);
        }

        // Mobility follows energy, then accidents strike movable agents.
        for idx in 0..2 {
            self.state.agents[idx].movable =
                self.state.agents[idx].energy.value() > self.config.immobility_threshold;
        }
        for idx in 0..2 {
            if self.state.agents[idx].movable && self.rng.gen::<f64>() < self.config.accident_p {
                self.state.agents[idx].energy = ContinuousEnergy(self.config.immobility_threshold);
                self.state.agents[idx].movable = false;
            }
        }

        self.state.t += 1;

        let terminated = self
            .state
            .agents
            .iter()
            .any(|a| !a.energy.in_live_range());
        let truncated = !terminated && self.state.t >= self.config.max_steps;
        self.done = terminated || truncated;

        // A consumed food item is available again from the next step.
        if !self.state.food_present {
            self.state.food_position = [self.rng.gen::<f64>(), self.rng.gen::<f64>()];
            self.state.food_present = true;
        }

        let rewards = vec![
            homeostatic_reward(drives_before[0], self.coupled_drive(0), scale),
            homeostatic_reward(drives_before[1], self.coupled_drive(1), scale),
        ];

        Ok(EnvStep {
            observations: self.observations(),
            rewards,
            terminated,
            truncated,
        })
    }
}

impl Environment for Field2DEnv {
    fn n_agents(&self) -> usize {
        2
    }

    fn obs_dim(&self) -> usize {
        let base = 2 + 2 + 2 + 2 + 1;
        if self.condition.observes_partner() {
            base + 1
        } else {
            base
        }
    }

    fn n_actions(&self) -> usize {
        Field2DAction::COUNT
    }

    fn max_steps(&self) -> u32 {
        self.config.max_steps
    }

    fn reseed(&mut self, seed: u64) {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
    }

    fn reset(&mut self) -> Vec<Vec<f64>> {
        // Draw order: agent 0 position, agent 1 position, food position.
        let a0 = [self.rng.gen::<f64>(), self.rng.gen::<f64>()];
        let a1 = [self.rng.gen::<f64>(), self.rng.gen::<f64>()];
        let food = [self.rng.gen::<f64>(), self.rng.gen::<f64>()];
        let fresh = |position| AgentState {
            position,
            energy: ContinuousEnergy(0.0),
            has_food: false,
            movable: true,
        };
        self.state = Field2DState {
            agents: [fresh(a0), fresh(a1)],
            food_position: food,
            food_present: true,
            t: 0,
        };
        self.done = false;
        self.observations()
    }

    fn step(&mut self, actions: &[usize]) -> Result<EnvStep, EnvError> {
        check_actions(actions.len(), 2)?;
        self.advance([
            Field2DAction::from_index(actions[0])?,
            Field2DAction::from_index(actions[1])?,
        ])
    }

    fn drives(&self) -> Vec<f64> {
        vec![self.raw_drive(0).value(), self.raw_drive(1).value()]
    }

    fn coupled_drives(&self) -> Vec<f64> {
        vec![self.coupled_drive(0).value(), self.coupled_drive(1).value()]
    }
}
