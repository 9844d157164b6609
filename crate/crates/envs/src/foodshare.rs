use homeostat_core::{
    couple_drives, drive_categorical, homeostatic_reward, BinaryEnergy, Drive, EmpathyCondition,
    PreferenceDist, RewardScale,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{check_actions, EnvError, EnvStep, Environment};

/// Possessor action set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FoodShareAction {
    /// Restore the Possessor's own energy to High.
    Eat,
    /// Feed the Partner, restoring the Partner's energy to High.
    Pass,
}

impl FoodShareAction {
    pub const COUNT: usize = 2;

    pub fn from_index(index: usize) -> Result<Self, EnvError> {
        match index {
            0 => Ok(FoodShareAction::Eat),
            1 => Ok(FoodShareAction::Pass),
            other => Err(EnvError::InvalidAction(other)),
        }
    }

    pub fn index(self) -> usize {
        match self {
            FoodShareAction::Eat => 0,
            FoodShareAction::Pass => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct FoodShareConfig {
    /// Probability that a High agent decays to Low each step.
    pub decay_p: f64,
    /// Consecutive Low steps that fail the episode.
    pub counter_limit: u32,
    /// Step cap; reaching it truncates without failing.
    pub max_steps: u32,
    /// Desirability of each binary energy label.
    pub preference: PreferenceDist,
    /// Reward scaling beta.
    pub beta: f64,
}

impl Default for FoodShareConfig {
    fn default() -> Self {
        Self {
            decay_p: 0.1,
            counter_limit: 10,
            max_steps: 2000,
            preference: PreferenceDist::default(),
            beta: 1.0,
        }
    }
}

/// Full simulator state, exposed for diagnostics and the exact solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FoodShareState {
    pub possessor_energy: BinaryEnergy,
    pub partner_energy: BinaryEnergy,
    /// Consecutive steps the Possessor has ended Low; 0 whenever High.
    pub possessor_low_steps: u32,
    /// Consecutive steps the Partner has ended Low; 0 whenever High.
    pub partner_low_steps: u32,
    pub t: u32,
}

/// Two-agent binary-energy food-sharing environment.
///
/// Step order: stochastic decay of High agents, then the action effect, then
/// the Low-step counters. EAT therefore protects the Possessor for the whole
/// step while PASS leaves it exposed to decay.
pub struct FoodShareEnv {
    config: FoodShareConfig,
    condition: EmpathyCondition,
    state: FoodShareState,
    done: bool,
    rng: ChaCha8Rng,
}

impl FoodShareEnv {
    pub fn new(config: FoodShareConfig, condition: EmpathyCondition, seed: u64) -> Self {
        Self {
            config,
            condition,
            state: FoodShareState {
                possessor_energy: BinaryEnergy::High,
                partner_energy: BinaryEnergy::High,
                possessor_low_steps: 0,
                partner_low_steps: 0,
                t: 0,
            },
            done: true,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn condition(&self) -> EmpathyCondition {
        self.condition
    }

    pub fn config(&self) -> &FoodShareConfig {
        &self.config
    }

    pub fn state(&self) -> FoodShareState {
        self.state
    }

    /// Overwrites the simulator state; used by the exact solver to measure
    /// empirical transition frequencies from arbitrary start states.
    pub fn set_state(&mut self, state: FoodShareState) {
        self.state = state;
        self.done = false;
    }

    /// Steps with a typed action and returns the step plus a state snapshot
    /// taken before the transition (the Partner-was-Low flag for behavioral
    /// counting refers to the decision-time state).
    pub fn step_action(
        &mut self,
        action: FoodShareAction,
    ) -> Result<(EnvStep, FoodShareState), EnvError> {
        let before = self.state;
        let step = self.advance(action)?;
        Ok((step, before))
    }

    fn possessor_drive(&self) -> Drive {
        drive_categorical(self.state.possessor_energy, &self.config.preference)
    }

    fn partner_drive(&self) -> Drive {
        drive_categorical(self.state.partner_energy, &self.config.preference)
    }

    fn coupled_drive(&self) -> Drive {
        couple_drives(self.possessor_drive(), self.partner_drive(), self.condition)
    }

    fn observation(&self) -> Vec<f64> {
        let mut obs = vec![self.state.possessor_energy.encode()];
        if self.condition.observes_partner() {
            obs.push(self.state.partner_energy.encode());
        }
        obs
    }

    fn advance(&mut self, action: FoodShareAction) -> Result<EnvStep, EnvError> {
        if self.done {
            return Err(EnvError::EpisodeOver);
        }
        let scale = RewardScale::new(self.config.beta).expect("beta validated by config");
        let drive_before = self.coupled_drive();

        // 1. Stochastic decay, Possessor drawn first.
        if self.state.possessor_energy == BinaryEnergy::High
            && self.rng.gen::<f64>() < self.config.decay_p
        {
            self.state.possessor_energy = BinaryEnergy::Low;
        }
        if self.state.partner_energy == BinaryEnergy::High
            && self.rng.gen::<f64>() < self.config.decay_p
        {
            self.state.partner_energy = BinaryEnergy::Low;
        }

        // 2. Action effect.
        match action {
            FoodShareAction::Eat => self.state.possessor_energy = BinaryEnergy::High,
            FoodShareAction::Pass => self.state.partner_energy = BinaryEnergy::High,
        }

        // 3. Low-step counters.
        self.state.possessor_low_steps = if self.state.possessor_energy.is_low() {
            self.state.possessor_low_steps + 1
        } else {
            0
        };
        self.state.partner_low_steps = if self.state.partner_energy.is_low() {
            self.state.partner_low_steps + 1
        } else {
            0
        };
        self.state.t += 1;

        let terminated = self.state.possessor_low_steps >= self.config.counter_limit
            || self.state.partner_low_steps >= self.config.counter_limit;
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

impl Environment for FoodShareEnv {
    fn n_agents(&self) -> usize {
        1
    }

    fn obs_dim(&self) -> usize {
        if self.condition.observes_partner() {
            2
        } else {
            1
        }
    }

    fn n_actions(&self) -> usize {
        FoodShareAction::COUNT
    }

    fn max_steps(&self) -> u32 {
        self.config.max_steps
    }

    fn reseed(&mut self, seed: u64) {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
    }

    fn reset(&mut self) -> Vec<Vec<f64>> {
        // Both energy states independently uniform, Possessor drawn first.
        let possessor = if self.rng.gen::<f64>() < 0.5 {
            BinaryEnergy::High
        } else {
            BinaryEnergy::Low
        };
        let partner = if self.rng.gen::<f64>() < 0.5 {
            BinaryEnergy::High
        } else {
            BinaryEnergy::Low
        };
        self.state = FoodShareState {
            possessor_energy: possessor,
            partner_energy: partner,
            possessor_low_steps: 0,
            partner_low_steps: 0,
            t: 0,
        };
        self.done = false;
        vec![self.observation()]
    }

    fn step(&mut self, actions: &[usize]) -> Result<EnvStep, EnvError> {
        check_actions(actions.len(), 1)?;
        self.advance(FoodShareAction::from_index(actions[0])?)
    }

    fn drives(&self) -> Vec<f64> {
        vec![self.possessor_drive().value(), self.partner_drive().value()]
    }

    fn coupled_drives(&self) -> Vec<f64> {
        vec![self.coupled_drive().value()]
    }
}
