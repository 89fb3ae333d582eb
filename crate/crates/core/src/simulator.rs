//! Supervision trials.
//!
//! Each trial the supervisor commits to a monitoring strategy, the robot
//! best-responds to that strategy alone (no memory of earlier trials), then a
//! supervisor type and a monitoring action are drawn and the matching payoff
//! cell is recorded.
//!
//! One ChaCha8 generator per session, seeded explicitly. Every trial draws two
//! uniforms in a fixed order: the supervisor type first, then the monitoring
//! action. Replaying the seed with the same committed strategies reproduces
//! the session bit for bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::equilibrium::best_response_in;
use crate::game::{HumanAction, MatrixSource, PayoffMatrix, PlanRole, SupervisorType, TrustGame};
use crate::region::{MonitoringStrategy, OptimalMonitoringResult, StrategyError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimulationError {
    #[error("session already ran its {limit} trials")]
    TrialLimit { limit: u32 },
    #[error("invalid strategy: {0}")]
    InvalidStrategy(#[from] StrategyError),
    #[error("trial limit must be at least 1")]
    ZeroTrials,
    #[error("monitor split must lie in [0, 1], got {0}")]
    MonitorSplit(f64),
    #[error("session has no trials")]
    EmptySession,
    #[error("replay diverged at trial {index}")]
    ReplayMismatch { index: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub trial_limit: u32,
    /// Strategies arrive as `(monitor, not_monitor)` pairs.
    pub merged_monitoring: bool,
    /// Share of the monitor weight given to reading the plan; the rest goes to
    /// watching the execution.
    pub monitor_split: f64,
    /// Matrix the robot best-responds in.
    pub response_source: MatrixSource,
}

impl SessionConfig {
    pub fn new(trial_limit: u32) -> Self {
        SessionConfig {
            trial_limit,
            merged_monitoring: false,
            monitor_split: 1.0,
            response_source: MatrixSource::Constraining,
        }
    }

    pub fn validate(&self) -> Result<(), SimulationError> {
        if self.trial_limit == 0 {
            return Err(SimulationError::ZeroTrials);
        }
        if !(0.0..=1.0).contains(&self.monitor_split) {
            return Err(SimulationError::MonitorSplit(self.monitor_split));
        }
        Ok(())
    }

    /// Turns user input into a full strategy: three weights normally, or a
    /// `(monitor, not_monitor)` pair in merged mode.
    pub fn expand(&self, values: &[f64]) -> Result<MonitoringStrategy, StrategyError> {
        if !self.merged_monitoring {
            return MonitoringStrategy::from_slice(values);
        }
        let [monitor, idle] = *values else {
            return Err(StrategyError::Arity { expected: 2, got: values.len() });
        };
        // validate the pair on its own before splitting it
        MonitoringStrategy::new(monitor, 0.0, idle)?;
        let plan = monitor * self.monitor_split;
        MonitoringStrategy::new(plan, monitor - plan, idle)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    /// 1-based.
    pub index: u32,
    pub committed_strategy: MonitoringStrategy,
    pub robot_choice: PlanRole,
    pub sampled_type: SupervisorType,
    pub sampled_human_action: HumanAction,
    pub robot_payoff: f64,
    pub human_payoff: f64,
    pub cumulative_human_payoff: f64,
}

/// Serializable form of a session: enough to replay it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionExport {
    pub session_id: String,
    pub seed: u64,
    pub config: SessionConfig,
    pub trials: Vec<TrialRecord>,
}

/// Draws a supervisor type and a monitoring action, in that order.
fn sample(rng: &mut ChaCha8Rng, robustness: f64, q: &MonitoringStrategy) -> (SupervisorType, HumanAction) {
    let t = if rng.gen::<f64>() < robustness { SupervisorType::Permissive } else { SupervisorType::Constraining };
    let u = rng.gen::<f64>();
    let mut acc = 0.0;
    let mut action = HumanAction::ALL.into_iter().rev().find(|&a| q.weight(a) > 0.0).unwrap_or(HumanAction::NoObserve);
    for a in HumanAction::ALL {
        let w = q.weight(a);
        acc += w;
        if w > 0.0 && u < acc {
            action = a;
            break;
        }
    }
    (t, action)
}

#[derive(Debug, Clone)]
pub struct Session {
    id: String,
    game: TrustGame,
    response_matrix: PayoffMatrix,
    seed: u64,
    config: SessionConfig,
    trials: Vec<TrialRecord>,
    rng: ChaCha8Rng,
}

impl Session {
    pub fn new(id: impl Into<String>, game: TrustGame, seed: u64, config: SessionConfig) -> Result<Self, SimulationError> {
        config.validate()?;
        Ok(Session {
            id: id.into(),
            response_matrix: game.matrix(config.response_source),
            game,
            seed,
            config,
            trials: Vec::new(),
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn game(&self) -> &TrustGame {
        &self.game
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn trials(&self) -> &[TrialRecord] {
        &self.trials
    }

    pub fn is_finished(&self) -> bool {
        self.trials.len() as u32 >= self.config.trial_limit
    }

    /// Runs one trial from raw input, expanded per the session config.
    pub fn run_trial(&mut self, values: &[f64]) -> Result<&TrialRecord, SimulationError> {
        if self.is_finished() {
            return Err(SimulationError::TrialLimit { limit: self.config.trial_limit });
        }
        let q = self.config.expand(values)?;
        self.run_trial_strategy(q)
    }

    pub fn run_trial_strategy(&mut self, q: MonitoringStrategy) -> Result<&TrialRecord, SimulationError> {
        if self.is_finished() {
            return Err(SimulationError::TrialLimit { limit: self.config.trial_limit });
        }
        let robot_choice = best_response_in(&self.response_matrix, &q);
        let (sampled_type, action) = sample(&mut self.rng, self.game.robustness(), &q);
        let cell = self.game.type_matrix(sampled_type).cell(robot_choice, action);
        let cumulative = self.trials.last().map_or(0.0, |t| t.cumulative_human_payoff) + cell.human;
        self.trials.push(TrialRecord {
            index: self.trials.len() as u32 + 1,
            committed_strategy: q,
            robot_choice,
            sampled_type,
            sampled_human_action: action,
            robot_payoff: cell.robot,
            human_payoff: cell.human,
            cumulative_human_payoff: cumulative,
        });
        Ok(self.trials.last().expect("just pushed"))
    }

    pub fn export(&self) -> SessionExport {
        SessionExport {
            session_id: self.id.clone(),
            seed: self.seed,
            config: self.config,
            trials: self.trials.clone(),
        }
    }

    /// Re-runs an exported session's committed strategies from its seed and
    /// checks that every record comes out identical.
    pub fn replay(game: TrustGame, export: &SessionExport) -> Result<Session, SimulationError> {
        let mut session = Session::new(export.session_id.clone(), game, export.seed, export.config)?;
        for record in &export.trials {
            let got = session.run_trial_strategy(record.committed_strategy)?;
            if got != record {
                return Err(SimulationError::ReplayMismatch { index: record.index });
            }
        }
        Ok(session)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSummary {
    pub trial_count: usize,
    pub mean_human_payoff: Option<f64>,
    /// Population variance.
    pub variance_human_payoff: Option<f64>,
    pub strategies: Vec<MonitoringStrategy>,
    pub distances_to_optimum: Option<Vec<f64>>,
    pub optimum: Option<OptimalMonitoringResult>,
}

impl SessionSummary {
    pub fn empty(optimum: Option<OptimalMonitoringResult>) -> Self {
        SessionSummary {
            trial_count: 0,
            mean_human_payoff: None,
            variance_human_payoff: None,
            strategies: Vec::new(),
            distances_to_optimum: optimum.map(|_| Vec::new()),
            optimum,
        }
    }
}

pub fn session_summary(
    trials: &[TrialRecord],
    optimum: Option<OptimalMonitoringResult>,
) -> Result<SessionSummary, SimulationError> {
    if trials.is_empty() {
        return Err(SimulationError::EmptySession);
    }
    let n = trials.len() as f64;
    let mean = trials.iter().map(|t| t.human_payoff).sum::<f64>() / n;
    let variance = trials.iter().map(|t| (t.human_payoff - mean).powi(2)).sum::<f64>() / n;
    let strategies: Vec<_> = trials.iter().map(|t| t.committed_strategy).collect();
    Ok(SessionSummary {
        trial_count: trials.len(),
        mean_human_payoff: Some(mean),
        variance_human_payoff: Some(variance),
        distances_to_optimum: optimum.map(|o| strategies.iter().map(|q| q.distance(&o.strategy)).collect()),
        strategies,
        optimum,
    })
}

/// Robot payoff averaged over `n` independent trials at a fixed strategy.
pub fn monte_carlo_value(game: &TrustGame, q: &MonitoringStrategy, n: usize, seed: u64, source: MatrixSource) -> f64 {
    monte_carlo_stats(game, q, n, seed, source).0
}

/// Sample mean and population variance of the robot payoff over `n` trials.
pub fn monte_carlo_stats(game: &TrustGame, q: &MonitoringStrategy, n: usize, seed: u64, source: MatrixSource) -> (f64, f64) {
    assert!(n >= 1, "need at least one trial");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let choice = best_response_in(&game.matrix(source), q);
    // Welford: a constant payoff stream yields that constant exactly
    let (mut mean, mut m2) = (0.0, 0.0);
    for k in 1..=n {
        let (t, a) = sample(&mut rng, game.robustness(), q);
        let v = game.type_matrix(t).cell(choice, a).robot;
        let delta = v - mean;
        mean += delta / k as f64;
        m2 += delta * (v - mean);
    }
    (mean, m2 / n as f64)
}

/// Analytic counterpart of [`monte_carlo_value`]: type- and q-weighted robot
/// payoff of the robot's best response.
pub fn expected_robot_payoff(game: &TrustGame, q: &MonitoringStrategy, source: MatrixSource) -> f64 {
    let choice = best_response_in(&game.matrix(source), q);
    let r = game.robustness();
    SupervisorType::ALL
        .iter()
        .map(|&t| {
            let m = game.type_matrix(t);
            t.probability(r) * HumanAction::ALL.iter().map(|&a| q.weight(a) * m.cell(choice, a).robot).sum::<f64>()
        })
        .sum()
}
