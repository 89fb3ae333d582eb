//! Pure-strategy equilibria and robot best responses.

use serde::{Deserialize, Serialize};

use crate::game::{CostModel, HumanAction, MatrixSource, PayoffMatrix, PerRole, PlanRole, SupervisorType, TrustGame};
use crate::region::MonitoringStrategy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PureProfile {
    pub robot: PlanRole,
    pub human: HumanAction,
}

impl PureProfile {
    pub const fn new(robot: PlanRole, human: HumanAction) -> Self {
        PureProfile { robot, human }
    }
}

/// All pure-strategy Nash equilibria of a 2x3 bimatrix.
///
/// A cell qualifies when the robot's payoff is weakly maximal in its column
/// and the human's payoff is weakly maximal in its row, so ties admit several
/// equilibria.
pub fn pure_nash(matrix: &PayoffMatrix) -> Vec<PureProfile> {
    let mut out = Vec::new();
    for role in PlanRole::ALL {
        let row = matrix.row(role);
        let best_human = row.iter().map(|c| c.human).fold(f64::NEG_INFINITY, f64::max);
        for action in HumanAction::ALL {
            let cell = row[action.column()];
            let best_robot = PlanRole::ALL
                .iter()
                .map(|&r| matrix.cell(r, action).robot)
                .fold(f64::NEG_INFINITY, f64::max);
            if cell.robot >= best_robot && cell.human >= best_human {
                out.push(PureProfile::new(role, action));
            }
        }
    }
    out
}

/// The two halves of the expected-utility condition under which
/// `(ProbablyRisky, NoObserve)` is an equilibrium of the expected game.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoTrustCondition {
    /// The supervisor prefers not to watch over reading the risky plan.
    pub human_side: bool,
    /// The robot prefers the risky plan even when its plan gets read.
    pub robot_side: bool,
}

impl NoTrustCondition {
    pub fn holds(&self) -> bool {
        self.human_side && self.robot_side
    }
}

pub fn check_no_trust_condition(model: &CostModel) -> NoTrustCondition {
    let r = model.robustness;
    let h = &model.human;
    let rc = &model.robot;
    let human_side = (1.0 - r) * h.violation_cost < h.plan_obs_cost.risky + (1.0 - r) * h.plan_inconvenience;
    let robot_side = rc.plan_cost.risky + (1.0 - r) * rc.goal_penalty + r * rc.exec_cost.risky
        < rc.plan_cost.safe + rc.exec_cost.safe;
    NoTrustCondition { human_side, robot_side }
}

/// q-weighted robot utility of each row.
pub fn robot_expected_utilities(matrix: &PayoffMatrix, q: &MonitoringStrategy) -> PerRole<f64> {
    let eval = |role| {
        HumanAction::ALL
            .iter()
            .map(|&a| q.weight(a) * matrix.cell(role, a).robot)
            .sum::<f64>()
    };
    PerRole::new(eval(PlanRole::Safe), eval(PlanRole::ProbablyRisky))
}

/// Robot's best plan against a committed monitoring strategy. Exact ties go
/// to the safe plan.
pub fn best_response_in(matrix: &PayoffMatrix, q: &MonitoringStrategy) -> PlanRole {
    let u = robot_expected_utilities(matrix, q);
    if u.risky > u.safe {
        PlanRole::ProbablyRisky
    } else {
        PlanRole::Safe
    }
}

pub fn best_response_robot(game: &TrustGame, q: &MonitoringStrategy, source: MatrixSource) -> PlanRole {
    best_response_in(&game.matrix(source), q)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NashReport {
    pub permissive_equilibria: Vec<PureProfile>,
    pub constraining_equilibria: Vec<PureProfile>,
    pub expected_game_equilibria: Vec<PureProfile>,
    pub no_trust_condition: NoTrustCondition,
    /// Total probability of the types whose matrix has a pure equilibrium.
    pub existence_probability: f64,
}

impl NashReport {
    pub fn equilibria(&self, t: SupervisorType) -> &[PureProfile] {
        match t {
            SupervisorType::Permissive => &self.permissive_equilibria,
            SupervisorType::Constraining => &self.constraining_equilibria,
        }
    }
}

/// Per-type brute force plus the expected-utility condition. Both are kept
/// because they can disagree under ties.
pub fn nash_report(game: &TrustGame) -> NashReport {
    let permissive_equilibria = pure_nash(&game.permissive);
    let constraining_equilibria = pure_nash(&game.constraining);
    let r = game.robustness();
    let mut existence_probability = 0.0;
    if !permissive_equilibria.is_empty() {
        existence_probability += SupervisorType::Permissive.probability(r);
    }
    if !constraining_equilibria.is_empty() {
        existence_probability += SupervisorType::Constraining.probability(r);
    }
    NashReport {
        permissive_equilibria,
        constraining_equilibria,
        expected_game_equilibria: pure_nash(&game.expected()),
        no_trust_condition: check_no_trust_condition(&game.cost_model),
        existence_probability,
    }
}
