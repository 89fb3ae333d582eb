//! Trust game construction.
//!
//! A [`CostModel`] collects every robot-side and human-side cost of the
//! supervision scenario. [`TrustGame::build`] turns it into one 2x3 payoff
//! bimatrix per supervisor type: rows are the robot's plans, columns the
//! supervisor's monitoring actions. Utilities are negated costs, so every
//! entry is `<= 0`.
//!
//! The goal penalty and the supervisor's inconvenience/violation costs are
//! Bernoulli variables in the underlying model. They are resolved per type
//! here: a [`SupervisorType::Permissive`] supervisor accepts the risky plan,
//! so all of them are zero; a [`SupervisorType::Constraining`] supervisor
//! stops it, so they take their nonzero branch.

use std::fmt;

use serde::{Deserialize, Serialize};

/// The two plans the robot can make and execute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanRole {
    /// Executable in every candidate supervisor model. Expensive.
    Safe,
    /// Cheaper, but executable only in a fraction `r` of the models.
    ProbablyRisky,
}

impl PlanRole {
    pub const ALL: [PlanRole; 2] = [PlanRole::Safe, PlanRole::ProbablyRisky];
}

impl fmt::Display for PlanRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PlanRole::Safe => "safe",
            PlanRole::ProbablyRisky => "probably_risky",
        })
    }
}

/// The supervisor's pure monitoring actions, in canonical column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HumanAction {
    ObservePlan,
    ObserveExecution,
    NoObserve,
}

impl HumanAction {
    pub const ALL: [HumanAction; 3] = [
        HumanAction::ObservePlan,
        HumanAction::ObserveExecution,
        HumanAction::NoObserve,
    ];

    pub fn column(self) -> usize {
        match self {
            HumanAction::ObservePlan => 0,
            HumanAction::ObserveExecution => 1,
            HumanAction::NoObserve => 2,
        }
    }
}

impl fmt::Display for HumanAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HumanAction::ObservePlan => "observe_plan",
            HumanAction::ObserveExecution => "observe_execution",
            HumanAction::NoObserve => "no_observe",
        })
    }
}

/// A pair of values, one per plan role.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerRole<T> {
    pub safe: T,
    pub risky: T,
}

impl<T: Copy> PerRole<T> {
    pub fn new(safe: T, risky: T) -> Self {
        PerRole { safe, risky }
    }

    pub fn get(&self, role: PlanRole) -> T {
        match role {
            PlanRole::Safe => self.safe,
            PlanRole::ProbablyRisky => self.risky,
        }
    }
}

/// Robot-side costs, all in abstract nonnegative cost units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotCosts {
    pub plan_cost: PerRole<f64>,
    pub exec_cost: PerRole<f64>,
    /// Cost of the part of the risky plan executed before the supervisor stops it.
    pub partial_exec_cost: f64,
    /// Penalty for not achieving the goal when a constraining supervisor stops the risky plan.
    pub goal_penalty: f64,
}

/// Human-side costs. Inconvenience and violation costs only exist for the
/// risky plan; for the safe plan they are identically zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HumanCosts {
    pub plan_obs_cost: PerRole<f64>,
    pub exec_obs_cost: PerRole<f64>,
    /// Observation cost when the risky execution is halted early.
    pub partial_exec_obs_cost: f64,
    /// Inconvenience of rejecting the risky plan after reading it.
    pub plan_inconvenience: f64,
    /// Inconvenience of halting the risky plan mid-execution.
    pub exec_inconvenience: f64,
    /// Cost of an unsafe plan completing while nobody watched.
    pub violation_cost: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    pub robot: RobotCosts,
    pub human: HumanCosts,
    /// Probability mass of supervisor models in which the risky plan is executable.
    pub robustness: f64,
}

/// Which assumption of the cost model an input breaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    /// Every cost is a finite, nonnegative number.
    NonNegativeCost,
    /// Robustness lies in `(0, 1]`.
    RobustnessRange,
    /// Making the risky plan is no more expensive than making the safe one.
    RiskyPlanningCheaper,
    /// Executing the risky plan is no more expensive than executing the safe one.
    RiskyExecutionCheaper,
    /// A partial execution costs no more than the full risky execution.
    PartialExecutionBounded,
    /// Violation outweighs reading and rejecting the risky plan.
    ViolationOverPlanRejection,
    /// Violation outweighs watching and halting the risky execution.
    ViolationOverExecutionHalt,
    /// Watching the risky execution costs more than reading the risky plan.
    ExecutionObservationOverPlanObservation,
    /// Watching a halted execution costs more than reading the risky plan.
    PartialObservationOverPlanObservation,
    /// Halting mid-execution is more inconvenient than rejecting the plan.
    ExecutionInconvenienceOverPlanInconvenience,
}

impl Constraint {
    pub fn describe(self) -> &'static str {
        match self {
            Constraint::NonNegativeCost => "cost must be finite and nonnegative",
            Constraint::RobustnessRange => "robustness must lie in (0, 1]",
            Constraint::RiskyPlanningCheaper => "plan cost: risky <= safe",
            Constraint::RiskyExecutionCheaper => "execution cost: risky <= safe",
            Constraint::PartialExecutionBounded => "partial execution cost <= risky execution cost",
            Constraint::ViolationOverPlanRejection => {
                "violation cost > risky plan observation cost + plan inconvenience"
            }
            Constraint::ViolationOverExecutionHalt => {
                "violation cost > partial execution observation cost + execution inconvenience"
            }
            Constraint::ExecutionObservationOverPlanObservation => {
                "risky execution observation cost > risky plan observation cost"
            }
            Constraint::PartialObservationOverPlanObservation => {
                "partial execution observation cost > risky plan observation cost"
            }
            Constraint::ExecutionInconvenienceOverPlanInconvenience => {
                "execution inconvenience > plan inconvenience"
            }
        }
    }
}

/// One broken inequality: `lhs <op> rhs` was required and does not hold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub constraint: Constraint,
    pub lhs: f64,
    pub rhs: f64,
    pub fields: Vec<String>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} (got {} vs {}; fields: {})",
            self.constraint.describe(),
            self.lhs,
            self.rhs,
            self.fields.join(", ")
        )
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid cost model: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
pub struct InvalidCostModel(pub Vec<Violation>);

impl CostModel {
    /// Checks every ordering assumption. An empty list means the model is valid.
    ///
    /// Strict inequalities are compared exactly: inputs are user-supplied
    /// scalars, not computed quantities. Comparisons are negated so NaN fails.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Vec<Violation> {
        let r = &self.robot;
        let h = &self.human;
        let mut out = Vec::new();

        let scalars: [(&str, f64); 14] = [
            ("robot.plan_cost.safe", r.plan_cost.safe),
            ("robot.plan_cost.risky", r.plan_cost.risky),
            ("robot.exec_cost.safe", r.exec_cost.safe),
            ("robot.exec_cost.risky", r.exec_cost.risky),
            ("robot.partial_exec_cost", r.partial_exec_cost),
            ("robot.goal_penalty", r.goal_penalty),
            ("human.plan_obs_cost.safe", h.plan_obs_cost.safe),
            ("human.plan_obs_cost.risky", h.plan_obs_cost.risky),
            ("human.exec_obs_cost.safe", h.exec_obs_cost.safe),
            ("human.exec_obs_cost.risky", h.exec_obs_cost.risky),
            ("human.partial_exec_obs_cost", h.partial_exec_obs_cost),
            ("human.plan_inconvenience", h.plan_inconvenience),
            ("human.exec_inconvenience", h.exec_inconvenience),
            ("human.violation_cost", h.violation_cost),
        ];
        for (name, value) in scalars {
            if !(value.is_finite() && value >= 0.0) {
                out.push(Violation {
                    constraint: Constraint::NonNegativeCost,
                    lhs: value,
                    rhs: 0.0,
                    fields: vec![name.to_string()],
                });
            }
        }
        if !(self.robustness > 0.0 && self.robustness <= 1.0) {
            out.push(Violation {
                constraint: Constraint::RobustnessRange,
                lhs: self.robustness,
                rhs: 1.0,
                fields: vec!["robustness".into()],
            });
        }

        let mut at_most = |c, lhs: f64, rhs: f64, fields: &[&str]| {
            if !(lhs <= rhs) {
                out.push(Violation { constraint: c, lhs, rhs, fields: fields.iter().map(|s| s.to_string()).collect() });
            }
        };
        at_most(
            Constraint::RiskyPlanningCheaper,
            r.plan_cost.risky,
            r.plan_cost.safe,
            &["robot.plan_cost.risky", "robot.plan_cost.safe"],
        );
        at_most(
            Constraint::RiskyExecutionCheaper,
            r.exec_cost.risky,
            r.exec_cost.safe,
            &["robot.exec_cost.risky", "robot.exec_cost.safe"],
        );
        at_most(
            Constraint::PartialExecutionBounded,
            r.partial_exec_cost,
            r.exec_cost.risky,
            &["robot.partial_exec_cost", "robot.exec_cost.risky"],
        );

        let mut greater = |c, lhs: f64, rhs: f64, fields: &[&str]| {
            if !(lhs > rhs) {
                out.push(Violation { constraint: c, lhs, rhs, fields: fields.iter().map(|s| s.to_string()).collect() });
            }
        };
        greater(
            Constraint::ViolationOverPlanRejection,
            h.violation_cost,
            h.plan_obs_cost.risky + h.plan_inconvenience,
            &["human.violation_cost", "human.plan_obs_cost.risky", "human.plan_inconvenience"],
        );
        greater(
            Constraint::ViolationOverExecutionHalt,
            h.violation_cost,
            h.partial_exec_obs_cost + h.exec_inconvenience,
            &["human.violation_cost", "human.partial_exec_obs_cost", "human.exec_inconvenience"],
        );
        greater(
            Constraint::ExecutionObservationOverPlanObservation,
            h.exec_obs_cost.risky,
            h.plan_obs_cost.risky,
            &["human.exec_obs_cost.risky", "human.plan_obs_cost.risky"],
        );
        greater(
            Constraint::PartialObservationOverPlanObservation,
            h.partial_exec_obs_cost,
            h.plan_obs_cost.risky,
            &["human.partial_exec_obs_cost", "human.plan_obs_cost.risky"],
        );
        greater(
            Constraint::ExecutionInconvenienceOverPlanInconvenience,
            h.exec_inconvenience,
            h.plan_inconvenience,
            &["human.exec_inconvenience", "human.plan_inconvenience"],
        );
        out
    }

    pub fn check(&self) -> Result<(), InvalidCostModel> {
        let violations = self.validate();
        if violations.is_empty() {
            Ok(())
        } else {
            Err(InvalidCostModel(violations))
        }
    }

    /// Total robot cost of making and fully executing a plan.
    pub fn robot_full_cost(&self, role: PlanRole) -> f64 {
        self.robot.plan_cost.get(role) + self.robot.exec_cost.get(role)
    }
}

/// Bayesian type of the supervisor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SupervisorType {
    /// The risky plan is executable in this supervisor's model (probability `r`).
    Permissive,
    /// The risky plan violates this supervisor's model (probability `1 - r`).
    Constraining,
}

impl SupervisorType {
    pub const ALL: [SupervisorType; 2] = [SupervisorType::Permissive, SupervisorType::Constraining];

    pub fn probability(self, robustness: f64) -> f64 {
        match self {
            SupervisorType::Permissive => robustness,
            SupervisorType::Constraining => 1.0 - robustness,
        }
    }
}

impl fmt::Display for SupervisorType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SupervisorType::Permissive => "permissive",
            SupervisorType::Constraining => "constraining",
        })
    }
}

/// Selects one of the type matrices or their probability-weighted mixture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixSource {
    Permissive,
    #[default]
    Constraining,
    Expected,
}

impl From<SupervisorType> for MatrixSource {
    fn from(t: SupervisorType) -> Self {
        match t {
            SupervisorType::Permissive => MatrixSource::Permissive,
            SupervisorType::Constraining => MatrixSource::Constraining,
        }
    }
}

impl std::str::FromStr for MatrixSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "permissive" => Ok(MatrixSource::Permissive),
            "constraining" => Ok(MatrixSource::Constraining),
            "expected" => Ok(MatrixSource::Expected),
            other => Err(format!("unknown matrix source `{other}` (expected permissive, constraining or expected)")),
        }
    }
}

impl fmt::Display for MatrixSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MatrixSource::Permissive => "permissive",
            MatrixSource::Constraining => "constraining",
            MatrixSource::Expected => "expected",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PayoffCell {
    pub robot: f64,
    pub human: f64,
}

impl PayoffCell {
    pub const fn new(robot: f64, human: f64) -> Self {
        PayoffCell { robot, human }
    }
}

/// 2x3 bimatrix, rows by [`PlanRole`], columns by [`HumanAction`].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PayoffMatrix {
    pub safe: [PayoffCell; 3],
    pub probably_risky: [PayoffCell; 3],
}

impl PayoffMatrix {
    pub fn row(&self, role: PlanRole) -> &[PayoffCell; 3] {
        match role {
            PlanRole::Safe => &self.safe,
            PlanRole::ProbablyRisky => &self.probably_risky,
        }
    }

    pub fn row_mut(&mut self, role: PlanRole) -> &mut [PayoffCell; 3] {
        match role {
            PlanRole::Safe => &mut self.safe,
            PlanRole::ProbablyRisky => &mut self.probably_risky,
        }
    }

    pub fn cell(&self, role: PlanRole, action: HumanAction) -> PayoffCell {
        self.row(role)[action.column()]
    }

    /// Cell-wise `w * self + (1 - w) * other`.
    pub fn mix(&self, w: f64, other: &PayoffMatrix) -> PayoffMatrix {
        let mut out = PayoffMatrix::default();
        for role in PlanRole::ALL {
            let (a, b) = (self.row(role), other.row(role));
            let dst = out.row_mut(role);
            for j in 0..3 {
                dst[j] = if a[j] == b[j] {
                    a[j]
                } else {
                    PayoffCell::new(
                        w * a[j].robot + (1.0 - w) * b[j].robot,
                        w * a[j].human + (1.0 - w) * b[j].human,
                    )
                };
            }
        }
        out
    }

    /// Applies `f` to every cell.
    pub fn map(&self, f: impl Fn(PayoffCell) -> PayoffCell) -> PayoffMatrix {
        PayoffMatrix { safe: self.safe.map(&f), probably_risky: self.probably_risky.map(&f) }
    }

    pub fn cells(&self) -> impl Iterator<Item = (PlanRole, HumanAction, PayoffCell)> + '_ {
        PlanRole::ALL.into_iter().flat_map(move |role| {
            HumanAction::ALL.into_iter().map(move |action| (role, action, self.cell(role, action)))
        })
    }
}

/// The Bayesian trust game: the cost model plus one payoff matrix per type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrustGame {
    pub cost_model: CostModel,
    pub permissive: PayoffMatrix,
    pub constraining: PayoffMatrix,
}

impl TrustGame {
    /// Validates the cost model and fills both type matrices.
    pub fn build(cost_model: CostModel) -> Result<TrustGame, InvalidCostModel> {
        cost_model.check()?;
        Ok(Self::build_unchecked(cost_model))
    }

    /// Fills the matrices without validating the ordering assumptions.
    pub fn build_unchecked(cost_model: CostModel) -> TrustGame {
        let r = &cost_model.robot;
        let h = &cost_model.human;

        let safe_robot = -(r.plan_cost.safe + r.exec_cost.safe);
        let safe = [
            PayoffCell::new(safe_robot, -h.plan_obs_cost.safe),
            PayoffCell::new(safe_robot, -h.exec_obs_cost.safe),
            PayoffCell::new(safe_robot, 0.0),
        ];

        // Permissive: every Bernoulli term is zero and the risky plan runs in full
        // whatever the supervisor watches.
        let risky_full = -(r.plan_cost.risky + r.exec_cost.risky);
        let permissive = PayoffMatrix {
            safe,
            probably_risky: [
                PayoffCell::new(risky_full, -h.plan_obs_cost.risky),
                PayoffCell::new(risky_full, -h.exec_obs_cost.risky),
                PayoffCell::new(risky_full, 0.0),
            ],
        };

        // Constraining: a read plan is rejected before any execution, a watched
        // execution is halted after the partial plan, an unwatched one completes.
        let constraining = PayoffMatrix {
            safe,
            probably_risky: [
                PayoffCell::new(
                    -(r.plan_cost.risky + r.goal_penalty),
                    -(h.plan_obs_cost.risky + h.plan_inconvenience),
                ),
                PayoffCell::new(
                    -(r.plan_cost.risky + r.partial_exec_cost + r.goal_penalty),
                    -(h.partial_exec_obs_cost + h.exec_inconvenience),
                ),
                PayoffCell::new(risky_full, -h.violation_cost),
            ],
        };

        TrustGame { cost_model, permissive, constraining }
    }

    pub fn robustness(&self) -> f64 {
        self.cost_model.robustness
    }

    pub fn type_matrix(&self, t: SupervisorType) -> &PayoffMatrix {
        match t {
            SupervisorType::Permissive => &self.permissive,
            SupervisorType::Constraining => &self.constraining,
        }
    }

    /// `r * permissive + (1 - r) * constraining`, cell by cell. Cells shared by
    /// both types (the whole safe row) are copied exactly.
    pub fn expected(&self) -> PayoffMatrix {
        self.permissive.mix(self.robustness(), &self.constraining)
    }

    pub fn matrix(&self, source: MatrixSource) -> PayoffMatrix {
        match source {
            MatrixSource::Permissive => self.permissive,
            MatrixSource::Constraining => self.constraining,
            MatrixSource::Expected => self.expected(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::delivery_cost_model;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-9
    }

    fn assert_row(row: &[PayoffCell; 3], expected: [(f64, f64); 3]) {
        for (cell, (r, h)) in row.iter().zip(expected) {
            assert!(close(cell.robot, r) && close(cell.human, h), "{cell:?} != ({r}, {h})");
        }
    }

    #[test]
    fn delivery_permissive_matrix() {
        let game = TrustGame::build(delivery_cost_model()).unwrap();
        assert_row(&game.permissive.probably_risky, [(-13.54, -0.885), (-13.54, -4.0), (-13.54, 0.0)]);
        assert_row(&game.permissive.safe, [(-17.80, -0.95), (-17.80, -8.0), (-17.80, 0.0)]);
    }

    #[test]
    fn delivery_constraining_matrix() {
        let game = TrustGame::build(delivery_cost_model()).unwrap();
        assert_row(&game.constraining.probably_risky, [(-23.54, -1.835), (-26.54, -9.5), (-13.54, -20.0)]);
        assert_eq!(game.constraining.safe, game.permissive.safe);
    }

    #[test]
    fn zero_costs_give_zero_cells() {
        let model = crate::fixtures::zero_cost_model();
        let game = TrustGame::build_unchecked(model);
        for m in [game.permissive, game.constraining, game.expected()] {
            assert!(m.cells().all(|(_, _, c)| c.robot == 0.0 && c.human == 0.0));
        }
    }

    #[test]
    fn delivery_costs_are_valid() {
        assert!(delivery_cost_model().validate().is_empty());
    }

    #[test]
    fn low_violation_cost_breaks_both_violation_orderings() {
        let mut model = delivery_cost_model();
        model.human.violation_cost = 0.5;
        let broken: Vec<_> = model.validate().into_iter().map(|v| v.constraint).collect();
        assert_eq!(
            broken,
            vec![Constraint::ViolationOverPlanRejection, Constraint::ViolationOverExecutionHalt]
        );
        let report = &model.validate()[0];
        assert_eq!(report.lhs, 0.5);
        assert!(close(report.rhs, 1.835));
        assert!(report.fields.contains(&"human.violation_cost".to_string()));
    }

    #[test]
    fn equal_inconveniences_fail_strict_ordering() {
        let mut model = delivery_cost_model();
        model.human.exec_inconvenience = 0.95;
        model.human.plan_inconvenience = 0.95;
        let broken: Vec<_> = model.validate().into_iter().map(|v| v.constraint).collect();
        assert_eq!(broken, vec![Constraint::ExecutionInconvenienceOverPlanInconvenience]);
    }

    #[test]
    fn robot_orderings_and_ranges() {
        let mut model = delivery_cost_model();
        model.robot.plan_cost.risky = 4.0;
        model.robot.partial_exec_cost = 11.0;
        model.robustness = 0.0;
        model.robot.goal_penalty = -1.0;
        let broken: Vec<_> = model.validate().into_iter().map(|v| v.constraint).collect();
        assert!(broken.contains(&Constraint::RiskyPlanningCheaper));
        assert!(broken.contains(&Constraint::PartialExecutionBounded));
        assert!(broken.contains(&Constraint::RobustnessRange));
        assert!(broken.contains(&Constraint::NonNegativeCost));
        assert!(TrustGame::build(model).is_err());
    }

    #[test]
    fn nan_robustness_is_rejected() {
        let mut model = delivery_cost_model();
        model.robustness = f64::NAN;
        let broken: Vec<_> = model.validate().into_iter().map(|v| v.constraint).collect();
        assert_eq!(broken, vec![Constraint::RobustnessRange]);
    }

    #[test]
    fn expected_game_averages_types() {
        let game = TrustGame::build(delivery_cost_model()).unwrap();
        let e = game.expected();
        assert_row(&e.probably_risky, [(-18.54, -1.36), (-20.04, -6.75), (-13.54, -10.0)]);
        assert_eq!(e.safe, game.permissive.safe);
    }

    #[test]
    fn degenerate_mixtures() {
        let mut model = delivery_cost_model();
        model.robustness = 1.0;
        let game = TrustGame::build(model).unwrap();
        assert_eq!(game.expected(), game.permissive);

        let same = TrustGame { constraining: game.permissive, ..game.clone() };
        let mut half = same.clone();
        half.cost_model.robustness = 0.5;
        assert_eq!(half.expected(), same.permissive);
    }
}
