//! Scenario documents and cost derivation.
//!
//! A scenario is a human-editable TOML (or JSON) document. Each cost either
//! appears verbatim or is derived from raw plan statistics:
//!
//! * `robot.plan_cost` xor `robot.planning_time` + `robot.plan_weight`:
//!   planning times are divided by the slower one and multiplied by the weight.
//! * `robot.goal_penalty` xor `robot.goal_penalty_factor` (times the risky
//!   execution cost).
//! * `human.plan_obs_cost` xor `human.plan_obs_factor` (times the robot's plan cost).
//! * top-level `robustness` xor `ensemble`, a list of candidate supervisor
//!   models flagged by whether the risky plan executes in them.
//!
//! Unknown keys are rejected.

use serde::{Deserialize, Serialize};

use crate::game::{CostModel, HumanCosts, InvalidCostModel, PerRole, RobotCosts};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScenarioError {
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error(transparent)]
    Invalid(#[from] InvalidCostModel),
}

impl ScenarioError {
    fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        ScenarioError::Schema { path: path.into(), message: message.into() }
    }

    fn conflict(a: &str, b: &str) -> Self {
        Self::schema(a, format!("`{a}` and `{b}` are mutually exclusive"))
    }

    fn missing(path: &str) -> Self {
        Self::schema(path, "missing field")
    }
}

/// One candidate supervisor model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleModel {
    pub id: String,
    pub executable_risky: bool,
    #[serde(default = "yes", skip_serializing_if = "is_true")]
    pub executable_safe: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
}

fn yes() -> bool {
    true
}

fn is_true(b: &bool) -> bool {
    *b
}

/// Candidate supervisor models with optional probability weights (uniform
/// when absent).
#[derive(Debug, Clone, PartialEq)]
pub struct ModelEnsemble {
    models: Vec<EnsembleModel>,
}

impl ModelEnsemble {
    pub fn new(models: Vec<EnsembleModel>) -> Result<Self, ScenarioError> {
        if models.is_empty() {
            return Err(ScenarioError::schema("ensemble", "ensemble must list at least one model"));
        }
        for (i, m) in models.iter().enumerate() {
            if !m.executable_safe {
                return Err(ScenarioError::schema(
                    format!("ensemble[{i}].executable_safe"),
                    "the safe plan must be executable in every model",
                ));
            }
        }
        let weighted = models.iter().filter(|m| m.weight.is_some()).count();
        if weighted != 0 && weighted != models.len() {
            return Err(ScenarioError::schema("ensemble", "give a weight for every model or for none"));
        }
        if weighted != 0 {
            for (i, m) in models.iter().enumerate() {
                let w = m.weight.unwrap_or_default();
                if !(w.is_finite() && w >= 0.0) {
                    return Err(ScenarioError::schema(format!("ensemble[{i}].weight"), "weight must be nonnegative"));
                }
            }
            let total: f64 = models.iter().filter_map(|m| m.weight).sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(ScenarioError::schema("ensemble", format!("weights sum to {total}, not 1")));
            }
        }
        Ok(ModelEnsemble { models })
    }

    pub fn models(&self) -> &[EnsembleModel] {
        &self.models
    }

    /// Probability mass of the models in which the risky plan executes. Zero
    /// is returned as is; the cost model rejects it later.
    pub fn robustness(&self) -> f64 {
        let uniform = 1.0 / self.models.len() as f64;
        self.models
            .iter()
            .filter(|m| m.executable_risky)
            .map(|m| m.weight.unwrap_or(uniform))
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawPlanStats {
    /// Seconds spent producing each plan.
    pub planning_time: PerRole<f64>,
    pub execution_cost: PerRole<f64>,
    pub partial_execution_cost: f64,
}

/// Human-side costs that are never derived.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HumanOverrides {
    pub exec_obs_cost: PerRole<f64>,
    pub partial_exec_obs_cost: f64,
    pub plan_inconvenience: f64,
    pub exec_inconvenience: f64,
    pub violation_cost: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightConfig {
    pub robot_plan_weight: f64,
    pub human_plan_obs_factor: f64,
    pub goal_penalty_factor: f64,
    pub human: HumanOverrides,
}

/// Divides both planning times by the larger one and scales by `weight`.
pub fn normalize_planning_times(times: PerRole<f64>, weight: f64) -> PerRole<f64> {
    let max = times.safe.max(times.risky);
    PerRole::new(times.safe / max * weight, times.risky / max * weight)
}

fn positive(path: &str, value: f64) -> Result<f64, ScenarioError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(ScenarioError::schema(path, format!("must be positive, got {value}")))
    }
}

pub fn derive_cost_model(stats: &RawPlanStats, weights: &WeightConfig, robustness: f64) -> Result<CostModel, ScenarioError> {
    positive("robot.planning_time.safe", stats.planning_time.safe)?;
    positive("robot.planning_time.risky", stats.planning_time.risky)?;
    positive("robot.plan_weight", weights.robot_plan_weight)?;
    positive("human.plan_obs_factor", weights.human_plan_obs_factor)?;
    positive("robot.goal_penalty_factor", weights.goal_penalty_factor)?;

    let plan_cost = normalize_planning_times(stats.planning_time, weights.robot_plan_weight);
    let o = &weights.human;
    let model = CostModel {
        robot: RobotCosts {
            plan_cost,
            exec_cost: stats.execution_cost,
            partial_exec_cost: stats.partial_execution_cost,
            goal_penalty: weights.goal_penalty_factor * stats.execution_cost.risky,
        },
        human: HumanCosts {
            plan_obs_cost: PerRole::new(
                weights.human_plan_obs_factor * plan_cost.safe,
                weights.human_plan_obs_factor * plan_cost.risky,
            ),
            exec_obs_cost: o.exec_obs_cost,
            partial_exec_obs_cost: o.partial_exec_obs_cost,
            plan_inconvenience: o.plan_inconvenience,
            exec_inconvenience: o.exec_inconvenience,
            violation_cost: o.violation_cost,
        },
        robustness,
    };
    model.check()?;
    Ok(model)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan_cost: Option<PerRole<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub planning_time: Option<PerRole<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan_weight: Option<f64>,
    pub exec_cost: PerRole<f64>,
    pub partial_exec_cost: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub goal_penalty: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub goal_penalty_factor: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HumanSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan_obs_cost: Option<PerRole<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan_obs_factor: Option<f64>,
    pub exec_obs_cost: PerRole<f64>,
    pub partial_exec_obs_cost: f64,
    pub plan_inconvenience: f64,
    pub exec_inconvenience: f64,
    pub violation_cost: f64,
}

/// The scenario document exactly as written.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub robustness: Option<f64>,
    pub robot: RobotSection,
    pub human: HumanSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<Vec<EnsembleModel>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RobustnessSource {
    Inline(f64),
    Ensemble(ModelEnsemble),
}

impl RobustnessSource {
    pub fn value(&self) -> f64 {
        match self {
            RobustnessSource::Inline(r) => *r,
            RobustnessSource::Ensemble(e) => e.robustness(),
        }
    }
}

/// A parsed, resolved and validated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedScenario {
    pub document: ScenarioDocument,
    pub robustness: RobustnessSource,
    pub cost_model: CostModel,
}

impl ScenarioDocument {
    /// Raw statistics, when the robot plan cost is given as planning times.
    pub fn raw_stats(&self) -> Option<RawPlanStats> {
        Some(RawPlanStats {
            planning_time: self.robot.planning_time?,
            execution_cost: self.robot.exec_cost,
            partial_execution_cost: self.robot.partial_exec_cost,
        })
    }

    /// Weights, when every derivable cost is given through its factor.
    pub fn weight_config(&self) -> Option<WeightConfig> {
        let h = &self.human;
        Some(WeightConfig {
            robot_plan_weight: self.robot.plan_weight?,
            human_plan_obs_factor: h.plan_obs_factor?,
            goal_penalty_factor: self.robot.goal_penalty_factor?,
            human: HumanOverrides {
                exec_obs_cost: h.exec_obs_cost,
                partial_exec_obs_cost: h.partial_exec_obs_cost,
                plan_inconvenience: h.plan_inconvenience,
                exec_inconvenience: h.exec_inconvenience,
                violation_cost: h.violation_cost,
            },
        })
    }

    pub fn robustness_source(&self) -> Result<RobustnessSource, ScenarioError> {
        match (&self.robustness, &self.ensemble) {
            (Some(_), Some(_)) => Err(ScenarioError::conflict("robustness", "ensemble")),
            (None, None) => Err(ScenarioError::schema("robustness", "give either `robustness` or `ensemble`")),
            (Some(r), None) => Ok(RobustnessSource::Inline(*r)),
            (None, Some(models)) => Ok(RobustnessSource::Ensemble(ModelEnsemble::new(models.clone())?)),
        }
    }

    fn check_exclusive(&self) -> Result<(), ScenarioError> {
        let r = &self.robot;
        match (r.plan_cost.is_some(), r.planning_time.is_some(), r.plan_weight.is_some()) {
            (true, true, _) => return Err(ScenarioError::conflict("robot.plan_cost", "robot.planning_time")),
            (true, false, true) => return Err(ScenarioError::conflict("robot.plan_cost", "robot.plan_weight")),
            (false, false, _) => return Err(ScenarioError::missing("robot.plan_cost")),
            (false, true, false) => return Err(ScenarioError::missing("robot.plan_weight")),
            _ => {}
        }
        match (r.goal_penalty.is_some(), r.goal_penalty_factor.is_some()) {
            (true, true) => return Err(ScenarioError::conflict("robot.goal_penalty", "robot.goal_penalty_factor")),
            (false, false) => return Err(ScenarioError::missing("robot.goal_penalty")),
            _ => {}
        }
        match (self.human.plan_obs_cost.is_some(), self.human.plan_obs_factor.is_some()) {
            (true, true) => Err(ScenarioError::conflict("human.plan_obs_cost", "human.plan_obs_factor")),
            (false, false) => Err(ScenarioError::missing("human.plan_obs_cost")),
            _ => Ok(()),
        }
    }

    /// Resolves every derived cost and validates the resulting model.
    pub fn resolve(&self) -> Result<LoadedScenario, ScenarioError> {
        self.check_exclusive()?;
        let robustness = self.robustness_source()?;
        let r = robustness.value();

        let cost_model = match (self.raw_stats(), self.weight_config()) {
            (Some(stats), Some(weights)) => derive_cost_model(&stats, &weights, r)?,
            _ => self.resolve_fieldwise(r)?,
        };
        Ok(LoadedScenario { document: self.clone(), robustness, cost_model })
    }

    fn resolve_fieldwise(&self, robustness: f64) -> Result<CostModel, ScenarioError> {
        let r = &self.robot;
        let h = &self.human;
        let plan_cost = match (r.plan_cost, r.planning_time, r.plan_weight) {
            (Some(c), _, _) => c,
            (None, Some(t), Some(w)) => {
                positive("robot.planning_time.safe", t.safe)?;
                positive("robot.planning_time.risky", t.risky)?;
                normalize_planning_times(t, positive("robot.plan_weight", w)?)
            }
            _ => unreachable!("checked by check_exclusive"),
        };
        let goal_penalty = match (r.goal_penalty, r.goal_penalty_factor) {
            (Some(p), _) => p,
            (None, Some(f)) => positive("robot.goal_penalty_factor", f)? * r.exec_cost.risky,
            _ => unreachable!("checked by check_exclusive"),
        };
        let plan_obs_cost = match (h.plan_obs_cost, h.plan_obs_factor) {
            (Some(c), _) => c,
            (None, Some(f)) => {
                let f = positive("human.plan_obs_factor", f)?;
                PerRole::new(f * plan_cost.safe, f * plan_cost.risky)
            }
            _ => unreachable!("checked by check_exclusive"),
        };
        let model = CostModel {
            robot: RobotCosts {
                plan_cost,
                exec_cost: r.exec_cost,
                partial_exec_cost: r.partial_exec_cost,
                goal_penalty,
            },
            human: HumanCosts {
                plan_obs_cost,
                exec_obs_cost: h.exec_obs_cost,
                partial_exec_obs_cost: h.partial_exec_obs_cost,
                plan_inconvenience: h.plan_inconvenience,
                exec_inconvenience: h.exec_inconvenience,
                violation_cost: h.violation_cost,
            },
            robustness,
        };
        model.check()?;
        Ok(model)
    }

    pub fn from_toml_str(text: &str) -> Result<ScenarioDocument, ScenarioError> {
        let table: toml::Table =
            toml::from_str(text).map_err(|e| ScenarioError::schema("", e.message().to_string()))?;
        from_deserializer(toml::Value::Table(table))
    }

    pub fn from_json_str(text: &str) -> Result<ScenarioDocument, ScenarioError> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| ScenarioError::schema("", e.to_string()))?;
        Self::from_json_value(value)
    }

    pub fn from_json_value(value: serde_json::Value) -> Result<ScenarioDocument, ScenarioError> {
        from_deserializer(value)
    }

    /// Parses JSON when the text starts with `{`, TOML otherwise.
    pub fn parse(text: &str) -> Result<ScenarioDocument, ScenarioError> {
        if text.trim_start().starts_with('{') {
            Self::from_json_str(text)
        } else {
            Self::from_toml_str(text)
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario documents always serialize to TOML")
    }
}

fn from_deserializer<'de, D>(de: D) -> Result<ScenarioDocument, ScenarioError>
where
    D: serde::Deserializer<'de>,
    D::Error: std::fmt::Display,
{
    serde_path_to_error::deserialize(de).map_err(|err| {
        let mut path = err.path().to_string();
        if path == "." {
            path.clear();
        }
        let message = err.inner().to_string();
        // serde reports a missing field at its parent; point at the field itself.
        if let Some(field) = message.strip_prefix("missing field `").and_then(|m| m.split('`').next()) {
            path = if path.is_empty() { field.to_string() } else { format!("{path}.{field}") };
        }
        ScenarioError::Schema { path, message }
    })
}

/// Parses (TOML or JSON), resolves and validates a scenario document.
pub fn load_scenario(text: &str) -> Result<LoadedScenario, ScenarioError> {
    ScenarioDocument::parse(text)?.resolve()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{delivery_cost_model, DELIVERY_EXPLICIT_SCENARIO, DELIVERY_SCENARIO};
    use crate::game::Constraint;

    fn model(id: &str, risky: bool, weight: Option<f64>) -> EnsembleModel {
        EnsembleModel { id: id.into(), executable_risky: risky, executable_safe: true, weight }
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn ensemble_robustness() {
        let two = ModelEnsemble::new(vec![model("a", true, None), model("b", false, None)]).unwrap();
        assert_eq!(two.robustness(), 0.5);
        let all = ModelEnsemble::new(vec![model("a", true, None), model("b", true, None)]).unwrap();
        assert_eq!(all.robustness(), 1.0);
        let weighted =
            ModelEnsemble::new(vec![model("a", false, Some(0.25)), model("b", true, Some(0.75))]).unwrap();
        assert_eq!(weighted.robustness(), 0.75);
        let none = ModelEnsemble::new(vec![model("a", false, None)]).unwrap();
        assert_eq!(none.robustness(), 0.0);
    }

    #[test]
    fn ensemble_rejections() {
        assert!(ModelEnsemble::new(vec![]).is_err());
        assert!(ModelEnsemble::new(vec![model("a", true, Some(0.5)), model("b", true, None)]).is_err());
        assert!(ModelEnsemble::new(vec![model("a", true, Some(0.5)), model("b", true, Some(0.6))]).is_err());
        let mut unsafe_model = model("a", true, None);
        unsafe_model.executable_safe = false;
        assert!(ModelEnsemble::new(vec![unsafe_model]).is_err());
    }

    fn delivery_stats() -> (RawPlanStats, WeightConfig) {
        let stats = RawPlanStats {
            planning_time: PerRole::new(0.19, 0.177),
            execution_cost: PerRole::new(14.0, 10.0),
            partial_execution_cost: 3.0,
        };
        let weights = WeightConfig {
            robot_plan_weight: 3.8,
            human_plan_obs_factor: 0.25,
            goal_penalty_factor: 2.0,
            human: HumanOverrides {
                exec_obs_cost: PerRole::new(8.0, 4.0),
                partial_exec_obs_cost: 1.5,
                plan_inconvenience: 0.95,
                exec_inconvenience: 8.0,
                violation_cost: 20.0,
            },
        };
        (stats, weights)
    }

    #[test]
    fn derivation_reproduces_delivery_costs() {
        let (stats, weights) = delivery_stats();
        let m = derive_cost_model(&stats, &weights, 0.5).unwrap();
        assert!(close(m.robot.plan_cost.risky, 3.54) && close(m.robot.plan_cost.safe, 3.8));
        assert!(close(m.human.plan_obs_cost.risky, 0.885) && close(m.human.plan_obs_cost.safe, 0.95));
        assert_eq!(m.robot.goal_penalty, 20.0);
    }

    #[test]
    fn equal_planning_times_give_the_weight() {
        let t = normalize_planning_times(PerRole::new(0.4, 0.4), 2.5);
        assert_eq!(t, PerRole::new(2.5, 2.5));
    }

    #[test]
    fn derivation_rejects_bad_factors_and_costs() {
        let (stats, mut weights) = delivery_stats();
        weights.goal_penalty_factor = 0.0;
        assert!(matches!(derive_cost_model(&stats, &weights, 0.5), Err(ScenarioError::Schema { .. })));
        let (stats, mut weights) = delivery_stats();
        weights.human.violation_cost = 0.5;
        match derive_cost_model(&stats, &weights, 0.5) {
            Err(ScenarioError::Invalid(InvalidCostModel(v))) => {
                assert!(v.iter().any(|v| v.constraint == Constraint::ViolationOverPlanRejection))
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bundled_scenarios_load() {
        let derived = load_scenario(DELIVERY_SCENARIO).unwrap();
        assert!(matches!(derived.robustness, RobustnessSource::Ensemble(_)));
        let explicit = load_scenario(DELIVERY_EXPLICIT_SCENARIO).unwrap();
        assert_eq!(explicit.cost_model, delivery_cost_model());
        let (a, b) = (derived.cost_model, explicit.cost_model);
        assert!(close(a.robot.plan_cost.risky, b.robot.plan_cost.risky));
        assert!(close(a.human.plan_obs_cost.risky, b.human.plan_obs_cost.risky));
        assert_eq!(a.robustness, b.robustness);
    }

    #[test]
    fn fieldwise_matches_full_derivation() {
        let doc = ScenarioDocument::parse(DELIVERY_SCENARIO).unwrap();
        let full = doc.resolve().unwrap().cost_model;
        let fieldwise = doc.resolve_fieldwise(0.5).unwrap();
        assert_eq!(full, fieldwise);
    }

    #[test]
    fn inline_and_ensemble_conflict() {
        let text = format!("robustness = 0.5\n{DELIVERY_SCENARIO}");
        let err = load_scenario(&text).unwrap_err();
        assert!(matches!(err, ScenarioError::Schema { ref path, .. } if path == "robustness"), "{err}");
    }

    #[test]
    fn missing_violation_cost_names_the_field() {
        let text = DELIVERY_EXPLICIT_SCENARIO.replace("violation_cost = 20.0", "");
        let err = load_scenario(&text).unwrap_err();
        assert!(matches!(err, ScenarioError::Schema { ref path, .. } if path == "human.violation_cost"), "{err}");
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = DELIVERY_EXPLICIT_SCENARIO.replace("[human]", "[human]\nmood = 3.0");
        let err = load_scenario(&text).unwrap_err();
        assert!(err.to_string().contains("mood"), "{err}");
    }

    #[test]
    fn exclusive_cost_sources() {
        let both = DELIVERY_EXPLICIT_SCENARIO.replace("goal_penalty = 20.0", "goal_penalty = 20.0\ngoal_penalty_factor = 2.0");
        assert!(matches!(load_scenario(&both), Err(ScenarioError::Schema { ref path, .. }) if path == "robot.goal_penalty"));
        let neither = DELIVERY_EXPLICIT_SCENARIO.replace("plan_obs_cost = { safe = 0.95, risky = 0.885 }", "");
        assert!(matches!(load_scenario(&neither), Err(ScenarioError::Schema { ref path, .. }) if path == "human.plan_obs_cost"));
    }

    #[test]
    fn json_documents() {
        let doc = ScenarioDocument::parse(DELIVERY_EXPLICIT_SCENARIO).unwrap();
        let json = serde_json::to_string(&doc).unwrap();
        let back = ScenarioDocument::parse(&json).unwrap();
        assert_eq!(back, doc);
    }

    #[test]
    fn toml_round_trip_of_bundled_scenario() {
        let doc = ScenarioDocument::parse(DELIVERY_SCENARIO).unwrap();
        assert_eq!(ScenarioDocument::from_toml_str(&doc.to_toml()).unwrap(), doc);
    }

    #[test]
    fn syntax_errors_are_schema_errors() {
        assert!(matches!(load_scenario("robot = ["), Err(ScenarioError::Schema { .. })));
        assert!(matches!(load_scenario("{ not json"), Err(ScenarioError::Schema { .. })));
    }
}
