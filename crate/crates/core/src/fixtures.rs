//! The robot delivery scenario and a few reference cost models.

use crate::game::{CostModel, HumanCosts, PerRole, RobotCosts};

/// Delivery scenario derived from raw planning times and weights.
pub const DELIVERY_SCENARIO: &str = include_str!("../scenarios/delivery.toml");

/// Delivery scenario with every cost given explicitly.
pub const DELIVERY_EXPLICIT_SCENARIO: &str = include_str!("../scenarios/delivery-explicit.toml");

pub fn delivery_cost_model() -> CostModel {
    CostModel {
        robot: RobotCosts {
            plan_cost: PerRole::new(3.8, 3.54),
            exec_cost: PerRole::new(14.0, 10.0),
            partial_exec_cost: 3.0,
            goal_penalty: 20.0,
        },
        human: HumanCosts {
            plan_obs_cost: PerRole::new(0.95, 0.885),
            exec_obs_cost: PerRole::new(8.0, 4.0),
            partial_exec_obs_cost: 1.5,
            plan_inconvenience: 0.95,
            exec_inconvenience: 8.0,
            violation_cost: 20.0,
        },
        robustness: 0.5,
    }
}

/// Every cost zero, `r = 1`. Violates the strict orderings; build it with
/// [`crate::game::TrustGame::build_unchecked`].
pub fn zero_cost_model() -> CostModel {
    let zero = PerRole::new(0.0, 0.0);
    CostModel {
        robot: RobotCosts { plan_cost: zero, exec_cost: zero, partial_exec_cost: 0.0, goal_penalty: 0.0 },
        human: HumanCosts {
            plan_obs_cost: zero,
            exec_obs_cost: zero,
            partial_exec_obs_cost: 0.0,
            plan_inconvenience: 0.0,
            exec_inconvenience: 0.0,
            violation_cost: 0.0,
        },
        robustness: 1.0,
    }
}
