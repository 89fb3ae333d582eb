//! Random valid cost models, for property tests and the demo's shuffle button.

use rand::Rng;

use crate::game::{CostModel, HumanCosts, PerRole, RobotCosts};

/// Draws a cost model that satisfies every ordering assumption.
pub fn random_cost_model<R: Rng + ?Sized>(rng: &mut R) -> CostModel {
    let plan_safe = rng.gen_range(0.5..5.0);
    let exec_safe = rng.gen_range(1.0..20.0);
    let exec_risky = exec_safe * rng.gen_range(0.1..1.0);
    let robot = RobotCosts {
        plan_cost: PerRole::new(plan_safe, plan_safe * rng.gen_range(0.1..1.0)),
        exec_cost: PerRole::new(exec_safe, exec_risky),
        partial_exec_cost: exec_risky * rng.gen_range(0.0..1.0),
        goal_penalty: rng.gen_range(0.0..40.0),
    };

    let plan_obs_risky: f64 = rng.gen_range(0.1..2.0);
    let partial_obs = plan_obs_risky + rng.gen_range(0.05..4.0);
    let plan_inc = rng.gen_range(0.0..2.0);
    let exec_inc = plan_inc + rng.gen_range(0.1..5.0);
    let floor = (plan_obs_risky + plan_inc).max(partial_obs + exec_inc);
    let human = HumanCosts {
        plan_obs_cost: PerRole::new(rng.gen_range(0.1..2.0), plan_obs_risky),
        exec_obs_cost: PerRole::new(rng.gen_range(0.1..10.0), plan_obs_risky + rng.gen_range(0.1..8.0)),
        partial_exec_obs_cost: partial_obs,
        plan_inconvenience: plan_inc,
        exec_inconvenience: exec_inc,
        violation_cost: floor + rng.gen_range(0.1..20.0),
    };

    CostModel { robot, human, robustness: 1.0 - rng.gen_range(0.0..1.0) }
}
