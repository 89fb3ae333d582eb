//! Browser bindings for the trust-region explorer.
//!
//! Every exported function takes the scenario as TOML or JSON text and
//! returns a JSON string. The `demo` module holds the plain Rust versions so
//! they can be tested without a browser.

use wasm_bindgen::prelude::*;

pub mod demo {
    use serde::Serialize;
    use serde_json::json;

    use trustwatch_core::analysis::{analyze, region_plot, AnalysisOptions};
    use trustwatch_core::equilibrium::{best_response_in, robot_expected_utilities};
    use trustwatch_core::fixtures::DELIVERY_SCENARIO;
    use trustwatch_core::game::{CostModel, MatrixSource, TrustGame};
    use trustwatch_core::random::random_cost_model;
    use trustwatch_core::region::{compute_boundary, human_safe_utility, OptimalMonitoringResult};
    use trustwatch_core::scenario::{load_scenario, HumanSection, RobotSection, ScenarioDocument};
    use trustwatch_core::simulator::{session_summary, Session, SessionConfig, SessionSummary};

    fn to_json<T: Serialize>(value: &T) -> String {
        serde_json::to_string(value).expect("demo output serializes")
    }

    fn game_of(scenario: &str) -> Result<TrustGame, String> {
        let loaded = load_scenario(scenario).map_err(|e| e.to_string())?;
        TrustGame::build(loaded.cost_model).map_err(|e| e.to_string())
    }

    fn options(boundary_source: &str, epsilon: f64) -> Result<AnalysisOptions, String> {
        let boundary_source = boundary_source.parse::<MatrixSource>().map_err(|e| e.to_string())?;
        Ok(AnalysisOptions { boundary_source, epsilon })
    }

    pub fn delivery_scenario() -> String {
        DELIVERY_SCENARIO.to_string()
    }

    /// A scenario with every cost written out.
    pub fn explicit_document(m: &CostModel) -> ScenarioDocument {
        ScenarioDocument {
            robustness: Some(m.robustness),
            robot: RobotSection {
                plan_cost: Some(m.robot.plan_cost),
                planning_time: None,
                plan_weight: None,
                exec_cost: m.robot.exec_cost,
                partial_exec_cost: m.robot.partial_exec_cost,
                goal_penalty: Some(m.robot.goal_penalty),
                goal_penalty_factor: None,
            },
            human: HumanSection {
                plan_obs_cost: Some(m.human.plan_obs_cost),
                plan_obs_factor: None,
                exec_obs_cost: m.human.exec_obs_cost,
                partial_exec_obs_cost: m.human.partial_exec_obs_cost,
                plan_inconvenience: m.human.plan_inconvenience,
                exec_inconvenience: m.human.exec_inconvenience,
                violation_cost: m.human.violation_cost,
            },
            ensemble: None,
        }
    }

    pub fn random_scenario(seed: u32) -> String {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed as u64);
        explicit_document(&random_cost_model(&mut rng)).to_toml()
    }

    /// Analysis bundle plus plot data for the `(qN, qE)` chart.
    pub fn analyze_scenario(scenario: &str, boundary_source: &str, epsilon: f64, resolution: usize) -> Result<String, String> {
        let loaded = load_scenario(scenario).map_err(|e| e.to_string())?;
        let bundle = analyze(&loaded, options(boundary_source, epsilon)?).map_err(|e| e.to_string())?;
        let plot = region_plot(&bundle, resolution);
        Ok(to_json(&json!({ "bundle": bundle, "plot": plot })))
    }

    /// What the robot does against one committed strategy, and what it costs the supervisor.
    pub fn probe(scenario: &str, boundary_source: &str, epsilon: f64, strategy: &[f64]) -> Result<String, String> {
        let game = game_of(scenario)?;
        let opts = options(boundary_source, epsilon)?;
        opts.validate().map_err(|e| e.to_string())?;
        let q = trustwatch_core::region::MonitoringStrategy::from_slice(strategy).map_err(|e| e.to_string())?;
        let matrix = game.matrix(opts.boundary_source);
        let boundary = compute_boundary(&game, opts.boundary_source).with_margin(opts.epsilon);
        Ok(to_json(&json!({
            "strategy": q,
            "robot_choice": best_response_in(&matrix, &q),
            "robot_utilities": robot_expected_utilities(&matrix, &q),
            "boundary_value": boundary.value(&q),
            "inside": boundary.contains(&q, true),
            "human_safe_utility": human_safe_utility(&game.permissive, &q),
        })))
    }

    /// A supervision session that lives in the page.
    pub struct Trials {
        session: Session,
        optimum: Option<OptimalMonitoringResult>,
    }

    impl Trials {
        pub fn new(scenario: &str, seed: u32, trial_limit: u32, merged: bool) -> Result<Trials, String> {
            let game = game_of(scenario)?;
            let optimum = trustwatch_core::analysis::analyze_game(&game, AnalysisOptions::default())
                .map_err(|e| e.to_string())?
                .optimum;
            let mut config = SessionConfig::new(trial_limit);
            config.merged_monitoring = merged;
            let session = Session::new(format!("web-{seed}"), game, seed as u64, config).map_err(|e| e.to_string())?;
            Ok(Trials { session, optimum })
        }

        pub fn trial(&mut self, values: &[f64]) -> Result<String, String> {
            self.session.run_trial(values).map(to_json).map_err(|e| e.to_string())
        }

        pub fn summary(&self) -> String {
            let summary = match self.session.trials() {
                [] => SessionSummary::empty(self.optimum),
                trials => session_summary(trials, self.optimum).expect("nonempty"),
            };
            to_json(&summary)
        }

        pub fn export(&self) -> String {
            to_json(&self.session.export())
        }

        pub fn remaining(&self) -> u32 {
            self.session.config().trial_limit - self.session.trials().len() as u32
        }
    }
}

fn js_err(e: String) -> JsValue {
    JsValue::from_str(&e)
}

#[wasm_bindgen(js_name = deliveryScenario)]
pub fn delivery_scenario() -> String {
    demo::delivery_scenario()
}

#[wasm_bindgen(js_name = randomScenario)]
pub fn random_scenario(seed: u32) -> String {
    demo::random_scenario(seed)
}

#[wasm_bindgen(js_name = analyzeScenario)]
pub fn analyze_scenario(scenario: &str, boundary_source: &str, epsilon: f64, resolution: usize) -> Result<String, JsValue> {
    demo::analyze_scenario(scenario, boundary_source, epsilon, resolution).map_err(js_err)
}

#[wasm_bindgen]
pub fn probe(scenario: &str, boundary_source: &str, epsilon: f64, strategy: Vec<f64>) -> Result<String, JsValue> {
    demo::probe(scenario, boundary_source, epsilon, &strategy).map_err(js_err)
}

#[wasm_bindgen]
pub struct DemoSession(demo::Trials);

#[wasm_bindgen]
impl DemoSession {
    #[wasm_bindgen(constructor)]
    pub fn new(scenario: &str, seed: u32, trial_limit: u32, merged: bool) -> Result<DemoSession, JsValue> {
        demo::Trials::new(scenario, seed, trial_limit, merged).map(DemoSession).map_err(js_err)
    }

    pub fn trial(&mut self, strategy: Vec<f64>) -> Result<String, JsValue> {
        self.0.trial(&strategy).map_err(js_err)
    }

    pub fn summary(&self) -> String {
        self.0.summary()
    }

    pub fn export(&self) -> String {
        self.0.export()
    }

    pub fn remaining(&self) -> u32 {
        self.0.remaining()
    }
}
