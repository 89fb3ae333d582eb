//! Game-theoretic supervision planning.
//!
//! A human supervisor chooses how often to read a worker robot's plan, watch
//! its execution, or look away; the robot chooses between a safe plan and a
//! cheaper, probably risky one. This crate builds the Bayesian trust game
//! from a cost model, checks its pure equilibria, computes the trust region
//! of monitoring strategies that keep the robot on the safe plan, finds the
//! cheapest such strategy, and simulates repeated supervision trials.

pub mod analysis;
pub mod equilibrium;
pub mod fixtures;
pub mod game;
pub mod random;
pub mod region;
pub mod scenario;
pub mod simulator;

pub use analysis::{analyze, analyze_game, analyze_text, region_plot, AnalysisBundle, AnalysisError, AnalysisOptions, RegionPlot};
pub use equilibrium::{best_response_robot, check_no_trust_condition, nash_report, pure_nash, NashReport, NoTrustCondition, PureProfile};
pub use game::{CostModel, HumanAction, HumanCosts, MatrixSource, PayoffCell, PayoffMatrix, PerRole, PlanRole, RobotCosts, SupervisorType, TrustGame};
pub use region::{compute_boundary, optimal_monitoring, region_vertices, MonitoringStrategy, OptimalMonitoringResult, TrustBoundary, TrustRegion};
pub use scenario::{derive_cost_model, load_scenario, LoadedScenario, ScenarioDocument, ScenarioError};
pub use simulator::{monte_carlo_value, session_summary, Session, SessionConfig, SessionExport, SessionSummary, SimulationError, TrialRecord};
