//! Trust boundary and trust region over the supervisor's monitoring simplex.
//!
//! For a monitoring strategy `q = (qP, qE, qN)` the robot's utility for the
//! risky plan is linear in `(qN, qE)`. Writing `U_pr(.)` for the risky-row
//! payoffs and `U_s` for the constant safe-row payoff, the robot keeps the
//! safe plan iff
//!
//! ```text
//! a*qN + b*qE + c < 0,   a = U_pr(N) - U_pr(P),  b = U_pr(E) - U_pr(P),  c = U_pr(P) - U_s
//! ```
//!
//! The coefficients are kept in utility units (no rescaling), so a safety
//! margin `eps` is measured in the robot's utility. The feasible region is
//! the closed half-plane cut of the simplex triangle: at most five vertices.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::game::{HumanAction, MatrixSource, PayoffMatrix, PlanRole, TrustGame};

/// Sum-to-one tolerance for strategy components.
pub const SIMPLEX_TOLERANCE: f64 = 1e-12;
/// Tolerance for the closed boundary inequality and vertex merging.
pub const BOUNDARY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StrategyError {
    #[error("strategy component {component} is not finite")]
    NonFinite { component: HumanAction },
    #[error("strategy component {component} is negative ({value})")]
    Negative { component: HumanAction, value: f64 },
    #[error("strategy components sum to {sum}, not 1")]
    NotNormalized { sum: f64 },
    #[error("expected {expected} strategy components, got {got}")]
    Arity { expected: usize, got: usize },
}

/// Mixed strategy over `{ObservePlan, ObserveExecution, NoObserve}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawStrategy")]
pub struct MonitoringStrategy {
    pub observe_plan: f64,
    pub observe_execution: f64,
    pub no_observe: f64,
}

#[derive(Deserialize)]
struct RawStrategy {
    observe_plan: f64,
    observe_execution: f64,
    no_observe: f64,
}

impl TryFrom<RawStrategy> for MonitoringStrategy {
    type Error = StrategyError;

    fn try_from(raw: RawStrategy) -> Result<Self, Self::Error> {
        MonitoringStrategy::new(raw.observe_plan, raw.observe_execution, raw.no_observe)
    }
}

impl MonitoringStrategy {
    pub const OBSERVE_PLAN: MonitoringStrategy = MonitoringStrategy::pure(HumanAction::ObservePlan);
    pub const OBSERVE_EXECUTION: MonitoringStrategy = MonitoringStrategy::pure(HumanAction::ObserveExecution);
    pub const NO_OBSERVE: MonitoringStrategy = MonitoringStrategy::pure(HumanAction::NoObserve);

    pub fn new(observe_plan: f64, observe_execution: f64, no_observe: f64) -> Result<Self, StrategyError> {
        let q = MonitoringStrategy { observe_plan, observe_execution, no_observe };
        for action in HumanAction::ALL {
            let v = q.weight(action);
            if !v.is_finite() {
                return Err(StrategyError::NonFinite { component: action });
            }
            if v < 0.0 {
                return Err(StrategyError::Negative { component: action, value: v });
            }
        }
        let sum = observe_plan + observe_execution + no_observe;
        if (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
            return Err(StrategyError::NotNormalized { sum });
        }
        Ok(q)
    }

    pub const fn pure(action: HumanAction) -> Self {
        let mut w = [0.0; 3];
        w[action as usize] = 1.0;
        MonitoringStrategy { observe_plan: w[0], observe_execution: w[1], no_observe: w[2] }
    }

    /// Builds the strategy from its two free coordinates; `qP = 1 - qE - qN`.
    pub fn from_coords(observe_execution: f64, no_observe: f64) -> Result<Self, StrategyError> {
        let mut plan = 1.0 - observe_execution - no_observe;
        if plan < 0.0 && plan > -SIMPLEX_TOLERANCE {
            plan = 0.0;
        }
        Self::new(plan, observe_execution, no_observe)
    }

    pub fn from_slice(values: &[f64]) -> Result<Self, StrategyError> {
        match *values {
            [p, e, n] => Self::new(p, e, n),
            _ => Err(StrategyError::Arity { expected: 3, got: values.len() }),
        }
    }

    pub fn weight(&self, action: HumanAction) -> f64 {
        match action {
            HumanAction::ObservePlan => self.observe_plan,
            HumanAction::ObserveExecution => self.observe_execution,
            HumanAction::NoObserve => self.no_observe,
        }
    }

    pub fn to_array(&self) -> [f64; 3] {
        [self.observe_plan, self.observe_execution, self.no_observe]
    }

    pub fn distance(&self, other: &MonitoringStrategy) -> f64 {
        self.to_array()
            .iter()
            .zip(other.to_array())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

impl fmt::Display for MonitoringStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:.4}, {:.4}, {:.4})", self.observe_plan, self.observe_execution, self.no_observe)
    }
}

/// `a*qN + b*qE + c`, negative where the robot keeps the safe plan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrustBoundary {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub source: MatrixSource,
    /// Both robot rows coincide for every `q`; the safe tie-break makes the region full.
    pub degenerate: bool,
}

impl TrustBoundary {
    pub fn new(a: f64, b: f64, c: f64, source: MatrixSource) -> Self {
        TrustBoundary { a, b, c, source, degenerate: a == 0.0 && b == 0.0 && c == 0.0 }
    }

    pub fn from_matrix(matrix: &PayoffMatrix, source: MatrixSource) -> Self {
        let risky = |a: HumanAction| matrix.cell(PlanRole::ProbablyRisky, a).robot;
        let safe = matrix.cell(PlanRole::Safe, HumanAction::ObservePlan).robot;
        let plan = risky(HumanAction::ObservePlan);
        Self::new(
            risky(HumanAction::NoObserve) - plan,
            risky(HumanAction::ObserveExecution) - plan,
            plan - safe,
            source,
        )
    }

    pub fn value(&self, q: &MonitoringStrategy) -> f64 {
        self.a * q.no_observe + self.b * q.observe_execution + self.c
    }

    /// Tightens the constraint to `a*qN + b*qE + c <= -margin`.
    pub fn with_margin(&self, margin: f64) -> Self {
        if margin == 0.0 {
            *self
        } else {
            TrustBoundary::new(self.a, self.b, self.c + margin, self.source)
        }
    }

    /// Open (strict) or closed membership; a degenerate boundary contains everything.
    pub fn contains(&self, q: &MonitoringStrategy, closed: bool) -> bool {
        if self.degenerate {
            return true;
        }
        let v = self.value(q);
        if closed {
            v <= BOUNDARY_TOLERANCE
        } else {
            v < 0.0
        }
    }

    /// Rescaled copy with `a` set to `target`, if `a > 0`.
    pub fn scaled_to_a(&self, target: f64) -> Option<Self> {
        (self.a > 0.0).then(|| {
            let k = target / self.a;
            TrustBoundary { a: target, b: self.b * k, c: self.c * k, ..*self }
        })
    }

    /// Whether two boundaries describe the same half-plane (positive proportionality).
    pub fn same_region(&self, other: &TrustBoundary, tol: f64) -> bool {
        let norm = |t: &TrustBoundary| (t.a * t.a + t.b * t.b + t.c * t.c).sqrt();
        let (n1, n2) = (norm(self), norm(other));
        if n1 == 0.0 || n2 == 0.0 {
            return n1 == n2;
        }
        (self.a / n1 - other.a / n2).abs() < tol
            && (self.b / n1 - other.b / n2).abs() < tol
            && (self.c / n1 - other.c / n2).abs() < tol
    }
}

pub fn compute_boundary(game: &TrustGame, source: MatrixSource) -> TrustBoundary {
    TrustBoundary::from_matrix(&game.matrix(source), source)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrustRegion {
    pub boundary: TrustBoundary,
    /// Extreme points of the closed region, counter-clockwise in the `(qN, qE)` plane.
    pub vertices: Vec<MonitoringStrategy>,
    pub empty: bool,
    pub full: bool,
}

impl TrustRegion {
    pub fn contains(&self, q: &MonitoringStrategy, closed: bool) -> bool {
        self.boundary.contains(q, closed)
    }
}

/// Corners of the simplex that satisfy the closed inequality plus the points
/// where the boundary line crosses the simplex edges.
pub fn region_vertices(boundary: &TrustBoundary) -> TrustRegion {
    let corners = [
        MonitoringStrategy::OBSERVE_PLAN,
        MonitoringStrategy::OBSERVE_EXECUTION,
        MonitoringStrategy::NO_OBSERVE,
    ];
    let mut vertices: Vec<MonitoringStrategy> = Vec::with_capacity(5);
    let push = |q: MonitoringStrategy, out: &mut Vec<MonitoringStrategy>| {
        if !out.iter().any(|v| v.distance(&q) <= BOUNDARY_TOLERANCE) {
            out.push(q);
        }
    };

    let values: Vec<f64> = corners
        .iter()
        .map(|q| if boundary.degenerate { 0.0 } else { boundary.value(q) })
        .collect();
    let mut inside = 0;
    for (q, &v) in corners.iter().zip(&values) {
        if v <= BOUNDARY_TOLERANCE {
            push(*q, &mut vertices);
            inside += 1;
        }
    }
    for (i, j) in [(0, 1), (1, 2), (2, 0)] {
        let (vi, vj) = (values[i], values[j]);
        if (vi < 0.0 && vj > 0.0) || (vi > 0.0 && vj < 0.0) {
            let t = vi / (vi - vj);
            let (ci, cj) = (corners[i].to_array(), corners[j].to_array());
            let p: Vec<f64> = (0..3).map(|k| (1.0 - t) * ci[k] + t * cj[k]).collect();
            push(
                MonitoringStrategy { observe_plan: p[0], observe_execution: p[1], no_observe: p[2] },
                &mut vertices,
            );
        }
    }
    sort_counter_clockwise(&mut vertices);

    TrustRegion {
        boundary: *boundary,
        empty: vertices.is_empty(),
        full: inside == corners.len(),
        vertices,
    }
}

fn sort_counter_clockwise(vertices: &mut [MonitoringStrategy]) {
    if vertices.len() < 3 {
        return;
    }
    let n = vertices.len() as f64;
    let cx = vertices.iter().map(|v| v.no_observe).sum::<f64>() / n;
    let cy = vertices.iter().map(|v| v.observe_execution).sum::<f64>() / n;
    let angle = |v: &MonitoringStrategy| (v.observe_execution - cy).atan2(v.no_observe - cx);
    vertices.sort_by(|p, q| angle(p).partial_cmp(&angle(q)).unwrap_or(Ordering::Equal));
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimalMonitoringResult {
    pub strategy: MonitoringStrategy,
    /// Supervisor's expected utility against the safe plan.
    pub human_expected_utility: f64,
    /// The optimum lies on the boundary line rather than strictly inside.
    pub binding_vertex: bool,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RegionError {
    #[error("no deterring strategy: the trust region is empty")]
    EmptyRegion,
}

/// Supervisor's expected utility under the safe row for strategy `q`.
pub fn human_safe_utility(matrix: &PayoffMatrix, q: &MonitoringStrategy) -> f64 {
    HumanAction::ALL
        .iter()
        .map(|&a| q.weight(a) * matrix.cell(PlanRole::Safe, a).human)
        .sum()
}

/// Cheapest monitoring strategy that still keeps the robot on the safe plan.
///
/// The objective is linear, so an optimal vertex exists; vertices are scanned
/// and ties go to larger `qN`, then larger `qE`.
pub fn optimal_monitoring(game: &TrustGame, boundary: &TrustBoundary) -> Result<OptimalMonitoringResult, RegionError> {
    optimal_in_region(game, &region_vertices(boundary))
}

pub fn optimal_in_region(game: &TrustGame, region: &TrustRegion) -> Result<OptimalMonitoringResult, RegionError> {
    let matrix = &game.permissive;
    let better = |cand: &(MonitoringStrategy, f64), best: &(MonitoringStrategy, f64)| {
        let (q, u) = cand;
        let (bq, bu) = best;
        if (u - bu).abs() > SIMPLEX_TOLERANCE {
            return u > bu;
        }
        if (q.no_observe - bq.no_observe).abs() > SIMPLEX_TOLERANCE {
            return q.no_observe > bq.no_observe;
        }
        q.observe_execution > bq.observe_execution + SIMPLEX_TOLERANCE
    };
    let best = region
        .vertices
        .iter()
        .map(|q| (*q, human_safe_utility(matrix, q)))
        .reduce(|best, cand| if better(&cand, &best) { cand } else { best })
        .ok_or(RegionError::EmptyRegion)?;
    let b = &region.boundary;
    let binding = !b.degenerate && !(b.a == 0.0 && b.b == 0.0) && b.value(&best.0).abs() <= BOUNDARY_TOLERANCE;
    Ok(OptimalMonitoringResult { strategy: best.0, human_expected_utility: best.1, binding_vertex: binding })
}
