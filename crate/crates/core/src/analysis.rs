//! End-to-end analysis of a scenario: matrices, equilibria, trust boundary,
//! region and optimal monitoring, bundled as one serializable document.

use serde::{Deserialize, Serialize};

use crate::equilibrium::{nash_report, NashReport};
use crate::game::{CostModel, MatrixSource, PayoffMatrix, TrustGame};
use crate::region::{compute_boundary, optimal_in_region, region_vertices, OptimalMonitoringResult, TrustBoundary, TrustRegion};
use crate::scenario::{load_scenario, LoadedScenario, ScenarioError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("safety margin must be finite and nonnegative, got {0}")]
    Margin(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AnalysisOptions {
    pub boundary_source: MatrixSource,
    /// Safety margin: the region becomes `a*qN + b*qE + c <= -epsilon`.
    pub epsilon: f64,
}

impl AnalysisOptions {
    pub fn validate(&self) -> Result<(), AnalysisError> {
        if self.epsilon.is_finite() && self.epsilon >= 0.0 {
            Ok(())
        } else {
            Err(AnalysisError::Margin(self.epsilon))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrices {
    pub permissive: PayoffMatrix,
    pub constraining: PayoffMatrix,
    pub expected: PayoffMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisBundle {
    pub cost_model: CostModel,
    pub options: AnalysisOptions,
    pub matrices: Matrices,
    pub nash: NashReport,
    /// Indifference line of the robot, without any safety margin.
    pub boundary: TrustBoundary,
    /// Region after applying the safety margin.
    pub region: TrustRegion,
    /// `None` when no strategy deters the risky plan.
    pub optimum: Option<OptimalMonitoringResult>,
}

pub fn analyze_game(game: &TrustGame, options: AnalysisOptions) -> Result<AnalysisBundle, AnalysisError> {
    options.validate()?;
    let boundary = compute_boundary(game, options.boundary_source);
    let region = region_vertices(&boundary.with_margin(options.epsilon));
    Ok(AnalysisBundle {
        cost_model: game.cost_model,
        options,
        matrices: Matrices { permissive: game.permissive, constraining: game.constraining, expected: game.expected() },
        nash: nash_report(game),
        boundary,
        optimum: optimal_in_region(game, &region).ok(),
        region,
    })
}

pub fn analyze(scenario: &LoadedScenario, options: AnalysisOptions) -> Result<AnalysisBundle, AnalysisError> {
    let game = TrustGame::build(scenario.cost_model).map_err(ScenarioError::from)?;
    analyze_game(&game, options)
}

pub fn analyze_text(text: &str, options: AnalysisOptions) -> Result<AnalysisBundle, AnalysisError> {
    analyze(&load_scenario(text)?, options)
}

/// A labelled point in the `(qN, qE)` plot plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotPoint {
    pub label: String,
    pub q_n: f64,
    pub q_e: f64,
}

/// Plot data for the `(qN, qE)` plane: boundary line samples clipped to the
/// unit square, region polygon, optimum and the two pure reference strategies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionPlot {
    pub boundary: TrustBoundary,
    /// `[qN, qE]` pairs, non-decreasing in `qN`.
    pub line: Vec<[f64; 2]>,
    pub vertices: Vec<[f64; 2]>,
    pub empty: bool,
    pub full: bool,
    pub optimum: Option<[f64; 2]>,
    pub references: Vec<PlotPoint>,
}

/// Segment of `a*qN + b*qE + c = 0` inside `[0,1]^2`, as its two endpoints.
fn clip_line(b: &TrustBoundary) -> Option<([f64; 2], [f64; 2])> {
    if b.b != 0.0 {
        let qe = |qn: f64| -(b.a * qn + b.c) / b.b;
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        if b.a != 0.0 {
            // qN values at which qE hits 0 and 1
            let at0 = -b.c / b.a;
            let at1 = -(b.b + b.c) / b.a;
            lo = lo.max(at0.min(at1));
            hi = hi.min(at0.max(at1));
        } else if !(0.0..=1.0).contains(&qe(0.0)) {
            return None;
        }
        (lo <= hi).then(|| ([lo, qe(lo).clamp(0.0, 1.0)], [hi, qe(hi).clamp(0.0, 1.0)]))
    } else if b.a != 0.0 {
        let qn = -b.c / b.a;
        (0.0..=1.0).contains(&qn).then_some(([qn, 0.0], [qn, 1.0]))
    } else {
        None
    }
}

pub fn region_plot(bundle: &AnalysisBundle, resolution: usize) -> RegionPlot {
    let line = match clip_line(&bundle.region.boundary) {
        Some((p, q)) if resolution > 0 => (0..resolution)
            .map(|i| {
                let t = if resolution == 1 { 0.0 } else { i as f64 / (resolution - 1) as f64 };
                [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]
            })
            .collect(),
        _ => Vec::new(),
    };
    let point = |q: &crate::region::MonitoringStrategy| [q.no_observe, q.observe_execution];
    RegionPlot {
        boundary: bundle.region.boundary,
        line,
        vertices: bundle.region.vertices.iter().map(point).collect(),
        empty: bundle.region.empty,
        full: bundle.region.full,
        optimum: bundle.optimum.as_ref().map(|o| point(&o.strategy)),
        references: vec![
            PlotPoint { label: "Explicable plans".into(), q_n: 0.0, q_e: 0.0 },
            PlotPoint { label: "Legible plans".into(), q_n: 0.0, q_e: 1.0 },
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::DELIVERY_SCENARIO;

    fn bundle(options: AnalysisOptions) -> AnalysisBundle {
        analyze_text(DELIVERY_SCENARIO, options).unwrap()
    }

    #[test]
    fn delivery_bundle() {
        let b = bundle(AnalysisOptions::default());
        let opt = b.optimum.unwrap();
        assert!((opt.strategy.no_observe - 0.574).abs() < 1e-6);
        assert_eq!(b.nash.existence_probability, 0.5);
        assert_eq!(b.region.vertices.len(), 4);
    }

    #[test]
    fn negative_margin_rejected() {
        let err = analyze_text(DELIVERY_SCENARIO, AnalysisOptions { epsilon: -1.0, ..Default::default() });
        assert_eq!(err.unwrap_err(), AnalysisError::Margin(-1.0));
    }

    #[test]
    fn line_endpoints_for_delivery() {
        let plot = region_plot(&bundle(AnalysisOptions::default()), 2);
        assert_eq!(plot.line.len(), 2);
        let [p, q] = [plot.line[0], plot.line[1]];
        assert!((p[0] - 0.574).abs() < 1e-9 && p[1].abs() < 1e-9);
        assert!((q[0] - 0.874).abs() < 1e-9 && (q[1] - 1.0).abs() < 1e-9);
        assert_eq!(plot.references[1].q_e, 1.0);
    }

    #[test]
    fn line_sampling_is_monotone() {
        let plot = region_plot(&bundle(AnalysisOptions::default()), 100);
        assert_eq!(plot.line.len(), 100);
        assert!(plot.line.windows(2).all(|w| w[0][0] <= w[1][0]));
    }

    #[test]
    fn degenerate_plot_lists_corners() {
        let mut game = TrustGame::build(crate::fixtures::delivery_cost_model()).unwrap();
        game.constraining.probably_risky = game.constraining.safe;
        let b = analyze_game(&game, AnalysisOptions::default()).unwrap();
        let plot = region_plot(&b, 10);
        assert!(plot.full && plot.line.is_empty());
        assert_eq!(plot.vertices.len(), 3);
    }

    #[test]
    fn vertical_and_horizontal_lines() {
        let vertical = TrustBoundary::new(2.0, 0.0, -1.0, MatrixSource::Constraining);
        assert_eq!(clip_line(&vertical), Some(([0.5, 0.0], [0.5, 1.0])));
        let horizontal = TrustBoundary::new(0.0, 4.0, -1.0, MatrixSource::Constraining);
        assert_eq!(clip_line(&horizontal), Some(([0.0, 0.25], [1.0, 0.25])));
        let outside = TrustBoundary::new(0.0, 1.0, 2.0, MatrixSource::Constraining);
        assert_eq!(clip_line(&outside), None);
    }
}
