//! Human-readable tables. Payoffs print to two decimals (three when the third
//! is needed), strategies to four.

use std::fmt::Write;

use trustwatch_core::analysis::{AnalysisBundle, RegionPlot};
use trustwatch_core::equilibrium::PureProfile;
use trustwatch_core::game::{HumanAction, PayoffMatrix, PlanRole, SupervisorType};
use trustwatch_core::region::{OptimalMonitoringResult, TrustBoundary, TrustRegion};
use trustwatch_core::simulator::TrialRecord;

fn payoff(v: f64) -> String {
    let two = format!("{v:.2}");
    if (two.parse::<f64>().unwrap_or(v) - v).abs() < 1e-9 {
        two
    } else {
        format!("{v:.3}")
    }
}

fn matrix(out: &mut String, title: &str, m: &PayoffMatrix) {
    let _ = writeln!(out, "{title}");
    let _ = write!(out, "  {:<16}", "");
    for a in HumanAction::ALL {
        let _ = write!(out, "{:<20}", a.to_string());
    }
    out.push('\n');
    for role in PlanRole::ALL {
        let _ = write!(out, "  {:<16}", role.to_string());
        for c in m.row(role) {
            let _ = write!(out, "{:<20}", format!("({}, {})", payoff(c.robot), payoff(c.human)));
        }
        out.push('\n');
    }
    out.push('\n');
}

fn profiles(list: &[PureProfile]) -> String {
    if list.is_empty() {
        return "none".into();
    }
    list.iter().map(|p| format!("({}, {})", p.robot, p.human)).collect::<Vec<_>>().join(", ")
}

fn boundary_line(b: &TrustBoundary) -> String {
    if b.degenerate {
        return "degenerate (robot indifferent everywhere)".into();
    }
    format!("{:.4}*qN + {:.4}*qE + {:.4} < 0", b.a, b.b, b.c)
}

fn region_lines(out: &mut String, region: &TrustRegion) {
    let state = if region.empty {
        " (empty)"
    } else if region.full {
        " (whole simplex)"
    } else {
        ""
    };
    let _ = writeln!(out, "Trust region vertices (qP, qE, qN){state}:");
    for v in &region.vertices {
        let _ = writeln!(out, "  {v}");
    }
}

pub fn analysis(b: &AnalysisBundle) -> String {
    let mut out = format!("trustwatch {}\n\n", env!("CARGO_PKG_VERSION"));
    let r = b.cost_model.robustness;
    let _ = writeln!(out, "Robustness r = {r:.4}\n");
    matrix(&mut out, &format!("Permissive supervisor (p = {:.2}), cells (robot, human)", r), &b.matrices.permissive);
    matrix(
        &mut out,
        &format!("Constraining supervisor (p = {:.2}), cells (robot, human)", SupervisorType::Constraining.probability(r)),
        &b.matrices.constraining,
    );
    matrix(&mut out, "Expected game, cells (robot, human)", &b.matrices.expected);

    let n = &b.nash;
    let _ = writeln!(out, "Pure equilibria");
    let _ = writeln!(out, "  permissive:    {}", profiles(&n.permissive_equilibria));
    let _ = writeln!(out, "  constraining:  {}", profiles(&n.constraining_equilibria));
    let _ = writeln!(out, "  expected game: {}", profiles(&n.expected_game_equilibria));
    let _ = writeln!(out, "  existence probability: {:.4}", n.existence_probability);
    let _ = writeln!(
        out,
        "  no-trust condition: human side {}, robot side {}\n",
        n.no_trust_condition.human_side, n.no_trust_condition.robot_side
    );

    let _ = writeln!(out, "Trust boundary ({}): {}", b.boundary.source, boundary_line(&b.boundary));
    if b.options.epsilon > 0.0 {
        let _ = writeln!(out, "Safety margin: {}", b.options.epsilon);
    }
    region_lines(&mut out, &b.region);
    out.push('\n');
    match &b.optimum {
        Some(o) => optimum_lines(&mut out, o),
        None => out.push_str("No deterring strategy: the trust region is empty.\n"),
    }
    out
}

fn optimum_lines(out: &mut String, o: &OptimalMonitoringResult) {
    let _ = writeln!(out, "Optimal monitoring (qP, qE, qN): {}", o.strategy);
    let _ = writeln!(out, "  human expected utility: {:.4}", o.human_expected_utility);
    let _ = writeln!(out, "  on the boundary: {}", o.binding_vertex);
}

pub fn optimum(b: &TrustBoundary, region: &TrustRegion, o: &OptimalMonitoringResult, epsilon: f64) -> String {
    let mut out = format!("Trust boundary ({}): {}\n", b.source, boundary_line(b));
    if epsilon > 0.0 {
        let _ = writeln!(out, "Safety margin: {epsilon}");
    }
    region_lines(&mut out, region);
    optimum_lines(&mut out, o);
    out
}

pub fn region(p: &RegionPlot) -> String {
    let mut out = format!("Boundary: {}\n", boundary_line(&p.boundary));
    if p.empty {
        out.push_str("Region is empty.\n");
    }
    let _ = writeln!(out, "Boundary samples (qN, qE):");
    for [n, e] in &p.line {
        let _ = writeln!(out, "  {n:.4} {e:.4}");
    }
    let _ = writeln!(out, "Vertices (qN, qE):");
    for [n, e] in &p.vertices {
        let _ = writeln!(out, "  {n:.4} {e:.4}");
    }
    if let Some([n, e]) = p.optimum {
        let _ = writeln!(out, "Optimum (qN, qE): {n:.4} {e:.4}");
    }
    for r in &p.references {
        let _ = writeln!(out, "{} (qN, qE): {:.4} {:.4}", r.label, r.q_n, r.q_e);
    }
    out
}

pub fn trial_line(t: &TrialRecord) -> String {
    format!(
        "trial {:>3}  q={}  robot={}  type={}  action={}  payoff={:.2}  cumulative={:.2}",
        t.index,
        t.committed_strategy,
        t.robot_choice,
        t.sampled_type,
        t.sampled_human_action,
        t.human_payoff,
        t.cumulative_human_payoff
    )
}

pub fn trials(records: &[TrialRecord]) -> String {
    records.iter().map(|t| trial_line(t) + "\n").collect()
}
