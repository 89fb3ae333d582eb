//! Acceptance criteria for the delivery instance and the property suites.
//! Prints one PASS/FAIL line per criterion and exits nonzero on any failure.

use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use tower::ServiceExt;

use trustwatch_core::equilibrium::{best_response_robot, check_no_trust_condition, nash_report, PureProfile};
use trustwatch_core::fixtures::DELIVERY_SCENARIO;
use trustwatch_core::game::{HumanAction, MatrixSource, PayoffMatrix, PlanRole, SupervisorType, TrustGame};
use trustwatch_core::random::random_cost_model;
use trustwatch_core::region::{compute_boundary, optimal_monitoring, MonitoringStrategy};
use trustwatch_core::scenario::load_scenario;
use trustwatch_core::simulator::{Session, SessionConfig, SessionExport};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn delivery_game() -> Result<TrustGame, String> {
    let loaded = load_scenario(DELIVERY_SCENARIO).map_err(|e| e.to_string())?;
    TrustGame::build(loaded.cost_model).map_err(|e| e.to_string())
}

fn scenario_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/scenarios/delivery.toml")
}

// Reference cells, (robot, human), columns ObservePlan / ObserveExecution / NoObserve.
const SAFE_ROW: [(f64, f64); 3] = [(-17.80, -0.95), (-17.80, -8.0), (-17.80, 0.0)];
const PERMISSIVE_RISKY: [(f64, f64); 3] = [(-13.54, -0.885), (-13.54, -4.0), (-13.54, 0.0)];
const CONSTRAINING_RISKY: [(f64, f64); 3] = [(-23.54, -1.835), (-26.54, -9.5), (-13.54, -20.0)];

fn compare_rows(name: &str, m: &PayoffMatrix, safe: [(f64, f64); 3], risky: [(f64, f64); 3]) -> Result<(), String> {
    for (role, want) in [(PlanRole::Safe, safe), (PlanRole::ProbablyRisky, risky)] {
        for (a, (r, h)) in HumanAction::ALL.iter().zip(want) {
            let c = m.cell(role, *a);
            ensure((c.robot - r).abs() < 1e-9 && (c.human - h).abs() < 1e-9, || {
                format!("{name} ({role}, {a}) = ({}, {}), want ({r}, {h})", c.robot, c.human)
            })?;
        }
    }
    Ok(())
}

fn matrix_reproduction() -> Outcome {
    let game = delivery_game()?;
    compare_rows("permissive", &game.permissive, SAFE_ROW, PERMISSIVE_RISKY)?;
    compare_rows("constraining", &game.constraining, SAFE_ROW, CONSTRAINING_RISKY)?;
    Ok("6 cells per matrix within 1e-9".into())
}

fn boundary_reproduction() -> Outcome {
    let game = delivery_game()?;
    let raw = compute_boundary(&game, MatrixSource::Constraining);
    let b = raw.scaled_to_a(10.0).ok_or_else(|| format!("a = {} is not positive", raw.a))?;
    // independent derivation from the reference constraining cells
    let (p, e, n) = (CONSTRAINING_RISKY[0].0, CONSTRAINING_RISKY[1].0, CONSTRAINING_RISKY[2].0);
    let (oa, ob, oc) = (n - p, e - p, p - SAFE_ROW[0].0);
    let k = 10.0 / oa;
    ensure((ob * k + 3.0).abs() < 1e-9 && (oc * k + 5.74).abs() < 1e-9, || "oracle arithmetic".into())?;
    ensure((b.b + 3.0).abs() < 1e-9 && (b.c + 5.74).abs() < 1e-9, || {
        format!("normalized boundary ({}, {}, {})", b.a, b.b, b.c)
    })?;
    Ok(format!("({:.4}, {:.4}, {:.4})", b.a, b.b, b.c))
}

fn two_type_instance() -> Outcome {
    let game = delivery_game()?;
    let report = nash_report(&game);
    ensure(report.existence_probability == 0.5, || format!("existence {}", report.existence_probability))?;
    let want = vec![PureProfile::new(PlanRole::ProbablyRisky, HumanAction::NoObserve)];
    ensure(report.permissive_equilibria == want, || format!("permissive {:?}", report.permissive_equilibria))?;
    ensure(report.constraining_equilibria.is_empty(), || {
        format!("constraining {:?}", report.constraining_equilibria)
    })?;
    let mut model = game.cost_model;
    let at_half = check_no_trust_condition(&model);
    ensure(!at_half.human_side && !at_half.robot_side, || format!("r=0.5 gives {at_half:?}"))?;
    model.robustness = 1.0;
    let at_one = check_no_trust_condition(&model);
    ensure(at_one.human_side && at_one.robot_side, || format!("r=1 gives {at_one:?}"))?;
    Ok("existence 0.5, permissive {(probably_risky, no_observe)}, constraining none".into())
}

fn optimal_monitoring_criterion() -> Outcome {
    let game = delivery_game()?;
    let res = optimal_monitoring(&game, &compute_boundary(&game, MatrixSource::Constraining)).map_err(|e| e.to_string())?;
    let q = res.strategy;
    ensure(
        (q.observe_plan - 0.426).abs() < 1e-6 && q.observe_execution.abs() < 1e-6 && (q.no_observe - 0.574).abs() < 1e-6,
        || format!("strategy {q}"),
    )?;
    ensure((res.human_expected_utility + 0.4047).abs() < 1e-4, || {
        format!("utility {}", res.human_expected_utility)
    })?;
    ensure(res.binding_vertex, || "optimum not on the boundary".into())?;

    // grid oracle from the reference numbers only
    let start = Instant::now();
    let steps = 1000usize;
    let mut best = f64::NEG_INFINITY;
    for i in 0..=steps {
        for j in 0..=steps - i {
            let (qp, qe) = (i as f64 / steps as f64, j as f64 / steps as f64);
            let qn = 1.0 - qp - qe;
            if 10.0 * qn - 3.0 * qe - 5.74 <= 0.0 {
                best = best.max(SAFE_ROW[0].1 * qp + SAFE_ROW[1].1 * qe);
            }
        }
    }
    let elapsed = start.elapsed();
    ensure(res.human_expected_utility >= best - 1e-9, || format!("grid found {best} above the optimum"))?;
    ensure(res.human_expected_utility - best <= 2e-3, || format!("grid best {best} too far"))?;
    ensure(elapsed < Duration::from_secs(5), || format!("grid took {elapsed:?}"))?;
    Ok(format!("{q}, utility {:.4}, grid gap {:.2e} in {elapsed:.2?}", res.human_expected_utility, res.human_expected_utility - best))
}

fn best_response_agreement() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut checked, mut skipped) = (0u64, 0u64);
    for m in 0..100 {
        let game = TrustGame::build(random_cost_model(&mut rng)).map_err(|e| e.to_string())?;
        let boundary = compute_boundary(&game, MatrixSource::Constraining);
        for _ in 0..10_000 {
            let (u, v): (f64, f64) = (rng.gen(), rng.gen());
            let (lo, hi) = if u < v { (u, v) } else { (v, u) };
            let q = MonitoringStrategy::new(lo, hi - lo, 1.0 - hi).map_err(|e| e.to_string())?;
            if boundary.value(&q).abs() <= 1e-9 {
                skipped += 1;
                continue;
            }
            checked += 1;
            let safe = best_response_robot(&game, &q, MatrixSource::Constraining) == PlanRole::Safe;
            ensure(safe == boundary.contains(&q, true), || format!("model {m}: disagreement at {q}"))?;
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(30), || format!("took {elapsed:?}"))?;
    Ok(format!("{checked} points agree, {skipped} on the line skipped, {elapsed:.2?}"))
}

fn simulator_statistics() -> Outcome {
    let game = delivery_game()?;
    let q = MonitoringStrategy::new(0.3, 0.2, 0.5).map_err(|e| e.to_string())?;
    let n = 100_000u32;
    let run = |seed| -> Result<Session, String> {
        let mut s = Session::new("acceptance", game.clone(), seed, SessionConfig::new(n)).map_err(|e| e.to_string())?;
        for _ in 0..n {
            s.run_trial_strategy(q).map_err(|e| e.to_string())?;
        }
        Ok(s)
    };
    let session = run(17)?;
    let mut counts = [0u32; 3];
    let mut permissive = 0u32;
    for t in session.trials() {
        counts[t.sampled_human_action.column()] += 1;
        permissive += (t.sampled_type == SupervisorType::Permissive) as u32;
    }
    let check = |label: &str, hits: u32, p: f64| {
        let freq = hits as f64 / n as f64;
        let bound = 3.0 * (p * (1.0 - p) / n as f64).sqrt();
        ensure((freq - p).abs() <= bound, || format!("{label}: {freq} vs {p} (bound {bound})"))
    };
    for a in HumanAction::ALL {
        check(&a.to_string(), counts[a.column()], q.weight(a))?;
    }
    check("permissive type", permissive, game.robustness())?;

    let again = run(17)?;
    let (a, b) = (serde_json::to_vec(&session.export()).unwrap(), serde_json::to_vec(&again.export()).unwrap());
    ensure(a == b, || "same seed produced different sessions".into())?;
    let parsed: SessionExport = serde_json::from_slice(&a).map_err(|e| e.to_string())?;
    Session::replay(game.clone(), &parsed).map_err(|e| e.to_string())?;
    Ok(format!("{n} trials within 3 sigma, replay bit-identical"))
}

fn cli_api_parity() -> Outcome {
    let out = Command::new(env!("CARGO_BIN_EXE_trustwatch"))
        .args(["analyze", "--format", "machine", "--scenario"])
        .arg(scenario_path())
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || String::from_utf8_lossy(&out.stderr).into_owned())?;
    let cli: Value = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;

    let rt = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    let api: Value = rt.block_on(async {
        let app = trustwatch_service::router(trustwatch_service::AppState::new(Default::default()));
        let send = |req: Request<Body>| {
            let app = app.clone();
            async move {
                let resp = app.oneshot(req).await.map_err(|e| e.to_string())?;
                let status = resp.status();
                let bytes = resp.into_body().collect().await.map_err(|e| e.to_string())?.to_bytes();
                let v: Value = serde_json::from_slice(&bytes).map_err(|e| e.to_string())?;
                Ok::<_, String>((status, v))
            }
        };
        let text = std::fs::read_to_string(scenario_path()).map_err(|e| e.to_string())?;
        let (status, created) = send(Request::post("/scenarios").body(Body::from(text)).unwrap()).await?;
        ensure(status == StatusCode::CREATED, || format!("upload returned {status}"))?;
        let id = created["scenario_id"].as_str().ok_or("no scenario id")?.to_string();
        let (status, bundle) =
            send(Request::get(format!("/scenarios/{id}/analysis")).body(Body::empty()).unwrap()).await?;
        ensure(status == StatusCode::OK, || format!("analysis returned {status}"))?;
        Ok::<_, String>(bundle)
    })?;

    let fields = cli.as_object().ok_or("cli output is not an object")?;
    for (key, value) in fields {
        ensure(api.get(key) == Some(value), || format!("field `{key}` differs"))?;
    }
    ensure(api.as_object().map(|o| o.len()) == Some(fields.len()), || "field sets differ".into())?;
    Ok(format!("{} top-level fields equal", fields.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("matrix reproduction", matrix_reproduction),
        ("boundary reproduction", boundary_reproduction),
        ("two-type equilibrium instance", two_type_instance),
        ("optimal monitoring", optimal_monitoring_criterion),
        ("best-response/region agreement", best_response_agreement),
        ("simulator statistics", simulator_statistics),
        ("CLI/API parity", cli_api_parity),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
