import init, { deliveryScenario, randomScenario, analyzeScenario, probe, DemoSession } from "./pkg/trustwatch_web.js";

const $ = (id) => document.getElementById(id);
const canvas = $("chart");
const ctx = canvas.getContext("2d");
const PAD = 40;
const SIZE = canvas.width - 2 * PAD;

let scenario = "";
let analysis = null;
let selected = null;
let session = null;
let history = [];

// chart coordinates: qN to the right, qE upward
const toPx = ([qn, qe]) => [PAD + qn * SIZE, PAD + (1 - qe) * SIZE];
const fromPx = (x, y) => [(x - PAD) / SIZE, 1 - (y - PAD) / SIZE];

function source() { return $("source").value; }
function epsilon() { return Number($("epsilon").value); }

function refresh() {
  try {
    analysis = JSON.parse(analyzeScenario(scenario, source(), epsilon(), 100));
    $("scenario-err").textContent = "";
  } catch (e) {
    $("scenario-err").textContent = String(e);
    return;
  }
  const opt = analysis.bundle.optimum;
  $("optimum").textContent = opt
    ? `Optimum (qP, qE, qN) = (${opt.strategy.observe_plan.toFixed(4)}, ${opt.strategy.observe_execution.toFixed(4)}, ${opt.strategy.no_observe.toFixed(4)}), utility ${opt.human_expected_utility.toFixed(4)}`
    : "No deterring strategy.";
  $("badge").hidden = !analysis.plot.empty;
  draw();
  if (selected) showProbe();
}

function draw() {
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const plot = analysis.plot;

  if (!plot.empty && plot.vertices.length) {
    ctx.fillStyle = "rgba(60, 140, 220, 0.25)";
    ctx.beginPath();
    plot.vertices.forEach((v, i) => { const [x, y] = toPx(v); i ? ctx.lineTo(x, y) : ctx.moveTo(x, y); });
    ctx.closePath();
    ctx.fill();
  }

  // simplex: qN + qE <= 1
  ctx.strokeStyle = "#444";
  ctx.lineWidth = 1;
  ctx.beginPath();
  [[0, 0], [1, 0], [0, 1], [0, 0]].forEach((p, i) => { const [x, y] = toPx(p); i ? ctx.lineTo(x, y) : ctx.moveTo(x, y); });
  ctx.stroke();

  if (plot.line.length > 1) {
    ctx.strokeStyle = "#c33";
    ctx.lineWidth = 2;
    ctx.beginPath();
    plot.line.forEach((p, i) => { const [x, y] = toPx(p); i ? ctx.lineTo(x, y) : ctx.moveTo(x, y); });
    ctx.stroke();
  }

  ctx.fillStyle = "#222";
  ctx.font = "12px system-ui";
  ctx.fillText("qN", PAD + SIZE - 10, PAD + SIZE + 28);
  ctx.fillText("qE", 8, PAD + 4);
  for (const t of [0, 0.5, 1]) {
    const [x] = toPx([t, 0]);
    ctx.fillText(t.toFixed(1), x - 8, PAD + SIZE + 14);
    const [, y] = toPx([0, t]);
    ctx.fillText(t.toFixed(1), PAD - 26, y + 4);
  }

  for (const r of plot.references) dot([r.q_n, r.q_e], "#555", 4, r.label);
  if (plot.optimum) dot(plot.optimum, "#1a7f37", 6, "optimum");
  history.forEach((rec, i) => {
    const q = rec.committed_strategy;
    dot([q.no_observe, q.observe_execution], rec.robot_choice === "safe" ? "#06c" : "#c60", 4, String(i + 1));
  });
  if (selected) dot([selected[2], selected[1]], "#000", 3, "");
}

function dot(p, color, r, label) {
  const [x, y] = toPx(p);
  ctx.fillStyle = color;
  ctx.beginPath();
  ctx.arc(x, y, r, 0, 2 * Math.PI);
  ctx.fill();
  if (label) ctx.fillText(label, x + 7, y - 6);
}

function showProbe() {
  try {
    const p = JSON.parse(probe(scenario, source(), epsilon(), selected));
    $("probe-q").textContent = `(${selected.map((v) => v.toFixed(3)).join(", ")})`;
    $("probe-choice").textContent = p.robot_choice;
    $("probe-value").textContent = p.boundary_value.toFixed(4);
    $("probe-utility").textContent = p.human_safe_utility.toFixed(4);
  } catch (e) {
    $("probe-q").textContent = String(e);
  }
}

canvas.addEventListener("click", (ev) => {
  const rect = canvas.getBoundingClientRect();
  let [qn, qe] = fromPx(ev.clientX - rect.left, ev.clientY - rect.top);
  qn = Math.min(1, Math.max(0, qn));
  qe = Math.min(1, Math.max(0, qe));
  const s = qn + qe;
  if (s > 1) { qn /= s; qe /= s; }
  const qp = Math.max(0, 1 - qn - qe);
  selected = [qp, qe, qn];
  showProbe();
  draw();
});

function startSession() {
  try {
    session = new DemoSession(scenario, Number($("seed").value), Number($("limit").value), false);
    history = [];
    $("trials").innerHTML = "";
    $("trial-err").textContent = "";
    $("run").disabled = false;
    showSummary();
    draw();
  } catch (e) {
    $("trial-err").textContent = String(e);
  }
}

function runTrial() {
  if (!session || !selected) { $("trial-err").textContent = "Click the chart to pick a strategy first."; return; }
  try {
    const rec = JSON.parse(session.trial(selected));
    history.push(rec);
    const q = rec.committed_strategy;
    const row = document.createElement("tr");
    for (const v of [rec.index, q.observe_plan.toFixed(3), q.observe_execution.toFixed(3), q.no_observe.toFixed(3),
      rec.robot_choice, rec.sampled_type, rec.sampled_human_action, rec.human_payoff.toFixed(2), rec.cumulative_human_payoff.toFixed(2)]) {
      const td = document.createElement("td");
      td.textContent = v;
      row.appendChild(td);
    }
    $("trials").appendChild(row);
    $("trial-err").textContent = "";
    if (session.remaining() === 0) $("run").disabled = true;
    showSummary();
    draw();
  } catch (e) {
    $("trial-err").textContent = String(e);
  }
}

function showSummary() {
  const s = JSON.parse(session.summary());
  $("summary").textContent = s.trial_count
    ? `${s.trial_count} trials, mean payoff ${s.mean_human_payoff.toFixed(3)}, variance ${s.variance_human_payoff.toFixed(3)}`
    : "No trials yet.";
}

function loadScenario(text) {
  scenario = text;
  $("scenario").value = text;
  refresh();
}

await init();
$("source").addEventListener("change", refresh);
$("epsilon").addEventListener("input", () => { $("epsilon-out").textContent = epsilon().toFixed(2); refresh(); });
$("apply").addEventListener("click", () => loadScenario($("scenario").value));
$("delivery").addEventListener("click", () => loadScenario(deliveryScenario()));
$("shuffle").addEventListener("click", () => loadScenario(randomScenario((Math.random() * 2 ** 32) >>> 0)));
$("start").addEventListener("click", startSession);
$("run").addEventListener("click", runTrial);
loadScenario(deliveryScenario());
