import init, {
  sampleMarket, summarize, solvePortfolio, efficientFrontier, raceStrategies,
} from "./pkg/portfolio_admm_wasm.js";

const $ = (id) => document.getElementById(id);
const COLORS = { fixed: "#888", rb: "#d62728", bb: "#1f77b4", rbb: "#2ca02c" };
let market = null;

function show(id, text, isError = false) {
  const el = $(id);
  el.textContent = text;
  el.classList.toggle("err", isError);
}

function guarded(outId, fn) {
  return () => {
    try {
      fn();
    } catch (e) {
      show(outId, String(e.message ?? e), true);
    }
  };
}

function targetReturn() {
  const t = Number($("target").value);
  return market.mean_min + t * (market.mean_max - market.mean_min);
}

function refreshTarget() {
  if (market) $("target-value").textContent = targetReturn().toFixed(5);
}

function loadCsv() {
  market = JSON.parse(summarize($("csv").value));
  show("summary", `${market.assets} assets, ${market.periods} periods, means in ` +
    `[${market.mean_min.toFixed(5)}, ${market.mean_max.toFixed(5)}]`);
  refreshTarget();
}

function generate() {
  const cond = $("illcond").checked ? 1e6 : undefined;
  $("csv").value = sampleMarket(+$("assets").value, +$("periods").value, +$("seed").value, cond);
  loadCsv();
}

function frame(canvas) {
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.font = "11px system-ui";
  return ctx;
}

function drawWeights(result) {
  const canvas = $("weights");
  const ctx = frame(canvas);
  const w = result.weights;
  const top = Math.max(...w.map(Math.abs), 1e-12);
  const mid = canvas.height / 2;
  const slot = canvas.width / w.length;
  ctx.strokeStyle = "#999";
  ctx.beginPath(); ctx.moveTo(0, mid); ctx.lineTo(canvas.width, mid); ctx.stroke();
  w.forEach((v, i) => {
    const h = (v / top) * (mid - 18);
    ctx.fillStyle = v < -1e-9 ? "#d62728" : "#1f77b4";
    ctx.fillRect(i * slot + slot * 0.15, mid - Math.max(h, 0), slot * 0.7, Math.abs(h));
    ctx.fillStyle = "#333";
    ctx.fillText(result.names[i], i * slot + slot * 0.15, canvas.height - 4);
  });
}

function solve() {
  const r = JSON.parse(solvePortfolio($("csv").value, targetReturn(), $("strategy").value, undefined, $("adaptive").checked));
  drawWeights(r);
  show("solve-out", `${r.termination} after ${r.iterations} iterations; risk ${r.risk.toExponential(3)}; ` +
    `λ ${r.lambda_initial.toExponential(2)} → ${r.lambda_final.toExponential(2)}; ` +
    `final ρ ${r.rho_final.toExponential(2)}; shorts ${r.short_count}`);
}

function axes(ctx, canvas, pad, xLabel, yLabel) {
  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, 10, canvas.width - pad - 10, canvas.height - pad - 10);
  ctx.fillStyle = "#333";
  ctx.fillText(xLabel, canvas.width / 2, canvas.height - 8);
  ctx.save(); ctx.translate(12, canvas.height / 2); ctx.rotate(-Math.PI / 2);
  ctx.fillText(yLabel, 0, 0); ctx.restore();
}

function frontier() {
  const pts = JSON.parse(efficientFrontier($("csv").value, +$("points").value, $("strategy").value, $("adaptive").checked));
  const canvas = $("frontier-plot");
  const ctx = frame(canvas);
  const pad = 40;
  axes(ctx, canvas, pad, "risk (standard deviation)", "target return");
  const sd = pts.map((p) => Math.sqrt(p.risk));
  const [x0, x1] = [Math.min(...sd), Math.max(...sd)];
  const [y0, y1] = [pts[0].target_return, pts[pts.length - 1].target_return];
  const px = (x) => pad + ((x - x0) / (x1 - x0 || 1)) * (canvas.width - pad - 20);
  const py = (y) => canvas.height - pad - ((y - y0) / (y1 - y0 || 1)) * (canvas.height - pad - 20);
  pts.forEach((p, i) => {
    ctx.fillStyle = p.shorts > 0 ? "#d62728" : "#1f77b4";
    ctx.beginPath(); ctx.arc(px(sd[i]), py(p.target_return), 3.5, 0, 2 * Math.PI); ctx.fill();
  });
  const failed = pts.filter((p) => p.termination !== "converged").length;
  show("frontier-out", `${pts.length} points, ${failed} not converged; red points hold short positions`);
}

function race() {
  const lanes = JSON.parse(raceStrategies($("csv").value, targetReturn()));
  const canvas = $("race-plot");
  const ctx = frame(canvas);
  const pad = 40;
  axes(ctx, canvas, pad, "iteration", "log10 primal residual");
  const longest = Math.max(...lanes.map((l) => l.iterations));
  const logs = lanes.flatMap((l) => l.r_norm.filter((v) => v > 0).map(Math.log10));
  const [lo, hi] = [Math.min(...logs), Math.max(...logs)];
  const px = (k) => pad + (k / Math.max(longest - 1, 1)) * (canvas.width - pad - 20);
  const py = (v) => canvas.height - pad - ((Math.log10(v) - lo) / (hi - lo || 1)) * (canvas.height - pad - 20);
  lanes.forEach((lane, row) => {
    ctx.strokeStyle = COLORS[lane.strategy];
    ctx.beginPath();
    lane.r_norm.forEach((v, k) => {
      if (v <= 0) return;
      k === 0 ? ctx.moveTo(px(k), py(v)) : ctx.lineTo(px(k), py(v));
    });
    ctx.stroke();
    ctx.fillStyle = COLORS[lane.strategy];
    ctx.fillText(`${lane.strategy}: ${lane.iterations} (${lane.termination})`, canvas.width - 200, 24 + 14 * row);
  });
  show("race-out", lanes.map((l) => `${l.strategy.padEnd(5)} ${String(l.iterations).padStart(5)} iterations, ` +
    `final ρ ${l.rho[l.rho.length - 1].toExponential(2)}`).join("\n"));
}

await init();
$("generate").onclick = guarded("summary", generate);
$("csv").onchange = guarded("summary", loadCsv);
$("target").oninput = refreshTarget;
$("solve").onclick = guarded("solve-out", solve);
$("frontier").onclick = guarded("frontier-out", frontier);
$("race").onclick = guarded("race-out", race);
guarded("summary", generate)();
