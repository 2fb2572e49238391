// Built by: wasm-pack build crates/wasm --target web --out-dir www/pkg
import init, { simulate_planar, beta_matrix, variance_bound_curve } from "./pkg/stit_wasm.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function show(id, text, isError = false) {
  const el = $(id);
  el.textContent = text;
  el.className = isError ? "out err" : "out";
}

function drawRun() {
  const half = num("sim-half");
  let run;
  try {
    run = simulate_planar(num("sim-t"), half, num("sim-seed") >>> 0);
  } catch (e) {
    show("sim-out", String(e.message ?? e), true);
    return;
  }
  const c = $("sim-canvas");
  const g = c.getContext("2d");
  const s = c.width / (2 * half);
  const px = (x) => (x + half) * s;
  const py = (y) => c.height - (y + half) * s;
  g.clearRect(0, 0, c.width, c.height);
  g.strokeStyle = "#222";
  g.lineWidth = 1;
  g.strokeRect(0.5, 0.5, c.width - 1, c.height - 1);
  const seg = run.segments();
  g.beginPath();
  for (let i = 0; i < seg.length; i += 4) {
    g.moveTo(px(seg[i]), py(seg[i + 1]));
    g.lineTo(px(seg[i + 2]), py(seg[i + 3]));
  }
  g.stroke();
  const area = 4 * half * half;
  show("sim-out", `${run.cells()} cells, edge length ${run.edge_length().toFixed(4)}, per unit area ${(run.edge_length() / area).toFixed(4)}`);
  run.free();
}

function computeBeta() {
  const lines = $("beta-table").value.trim().split("\n").filter((l) => l.trim() !== "");
  const rows = lines.map((l) => l.trim().split(/\s+/).map(Number));
  const cols = rows[0]?.length ?? 0;
  if (rows.some((r) => r.length !== cols)) {
    show("beta-out", "rows have different lengths", true);
    return;
  }
  try {
    const b = beta_matrix(new Float64Array(rows.flat()), rows.length);
    show("beta-out", `beta = ${b.toPrecision(12)}`);
  } catch (e) {
    show("beta-out", String(e.message ?? e), true);
  }
}

function plotBound() {
  let ys;
  try {
    ys = variance_bound_curve(num("vb-delta"), num("vb-theta"), num("vb-kappa"), Math.max(1, num("vb-n") >>> 0));
  } catch (e) {
    show("vb-out", String(e.message ?? e), true);
    return;
  }
  const c = $("vb-canvas");
  const g = c.getContext("2d");
  g.clearRect(0, 0, c.width, c.height);
  // log-log axes
  const lx = ys.map((_, i) => Math.log(i + 1));
  const ly = Array.from(ys, Math.log);
  const [x1, y0, y1] = [Math.max(lx[lx.length - 1], 1e-9), Math.min(...ly), Math.max(...ly)];
  const sx = (x) => 10 + (x / x1) * (c.width - 20);
  const sy = (y) => c.height - 10 - ((y - y0) / Math.max(y1 - y0, 1e-9)) * (c.height - 20);
  g.strokeStyle = "#999";
  g.strokeRect(0.5, 0.5, c.width - 1, c.height - 1);
  g.strokeStyle = "#06c";
  g.beginPath();
  lx.forEach((x, i) => (i === 0 ? g.moveTo(sx(x), sy(ly[i])) : g.lineTo(sx(x), sy(ly[i]))));
  g.stroke();
  show("vb-out", `bound(1) = ${ys[0].toPrecision(10)}, bound(${ys.length}) = ${ys[ys.length - 1].toPrecision(10)} (log-log axes)`);
}

await init();
$("sim-run").onclick = drawRun;
$("beta-run").onclick = computeBeta;
$("vb-run").onclick = plotBound;
drawRun();
computeBeta();
plotBound();
