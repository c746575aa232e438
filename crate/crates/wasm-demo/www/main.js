import init, { integral_curve, verify_case, scan_alpha } from "./pkg/fracineq_wasm.js";

const THEOREMS = ["T1_2", "T1_3", "T1_4", "T1_5", "T2_1", "T2_2", "T2_4", "T2_5", "HH_CLASSICAL", "REMARK_C_VARIANTS"];
const $ = (id) => document.getElementById(id);
const num = (id) => parseFloat($(id).value);

function plot(canvas, series) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  const pad = 40;
  ctx.clearRect(0, 0, w, h);
  const xs = series.flatMap((s) => s.x);
  const ys = series.flatMap((s) => s.y).filter(Number.isFinite);
  if (!xs.length || !ys.length) return;
  let [x0, x1] = [Math.min(...xs), Math.max(...xs)];
  let [y0, y1] = [Math.min(...ys, 0), Math.max(...ys)];
  if (x1 === x0) x1 = x0 + 1;
  if (y1 === y0) y1 = y0 + 1;
  const px = (x) => pad + ((x - x0) / (x1 - x0)) * (w - 2 * pad);
  const py = (y) => h - pad + ((y0 - y) / (y1 - y0)) * (h - 2 * pad);

  ctx.strokeStyle = "#999";
  ctx.fillStyle = "#555";
  ctx.font = "11px sans-serif";
  ctx.beginPath();
  ctx.moveTo(pad, py(0));
  ctx.lineTo(w - pad, py(0));
  ctx.moveTo(pad, pad);
  ctx.lineTo(pad, h - pad);
  ctx.stroke();
  ctx.fillText(x0.toPrecision(3), pad, h - pad + 14);
  ctx.fillText(x1.toPrecision(3), w - pad - 20, h - pad + 14);
  ctx.fillText(y1.toPrecision(3), 2, pad + 4);
  ctx.fillText(y0.toPrecision(3), 2, h - pad);

  series.forEach((s, k) => {
    ctx.strokeStyle = s.color;
    ctx.lineWidth = 2;
    ctx.beginPath();
    let open = false;
    s.x.forEach((x, i) => {
      const y = s.y[i];
      if (!Number.isFinite(y)) { open = false; return; }
      open ? ctx.lineTo(px(x), py(y)) : ctx.moveTo(px(x), py(y));
      open = true;
    });
    ctx.stroke();
    ctx.fillStyle = s.color;
    ctx.fillText(s.label, w - pad - 120, pad + 14 * k);
  });
}

function drawCurve() {
  $("c-alpha-v").textContent = $("c-alpha").value;
  try {
    const r = JSON.parse(integral_curve($("c-f").value, num("c-a"), num("c-x"), num("c-alpha"), 120));
    plot($("c-plot"), [{ x: r.x, y: r.value, color: "#1f5fbf", label: `α = ${$("c-alpha").value}` }]);
    $("c-msg").textContent = `J(x max) = ${r.value[r.value.length - 1]}`;
  } catch (e) {
    $("c-msg").textContent = String(e);
  }
}

function caseArgs() {
  return [$("v-theorem").value, $("v-f").value, num("v-a"), num("v-b"), $("v-eta").value];
}

function runVerify() {
  try {
    const r = JSON.parse(verify_case(...caseArgs(), num("v-alpha")));
    $("v-verdict").innerHTML = `<strong class="${r.status}">${r.status}</strong>: lhs = ${r.lhs}, rhs = ${r.rhs}, margin = ${r.margin}`;
    const hyps = r.hypotheses.map((h) => `${h.statement}: ${h.report ? h.report.status : h.error}`);
    $("v-out").textContent = [...hyps, ...r.warnings.map((w) => "warning: " + w), ...r.notes.map((n) => "note: " + n)].join("\n");
  } catch (e) {
    $("v-verdict").textContent = String(e);
    $("v-out").textContent = "";
  }
}

function runScan() {
  try {
    const r = JSON.parse(scan_alpha(...caseArgs(), $("s-grid").value));
    const ok = r.rows.filter((row) => row.lhs !== null);
    const x = ok.map((row) => row.alpha);
    plot($("s-plot"), [
      { x, y: ok.map((row) => row.lhs), color: "#b3261e", label: "lhs" },
      { x, y: ok.map((row) => row.rhs), color: "#17732b", label: "rhs" },
    ]);
    const counts = {};
    r.rows.forEach((row) => (counts[row.status] = (counts[row.status] || 0) + 1));
    $("s-msg").textContent = Object.entries(counts).map(([k, v]) => `${v} ${k}`).join(", ");
  } catch (e) {
    $("s-msg").textContent = String(e);
  }
}

await init();
$("loading").remove();
for (const t of THEOREMS) $("v-theorem").add(new Option(t, t));
for (const id of ["c-f", "c-a", "c-x", "c-alpha"]) $(id).addEventListener("input", drawCurve);
$("v-run").addEventListener("click", runVerify);
$("s-run").addEventListener("click", runScan);
drawCurve();
runVerify();
