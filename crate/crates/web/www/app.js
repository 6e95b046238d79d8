import init, { error_matrix, compare, cdf } from "./pkg/qpt_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);
const COLORS = { std: "#d95f02", em: "#1b9e77" };

function fail(out, e) {
  out.textContent = String(e);
  out.className = "err";
}

function heat(ctx, m, x0, title) {
  const n = m.length, cell = 40;
  const max = Math.max(...m.flat().map(Math.abs), 1e-12);
  ctx.fillStyle = "#222";
  ctx.fillText(title, x0, 14);
  m.forEach((row, a) => row.forEach((v, b) => {
    const t = Math.abs(v) / max;
    ctx.fillStyle = v >= 0 ? `rgba(217,95,2,${t})` : `rgba(117,112,179,${t})`;
    ctx.fillRect(x0 + b * cell, 24 + a * cell, cell - 2, cell - 2);
    ctx.fillStyle = "#222";
    ctx.fillText(v.toFixed(3), x0 + b * cell + 2, 24 + a * cell + 24);
  }));
}

function runErrorMatrix() {
  const out = $("em-out");
  try {
    const r = JSON.parse(error_matrix(num("em-lambda"), num("em-shots"), num("em-seed")));
    const ctx = $("em-canvas").getContext("2d");
    ctx.clearRect(0, 0, 420, 220);
    ctx.font = "11px sans-serif";
    heat(ctx, r.re, 0, "Re χ̃");
    heat(ctx, r.im, 210, "Im χ̃");
    out.className = "";
    out.textContent = `χ̃_00 = ${r.identity_weight.toFixed(5)}`;
  } catch (e) { fail(out, e); }
}

function bars(canvas, series) {
  const ctx = canvas.getContext("2d");
  const w = canvas.width, h = canvas.height, pad = 40;
  ctx.clearRect(0, 0, w, h);
  const all = Object.values(series).flat().filter((v) => v > 0);
  const lo = Math.floor(Math.log10(Math.min(...all))), hi = Math.ceil(Math.log10(Math.max(...all)));
  const y = (v) => h - pad - (Math.log10(Math.max(v, 10 ** lo)) - lo) / (hi - lo || 1) * (h - 2 * pad);
  const n = series.std.length, bw = (w - 2 * pad) / n / 2.5;
  ctx.font = "11px sans-serif";
  for (let e = lo; e <= hi; e++) { ctx.fillStyle = "#888"; ctx.fillText(`1e${e}`, 2, y(10 ** e) + 4); }
  Object.entries(series).forEach(([name, vals], s) => {
    ctx.fillStyle = COLORS[name];
    vals.forEach((v, k) => {
      const x = pad + k * (w - 2 * pad) / n + s * bw;
      ctx.fillRect(x, y(v), bw, h - pad - y(v));
    });
    ctx.fillText(name, w - pad, 14 + 14 * s);
  });
}

function curves(canvas, named) {
  const ctx = canvas.getContext("2d");
  const w = canvas.width, h = canvas.height, pad = 40;
  ctx.clearRect(0, 0, w, h);
  const qs = Object.values(named).flat();
  const lo = Math.min(...qs), hi = Math.max(...qs);
  const x = (q) => pad + (q - lo) / (hi - lo || 1) * (w - 2 * pad);
  ctx.font = "11px sans-serif";
  ctx.fillStyle = "#888";
  ctx.fillText(lo.toFixed(2), pad, h - 10);
  ctx.fillText(hi.toFixed(2), w - pad - 20, h - 10);
  Object.entries(named).forEach(([name, q], s) => {
    ctx.strokeStyle = ctx.fillStyle = COLORS[name];
    ctx.beginPath();
    ctx.moveTo(x(q[0]), h - pad);
    q.forEach((v, k) => {
      const yPrev = h - pad - k / q.length * (h - 2 * pad);
      const yNext = h - pad - (k + 1) / q.length * (h - 2 * pad);
      ctx.lineTo(x(v), yPrev);
      ctx.lineTo(x(v), yNext);
    });
    ctx.stroke();
    ctx.fillText(name, w - pad, 14 + 14 * s);
  });
}

function runCompare() {
  const out = $("cmp-out"), cdfOut = $("cdf-out");
  try {
    const r = JSON.parse(compare(num("cmp-lambda"), num("cmp-gates"), 10000, num("cmp-seed")));
    bars($("cmp-canvas"), { std: r.std, em: r.em });
    out.className = "";
    out.textContent = `mean infidelity: std ${r.mean_std.toExponential(2)}, em ${r.mean_em.toExponential(2)}`;
    const named = {}, lines = [];
    for (const m of ["std", "em"]) {
      const c = JSON.parse(cdf(JSON.stringify(r[m].map((v) => 1 - v)), 1, 5, 4));
      named[m] = c.q;
      lines.push(`${m}: W1 ${c.w1.toFixed(3)} (normalized ${c.w1_normalized.toFixed(3)})`);
    }
    curves($("cdf-canvas"), named);
    cdfOut.className = "";
    cdfOut.textContent = lines.join("\n");
  } catch (e) { fail(out, e); }
}

await init();
$("status").textContent = "ready";
$("em-run").onclick = runErrorMatrix;
$("cmp-run").onclick = runCompare;
runErrorMatrix();
runCompare();
