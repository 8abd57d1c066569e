import init, { squarePulseTable, generatorCurve, transmissionSweep } from "./pkg/actionlab_wasm.js";

const $ = (id) => document.getElementById(id);
const num = (id) => parseFloat($(id).value);

function plot(canvas, xs, series, opts = {}) {
  const ctx = canvas.getContext("2d");
  const w = canvas.width, h = canvas.height, pad = 30;
  ctx.clearRect(0, 0, w, h);
  const all = series.flatMap((s) => s.ys);
  const lo = opts.ymin ?? Math.min(0, ...all);
  const hi = opts.ymax ?? Math.max(...all);
  const x0 = xs[0], x1 = xs[xs.length - 1];
  const px = (x) => pad + ((x - x0) / (x1 - x0 || 1)) * (w - 2 * pad);
  const py = (y) => h - pad - ((y - lo) / (hi - lo || 1)) * (h - 2 * pad);
  ctx.strokeStyle = "#999";
  ctx.beginPath();
  ctx.moveTo(pad, py(0)); ctx.lineTo(w - pad, py(0));
  ctx.moveTo(pad, pad); ctx.lineTo(pad, h - pad);
  ctx.stroke();
  ctx.fillStyle = "#444";
  ctx.font = "11px sans-serif";
  ctx.fillText(hi.toPrecision(3), 2, py(hi) + 4);
  ctx.fillText(lo.toPrecision(3), 2, py(lo));
  for (const s of series) {
    ctx.strokeStyle = s.color;
    ctx.fillStyle = s.color;
    if (opts.bars) {
      const bw = Math.max(2, (w - 2 * pad) / xs.length - 2);
      xs.forEach((x, i) => ctx.fillRect(px(x) - bw / 2, py(s.ys[i]), bw, py(lo) - py(s.ys[i])));
    } else {
      ctx.beginPath();
      xs.forEach((x, i) => (i ? ctx.lineTo(px(x), py(s.ys[i])) : ctx.moveTo(px(x), py(s.ys[i]))));
      ctx.stroke();
    }
  }
}

function guarded(out, fn) {
  try {
    $(out).classList.remove("err");
    fn();
  } catch (e) {
    $(out).classList.add("err");
    $(out).textContent = String(e);
  }
}

function runPulse() {
  guarded("sp-out", () => {
    const r = JSON.parse(squarePulseTable(num("sp-amp"), num("sp-dur"), num("sp-omega"), parseInt($("sp-n").value, 10)));
    const ns = r.probabilities.map((_, i) => i);
    plot($("sp-plot"), ns, [{ ys: r.probabilities, color: "#2a6fb0" }], { bars: true });
    const [re, im] = r.persistence;
    $("sp-out").textContent =
      `|gamma|^2 = ${r.gamma_sq.toFixed(8)}\n` +
      `persistence = ${re.toFixed(8)} ${im < 0 ? "-" : "+"} ${Math.abs(im).toFixed(8)} i` +
      `   (|.| = ${Math.hypot(re, im).toFixed(8)}, phase = ${Math.atan2(im, re).toFixed(8)})\n` +
      `mean quanta = ${r.mean.toFixed(8)}, mass beyond n_max = ${r.tail_mass.toExponential(3)}\n` +
      r.probabilities.map((p, n) => `P(${n}) = ${p.toExponential(6)}`).join("\n");
  });
}

function runGenerator() {
  guarded("gc-out", () => {
    const r = JSON.parse(generatorCurve(num("gc-g"), num("gc-omega"), num("gc-beta"), 401));
    plot($("gc-plot"), r.theta, [
      { ys: r.re, color: "#2a6fb0" },
      { ys: r.im, color: "#c0392b" },
    ], { ymin: -1, ymax: 1 });
    const mid = Math.floor(r.theta.length / 2);
    $("gc-out").textContent =
      `blue: Re, red: Im, theta from 0 to 2 pi\n` +
      `value at theta = pi: ${r.re[mid].toFixed(10)} ${r.im[mid] < 0 ? "-" : "+"} ${Math.abs(r.im[mid]).toExponential(3)} i`;
  });
}

function runTransmission() {
  guarded("tr-out", () => {
    const r = JSON.parse(transmissionSweep($("tr-kind").value, num("tr-s"), num("tr-w"), num("tr-m"), num("tr-lo"), num("tr-hi"), 400));
    plot($("tr-plot"), r.energy, [
      { ys: r.transmission, color: "#2a6fb0" },
      { ys: r.reflection, color: "#c0392b" },
    ], { ymin: 0, ymax: 1 });
    const worst = Math.max(...r.transmission.map((t, i) => Math.abs(t + r.reflection[i] - 1)));
    $("tr-out").textContent =
      `blue: |t|^2, red: |r|^2 against energy\n` +
      `max | |t|^2 + |r|^2 - 1 | over the sweep: ${worst.toExponential(3)}`;
  });
}

await init();
$("status").textContent = "ready";
$("sp-run").addEventListener("click", runPulse);
$("gc-run").addEventListener("click", runGenerator);
$("tr-run").addEventListener("click", runTransmission);
runPulse();
runGenerator();
runTransmission();
