import init, { two_state_curve, tunneling, double_slit } from "./pkg/isingq_web.js";

const $ = (id) => document.getElementById(id);

function plot(canvas, series, { ymin, ymax, xs }) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  ctx.clearRect(0, 0, w, h);
  const n = series[0].values.length;
  const x0 = xs ? xs[0] : 0, x1 = xs ? xs[n - 1] : n - 1;
  const px = (i) => ((xs ? xs[i] : i) - x0) / (x1 - x0) * (w - 20) + 10;
  const py = (v) => h - 10 - (v - ymin) / (ymax - ymin) * (h - 20);
  ctx.strokeStyle = "#ccc";
  ctx.beginPath(); ctx.moveTo(10, py(0)); ctx.lineTo(w - 10, py(0)); ctx.stroke();
  for (const s of series) {
    ctx.strokeStyle = s.color;
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    s.values.forEach((v, i) => (i ? ctx.lineTo(px(i), py(v)) : ctx.moveTo(px(i), py(v))));
    ctx.stroke();
  }
}

function twoState() {
  const omega = +$("ts-omega").value, alpha = +$("ts-alpha").value;
  $("ts-omega-v").textContent = omega.toFixed(2);
  $("ts-alpha-v").textContent = alpha.toFixed(2);
  const flat = two_state_curve(omega, alpha, 8, 800);
  const t = [], p = [], s = [];
  for (let i = 0; i < flat.length; i += 3) { t.push(flat[i]); p.push(flat[i + 1]); s.push(flat[i + 2]); }
  plot($("ts-plot"), [{ values: p, color: "#1f77b4" }, { values: s, color: "#ff7f0e" }], { ymin: -1.1, ymax: 1.1, xs: t });
}

function busy(out, fn) {
  out.textContent = "running...";
  setTimeout(() => {
    const t0 = performance.now();
    try { out.textContent = fn() + `  (${((performance.now() - t0) / 1000).toFixed(1)} s)`; }
    catch (e) { out.textContent = "error: " + e.message; }
  }, 20);
}

function runTunneling() {
  busy($("tu-out"), () => {
    const v0 = +$("tu-height").value, width = +$("tu-width").value, k = +$("tu-k").value;
    const r = tunneling(v0, width, k);
    const x = r.x, peak = Math.max(...r.initial);
    const barrier = Array.from(x, (xi) => (xi >= 0 && xi < width && v0 > 0 ? 0.9 * peak : 0));
    plot($("tu-plot"), [
      { values: barrier, color: "#999" },
      { values: r.initial, color: "#1f77b4" },
      { values: r.density, color: "#d62728" },
    ], { ymin: 0, ymax: 1.05 * peak, xs: x });
    return `T = ${r.transmission.toFixed(4)}   R = ${r.reflection.toFixed(4)}   plane-wave T = ${r.analytic.toFixed(4)}   norm drift ${r.norm_drift.toExponential(1)}`;
  });
}

function runDoubleSlit() {
  busy($("ds-out"), () => {
    const r = double_slit($("ds-open").value);
    const { nx, ny } = r, d = r.density, v = r.potential;
    const map = $("ds-map"), ctx = map.getContext("2d");
    const img = ctx.createImageData(nx, ny);
    const max = Math.max(...d);
    for (let ix = 0; ix < nx; ix++) {
      for (let iy = 0; iy < ny; iy++) {
        const s = ix * ny + iy, o = 4 * ((ny - 1 - iy) * nx + ix);
        const a = Math.sqrt(d[s] / max);
        img.data[o] = v[s] > 0 ? 90 : 255 * a;
        img.data[o + 1] = v[s] > 0 ? 90 : 255 * a * a;
        img.data[o + 2] = v[s] > 0 ? 90 : 80 * a;
        img.data[o + 3] = 255;
      }
    }
    const tmp = new OffscreenCanvas(nx, ny);
    tmp.getContext("2d").putImageData(img, 0, 0);
    ctx.imageSmoothingEnabled = false;
    ctx.drawImage(tmp, 0, 0, map.width, map.height);
    const line = $("ds-line"), lc = line.getContext("2d");
    lc.clearRect(0, 0, line.width, line.height);
    const det = r.detection, dmax = Math.max(...det);
    lc.strokeStyle = "#d62728";
    lc.beginPath();
    det.forEach((w, i) => {
      const px = 10 + (w / dmax) * (line.width - 20), py = line.height - (i + 0.5) / det.length * line.height;
      i ? lc.lineTo(px, py) : lc.moveTo(px, py);
    });
    lc.stroke();
    return `fringe contrast ${r.contrast.toFixed(3)}, central maxima ${r.maxima}, norm drift ${r.norm_drift.toExponential(1)}`;
  });
}

await init();
$("ts-omega").addEventListener("input", twoState);
$("ts-alpha").addEventListener("input", twoState);
$("tu-run").addEventListener("click", runTunneling);
$("ds-run").addEventListener("click", runDoubleSlit);
twoState();
