import init, { analyze_tweet, denoise_signal, compare_models } from "./pkg/sentimarket_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);
const COLORS = ["#1f6feb", "#d1242f", "#1a7f37", "#9a6700", "#8250df", "#57606a"];

function escapeHtml(s) {
  return s.replace(/[&<>"']/g, (c) => ({ "&": "&amp;", "<": "&lt;", ">": "&gt;", '"': "&quot;", "'": "&#39;" })[c]);
}

function showError(el, err) {
  el.innerHTML = `<p class="error">${escapeHtml(String(err))}</p>`;
}

/** Draws each series as a polyline over a shared y-range. */
function plot(canvas, series) {
  const dpr = window.devicePixelRatio || 1;
  const w = canvas.clientWidth, h = canvas.clientHeight;
  canvas.width = w * dpr;
  canvas.height = h * dpr;
  const ctx = canvas.getContext("2d");
  ctx.scale(dpr, dpr);
  ctx.clearRect(0, 0, w, h);
  const all = series.flatMap((s) => s.values.filter((v) => v !== null));
  if (all.length === 0) return;
  let lo = Math.min(...all), hi = Math.max(...all);
  if (hi === lo) { hi += 1; lo -= 1; }
  const n = Math.max(...series.map((s) => s.values.length));
  const pad = 8;
  const x = (i) => pad + (i / Math.max(n - 1, 1)) * (w - 2 * pad);
  const y = (v) => h - pad - ((v - lo) / (hi - lo)) * (h - 2 * pad);
  for (const s of series) {
    ctx.strokeStyle = s.color;
    ctx.lineWidth = s.width || 1.5;
    ctx.beginPath();
    let drawing = false;
    s.values.forEach((v, i) => {
      if (v === null) { drawing = false; return; }
      if (drawing) ctx.lineTo(x(i), y(v)); else ctx.moveTo(x(i), y(v));
      drawing = true;
    });
    ctx.stroke();
  }
}

function legend(el, series) {
  el.innerHTML = series
    .map((s) => `<span><i class="swatch" style="background:${s.color}"></i>${escapeHtml(s.name)}</span>`)
    .join("");
}

function runAnalyze() {
  const out = $("analysis");
  try {
    const a = JSON.parse(analyze_tweet($("tweet").value));
    const cls = a.score > 0 ? "pos" : a.score < 0 ? "neg" : "";
    const words = a.contributions
      .map((c) => `<tr><td>${escapeHtml(c.token)}</td><td>${c.valence.toFixed(3)}</td>` +
        `<td>${c.multiplier === 1 ? "" : "×" + c.multiplier}</td><td>${c.negated ? "negated" : ""}</td>` +
        `<td>${c.value.toFixed(3)}</td></tr>`)
      .join("");
    const kws = a.keywords.map((k) => `${escapeHtml(k.phrase)} <span class="muted">(${k.group})</span>`).join(", ");
    out.innerHTML =
      `<p><b>Cleaned:</b> ${escapeHtml(a.cleaned) || '<span class="muted">(empty)</span>'}</p>` +
      `<p><b>Keywords:</b> ${kws || '<span class="muted">none</span>'} — ` +
      `${a.kept_by_filter ? "kept by the COVID filter" : "dropped by the COVID filter"}</p>` +
      `<p><b>Score:</b> <span class="${cls}">${a.score.toFixed(4)}</span></p>` +
      (words ? `<table><tr><th>word</th><th>valence</th><th>intensity</th><th>negation</th><th>contribution</th></tr>${words}</table>` : "");
  } catch (e) {
    showError(out, e);
  }
}

function runDenoise() {
  const stats = $("dn-stats");
  try {
    const d = JSON.parse(denoise_signal(num("dn-length"), num("dn-noise"), num("dn-levels"), num("dn-seed")));
    const series = [
      { name: "noisy", values: d.noisy, color: "#b7bdc5", width: 1 },
      { name: "clean", values: d.clean, color: COLORS[2], width: 2 },
      { name: "denoised", values: d.denoised, color: COLORS[0], width: 2 },
    ];
    legend($("dn-legend"), series);
    plot($("dn-plot"), series);
    const snr = typeof d.snr_db === "number" ? d.snr_db.toFixed(2) : d.snr_db;
    stats.innerHTML =
      `<p>threshold λ = ${d.threshold.toFixed(4)} · SNR(noisy, denoised) = ${snr} dB · ` +
      `RMSE to clean: noisy ${d.rmse_noisy_vs_clean.toFixed(4)}, denoised ${d.rmse_denoised_vs_clean.toFixed(4)}</p>`;
  } catch (e) {
    showError(stats, e);
  }
}

function runCompare() {
  const table = $("cm-table");
  table.innerHTML = '<p class="muted">Training…</p>';
  // let the status paint before the synchronous backtest runs
  setTimeout(() => {
    try {
      const t0 = performance.now();
      const c = JSON.parse(compare_models(num("cm-coupling"), num("cm-noise"), num("cm-length"), num("cm-seed"), num("cm-epochs")));
      const ms = performance.now() - t0;
      const tail = c.history.slice(-c.truth.length);
      const pad = (v) => tail.map(() => null).concat(v);
      const series = [
        { name: "actual close", values: tail.concat(c.truth), color: "#1d232a", width: 2 },
        ...c.models.map((m, k) => ({ name: m.name, values: pad(m.predicted), color: COLORS[k] })),
      ];
      legend($("cm-legend"), series);
      plot($("cm-plot"), series);
      const rows = c.models
        .map((m) => `<tr><td>${m.name}</td><td>${(100 * m.direction_accuracy).toFixed(1)}%</td>` +
          `<td>${m.f1_up.toFixed(3)}</td><td>${(100 * m.relative_accuracy).toFixed(2)}%</td></tr>`)
        .join("");
      table.innerHTML =
        `<table><tr><th>model</th><th>direction accuracy</th><th>F1 (up)</th><th>1 − mean relative error</th></tr>${rows}</table>` +
        `<p class="muted">${c.truth.length} test days from ${c.dates[0]} to ${c.dates[c.dates.length - 1]}, ${ms.toFixed(0)} ms</p>`;
    } catch (e) {
      showError(table, e);
    }
  }, 20);
}

init().then(() => {
  $("status").textContent = "Ready.";
  $("analyze").addEventListener("click", runAnalyze);
  $("denoise").addEventListener("click", runDenoise);
  $("compare").addEventListener("click", runCompare);
  runAnalyze();
  runDenoise();
}).catch((e) => {
  $("status").className = "error";
  $("status").textContent = `Failed to load the WebAssembly module: ${e}. Build it first (see README).`;
});
