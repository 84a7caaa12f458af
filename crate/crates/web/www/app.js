import init, {
  analyze_trace,
  distribution_curves,
  simulate,
  default_spec,
  sample_trace,
} from "./pkg/apienergy_web.js";

const $ = (id) => document.getElementById(id);

function esc(s) {
  return String(s).replace(/[&<>"]/g, (c) => ({ "&": "&amp;", "<": "&lt;", ">": "&gt;", '"': "&quot;" })[c]);
}

function fmt(x, digits = 4) {
  if (x === null || x === undefined) return "n/a";
  return Number(x).toPrecision(digits);
}

function table(head, rows) {
  const th = head.map((h) => `<th>${esc(h)}</th>`).join("");
  const tr = rows.map((r) => `<tr>${r.map((c) => `<td>${c}</td>`).join("")}</tr>`).join("");
  return `<table><thead><tr>${th}</tr></thead><tbody>${tr}</tbody></table>`;
}

function guard(out, f) {
  try {
    f();
  } catch (e) {
    out.innerHTML = `<p class="error">${esc(e)}</p>`;
  }
}

function runTrace() {
  const out = $("trace-out");
  guard(out, () => {
    const r = JSON.parse(analyze_trace($("trace").value));
    const rows = r.nodes.map((n) => {
      const cls = n.role === "Api" ? "api" : n.role === "Pruned" ? "pruned" : "";
      const name = "&nbsp;&nbsp;".repeat(n.depth) + esc(n.method);
      return [`<span class="${cls}">${name}</span>`, n.role, (n.duration_ns / 1000).toFixed(1), n.uapi];
    });
    const dist = Object.entries(r.api_distribution).map(([k, v]) => `${esc(k)}: ${v}`).join(", ");
    out.innerHTML =
      `<p>Root U<sub>api</sub> = <b>${r.root_uapi}</b>, ${r.api_interactions} API interactions (${dist || "none"})</p>` +
      table(["method", "role", "duration (µs)", "U_api"], rows);
  });
}

function polyline(points, xmax, color) {
  const [w, h, pad] = [640, 280, 30];
  const d = points
    .map(([x, y]) => `${(pad + (x / xmax) * (w - 2 * pad)).toFixed(1)},${(h - pad - y * (h - 2 * pad)).toFixed(1)}`)
    .join(" ");
  return `<polyline fill="none" stroke="${color}" stroke-width="2" points="${d}"/>`;
}

function runCurves() {
  const out = $("curves-out");
  guard(out, () => {
    const k = Number($("k").value);
    const dfText = $("df").value.trim();
    const df = dfText === "" ? Infinity : Number(dfText);
    const qmax = Number($("qmax").value);
    const r = JSON.parse(distribution_curves(k, df, qmax, 121));
    const axes =
      `<line x1="30" y1="250" x2="610" y2="250" stroke="#888"/><line x1="30" y1="30" x2="30" y2="250" stroke="#888"/>` +
      `<text x="610" y="268" text-anchor="end" font-size="11">${qmax}</text><text x="26" y="34" text-anchor="end" font-size="11">1</text>` +
      `<text x="26" y="252" text-anchor="end" font-size="11">0</text>`;
    $("plot").innerHTML =
      axes + polyline(r.ptukey, qmax, "#1f6fb2") + polyline(r.f_upper_tail, qmax, "#c45a00") +
      `<text x="40" y="20" font-size="12" fill="#1f6fb2">P(Q ≤ q), k=${k}</text>` +
      `<text x="240" y="20" font-size="12" fill="#c45a00">P(F ≥ f), df=(${k - 1}, ${dfText || "∞"})</text>`;
    const crit = r.ptukey.find(([, p]) => p >= 0.95);
    out.innerHTML = `<p>q<sub>0.95</sub> ≈ ${crit ? crit[0].toFixed(2) : `> ${qmax}`}</p>`;
  });
}

function runSim() {
  const out = $("sim-out");
  out.textContent = "Running...";
  setTimeout(() => guard(out, () => {
    const t0 = performance.now();
    const r = JSON.parse(simulate($("spec").value, Number($("alpha").value)));
    const ms = (performance.now() - t0).toFixed(0);
    const revs = table(
      ["revision", "mean energy (mJ)", "mean power (mW)", "sum rU_api"],
      r.revisions.map((s) => [esc(s.revision), fmt(s.mean_energy_mj), fmt(s.mean_power_mw), fmt(s.sum_ruapi)]),
    );
    const truth = new Map(r.truth.map((t) => [`${t.revision_a}|${t.revision_b}`, t]));
    const key = (p) => `${p.revision_a}|${p.revision_b}`;
    const metric = (name) => new Map(r.metrics[name].pairs.map((p) => [key(p), p]));
    const [energy, power, ruapi] = ["energy", "power", "ruapi"].map(metric);
    const cell = (p) => (p ? `<span class="${p.significant ? "sig" : ""}">${fmt(p.p_adj, 3)}</span>` : "n/a");
    const pairs = table(
      ["pair", "energy p_adj", "power p_adj", "rU_api p_adj", "API changed", "energy changed"],
      r.truth.map((t) => {
        const k = `${t.revision_a}|${t.revision_b}`;
        return [`${esc(t.revision_a)} vs ${esc(t.revision_b)}`, cell(energy.get(k)), cell(power.get(k)), cell(ruapi.get(k)),
          truth.get(k).api_change ? "yes" : "no", truth.get(k).energy_change ? "yes" : "no"];
      }),
    );
    const anova = Object.entries(r.metrics).map(([name, m]) =>
      m.anova ? `${name}: F = ${fmt(m.anova.f)}, p = ${fmt(m.anova.p, 3)}` : `${name}: ${esc(m.error)}`);
    const proxy = (label, s) =>
      s ? `${label}: accuracy ${fmt(s.accuracy, 3)}, F1 ${fmt(s.f1, 3)}` : `${label}: n/a`;
    out.innerHTML =
      `<p>${r.executions} executions analyzed in ${ms} ms.</p>` + revs +
      `<p>${anova.join("<br>")}</p>` + pairs +
      `<p>Bold p-values are significant. ${proxy("rU_api vs energy", r.proxy_vs_energy)}; ${proxy("rU_api vs power", r.proxy_vs_power)}</p>`;
  }), 10);
}

await init();
$("status").textContent = "Ready.";
$("trace").value = sample_trace();
$("spec").value = default_spec();
$("run-trace").onclick = runTrace;
$("run-curves").onclick = runCurves;
$("run-sim").onclick = runSim;
runTrace();
runCurves();
