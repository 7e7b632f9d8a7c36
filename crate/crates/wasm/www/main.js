import init, { normalize, link, sweep, sample_text } from "./pkg/kblink_wasm.js";

const $ = (id) => document.getElementById(id);
const fmt = (x) => x.toFixed(4);

function esc(s) {
  return s.replace(/[&<>"]/g, (c) => ({ "&": "&amp;", "<": "&lt;", ">": "&gt;", '"': "&quot;" })[c]);
}

function renderNormalize() {
  $("norm-out").textContent = normalize($("norm-in").value);
}

function renderLink() {
  const lambda = Number($("lambda").value);
  const tau = Number($("tau").value);
  $("lambda-v").textContent = lambda.toFixed(2);
  $("tau-v").textContent = tau.toFixed(2);
  const text = $("link-in").value;
  const spans = JSON.parse(link(text, lambda, tau));
  // offsets are in code points
  const chars = Array.from(text);
  let html = "";
  let at = 0;
  for (const s of spans) {
    html += esc(chars.slice(at, s.start).join(""));
    const cls = s.prediction === "NIL" ? "nil" : "";
    html += `<mark class="${cls}" title="${esc(s.prediction)}">${esc(s.surface)}</mark>`;
    at = s.end;
  }
  $("link-view").innerHTML = html + esc(chars.slice(at).join(""));

  let rows = "<tr><th>mention</th><th>prediction</th><th>score</th><th>other candidates (ctx / graph / penalty)</th></tr>";
  for (const s of spans) {
    const others = s.others
      .map((c) => `${esc(c.entity_id)} ${fmt(c.combined)} (${fmt(c.context_score)} / ${fmt(c.graph_score)} / ${c.penalty})`)
      .join("<br>");
    const pred = s.label ? `${esc(s.prediction)} <span class="rtl">${esc(s.label)}</span>` : esc(s.prediction);
    rows += `<tr><td class="rtl">${esc(s.surface)}</td><td>${pred}</td><td>${fmt(s.score)}</td><td>${others}</td></tr>`;
  }
  $("link-table").innerHTML = rows;
}

function renderSweep() {
  const points = JSON.parse(sweep(Number($("lambda").value)));
  const best = Math.max(...points.map((p) => p.f1));
  let rows = "<tr><th>τ</th><th>P</th><th>R</th><th>F1</th><th>NIL</th></tr>";
  for (const p of points) {
    const cls = p.f1 === best ? "best" : "";
    rows += `<tr class="${cls}"><td>${p.tau.toFixed(2)}</td><td>${fmt(p.precision)}</td><td>${fmt(p.recall)}</td><td>${fmt(p.f1)}</td><td>${p.nil}</td></tr>`;
  }
  $("sweep").innerHTML = rows;
}

function guard(f) {
  return () => {
    try {
      f();
      $("status").textContent = "";
    } catch (e) {
      $("status").textContent = String(e.message || e);
    }
  };
}

await init();
$("link-in").value = sample_text();
$("norm-in").addEventListener("input", guard(renderNormalize));
$("link-in").addEventListener("input", guard(renderLink));
$("tau").addEventListener("input", guard(renderLink));
$("lambda").addEventListener("input", guard(() => { renderLink(); renderSweep(); }));
guard(() => { renderNormalize(); renderLink(); renderSweep(); })();
