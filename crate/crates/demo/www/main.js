import init, { analyze_rhymes, max_similarity, merge_series } from "./pkg/ghosteval_demo.js";

const $ = (id) => document.getElementById(id);
const fmt = (x) => (x == null ? "NA" : Number(x).toFixed(6));
const COLORS = ["#ffd166", "#06d6a0", "#8ecae6", "#f4a261", "#cdb4db", "#b5e48c", "#ffafcc", "#90e0ef"];

function fail(el, err) {
  el.innerHTML = "";
  const p = document.createElement("span");
  p.className = "error";
  p.textContent = String(err);
  el.appendChild(p);
}

function rhymes() {
  const out = $("rhyme-out");
  const stats = $("rhyme-stats");
  let view;
  try {
    view = JSON.parse(analyze_rhymes($("rhyme-in").value));
  } catch (e) {
    stats.textContent = "";
    return fail(out, e);
  }
  stats.textContent =
    `density ${fmt(view.density)} (${view.rhymed_syllables}/${view.total_syllables} syllables), ` +
    `entropy weight ${fmt(view.entropy_weight)}, weighted ${fmt(view.weighted_density)}`;
  out.innerHTML = "";
  for (const line of view.lines) {
    line.forEach((tok, i) => {
      if (i > 0) out.append(" ");
      const span = document.createElement("span");
      span.textContent = tok.text;
      if (tok.group != null) {
        span.className = "r";
        span.style.background = COLORS[tok.group % COLORS.length];
        span.title = `${tok.rhymed}/${tok.syllables} syllables rhymed`;
      }
      out.appendChild(span);
    });
    out.append("\n");
  }
}

function similarity() {
  const out = $("sim-out");
  try {
    const v = JSON.parse(max_similarity($("sim-train").value, $("sim-cand").value));
    const best = v.best_match == null ? "none" : `training verse ${v.best_match + 1}`;
    out.textContent =
      `max similarity ${fmt(v.value)} (${best})` +
      (v.degenerate ? ", no shared informative tokens" : "") +
      `; per verse: ${v.scores.map(fmt).join(", ")}`;
  } catch (e) {
    fail(out, e);
  }
}

function plot(view) {
  const svg = $("merge-plot");
  const W = svg.width.baseVal.value, H = svg.height.baseVal.value, pad = 30;
  const xs = view.points.map((p) => p[0]).concat([view.intersection_x]);
  const ys = view.points.flatMap((p) => [p[1], p[2]]).concat([view.target_rhyme_density, view.similarity_at_target]);
  const [x0, x1] = [Math.min(...xs), Math.max(...xs)];
  const [y0, y1] = [Math.min(0, ...ys), Math.max(...ys)];
  const sx = (x) => pad + ((x - x0) / (x1 - x0 || 1)) * (W - 2 * pad);
  const sy = (y) => H - pad - ((y - y0) / (y1 - y0 || 1)) * (H - 2 * pad);
  const ns = "http://www.w3.org/2000/svg";
  svg.innerHTML = "";
  const add = (tag, attrs) => {
    const el = document.createElementNS(ns, tag);
    for (const [k, v] of Object.entries(attrs)) el.setAttribute(k, v);
    svg.appendChild(el);
  };
  const line = (l, color) =>
    add("line", { x1: sx(x0), y1: sy(l.slope * x0 + l.intercept), x2: sx(x1), y2: sy(l.slope * x1 + l.intercept), stroke: color });
  line(view.rhyme_line, "#c1121f");
  line(view.similarity_line, "#1d3557");
  add("line", { x1: pad, x2: W - pad, y1: sy(view.target_rhyme_density), y2: sy(view.target_rhyme_density), stroke: "#c1121f", "stroke-dasharray": "4 3" });
  add("line", { x1: sx(view.intersection_x), x2: sx(view.intersection_x), y1: pad, y2: H - pad, stroke: "#888", "stroke-dasharray": "4 3" });
  for (const p of view.points) {
    add("circle", { cx: sx(p[0]), cy: sy(p[1]), r: 3, fill: "#c1121f" });
    add("circle", { cx: sx(p[0]), cy: sy(p[2]), r: 3, fill: "#1d3557" });
  }
  add("circle", { cx: sx(view.intersection_x), cy: sy(view.similarity_at_target), r: 5, fill: "none", stroke: "#000" });
}

function merge() {
  const out = $("merge-out");
  try {
    const v = JSON.parse(merge_series($("merge-in").value, Number($("merge-target").value)));
    out.textContent =
      `rhyme density reaches ${fmt(v.target_rhyme_density)} at x = ${fmt(v.intersection_x)}` +
      (v.extrapolated ? " (outside the observed range)" : "") +
      `; similarity there ${fmt(v.similarity_at_target)}`;
    plot(v);
  } catch (e) {
    $("merge-plot").innerHTML = "";
    fail(out, e);
  }
}

await init();
$("rhyme-go").onclick = rhymes;
$("sim-go").onclick = similarity;
$("merge-go").onclick = merge;
rhymes();
similarity();
merge();
