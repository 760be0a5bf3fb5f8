/** Data Analysis view: summary table, per-metric line charts, span overlays. */

import type { ParsedFrame } from "../csv.js";
import type { FrameSummary, SpansDoc } from "../types.js";

export interface SummaryRow {
  name: string;
  count: number;
  mean: number;
  std: number;
  min: number;
  max: number;
}

export function summaryRows(summary: FrameSummary): SummaryRow[] {
  return Object.keys(summary.metrics)
    .sort()
    .map((name) => ({ name, ...summary.metrics[name] }));
}

const CHART_W = 420;
const CHART_H = 60;

/** Polyline points for one metric, scaled into the chart box. */
export function chartPoints(values: number[], width = CHART_W, height = CHART_H): string {
  if (values.length === 0) return "";
  const lo = Math.min(...values);
  const hi = Math.max(...values);
  const span = hi - lo || 1;
  return values
    .map((v, i) => {
      const x = (i / Math.max(values.length - 1, 1)) * width;
      const y = height - ((v - lo) / span) * height;
      return `${x.toFixed(2)},${y.toFixed(2)}`;
    })
    .join(" ");
}

function formatNumber(x: number): string {
  return Math.abs(x) >= 1000 || (x !== 0 && Math.abs(x) < 0.01)
    ? x.toExponential(2)
    : x.toFixed(3);
}

export function renderSummaryTable(container: HTMLElement, summary: FrameSummary): void {
  const table = container.ownerDocument.createElement("table");
  table.className = "summary-table";
  const head = table.insertRow();
  for (const label of ["metric", "count", "mean", "std", "min", "max"]) {
    const th = container.ownerDocument.createElement("th");
    th.textContent = label;
    head.appendChild(th);
  }
  for (const row of summaryRows(summary)) {
    const tr = table.insertRow();
    tr.insertCell().textContent = row.name;
    tr.insertCell().textContent = String(row.count);
    for (const value of [row.mean, row.std, row.min, row.max]) {
      tr.insertCell().textContent = formatNumber(value);
    }
  }
  container.replaceChildren(table);
}

const SVG_NS = "http://www.w3.org/2000/svg";

export function renderCharts(
  container: HTMLElement,
  frame: ParsedFrame,
  spans: SpansDoc | null,
): void {
  container.replaceChildren();
  const doc = container.ownerDocument;
  const n = frame.timestamps.length;
  for (const name of Object.keys(frame.columns).sort()) {
    const wrapper = doc.createElement("figure");
    wrapper.className = "chart";
    const caption = doc.createElement("figcaption");
    caption.textContent = name;
    const svg = doc.createElementNS(SVG_NS, "svg");
    svg.setAttribute("viewBox", `0 0 ${CHART_W} ${CHART_H}`);
    svg.setAttribute("data-metric", name);

    for (const span of spans?.[name] ?? []) {
      const rect = doc.createElementNS(SVG_NS, "rect");
      const x0 = (span.start_index / Math.max(n - 1, 1)) * CHART_W;
      const x1 = ((span.end_index + 1) / Math.max(n - 1, 1)) * CHART_W;
      rect.setAttribute("x", x0.toFixed(2));
      rect.setAttribute("y", "0");
      rect.setAttribute("width", Math.max(x1 - x0, 2).toFixed(2));
      rect.setAttribute("height", String(CHART_H));
      rect.setAttribute("class", "anomaly-span");
      rect.setAttribute("data-peak", span.peak_score.toFixed(2));
      svg.appendChild(rect);
    }

    const line = doc.createElementNS(SVG_NS, "polyline");
    line.setAttribute("points", chartPoints(frame.columns[name]));
    line.setAttribute("class", "metric-line");
    svg.appendChild(line);

    wrapper.appendChild(caption);
    wrapper.appendChild(svg);
    container.appendChild(wrapper);
  }
}
