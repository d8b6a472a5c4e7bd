// Chart series and minimal SVG rendering (bar / ratio / box views). Values
// come straight from the grid or from drill-through PSM lists; nothing is
// re-aggregated.

import { cellValue } from "./gridView.js";
import type { ResultGrid } from "./types.js";

export interface BarSeries {
  labels: string[];
  values: (number | null)[];
  measure: string;
}

/** One bar per label of the first axis; additional axes are summed server-
 * side by querying at the wanted grouping, so charts use 1-axis grids. */
export function barSeries(grid: ResultGrid, measure: string): BarSeries {
  if (!grid.axes.length) {
    return { labels: ["all"], values: [grid.measures[measure] as number | null], measure };
  }
  const axis = grid.axes[0];
  const rest = grid.axes.slice(1);
  const values = axis.labels.map((label) => {
    if (!rest.length) return cellValue(grid, measure, { [axis.dimension]: label });
    // collapse remaining axes by taking the total cell count row; charts are
    // normally driven from 1-axis grids, miss-use shows first slice
    return cellValue(grid, measure, {
      [axis.dimension]: label,
      ...Object.fromEntries(rest.map((a) => [a.dimension, a.labels[0]])),
    });
  });
  return { labels: [...axis.labels], values, measure };
}

export function ratioSeries(grid: ResultGrid): BarSeries {
  const base = barSeries(grid, "scene_count");
  const total = base.values.reduce<number>((acc, v) => acc + (v ?? 0), 0);
  return {
    labels: base.labels,
    values: base.values.map((v) => (total > 0 ? (v ?? 0) / total : null)),
    measure: "scene_ratio",
  };
}

export interface BoxStats {
  n: number;
  min: number;
  q1: number;
  median: number;
  q3: number;
  max: number;
}

export function boxStats(values: number[]): BoxStats | null {
  if (!values.length) return null;
  const sorted = [...values].sort((a, b) => a - b);
  const q = (p: number): number => {
    const pos = (sorted.length - 1) * p;
    const lo = Math.floor(pos);
    const hi = Math.ceil(pos);
    return sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo);
  };
  return {
    n: sorted.length,
    min: sorted[0],
    q1: q(0.25),
    median: q(0.5),
    q3: q(0.75),
    max: sorted[sorted.length - 1],
  };
}

const BAR_FILL = "#3b82c4";

export function renderBarSvg(series: BarSeries, width = 560, height = 240): string {
  const pad = { left: 48, right: 8, top: 12, bottom: 64 };
  const innerW = width - pad.left - pad.right;
  const innerH = height - pad.top - pad.bottom;
  const max = Math.max(1e-9, ...series.values.map((v) => v ?? 0));
  const n = Math.max(1, series.labels.length);
  const slot = innerW / n;
  const barW = Math.min(40, slot * 0.7);
  const parts: string[] = [];
  series.labels.forEach((label, i) => {
    const v = series.values[i] ?? 0;
    const h = (v / max) * innerH;
    const x = pad.left + i * slot + (slot - barW) / 2;
    const y = pad.top + innerH - h;
    parts.push(`<rect x="${x.toFixed(1)}" y="${y.toFixed(1)}" width="${barW.toFixed(1)}" height="${h.toFixed(1)}" fill="${BAR_FILL}"><title>${label}: ${v}</title></rect>`);
    parts.push(
      `<text x="${(x + barW / 2).toFixed(1)}" y="${height - pad.bottom + 12}" transform="rotate(35 ${(x + barW / 2).toFixed(1)} ${height - pad.bottom + 12})" class="tick">${label}</text>`,
    );
  });
  parts.push(`<text x="4" y="${pad.top + 10}" class="tick">${max.toPrecision(3)}</text>`);
  parts.push(`<line x1="${pad.left}" y1="${pad.top + innerH}" x2="${width - pad.right}" y2="${pad.top + innerH}" stroke="#666"/>`);
  return `<svg viewBox="0 0 ${width} ${height}" xmlns="http://www.w3.org/2000/svg">${parts.join("")}</svg>`;
}

export function renderBoxSvg(label: string, stats: BoxStats, width = 560, height = 120): string {
  const pad = 50;
  const span = Math.max(1e-9, stats.max - stats.min);
  const sx = (v: number): number => pad + ((v - stats.min) / span) * (width - 2 * pad);
  const cy = height / 2;
  const boxTop = cy - 18;
  const parts = [
    `<line x1="${sx(stats.min)}" y1="${cy}" x2="${sx(stats.q1)}" y2="${cy}" stroke="#444"/>`,
    `<line x1="${sx(stats.q3)}" y1="${cy}" x2="${sx(stats.max)}" y2="${cy}" stroke="#444"/>`,
    `<rect x="${sx(stats.q1)}" y="${boxTop}" width="${sx(stats.q3) - sx(stats.q1)}" height="36" fill="#9ecae9" stroke="#444"/>`,
    `<line x1="${sx(stats.median)}" y1="${boxTop}" x2="${sx(stats.median)}" y2="${boxTop + 36}" stroke="#222" stroke-width="2"/>`,
    `<text x="${pad}" y="16" class="tick">${label} (n=${stats.n})</text>`,
    `<text x="${sx(stats.min)}" y="${cy + 32}" class="tick">${stats.min.toFixed(2)}</text>`,
    `<text x="${sx(stats.max) - 24}" y="${cy + 32}" class="tick">${stats.max.toFixed(2)}</text>`,
  ];
  return `<svg viewBox="0 0 ${width} ${height}" xmlns="http://www.w3.org/2000/svg">${parts.join("")}</svg>`;
}
