// Grid rendering: flatten the server's nested measure arrays into a table
// model (one row per cell), honoring a pivot permutation as a pure
// presentation transform. No values are recomputed client-side.

import type { MeasureCells, ResultGrid } from "./types.js";

export interface TableModel {
  columns: string[];
  rows: (string | number | null)[][];
  coords: Record<string, string>[]; // per-row axis coordinates for selection
}

export function cellValue(
  grid: ResultGrid,
  measure: string,
  coords: Record<string, string>,
): number | null {
  let node: MeasureCells = grid.measures[measure];
  for (const axis of grid.axes) {
    const idx = axis.labels.indexOf(coords[axis.dimension]);
    if (idx < 0) throw new Error(`label ${coords[axis.dimension]} not on axis ${axis.dimension}`);
    node = (node as MeasureCells[])[idx];
  }
  return node as number | null;
}

function axisPermutation(grid: ResultGrid, axisOrder: string[] | null): number[] {
  const dims = grid.axes.map((a) => a.dimension);
  if (!axisOrder) return dims.map((_, i) => i);
  return axisOrder.map((d) => {
    const i = dims.indexOf(d);
    if (i < 0) throw new Error(`axis ${d} not in grid`);
    return i;
  });
}

export function gridToTable(grid: ResultGrid, axisOrder: string[] | null = null): TableModel {
  const measures = Object.keys(grid.measures).sort();
  const perm = axisPermutation(grid, axisOrder);
  const axes = perm.map((i) => grid.axes[i]);
  const columns = [...axes.map((a) => `${a.dimension}:${a.level}`), ...measures];

  const rows: (string | number | null)[][] = [];
  const coordsList: Record<string, string>[] = [];
  if (!axes.length) {
    const row: (string | number | null)[] = measures.map(
      (m) => grid.measures[m] as number | null,
    );
    rows.push(row);
    coordsList.push({});
    return { columns, rows, coords: coordsList };
  }

  const sizes = axes.map((a) => a.labels.length);
  const total = sizes.reduce((a, b) => a * b, 1);
  for (let flat = 0; flat < total; flat++) {
    let rest = flat;
    const coords: Record<string, string> = {};
    for (let k = axes.length - 1; k >= 0; k--) {
      coords[axes[k].dimension] = axes[k].labels[rest % sizes[k]];
      rest = Math.floor(rest / sizes[k]);
    }
    const row: (string | number | null)[] = axes.map((a) => coords[a.dimension]);
    for (const m of measures) row.push(cellValue(grid, m, coords));
    rows.push(row);
    coordsList.push(coords);
  }
  return { columns, rows, coords: coordsList };
}

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function formatCell(v: string | number | null): string {
  if (v === null) return "–";
  if (typeof v === "number") return Number.isInteger(v) ? String(v) : v.toFixed(3);
  return v;
}

export function renderTableHtml(model: TableModel, selectedRow: number | null = null): string {
  const head = model.columns.map((c) => `<th>${esc(c)}</th>`).join("");
  const body = model.rows
    .map((row, i) => {
      const cls = i === selectedRow ? ' class="selected"' : "";
      const cells = row.map((v) => `<td>${esc(formatCell(v))}</td>`).join("");
      return `<tr data-row="${i}"${cls}>${cells}</tr>`;
    })
    .join("");
  return `<table class="grid"><thead><tr>${head}</tr></thead><tbody>${body}</tbody></table>`;
}
