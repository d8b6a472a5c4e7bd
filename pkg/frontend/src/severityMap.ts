// Severity choropleth: color administrative members by mean PCR level on
// the fixed 1..4 scale; clicking a member issues a slice on the location
// dimension.

import { pointInPolygon } from "./geometry.js";
import type { RegionShape } from "./mapData.js";
import type { SeverityMapResponse } from "./types.js";

const NO_DATA = "#d7d7d7";

// green -> amber -> red ramp over the numeric risk scale
const RAMP: [number, [number, number, number]][] = [
  [0.0, [46, 139, 87]],
  [0.5, [237, 176, 33]],
  [1.0, [199, 44, 38]],
];

export function colorForLevel(
  mean: number | null,
  scale: [number, number] = [1, 4],
): string {
  if (mean === null || Number.isNaN(mean)) return NO_DATA;
  const [lo, hi] = scale;
  const t = Math.max(0, Math.min(1, (mean - lo) / (hi - lo)));
  for (let i = 1; i < RAMP.length; i++) {
    const [t1, c1] = RAMP[i - 1];
    const [t2, c2] = RAMP[i];
    if (t <= t2) {
      const u = (t - t1) / (t2 - t1);
      const mix = c1.map((a, k) => Math.round(a + (c2[k] - a) * u));
      return `rgb(${mix[0]},${mix[1]},${mix[2]})`;
    }
  }
  const last = RAMP[RAMP.length - 1][1];
  return `rgb(${last[0]},${last[1]},${last[2]})`;
}

export interface ChoroplethRegion {
  name: string;
  polygon: [number, number][];
  color: string;
  mean: number | null;
  count: number;
}

export function buildChoropleth(
  shapes: RegionShape[],
  severity: SeverityMapResponse,
): ChoroplethRegion[] {
  const byName = new Map(severity.members.map((m) => [m.member, m]));
  return shapes.map((shape) => {
    const m = byName.get(shape.name);
    return {
      name: shape.name,
      polygon: shape.polygon,
      color: colorForLevel(m?.mean_pcr_level ?? null, severity.scale),
      mean: m?.mean_pcr_level ?? null,
      count: m?.scene_count ?? 0,
    };
  });
}

export function hitTest(shapes: RegionShape[], x: number, y: number): string | null {
  for (const shape of shapes) {
    if (pointInPolygon(x, y, shape.polygon)) return shape.name;
  }
  return null;
}

export interface LegendStop {
  value: number;
  color: string;
}

export function legendStops(scale: [number, number] = [1, 4], n = 4): LegendStop[] {
  const [lo, hi] = scale;
  const stops: LegendStop[] = [];
  for (let i = 0; i < n; i++) {
    const value = lo + ((hi - lo) * i) / (n - 1);
    stops.push({ value, color: colorForLevel(value, scale) });
  }
  return stops;
}

export function renderChoroplethSvg(
  regions: ChoroplethRegion[],
  scale: [number, number] = [1, 4],
  width = 420,
  height = 240,
): string {
  const parts: string[] = [];
  const xs = regions.flatMap((r) => r.polygon.map((p) => p[0]));
  const ys = regions.flatMap((r) => r.polygon.map((p) => p[1]));
  const maxX = Math.max(1, ...xs);
  const maxY = Math.max(1, ...ys);
  const s = Math.min((width - 20) / maxX, (height - 60) / maxY);
  for (const region of regions) {
    const pts = region.polygon.map(([x, y]) => `${(x * s + 10).toFixed(1)},${(y * s + 10).toFixed(1)}`).join(" ");
    const label = region.mean === null ? "no data" : region.mean.toFixed(2);
    parts.push(
      `<polygon points="${pts}" fill="${region.color}" stroke="#333" data-member="${region.name}"><title>${region.name}: mean PCR ${label} (${region.count} scenes)</title></polygon>`,
    );
  }
  // legend across the bottom, endpoints at the scale bounds
  const stops = legendStops(scale);
  stops.forEach((stop, i) => {
    const x = 12 + i * 64;
    parts.push(`<rect x="${x}" y="${height - 34}" width="18" height="12" fill="${stop.color}"/>`);
    parts.push(`<text x="${x + 22}" y="${height - 24}" class="tick">${stop.value}</text>`);
  });
  return `<svg viewBox="0 0 ${width} ${height}" xmlns="http://www.w3.org/2000/svg">${parts.join("")}</svg>`;
}
