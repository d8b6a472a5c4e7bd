// Client-side OLAP query transformations. These only build query JSON; all
// aggregation happens server-side. Level moves type-check against the
// hierarchies delivered by /dimensions.

import { DIMENSIONS } from "./types.js";
import type { CubeQuery, DimensionsResponse, QueryFilter } from "./types.js";

export type Hierarchies = Record<string, string[]>;

export function hierarchiesOf(dims: DimensionsResponse): Hierarchies {
  const out: Hierarchies = {};
  for (const [name, d] of Object.entries(dims.dimensions)) out[name] = d.levels;
  return out;
}

export function emptyQuery(): CubeQuery {
  return {
    group_by: [],
    filters: [],
    measures: ["scene_count"],
    fact_filters: [],
    behavior_families: ["avg_car_speed"],
  };
}

export function levelOf(q: CubeQuery, dimension: string): string | null {
  const hit = q.group_by.find(([d]) => d === dimension);
  return hit ? hit[1] : null;
}

function withLevel(q: CubeQuery, dimension: string, level: string | null): CubeQuery {
  const group_by = q.group_by.filter(([d]) => d !== dimension);
  if (level !== null && level !== "all") group_by.push([dimension, level]);
  group_by.sort(
    (a, b) => DIMENSIONS.indexOf(a[0] as never) - DIMENSIONS.indexOf(b[0] as never),
  );
  return { ...q, group_by };
}

export function canRollUp(q: CubeQuery, dimension: string): boolean {
  return levelOf(q, dimension) !== null;
}

export function canDrillDown(q: CubeQuery, dimension: string, hier: Hierarchies): boolean {
  const levels = hier[dimension];
  if (!levels) return false;
  const current = levelOf(q, dimension) ?? "all";
  return levels.indexOf(current) > 0;
}

export function rollUp(q: CubeQuery, dimension: string, hier: Hierarchies): CubeQuery {
  const levels = hier[dimension];
  const current = levelOf(q, dimension);
  if (!levels || current === null) {
    throw new Error(`${dimension} is already at "all"`);
  }
  const parent = levels[levels.indexOf(current) + 1];
  return withLevel(q, dimension, parent === "all" ? null : parent);
}

export function drillDown(q: CubeQuery, dimension: string, hier: Hierarchies): CubeQuery {
  const levels = hier[dimension];
  if (!levels) throw new Error(`unknown dimension ${dimension}`);
  const current = levelOf(q, dimension) ?? "all";
  const idx = levels.indexOf(current);
  if (idx <= 0) throw new Error(`${dimension} is already at leaf level`);
  return withLevel(q, dimension, levels[idx - 1]);
}

/** Fix one dimension to a member: equality filter plus axis projection. */
export function sliceMember(
  q: CubeQuery,
  dimension: string,
  level: string,
  member: string,
): CubeQuery {
  const filter: QueryFilter = { dimension, level, op: "eq", value: member };
  return withLevel({ ...q, filters: [...q.filters, filter] }, dimension, null);
}

/** Conjunction of predicates over >= 2 dimensions; axes unchanged. */
export function dice(q: CubeQuery, predicates: QueryFilter[]): CubeQuery {
  const dims = new Set(predicates.map((p) => p.dimension));
  if (dims.size < 2) throw new Error("dice needs predicates over >= 2 dimensions; use slice");
  return { ...q, filters: [...q.filters, ...predicates] };
}

export function withMeasures(q: CubeQuery, measures: string[]): CubeQuery {
  if (!measures.length) throw new Error("at least one measure required");
  return { ...q, measures };
}

export function addFactFilter(q: CubeQuery, field: string, op: string, value?: number): CubeQuery {
  return { ...q, fact_filters: [...q.fact_filters, { field, op, ...(value !== undefined ? { value } : {}) }] };
}

export function deepFreezeQuery(q: CubeQuery): CubeQuery {
  return JSON.parse(JSON.stringify(q)) as CubeQuery;
}
