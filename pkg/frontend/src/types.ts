// Wire types mirroring the warehouse API. The explorer never re-aggregates:
// grids are rendered exactly as the server returned them.

export interface QueryFilter {
  dimension: string;
  level: string;
  op: string;
  value?: unknown;
  attr?: string;
}

export interface FactFilter {
  field: string;
  op: string;
  value?: number;
}

export interface CubeQuery {
  group_by: [string, string][];
  filters: QueryFilter[];
  measures: string[];
  fact_filters: FactFilter[];
  behavior_families: string[];
}

export interface Axis {
  dimension: string;
  level: string;
  labels: string[];
}

// measures hold nested arrays shaped by the axes; scalars for empty group_by
export type MeasureCells = number | null | MeasureCells[];

export interface ResultGrid {
  axes: Axis[];
  measures: Record<string, MeasureCells>;
  query: CubeQuery;
  fingerprint: string;
}

export interface DimensionMember {
  values: Record<string, string>;
  attrs: Record<string, unknown>;
}

export interface DimensionsResponse {
  dimensions: Record<string, { levels: string[]; members: DimensionMember[] }>;
  fingerprint: string;
}

export interface CellRef {
  fingerprint: string;
  query: CubeQuery;
  coords: [string, string][];
}

export interface SceneFrame {
  t: number;
  level: number;
  level_label: string;
  vehicle_id: string;
  pedestrian_id: string;
  pcra: {
    vehicle: Record<string, number[][]>;
    pedestrian: Record<string, number[][]>;
  };
}

export interface SceneTrack {
  object_id: string;
  object_type: "vehicle" | "pedestrian";
  points: number[][]; // [t, x, y]
}

export interface SceneSite {
  crosswalk: number[][];
  cia: number[][];
  sidewalks: number[][][];
  stop_line: number[][];
  approach_axis: number[];
}

export interface ScenePlayback {
  scene_code: string;
  spot_id: string;
  start_time: string;
  fps: number;
  tracks: SceneTrack[];
  site?: SceneSite;
  frames: SceneFrame[];
  horizons_s: number[];
}

export interface SeverityMember {
  member: string;
  mean_pcr_level: number | null;
  scene_count: number;
}

export interface SeverityMapResponse {
  level: string;
  members: SeverityMember[];
  scale: [number, number];
}

export type ChartMode = "bar" | "ratio" | "box" | "map";

export const DIMENSIONS = ["location", "time", "road", "behavior"] as const;
export type Dimension = (typeof DIMENSIONS)[number];
