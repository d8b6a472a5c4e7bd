// Explorer state: one current query, the grid exactly as the server returned
// it, navigation history for undo, and playback/map sub-state. At most one
// query is considered "live" at a time: responses carry a sequence number
// and stale ones (superseded by a newer user action) are discarded.

import { ApiClient } from "./api.js";
import {
  canDrillDown,
  canRollUp,
  deepFreezeQuery,
  dice,
  drillDown,
  emptyQuery,
  hierarchiesOf,
  rollUp,
  sliceMember,
  withMeasures,
  addFactFilter,
} from "./olap.js";
import type { Hierarchies } from "./olap.js";
import type {
  CellRef,
  ChartMode,
  CubeQuery,
  DimensionsResponse,
  QueryFilter,
  ResultGrid,
  ScenePlayback,
  SeverityMapResponse,
} from "./types.js";

export type NavigateAction =
  | { kind: "roll_up"; dimension: string }
  | { kind: "drill_down"; dimension: string }
  | { kind: "slice"; dimension: string; level: string; member: string }
  | { kind: "dice"; predicates: QueryFilter[] }
  | { kind: "pivot"; order: string[] }
  | { kind: "measures"; measures: string[] }
  | { kind: "fact_filter"; field: string; op: string; value?: number };

export interface ExplorerState {
  query: CubeQuery;
  grid: ResultGrid | null;
  rawGrid: string | null; // exact response bytes for the displayed grid
  axisOrder: string[] | null; // pivot is a presentation-only permutation
  selectedCell: Record<string, string> | null;
  playback: ScenePlayback | null;
  playbackCodes: string[];
  frameCursor: number;
  chartMode: ChartMode;
  severity: SeverityMapResponse | null;
  error: string | null;
  loading: boolean;
}

type Listener = (state: ExplorerState) => void;

export class ExplorerStore {
  state: ExplorerState = {
    query: emptyQuery(),
    grid: null,
    rawGrid: null,
    axisOrder: null,
    selectedCell: null,
    playback: null,
    playbackCodes: [],
    frameCursor: 0,
    chartMode: "bar",
    severity: null,
    error: null,
    loading: false,
  };

  hierarchies: Hierarchies = {};
  dimensions: DimensionsResponse | null = null;

  private history: CubeQuery[] = [];
  private seq = 0;
  private listeners: Listener[] = [];

  constructor(private readonly api: ApiClient) {}

  subscribe(fn: Listener): () => void {
    this.listeners.push(fn);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== fn);
    };
  }

  private emit(): void {
    for (const fn of this.listeners) fn(this.state);
  }

  private patch(partial: Partial<ExplorerState>): void {
    this.state = { ...this.state, ...partial };
    this.emit();
  }

  async init(): Promise<void> {
    this.dimensions = await this.api.dimensions();
    this.hierarchies = hierarchiesOf(this.dimensions);
    await this.runQuery(this.state.query, { pushHistory: false });
  }

  canRollUp(dimension: string): boolean {
    return canRollUp(this.state.query, dimension);
  }

  canDrillDown(dimension: string): boolean {
    return canDrillDown(this.state.query, dimension, this.hierarchies);
  }

  get canUndo(): boolean {
    return this.history.length > 0;
  }

  /** Apply one OLAP action; invalid moves throw before any request is made. */
  async navigate(action: NavigateAction): Promise<void> {
    if (action.kind === "pivot") {
      this.pivot(action.order);
      return;
    }
    const q = this.state.query;
    let next: CubeQuery;
    switch (action.kind) {
      case "roll_up":
        next = rollUp(q, action.dimension, this.hierarchies);
        break;
      case "drill_down":
        next = drillDown(q, action.dimension, this.hierarchies);
        break;
      case "slice":
        next = sliceMember(q, action.dimension, action.level, action.member);
        break;
      case "dice":
        next = dice(q, action.predicates);
        break;
      case "measures":
        next = withMeasures(q, action.measures);
        break;
      case "fact_filter":
        next = addFactFilter(q, action.field, action.op, action.value);
        break;
    }
    await this.runQuery(next, { pushHistory: true });
  }

  /** Undo returns to the exact prior CubeQuery. */
  async undo(): Promise<void> {
    const prev = this.history.pop();
    if (!prev) return;
    await this.runQuery(prev, { pushHistory: false });
  }

  pivot(order: string[]): void {
    const dims = (this.state.grid?.axes ?? []).map((a) => a.dimension);
    if (order.length !== dims.length || [...order].sort().join() !== [...dims].sort().join()) {
      throw new Error(`pivot order ${order.join(",")} is not a permutation of ${dims.join(",")}`);
    }
    this.patch({ axisOrder: [...order] });
  }

  async runQuery(q: CubeQuery, opts: { pushHistory: boolean }): Promise<void> {
    const mySeq = ++this.seq;
    this.patch({ loading: true });
    try {
      const { parsed, raw } = await this.api.query(q);
      if (mySeq !== this.seq) return; // stale response: a newer action won
      if (opts.pushHistory) this.history.push(deepFreezeQuery(this.state.query));
      this.patch({
        query: deepFreezeQuery(q),
        grid: parsed,
        rawGrid: raw,
        axisOrder: null,
        selectedCell: null,
        error: null,
        loading: false,
      });
    } catch (err) {
      if (mySeq !== this.seq) return;
      // surface the error inline without losing the current grid/query
      this.patch({ error: err instanceof Error ? err.message : String(err), loading: false });
    }
  }

  selectCell(coords: Record<string, string>): void {
    this.patch({ selectedCell: { ...coords } });
  }

  cellRef(coords: Record<string, string>): CellRef {
    const grid = this.state.grid;
    if (!grid) throw new Error("no grid loaded");
    return {
      fingerprint: grid.fingerprint,
      query: grid.query,
      coords: grid.axes.map((a) => [a.dimension, coords[a.dimension]]),
    };
  }

  /** Drill through the selected cell and load the first scene for playback. */
  async openPlayback(coords: Record<string, string>): Promise<void> {
    const codes = await this.api.drillThrough(this.cellRef(coords));
    this.patch({ playbackCodes: codes });
    if (codes.length) await this.loadScene(codes[0]);
  }

  async loadScene(code: string): Promise<void> {
    try {
      const playback = await this.api.scene(code);
      this.patch({ playback, frameCursor: 0, error: null });
    } catch (err) {
      this.patch({ playback: null, error: err instanceof Error ? err.message : String(err) });
    }
  }

  setFrame(i: number): void {
    const n = this.state.playback?.frames.length ?? 0;
    this.patch({ frameCursor: Math.max(0, Math.min(i, Math.max(0, n - 1))) });
  }

  setChartMode(mode: ChartMode): void {
    this.patch({ chartMode: mode });
  }

  async loadSeverity(level: string): Promise<void> {
    const severity = await this.api.severityMap(level);
    this.patch({ severity });
  }

  /** Clicking a map member slices the grid to it. */
  async sliceFromMap(member: string): Promise<void> {
    const level = this.state.severity?.level ?? "district";
    await this.navigate({ kind: "slice", dimension: "location", level, member });
  }
}
