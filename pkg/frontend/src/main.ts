// DOM bootstrap: wires the store to the toolbar, grid table, charts,
// severity map, and the playback canvas. All state transitions go through
// ExplorerStore; this module only renders.

import { ApiClient } from "./api.js";
import { barSeries, boxStats, ratioSeries, renderBarSvg, renderBoxSvg } from "./charts.js";
import { gridToTable, renderTableHtml } from "./gridView.js";
import { shapesForLevel } from "./mapData.js";
import { PlaybackController, computeView, drawFrame } from "./playback.js";
import { buildChoropleth, hitTest, renderChoroplethSvg } from "./severityMap.js";
import { ExplorerStore } from "./state.js";
import { DIMENSIONS } from "./types.js";
import type { ExplorerState } from "./state.js";

const api = new ApiClient("");
const store = new ExplorerStore(api);

const $ = <T extends HTMLElement>(sel: string): T => {
  const el = document.querySelector<T>(sel);
  if (!el) throw new Error(`missing element ${sel}`);
  return el;
};

let controller: PlaybackController | null = null;
let rafHandle = 0;
let lastTs = 0;

function renderToolbar(state: ExplorerState): void {
  const bar = $("#dims");
  bar.innerHTML = "";
  for (const dim of DIMENSIONS) {
    const level = state.query.group_by.find(([d]) => d === dim)?.[1] ?? "all";
    const box = document.createElement("div");
    box.className = "dim";
    const up = document.createElement("button");
    up.textContent = "▲";
    up.title = `roll up ${dim}`;
    up.disabled = !store.canRollUp(dim);
    up.onclick = () => void store.navigate({ kind: "roll_up", dimension: dim }).catch(showError);
    const down = document.createElement("button");
    down.textContent = "▼";
    down.title = `drill down ${dim}`;
    down.disabled = !store.canDrillDown(dim);
    down.onclick = () =>
      void store.navigate({ kind: "drill_down", dimension: dim }).catch(showError);
    const label = document.createElement("span");
    label.textContent = `${dim} @ ${level}`;
    box.append(label, up, down);
    bar.append(box);
  }
  ($("#undo") as HTMLButtonElement).disabled = !store.canUndo;
}

function renderGrid(state: ExplorerState): void {
  const host = $("#grid");
  if (!state.grid) {
    host.innerHTML = "<p class='muted'>no grid</p>";
    return;
  }
  const model = gridToTable(state.grid, state.axisOrder);
  host.innerHTML = renderTableHtml(model);
  host.querySelectorAll("tr[data-row]").forEach((tr) => {
    tr.addEventListener("click", () => {
      const i = Number((tr as HTMLElement).dataset.row);
      const coords = model.coords[i];
      store.selectCell(coords);
      void store.openPlayback(coords).catch(showError);
    });
  });
}

function renderChart(state: ExplorerState): void {
  const host = $("#chart");
  if (!state.grid || state.chartMode === "map") {
    host.innerHTML = "";
    return;
  }
  if (state.chartMode === "bar") {
    host.innerHTML = renderBarSvg(barSeries(state.grid, "scene_count"));
  } else if (state.chartMode === "ratio") {
    host.innerHTML = renderBarSvg(ratioSeries(state.grid));
  } else {
    // box over the grid's psm_mean cells; add psm_mean to measures first
    const series = state.grid.measures.psm_mean !== undefined
      ? barSeries(state.grid, "psm_mean")
      : null;
    const values = (series?.values ?? []).filter((v): v is number => v !== null);
    const stats = boxStats(values);
    host.innerHTML = stats
      ? renderBoxSvg("psm_mean across cells", stats)
      : "<p class='muted'>box view needs the psm_mean measure</p>";
  }
}

function renderMap(state: ExplorerState): void {
  const host = $("#map");
  if (!state.severity) {
    host.innerHTML = "<p class='muted'>loading severity…</p>";
    return;
  }
  const shapes = shapesForLevel(state.severity.level);
  if (!shapes) {
    host.innerHTML = state.severity.members
      .map((m) => `<div>${m.member}: ${m.mean_pcr_level?.toFixed(2) ?? "–"}</div>`)
      .join("");
    return;
  }
  host.innerHTML = renderChoroplethSvg(buildChoropleth(shapes, state.severity), state.severity.scale);
  host.querySelectorAll("polygon[data-member]").forEach((poly) => {
    poly.addEventListener("click", () => {
      const member = (poly as SVGPolygonElement).dataset.member;
      if (member) void store.sliceFromMap(member).catch(showError);
    });
  });
  void shapes;
  void hitTest; // canvas fallback path uses hitTest; SVG delegates to the polygons
}

function renderPlayback(state: ExplorerState): void {
  const canvas = $("#scene") as HTMLCanvasElement;
  const label = $("#frame-label");
  const slider = $("#scrub") as HTMLInputElement;
  if (!state.playback || !state.playback.frames.length) {
    canvas.getContext("2d")?.clearRect(0, 0, canvas.width, canvas.height);
    label.textContent = state.playback ? "no evaluable frames" : "select a grid row to play back";
    slider.disabled = true;
    ($("#play") as HTMLButtonElement).disabled = true;
    return;
  }
  if (!controller || controller.scene !== state.playback) {
    controller = new PlaybackController(state.playback);
  }
  controller.scrub(state.frameCursor);
  slider.disabled = false;
  slider.max = String(state.playback.frames.length - 1);
  slider.value = String(state.frameCursor);
  ($("#play") as HTMLButtonElement).disabled = false;
  const ctx = canvas.getContext("2d");
  if (ctx) {
    const view = computeView(state.playback, canvas.width, canvas.height);
    const frame = drawFrame(ctx as never, state.playback, state.frameCursor, view);
    label.textContent = frame
      ? `${state.playback.scene_code} t=${frame.t.toFixed(2)}s level ${frame.level_label}`
      : state.playback.scene_code;
  }
}

function showError(err: unknown): void {
  $("#error").textContent = err instanceof Error ? err.message : String(err);
}

function render(state: ExplorerState): void {
  renderToolbar(state);
  renderGrid(state);
  renderChart(state);
  renderMap(state);
  renderPlayback(state);
  $("#error").textContent = state.error ?? "";
}

function loop(ts: number): void {
  if (controller && controller.playing) {
    controller.tick(lastTs ? ts - lastTs : 0);
    store.setFrame(controller.cursor);
  }
  lastTs = ts;
  rafHandle = requestAnimationFrame(loop);
}

async function boot(): Promise<void> {
  store.subscribe(render);
  $("#undo").addEventListener("click", () => void store.undo().catch(showError));
  $("#play").addEventListener("click", () => {
    if (!controller) return;
    if (controller.playing) controller.pause();
    else controller.play();
  });
  ($("#scrub") as HTMLInputElement).addEventListener("input", (ev) => {
    store.setFrame(Number((ev.target as HTMLInputElement).value));
  });
  document.querySelectorAll("[data-chart-mode]").forEach((btn) => {
    btn.addEventListener("click", () => {
      store.setChartMode((btn as HTMLElement).dataset.chartMode as never);
    });
  });
  await store.init();
  await store.loadSeverity("district");
  rafHandle = requestAnimationFrame(loop);
  void rafHandle;
}

boot().catch(showError);
