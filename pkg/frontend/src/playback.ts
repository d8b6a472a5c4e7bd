// Scene playback: draw site polygons, both trajectories, current object
// positions, and per-frame PCRA polygons colored by risk level onto a 2D
// canvas. The drawing context is a narrow structural interface so tests can
// record calls without a DOM.

import { bounds } from "./geometry.js";
import type { Polygon } from "./geometry.js";
import type { SceneFrame, ScenePlayback } from "./types.js";

export interface Ctx2D {
  fillStyle: string;
  strokeStyle: string;
  globalAlpha: number;
  lineWidth: number;
  clearRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  closePath(): void;
  fill(): void;
  stroke(): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
}

export const LEVEL_COLORS: Record<number, string> = {
  1: "#2e8b57", // normal
  2: "#2d7fc1", // relatively safe
  3: "#edb021", // warning
  4: "#c72c26", // danger
};

export interface View {
  scale: number;
  ox: number;
  oy: number;
  width: number;
  height: number;
}

export function computeView(scene: ScenePlayback, width: number, height: number): View {
  const polys: Polygon[] = [];
  if (scene.site) {
    polys.push(scene.site.crosswalk, scene.site.cia, ...scene.site.sidewalks);
  }
  for (const track of scene.tracks) polys.push(track.points.map((p) => [p[1], p[2]]));
  for (const frame of scene.frames) {
    for (const side of [frame.pcra.vehicle, frame.pcra.pedestrian]) {
      for (const poly of Object.values(side)) polys.push(poly);
    }
  }
  const { minX, minY, maxX, maxY } = bounds(polys.length ? polys : [[[0, 0], [1, 1]]]);
  const margin = 12;
  const scale = Math.min(
    (width - 2 * margin) / Math.max(1e-9, maxX - minX),
    (height - 2 * margin) / Math.max(1e-9, maxY - minY),
  );
  // y grows upward in site coordinates, downward on canvas
  return { scale, ox: margin - minX * scale, oy: height - margin + minY * scale, width, height };
}

export function toScreen(view: View, x: number, y: number): [number, number] {
  return [x * view.scale + view.ox, view.oy - y * view.scale];
}

function tracePolygon(ctx: Ctx2D, view: View, poly: number[][]): void {
  ctx.beginPath();
  poly.forEach(([x, y], i) => {
    const [sx, sy] = toScreen(view, x, y);
    if (i === 0) ctx.moveTo(sx, sy);
    else ctx.lineTo(sx, sy);
  });
  ctx.closePath();
}

function drawSite(ctx: Ctx2D, view: View, scene: ScenePlayback): void {
  if (!scene.site) return;
  ctx.globalAlpha = 1;
  ctx.lineWidth = 1;
  for (const sidewalk of scene.site.sidewalks) {
    ctx.fillStyle = "#e8e4da";
    tracePolygon(ctx, view, sidewalk);
    ctx.fill();
  }
  ctx.fillStyle = "#cfd8e3";
  tracePolygon(ctx, view, scene.site.crosswalk);
  ctx.fill();
  ctx.fillStyle = "#e3d8cf";
  tracePolygon(ctx, view, scene.site.cia);
  ctx.fill();
  ctx.strokeStyle = "#888";
  ctx.beginPath();
  const [ax, ay] = toScreen(view, scene.site.stop_line[0][0], scene.site.stop_line[0][1]);
  const [bx, by] = toScreen(view, scene.site.stop_line[1][0], scene.site.stop_line[1][1]);
  ctx.moveTo(ax, ay);
  ctx.lineTo(bx, by);
  ctx.stroke();
}

function drawTrack(
  ctx: Ctx2D,
  view: View,
  points: number[][],
  tNow: number,
  color: string,
): void {
  ctx.globalAlpha = 0.9;
  ctx.strokeStyle = color;
  ctx.lineWidth = 2;
  ctx.beginPath();
  let started = false;
  let last: [number, number] | null = null;
  for (const [t, x, y] of points) {
    if (t > tNow + 1e-9) break;
    const [sx, sy] = toScreen(view, x, y);
    if (!started) {
      ctx.moveTo(sx, sy);
      started = true;
    } else {
      ctx.lineTo(sx, sy);
    }
    last = [sx, sy];
  }
  if (started) ctx.stroke();
  if (last) {
    ctx.fillStyle = color;
    ctx.beginPath();
    ctx.arc(last[0], last[1], 5, 0, 2 * Math.PI);
    ctx.fill();
  }
}

function drawPcras(ctx: Ctx2D, view: View, frame: SceneFrame): void {
  const color = LEVEL_COLORS[frame.level] ?? "#666";
  for (const side of ["vehicle", "pedestrian"] as const) {
    const horizons = Object.keys(frame.pcra[side]).sort();
    horizons.forEach((h, i) => {
      ctx.globalAlpha = 0.28 - 0.07 * i; // nearer horizons drawn stronger
      ctx.fillStyle = color;
      tracePolygon(ctx, view, frame.pcra[side][h]);
      ctx.fill();
      ctx.globalAlpha = 0.8;
      ctx.strokeStyle = color;
      ctx.lineWidth = 1;
      ctx.stroke();
    });
  }
}

/** Draw one playback frame; safe for any frame index of the scene. */
export function drawFrame(
  ctx: Ctx2D,
  scene: ScenePlayback,
  frameIndex: number,
  view: View,
): SceneFrame | null {
  ctx.globalAlpha = 1;
  ctx.clearRect(0, 0, view.width, view.height);
  drawSite(ctx, view, scene);
  const frame = scene.frames[frameIndex] ?? null;
  const tNow = frame ? frame.t : scene.tracks[0]?.points.at(-1)?.[0] ?? 0;
  for (const track of scene.tracks) {
    drawTrack(ctx, view, track.points, tNow, track.object_type === "vehicle" ? "#1f4e79" : "#7a3b85");
  }
  if (frame) drawPcras(ctx, view, frame);
  return frame;
}

/** Play/pause/scrub cursor over the scene's evaluation frames. */
export class PlaybackController {
  cursor = 0;
  playing = false;
  private acc = 0;

  constructor(readonly scene: ScenePlayback) {}

  get frameCount(): number {
    return this.scene.frames.length;
  }

  get frame(): SceneFrame | null {
    return this.scene.frames[this.cursor] ?? null;
  }

  play(): void {
    if (this.frameCount > 0) this.playing = true;
  }

  pause(): void {
    this.playing = false;
  }

  scrub(i: number): void {
    this.cursor = Math.max(0, Math.min(i, Math.max(0, this.frameCount - 1)));
  }

  /** Advance wall-clock milliseconds; frames follow their own timestamps. */
  tick(dtMs: number): void {
    if (!this.playing || this.frameCount === 0) return;
    this.acc += dtMs / 1000;
    while (this.cursor < this.frameCount - 1) {
      const dt = this.scene.frames[this.cursor + 1].t - this.scene.frames[this.cursor].t;
      if (this.acc < dt) break;
      this.acc -= dt;
      this.cursor += 1;
    }
    if (this.cursor >= this.frameCount - 1) this.playing = false;
  }
}
