// 2D polygon predicates for the map hit-test and PCRA overlap display.

export type Point = [number, number];
export type Polygon = number[][]; // open ring

const EPS = 1e-12;

export function pointInPolygon(x: number, y: number, poly: Polygon): boolean {
  let inside = false;
  const n = poly.length;
  for (let i = 0, j = n - 1; i < n; j = i++) {
    const yi = poly[i][1];
    const yj = poly[j][1];
    if (yi > y !== yj > y) {
      const xCross = ((poly[j][0] - poly[i][0]) * (y - yi)) / (yj - yi) + poly[i][0];
      if (x < xCross) inside = !inside;
    }
  }
  return inside;
}

function orient(ax: number, ay: number, bx: number, by: number, cx: number, cy: number): number {
  return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax);
}

function onSegment(ax: number, ay: number, bx: number, by: number, px: number, py: number): boolean {
  return (
    Math.min(ax, bx) - EPS <= px &&
    px <= Math.max(ax, bx) + EPS &&
    Math.min(ay, by) - EPS <= py &&
    py <= Math.max(ay, by) + EPS
  );
}

export function segmentsIntersect(
  ax: number, ay: number, bx: number, by: number,
  cx: number, cy: number, dx: number, dy: number,
): boolean {
  const d1 = orient(cx, cy, dx, dy, ax, ay);
  const d2 = orient(cx, cy, dx, dy, bx, by);
  const d3 = orient(ax, ay, bx, by, cx, cy);
  const d4 = orient(ax, ay, bx, by, dx, dy);
  if (((d1 > EPS && d2 < -EPS) || (d1 < -EPS && d2 > EPS)) &&
      ((d3 > EPS && d4 < -EPS) || (d3 < -EPS && d4 > EPS))) {
    return true;
  }
  if (Math.abs(d1) <= EPS && onSegment(cx, cy, dx, dy, ax, ay)) return true;
  if (Math.abs(d2) <= EPS && onSegment(cx, cy, dx, dy, bx, by)) return true;
  if (Math.abs(d3) <= EPS && onSegment(ax, ay, bx, by, cx, cy)) return true;
  if (Math.abs(d4) <= EPS && onSegment(ax, ay, bx, by, dx, dy)) return true;
  return false;
}

/** Boundary intersection or full containment either way. */
export function polygonsIntersect(a: Polygon, b: Polygon): boolean {
  const na = a.length;
  const nb = b.length;
  for (let i = 0; i < na; i++) {
    const i2 = (i + 1) % na;
    for (let j = 0; j < nb; j++) {
      const j2 = (j + 1) % nb;
      if (
        segmentsIntersect(
          a[i][0], a[i][1], a[i2][0], a[i2][1],
          b[j][0], b[j][1], b[j2][0], b[j2][1],
        )
      ) {
        return true;
      }
    }
  }
  return pointInPolygon(a[0][0], a[0][1], b) || pointInPolygon(b[0][0], b[0][1], a);
}

export function bounds(polys: Polygon[]): { minX: number; minY: number; maxX: number; maxY: number } {
  let minX = Infinity, minY = Infinity, maxX = -Infinity, maxY = -Infinity;
  for (const poly of polys) {
    for (const [x, y] of poly) {
      if (x < minX) minX = x;
      if (y < minY) minY = y;
      if (x > maxX) maxX = x;
      if (y > maxY) maxY = y;
    }
  }
  return { minX, minY, maxX, maxY };
}
