import { describe, expect, it } from "vitest";

import { DISTRICT_SHAPES, shapesForLevel } from "../src/mapData.js";
import {
  buildChoropleth,
  colorForLevel,
  hitTest,
  legendStops,
  renderChoroplethSvg,
} from "../src/severityMap.js";
import type { SeverityMapResponse } from "../src/types.js";

const severity: SeverityMapResponse = {
  level: "district",
  members: [
    { member: "Central District", mean_pcr_level: 1.2, scene_count: 15 },
    { member: "South District", mean_pcr_level: 3.6, scene_count: 15 },
  ],
  scale: [1, 4],
};

describe("colorForLevel", () => {
  it("maps the 1..4 scale monotonically from green to red", () => {
    const c1 = colorForLevel(1);
    const c4 = colorForLevel(4);
    expect(c1).not.toBe(c4);
    const red = (c: string) => Number(c.match(/rgb\((\d+),/)![1]);
    expect(red(c4)).toBeGreaterThan(red(c1));
    expect(colorForLevel(null)).toMatch(/#d7d7d7/);
  });

  it("clamps outside the scale", () => {
    expect(colorForLevel(0.5)).toBe(colorForLevel(1));
    expect(colorForLevel(9)).toBe(colorForLevel(4));
  });
});

describe("buildChoropleth", () => {
  it("colors distinct means distinctly and keeps no-data gray", () => {
    const regions = buildChoropleth(DISTRICT_SHAPES, severity);
    const byName = new Map(regions.map((r) => [r.name, r]));
    expect(byName.get("Central District")!.color).not.toBe(byName.get("South District")!.color);
    expect(byName.get("North District")!.color).toBe("#d7d7d7"); // no facts there
  });
});

describe("legendStops", () => {
  it("endpoints sit at the scale bounds", () => {
    const stops = legendStops([1, 4]);
    expect(stops[0].value).toBe(1);
    expect(stops[stops.length - 1].value).toBe(4);
    expect(stops[0].color).toBe(colorForLevel(1));
    expect(stops[stops.length - 1].color).toBe(colorForLevel(4));
  });
});

describe("hitTest", () => {
  it("maps clicks to the containing region", () => {
    expect(hitTest(DISTRICT_SHAPES, 100, 30)).toBe("North District");
    expect(hitTest(DISTRICT_SHAPES, 100, 100)).toBe("Central District");
    expect(hitTest(DISTRICT_SHAPES, 100, 160)).toBe("South District");
    expect(hitTest(DISTRICT_SHAPES, 500, 500)).toBeNull();
  });
});

describe("rendering", () => {
  it("emits one polygon per region with click targets", () => {
    const svg = renderChoroplethSvg(buildChoropleth(DISTRICT_SHAPES, severity));
    expect(svg.match(/<polygon /g)).toHaveLength(3);
    expect(svg).toContain('data-member="South District"');
  });

  it("falls back to a list when no shapes exist for the level", () => {
    expect(shapesForLevel("district")).not.toBeNull();
    expect(shapesForLevel("neighborhood")).toBeNull();
  });
});
