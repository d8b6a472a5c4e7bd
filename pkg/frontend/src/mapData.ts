// Bundled demo-city geometry for the severity choropleth. Shapes are a
// stylized GeoJSON-like layout (unit: abstract map coordinates) keyed by the
// administrative labels used in the warehouse's location dimension; no
// external tile service is involved.

export interface RegionShape {
  name: string;
  polygon: [number, number][];
}

export const DISTRICT_SHAPES: RegionShape[] = [
  {
    name: "North District",
    polygon: [
      [10, 10], [150, 6], [190, 40], [150, 70], [60, 78], [10, 52],
    ],
  },
  {
    name: "Central District",
    polygon: [
      [10, 52], [60, 78], [150, 70], [190, 40], [196, 96], [150, 128], [40, 126], [6, 96],
    ],
  },
  {
    name: "South District",
    polygon: [
      [6, 96], [40, 126], [150, 128], [196, 96], [180, 170], [90, 188], [20, 160],
    ],
  },
];

export const CITY_SHAPES: RegionShape[] = [
  {
    name: "Osan City",
    polygon: [
      [10, 10], [150, 6], [190, 40], [196, 96], [180, 170], [90, 188], [20, 160], [6, 96], [10, 52],
    ],
  },
];

export function shapesForLevel(level: string): RegionShape[] | null {
  if (level === "district") return DISTRICT_SHAPES;
  if (level === "city") return CITY_SHAPES;
  return null; // other levels fall back to a list rendering
}
