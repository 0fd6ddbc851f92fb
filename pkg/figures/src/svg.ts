/** Minimal deterministic SVG assembly: no DOM, just strings. */

export interface Extent {
  lo: number;
  hi: number;
}

export function extent(values: number[]): Extent {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  if (!Number.isFinite(lo)) {
    return { lo: 0, hi: 1 };
  }
  if (lo === hi) {
    // degenerate span: pad so a single point still lands mid-axis
    return { lo: lo - 0.5, hi: hi + 0.5 };
  }
  return { lo, hi };
}

/** Linear data→pixel scale. */
export class Scale {
  constructor(readonly domain: Extent, readonly range: Extent) {}

  at(value: number): number {
    const t = (value - this.domain.lo) / (this.domain.hi - this.domain.lo);
    return this.range.lo + t * (this.range.hi - this.range.lo);
  }

  ticks(count = 5): number[] {
    const span = this.domain.hi - this.domain.lo;
    const rawStep = span / count;
    const power = Math.pow(10, Math.floor(Math.log10(rawStep)));
    const step = [1, 2, 5, 10].map((m) => m * power)
      .find((s) => span / s <= count) ?? power * 10;
    const first = Math.ceil(this.domain.lo / step) * step;
    const out: number[] = [];
    for (let v = first; v <= this.domain.hi + 1e-9; v += step) {
      out.push(Number(v.toPrecision(12)));
    }
    return out;
  }
}

function clamp01(t: number): number {
  return t < 0 ? 0 : t > 1 ? 1 : t;
}

const VIRIDIS_STOPS: [number, number, number][] = [
  [68, 1, 84], [72, 40, 120], [62, 74, 137], [49, 104, 142],
  [38, 130, 142], [31, 158, 137], [53, 183, 121], [109, 205, 89],
  [180, 222, 44], [253, 231, 37],
];

export function colormap(name: "viridis" | "greys", t: number): string {
  const u = clamp01(t);
  if (name === "greys") {
    const g = Math.round(235 - 215 * u);
    return `rgb(${g},${g},${g})`;
  }
  const pos = u * (VIRIDIS_STOPS.length - 1);
  const i = Math.min(Math.floor(pos), VIRIDIS_STOPS.length - 2);
  const f = pos - i;
  const mix = (a: number, b: number) => Math.round(a + (b - a) * f);
  const [r0, g0, b0] = VIRIDIS_STOPS[i];
  const [r1, g1, b1] = VIRIDIS_STOPS[i + 1];
  return `rgb(${mix(r0, r1)},${mix(g0, g1)},${mix(b0, b1)})`;
}

const fmt = (v: number): string => Number(v.toPrecision(6)).toString();

export function rect(x: number, y: number, w: number, h: number,
                     fill: string, attrs = ""): string {
  return `<rect x="${fmt(x)}" y="${fmt(y)}" width="${fmt(w)}" height="${fmt(h)}" fill="${fill}"${attrs ? " " + attrs : ""}/>`;
}

export function line(x1: number, y1: number, x2: number, y2: number,
                     stroke: string, attrs = ""): string {
  return `<line x1="${fmt(x1)}" y1="${fmt(y1)}" x2="${fmt(x2)}" y2="${fmt(y2)}" stroke="${stroke}"${attrs ? " " + attrs : ""}/>`;
}

export function polyline(points: [number, number][], stroke: string,
                         attrs = ""): string {
  const list = points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
  return `<polyline points="${list}" fill="none" stroke="${stroke}"${attrs ? " " + attrs : ""}/>`;
}

export function circle(x: number, y: number, r: number, fill: string,
                       attrs = ""): string {
  return `<circle cx="${fmt(x)}" cy="${fmt(y)}" r="${fmt(r)}" fill="${fill}"${attrs ? " " + attrs : ""}/>`;
}

export function text(x: number, y: number, content: string, attrs = ""): string {
  const escaped = content.replace(/&/g, "&amp;").replace(/</g, "&lt;");
  return `<text x="${fmt(x)}" y="${fmt(y)}" font-family="sans-serif" font-size="11"${attrs ? " " + attrs : ""}>${escaped}</text>`;
}

export interface Frame {
  x: Scale;
  y: Scale;
  parts: string[];
}

/** Axis frame with ticks and labels; y grows upward in data space. */
export function frame(xDomain: Extent, yDomain: Extent,
                      left: number, top: number, width: number, height: number,
                      xLabel: string, yLabel: string): Frame {
  const x = new Scale(xDomain, { lo: left, hi: left + width });
  const y = new Scale(yDomain, { lo: top + height, hi: top });
  const parts: string[] = [];
  parts.push(rect(left, top, width, height, "none", 'stroke="#444"'));
  for (const tick of x.ticks()) {
    const px = x.at(tick);
    parts.push(line(px, top + height, px, top + height + 4, "#444"));
    parts.push(text(px, top + height + 16, fmt(tick), 'text-anchor="middle"'));
  }
  for (const tick of y.ticks()) {
    const py = y.at(tick);
    parts.push(line(left - 4, py, left, py, "#444"));
    parts.push(text(left - 7, py + 4, fmt(tick), 'text-anchor="end"'));
  }
  parts.push(text(left + width / 2, top + height + 32, xLabel,
                  'text-anchor="middle"'));
  parts.push(text(14, top + height / 2, yLabel,
                  `text-anchor="middle" transform="rotate(-90 14 ${fmt(top + height / 2)})"`));
  return { x, y, parts };
}

export function document(width: number, height: number,
                         children: string[]): string {
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">`,
    rect(0, 0, width, height, "#ffffff"),
    ...children,
    "</svg>",
    "",
  ].join("\n");
}
