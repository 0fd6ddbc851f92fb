import * as fs from "node:fs";
import * as path from "node:path";

import { CsvTable, num, readCsv, requireNum } from "./csv";
import {
  EmptyDataError, FigureKind, SchemaError, requireColumns,
} from "./schema";
import { Style } from "./style";
import * as svg from "./svg";

export interface PlotSpec {
  kind: FigureKind;
  input: string;
  output: string;
  style: Style;
}

const MARGIN = { left: 52, right: 16, top: 20, bottom: 44 };

function plotArea(style: Style) {
  return {
    left: MARGIN.left,
    top: MARGIN.top,
    width: style.width - MARGIN.left - MARGIN.right,
    height: style.height - MARGIN.top - MARGIN.bottom,
  };
}

function listTraceFiles(input: string): string[] {
  const stat = fs.statSync(input, { throwIfNoEntry: false });
  if (stat === undefined) {
    throw new SchemaError(`input path ${input} does not exist`);
  }
  if (stat.isFile()) {
    return [input];
  }
  const names = fs.readdirSync(input).filter((n) => n.endsWith(".csv"));
  // episode files are numbered; sort numerically so overlays are stable
  names.sort((a, b) => {
    const an = Number(path.basename(a, ".csv"));
    const bn = Number(path.basename(b, ".csv"));
    if (Number.isFinite(an) && Number.isFinite(bn)) return an - bn;
    return a < b ? -1 : 1;
  });
  if (names.length === 0) {
    throw new EmptyDataError(`no .csv files under ${input}`);
  }
  return names.map((n) => path.join(input, n));
}

function readTraces(kind: FigureKind, input: string): CsvTable[] {
  const tables: CsvTable[] = [];
  for (const file of listTraceFiles(input)) {
    const table = readCsv(file);
    requireColumns(kind, table.header, file);
    tables.push(table);
  }
  if (tables.every((t) => t.rows.length === 0)) {
    throw new EmptyDataError(`no data rows under ${input}`);
  }
  return tables;
}

// ---------------------------------------------------------------------------
// heatmap: spatial bins of measured concentration along the logged paths
// ---------------------------------------------------------------------------

function renderHeatmap(spec: PlotSpec): string {
  const tables = readTraces("heatmap", spec.input);
  const xs: number[] = [];
  const ys: number[] = [];
  const bins = new Map<string, { sum: number; count: number }>();
  const cell = spec.style.cellSize;
  for (const table of tables) {
    for (const row of table.rows) {
      const x = requireNum(row, "x");
      const y = requireNum(row, "y");
      const c = requireNum(row, "concentration");
      xs.push(x);
      ys.push(y);
      const key = `${Math.floor(x / cell)},${Math.floor(y / cell)}`;
      const bin = bins.get(key) ?? { sum: 0, count: 0 };
      bin.sum += c;
      bin.count += 1;
      bins.set(key, bin);
    }
  }
  const area = plotArea(spec.style);
  const f = svg.frame(svg.extent(xs), svg.extent(ys), area.left, area.top,
                      area.width, area.height, "x (m)", "y (m)");
  let peak = 0;
  for (const bin of bins.values()) {
    peak = Math.max(peak, bin.sum / bin.count);
  }
  const cells: string[] = [];
  for (const [key, bin] of bins) {
    const [ix, iy] = key.split(",").map(Number);
    const mean = bin.sum / bin.count;
    const t = peak > 0 ? Math.log1p(mean) / Math.log1p(peak) : 0;
    const x0 = f.x.at(ix * cell);
    const x1 = f.x.at((ix + 1) * cell);
    const y0 = f.y.at((iy + 1) * cell);
    const y1 = f.y.at(iy * cell);
    cells.push(svg.rect(x0, y0, x1 - x0, y1 - y0,
                        svg.colormap(spec.style.colormap, t),
                        'class="heat-cell"'));
  }
  return svg.document(spec.style.width, spec.style.height,
                      [...cells, ...f.parts]);
}

// ---------------------------------------------------------------------------
// sweep: metric panels against the swept axis, one series per policy
// ---------------------------------------------------------------------------

interface SweepRow {
  policy: string;
  x: number;
  sr: number;
  srCi: number;
  mtd: number | null;
  st: number | null;
}

function renderSweep(spec: PlotSpec): string {
  const table = readCsv(spec.input);
  requireColumns("sweep", table.header, spec.input);
  if (table.rows.length === 0) {
    throw new EmptyDataError(`${spec.input}: metrics file has no rows`);
  }
  const particles = new Set(table.rows.map((r) => r.n_particles));
  const zetas = new Set(table.rows.map((r) => r.zeta));
  // plot against whichever hyperparameter the sweep actually varied
  const axis = zetas.size > particles.size ? "zeta" : "n_particles";
  const axisLabel = axis === "zeta" ? "cessation threshold (m)" : "particles";
  const rows: SweepRow[] = table.rows.map((row) => ({
    policy: row.policy ?? "?",
    x: requireNum(row, axis),
    sr: requireNum(row, "sr"),
    srCi: requireNum(row, "sr_ci"),
    mtd: num(row, "mtd"),
    st: num(row, "st"),
  }));
  const policies = [...new Set(rows.map((r) => r.policy))];
  const color = (policy: string) =>
    svg.colormap(spec.style.colormap,
                 policies.length === 1 ? 0.5
                   : policies.indexOf(policy) / (policies.length - 1) * 0.85);

  const panels: { label: string; value: (r: SweepRow) => number | null }[] = [
    { label: "success rate", value: (r) => r.sr },
    { label: "mean traveled distance (m)", value: (r) => r.mtd },
    { label: "search time (s)", value: (r) => r.st },
  ];
  const parts: string[] = [];
  const panelGap = 30;
  const panelHeight =
    (spec.style.height - MARGIN.top - MARGIN.bottom - 2 * panelGap) / 3;
  const xDomain = svg.extent(rows.map((r) => r.x));
  panels.forEach((panel, index) => {
    const top = MARGIN.top + index * (panelHeight + panelGap);
    const values = rows.map(panel.value).filter((v): v is number => v !== null);
    const yValues = values.length > 0 ? values : [0];
    if (panel.label === "success rate") {
      yValues.push(0, 1);
    }
    const f = svg.frame(xDomain, svg.extent(yValues), MARGIN.left, top,
                        spec.style.width - MARGIN.left - MARGIN.right,
                        panelHeight,
                        index === panels.length - 1 ? axisLabel : "",
                        panel.label);
    parts.push(...f.parts);
    for (const policy of policies) {
      const series = rows
        .filter((r) => r.policy === policy && panel.value(r) !== null)
        .sort((a, b) => a.x - b.x);
      const points: [number, number][] = series.map((r) =>
        [f.x.at(r.x), f.y.at(panel.value(r) as number)]);
      if (points.length > 1) {
        parts.push(svg.polyline(points, color(policy),
                                `class="series" data-policy="${policy}"`));
      }
      series.forEach((r, i) => {
        parts.push(svg.circle(points[i][0], points[i][1], 3, color(policy),
                              `class="series-point" data-policy="${policy}"`));
        if (panel.label === "success rate" && r.srCi > 0) {
          parts.push(svg.line(points[i][0], f.y.at(r.sr - r.srCi),
                              points[i][0], f.y.at(r.sr + r.srCi),
                              color(policy), 'class="ci-bar"'));
        }
      });
    }
  });
  policies.forEach((policy, i) => {
    const y = MARGIN.top + 12 * i;
    parts.push(svg.line(spec.style.width - 130, y - 4,
                        spec.style.width - 112, y - 4, color(policy)));
    parts.push(svg.text(spec.style.width - 108, y, policy));
  });
  return svg.document(spec.style.width, spec.style.height, parts);
}

// ---------------------------------------------------------------------------
// trajectories: overlay of true paths (step-gradient) and estimate paths
// ---------------------------------------------------------------------------

function renderTrajectories(spec: PlotSpec): string {
  const tables = readTraces("trajectories", spec.input);
  const xs: number[] = [];
  const ys: number[] = [];
  for (const table of tables) {
    for (const row of table.rows) {
      xs.push(requireNum(row, "x"), requireNum(row, "est_x"));
      ys.push(requireNum(row, "y"), requireNum(row, "est_y"));
    }
  }
  const area = plotArea(spec.style);
  const f = svg.frame(svg.extent(xs), svg.extent(ys), area.left, area.top,
                      area.width, area.height, "x (m)", "y (m)");
  const parts = [...f.parts];
  for (const table of tables) {
    const steps = table.rows.map((r) => requireNum(r, "step"));
    const maxStep = Math.max(1, ...steps);
    for (let i = 1; i < table.rows.length; i++) {
      const a = table.rows[i - 1];
      const b = table.rows[i];
      const t = steps[i] / maxStep;
      parts.push(svg.line(
        f.x.at(requireNum(a, "x")), f.y.at(requireNum(a, "y")),
        f.x.at(requireNum(b, "x")), f.y.at(requireNum(b, "y")),
        svg.colormap(spec.style.colormap, t),
        'class="true-path" stroke-opacity="0.6"'));
    }
    const estimate: [number, number][] = table.rows.map((r) =>
      [f.x.at(requireNum(r, "est_x")), f.y.at(requireNum(r, "est_y"))]);
    if (estimate.length > 1) {
      parts.push(svg.polyline(estimate, "#2460a7",
                              'class="estimate-path" stroke-opacity="0.35"'));
    }
  }
  return svg.document(spec.style.width, spec.style.height, parts);
}

// ---------------------------------------------------------------------------
// distances: per-step distance to goal and to estimate, with threshold lines
// ---------------------------------------------------------------------------

function referenceLevels(spec: PlotSpec): number[] {
  if (spec.style.zetas !== null) {
    return spec.style.zetas;
  }
  // an episode CSV lives in <cell>/trajectories/; the cell's config is beside it
  const sibling = path.join(path.dirname(spec.input), "..", "run_config.json");
  try {
    const doc = JSON.parse(fs.readFileSync(sibling, "utf8"));
    if (typeof doc.cessation_threshold === "number") {
      return [doc.cessation_threshold];
    }
  } catch {
    // fall through to the default level
  }
  return [0.4];
}

function renderDistances(spec: PlotSpec): string {
  const table = readCsv(spec.input);
  requireColumns("distances", table.header, spec.input);
  if (table.rows.length === 0) {
    throw new EmptyDataError(`${spec.input}: trajectory has no rows`);
  }
  const steps = table.rows.map((r) => requireNum(r, "step"));
  const toGoal = table.rows.map((r) => requireNum(r, "dist_to_goal"));
  const toEstimate = table.rows.map((r) => requireNum(r, "dist_to_estimate"));
  const levels = referenceLevels(spec);
  const area = plotArea(spec.style);
  const f = svg.frame(svg.extent(steps),
                      svg.extent([0, ...toGoal, ...toEstimate, ...levels]),
                      area.left, area.top, area.width, area.height,
                      "step", "distance (m)");
  const parts = [...f.parts];
  for (const level of levels) {
    const py = f.y.at(level);
    parts.push(svg.line(f.x.at(f.x.domain.lo), py, f.x.at(f.x.domain.hi), py,
                        "#2460a7",
                        'class="zeta-line" stroke-dasharray="6 4"'));
    parts.push(svg.text(f.x.at(f.x.domain.hi) - 4, py - 4,
                        `zeta=${level}`, 'text-anchor="end" fill="#2460a7"'));
  }
  parts.push(svg.polyline(steps.map((s, i) => [f.x.at(s), f.y.at(toGoal[i])]),
                          "#c0392b", 'class="dist-to-goal" stroke-width="1.5"'));
  parts.push(svg.polyline(
    steps.map((s, i) => [f.x.at(s), f.y.at(toEstimate[i])]),
    "#2460a7", 'class="dist-to-estimate" stroke-width="1.5"'));
  parts.push(svg.line(area.left + 8, area.top + 8, area.left + 26,
                      area.top + 8, "#c0392b"));
  parts.push(svg.text(area.left + 30, area.top + 12, "distance to goal"));
  parts.push(svg.line(area.left + 8, area.top + 22, area.left + 26,
                      area.top + 22, "#2460a7"));
  parts.push(svg.text(area.left + 30, area.top + 26, "distance to estimate"));
  return svg.document(spec.style.width, spec.style.height, parts);
}

// ---------------------------------------------------------------------------

export function renderToString(spec: PlotSpec): string {
  switch (spec.kind) {
    case "heatmap":
      return renderHeatmap(spec);
    case "sweep":
      return renderSweep(spec);
    case "trajectories":
      return renderTrajectories(spec);
    case "distances":
      return renderDistances(spec);
  }
}

/** Render and write atomically: a crash mid-write never corrupts the target. */
export function render(spec: PlotSpec): void {
  const content = renderToString(spec);
  const tmp = `${spec.output}.tmp-${process.pid}`;
  fs.mkdirSync(path.dirname(path.resolve(spec.output)), { recursive: true });
  fs.writeFileSync(tmp, content);
  fs.renameSync(tmp, spec.output);
}
