import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";
import { afterEach, beforeEach, describe, expect, it } from "vitest";

import { PlotSpec, render, renderToString } from "../src/render";
import { EmptyDataError, FigureKind, SchemaError } from "../src/schema";
import { DEFAULT_STYLE, loadStyle } from "../src/style";

const FIXTURES = path.join(__dirname, "fixtures");
const CELL = path.join(FIXTURES, "cell");

let tmp: string;

beforeEach(() => {
  tmp = fs.mkdtempSync(path.join(os.tmpdir(), "ste-plot-"));
});

afterEach(() => {
  fs.rmSync(tmp, { recursive: true, force: true });
});

function spec(kind: FigureKind, input: string,
              extra: Partial<PlotSpec> = {}): PlotSpec {
  return {
    kind,
    input,
    output: path.join(tmp, `${kind}.svg`),
    style: DEFAULT_STYLE,
    ...extra,
  };
}

const FIXTURE_INPUTS: Record<FigureKind, string> = {
  heatmap: path.join(CELL, "trajectories"),
  sweep: path.join(FIXTURES, "sweep", "metrics.csv"),
  trajectories: path.join(CELL, "trajectories"),
  distances: path.join(CELL, "trajectories", "0.csv"),
};

// synthetic metrics with successes, so mtd and st panels have curves
const FULL_METRICS = [
  "policy,n_particles,zeta,episodes,sr,sr_ci,mtd,st,mean_steps",
  "random,100,0.4,50,0.1,0.08,150.0,2.0,280.0",
  "random,1000,0.4,50,0.12,0.09,140.0,21.0,275.0",
  "seeker,100,0.4,50,0.8,0.11,60.0,1.5,90.0",
  "seeker,1000,0.4,50,0.9,0.08,55.0,14.0,80.0",
  "",
].join("\n");

describe("renderers on exported fixtures", () => {
  for (const kind of ["heatmap", "sweep", "trajectories",
                      "distances"] as const) {
    it(`${kind} produces an SVG document`, () => {
      const s = spec(kind, FIXTURE_INPUTS[kind]);
      render(s);
      const body = fs.readFileSync(s.output, "utf8");
      expect(body.startsWith("<svg")).toBe(true);
      expect(body.trimEnd().endsWith("</svg>")).toBe(true);
      expect(body.length).toBeGreaterThan(500);
    });
  }

  it("is deterministic byte for byte", () => {
    for (const kind of ["heatmap", "sweep", "trajectories",
                        "distances"] as const) {
      const s = spec(kind, FIXTURE_INPUTS[kind]);
      expect(renderToString(s)).toBe(renderToString(s));
    }
  });

  it("heatmap accepts a single trace file too", () => {
    const body = renderToString(
      spec("heatmap", path.join(CELL, "trajectories", "1.csv")));
    expect(body).toContain('class="heat-cell"');
  });
});

describe("sweep specifics", () => {
  it("draws one series per policy with confidence bars", () => {
    const file = path.join(tmp, "metrics.csv");
    fs.writeFileSync(file, FULL_METRICS);
    const body = renderToString(spec("sweep", file));
    expect(body).toContain('data-policy="random"');
    expect(body).toContain('data-policy="seeker"');
    expect(body).toContain('class="ci-bar"');
    expect(body).toContain("mean traveled distance");
  });

  it("skips blank mtd and st cells instead of crashing", () => {
    // the fixture sweep has zero successes, so those columns are empty
    const body = renderToString(
      spec("sweep", path.join(FIXTURES, "sweep", "metrics.csv")));
    expect(body).toContain('class="series-point"');
  });

  it("handles a single-row metrics file", () => {
    const file = path.join(tmp, "metrics.csv");
    const lines = FULL_METRICS.split("\n");
    fs.writeFileSync(file, `${lines[0]}\n${lines[1]}\n`);
    expect(renderToString(spec("sweep", file))).toContain("<svg");
  });
});

describe("trajectories specifics", () => {
  it("separates true paths from estimate paths", () => {
    const body = renderToString(
      spec("trajectories", path.join(CELL, "trajectories")));
    expect(body).toContain('class="true-path"');
    expect(body).toContain('class="estimate-path"');
  });
});

describe("distances specifics", () => {
  it("draws both distance curves and a threshold line", () => {
    const body = renderToString(
      spec("distances", path.join(CELL, "trajectories", "0.csv")));
    expect(body).toContain('class="dist-to-goal"');
    expect(body).toContain('class="dist-to-estimate"');
    expect(body).toContain('class="zeta-line"');
    // no style override: the threshold comes from the sibling run_config.json
    expect(body).toContain("zeta=0.4");
  });

  it("draws one line per styled threshold", () => {
    const styleFile = path.join(tmp, "style.json");
    fs.writeFileSync(styleFile, JSON.stringify({ zetas: [0.3, 0.7] }));
    const body = renderToString(
      spec("distances", path.join(CELL, "trajectories", "0.csv"),
           { style: loadStyle(styleFile) }));
    expect(body).toContain("zeta=0.3");
    expect(body).toContain("zeta=0.7");
    expect(body).not.toContain("zeta=0.4");
  });
});

describe("failure modes", () => {
  it("names the missing column", () => {
    const file = path.join(tmp, "bad.csv");
    fs.writeFileSync(file, "step,x,y\n0,1,2\n");
    expect(() => renderToString(spec("heatmap", file)))
      .toThrow("missing required column 'concentration'");
  });

  it("rejects header-only input", () => {
    const file = path.join(tmp, "empty.csv");
    fs.writeFileSync(
      file,
      "step,x,y,concentration,est_x,est_y,std_x,std_y,ess," +
        "dist_to_goal,dist_to_estimate\n");
    expect(() => renderToString(spec("distances", file)))
      .toThrow(EmptyDataError);
  });

  it("rejects a directory with no csv files", () => {
    expect(() => renderToString(spec("heatmap", tmp)))
      .toThrow(EmptyDataError);
  });

  it("rejects a missing input path", () => {
    expect(() => renderToString(
      spec("heatmap", path.join(tmp, "nope.csv")))).toThrow(SchemaError);
  });

  it("rejects non-numeric values in required columns", () => {
    const file = path.join(tmp, "nan.csv");
    fs.writeFileSync(file, "x,y,concentration\n1,2,banana\n");
    expect(() => renderToString(spec("heatmap", file))).toThrow(SchemaError);
  });
});

describe("output handling", () => {
  it("overwrites atomically and leaves no temp files", () => {
    const s = spec("distances", path.join(CELL, "trajectories", "0.csv"));
    fs.writeFileSync(s.output, "stale garbage");
    render(s);
    expect(fs.readFileSync(s.output, "utf8").startsWith("<svg")).toBe(true);
    const leftovers = fs.readdirSync(tmp).filter((n) => n.includes(".tmp-"));
    expect(leftovers).toEqual([]);
  });

  it("creates missing output directories", () => {
    const s = spec("distances", path.join(CELL, "trajectories", "0.csv"),
                   { output: path.join(tmp, "deep", "nest", "d.svg") });
    render(s);
    expect(fs.existsSync(s.output)).toBe(true);
  });
});

describe("style loading", () => {
  it("applies defaults when no file is given", () => {
    expect(loadStyle()).toEqual(DEFAULT_STYLE);
  });

  it("rejects unknown options", () => {
    const file = path.join(tmp, "style.json");
    fs.writeFileSync(file, JSON.stringify({ colour: "red" }));
    expect(() => loadStyle(file)).toThrow("unknown style option 'colour'");
  });

  it("swaps the colormap", () => {
    const styleFile = path.join(tmp, "style.json");
    fs.writeFileSync(styleFile, JSON.stringify({ colormap: "greys" }));
    const grey = renderToString(
      spec("heatmap", path.join(CELL, "trajectories"),
           { style: loadStyle(styleFile) }));
    const vir = renderToString(
      spec("heatmap", path.join(CELL, "trajectories")));
    expect(grey).not.toBe(vir);
  });
});
