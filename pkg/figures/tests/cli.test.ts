import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";
import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { main } from "../src/cli";

const FIXTURES = path.join(__dirname, "fixtures");

let tmp: string;
let stderr: string[];

beforeEach(() => {
  tmp = fs.mkdtempSync(path.join(os.tmpdir(), "ste-plot-cli-"));
  stderr = [];
  vi.spyOn(process.stderr, "write").mockImplementation((chunk) => {
    stderr.push(String(chunk));
    return true;
  });
});

afterEach(() => {
  vi.restoreAllMocks();
  fs.rmSync(tmp, { recursive: true, force: true });
});

describe("ste-plot command", () => {
  it("renders a figure and exits 0", () => {
    const out = path.join(tmp, "fig.svg");
    const code = main(["--kind", "distances",
                       "--in", path.join(FIXTURES, "cell", "trajectories",
                                         "0.csv"),
                       "--out", out]);
    expect(code).toBe(0);
    expect(fs.readFileSync(out, "utf8")).toContain("</svg>");
    expect(stderr).toEqual([]);
  });

  it("honours a style file", () => {
    const styleFile = path.join(tmp, "style.json");
    fs.writeFileSync(styleFile, JSON.stringify({ width: 200, height: 150 }));
    const out = path.join(tmp, "fig.svg");
    const code = main(["--kind", "heatmap",
                       "--in", path.join(FIXTURES, "cell", "trajectories"),
                       "--out", out, "--style", styleFile]);
    expect(code).toBe(0);
    expect(fs.readFileSync(out, "utf8")).toContain('width="200"');
  });

  const badArgs: [string, string[]][] = [
    ["missing --kind", ["--in", "a.csv", "--out", "b.svg"]],
    ["missing --in", ["--kind", "heatmap", "--out", "b.svg"]],
    ["missing --out", ["--kind", "heatmap", "--in", "a.csv"]],
    ["unknown kind", ["--kind", "piechart", "--in", "a", "--out", "b"]],
    ["unknown flag", ["--kind", "heatmap", "--in", "a", "--out", "b",
                      "--frobnicate"]],
    ["stray positional", ["render", "--kind", "heatmap", "--in", "a",
                          "--out", "b"]],
  ];
  for (const [label, argv] of badArgs) {
    it(`exits 1 on ${label}`, () => {
      expect(main(argv)).toBe(1);
      expect(stderr.join("")).toContain("error:");
      expect(stderr.join("")).toContain("usage:");
    });
  }

  it("exits 1 when the input violates the schema", () => {
    const file = path.join(tmp, "bad.csv");
    fs.writeFileSync(file, "step,x,y\n0,1,2\n");
    const code = main(["--kind", "distances", "--in", file,
                       "--out", path.join(tmp, "fig.svg")]);
    expect(code).toBe(1);
    expect(stderr.join("")).toContain("missing required column");
  });

  it("exits 1 when the input file does not exist", () => {
    const code = main(["--kind", "heatmap",
                       "--in", path.join(tmp, "nope.csv"),
                       "--out", path.join(tmp, "fig.svg")]);
    expect(code).toBe(1);
    expect(stderr.join("")).toContain("error:");
  });

  it("exits 1 on a broken style file", () => {
    const styleFile = path.join(tmp, "style.json");
    fs.writeFileSync(styleFile, "{not json");
    const code = main(["--kind", "heatmap",
                       "--in", path.join(FIXTURES, "cell", "trajectories"),
                       "--out", path.join(tmp, "fig.svg"),
                       "--style", styleFile]);
    expect(code).toBe(1);
  });

  it("exits 2 on runtime faults", () => {
    // output path collides with an existing directory: the write fails
    const out = path.join(tmp, "taken");
    fs.mkdirSync(out);
    const code = main(["--kind", "distances",
                       "--in", path.join(FIXTURES, "cell", "trajectories",
                                         "0.csv"),
                       "--out", out]);
    expect(code).toBe(2);
    expect(stderr.join("")).toContain("error:");
  });
});
