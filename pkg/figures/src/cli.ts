#!/usr/bin/env node
import { parseArgs } from "node:util";

import { PlotSpec, render } from "./render";
import {
  EmptyDataError, FIGURE_KINDS, FigureKind, SchemaError,
} from "./schema";
import { loadStyle } from "./style";

const USAGE =
  "usage: ste-plot --kind {heatmap|sweep|trajectories|distances} " +
  "--in PATH --out PATH [--style FILE]";

class UsageError extends Error {}

function parseSpec(argv: string[]): PlotSpec {
  let values: Record<string, string | boolean | undefined>;
  try {
    ({ values } = parseArgs({
      args: argv,
      options: {
        kind: { type: "string" },
        in: { type: "string" },
        out: { type: "string" },
        style: { type: "string" },
        help: { type: "boolean" },
      },
      allowPositionals: false,
    }));
  } catch (err) {
    throw new UsageError((err as Error).message);
  }
  if (values.help) {
    throw new UsageError(USAGE);
  }
  for (const name of ["kind", "in", "out"] as const) {
    if (typeof values[name] !== "string") {
      throw new UsageError(`--${name} is required`);
    }
  }
  const kind = values.kind as string;
  if (!(FIGURE_KINDS as readonly string[]).includes(kind)) {
    throw new UsageError(
      `unknown kind '${kind}' (expected one of ${FIGURE_KINDS.join(", ")})`);
  }
  return {
    kind: kind as FigureKind,
    input: values.in as string,
    output: values.out as string,
    style: loadStyle(values.style as string | undefined),
  };
}

/** Exit 0 on success, 1 for bad input or arguments, 2 for runtime faults. */
export function main(argv: string[]): number {
  try {
    render(parseSpec(argv));
    return 0;
  } catch (err) {
    if (err instanceof UsageError) {
      process.stderr.write(`error: ${err.message}\n${USAGE}\n`);
      return 1;
    }
    if (err instanceof SchemaError || err instanceof EmptyDataError) {
      process.stderr.write(`error: ${err.message}\n`);
      return 1;
    }
    process.stderr.write(`error: ${(err as Error).message}\n`);
    return 2;
  }
}

if (require.main === module) {
  process.exitCode = main(process.argv.slice(2));
}
