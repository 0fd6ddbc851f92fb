/**
 * Column contracts for the experiment-harness export files.
 *
 * These constants mirror the producer's CSV schemas verbatim; the lockstep
 * test checks them against fixture files generated by the real exporter.
 */

export const METRICS_COLUMNS = [
  "policy", "n_particles", "zeta", "episodes", "sr", "sr_ci",
  "mtd", "st", "mean_steps",
] as const;

export const TRACE_COLUMNS = [
  "step", "x", "y", "concentration", "est_x", "est_y",
  "std_x", "std_y", "ess", "dist_to_goal", "dist_to_estimate",
] as const;

export type FigureKind = "heatmap" | "sweep" | "trajectories" | "distances";

export const FIGURE_KINDS: readonly FigureKind[] = [
  "heatmap", "sweep", "trajectories", "distances",
];

/** Columns each figure kind actually reads. */
export const REQUIRED_COLUMNS: Record<FigureKind, readonly string[]> = {
  heatmap: ["x", "y", "concentration"],
  sweep: ["policy", "n_particles", "zeta", "sr", "sr_ci", "mtd", "st"],
  trajectories: ["step", "x", "y", "est_x", "est_y"],
  distances: ["step", "dist_to_goal", "dist_to_estimate"],
};

export class SchemaError extends Error {}
export class EmptyDataError extends Error {}

export function requireColumns(
  kind: FigureKind, header: readonly string[], file: string,
): void {
  for (const column of REQUIRED_COLUMNS[kind]) {
    if (!header.includes(column)) {
      throw new SchemaError(
        `${file}: missing required column '${column}' for kind '${kind}'`,
      );
    }
  }
}
