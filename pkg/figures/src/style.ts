import * as fs from "node:fs";

import { SchemaError } from "./schema";

export interface Style {
  colormap: "viridis" | "greys";
  width: number;
  height: number;
  /** Spatial bin edge length, in the data's meters, for heatmap cells. */
  cellSize: number;
  /** Horizontal reference levels for the distances figure. */
  zetas: number[] | null;
}

export const DEFAULT_STYLE: Style = {
  colormap: "viridis",
  width: 640,
  height: 480,
  cellSize: 1.0,
  zetas: null,
};

export function loadStyle(path?: string): Style {
  if (!path) {
    return { ...DEFAULT_STYLE };
  }
  let doc: unknown;
  try {
    doc = JSON.parse(fs.readFileSync(path, "utf8"));
  } catch (err) {
    throw new SchemaError(`cannot read style ${path}: ${(err as Error).message}`);
  }
  if (typeof doc !== "object" || doc === null || Array.isArray(doc)) {
    throw new SchemaError(`style ${path} must be a JSON object`);
  }
  const style = { ...DEFAULT_STYLE };
  const data = doc as Record<string, unknown>;
  for (const key of Object.keys(data)) {
    switch (key) {
      case "colormap":
        if (data.colormap !== "viridis" && data.colormap !== "greys") {
          throw new SchemaError(`style colormap must be 'viridis' or 'greys'`);
        }
        style.colormap = data.colormap;
        break;
      case "width":
      case "height":
      case "cellSize": {
        const value = data[key];
        if (typeof value !== "number" || !(value > 0)) {
          throw new SchemaError(`style ${key} must be a positive number`);
        }
        style[key] = value;
        break;
      }
      case "zetas": {
        const value = data.zetas;
        if (!Array.isArray(value) || value.some((z) => typeof z !== "number")) {
          throw new SchemaError(`style zetas must be an array of numbers`);
        }
        style.zetas = value as number[];
        break;
      }
      default:
        throw new SchemaError(`unknown style option '${key}'`);
    }
  }
  return style;
}
