import * as fs from "node:fs";
import Papa from "papaparse";

import { EmptyDataError, SchemaError } from "./schema";

export interface CsvTable {
  header: string[];
  rows: Record<string, string>[];
}

export function readCsv(path: string): CsvTable {
  let text: string;
  try {
    text = fs.readFileSync(path, "utf8");
  } catch (err) {
    throw new SchemaError(`cannot read ${path}: ${(err as Error).message}`);
  }
  const parsed = Papa.parse<Record<string, string>>(text.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    const first = parsed.errors[0];
    throw new SchemaError(`${path}: malformed CSV (${first.message})`);
  }
  const header = parsed.meta.fields ?? [];
  if (header.length === 0) {
    throw new EmptyDataError(`${path}: no header row`);
  }
  return { header, rows: parsed.data };
}

/** Parse a cell as a number; empty cells (absent metrics) return null. */
export function num(row: Record<string, string>, column: string): number | null {
  const raw = row[column];
  if (raw === undefined || raw === "") {
    return null;
  }
  const value = Number(raw);
  if (!Number.isFinite(value)) {
    throw new SchemaError(`non-numeric value ${JSON.stringify(raw)} in column '${column}'`);
  }
  return value;
}

export function requireNum(row: Record<string, string>, column: string): number {
  const value = num(row, column);
  if (value === null) {
    throw new SchemaError(`empty value in required column '${column}'`);
  }
  return value;
}
