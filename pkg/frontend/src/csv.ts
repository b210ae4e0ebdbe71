/**
 * Trajectory CSV loading.
 *
 * The contract: a mandatory header row (`t, state, u_0, ..., gamma_0, ...,
 * delta_0, ...`), one row per record, numeric fields, empty string for
 * diagnostics that are undefined for the run.
 */

import { readFileSync } from "node:fs";
import Papa from "papaparse";

export class InputError extends Error {}

export interface TrajectoryTable {
  columns: string[];
  /** column name -> values (NaN where the field was empty) */
  data: Map<string, number[]>;
  rows: number;
}

export function loadTrajectory(path: string): TrajectoryTable {
  let text: string;
  try {
    text = readFileSync(path, "utf8");
  } catch (err) {
    throw new InputError(`cannot read ${path}: ${(err as Error).message}`);
  }
  const parsed = Papa.parse<string[]>(text.trim(), { skipEmptyLines: true });
  if (parsed.errors.length > 0) {
    throw new InputError(`malformed CSV in ${path}: ${parsed.errors[0].message}`);
  }
  const rows = parsed.data;
  if (rows.length === 0) {
    throw new InputError(`empty trajectory: ${path} has no header row`);
  }
  const columns = rows[0].map((c) => c.trim());
  if (columns[0] !== "t") {
    throw new InputError(`${path} does not look like a trajectory CSV (first column ${columns[0]!})`);
  }
  const data = new Map<string, number[]>(columns.map((c) => [c, []]));
  for (const row of rows.slice(1)) {
    columns.forEach((name, k) => {
      const field = k < row.length ? row[k].trim() : "";
      data.get(name)!.push(field === "" ? NaN : Number(field));
    });
  }
  return { columns, data, rows: rows.length - 1 };
}

export function seriesColumn(table: TrajectoryTable, name: string, path: string): number[] {
  const col = table.data.get(name);
  if (col === undefined) {
    throw new InputError(
      `missing column '${name}' in ${path} (available: ${table.columns.join(", ")})`,
    );
  }
  return col;
}
