/**
 * Reader for the kfwave CSV artifacts: `#`-prefixed metadata lines, then a
 * header row, then numeric data rows. Schema validation reports every
 * missing column at once.
 */

import { readFileSync } from "fs";

export class SchemaError extends Error {
  readonly missing: string[];

  constructor(message: string, missing: string[] = []) {
    super(message);
    this.name = "SchemaError";
    this.missing = missing;
  }
}

export interface Table {
  meta: string[];
  columns: Map<string, number[]>;
  rowCount: number;
}

export function parseCsv(text: string): Table {
  const meta: string[] = [];
  let header: string[] | null = null;
  const rows: number[][] = [];
  for (const raw of text.split("\n")) {
    const line = raw.trimEnd();
    if (line.length === 0) continue;
    if (line.startsWith("#")) {
      meta.push(line.slice(1).trim());
      continue;
    }
    if (header === null) {
      header = line.split(",").map((s) => s.trim());
      continue;
    }
    const cells = line.split(",").map((s) => Number(s));
    if (cells.length !== header.length) {
      throw new SchemaError(
        `row has ${cells.length} cells, header has ${header.length}`,
      );
    }
    rows.push(cells);
  }
  if (header === null || rows.length === 0) {
    throw new SchemaError("no data rows in CSV");
  }
  const columns = new Map<string, number[]>();
  header.forEach((name, i) => {
    columns.set(
      name,
      rows.map((r) => r[i]),
    );
  });
  return { meta, columns, rowCount: rows.length };
}

export function readCsv(path: string): Table {
  return parseCsv(readFileSync(path, "utf8"));
}

/** Extract required columns, listing every missing one in the error. */
export function requireColumns(table: Table, names: string[]): number[][] {
  const missing = names.filter((n) => !table.columns.has(n));
  if (missing.length > 0) {
    throw new SchemaError(
      `missing columns: ${missing.join(", ")}`,
      missing,
    );
  }
  return names.map((n) => table.columns.get(n)!);
}
