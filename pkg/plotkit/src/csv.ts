/** Minimal CSV reader for the podlim artifact contracts.
 *
 * The producer writes comma-separated, LF-terminated files with a single
 * header row and `.`-decimal numbers; anything else is a parse error naming
 * the file and line.
 */

import * as fs from "fs";

export interface Table {
  columns: string[];
  rows: number[][];
  /** raw string cells for non-numeric columns (e.g. machine labels) */
  raw: string[][];
}

export class CsvError extends Error {
  constructor(file: string, line: number, message: string) {
    super(`${file}:${line}: ${message}`);
  }
}

export function readCsv(path: string): Table {
  const text = fs.readFileSync(path, "utf8");
  const lines = text.split("\n").filter((l) => l.length > 0);
  if (lines.length < 1) {
    throw new CsvError(path, 0, "empty file");
  }
  const columns = lines[0].split(",");
  const rows: number[][] = [];
  const raw: string[][] = [];
  for (let i = 1; i < lines.length; i++) {
    const cells = lines[i].split(",");
    if (cells.length !== columns.length) {
      throw new CsvError(path, i + 1,
        `expected ${columns.length} cells, got ${cells.length}`);
    }
    raw.push(cells);
    rows.push(cells.map((c) => {
      const v = Number(c);
      return Number.isFinite(v) ? v : NaN;
    }));
  }
  return { columns, rows, raw };
}

export function column(table: Table, name: string): number[] {
  const idx = table.columns.indexOf(name);
  if (idx < 0) {
    throw new Error(`missing column ${name}; have ${table.columns.join(",")}`);
  }
  return table.rows.map((r) => r[idx]);
}

export function textColumn(table: Table, name: string): string[] {
  const idx = table.columns.indexOf(name);
  if (idx < 0) {
    throw new Error(`missing column ${name}`);
  }
  return table.raw.map((r) => r[idx]);
}
