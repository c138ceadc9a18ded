/**
 * Strict reader for span-check CSV reports.
 *
 * The producer writes one row per degree n with the fixed header
 * n,a,b,wq,s0,cap,status,best_val; s0 and cap are empty exactly on
 * pending rows.  Anything outside that shape is rejected here so the
 * renderer never has to guess.
 */

import Papa from "papaparse";

export const REQUIRED_COLUMNS = [
  "n",
  "a",
  "b",
  "wq",
  "s0",
  "cap",
  "status",
  "best_val",
] as const;

export interface SpanRow {
  n: number;
  a: number;
  b: number;
  wq: number;
  /** null exactly when the row is still pending */
  s0: number | null;
  cap: number | null;
  status: "exact" | "pending";
  bestVal: number;
}

export class SchemaError extends Error {
  readonly column: string;

  constructor(column: string) {
    super(`schema error: missing column "${column}"`);
    this.column = column;
  }
}

export class RowError extends Error {}

function toInt(raw: string | undefined, column: string, line: number): number {
  if (raw === undefined || raw === "" || !/^-?\d+$/.test(raw)) {
    throw new RowError(`row ${line}: column "${column}" is not an integer: ${JSON.stringify(raw ?? "")}`);
  }
  return Number(raw);
}

export function parseSpanCsv(text: string): SpanRow[] {
  const parsed = Papa.parse<Record<string, string>>(text.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  const fields = parsed.meta.fields ?? [];
  for (const column of REQUIRED_COLUMNS) {
    if (!fields.includes(column)) {
      throw new SchemaError(column);
    }
  }
  if (parsed.errors.length > 0) {
    const first = parsed.errors[0];
    throw new RowError(`row ${first.row ?? "?"}: ${first.message}`);
  }
  return parsed.data.map((rec, idx) => {
    const line = idx + 2; // 1-based, after the header row
    const status = rec.status;
    if (status !== "exact" && status !== "pending") {
      throw new RowError(`row ${line}: unknown status ${JSON.stringify(status ?? "")}`);
    }
    const pending = status === "pending";
    if (pending !== (rec.s0 === "") || pending !== (rec.cap === "")) {
      throw new RowError(`row ${line}: s0/cap must be empty exactly when pending`);
    }
    return {
      n: toInt(rec.n, "n", line),
      a: toInt(rec.a, "a", line),
      b: toInt(rec.b, "b", line),
      wq: toInt(rec.wq, "wq", line),
      s0: pending ? null : toInt(rec.s0, "s0", line),
      cap: pending ? null : toInt(rec.cap, "cap", line),
      status,
      bestVal: toInt(rec.best_val, "best_val", line),
    };
  });
}
