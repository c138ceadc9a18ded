/**
 * Command line wrapper: render --in report.csv --out figure.svg
 * [--title STR].  The sidecar with machine-readable point counts is
 * written next to the image as OUT.json.  Exit 0 on success (including
 * an empty report), 1 on schema, row, or I/O failures.
 */

import { readFileSync, writeFileSync } from "node:fs";
import { pathToFileURL } from "node:url";
import { parseArgs } from "node:util";

import { parseSpanCsv, RowError, SchemaError } from "./csv.js";
import { renderScatter } from "./scatter.js";

export function main(argv: string[]): number {
  const [command, ...rest] = argv;
  if (command !== "render") {
    process.stderr.write(`usage: span-scatter render --in FILE.csv --out FILE.svg [--title STR]\n`);
    return 1;
  }
  let values;
  try {
    ({ values } = parseArgs({
      args: rest,
      options: {
        in: { type: "string" },
        out: { type: "string" },
        title: { type: "string", default: "" },
      },
    }));
  } catch (err) {
    process.stderr.write(`span-scatter: ${(err as Error).message}\n`);
    return 1;
  }
  if (!values.in || !values.out) {
    process.stderr.write("span-scatter: both --in and --out are required\n");
    return 1;
  }
  try {
    const text = readFileSync(values.in, "utf8");
    const rows = parseSpanCsv(text);
    const { svg, sidecar } = renderScatter(rows, values.title ?? "");
    writeFileSync(values.out, svg);
    writeFileSync(values.out + ".json", JSON.stringify(sidecar, null, 2) + "\n");
    return 0;
  } catch (err) {
    if (err instanceof SchemaError || err instanceof RowError) {
      process.stderr.write(`span-scatter: ${err.message}\n`);
    } else {
      process.stderr.write(`span-scatter: ${(err as Error).message}\n`);
    }
    return 1;
  }
}

if (process.argv[1] && import.meta.url === pathToFileURL(process.argv[1]).href) {
  process.exit(main(process.argv.slice(2)));
}
