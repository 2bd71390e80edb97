#!/usr/bin/env node
/**
 * vqpt-fig <kind> --in <csv...> --out <figure.svg>
 *
 * Renders one figure kind from experiment CSV logs. Exit codes: 0 on
 * success, 1 when the inputs carry no data rows (a "no data" placeholder
 * is still written), 2 on usage or schema errors.
 */
import { readFileSync, writeFileSync } from "node:fs";
import { parseArgs } from "node:util";

import { SchemaError, parseCsv } from "./csv.js";
import { EmptyDataError, KINDS, Kind, NamedTable, buildFigure, renderPlaceholder } from "./figures.js";

export function run(argv: string[]): number {
  let parsed;
  try {
    parsed = parseArgs({
      args: argv,
      allowPositionals: true,
      options: {
        in: { type: "string", multiple: true },
        out: { type: "string" },
      },
    });
  } catch (err) {
    console.error(`vqpt-fig: ${(err as Error).message}`);
    return 2;
  }
  const kind = parsed.positionals[0] as Kind | undefined;
  const inputs = parsed.values.in ?? [];
  const out = parsed.values.out;
  if (!kind || !KINDS.includes(kind) || inputs.length === 0 || !out) {
    console.error(`usage: vqpt-fig <${KINDS.join("|")}> --in <csv...> --out <figure.svg>`);
    return 2;
  }
  if (!out.endsWith(".svg")) {
    console.error("vqpt-fig: only .svg output is supported");
    return 2;
  }

  let tables: NamedTable[];
  try {
    tables = inputs.map((name) => ({ name, table: parseCsv(readFileSync(name, "utf-8")) }));
  } catch (err) {
    console.error(`vqpt-fig: ${(err as Error).message}`);
    return 2;
  }

  try {
    writeFileSync(out, buildFigure(kind, tables));
    return 0;
  } catch (err) {
    if (err instanceof EmptyDataError) {
      writeFileSync(out, renderPlaceholder("no data"));
      console.error(`vqpt-fig: ${err.message}`);
      return 1;
    }
    if (err instanceof SchemaError) {
      console.error(`vqpt-fig: schema mismatch: ${err.message}`);
      return 2;
    }
    throw err;
  }
}

const invokedDirectly = process.argv[1] !== undefined
  && import.meta.url.endsWith(process.argv[1].split("/").pop() as string);
if (invokedDirectly) {
  process.exit(run(process.argv.slice(2)));
}
