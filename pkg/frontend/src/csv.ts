/**
 * Strict CSV reading for the experiment logs.
 *
 * The producing CLI writes plain comma-separated files with a header row
 * and no quoting, so parsing is a straight split. Cell values are kept as
 * the verbatim strings from the file; numeric views are derived on demand
 * so that plots can embed exactly what the log contains.
 */

export interface Table {
  columns: string[];
  /** Row-major verbatim cells, aligned with `columns`. */
  rows: string[][];
}

export class SchemaError extends Error {}

export function parseCsv(text: string): Table {
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length === 0) {
    return { columns: [], rows: [] };
  }
  const columns = lines[0].split(",");
  const rows = lines.slice(1).map((line, i) => {
    const cells = line.split(",");
    if (cells.length !== columns.length) {
      throw new SchemaError(`row ${i + 2} has ${cells.length} cells, expected ${columns.length}`);
    }
    return cells;
  });
  return { columns, rows };
}

/** Validate that the table carries exactly the expected column set. */
export function requireColumns(table: Table, expected: string[], label: string): void {
  for (const name of expected) {
    if (!table.columns.includes(name)) {
      throw new SchemaError(`${label}: missing column "${name}" (found: ${table.columns.join(", ")})`);
    }
  }
}

export function column(table: Table, name: string): string[] {
  const idx = table.columns.indexOf(name);
  if (idx < 0) {
    throw new SchemaError(`missing column "${name}"`);
  }
  return table.rows.map((row) => row[idx]);
}

export function numeric(values: string[], name: string): number[] {
  return values.map((v, i) => {
    const parsed = Number(v);
    if (!Number.isFinite(parsed)) {
      throw new SchemaError(`column "${name}" row ${i + 2}: "${v}" is not numeric`);
    }
    return parsed;
  });
}
