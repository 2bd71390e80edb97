/**
 * Figure builders: each kind maps validated CSV tables onto panels.
 * No science is recomputed here; every plotted number is a verbatim cell
 * from an input file (the single exception is sampling the stored
 * exponential-fit parameters to draw their overlay curve).
 */
import { basename } from "node:path";

import { SchemaError, Table, column, numeric, requireColumns } from "./csv.js";
import { Panel, Series, renderFigure, renderPlaceholder } from "./svg.js";

export const KINDS = ["depth-resource", "dopt-fit", "similarity", "fidelity", "qpuf-deviation"] as const;
export type Kind = (typeof KINDS)[number];

export interface NamedTable {
  name: string;
  table: Table;
}

const PALETTE = ["#4361ee", "#e63946", "#2d6a4f", "#f77f00", "#7209b7", "#0096c7"];

function assertNonEmpty(inputs: NamedTable[]): void {
  if (inputs.every(({ table }) => table.rows.length === 0)) {
    throw new EmptyDataError("no data rows in any input");
  }
}

export class EmptyDataError extends Error {}

function depthResource(inputs: NamedTable[]): Panel[] {
  const { name, table } = inputs[0];
  requireColumns(table, ["depth", "aggregate_iterations", "resource", "is_opt"], name);
  assertNonEmpty(inputs);
  const depths = column(table, "depth");
  const resources = column(table, "resource");
  const optFlags = numeric(column(table, "is_opt"), "is_opt");
  numeric(depths, "depth");
  numeric(resources, "resource");
  const series: Series[] = [{ label: "resource", color: PALETTE[0], xs: depths, ys: resources }];
  const optIdx = optFlags.findIndex((v) => v === 1);
  if (optIdx >= 0) {
    series.push({
      label: "selected depth",
      color: PALETTE[1],
      xs: [depths[optIdx]],
      ys: [resources[optIdx]],
      line: false,
    });
  }
  return [{
    title: "Training resource against circuit depth",
    xLabel: "depth",
    yLabel: "depth x iterations",
    series,
  }];
}

function doptFit(inputs: NamedTable[]): Panel[] {
  const scatter = inputs.find(({ table }) => table.columns.includes("d_opt"));
  if (!scatter) {
    throw new SchemaError("dopt-fit: no input carries a d_opt column");
  }
  requireColumns(scatter.table, ["n", "d_opt", "resource"], scatter.name);
  assertNonEmpty([scatter]);
  const ns = column(scatter.table, "n");
  const dopts = column(scatter.table, "d_opt");
  const nsNum = numeric(ns, "n");
  numeric(dopts, "d_opt");
  const panel: Panel = {
    title: "Selected depth against register size",
    xLabel: "qubits",
    yLabel: "optimal depth",
    series: [{ label: "optimal depth", color: PALETTE[0], xs: ns, ys: dopts, line: false }],
  };
  const fit = inputs.find(({ table }) => table.columns.includes("rms_residual"));
  if (fit) {
    requireColumns(fit.table, ["a", "b", "c", "rms_residual", "converged"], fit.name);
    if (fit.table.rows.length > 0) {
      const a = Number(column(fit.table, "a")[0]);
      const b = Number(column(fit.table, "b")[0]);
      const c = Number(column(fit.table, "c")[0]);
      const lo = Math.min(...nsNum);
      const hi = Math.max(...nsNum);
      const xs: number[] = [];
      const ys: number[] = [];
      for (let i = 0; i <= 60; i++) {
        const x = lo + ((hi - lo) * i) / 60;
        xs.push(x);
        ys.push(a * Math.exp(b * x) + c);
      }
      panel.curves = [{ label: "exponential fit", color: PALETTE[2], xs, ys }];
    }
  }
  return [panel];
}

function traceFigure(metric: "similarity" | "fidelity") {
  return (inputs: NamedTable[]): Panel[] => {
    assertNonEmpty(inputs);
    const series: Series[] = inputs.map(({ name, table }, i) => {
      requireColumns(table, ["iteration", "cost", "fidelity", "similarity"], name);
      const xs = column(table, "iteration");
      const ys = column(table, metric);
      numeric(xs, "iteration");
      numeric(ys, metric);
      return {
        label: basename(name).replace(/\.csv$/, ""),
        color: PALETTE[i % PALETTE.length],
        xs,
        ys,
        marker: false,
      };
    });
    return [{
      title: `${metric[0].toUpperCase()}${metric.slice(1)} over training iterations`,
      xLabel: "iteration",
      yLabel: metric,
      series,
    }];
  };
}

function qpufDeviation(inputs: NamedTable[]): Panel[] {
  const { name, table } = inputs[0];
  requireColumns(table, ["t", "a", "actor", "mean_deviation", "std_deviation", "users", "forgeries"], name);
  assertNonEmpty(inputs);
  const actors = [...new Set(column(table, "actor"))];
  const ts = [...new Set(column(table, "t"))].sort();
  const panels: Panel[] = [];
  for (const actor of actors) {
    const series: Series[] = [];
    ts.forEach((t, i) => {
      const xs: string[] = [];
      const ys: string[] = [];
      const errs: string[] = [];
      table.rows.forEach((row) => {
        const get = (col: string) => row[table.columns.indexOf(col)];
        if (get("actor") === actor && get("t") === t) {
          xs.push(get("a"));
          ys.push(get("mean_deviation"));
          errs.push(get("std_deviation"));
        }
      });
      numeric(xs, "a");
      numeric(ys, "mean_deviation");
      numeric(errs, "std_deviation");
      series.push({ label: `t=${t}`, color: PALETTE[i % PALETTE.length], xs, ys, errs });
    });
    panels.push({
      title: `Mean deviation: ${actor}`,
      xLabel: "ancilla qubits",
      yLabel: "mean deviation",
      series,
    });
  }
  return panels;
}

const BUILDERS: Record<Kind, (inputs: NamedTable[]) => Panel[]> = {
  "depth-resource": depthResource,
  "dopt-fit": doptFit,
  similarity: traceFigure("similarity"),
  fidelity: traceFigure("fidelity"),
  "qpuf-deviation": qpufDeviation,
};

export function buildFigure(kind: Kind, inputs: NamedTable[]): string {
  if (inputs.length === 0) {
    throw new SchemaError("at least one input CSV is required");
  }
  return renderFigure(BUILDERS[kind](inputs));
}

export { renderPlaceholder };
