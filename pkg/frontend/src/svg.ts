/**
 * Minimal deterministic SVG chart builder.
 *
 * Every plotted point carries data-x / data-y (and data-err for error bars)
 * attributes holding the verbatim strings from the source CSV, so a test
 * can parse the figure and confirm that nothing was recomputed.
 */

export interface Series {
  label: string;
  color: string;
  /** Verbatim cell strings, one per point. */
  xs: string[];
  ys: string[];
  errs?: string[];
  marker?: boolean;
  line?: boolean;
  dash?: string;
}

export interface Panel {
  title: string;
  xLabel: string;
  yLabel: string;
  series: Series[];
  /** Extra smooth curves drawn from computed samples (e.g. a stored fit). */
  curves?: { label: string; color: string; xs: number[]; ys: number[] }[];
}

const FONT = "font-family=\"Helvetica, Arial, sans-serif\"";
const PANEL_W = 360;
const PANEL_H = 300;
const MARGIN = { top: 34, right: 16, bottom: 42, left: 56 };

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function extent(values: number[]): [number, number] {
  let lo = Math.min(...values);
  let hi = Math.max(...values);
  if (!Number.isFinite(lo) || !Number.isFinite(hi)) {
    lo = 0;
    hi = 1;
  }
  if (lo === hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  const pad = (hi - lo) * 0.06;
  return [lo - pad, hi + pad];
}

function ticks(lo: number, hi: number, count = 5): number[] {
  const span = hi - lo;
  const step = Math.pow(10, Math.floor(Math.log10(span / count)));
  const scaled = [step, step * 2, step * 5, step * 10]
    .find((s) => span / s <= count + 1) ?? step * 10;
  const out: number[] = [];
  for (let v = Math.ceil(lo / scaled) * scaled; v <= hi + 1e-12; v += scaled) {
    out.push(Number(v.toPrecision(10)));
  }
  return out;
}

function fmt(v: number): string {
  if (v === 0) return "0";
  const abs = Math.abs(v);
  if (abs >= 1000 || abs < 0.01) return v.toExponential(1);
  return String(Number(v.toPrecision(4)));
}

function renderPanel(panel: Panel, originX: number): string {
  const xsAll = panel.series.flatMap((s) => s.xs.map(Number))
    .concat(panel.curves?.flatMap((c) => c.xs) ?? []);
  const ysAll = panel.series.flatMap((s) =>
    s.ys.map(Number).concat((s.errs ?? []).flatMap((e, i) =>
      [Number(s.ys[i]) + Number(e), Number(s.ys[i]) - Number(e)])))
    .concat(panel.curves?.flatMap((c) => c.ys) ?? []);
  const [x0, x1] = extent(xsAll);
  const [y0, y1] = extent(ysAll);
  const plotW = PANEL_W - MARGIN.left - MARGIN.right;
  const plotH = PANEL_H - MARGIN.top - MARGIN.bottom;
  const sx = (v: number) => originX + MARGIN.left + ((v - x0) / (x1 - x0)) * plotW;
  const sy = (v: number) => MARGIN.top + plotH - ((v - y0) / (y1 - y0)) * plotH;

  const parts: string[] = [];
  parts.push(`<text x="${originX + PANEL_W / 2}" y="18" text-anchor="middle" font-size="13" ${FONT}>${esc(panel.title)}</text>`);
  parts.push(`<rect x="${originX + MARGIN.left}" y="${MARGIN.top}" width="${plotW}" height="${plotH}" fill="none" stroke="#999"/>`);

  for (const t of ticks(x0, x1)) {
    const px = sx(t);
    parts.push(`<line x1="${px.toFixed(2)}" y1="${MARGIN.top + plotH}" x2="${px.toFixed(2)}" y2="${MARGIN.top + plotH + 4}" stroke="#999"/>`);
    parts.push(`<text x="${px.toFixed(2)}" y="${MARGIN.top + plotH + 16}" text-anchor="middle" font-size="10" ${FONT}>${fmt(t)}</text>`);
  }
  for (const t of ticks(y0, y1)) {
    const py = sy(t);
    parts.push(`<line x1="${originX + MARGIN.left - 4}" y1="${py.toFixed(2)}" x2="${originX + MARGIN.left}" y2="${py.toFixed(2)}" stroke="#999"/>`);
    parts.push(`<text x="${originX + MARGIN.left - 7}" y="${(py + 3).toFixed(2)}" text-anchor="end" font-size="10" ${FONT}>${fmt(t)}</text>`);
  }
  parts.push(`<text x="${originX + MARGIN.left + plotW / 2}" y="${PANEL_H - 8}" text-anchor="middle" font-size="11" ${FONT}>${esc(panel.xLabel)}</text>`);
  parts.push(`<text x="${originX + 14}" y="${MARGIN.top + plotH / 2}" text-anchor="middle" font-size="11" ${FONT} transform="rotate(-90 ${originX + 14} ${MARGIN.top + plotH / 2})">${esc(panel.yLabel)}</text>`);

  for (const curve of panel.curves ?? []) {
    const d = curve.xs.map((x, i) =>
      `${i === 0 ? "M" : "L"}${sx(x).toFixed(2)},${sy(curve.ys[i]).toFixed(2)}`).join(" ");
    parts.push(`<path d="${d}" fill="none" stroke="${curve.color}" stroke-width="1.2" stroke-dasharray="5,3" class="curve" data-label="${esc(curve.label)}"/>`);
  }

  panel.series.forEach((series, si) => {
    const px = series.xs.map((v) => sx(Number(v)));
    const py = series.ys.map((v) => sy(Number(v)));
    if (series.line !== false && px.length > 1) {
      const d = px.map((x, i) => `${i === 0 ? "M" : "L"}${x.toFixed(2)},${py[i].toFixed(2)}`).join(" ");
      parts.push(`<path d="${d}" fill="none" stroke="${series.color}" stroke-width="1.3"${series.dash ? ` stroke-dasharray="${series.dash}"` : ""}/>`);
    }
    series.xs.forEach((xRaw, i) => {
      if (series.errs) {
        const err = Number(series.errs[i]);
        const top = sy(Number(series.ys[i]) + err);
        const bot = sy(Number(series.ys[i]) - err);
        parts.push(`<line x1="${px[i].toFixed(2)}" y1="${top.toFixed(2)}" x2="${px[i].toFixed(2)}" y2="${bot.toFixed(2)}" stroke="${series.color}" stroke-width="1" class="errbar" data-series="${esc(series.label)}" data-x="${esc(xRaw)}" data-err="${esc(series.errs[i])}"/>`);
      }
      parts.push(`<circle cx="${px[i].toFixed(2)}" cy="${py[i].toFixed(2)}" r="2.6" fill="${series.color}" class="pt" data-series="${esc(series.label)}" data-x="${esc(xRaw)}" data-y="${esc(series.ys[i])}"/>`);
    });
    parts.push(`<rect x="${originX + MARGIN.left + 8}" y="${MARGIN.top + 6 + si * 14}" width="10" height="3" fill="${series.color}"/>`);
    parts.push(`<text x="${originX + MARGIN.left + 22}" y="${MARGIN.top + 11 + si * 14}" font-size="10" ${FONT}>${esc(series.label)}</text>`);
  });
  return parts.join("\n");
}

export function renderFigure(panels: Panel[]): string {
  const width = PANEL_W * panels.length;
  const body = panels.map((p, i) => renderPanel(p, i * PANEL_W)).join("\n");
  return `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${PANEL_H}" viewBox="0 0 ${width} ${PANEL_H}">\n<rect width="${width}" height="${PANEL_H}" fill="white"/>\n${body}\n</svg>\n`;
}

export function renderPlaceholder(message: string): string {
  return `<svg xmlns="http://www.w3.org/2000/svg" width="${PANEL_W}" height="${PANEL_H}" viewBox="0 0 ${PANEL_W} ${PANEL_H}">\n<rect width="${PANEL_W}" height="${PANEL_H}" fill="white" stroke="#999"/>\n<text x="${PANEL_W / 2}" y="${PANEL_H / 2}" text-anchor="middle" font-size="14" ${FONT} class="placeholder">${esc(message)}</text>\n</svg>\n`;
}
