import type { MedianCurve } from "./types.js";

export interface Series {
  label: string;
  curve: MedianCurve;
}

const WIDTH = 640;
const HEIGHT = 420;
const MARGIN = { left: 64, right: 16, top: 36, bottom: 44 };
const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];

function niceTicks(lo: number, hi: number, n = 5): number[] {
  if (!(hi > lo)) return [lo];
  const span = hi - lo;
  const step = Math.pow(10, Math.floor(Math.log10(span / n)));
  const candidates = [step, 2 * step, 5 * step, 10 * step];
  const chosen = candidates.find((s) => span / s <= n) ?? 10 * step;
  const ticks: number[] = [];
  for (let v = Math.ceil(lo / chosen) * chosen; v <= hi + 1e-12; v += chosen) {
    ticks.push(Number(v.toPrecision(12)));
  }
  return ticks;
}

/**
 * Render one cost-per-iteration figure as standalone SVG: one polyline per
 * planner, with gaps wherever the median is still unsolved (Infinity).
 * Pure string generation, so identical inputs give identical bytes.
 */
export function renderFigure(title: string, series: Series[]): string {
  const maxIter = Math.max(1, ...series.map((s) => s.curve.length));
  const finite = series.flatMap((s) => s.curve.filter((v) => Number.isFinite(v)));
  const yLo = finite.length ? Math.min(...finite) : 0;
  const yHi = finite.length ? Math.max(...finite) : 1;
  const pad = (yHi - yLo || 1) * 0.08;
  const y0 = yLo - pad;
  const y1 = yHi + pad;
  const plotW = WIDTH - MARGIN.left - MARGIN.right;
  const plotH = HEIGHT - MARGIN.top - MARGIN.bottom;
  const sx = (it: number) => MARGIN.left + ((it - 1) / Math.max(1, maxIter - 1)) * plotW;
  const sy = (v: number) => MARGIN.top + (1 - (v - y0) / (y1 - y0)) * plotH;

  const parts: string[] = [];
  parts.push(`<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="sans-serif">`);
  parts.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`);
  parts.push(`<text x="${WIDTH / 2}" y="20" text-anchor="middle" font-size="15">${title}</text>`);

  // axes
  const axisY = MARGIN.top + plotH;
  parts.push(`<line x1="${MARGIN.left}" y1="${MARGIN.top}" x2="${MARGIN.left}" y2="${axisY}" stroke="black"/>`);
  parts.push(`<line x1="${MARGIN.left}" y1="${axisY}" x2="${MARGIN.left + plotW}" y2="${axisY}" stroke="black"/>`);
  for (const t of niceTicks(y0, y1)) {
    const y = sy(t);
    parts.push(`<line x1="${MARGIN.left - 4}" y1="${y.toFixed(2)}" x2="${MARGIN.left + plotW}" y2="${y.toFixed(2)}" stroke="#ddd"/>`);
    parts.push(`<text x="${MARGIN.left - 8}" y="${(y + 4).toFixed(2)}" text-anchor="end" font-size="11">${t}</text>`);
  }
  for (const t of niceTicks(1, maxIter)) {
    const x = sx(t);
    parts.push(`<text x="${x.toFixed(2)}" y="${axisY + 16}" text-anchor="middle" font-size="11">${t}</text>`);
  }
  parts.push(`<text x="${MARGIN.left + plotW / 2}" y="${HEIGHT - 10}" text-anchor="middle" font-size="12">iteration</text>`);
  parts.push(`<text x="16" y="${MARGIN.top + plotH / 2}" text-anchor="middle" font-size="12" transform="rotate(-90 16 ${MARGIN.top + plotH / 2})">median best cost</text>`);

  series.forEach((s, i) => {
    const color = COLORS[i % COLORS.length];
    let d = "";
    let pen = false;
    s.curve.forEach((v, k) => {
      if (Number.isFinite(v)) {
        d += `${pen ? "L" : "M"}${sx(k + 1).toFixed(2)},${sy(v).toFixed(2)}`;
        pen = true;
      } else {
        pen = false; // gap while unsolved
      }
    });
    if (d !== "") {
      parts.push(`<path d="${d}" fill="none" stroke="${color}" stroke-width="1.8"/>`);
    }
    const ly = MARGIN.top + 14 + i * 16;
    parts.push(`<line x1="${WIDTH - 150}" y1="${ly - 4}" x2="${WIDTH - 126}" y2="${ly - 4}" stroke="${color}" stroke-width="2"/>`);
    parts.push(`<text x="${WIDTH - 120}" y="${ly}" font-size="12">${s.label}</text>`);
  });
  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
