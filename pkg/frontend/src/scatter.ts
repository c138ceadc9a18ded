/**
 * Pure SVG scatter rendering for span reports: n on the x axis, the
 * stage excess s0(n) - b on the y axis.
 *
 * Exact rows carry their own s0.  Pending rows have none, so they are
 * drawn at the best-known stage: the first stage the run did not reach,
 * reconstructed as rowCount / #classes (every class contributes one row
 * per stage) with a max-based fallback for truncated inputs.  They keep
 * the red highlight convention and a class="pending" marker so the
 * figure can be audited mechanically.
 */

import type { SpanRow } from "./csv.js";

export interface Sidecar {
  points: number;
  exact: number;
  pending: number;
  title: string;
}

export interface Figure {
  svg: string;
  sidecar: Sidecar;
}

const WIDTH = 960;
const HEIGHT = 600;
const MARGIN = { top: 48, right: 24, bottom: 48, left: 64 };
const EXACT_COLOR = "#1f77b4";
const PENDING_COLOR = "#d62728";

function finalStage(rows: SpanRow[]): number {
  const classes = new Set(rows.map((r) => r.a)).size;
  if (classes > 0 && rows.length % classes === 0) {
    return rows.length / classes;
  }
  return Math.max(...rows.map((r) => (r.s0 ?? r.b) + 1));
}

function tickStep(span: number): number {
  if (span <= 0) return 1;
  const raw = span / 8;
  const mag = 10 ** Math.floor(Math.log10(raw));
  for (const mult of [1, 2, 5, 10]) {
    if (mag * mult >= raw) return mag * mult;
  }
  return mag * 10;
}

function fmt(x: number): string {
  return x.toFixed(2).replace(/\.?0+$/, "");
}

function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderScatter(rows: SpanRow[], title: string): Figure {
  const stage = rows.length > 0 ? finalStage(rows) : 0;
  const pts = rows.map((r) => ({
    x: r.n,
    y: (r.s0 ?? stage) - r.b,
    pending: r.status === "pending",
  }));

  const xMax = pts.length > 0 ? Math.max(...pts.map((p) => p.x), 1) : 1;
  const yMax = pts.length > 0 ? Math.max(...pts.map((p) => p.y), 1) : 1;
  const plotW = WIDTH - MARGIN.left - MARGIN.right;
  const plotH = HEIGHT - MARGIN.top - MARGIN.bottom;
  const sx = (x: number) => MARGIN.left + (x / xMax) * plotW;
  const sy = (y: number) => MARGIN.top + plotH - (y / yMax) * plotH;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}">`,
    `<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`,
    `<text x="${WIDTH / 2}" y="28" text-anchor="middle" font-family="sans-serif" font-size="18">${esc(title)}</text>`,
  );

  const axisY = MARGIN.top + plotH;
  parts.push(
    `<line x1="${MARGIN.left}" y1="${axisY}" x2="${MARGIN.left + plotW}" y2="${axisY}" stroke="black"/>`,
    `<line x1="${MARGIN.left}" y1="${MARGIN.top}" x2="${MARGIN.left}" y2="${axisY}" stroke="black"/>`,
  );
  for (let t = 0; t <= xMax; t += tickStep(xMax)) {
    const x = sx(t);
    parts.push(
      `<line x1="${fmt(x)}" y1="${axisY}" x2="${fmt(x)}" y2="${axisY + 6}" stroke="black"/>`,
      `<text x="${fmt(x)}" y="${axisY + 22}" text-anchor="middle" font-family="sans-serif" font-size="12">${t}</text>`,
    );
  }
  for (let t = 0; t <= yMax; t += tickStep(yMax)) {
    const y = sy(t);
    parts.push(
      `<line x1="${MARGIN.left - 6}" y1="${fmt(y)}" x2="${MARGIN.left}" y2="${fmt(y)}" stroke="black"/>`,
      `<text x="${MARGIN.left - 10}" y="${fmt(y + 4)}" text-anchor="end" font-family="sans-serif" font-size="12">${t}</text>`,
    );
  }
  parts.push(
    `<text x="${MARGIN.left + plotW / 2}" y="${HEIGHT - 10}" text-anchor="middle" font-family="sans-serif" font-size="14">n</text>`,
    `<text x="18" y="${MARGIN.top + plotH / 2}" text-anchor="middle" font-family="sans-serif" font-size="14" transform="rotate(-90 18 ${MARGIN.top + plotH / 2})">s0(n) - b</text>`,
  );

  let pendingCount = 0;
  for (const p of pts) {
    if (p.pending) {
      pendingCount += 1;
      parts.push(
        `<circle class="pending" cx="${fmt(sx(p.x))}" cy="${fmt(sy(p.y))}" r="2.5" fill="${PENDING_COLOR}"/>`,
      );
    } else {
      parts.push(
        `<circle cx="${fmt(sx(p.x))}" cy="${fmt(sy(p.y))}" r="2.5" fill="${EXACT_COLOR}"/>`,
      );
    }
  }
  parts.push("</svg>");

  return {
    svg: parts.join("\n") + "\n",
    sidecar: {
      points: pts.length,
      exact: pts.length - pendingCount,
      pending: pendingCount,
      title,
    },
  };
}
