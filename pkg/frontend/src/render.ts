/**
 * SVG figure renderer: one or two panels side by side, per-patch time
 * series, a parameter legend and the observed verdict annotation.
 */

import { writeFileSync } from "node:fs";

import { downsample } from "./analysis.js";
import { Panel } from "./manifest.js";

const PANEL_WIDTH = 460;
const PANEL_HEIGHT = 400;
const MARGIN = { top: 42, right: 16, bottom: 96, left: 56 };
const COLORS = ["#1f6fb2", "#d1495b", "#3a7d44", "#8447ad", "#c77d1e", "#3b3b3b"];
const MAX_POINTS = 1600;

interface Scale {
  min: number;
  max: number;
  toPixel(value: number): number;
}

function makeScale(min: number, max: number, pixelFrom: number, pixelTo: number): Scale {
  const span = max - min || 1;
  return {
    min,
    max,
    toPixel: (value: number) => pixelFrom + ((value - min) / span) * (pixelTo - pixelFrom),
  };
}

function ticks(min: number, max: number, count: number): number[] {
  const out: number[] = [];
  for (let i = 0; i <= count; i++) {
    out.push(min + ((max - min) * i) / count);
  }
  return out;
}

function fmt(value: number): string {
  if (value === 0) return "0";
  const abs = Math.abs(value);
  if (abs >= 1000 || abs < 0.01) return value.toExponential(1);
  return Number(value.toPrecision(3)).toString();
}

function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function parameterSummary(panel: Panel): string {
  const sc = panel.manifest.scenario;
  const beta = sc.beta.map((row) => row.map(fmt).join("|")).join(", ");
  const tau = sc.tau.map((row) => row.map(fmt).join("|")).join(", ");
  const d = sc.d.map(fmt).join(", ");
  return `beta=(${beta})  d=(${d})  tau=(${tau})`;
}

function renderPanel(panel: Panel, offsetX: number, letter: string): string {
  const { trajectory, manifest } = panel;
  const x0 = offsetX + MARGIN.left;
  const x1 = offsetX + PANEL_WIDTH - MARGIN.right;
  const y0 = PANEL_HEIGHT - MARGIN.bottom;
  const y1 = MARGIN.top;

  const tMax = trajectory.times[trajectory.times.length - 1];
  const yMax = Math.max(...trajectory.series.map((s) => Math.max(...s))) * 1.05 || 1;
  const xScale = makeScale(0, tMax, x0, x1);
  const yScale = makeScale(0, yMax, y0, y1);

  const parts: string[] = [];
  parts.push(`<rect x="${x0}" y="${y1}" width="${x1 - x0}" height="${y0 - y1}" fill="white" stroke="#999"/>`);

  for (const t of ticks(0, tMax, 5)) {
    const px = xScale.toPixel(t);
    parts.push(`<line x1="${px.toFixed(1)}" y1="${y0}" x2="${px.toFixed(1)}" y2="${y0 + 4}" stroke="#555"/>`);
    parts.push(`<text x="${px.toFixed(1)}" y="${y0 + 17}" font-size="10" text-anchor="middle">${fmt(t)}</text>`);
  }
  for (const v of ticks(0, yMax, 5)) {
    const py = yScale.toPixel(v);
    parts.push(`<line x1="${x0 - 4}" y1="${py.toFixed(1)}" x2="${x0}" y2="${py.toFixed(1)}" stroke="#555"/>`);
    parts.push(`<text x="${x0 - 7}" y="${(py + 3).toFixed(1)}" font-size="10" text-anchor="end">${fmt(v)}</text>`);
  }

  trajectory.series.forEach((series, i) => {
    const indices = downsample(series.map((_, k) => k), MAX_POINTS);
    const points = indices
      .map((k) => `${xScale.toPixel(trajectory.times[k]).toFixed(1)},${yScale.toPixel(series[k]).toFixed(1)}`)
      .join(" ");
    parts.push(
      `<polyline points="${points}" fill="none" stroke="${COLORS[i % COLORS.length]}" stroke-width="1.4"/>`,
    );
  });

  const title = `(${letter}) ${manifest.figure_id}: ${manifest.scenario.name}`;
  parts.push(`<text x="${offsetX + PANEL_WIDTH / 2}" y="24" font-size="13" text-anchor="middle" font-weight="bold">${escapeXml(title)}</text>`);
  parts.push(`<text x="${(x0 + x1) / 2}" y="${y0 + 33}" font-size="11" text-anchor="middle">t</text>`);
  parts.push(`<text x="${offsetX + 14}" y="${(y0 + y1) / 2}" font-size="11" text-anchor="middle" transform="rotate(-90 ${offsetX + 14} ${(y0 + y1) / 2})">x_i(t)</text>`);

  trajectory.series.forEach((_, i) => {
    const lx = x0 + 10 + i * 130;
    const ly = y0 + 50;
    parts.push(`<line x1="${lx}" y1="${ly - 4}" x2="${lx + 18}" y2="${ly - 4}" stroke="${COLORS[i % COLORS.length]}" stroke-width="2"/>`);
    parts.push(`<text x="${lx + 22}" y="${ly}" font-size="10">patch ${i + 1}: ${escapeXml(manifest.observed_labels[i])}</text>`);
  });
  parts.push(`<text x="${x0}" y="${y0 + 68}" font-size="9" fill="#333">${escapeXml(parameterSummary(panel))}</text>`);
  const verdict = manifest.matched ? "labels matched expectations" : "LABEL MISMATCH";
  parts.push(`<text x="${x0}" y="${y0 + 84}" font-size="10" fill="${manifest.matched ? "#2a6" : "#c22"}">${escapeXml(verdict)}</text>`);
  return parts.join("\n");
}

export function renderFigure(panels: Panel[]): string {
  if (panels.length === 0) {
    throw new Error("renderFigure needs at least one panel");
  }
  const width = PANEL_WIDTH * panels.length;
  const letters = "ab";
  const body = panels
    .map((panel, i) => renderPanel(panel, i * PANEL_WIDTH, letters[i] ?? String(i + 1)))
    .join("\n");
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${PANEL_HEIGHT}" viewBox="0 0 ${width} ${PANEL_HEIGHT}">`,
    `<rect width="${width}" height="${PANEL_HEIGHT}" fill="white"/>`,
    body,
    "</svg>",
  ].join("\n");
}

export function writeFigure(panels: Panel[], outPath: string): void {
  writeFileSync(outPath, renderFigure(panels), "utf-8");
}
