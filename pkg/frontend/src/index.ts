/**
 * Figure rendering entry point.
 *
 * Usage:
 *   node dist/index.js --pair <dirA> <dirB> --out figure.svg
 *   node dist/index.js --panel <dir> --out figure.svg
 *   node dist/index.js --all <reproductions-root> --out-dir <dir>
 *
 * Each <dir> is a directory written by the reproduce command (manifest.json
 * plus trajectory.csv).
 */

import { existsSync, mkdirSync, readdirSync } from "node:fs";
import { join } from "node:path";

import { Panel, loadPanel } from "./manifest.js";
import { writeFigure } from "./render.js";

function panelFromDir(dir: string): Panel {
  return loadPanel(join(dir, "manifest.json"));
}

function renderAll(root: string, outDir: string): string[] {
  const entries = readdirSync(root, { withFileTypes: true })
    .filter((e) => e.isDirectory())
    .map((e) => e.name)
    .sort();
  const panelsByPair = new Map<string, Panel[]>();
  for (const name of entries) {
    const manifestPath = join(root, name, "manifest.json");
    if (!existsSync(manifestPath)) {
      continue;
    }
    const panel = loadPanel(manifestPath);
    const bucket = panelsByPair.get(panel.manifest.pair) ?? [];
    bucket.push(panel);
    panelsByPair.set(panel.manifest.pair, bucket);
  }
  if (panelsByPair.size === 0) {
    throw new Error(`no reproduction directories found under ${root}`);
  }
  mkdirSync(outDir, { recursive: true });
  const written: string[] = [];
  for (const [pair, panels] of [...panelsByPair.entries()].sort()) {
    panels.sort((a, b) => a.manifest.figure_id.localeCompare(b.manifest.figure_id));
    const outPath = join(outDir, `figure${pair}.svg`);
    writeFigure(panels, outPath);
    written.push(outPath);
  }
  return written;
}

function main(argv: string[]): number {
  const args = [...argv];
  const take = (flag: string, count: number): string[] | null => {
    const at = args.indexOf(flag);
    if (at < 0) {
      return null;
    }
    const values = args.slice(at + 1, at + 1 + count);
    if (values.length < count || values.some((v) => v.startsWith("--"))) {
      throw new Error(`${flag} expects ${count} argument(s)`);
    }
    args.splice(at, count + 1);
    return values;
  };

  try {
    const all = take("--all", 1);
    if (all) {
      const outDir = take("--out-dir", 1)?.[0] ?? "figures";
      const written = renderAll(all[0], outDir);
      written.forEach((p) => console.log(`wrote ${p}`));
      return 0;
    }
    const pair = take("--pair", 2);
    const panel = take("--panel", 1);
    const out = take("--out", 1)?.[0];
    if (!out || (!pair && !panel)) {
      console.error("usage: --pair <dirA> <dirB> --out FILE | --panel <dir> --out FILE | --all <root> --out-dir DIR");
      return 2;
    }
    const panels = (pair ?? panel ?? []).map(panelFromDir);
    writeFigure(panels, out);
    console.log(`wrote ${out}`);
    return 0;
  } catch (err) {
    console.error(String(err));
    return 1;
  }
}

process.exitCode = main(process.argv.slice(2));
