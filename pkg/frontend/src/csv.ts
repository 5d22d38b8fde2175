/**
 * Trajectory CSV parsing. The file contract is a header "t,x1,...,xn"
 * followed by one row per grid node.
 */

import { readFileSync } from "node:fs";

export interface Trajectory {
  times: number[];
  /** series[i] is the time series of patch i+1 */
  series: number[][];
}

export class CsvFormatError extends Error {}

export function parseTrajectoryCsv(text: string): Trajectory {
  const lines = text.split("\n").filter((line) => line.length > 0);
  if (lines.length < 2) {
    throw new CsvFormatError("trajectory CSV needs a header and at least one row");
  }
  const header = lines[0].split(",");
  if (header[0] !== "t" || header.length < 2) {
    throw new CsvFormatError(`bad header ${JSON.stringify(lines[0])}; expected t,x1,...,xn`);
  }
  header.slice(1).forEach((name, i) => {
    if (name !== `x${i + 1}`) {
      throw new CsvFormatError(`bad header column ${name}; expected x${i + 1}`);
    }
  });
  const width = header.length;
  const times: number[] = [];
  const series: number[][] = Array.from({ length: width - 1 }, () => []);
  for (let r = 1; r < lines.length; r++) {
    const cells = lines[r].split(",");
    if (cells.length !== width) {
      throw new CsvFormatError(`row ${r} has ${cells.length} cells, expected ${width}`);
    }
    const values = cells.map(Number);
    if (values.some((v) => Number.isNaN(v))) {
      throw new CsvFormatError(`row ${r} contains a non-numeric cell`);
    }
    times.push(values[0]);
    for (let i = 1; i < width; i++) {
      series[i - 1].push(values[i]);
    }
  }
  return { times, series };
}

export function loadTrajectory(path: string): Trajectory {
  let text: string;
  try {
    text = readFileSync(path, "utf-8");
  } catch (err) {
    throw new CsvFormatError(`cannot read trajectory file ${path}: ${err}`);
  }
  return parseTrajectoryCsv(text);
}
