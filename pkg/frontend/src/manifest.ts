/**
 * Reproduction manifests written by the CLI: one directory per figure id
 * holding manifest.json plus the trajectory CSV it names.
 */

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";

import { Trajectory, loadTrajectory } from "./csv.js";

export interface ScenarioSummary {
  name: string;
  n: number;
  d: number[];
  a: number[][];
  beta: number[][];
  tau: number[][];
  t_end: number;
}

export interface Manifest {
  figure_id: string;
  pair: string;
  note: string;
  scenario: ScenarioSummary;
  observed_labels: string[];
  expected_labels: string[][];
  matched: boolean;
  trajectory_csv: string;
}

export interface Panel {
  manifest: Manifest;
  trajectory: Trajectory;
}

export class ManifestError extends Error {}

function requireField<T>(obj: Record<string, unknown>, key: string): T {
  if (!(key in obj)) {
    throw new ManifestError(`manifest is missing field ${key}`);
  }
  return obj[key] as T;
}

export function loadManifest(path: string): Manifest {
  let raw: string;
  try {
    raw = readFileSync(path, "utf-8");
  } catch (err) {
    throw new ManifestError(`cannot read manifest ${path}: ${err}`);
  }
  let data: Record<string, unknown>;
  try {
    data = JSON.parse(raw) as Record<string, unknown>;
  } catch (err) {
    throw new ManifestError(`manifest ${path} is not valid JSON: ${err}`);
  }
  const manifest: Manifest = {
    figure_id: requireField(data, "figure_id"),
    pair: requireField(data, "pair"),
    note: (data.note as string) ?? "",
    scenario: requireField(data, "scenario"),
    observed_labels: requireField(data, "observed_labels"),
    expected_labels: requireField(data, "expected_labels"),
    matched: requireField(data, "matched"),
    trajectory_csv: requireField(data, "trajectory_csv"),
  };
  if (manifest.observed_labels.length !== manifest.scenario.n) {
    throw new ManifestError(
      `manifest ${path} has ${manifest.observed_labels.length} labels for n=${manifest.scenario.n}`,
    );
  }
  return manifest;
}

/** Load a panel from the directory produced by the reproduce command. */
export function loadPanel(manifestPath: string): Panel {
  const manifest = loadManifest(manifestPath);
  const csvPath = join(dirname(manifestPath), manifest.trajectory_csv);
  const trajectory = loadTrajectory(csvPath);
  if (trajectory.series.length !== manifest.scenario.n) {
    throw new ManifestError(
      `trajectory has ${trajectory.series.length} patches, manifest says ${manifest.scenario.n}`,
    );
  }
  return { manifest, trajectory };
}
