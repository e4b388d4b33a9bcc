/** Thin scripting bindings: marshal arrays to the engine's file formats, run
 * the CLI, and parse its outputs back into typed arrays. */

import { readFile, writeFile } from "node:fs/promises";
import { join } from "node:path";

import { BindingConfig, ScoreConfig, validateScoreConfig, validateSelectConfig } from "./config.js";
import {
  EmbeddingInput,
  encodeEmbeddings,
  encodeScalarCsv,
  parseIndexFile,
  parseScoreCsv,
  ScoreColumns,
} from "./marshal.js";
import { runCli, withWorkDir } from "./runner.js";

export const VERSION = "0.1.0";

export { BindingConfig, ScoreConfig } from "./config.js";
export { SeselError, UsageError } from "./errors.js";
export { EmbeddingInput, ScoreColumns } from "./marshal.js";

export interface SelectionReport {
  n: number;
  m: number;
  theta_final: number | null;
  k: number;
  beta: number;
  gamma: number | null;
  per_class_counts: Record<string, number> | null;
  graph_entropy: number;
  seed: number;
  warnings: string[];
}

export interface SelectionOutput {
  indices: Int32Array;
  report: SelectionReport;
}

function commonFlags(config: ScoreConfig): string[] {
  const flags: string[] = [];
  if (config.k !== undefined) flags.push("--k", String(config.k));
  if (config.treeMode !== undefined) flags.push("--tree-mode", config.treeMode);
  if (config.maxHeight !== undefined) flags.push("--max-height", String(config.maxHeight));
  if (config.logBase !== undefined) flags.push("--log-base", config.logBase);
  if (config.seed !== undefined) flags.push("--seed", String(config.seed));
  if (config.threads !== undefined) flags.push("--threads", String(config.threads));
  return flags;
}

/** Select a budgeted subset; returns the sorted selected sample indices. */
export async function select(
  embeddings: EmbeddingInput,
  config: BindingConfig,
  difficulty?: ArrayLike<number>,
  labels?: ArrayLike<number>,
): Promise<SelectionOutput> {
  validateSelectConfig(config, labels !== undefined);
  return withWorkDir(async (dir) => {
    const embPath = join(dir, "embeddings.sesm");
    await writeFile(embPath, encodeEmbeddings(embeddings));
    const args = ["select", "--embeddings", embPath, ...commonFlags(config)];
    if (difficulty !== undefined) {
      const diffPath = join(dir, "difficulty.csv");
      await writeFile(diffPath, encodeScalarCsv(difficulty));
      args.push("--difficulty", diffPath);
    } else {
      args.push("--identity-difficulty");
    }
    if (labels !== undefined) {
      const labelPath = join(dir, "labels.csv");
      await writeFile(labelPath, encodeScalarCsv(labels));
      args.push("--labels", labelPath);
    }
    if (config.rate !== undefined) args.push("--rate", String(config.rate));
    if (config.budget !== undefined) args.push("--budget", String(config.budget));
    if (config.beta !== undefined) args.push("--beta", String(config.beta));
    if (config.gamma !== undefined) args.push("--gamma", String(config.gamma));
    if (config.kmeans !== undefined) args.push("--kmeans", String(config.kmeans));
    if (config.strategy !== undefined) args.push("--strategy", config.strategy);
    const outPath = join(dir, "selection.txt");
    const reportPath = join(dir, "report.json");
    args.push("--out", outPath, "--report", reportPath);
    await runCli(args);
    const indices = parseIndexFile(await readFile(outPath, "utf8"));
    const report = JSON.parse(await readFile(reportPath, "utf8")) as SelectionReport;
    return { indices, report };
  });
}

/** Score every sample; arrays are indexed by sample id. */
export async function score(
  embeddings: EmbeddingInput,
  config: ScoreConfig = {},
  difficulty?: ArrayLike<number>,
): Promise<ScoreColumns> {
  validateScoreConfig(config);
  return withWorkDir(async (dir) => {
    const embPath = join(dir, "embeddings.sesm");
    await writeFile(embPath, encodeEmbeddings(embeddings));
    const args = ["score", "--embeddings", embPath, ...commonFlags(config)];
    if (difficulty !== undefined) {
      const diffPath = join(dir, "difficulty.csv");
      await writeFile(diffPath, encodeScalarCsv(difficulty));
      args.push("--difficulty", diffPath);
    } else {
      args.push("--identity-difficulty");
    }
    const outPath = join(dir, "scores.csv");
    args.push("--out", outPath);
    await runCli(args);
    return parseScoreCsv(await readFile(outPath, "utf8"));
  });
}

/** Version reported by the engine; matches this package's VERSION. */
export async function coreVersion(): Promise<string> {
  const { stdout } = await runCli(["--version"]);
  return stdout.trim();
}
