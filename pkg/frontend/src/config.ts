/** Selection/scoring options mirroring the CLI flags, validated up front. */

import { UsageError } from "./errors.js";

export interface BindingConfig {
  /** Selection fraction in (0, 1]; exactly one of rate/budget must be set. */
  rate?: number;
  /** Explicit sample budget >= 1. */
  budget?: number;
  /** Neighbors per sample; defaults to round(log2 n) inside the engine. */
  k?: number;
  /** Difficulty cutoff ratio in [-1, 1]. */
  beta?: number;
  /** Class imbalance cap factor >= 1; needs labels or kmeans. */
  gamma?: number;
  /** Cluster count used to fabricate labels when none are provided. */
  kmeans?: number;
  treeMode?: "binary" | "compressed";
  maxHeight?: number;
  logBase?: "2" | "e";
  strategy?: "blue-noise" | "top-score";
  seed?: number;
  threads?: number;
}

export interface ScoreConfig {
  k?: number;
  treeMode?: "binary" | "compressed";
  maxHeight?: number;
  logBase?: "2" | "e";
  seed?: number;
  threads?: number;
}

function checkCommon(config: ScoreConfig): void {
  if (config.k !== undefined && (!Number.isInteger(config.k) || config.k < 1)) {
    throw new UsageError(`k must be a positive integer, got ${config.k}`);
  }
  if (config.maxHeight !== undefined && (!Number.isInteger(config.maxHeight) || config.maxHeight < 2)) {
    throw new UsageError(`maxHeight must be an integer >= 2, got ${config.maxHeight}`);
  }
  if (config.treeMode !== undefined && !["binary", "compressed"].includes(config.treeMode)) {
    throw new UsageError(`unknown treeMode ${config.treeMode}`);
  }
  if (config.logBase !== undefined && !["2", "e"].includes(config.logBase)) {
    throw new UsageError(`unknown logBase ${config.logBase}`);
  }
  if (config.threads !== undefined && (!Number.isInteger(config.threads) || config.threads < 1)) {
    throw new UsageError(`threads must be a positive integer, got ${config.threads}`);
  }
  if (config.seed !== undefined && !Number.isInteger(config.seed)) {
    throw new UsageError(`seed must be an integer, got ${config.seed}`);
  }
}

export function validateScoreConfig(config: ScoreConfig): void {
  checkCommon(config);
}

export function validateSelectConfig(config: BindingConfig, hasLabels: boolean): void {
  checkCommon(config);
  const hasRate = config.rate !== undefined;
  const hasBudget = config.budget !== undefined;
  if (hasRate === hasBudget) {
    throw new UsageError("exactly one of rate and budget must be set");
  }
  if (hasRate && !(config.rate! > 0 && config.rate! <= 1)) {
    throw new UsageError(`rate must be in (0, 1], got ${config.rate}`);
  }
  if (hasBudget && (!Number.isInteger(config.budget) || config.budget! < 1)) {
    throw new UsageError(`budget must be a positive integer, got ${config.budget}`);
  }
  if (config.beta !== undefined && !(config.beta >= -1 && config.beta <= 1)) {
    throw new UsageError(`beta must be in [-1, 1], got ${config.beta}`);
  }
  if (config.gamma !== undefined) {
    if (!(config.gamma >= 1)) {
      throw new UsageError(`gamma must be >= 1, got ${config.gamma}`);
    }
    if (!hasLabels && config.kmeans === undefined) {
      throw new UsageError("gamma requires labels or a kmeans cluster count");
    }
  }
  if (config.kmeans !== undefined) {
    if (!Number.isInteger(config.kmeans) || config.kmeans < 1) {
      throw new UsageError(`kmeans must be a positive integer, got ${config.kmeans}`);
    }
    if (hasLabels) {
      throw new UsageError("pass either labels or a kmeans cluster count, not both");
    }
  }
  if (config.strategy !== undefined && !["blue-noise", "top-score"].includes(config.strategy)) {
    throw new UsageError(`unknown strategy ${config.strategy}`);
  }
}
