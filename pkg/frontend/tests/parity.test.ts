/** Binding parity against direct CLI invocation on a shared fixture corpus. */

import { mkdtemp, readFile, rm, writeFile } from "node:fs/promises";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, describe, expect, it } from "vitest";

import { coreVersion, score, select, SeselError, VERSION } from "../src/index.js";
import { BindingConfig } from "../src/config.js";
import { encodeEmbeddings, encodeScalarCsv, parseIndexFile, parseScoreCsv } from "../src/marshal.js";
import { runCli } from "../src/runner.js";
import { Fixture, makeFixture } from "./helpers.js";

const dirs: string[] = [];
afterAll(async () => {
  await Promise.all(dirs.map((d) => rm(d, { recursive: true, force: true })));
});

async function workDir(): Promise<string> {
  const dir = await mkdtemp(join(tmpdir(), "sesel-parity-"));
  dirs.push(dir);
  return dir;
}

interface Case {
  fixture: Fixture;
  config: BindingConfig;
  useDifficulty: boolean;
  useLabels: boolean;
}

const corpus: Case[] = [
  {
    fixture: makeFixture("plain-rate", 1, 120, 6, 3),
    config: { rate: 0.1, seed: 3 },
    useDifficulty: true,
    useLabels: false,
  },
  {
    fixture: makeFixture("caps-budget", 2, 150, 5, 5),
    config: { budget: 30, beta: 0.2, gamma: 1.2, seed: 11 },
    useDifficulty: true,
    useLabels: true,
  },
  {
    fixture: makeFixture("top-score-e", 3, 90, 4, 3),
    config: { rate: 0.25, strategy: "top-score", logBase: "e", seed: 0 },
    useDifficulty: false,
    useLabels: false,
  },
  {
    fixture: makeFixture("binary-kmeans", 4, 110, 7, 4),
    config: { budget: 22, treeMode: "binary", kmeans: 4, gamma: 1.3, seed: 5, k: 6 },
    useDifficulty: true,
    useLabels: false,
  },
];

async function directCliSelect(c: Case): Promise<{ indices: Int32Array; report: unknown }> {
  const dir = await workDir();
  const embPath = join(dir, "e.sesm");
  await writeFile(embPath, encodeEmbeddings(c.fixture.embeddings));
  const args = ["select", "--embeddings", embPath];
  if (c.useDifficulty) {
    const p = join(dir, "d.csv");
    await writeFile(p, encodeScalarCsv(c.fixture.difficulty!));
    args.push("--difficulty", p);
  } else {
    args.push("--identity-difficulty");
  }
  if (c.useLabels) {
    const p = join(dir, "l.csv");
    await writeFile(p, encodeScalarCsv(c.fixture.labels!));
    args.push("--labels", p);
  }
  const cfg = c.config;
  if (cfg.rate !== undefined) args.push("--rate", String(cfg.rate));
  if (cfg.budget !== undefined) args.push("--budget", String(cfg.budget));
  if (cfg.beta !== undefined) args.push("--beta", String(cfg.beta));
  if (cfg.gamma !== undefined) args.push("--gamma", String(cfg.gamma));
  if (cfg.kmeans !== undefined) args.push("--kmeans", String(cfg.kmeans));
  if (cfg.strategy !== undefined) args.push("--strategy", cfg.strategy);
  if (cfg.treeMode !== undefined) args.push("--tree-mode", cfg.treeMode);
  if (cfg.logBase !== undefined) args.push("--log-base", cfg.logBase);
  if (cfg.k !== undefined) args.push("--k", String(cfg.k));
  if (cfg.seed !== undefined) args.push("--seed", String(cfg.seed));
  const out = join(dir, "sel.txt");
  const report = join(dir, "rep.json");
  args.push("--out", out, "--report", report);
  await runCli(args);
  return {
    indices: parseIndexFile(await readFile(out, "utf8")),
    report: JSON.parse(await readFile(report, "utf8")),
  };
}

describe("binding parity with the CLI", () => {
  for (const c of corpus) {
    it(`select parity: ${c.fixture.name}`, async () => {
      const viaBinding = await select(
        c.fixture.embeddings,
        c.config,
        c.useDifficulty ? c.fixture.difficulty : undefined,
        c.useLabels ? c.fixture.labels : undefined,
      );
      const viaCli = await directCliSelect(c);
      expect(Array.from(viaBinding.indices)).toEqual(Array.from(viaCli.indices));
      expect(viaBinding.report).toEqual(viaCli.report);
    }, 120_000);
  }

  it("score parity on the first fixture", async () => {
    const c = corpus[0];
    const viaBinding = await score(c.fixture.embeddings, { seed: 3 }, c.fixture.difficulty);
    const dir = await workDir();
    const embPath = join(dir, "e.sesm");
    await writeFile(embPath, encodeEmbeddings(c.fixture.embeddings));
    const diffPath = join(dir, "d.csv");
    await writeFile(diffPath, encodeScalarCsv(c.fixture.difficulty!));
    const outPath = join(dir, "s.csv");
    await runCli([
      "score", "--embeddings", embPath, "--difficulty", diffPath,
      "--seed", "3", "--out", outPath,
    ]);
    const viaCli = parseScoreCsv(await readFile(outPath, "utf8"));
    expect(Array.from(viaBinding.sE)).toEqual(Array.from(viaCli.sE));
    expect(Array.from(viaBinding.phi)).toEqual(Array.from(viaCli.phi));
    expect(Array.from(viaBinding.sT)).toEqual(Array.from(viaCli.sT));
    expect(Array.from(viaBinding.s)).toEqual(Array.from(viaCli.s));
  }, 120_000);

  it("rate 1.0 returns every index", async () => {
    const fixture = makeFixture("full", 9, 40, 3, 2);
    const { indices, report } = await select(fixture.embeddings, { rate: 1.0, seed: 0 });
    expect(Array.from(indices)).toEqual(Array.from({ length: 40 }, (_, i) => i));
    expect(report.m).toBe(40);
  }, 120_000);

  it("maps engine errors to typed exceptions", async () => {
    const fixture = makeFixture("err", 10, 50, 3, 2);
    // budget outlives the pool after the cutoff -> InfeasibleBudget (exit 4)
    await expect(
      select(fixture.embeddings, { rate: 0.9, beta: 0.5, seed: 0 }, fixture.difficulty),
    ).rejects.toMatchObject({ errorName: "InfeasibleBudget", exitCode: 4 });
    // difficulty shorter than n -> MissingIndex (exit 3)
    await expect(
      select(fixture.embeddings, { rate: 0.1, seed: 0 }, fixture.difficulty!.slice(0, 10)),
    ).rejects.toMatchObject({ errorName: "MissingIndex", exitCode: 3 });
    await expect(
      select(fixture.embeddings, { rate: 0.1, seed: 0 }, fixture.difficulty).then(() =>
        Promise.reject(new SeselError("Unexpected", "should not fail")),
      ),
    ).rejects.toMatchObject({ errorName: "Unexpected" });
  }, 120_000);

  it("reports a version matching the package", async () => {
    expect(await coreVersion()).toBe(VERSION);
  }, 60_000);
});
