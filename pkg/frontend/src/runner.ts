/** Spawns the selection engine CLI; the bindings contain no selection logic. */

import { execFile } from "node:child_process";
import { mkdtemp, rm } from "node:fs/promises";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { promisify } from "node:util";

import { errorFromCli } from "./errors.js";

const execFileAsync = promisify(execFile);

/** Interpreter that has the engine installed; override via SESEL_PYTHON. */
export function pythonInterpreter(): string {
  return process.env.SESEL_PYTHON ?? "python3";
}

export async function runCli(args: string[]): Promise<{ stdout: string; stderr: string }> {
  try {
    return await execFileAsync(pythonInterpreter(), ["-m", "sesel.cli", ...args], {
      maxBuffer: 256 * 1024 * 1024,
    });
  } catch (err) {
    const failure = err as { code?: number; stderr?: string; message?: string };
    throw errorFromCli(failure.stderr ?? failure.message ?? "", failure.code ?? 1);
  }
}

export async function withWorkDir<T>(fn: (dir: string) => Promise<T>): Promise<T> {
  const dir = await mkdtemp(join(tmpdir(), "sesel-"));
  try {
    return await fn(dir);
  } finally {
    await rm(dir, { recursive: true, force: true });
  }
}
