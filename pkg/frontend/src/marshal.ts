/** Byte-level writers/readers for the engine's on-disk formats. */

import { SeselError, UsageError } from "./errors.js";

export type EmbeddingInput = number[][] | { data: Float32Array | Float64Array; rows: number; cols: number };

const MAGIC = 0x4d534553; // "SESM" little-endian

export function toMatrix(input: EmbeddingInput): { data: Float64Array; rows: number; cols: number } {
  if (Array.isArray(input)) {
    const rows = input.length;
    if (rows === 0) throw new UsageError("embeddings must not be empty");
    const cols = input[0].length;
    if (cols === 0) throw new UsageError("embedding rows must not be empty");
    const data = new Float64Array(rows * cols);
    for (let i = 0; i < rows; i++) {
      if (input[i].length !== cols) throw new UsageError("ragged embedding rows");
      data.set(input[i], i * cols);
    }
    return { data, rows, cols };
  }
  const { data, rows, cols } = input;
  if (rows < 1 || cols < 1 || data.length !== rows * cols) {
    throw new UsageError(`shape (${rows}, ${cols}) does not match buffer length ${data.length}`);
  }
  return { data: Float64Array.from(data), rows, cols };
}

/** Encode the binary embedding format: magic, version u32, n u64, d u32, f32 data. */
export function encodeEmbeddings(input: EmbeddingInput): Buffer {
  const { data, rows, cols } = toMatrix(input);
  for (const v of data) {
    if (!Number.isFinite(v)) {
      throw new SeselError("FormatError", "non-finite value in embeddings");
    }
  }
  const header = Buffer.alloc(20);
  header.writeUInt32LE(MAGIC, 0);
  header.writeUInt32LE(1, 4);
  header.writeBigUInt64LE(BigInt(rows), 8);
  header.writeUInt32LE(cols, 16);
  const payload = Buffer.alloc(4 * rows * cols);
  for (let i = 0; i < data.length; i++) {
    payload.writeFloatLE(Math.fround(data[i]), 4 * i);
  }
  return Buffer.concat([header, payload]);
}

/** Per-sample scalar CSV with an index column (difficulty, labels). */
export function encodeScalarCsv(values: ArrayLike<number>, column = "value"): string {
  const lines = [`index,${column}`];
  for (let i = 0; i < values.length; i++) {
    lines.push(`${i},${values[i]}`);
  }
  return lines.join("\n") + "\n";
}

export function parseIndexFile(text: string): Int32Array {
  const lines = text.split("\n").filter((line) => line.trim().length > 0);
  const out = new Int32Array(lines.length);
  for (let i = 0; i < lines.length; i++) {
    out[i] = Number.parseInt(lines[i], 10);
  }
  return out;
}

export interface ScoreColumns {
  sE: Float64Array;
  phi: Float64Array;
  sT: Float64Array;
  s: Float64Array;
}

export function parseScoreCsv(text: string): ScoreColumns {
  const lines = text.split("\n").filter((line) => line.trim().length > 0);
  const header = lines[0].split(",");
  const want = ["index", "s_e", "phi", "s_t", "s"];
  if (header.join(",") !== want.join(",")) {
    throw new UsageError(`unexpected score CSV header: ${lines[0]}`);
  }
  const n = lines.length - 1;
  const cols: ScoreColumns = {
    sE: new Float64Array(n),
    phi: new Float64Array(n),
    sT: new Float64Array(n),
    s: new Float64Array(n),
  };
  for (let r = 0; r < n; r++) {
    const cells = lines[r + 1].split(",");
    const i = Number.parseInt(cells[0], 10);
    cols.sE[i] = Number.parseFloat(cells[1]);
    cols.phi[i] = Number.parseFloat(cells[2]);
    cols.sT[i] = Number.parseFloat(cells[3]);
    cols.s[i] = Number.parseFloat(cells[4]);
  }
  return cols;
}
