/** Deterministic fixture generation shared by the parity tests. */

export function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a |= 0;
    a = (a + 0x6d2b79f5) | 0;
    let t = Math.imul(a ^ (a >>> 15), 1 | a);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export interface Fixture {
  name: string;
  embeddings: number[][];
  difficulty?: number[];
  labels?: number[];
}

/** Gaussian-ish clustered embeddings; all values are float32-representable. */
export function makeFixture(name: string, seed: number, n: number, d: number, classes: number): Fixture {
  const rand = mulberry32(seed);
  const gauss = () => {
    const u = Math.max(rand(), 1e-12);
    const v = rand();
    return Math.sqrt(-2 * Math.log(u)) * Math.cos(2 * Math.PI * v);
  };
  const centers: number[][] = [];
  for (let c = 0; c < classes; c++) {
    centers.push(Array.from({ length: d }, () => 3 * gauss()));
  }
  const embeddings: number[][] = [];
  const labels: number[] = [];
  const difficulty: number[] = [];
  for (let i = 0; i < n; i++) {
    const c = i % classes;
    labels.push(c);
    embeddings.push(centers[c].map((x) => Math.fround(x + gauss())));
    difficulty.push(Math.fround(gauss()));
  }
  return { name, embeddings, difficulty, labels };
}
