import { createHash } from "node:crypto";

import type { Backend } from "./backend.js";
import { DEFAULT_MASK } from "./masking.js";

/**
 * Deterministic context encoder that needs no model weights.
 *
 * The vector for a position is the distance-weighted sum of pseudo-random
 * unit vectors hashed from the surrounding tokens (1/distance weights,
 * separate hash buckets for adjacent and further-out neighbors), then
 * normalized. The token at the focus position is skipped entirely, so the
 * masked-context contract holds by construction. Useful for tests, CI, and
 * air-gapped machines; swap in the model backend for real semantics.
 */
export class HashBackend implements Backend {
  readonly name: string;
  readonly dim: number;
  readonly maskToken: string = DEFAULT_MASK;
  readonly metadata: Record<string, unknown>;

  private readonly window: number;
  private readonly seed: number;
  private readonly cache = new Map<string, Float64Array>();

  constructor(dim = 1024, window = 5, seed = 0) {
    if (!Number.isInteger(dim) || dim < 1) {
      throw new RangeError(`dim must be a positive integer, got ${dim}`);
    }
    if (!Number.isInteger(window) || window < 1) {
      throw new RangeError(`window must be a positive integer, got ${window}`);
    }
    this.dim = dim;
    this.window = window;
    this.seed = seed;
    this.name = `hash-context-${dim}`;
    this.metadata = { backend: "hash", truncation: "none", window };
  }

  async encode(tokens: readonly string[], position: number): Promise<number[]> {
    const acc = new Float64Array(this.dim);
    const lo = Math.max(0, position - this.window);
    const hi = Math.min(tokens.length - 1, position + this.window);
    for (let j = lo; j <= hi; j++) {
      if (j === position) {
        continue;
      }
      const distance = Math.abs(j - position);
      const bucket = distance === 1 ? "adjacent" : "distant";
      const unit = this.unitVector(tokens[j], bucket);
      const weight = 1 / distance;
      for (let d = 0; d < this.dim; d++) {
        acc[d] += weight * unit[d];
      }
    }
    let norm = 0;
    for (let d = 0; d < this.dim; d++) {
      norm += acc[d] * acc[d];
    }
    norm = Math.sqrt(norm);
    const out = new Array<number>(this.dim);
    for (let d = 0; d < this.dim; d++) {
      out[d] = norm > 0 ? acc[d] / norm : 0;
    }
    return out;
  }

  private unitVector(token: string, bucket: string): Float64Array {
    const key = `${bucket}\u001f${token}`;
    const cached = this.cache.get(key);
    if (cached !== undefined) {
      return cached;
    }
    const values = new Float64Array(this.dim);
    let filled = 0;
    for (let block = 0; filled < this.dim; block++) {
      const digest = createHash("blake2b512")
        .update(`${this.seed}\u001f${key}\u001f${block}`, "utf-8")
        .digest();
      // Box-Muller over consecutive uint32 pairs: 16 normals per digest
      for (let off = 0; off + 8 <= digest.length && filled < this.dim; off += 8) {
        const u1 = (digest.readUInt32BE(off) + 0.5) / 4294967296;
        const u2 = (digest.readUInt32BE(off + 4) + 0.5) / 4294967296;
        const radius = Math.sqrt(-2 * Math.log(u1));
        values[filled++] = radius * Math.cos(2 * Math.PI * u2);
        if (filled < this.dim) {
          values[filled++] = radius * Math.sin(2 * Math.PI * u2);
        }
      }
    }
    let norm = 0;
    for (let d = 0; d < this.dim; d++) {
      norm += values[d] * values[d];
    }
    norm = Math.sqrt(norm);
    for (let d = 0; d < this.dim; d++) {
      values[d] /= norm;
    }
    this.cache.set(key, values);
    return values;
  }
}
