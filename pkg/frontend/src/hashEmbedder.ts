/**
 * Deterministic token-hash embedder.
 *
 * Each token maps to a fixed pseudo-random direction derived from its
 * SHA-256 digest; a document embeds as the sum of its token vectors.
 * No model download, no inference nondeterminism: two runs over the
 * same corpus are byte-identical. Downstream consumers only see the
 * interchange file, so any real sentence-embedding backend can replace
 * this without touching the analysis side.
 */

import { createHash } from "node:crypto";

export const HASH_MODEL_NAME = "hash-embed-v1";
export const DEFAULT_DIMS = 32;

const URL_RE = /https?:\/\/\S+/g;
const MENTION_RE = /@\w+/g;

/** Lowercase, strip URLs and @mentions, keep alphanumeric word bodies. */
export function tokenize(text: string): string[] {
  const cleaned = text
    .toLowerCase()
    .replace(URL_RE, " ")
    .replace(MENTION_RE, " ")
    .replace(/#/g, " ");
  return cleaned.match(/[a-z0-9]+/g) ?? [];
}

function tokenVector(token: string, dims: number): Float64Array {
  const vec = new Float64Array(dims);
  for (let j = 0; j < dims; j++) {
    const digest = createHash("sha256").update(`${token}:${j}`).digest();
    // First 6 bytes as an integer, mapped to [-1, 1).
    const raw = digest.readUIntBE(0, 6);
    vec[j] = (raw / 2 ** 47) - 1.0;
  }
  return vec;
}

export function embedText(text: string, dims: number = DEFAULT_DIMS): Float64Array {
  const out = new Float64Array(dims);
  const cache = new Map<string, Float64Array>();
  for (const token of tokenize(text)) {
    let vec = cache.get(token);
    if (vec === undefined) {
      vec = tokenVector(token, dims);
      cache.set(token, vec);
    }
    for (let j = 0; j < dims; j++) {
      out[j] += vec[j];
    }
  }
  return out;
}
