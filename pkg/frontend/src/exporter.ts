/**
 * Reads an NDJSON event file, embeds every original post, and writes the
 * embedding interchange file plus a JSON manifest.
 *
 * Interchange format: first line "dims=<d> count=<n>", then one line per
 * document, "<doc_id>\t<v1> <v2> ... <vd>" with decimal floats.
 */

import { createHash } from "node:crypto";
import { readFileSync, writeFileSync } from "node:fs";

import { DEFAULT_DIMS, HASH_MODEL_NAME, embedText } from "./hashEmbedder.js";

export interface ExportManifest {
  model_name: string;
  dims: number;
  count: number;
  corpus_digest: string;
}

export class InputFormatError extends Error {
  readonly exitCode = 3;
}

export class ModelUnavailableError extends Error {
  readonly exitCode = 5;
  constructor(modelName: string) {
    super(`model unavailable: ${modelName}`);
  }
}

interface EventRow {
  id: string;
  text: string;
  is_original: boolean;
}

function parseEvents(raw: string, path: string): EventRow[] {
  const rows: EventRow[] = [];
  const lines = raw.split("\n");
  for (let lineNo = 0; lineNo < lines.length; lineNo++) {
    const line = lines[lineNo].trim();
    if (line === "") {
      continue;
    }
    let obj: unknown;
    try {
      obj = JSON.parse(line);
    } catch {
      throw new InputFormatError(`${path}:${lineNo + 1}: not valid JSON`);
    }
    const rec = obj as Record<string, unknown>;
    if (typeof rec.id !== "string" || typeof rec.text !== "string") {
      throw new InputFormatError(
        `${path}:${lineNo + 1}: event needs string "id" and "text" fields`,
      );
    }
    rows.push({
      id: rec.id,
      text: rec.text,
      is_original: rec.is_original !== false,
    });
  }
  return rows;
}

export function exportEmbeddings(
  eventsPath: string,
  modelName: string,
  outPath: string,
  dims: number = DEFAULT_DIMS,
): ExportManifest {
  if (modelName !== HASH_MODEL_NAME) {
    // Only the built-in deterministic model ships with this exporter;
    // anything else would require a network download.
    throw new ModelUnavailableError(modelName);
  }

  let raw: Buffer;
  try {
    raw = readFileSync(eventsPath);
  } catch (err) {
    throw new InputFormatError(`cannot read events file: ${eventsPath}: ${err}`);
  }
  const originals = parseEvents(raw.toString("utf-8"), eventsPath).filter(
    (e) => e.is_original,
  );

  const lines: string[] = [`dims=${dims} count=${originals.length}`];
  for (const event of originals) {
    const vec = embedText(event.text, dims);
    lines.push(`${event.id}\t${Array.from(vec).join(" ")}`);
  }
  writeFileSync(outPath, lines.join("\n") + "\n", "utf-8");

  const manifest: ExportManifest = {
    model_name: modelName,
    dims,
    count: originals.length,
    corpus_digest: createHash("sha256").update(raw).digest("hex"),
  };
  writeFileSync(
    `${outPath}.manifest.json`,
    JSON.stringify(manifest, null, 2) + "\n",
    "utf-8",
  );
  return manifest;
}
