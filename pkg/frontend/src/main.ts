#!/usr/bin/env node
import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import {
  InputFormatError,
  ModelUnavailableError,
  exportEmbeddings,
} from "./exporter.js";
import { DEFAULT_DIMS, HASH_MODEL_NAME } from "./hashEmbedder.js";

export async function main(argv: string[]): Promise<number> {
  const args = await yargs(argv)
    .scriptName("export-embeddings")
    .option("events", { type: "string", demandOption: true, describe: "NDJSON event file" })
    .option("model", { type: "string", default: HASH_MODEL_NAME, describe: "embedding model name" })
    .option("out", { type: "string", demandOption: true, describe: "interchange output path" })
    .option("dims", { type: "number", default: DEFAULT_DIMS, describe: "embedding dimensions" })
    .strict()
    .fail((msg) => {
      throw new Error(msg);
    })
    .parse();

  try {
    const manifest = exportEmbeddings(args.events, args.model, args.out, args.dims);
    console.log(JSON.stringify(manifest));
    return 0;
  } catch (err) {
    if (err instanceof ModelUnavailableError || err instanceof InputFormatError) {
      console.error(`error: ${err.message}`);
      return err.exitCode;
    }
    throw err;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url === new URL(`file://${process.argv[1]}`).href;

if (invokedDirectly) {
  main(hideBin(process.argv))
    .then((code) => {
      process.exitCode = code;
    })
    .catch((err) => {
      console.error(`error: ${err.message}`);
      process.exitCode = 2;
    });
}
