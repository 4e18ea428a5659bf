#!/usr/bin/env node
/**
 * export-embeddings --corpus notes.jsonl --encoder minilm --out vecs.jsonl [--batch 32]
 *
 * Exit codes: 0 success, 1 usage error, 2 data/encoder error.
 */

import { exportEmbeddings } from "./exporter.js";
import { ENCODER_MANIFEST } from "./encoders.js";

function usage(): string {
  const encoders = Object.keys(ENCODER_MANIFEST).join(" | ");
  return (
    "usage: export-embeddings --corpus <notes.jsonl> --encoder <" +
    encoders +
    "> --out <vecs.jsonl> [--batch <n>] [--token-limit <n>]"
  );
}

function parseArgs(argv: string[]): Map<string, string> {
  const args = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    const flag = argv[i];
    const value = argv[i + 1];
    if (!flag.startsWith("--") || value === undefined) {
      throw new Error(`bad argument ${flag}`);
    }
    args.set(flag.slice(2), value);
  }
  return args;
}

export async function main(argv: string[]): Promise<number> {
  let args: Map<string, string>;
  try {
    args = parseArgs(argv);
    for (const required of ["corpus", "encoder", "out"]) {
      if (!args.has(required)) throw new Error(`missing --${required}`);
    }
  } catch (err) {
    console.error(`usage error: ${(err as Error).message}`);
    console.error(usage());
    return 1;
  }
  try {
    const summary = await exportEmbeddings({
      corpusPath: args.get("corpus")!,
      encoder: args.get("encoder")!,
      outPath: args.get("out")!,
      batchSize: args.has("batch") ? Number(args.get("batch")) : undefined,
      tokenLimit: args.has("token-limit") ? Number(args.get("token-limit")) : undefined,
    });
    console.error(
      `encoded ${summary.notes} notes (${summary.sentences} sentence vectors, dim ${summary.dim}) with ${summary.encoder}`,
    );
    return 0;
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 2;
  }
}

const invokedDirectly = process.argv[1] && import.meta.url.endsWith(process.argv[1].split("/").pop()!);
if (invokedDirectly) {
  main(process.argv.slice(2)).then((code) => {
    process.exitCode = code;
  });
}
