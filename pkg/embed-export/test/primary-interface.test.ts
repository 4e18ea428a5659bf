import assert from "node:assert/strict";
import { spawnSync } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { test } from "node:test";

import { exportEmbeddings } from "../src/exporter.js";

function primaryAvailable(): boolean {
  const probe = spawnSync("python3", ["-c", "import notebench"], { encoding: "utf-8" });
  return probe.status === 0;
}

// The exporter's only contract with the classifier toolkit is the
// embeddings JSONL; validate a real export through its loader via the CLI.
test("export output passes the consumer-side embeddings validation", async (t) => {
  if (!primaryAvailable()) {
    t.skip("notebench (the consumer package) is not installed");
    return;
  }
  const dir = mkdtempSync(join(tmpdir(), "embexp-"));
  const corpus = join(dir, "corpus.jsonl");
  const lines = [
    { note_id: "n1", text: "Pain controlled. Ambulating independently today!", label: 1 },
    { note_id: "n2", text: "Febrile overnight. Wound drainage noted.", label: 0 },
    { note_id: "n3", text: "EMPTY", label: 0 },
  ];
  writeFileSync(corpus, lines.map((l) => JSON.stringify(l)).join("\n") + "\n");
  const out = join(dir, "vecs.jsonl");
  await exportEmbeddings({ corpusPath: corpus, encoder: "hash384", outPath: out });

  const result = spawnSync(
    "python3",
    ["-m", "notebench.cli", "featurize", "--corpus", corpus, "--embeddings", out],
    { encoding: "utf-8" },
  );
  assert.equal(result.status, 0, result.stderr);
  assert.match(result.stderr, /embeddings ok: dim=384/);
});
