import assert from "node:assert/strict";
import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { test } from "node:test";

import { exportEmbeddings } from "../src/exporter.js";

function writeTinyCorpus(dir: string): string {
  const path = join(dir, "corpus.jsonl");
  const longSentence = Array.from({ length: 30 }, (_, i) => `tok${i}`).join(" ");
  const lines = [
    { note_id: "n1", text: "Pain controlled. Ambulating independently!", label: 1 },
    { note_id: "n2", text: "EMPTY", label: 0 },
    { note_id: "n3", text: longSentence, label: 0 },
  ];
  writeFileSync(path, lines.map((l) => JSON.stringify(l)).join("\n") + "\n");
  return path;
}

function parseJsonl(path: string): any[] {
  return readFileSync(path, "utf-8")
    .split("\n")
    .filter((l) => l.trim())
    .map((l) => JSON.parse(l));
}

test("export writes header and exactly one record per note, in order", async () => {
  const dir = mkdtempSync(join(tmpdir(), "embexp-"));
  const corpus = writeTinyCorpus(dir);
  const out = join(dir, "vecs.jsonl");
  const summary = await exportEmbeddings({
    corpusPath: corpus,
    encoder: "hash384",
    outPath: out,
    tokenLimit: 10,
  });
  assert.equal(summary.notes, 3);
  const [header, ...records] = parseJsonl(out);
  assert.deepEqual(header, { dim: 384, encoder: "hash384" });
  assert.deepEqual(
    records.map((r) => r.note_id),
    ["n1", "n2", "n3"],
  );
  for (const record of records) {
    for (const vec of record.vectors) {
      assert.equal(vec.length, 384);
    }
  }
});

test("sentence and chunk counts follow the splitting rules", async () => {
  const dir = mkdtempSync(join(tmpdir(), "embexp-"));
  const corpus = writeTinyCorpus(dir);
  const out = join(dir, "vecs.jsonl");
  await exportEmbeddings({ corpusPath: corpus, encoder: "hash384", outPath: out, tokenLimit: 10 });
  const [, n1, n2, n3] = parseJsonl(out);
  assert.equal(n1.vectors.length, 2); // two sentences
  assert.equal(n2.vectors.length, 1); // literal EMPTY is encoded as-is
  assert.equal(n3.vectors.length, 4); // 30 tokens, step 9: starts 0, 9, 18, 27
});

test("repeated runs agree exactly", async () => {
  const dir = mkdtempSync(join(tmpdir(), "embexp-"));
  const corpus = writeTinyCorpus(dir);
  const out1 = join(dir, "a.jsonl");
  const out2 = join(dir, "b.jsonl");
  await exportEmbeddings({ corpusPath: corpus, encoder: "hash384", outPath: out1 });
  await exportEmbeddings({ corpusPath: corpus, encoder: "hash384", outPath: out2 });
  assert.equal(readFileSync(out1, "utf-8"), readFileSync(out2, "utf-8"));
});

test("unknown encoder alias is rejected before any work", async () => {
  const dir = mkdtempSync(join(tmpdir(), "embexp-"));
  const corpus = writeTinyCorpus(dir);
  await assert.rejects(
    exportEmbeddings({ corpusPath: corpus, encoder: "bogus", outPath: join(dir, "x.jsonl") }),
    /unknown encoder/,
  );
});

test("empty corpus is rejected", async () => {
  const dir = mkdtempSync(join(tmpdir(), "embexp-"));
  const corpus = join(dir, "empty.jsonl");
  writeFileSync(corpus, "");
  await assert.rejects(
    exportEmbeddings({ corpusPath: corpus, encoder: "hash384", outPath: join(dir, "x.jsonl") }),
    /empty corpus/,
  );
});
