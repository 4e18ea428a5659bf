import assert from "node:assert/strict";
import { test } from "node:test";

import { ENCODER_MANIFEST, HashEncoder, TransformersEncoder, encoderSpec } from "../src/encoders.js";

test("manifest pins minilm at 384 dimensions", () => {
  assert.equal(ENCODER_MANIFEST["minilm"].dim, 384);
  assert.equal(ENCODER_MANIFEST["minilm"].model, "Xenova/all-MiniLM-L6-v2");
  assert.equal(ENCODER_MANIFEST["minilm"].tokenLimit, 512);
});

test("manifest pins clinicalbert at 768 dimensions with the BERT token limit", () => {
  assert.equal(ENCODER_MANIFEST["clinicalbert"].dim, 768);
  assert.equal(ENCODER_MANIFEST["clinicalbert"].tokenLimit, 512);
});

test("unknown alias is rejected with the supported set", () => {
  assert.throws(() => encoderSpec("word2vec"), /supported:/);
});

test("hash encoder is deterministic across instances", async () => {
  const a = new HashEncoder(64);
  const b = new HashEncoder(64);
  const texts = ["pain controlled oral", "wound drainage noted", "EMPTY"];
  const va = await a.encode(texts);
  const vb = await b.encode(texts);
  assert.deepEqual(va, vb);
});

test("hash encoder emits unit-norm vectors of the configured dimension", async () => {
  const enc = new HashEncoder(384);
  const [vec] = await enc.encode(["ambulating independently today"]);
  assert.equal(vec.length, 384);
  const norm = Math.sqrt(vec.reduce((s, x) => s + x * x, 0));
  assert.ok(Math.abs(norm - 1) < 1e-9);
});

test("hash encoder separates different texts", async () => {
  const enc = new HashEncoder(128);
  const [a, b] = await enc.encode(["febrile overnight", "tolerating solids"]);
  const dot = a.reduce((s, x, i) => s + x * b[i], 0);
  assert.ok(dot < 0.9);
});

// Needs the pinned model weights (network or local cache); skipped offline.
test("minilm produces 384-dim unit vectors", async (t) => {
  let enc: TransformersEncoder;
  try {
    enc = await TransformersEncoder.load(ENCODER_MANIFEST["minilm"]);
  } catch (err) {
    t.skip(`encoder unavailable: ${(err as Error).message}`);
    return;
  }
  const [vec] = await enc.encode(["patient ambulating independently"]);
  assert.equal(vec.length, 384);
  const norm = Math.sqrt(vec.reduce((s, x) => s + x * x, 0));
  assert.ok(Math.abs(norm - 1) < 1e-3);
});
