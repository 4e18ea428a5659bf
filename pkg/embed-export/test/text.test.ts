import assert from "node:assert/strict";
import { test } from "node:test";

import { chunkTokens, sentenceToInputs, splitSentences } from "../src/text.js";

test("splitSentences splits on period, question, exclamation, newline", () => {
  const got = splitSentences("Pain controlled. Ambulating well!\nVitals stable? Yes");
  assert.deepEqual(got, ["Pain controlled", "Ambulating well", "Vitals stable", "Yes"]);
});

test("splitSentences keeps boundary-free text as one sentence", () => {
  assert.deepEqual(splitSentences("EMPTY"), ["EMPTY"]);
});

test("splitSentences drops empty fragments from repeated boundaries", () => {
  assert.deepEqual(splitSentences("one... two.."), ["one", "two"]);
});

test("chunkTokens windows 25 tokens at limit 10 as [0,10) [9,19) [18,25)", () => {
  const tokens = Array.from({ length: 25 }, (_, i) => `t${i}`);
  const windows = chunkTokens(tokens, 10);
  assert.equal(windows.length, 3);
  assert.deepEqual(windows[0], tokens.slice(0, 10));
  assert.deepEqual(windows[1], tokens.slice(9, 19));
  assert.deepEqual(windows[2], tokens.slice(18, 25));
});

test("chunkTokens keeps short input as one window", () => {
  const tokens = ["a", "b", "c"];
  assert.deepEqual(chunkTokens(tokens, 10), [tokens]);
});

test("chunkTokens covers every index", () => {
  for (const n of [1, 9, 10, 11, 57, 200]) {
    const tokens = Array.from({ length: n }, (_, i) => String(i));
    const seen = new Set<string>();
    for (const window of chunkTokens(tokens, 16)) {
      assert.ok(window.length <= 16);
      for (const t of window) seen.add(t);
    }
    assert.equal(seen.size, n);
  }
});

test("sentenceToInputs leaves short sentences intact and chunks long ones", () => {
  assert.deepEqual(sentenceToInputs("short sentence", 8), ["short sentence"]);
  const long = Array.from({ length: 25 }, (_, i) => `w${i}`).join(" ");
  const pieces = sentenceToInputs(long, 10);
  assert.equal(pieces.length, 3);
  assert.equal(pieces[0], Array.from({ length: 10 }, (_, i) => `w${i}`).join(" "));
});
