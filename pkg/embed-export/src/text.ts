/**
 * Sentence splitting and token-window chunking.
 *
 * Sentences split on period / question mark / exclamation mark / newline
 * boundaries. Sentences longer than the encoder token limit are chunked
 * into windows with 10% overlap: step = limit - ceil(0.1 * limit), windows
 * start at 0, step, 2*step, ... and generation stops once a window reaches
 * the final token. Each chunk is encoded as its own sentence.
 */

export function splitSentences(text: string): string[] {
  const parts = text
    .split(/[.?!\n]+/)
    .map((s) => s.trim())
    .filter((s) => s.length > 0);
  return parts.length > 0 ? parts : [text.trim() || text];
}

export function chunkTokens(tokens: string[], limit: number): string[][] {
  if (limit < 2) {
    throw new Error(`token limit must be >= 2, got ${limit}`);
  }
  if (tokens.length === 0) {
    return [[]];
  }
  const step = limit - Math.ceil(0.1 * limit);
  const windows: string[][] = [];
  let start = 0;
  for (;;) {
    const end = Math.min(start + limit, tokens.length);
    windows.push(tokens.slice(start, end));
    if (end >= tokens.length) {
      return windows;
    }
    start += step;
  }
}

/** Split one sentence into encoder inputs, chunking past the token limit. */
export function sentenceToInputs(sentence: string, tokenLimit: number): string[] {
  const tokens = sentence.split(/\s+/).filter((t) => t.length > 0);
  if (tokens.length <= tokenLimit) {
    return [sentence];
  }
  return chunkTokens(tokens, tokenLimit).map((w) => w.join(" "));
}
