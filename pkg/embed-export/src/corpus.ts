import { readFileSync } from "node:fs";

export interface CorpusNote {
  noteId: string;
  text: string;
  label: 0 | 1;
}

/** Read a labeled-note corpus: JSONL with note_id / text / label per line. */
export function loadCorpus(path: string): CorpusNote[] {
  const raw = readFileSync(path, "utf-8");
  const notes: CorpusNote[] = [];
  const seen = new Set<string>();
  const lines = raw.split("\n");
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i].trim();
    if (!line) continue;
    let record: unknown;
    try {
      record = JSON.parse(line);
    } catch (err) {
      throw new Error(`${path}:${i + 1}: invalid JSON: ${(err as Error).message}`);
    }
    const obj = record as Record<string, unknown>;
    const noteId = obj["note_id"];
    const text = obj["text"];
    const label = obj["label"];
    if (typeof noteId !== "string" || noteId.length === 0) {
      throw new Error(`${path}:${i + 1}: note_id must be a nonempty string`);
    }
    if (typeof text !== "string") {
      throw new Error(`${path}:${i + 1}: text must be a string`);
    }
    if (label !== 0 && label !== 1) {
      throw new Error(`${path}:${i + 1}: label must be 0 or 1`);
    }
    if (seen.has(noteId)) {
      throw new Error(`${path}:${i + 1}: duplicate note_id ${noteId}`);
    }
    seen.add(noteId);
    notes.push({ noteId, text, label });
  }
  if (notes.length === 0) {
    throw new Error(`${path}: empty corpus`);
  }
  return notes;
}
