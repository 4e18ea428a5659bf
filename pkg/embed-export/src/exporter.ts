import { createWriteStream } from "node:fs";
import { once } from "node:events";

import { loadCorpus } from "./corpus.js";
import { Encoder, encoderSpec, loadEncoder } from "./encoders.js";
import { sentenceToInputs, splitSentences } from "./text.js";

export interface ExportConfig {
  corpusPath: string;
  encoder: string;
  outPath: string;
  batchSize?: number;
  tokenLimit?: number;
}

export interface ExportSummary {
  notes: number;
  sentences: number;
  dim: number;
  encoder: string;
}

/**
 * Encode every note of the corpus and write the embeddings JSONL:
 * header {"dim", "encoder"}, then one {"note_id", "vectors"} record per
 * note in corpus order. Notes are split into sentences; sentences past
 * the token limit are chunked with 10% overlap and each chunk becomes an
 * additional vector.
 */
export async function exportEmbeddings(
  config: ExportConfig,
  encoderOverride?: Encoder,
): Promise<ExportSummary> {
  const spec = encoderSpec(config.encoder);
  const tokenLimit = config.tokenLimit ?? spec.tokenLimit;
  const batchSize = config.batchSize ?? 32;
  if (batchSize < 1) throw new Error("batch size must be >= 1");

  const notes = loadCorpus(config.corpusPath);
  const encoder = encoderOverride ?? (await loadEncoder(config.encoder));

  const inputs: string[] = [];
  const spans: Array<{ noteId: string; count: number }> = [];
  for (const note of notes) {
    let count = 0;
    for (const sentence of splitSentences(note.text)) {
      for (const piece of sentenceToInputs(sentence, tokenLimit)) {
        inputs.push(piece);
        count++;
      }
    }
    spans.push({ noteId: note.noteId, count });
  }

  const vectors: number[][] = [];
  for (let i = 0; i < inputs.length; i += batchSize) {
    const batch = await encoder.encode(inputs.slice(i, i + batchSize));
    for (const vec of batch) {
      if (vec.length !== encoder.dim) {
        throw new Error(`encoder returned length ${vec.length}, expected ${encoder.dim}`);
      }
      vectors.push(vec);
    }
  }
  if (vectors.length !== inputs.length) {
    throw new Error(`encoder returned ${vectors.length} vectors for ${inputs.length} inputs`);
  }

  const stream = createWriteStream(config.outPath, { encoding: "utf-8" });
  const write = (line: string) => {
    if (!stream.write(line + "\n")) {
      return once(stream, "drain");
    }
    return Promise.resolve();
  };
  await write(JSON.stringify({ dim: encoder.dim, encoder: config.encoder }));
  let offset = 0;
  for (const span of spans) {
    const noteVectors = vectors.slice(offset, offset + span.count);
    offset += span.count;
    await write(JSON.stringify({ note_id: span.noteId, vectors: noteVectors }));
  }
  stream.end();
  await once(stream, "close");

  return { notes: notes.length, sentences: inputs.length, dim: encoder.dim, encoder: config.encoder };
}
