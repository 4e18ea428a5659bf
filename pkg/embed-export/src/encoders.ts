/**
 * Encoder backends behind one interface.
 *
 * Short aliases map to pinned upstream model identifiers so callers never
 * see ecosystem-specific names. The `transformers` backend runs a real
 * pretrained sentence encoder via transformers.js (mean-pooled, normalized)
 * and needs the model weights locally cached or downloadable; the `hash`
 * backend is a fully offline, deterministic stand-in used for tests and
 * plumbing work, built from per-token seeded pseudo-random unit vectors.
 */

export interface Encoder {
  readonly dim: number;
  encode(texts: string[]): Promise<number[][]>;
}

export interface EncoderSpec {
  backend: "transformers" | "hash";
  dim: number;
  tokenLimit: number;
  model?: string;
}

export const ENCODER_MANIFEST: Record<string, EncoderSpec> = {
  minilm: {
    backend: "transformers",
    model: "Xenova/all-MiniLM-L6-v2",
    dim: 384,
    tokenLimit: 512,
  },
  clinicalbert: {
    backend: "transformers",
    model: "Xenova/Bio_ClinicalBERT",
    dim: 768,
    tokenLimit: 512,
  },
  hash384: {
    backend: "hash",
    dim: 384,
    tokenLimit: 512,
  },
};

export function encoderSpec(alias: string): EncoderSpec {
  const spec = ENCODER_MANIFEST[alias];
  if (!spec) {
    const known = Object.keys(ENCODER_MANIFEST).join(", ");
    throw new Error(`unknown encoder "${alias}" (supported: ${known})`);
  }
  return spec;
}

function fnv1a(text: string): number {
  let hash = 0x811c9dc5;
  for (let i = 0; i < text.length; i++) {
    hash ^= text.charCodeAt(i);
    hash = Math.imul(hash, 0x01000193) >>> 0;
  }
  return hash >>> 0;
}

function mulberry32(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export class HashEncoder implements Encoder {
  readonly dim: number;
  private readonly cache = new Map<string, Float64Array>();

  constructor(dim: number) {
    if (dim < 1) throw new Error("dim must be positive");
    this.dim = dim;
  }

  private tokenVector(token: string): Float64Array {
    let vec = this.cache.get(token);
    if (vec) return vec;
    const next = mulberry32(fnv1a(token));
    vec = new Float64Array(this.dim);
    let norm = 0;
    for (let i = 0; i < this.dim; i++) {
      vec[i] = next() * 2 - 1;
      norm += vec[i] * vec[i];
    }
    norm = Math.sqrt(norm) || 1;
    for (let i = 0; i < this.dim; i++) vec[i] /= norm;
    this.cache.set(token, vec);
    return vec;
  }

  async encode(texts: string[]): Promise<number[][]> {
    return texts.map((text) => {
      const tokens = text.toLowerCase().split(/\s+/).filter((t) => t.length > 0);
      const out = new Float64Array(this.dim);
      for (const token of tokens.length > 0 ? tokens : [""]) {
        const tv = this.tokenVector(token);
        for (let i = 0; i < this.dim; i++) out[i] += tv[i];
      }
      let norm = 0;
      for (let i = 0; i < this.dim; i++) norm += out[i] * out[i];
      norm = Math.sqrt(norm) || 1;
      return Array.from(out, (x) => x / norm);
    });
  }
}

type FeaturePipeline = (
  texts: string[],
  options: { pooling: "mean"; normalize: boolean },
) => Promise<{ data: Float32Array; dims: number[] }>;

export class TransformersEncoder implements Encoder {
  readonly dim: number;
  private readonly pipe: FeaturePipeline;

  private constructor(pipe: FeaturePipeline, dim: number) {
    this.pipe = pipe;
    this.dim = dim;
  }

  /** Load the pinned model; rejects with an encoder-load error offline. */
  static async load(spec: EncoderSpec): Promise<TransformersEncoder> {
    if (!spec.model) throw new Error("transformers backend requires a model id");
    let pipelineFactory: (task: string, model: string) => Promise<FeaturePipeline>;
    try {
      // optionalDependency: resolve at runtime only
      const moduleId = "@xenova/transformers";
      const mod = await import(moduleId);
      pipelineFactory = mod.pipeline as unknown as typeof pipelineFactory;
    } catch (err) {
      throw new Error(
        `encoder load failure: @xenova/transformers is not installed (${(err as Error).message})`,
      );
    }
    try {
      const pipe = await pipelineFactory("feature-extraction", spec.model);
      return new TransformersEncoder(pipe, spec.dim);
    } catch (err) {
      throw new Error(`encoder load failure for ${spec.model}: ${(err as Error).message}`);
    }
  }

  async encode(texts: string[]): Promise<number[][]> {
    const output = await this.pipe(texts, { pooling: "mean", normalize: true });
    const [rows, dim] = output.dims.length === 2 ? output.dims : [1, output.dims[0]];
    if (dim !== this.dim) {
      throw new Error(`encoder produced dimension ${dim}, expected ${this.dim}`);
    }
    const vectors: number[][] = [];
    for (let r = 0; r < rows; r++) {
      vectors.push(Array.from(output.data.slice(r * dim, (r + 1) * dim)));
    }
    return vectors;
  }
}

export async function loadEncoder(alias: string): Promise<Encoder> {
  const spec = encoderSpec(alias);
  if (spec.backend === "hash") {
    return new HashEncoder(spec.dim);
  }
  return TransformersEncoder.load(spec);
}
