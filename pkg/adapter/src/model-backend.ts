import type { Backend } from "./backend.js";

export interface ModelBackendOptions {
  /** Checkpoint to load (any BERT-style masked-LM export works). */
  model?: string;
  /** How to pool the masked slot(s): mean over them or just the first. */
  pool?: "mean" | "first";
  /** Words kept on each side of the focus before subword truncation. */
  maxContextWords?: number;
  /** Weight dtype passed through to the model loader (e.g. "fp32", "q8"). */
  dtype?: string;
}

const DEFAULT_MODEL = "bert-large-uncased-whole-word-masking";
const TRANSFORMERS_MODULE = "@huggingface/transformers";

/**
 * Context encoder backed by a masked language model.
 *
 * The focus word arrives already replaced by the mask token; this backend
 * tokenizes the surrounding words into subwords, runs the encoder, and pools
 * the mask slot(s) from the second-to-last hidden layer. Long sentences are
 * truncated to a word window around the focus (declared in the handshake
 * metadata) so the subword sequence fits the model's position budget.
 *
 * The transformers dependency is optional and imported lazily: constructing
 * this backend on a machine without it (or without network access to fetch
 * weights) fails at load() with the underlying error, leaving the hash
 * backend available.
 */
export class ModelBackend implements Backend {
  readonly name: string;
  readonly dim: number;
  readonly maskToken: string;
  readonly metadata: Record<string, unknown>;

  private readonly tokenizer: any;
  private readonly model: any;
  private readonly TensorCtor: any;
  private readonly pool: "mean" | "first";
  private readonly maxContextWords: number;
  private readonly positionBudget: number;
  private readonly clsId: number | null;
  private readonly sepId: number | null;
  private readonly maskId: number;
  private readonly subwordCache = new Map<string, number[]>();

  private constructor(fields: {
    name: string;
    dim: number;
    maskToken: string;
    tokenizer: any;
    model: any;
    TensorCtor: any;
    pool: "mean" | "first";
    maxContextWords: number;
    positionBudget: number;
    clsId: number | null;
    sepId: number | null;
    maskId: number;
  }) {
    this.name = fields.name;
    this.dim = fields.dim;
    this.maskToken = fields.maskToken;
    this.tokenizer = fields.tokenizer;
    this.model = fields.model;
    this.TensorCtor = fields.TensorCtor;
    this.pool = fields.pool;
    this.maxContextWords = fields.maxContextWords;
    this.positionBudget = fields.positionBudget;
    this.clsId = fields.clsId;
    this.sepId = fields.sepId;
    this.maskId = fields.maskId;
    this.metadata = {
      backend: "model",
      model: fields.name,
      layer: "second_to_last",
      pool: fields.pool,
      truncation: `window:${fields.maxContextWords}`,
    };
  }

  static async load(options: ModelBackendOptions = {}): Promise<ModelBackend> {
    // Kept out of the static import graph so the dependency stays optional.
    const transformers: any = await import(TRANSFORMERS_MODULE);
    const modelName = options.model ?? DEFAULT_MODEL;
    const pool = options.pool ?? "mean";
    const maxContextWords = options.maxContextWords ?? 180;

    const tokenizer = await transformers.AutoTokenizer.from_pretrained(modelName);
    const loadOptions: Record<string, unknown> = { output_hidden_states: true };
    if (options.dtype !== undefined) {
      loadOptions.dtype = options.dtype;
    }
    const model = await transformers.AutoModel.from_pretrained(modelName, loadOptions);

    const hiddenSize = Number(model?.config?.hidden_size);
    if (!Number.isInteger(hiddenSize) || hiddenSize < 1) {
      throw new Error(`model "${modelName}" does not declare a hidden size`);
    }
    const maxPositions = Number(model?.config?.max_position_embeddings) || 512;

    const maskToken: string = tokenizer.mask_token ?? "[MASK]";
    const maskIds = encodeWord(tokenizer, maskToken);
    if (maskIds.length !== 1) {
      throw new Error(`tokenizer does not map ${JSON.stringify(maskToken)} to a single id`);
    }

    // Empty input with specials enabled reveals the [CLS]/[SEP] frame, if any.
    const frame: number[] = Array.from(
      tokenizer.encode("", null, { add_special_tokens: true }) ?? [],
      Number,
    );

    return new ModelBackend({
      name: modelName,
      dim: hiddenSize,
      maskToken,
      tokenizer,
      model,
      TensorCtor: transformers.Tensor,
      pool,
      maxContextWords,
      positionBudget: maxPositions - frame.length,
      clsId: frame.length === 2 ? frame[0] : null,
      sepId: frame.length === 2 ? frame[1] : null,
      maskId: maskIds[0],
    });
  }

  async encode(tokens: readonly string[], position: number): Promise<number[]> {
    let lo = Math.max(0, position - this.maxContextWords);
    let hi = Math.min(tokens.length - 1, position + this.maxContextWords);

    const pieces = new Map<number, number[]>();
    const piecesFor = (index: number): number[] => {
      let ids = pieces.get(index);
      if (ids === undefined) {
        const word = tokens[index];
        ids = word === this.maskToken ? [this.maskId] : this.subwords(word);
        pieces.set(index, ids);
      }
      return ids;
    };

    let total = 0;
    for (let j = lo; j <= hi; j++) {
      total += piecesFor(j).length;
    }
    // Drop outermost words from the wider side until the subwords fit.
    while (total > this.positionBudget && (lo < position || hi > position)) {
      if (position - lo >= hi - position) {
        total -= piecesFor(lo).length;
        lo++;
      } else {
        total -= piecesFor(hi).length;
        hi--;
      }
    }

    const ids: number[] = [];
    if (this.clsId !== null) {
      ids.push(this.clsId);
    }
    let maskStart = -1;
    let maskLength = 0;
    for (let j = lo; j <= hi; j++) {
      const wordIds = piecesFor(j);
      if (j === position) {
        maskStart = ids.length;
        maskLength = wordIds.length;
      }
      ids.push(...wordIds);
    }
    if (this.sepId !== null) {
      ids.push(this.sepId);
    }
    if (maskStart < 0 || maskLength === 0) {
      throw new Error(`focus word at position ${position} produced no subword slots`);
    }

    const layer = await this.secondToLastLayer(ids);
    const [, seqLen, hidden] = layer.dims as number[];
    if (hidden !== this.dim || seqLen !== ids.length) {
      throw new Error(
        `model returned shape [1, ${seqLen}, ${hidden}], expected [1, ${ids.length}, ${this.dim}]`,
      );
    }

    const data = layer.data as Float32Array | Float64Array;
    const vector = new Array<number>(this.dim).fill(0);
    const slots = this.pool === "first" ? 1 : maskLength;
    for (let s = 0; s < slots; s++) {
      const offset = (maskStart + s) * this.dim;
      for (let d = 0; d < this.dim; d++) {
        vector[d] += data[offset + d];
      }
    }
    if (slots > 1) {
      for (let d = 0; d < this.dim; d++) {
        vector[d] /= slots;
      }
    }
    return vector;
  }

  async close(): Promise<void> {
    await this.model?.dispose?.();
  }

  private subwords(word: string): number[] {
    let ids = this.subwordCache.get(word);
    if (ids === undefined) {
      ids = encodeWord(this.tokenizer, word);
      if (ids.length === 0) {
        // Unknown-to-the-tokenizer words still need a slot.
        ids = [this.maskId];
      }
      this.subwordCache.set(word, ids);
    }
    return ids;
  }

  private async secondToLastLayer(ids: number[]): Promise<any> {
    const input = new this.TensorCtor(
      "int64",
      BigInt64Array.from(ids, (id) => BigInt(id)),
      [1, ids.length],
    );
    const ones = new this.TensorCtor(
      "int64",
      BigInt64Array.from(ids, () => 1n),
      [1, ids.length],
    );
    const output = await this.model({ input_ids: input, attention_mask: ones });

    let layers: any[] | undefined;
    if (Array.isArray(output?.hidden_states)) {
      layers = output.hidden_states;
    } else {
      // Some exports surface each layer as a separate "hidden_states.N" output.
      const collected: Array<[number, any]> = [];
      for (const [key, value] of Object.entries(output ?? {})) {
        const match = /^hidden_states\.(\d+)$/.exec(key);
        if (match) {
          collected.push([Number(match[1]), value]);
        }
      }
      if (collected.length > 0) {
        collected.sort((a, b) => a[0] - b[0]);
        layers = collected.map(([, value]) => value);
      }
    }
    if (layers === undefined || layers.length < 2) {
      throw new Error(
        "model output does not expose per-layer hidden states; " +
          "re-export the checkpoint with output_hidden_states enabled",
      );
    }
    return layers[layers.length - 2];
  }
}

function encodeWord(tokenizer: any, word: string): number[] {
  return Array.from(tokenizer.encode(word, null, { add_special_tokens: false }) ?? [], Number);
}
