import { z } from "zod";

// One JSON object per line. The first server line is the handshake; after
// that every client line is a request and every server line a response.

export const requestSchema = z.object({
  tokens: z.array(z.string().min(1)).min(1),
  position: z.number().int().nonnegative(),
});

export type EmbedRequest = z.infer<typeof requestSchema>;

export type EmbedResponse = { vector: number[] } | { error: string };

export interface Handshake {
  dim: number;
  name: string;
  [key: string]: unknown;
}

export function encodeLine(message: object): string {
  return JSON.stringify(message) + "\n";
}

/** Split a byte stream into newline-delimited records. */
export async function* lines(
  stream: AsyncIterable<Buffer | string>,
): AsyncGenerator<string> {
  let buffer = "";
  for await (const chunk of stream) {
    buffer += typeof chunk === "string" ? chunk : chunk.toString("utf-8");
    let index: number;
    while ((index = buffer.indexOf("\n")) >= 0) {
      yield buffer.slice(0, index);
      buffer = buffer.slice(index + 1);
    }
  }
  if (buffer.length > 0) {
    yield buffer;
  }
}
