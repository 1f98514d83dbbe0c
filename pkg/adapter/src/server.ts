import { createServer, type Server, type Socket } from "node:net";
import type { Writable } from "node:stream";

import type { Backend } from "./backend.js";
import { maskWord } from "./masking.js";
import { encodeLine, lines, requestSchema, type Handshake } from "./protocol.js";

/**
 * Speaks the line-delimited embedding protocol for one backend.
 *
 * Each connection gets the handshake line first, then one response line per
 * request line, in order. A connection handles one request at a time, and
 * backend access is additionally serialized across connections, so a single
 * model can safely serve several clients.
 */
export class ProtocolServer {
  private readonly backend: Backend;
  private queue: Promise<unknown> = Promise.resolve();

  constructor(backend: Backend) {
    this.backend = backend;
  }

  handshake(): string {
    const message: Handshake = {
      dim: this.backend.dim,
      name: this.backend.name,
      ...this.backend.metadata,
    };
    return encodeLine(message);
  }

  /** Turn one raw request line into one response line. Never throws. */
  async handle(rawLine: string): Promise<string> {
    let parsed: unknown;
    try {
      parsed = JSON.parse(rawLine);
    } catch {
      return encodeLine({ error: "request is not valid JSON" });
    }
    const result = requestSchema.safeParse(parsed);
    if (!result.success) {
      const issue = result.error.issues[0];
      const where = issue === undefined || issue.path.length === 0
        ? ""
        : ` at ${issue.path.join(".")}`;
      return encodeLine({ error: `bad request${where}: ${issue?.message ?? "invalid"}` });
    }
    const { tokens, position } = result.data;
    if (position >= tokens.length) {
      return encodeLine({
        error: `position ${position} out of range for ${tokens.length} tokens`,
      });
    }
    try {
      const masked = maskWord(tokens, position, this.backend.maskToken);
      const vector = await this.serialize(() => this.backend.encode(masked, position));
      return encodeLine({ vector });
    } catch (err) {
      return encodeLine({ error: `encode failed: ${(err as Error).message}` });
    }
  }

  /** Write the handshake, then answer request lines until the input ends. */
  async serveStream(
    input: AsyncIterable<Buffer | string>,
    output: Writable,
  ): Promise<void> {
    output.write(this.handshake());
    for await (const line of lines(input)) {
      if (line.trim() === "") {
        continue;
      }
      output.write(await this.handle(line));
    }
  }

  /** Accept protocol connections on a TCP socket. Resolves once listening. */
  serveTcp(host: string, port: number): Promise<Server> {
    const server = createServer((socket: Socket) => {
      socket.on("error", () => socket.destroy());
      this.serveStream(socket, socket)
        .then(() => socket.end())
        .catch(() => socket.destroy());
    });
    return new Promise((resolve, reject) => {
      server.once("error", reject);
      server.listen(port, host, () => {
        server.removeListener("error", reject);
        resolve(server);
      });
    });
  }

  private serialize<T>(task: () => Promise<T>): Promise<T> {
    const next = this.queue.then(task);
    this.queue = next.catch(() => undefined);
    return next;
  }
}
