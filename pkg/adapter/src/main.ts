#!/usr/bin/env node
import process from "node:process";

import type { Backend } from "./backend.js";
import { HashBackend } from "./hash-backend.js";
import { ModelBackend } from "./model-backend.js";
import { ProtocolServer } from "./server.js";

const USAGE = `usage: masked-context-server [options]

Serve masked-context embeddings over the line-delimited JSON protocol.

transport (default --stdio):
  --stdio                 answer requests on stdin/stdout
  --listen HOST:PORT      accept TCP connections

backend (default --backend hash):
  --backend hash|model    deterministic hash vectors, or a masked LM
  --dim N                 hash backend: vector size (default 1024)
  --window N              hash backend: context words per side (default 5)
  --seed N                hash backend: variant seed (default 0)
  --model NAME            model backend: checkpoint to load
  --pool mean|first       model backend: mask-slot pooling (default mean)

  --help                  show this message
`;

interface Options {
  transport: { kind: "stdio" } | { kind: "tcp"; host: string; port: number };
  backend: "hash" | "model";
  dim: number;
  window: number;
  seed: number;
  model?: string;
  pool: "mean" | "first";
}

function fail(message: string): never {
  process.stderr.write(`error: ${message}\n`);
  process.exit(1);
}

function parseArgs(argv: string[]): Options {
  const options: Options = {
    transport: { kind: "stdio" },
    backend: "hash",
    dim: 1024,
    window: 5,
    seed: 0,
    pool: "mean",
  };
  let i = 0;
  const value = (flag: string): string => {
    i++;
    if (i >= argv.length) {
      fail(`${flag} needs a value`);
    }
    return argv[i];
  };
  const integer = (flag: string, minimum: number): number => {
    const raw = value(flag);
    const parsed = Number(raw);
    if (!Number.isInteger(parsed) || parsed < minimum) {
      fail(`${flag} needs an integer >= ${minimum}, got ${JSON.stringify(raw)}`);
    }
    return parsed;
  };
  for (; i < argv.length; i++) {
    const flag = argv[i];
    switch (flag) {
      case "--help":
      case "-h":
        process.stdout.write(USAGE);
        process.exit(0);
        break;
      case "--stdio":
        options.transport = { kind: "stdio" };
        break;
      case "--listen": {
        const address = value(flag);
        const colon = address.lastIndexOf(":");
        const port = Number(address.slice(colon + 1));
        if (colon <= 0 || !Number.isInteger(port) || port < 0 || port > 65535) {
          fail(`--listen needs HOST:PORT, got ${JSON.stringify(address)}`);
        }
        options.transport = { kind: "tcp", host: address.slice(0, colon), port };
        break;
      }
      case "--backend": {
        const kind = value(flag);
        if (kind !== "hash" && kind !== "model") {
          fail(`--backend must be "hash" or "model", got ${JSON.stringify(kind)}`);
        }
        options.backend = kind;
        break;
      }
      case "--dim":
        options.dim = integer(flag, 1);
        break;
      case "--window":
        options.window = integer(flag, 1);
        break;
      case "--seed":
        options.seed = integer(flag, 0);
        break;
      case "--model":
        options.model = value(flag);
        break;
      case "--pool": {
        const pool = value(flag);
        if (pool !== "mean" && pool !== "first") {
          fail(`--pool must be "mean" or "first", got ${JSON.stringify(pool)}`);
        }
        options.pool = pool;
        break;
      }
      default:
        fail(`unknown option ${JSON.stringify(flag)}; try --help`);
    }
  }
  return options;
}

async function makeBackend(options: Options): Promise<Backend> {
  if (options.backend === "hash") {
    return new HashBackend(options.dim, options.window, options.seed);
  }
  try {
    return await ModelBackend.load({ model: options.model, pool: options.pool });
  } catch (err) {
    fail(`could not load model backend: ${(err as Error).message}`);
  }
}

async function main(): Promise<void> {
  const options = parseArgs(process.argv.slice(2));
  const backend = await makeBackend(options);
  const server = new ProtocolServer(backend);

  if (options.transport.kind === "tcp") {
    const { host, port } = options.transport;
    const tcp = await server.serveTcp(host, port).catch((err: Error) => {
      fail(`could not listen on ${host}:${port}: ${err.message}`);
    });
    const bound = tcp.address();
    const boundPort = typeof bound === "object" && bound !== null ? bound.port : port;
    // Status goes to stderr; stdout stays free in case of redirection.
    process.stderr.write(`listening on ${host}:${boundPort} (${backend.name})\n`);
    const stop = (): void => {
      tcp.close();
      void backend.close?.();
    };
    process.once("SIGINT", stop);
    process.once("SIGTERM", stop);
    return;
  }

  await server.serveStream(process.stdin, process.stdout);
  await backend.close?.();
}

main().catch((err: Error) => {
  fail(err.message);
});
