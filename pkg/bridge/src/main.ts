/**
 * Entry point: serve the caption/refine protocol over stdio (default) or TCP.
 *
 *   node dist/main.js                  # NDJSON over stdin/stdout
 *   node dist/main.js --listen :8321   # NDJSON per TCP connection
 *   node dist/main.js --disable caption
 *
 * Over stdio the process exits 0 when stdin reaches end-of-stream, after all
 * in-flight responses have been written.
 */

import net from "node:net";
import readline from "node:readline";
import { Session, SessionOptions, WriteLine } from "./session.js";

interface CliArgs {
  listen: string | null;
  disable: string[];
}

function parseArgs(argv: string[]): CliArgs {
  const args: CliArgs = { listen: null, disable: [] };
  for (let i = 0; i < argv.length; i++) {
    if (argv[i] === "--listen" && i + 1 < argv.length) {
      args.listen = argv[++i];
    } else if (argv[i] === "--disable" && i + 1 < argv.length) {
      args.disable.push(argv[++i]);
    } else {
      process.stderr.write(`unknown argument ${argv[i]}\n`);
      process.exit(2);
    }
  }
  return args;
}

function runSession(
  input: NodeJS.ReadableStream,
  write: WriteLine,
  options: SessionOptions,
  onClose: () => void,
): void {
  const session = new Session(write, options);
  session.hello();
  const lines = readline.createInterface({ input, crlfDelay: Infinity });
  const inFlight = new Set<Promise<void>>();
  lines.on("line", (line) => {
    const task = session.handleLine(line);
    inFlight.add(task);
    void task.finally(() => inFlight.delete(task));
  });
  lines.on("close", () => {
    void Promise.all(inFlight).then(onClose);
  });
}

function serveStdio(options: SessionOptions): void {
  runSession(
    process.stdin,
    (line) => process.stdout.write(line + "\n"),
    options,
    () => {
      // Let stdout flush and the event loop drain; exit code stays 0.
    },
  );
}

function serveTcp(endpoint: string, options: SessionOptions): void {
  const sep = endpoint.lastIndexOf(":");
  const host = sep > 0 ? endpoint.slice(0, sep) : "127.0.0.1";
  const port = parseInt(endpoint.slice(sep + 1), 10);
  if (!Number.isFinite(port)) {
    process.stderr.write(`bad endpoint ${endpoint}\n`);
    process.exit(2);
  }
  const server = net.createServer((socket) => {
    socket.on("error", () => socket.destroy());
    runSession(socket, (line) => socket.write(line + "\n"), options, () => socket.end());
  });
  server.listen(port, host, () => {
    const bound = server.address() as net.AddressInfo;
    process.stderr.write(`listening on ${bound.address}:${bound.port}\n`);
  });
}

const args = parseArgs(process.argv.slice(2));
const options: SessionOptions = { disable: args.disable };
if (args.listen !== null) {
  serveTcp(args.listen, options);
} else {
  serveStdio(options);
}
