#!/usr/bin/env node
// Dev server: static files plus a same-origin proxy to the curation
// service, which speaks plain JSON with no cross-origin headers.
//
//   node server.js [--port 8600] [--api http://127.0.0.1:8350]
//
// Run `npm run build` first; the page loads dist/boot.js.

import http from 'node:http';
import { readFile } from 'node:fs/promises';
import path from 'node:path';
import { fileURLToPath } from 'node:url';

const here = path.dirname(fileURLToPath(import.meta.url));

const args = process.argv.slice(2);
function argValue(name, fallback) {
  const i = args.indexOf(name);
  return i >= 0 && i + 1 < args.length ? args[i + 1] : fallback;
}
const port = parseInt(argValue('--port', '8600'), 10);
const api = new URL(argValue('--api', 'http://127.0.0.1:8350'));

const TYPES = {
  '.html': 'text/html; charset=utf-8',
  '.js': 'text/javascript; charset=utf-8',
  '.css': 'text/css; charset=utf-8',
  '.map': 'application/json',
};

function isApiPath(p) {
  return p.startsWith('/runs') || p.startsWith('/tasks');
}

function proxy(req, res) {
  const out = http.request(
    {
      hostname: api.hostname,
      port: api.port,
      path: req.url,
      method: req.method,
      headers: { ...req.headers, host: api.host },
    },
    (upstream) => {
      res.writeHead(upstream.statusCode ?? 502, upstream.headers);
      upstream.pipe(res);
    },
  );
  out.on('error', (err) => {
    res.writeHead(502, { 'content-type': 'application/json' });
    res.end(JSON.stringify({ error: `upstream: ${err.message}` }));
  });
  req.pipe(out);
}

async function serveStatic(req, res) {
  const clean = path.normalize(new URL(req.url, 'http://x').pathname);
  const rel = clean === '/' ? 'index.html' : clean.replace(/^\/+/, '');
  const file = path.join(here, rel);
  if (!file.startsWith(here)) {
    res.writeHead(403);
    res.end('forbidden');
    return;
  }
  try {
    const body = await readFile(file);
    res.writeHead(200, { 'content-type': TYPES[path.extname(file)] ?? 'application/octet-stream' });
    res.end(body);
  } catch {
    res.writeHead(404);
    res.end('not found');
  }
}

const server = http.createServer((req, res) => {
  if (isApiPath(req.url ?? '/')) {
    proxy(req, res);
  } else {
    void serveStatic(req, res);
  }
});

server.listen(port, '127.0.0.1', () => {
  console.log(`review ui on http://127.0.0.1:${port} (api ${api.href})`);
});
