// 2D coordinate assignment for preview drawings. Rings are drawn as
// regular polygons grown off shared edges; open chains zigzag at 120
// degrees. Output is unitless with bond length 1; the renderer scales.
//
// The ring set is one shortest cycle per bond (deduplicated), which is
// enough to draw fused bicyclics sensibly. Bridged cages will come out
// distorted; previews fall back to the server image in that case anyway.

import type { MolGraph } from './smiles.js';
import { adjacency } from './smiles.js';

export interface Point {
  x: number;
  y: number;
}

const MAX_RING = 9;
const CLASH = 0.45; // minimum separation before a chain spot is rejected

/** Smallest cycle through each bond, deduplicated, largest first. */
export function ringSet(g: MolGraph): number[][] {
  const adj = adjacency(g);
  const seen = new Set<string>();
  const rings: number[][] = [];
  for (let e = 0; e < g.bonds.length; e++) {
    const { a, b } = g.bonds[e];
    // BFS from a to b with the bond itself off limits; finding a path
    // means bond e lies on a cycle, and path + bond is the smallest one
    const parent = new Map<number, number>();
    parent.set(a, -1);
    const queue = [a];
    let found = false;
    while (queue.length > 0 && !found) {
      const u = queue.shift()!;
      for (const v of adj[u]) {
        if (u === a && v === b) continue;
        if (u === b && v === a) continue;
        if (parent.has(v)) continue;
        parent.set(v, u);
        if (v === b) {
          found = true;
          break;
        }
        queue.push(v);
      }
    }
    if (!found) continue;
    const path: number[] = [];
    for (let at = b; at !== -1; at = parent.get(at)!) path.push(at);
    if (path.length > MAX_RING) continue;
    const key = [...path].sort((x, y) => x - y).join(',');
    if (seen.has(key)) continue;
    seen.add(key);
    rings.push(path.reverse()); // cycle order a..b, closed by bond e
  }
  rings.sort((r, s) => s.length - r.length);
  return rings;
}

function polygonRadius(n: number): number {
  return 0.5 / Math.sin(Math.PI / n);
}

export interface LayoutResult {
  coords: Point[];
  rings: number[][];
}

export function layoutGraph(g: MolGraph): LayoutResult {
  const n = g.atoms.length;
  const adj = adjacency(g);
  const rings = ringSet(g);
  const coords: (Point | null)[] = new Array(n).fill(null);
  const turn: number[] = new Array(n).fill(1); // zigzag direction per atom
  const ringPlaced: boolean[] = rings.map(() => false);
  const ringsAt: number[][] = new Array(n).fill(null).map(() => []);
  rings.forEach((ring, idx) => {
    for (const a of ring) ringsAt[a].push(idx);
  });

  const placed: number[] = [];
  const put = (i: number, p: Point) => {
    coords[i] = { x: p.x, y: p.y };
    placed.push(i);
  };

  const centroidOfPlaced = (): Point => {
    let x = 0;
    let y = 0;
    for (const i of placed) {
      x += coords[i]!.x;
      y += coords[i]!.y;
    }
    const k = Math.max(placed.length, 1);
    return { x: x / k, y: y / k };
  };

  const free = (p: Point): boolean => {
    for (const i of placed) {
      const dx = coords[i]!.x - p.x;
      const dy = coords[i]!.y - p.y;
      if (dx * dx + dy * dy < CLASH * CLASH) return false;
    }
    return true;
  };

  // walk `ring` as a polygon with vertices `anchor` then `next` already
  // fixed; the remaining vertices go on the circumcircle on the side of
  // the anchor edge away from everything placed so far
  const placeRingOnEdge = (ring: number[], anchor: number, next: number) => {
    const m = ring.length;
    let order = [...ring];
    const ai = order.indexOf(anchor);
    order = order.slice(ai).concat(order.slice(0, ai));
    if (order[1] !== next) {
      order = [order[0], ...order.slice(1).reverse()];
    }
    const pa = coords[anchor]!;
    const pb = coords[next]!;
    const mid = { x: (pa.x + pb.x) / 2, y: (pa.y + pb.y) / 2 };
    const ex = pb.x - pa.x;
    const ey = pb.y - pa.y;
    const elen = Math.hypot(ex, ey) || 1;
    const h = 0.5 / Math.tan(Math.PI / m);
    const c1 = { x: mid.x + (-ey / elen) * h, y: mid.y + (ex / elen) * h };
    const c2 = { x: mid.x + (ey / elen) * h, y: mid.y + (-ex / elen) * h };
    const com = centroidOfPlaced();
    const d1 = Math.hypot(c1.x - com.x, c1.y - com.y);
    const d2 = Math.hypot(c2.x - com.x, c2.y - com.y);
    const c = d1 >= d2 ? c1 : c2;
    const r = polygonRadius(m);
    const start = Math.atan2(pa.y - c.y, pa.x - c.x);
    const toNext = Math.atan2(pb.y - c.y, pb.x - c.x);
    let step = (2 * Math.PI) / m;
    const diff = Math.atan2(Math.sin(toNext - start), Math.cos(toNext - start));
    if (diff < 0) step = -step;
    order.forEach((atomIdx, k) => {
      if (coords[atomIdx] !== null) return;
      const angle = start + step * k;
      put(atomIdx, { x: c.x + r * Math.cos(angle), y: c.y + r * Math.sin(angle) });
    });
  };

  // only `anchor` is fixed: hang the polygon off it, pointing away from
  // the anchor's placed neighbors
  const placeRingOnVertex = (ring: number[], anchor: number) => {
    const m = ring.length;
    let order = [...ring];
    const ai = order.indexOf(anchor);
    order = order.slice(ai).concat(order.slice(0, ai));
    const pa = coords[anchor]!;
    let dx = 0;
    let dy = 0;
    for (const v of adj[anchor]) {
      if (coords[v] !== null) {
        dx += coords[v]!.x - pa.x;
        dy += coords[v]!.y - pa.y;
      }
    }
    const len = Math.hypot(dx, dy);
    const away = len > 1e-9 ? { x: -dx / len, y: -dy / len } : { x: 1, y: 0 };
    const r = polygonRadius(m);
    const c = { x: pa.x + away.x * r, y: pa.y + away.y * r };
    const start = Math.atan2(pa.y - c.y, pa.x - c.x);
    const step = (2 * Math.PI) / m;
    order.forEach((atomIdx, k) => {
      if (coords[atomIdx] !== null) return;
      const angle = start + step * k;
      put(atomIdx, { x: c.x + r * Math.cos(angle), y: c.y + r * Math.sin(angle) });
    });
  };

  const tryPlaceRingsAt = (u: number) => {
    for (const ri of ringsAt[u]) {
      if (ringPlaced[ri]) continue;
      const ring = rings[ri];
      // prefer an anchored edge: u plus a ring-adjacent placed neighbor
      const m = ring.length;
      const ui = ring.indexOf(u);
      const before = ring[(ui + m - 1) % m];
      const after = ring[(ui + 1) % m];
      if (coords[after] !== null) {
        placeRingOnEdge(ring, u, after);
      } else if (coords[before] !== null) {
        placeRingOnEdge(ring, u, before);
      } else {
        placeRingOnVertex(ring, u);
      }
      ringPlaced[ri] = true;
      for (const a of ring) queue.push(a);
    }
  };

  const placeChainNeighbor = (u: number, v: number) => {
    const pu = coords[u]!;
    const neighborAngles: number[] = [];
    for (const w of adj[u]) {
      if (coords[w] !== null) {
        neighborAngles.push(Math.atan2(coords[w]!.y - pu.y, coords[w]!.x - pu.x));
      }
    }
    let candidates: number[];
    if (neighborAngles.length === 0) {
      candidates = [-Math.PI / 6];
    } else if (neighborAngles.length === 1) {
      const back = neighborAngles[0] + Math.PI;
      const t = (turn[u] * Math.PI) / 3;
      candidates = [back + t, back - t, back + t / 2, back - t / 2, back];
    } else {
      // bisect the angular gaps, widest first
      neighborAngles.sort((a, b) => a - b);
      const gaps: { size: number; mid: number }[] = [];
      for (let k = 0; k < neighborAngles.length; k++) {
        const a = neighborAngles[k];
        const b = k + 1 < neighborAngles.length ? neighborAngles[k + 1] : neighborAngles[0] + 2 * Math.PI;
        gaps.push({ size: b - a, mid: (a + b) / 2 });
      }
      gaps.sort((a, b) => b.size - a.size);
      candidates = gaps.map((gp) => gp.mid);
    }
    let chosen: Point | null = null;
    for (const angle of candidates) {
      const p = { x: pu.x + Math.cos(angle), y: pu.y + Math.sin(angle) };
      if (free(p)) {
        chosen = p;
        break;
      }
    }
    if (chosen === null) {
      const angle = candidates[0];
      chosen = { x: pu.x + Math.cos(angle), y: pu.y + Math.sin(angle) };
    }
    put(v, chosen);
    turn[v] = -turn[u];
    queue.push(v);
  };

  const queue: number[] = [];

  const seed = (start: number) => {
    if (ringsAt[start].length > 0) {
      const ri = ringsAt[start][0];
      const ring = rings[ri];
      const r = polygonRadius(ring.length);
      ring.forEach((atomIdx, k) => {
        const angle = Math.PI / 2 + (2 * Math.PI * k) / ring.length;
        put(atomIdx, { x: r * Math.cos(angle), y: r * Math.sin(angle) });
      });
      ringPlaced[ri] = true;
      for (const a of ring) queue.push(a);
    } else {
      put(start, { x: 0, y: 0 });
      queue.push(start);
    }
  };

  seed(0);
  let guard = 0;
  while (queue.length > 0) {
    if (++guard > 4 * n + 4 * rings.length + 8) break; // malformed input safety
    const u = queue.shift()!;
    tryPlaceRingsAt(u);
    for (const v of adj[u]) {
      if (coords[v] === null) placeChainNeighbor(u, v);
    }
  }

  // parser rejects dot-disconnected input, so everything is reachable;
  // belt and braces for any atom the guard cut off
  for (let i = 0; i < n; i++) {
    if (coords[i] === null) coords[i] = { x: 0, y: 0 };
  }
  return { coords: coords as Point[], rings };
}
