// SVG rendering of a laid-out molecule graph. Deterministic output
// (coordinates rounded to 2 decimals) so tests can compare strings.

import type { MolGraph } from './smiles.js';
import { parseSmiles } from './smiles.js';
import type { Point } from './layout.js';
import { layoutGraph } from './layout.js';

const SCALE = 28;
const PAD = 18;
const LABEL_GAP = 0.22; // bond shortening, in bond-length units, at a labeled end
const DOUBLE_OFFSET = 2.6; // px between parallel lines

function fmt(v: number): string {
  const s = v.toFixed(2);
  return s === '-0.00' ? '0.00' : s;
}

function esc(s: string): string {
  return s.replace(/&/g, '&amp;').replace(/</g, '&lt;').replace(/>/g, '&gt;');
}

/** Label text for atoms that are not plain carbon, empty string otherwise. */
export function atomLabel(g: MolGraph, i: number): string {
  const a = g.atoms[i];
  if (a.rgroup) return a.symbol;
  let sym = a.symbol;
  if (sym === 'C' && a.charge === 0 && a.isotope === null) return '';
  if (sym.length === 1) sym = sym.toUpperCase();
  else sym = sym[0].toUpperCase() + sym.slice(1);
  let label = sym;
  if (a.isotope !== null) label = `${a.isotope}${label}`;
  if (a.hCount !== null && a.hCount > 0 && sym !== 'C') {
    label += a.hCount === 1 ? 'H' : `H${a.hCount}`;
  }
  if (a.charge !== 0) {
    const mag = Math.abs(a.charge);
    label += (mag === 1 ? '' : String(mag)) + (a.charge > 0 ? '+' : '-');
  }
  return label;
}

/** Render a parsed and laid-out graph to an SVG string. */
export function graphSvg(g: MolGraph): string {
  const { coords, rings } = layoutGraph(g);
  let minX = Infinity;
  let minY = Infinity;
  let maxX = -Infinity;
  let maxY = -Infinity;
  for (const p of coords) {
    minX = Math.min(minX, p.x);
    minY = Math.min(minY, p.y);
    maxX = Math.max(maxX, p.x);
    maxY = Math.max(maxY, p.y);
  }
  if (coords.length === 0) {
    minX = minY = 0;
    maxX = maxY = 1;
  }
  const toPx = (p: Point): Point => ({
    x: PAD + (p.x - minX) * SCALE,
    y: PAD + (p.y - minY) * SCALE,
  });
  const width = PAD * 2 + (maxX - minX) * SCALE;
  const height = PAD * 2 + (maxY - minY) * SCALE;

  const labels = g.atoms.map((_, i) => atomLabel(g, i));
  const parts: string[] = [];

  // bonds in aromatic rings get the dashed inner circle instead of
  // alternating doubles; track which bonds those rings cover
  const aromaticRingBonds = new Set<number>();
  for (const ring of rings) {
    const members = new Set(ring);
    if (!ring.every((i) => g.atoms[i].aromatic)) continue;
    const ringBondIdx: number[] = [];
    g.bonds.forEach((bond, bi) => {
      if (members.has(bond.a) && members.has(bond.b)) ringBondIdx.push(bi);
    });
    if (ringBondIdx.length !== ring.length) continue;
    for (const bi of ringBondIdx) aromaticRingBonds.add(bi);
    let cx = 0;
    let cy = 0;
    for (const i of ring) {
      const p = toPx(coords[i]);
      cx += p.x;
      cy += p.y;
    }
    cx /= ring.length;
    cy /= ring.length;
    const p0 = toPx(coords[ring[0]]);
    const rr = Math.hypot(p0.x - cx, p0.y - cy) * 0.62;
    parts.push(
      `<circle cx="${fmt(cx)}" cy="${fmt(cy)}" r="${fmt(rr)}" fill="none" ` +
        `stroke="currentColor" stroke-width="1" stroke-dasharray="3 3"/>`,
    );
  }

  g.bonds.forEach((bond, bi) => {
    let pa = toPx(coords[bond.a]);
    let pb = toPx(coords[bond.b]);
    const dx = pb.x - pa.x;
    const dy = pb.y - pa.y;
    const len = Math.hypot(dx, dy) || 1;
    const ux = dx / len;
    const uy = dy / len;
    if (labels[bond.a] !== '') {
      pa = { x: pa.x + ux * LABEL_GAP * SCALE, y: pa.y + uy * LABEL_GAP * SCALE };
    }
    if (labels[bond.b] !== '') {
      pb = { x: pb.x - ux * LABEL_GAP * SCALE, y: pb.y - uy * LABEL_GAP * SCALE };
    }
    const order = aromaticRingBonds.has(bi) ? 1 : bond.order;
    const line = (o: number) =>
      `<line x1="${fmt(pa.x + -uy * o)}" y1="${fmt(pa.y + ux * o)}" ` +
      `x2="${fmt(pb.x + -uy * o)}" y2="${fmt(pb.y + ux * o)}" ` +
      `stroke="currentColor" stroke-width="1.4"/>`;
    if (order === 1) {
      parts.push(line(0));
    } else if (order === 2) {
      parts.push(line(-DOUBLE_OFFSET / 2), line(DOUBLE_OFFSET / 2));
    } else {
      parts.push(line(-DOUBLE_OFFSET), line(0), line(DOUBLE_OFFSET));
    }
  });

  g.atoms.forEach((_, i) => {
    const label = labels[i];
    if (label === '') return;
    const p = toPx(coords[i]);
    parts.push(
      `<text x="${fmt(p.x)}" y="${fmt(p.y)}" text-anchor="middle" ` +
        `dominant-baseline="central" font-size="12" font-family="sans-serif" ` +
        `fill="currentColor">${esc(label)}</text>`,
    );
  });

  return (
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${fmt(width)} ${fmt(height)}" ` +
    `width="${fmt(width)}" height="${fmt(height)}" role="img">` +
    parts.join('') +
    '</svg>'
  );
}

/**
 * Parse and render a SMILES string, or return null when the string is
 * outside what the sketcher understands. Callers show the server's page
 * image instead of guessing.
 */
export function moleculeSvg(smiles: string): string | null {
  try {
    const g = parseSmiles(smiles);
    if (g.atoms.length === 0) return null;
    return graphSvg(g);
  } catch {
    return null;
  }
}
