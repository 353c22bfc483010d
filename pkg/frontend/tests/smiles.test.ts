import { describe, expect, test } from 'vitest';
import { adjacency, parseSmiles, SmilesError } from '../src/smiles.js';

describe('parseSmiles', () => {
  test('reads a linear chain', () => {
    const g = parseSmiles('CCO');
    expect(g.atoms.map((a) => a.symbol)).toEqual(['C', 'C', 'O']);
    expect(g.bonds).toHaveLength(2);
    expect(g.bonds.every((b) => b.order === 1)).toBe(true);
  });

  test('reads branches through the stack', () => {
    const g = parseSmiles('CC(C)C');
    expect(g.atoms).toHaveLength(4);
    const adj = adjacency(g);
    expect(adj[1].sort()).toEqual([0, 2, 3]);
  });

  test('closes rings, including the %nn form', () => {
    const benzene = parseSmiles('c1ccccc1');
    expect(benzene.bonds).toHaveLength(6);
    expect(benzene.atoms.every((a) => a.aromatic)).toBe(true);
    const wide = parseSmiles('C%10CCCCC%10');
    expect(wide.bonds).toHaveLength(6);
  });

  test('aromatic bonds only form between aromatic atoms', () => {
    const toluene = parseSmiles('Cc1ccccc1');
    const exo = toluene.bonds.find((b) => b.a === 0 || b.b === 0);
    expect(exo?.aromatic).toBe(false);
    const ring = toluene.bonds.filter((b) => b.a !== 0 && b.b !== 0);
    expect(ring.every((b) => b.aromatic)).toBe(true);
  });

  test('double and triple bonds carry their order', () => {
    expect(parseSmiles('C=C').bonds[0].order).toBe(2);
    expect(parseSmiles('C#N').bonds[0].order).toBe(3);
    // stereo slashes are plain single bonds for drawing purposes
    expect(parseSmiles('C/C=C/C').bonds.map((b) => b.order)).toEqual([1, 2, 1]);
  });

  test('bracket atoms keep charge, isotope, and H count', () => {
    const g = parseSmiles('[13CH3-]');
    expect(g.atoms[0]).toMatchObject({ symbol: 'C', isotope: 13, hCount: 3, charge: -1 });
    const nitro = parseSmiles('[N+](=O)[O-]');
    expect(nitro.atoms[0].charge).toBe(1);
    expect(nitro.atoms[2].charge).toBe(-1);
  });

  test('two-letter elements beat one-letter prefixes', () => {
    const g = parseSmiles('ClCBr');
    expect(g.atoms.map((a) => a.symbol)).toEqual(['Cl', 'C', 'Br']);
  });

  test('placeholder atoms are kept and flagged', () => {
    const g = parseSmiles('c1ccc(cc1)[R1]');
    const r = g.atoms.find((a) => a.rgroup);
    expect(r?.symbol).toBe('R1');
    const star = parseSmiles('*CC');
    expect(star.atoms[0].rgroup).toBe(true);
    expect(star.atoms[0].symbol).toBe('*');
  });

  test('chirality marks parse and are dropped', () => {
    const g = parseSmiles('C[C@H](N)C(=O)O');
    expect(g.atoms[1].symbol).toBe('C');
    expect(g.atoms[1].hCount).toBe(1);
  });

  test('rejects what it cannot draw', () => {
    expect(() => parseSmiles('C1CC')).toThrow(SmilesError);
    expect(() => parseSmiles('C(C')).toThrow(/unmatched/);
    expect(() => parseSmiles('CC)')).toThrow(/unmatched/);
    expect(() => parseSmiles('C.C')).toThrow(/disconnected/);
    expect(() => parseSmiles('C==C')).toThrow(/two bond symbols/);
    expect(() => parseSmiles('C=')).toThrow(/dangling/);
    expect(() => parseSmiles('')).toThrow(/empty/);
    expect(() => parseSmiles('[]C')).toThrow(/no atom symbol/);
    expect(() => parseSmiles('C1CC2')).toThrow(/unclosed ring/);
  });

  test('conflicting ring bond orders are an error', () => {
    expect(() => parseSmiles('C=1CCCC-1')).toThrow(/conflicting/);
  });
});

test('adjacency mirrors every bond in both directions', () => {
  const g = parseSmiles('CC(=O)Oc1ccccc1C(=O)O');
  const adj = adjacency(g);
  let ends = 0;
  for (const list of adj) ends += list.length;
  expect(ends).toBe(2 * g.bonds.length);
});
