// Minimal SMILES reader backing the in-browser structure previews.
// Covers the organic subset, bracket atoms, branches, and ring closures;
// stereo marks are accepted and dropped. This is a sketching aid, not a
// chemistry model: valence is not checked, and anything the reader does
// not understand should make the caller fall back to the server image.

export interface Atom {
  symbol: string; // element symbol, or a placeholder label like "R1"
  aromatic: boolean;
  charge: number;
  hCount: number | null; // bracket H count; null means unspecified
  isotope: number | null;
  rgroup: boolean;
}

export interface Bond {
  a: number;
  b: number;
  order: number;
  aromatic: boolean;
}

export interface MolGraph {
  atoms: Atom[];
  bonds: Bond[];
}

export class SmilesError extends Error {
  constructor(message: string) {
    super(message);
    this.name = 'SmilesError';
  }
}

const TWO_LETTER = new Set(['Cl', 'Br']);
const ONE_LETTER = new Set(['B', 'C', 'N', 'O', 'P', 'S', 'F', 'I']);
const AROMATIC = new Set(['b', 'c', 'n', 'o', 'p', 's']);

const BOND_ORDERS: Record<string, number> = {
  '-': 1,
  '=': 2,
  '#': 3,
  ':': 1,
  '/': 1,
  '\\': 1,
};

function atom(symbol: string, aromatic: boolean): Atom {
  return { symbol, aromatic, charge: 0, hCount: null, isotope: null, rgroup: false };
}

function parseBracket(body: string, text: string): Atom {
  let i = 0;
  const fail = (why: string): never => {
    throw new SmilesError(`bad bracket atom [${body}] in ${JSON.stringify(text)}: ${why}`);
  };

  let isotope: number | null = null;
  const isoStart = i;
  while (i < body.length && body[i] >= '0' && body[i] <= '9') i++;
  if (i > isoStart) isotope = parseInt(body.slice(isoStart, i), 10);

  let symbol: string;
  let aromatic = false;
  let rgroup = false;
  const rest = body.slice(i);
  const rMatch = /^R\d*/.exec(rest);
  const seAs = /^(se|as)/.exec(rest);
  const element = /^[A-Z][a-z]?/.exec(rest);
  if (rMatch) {
    symbol = rMatch[0];
    rgroup = true;
  } else if (rest[0] === '*') {
    symbol = '*';
    rgroup = true;
  } else if (seAs) {
    symbol = seAs[0];
    aromatic = true;
  } else if (rest[0] && AROMATIC.has(rest[0])) {
    symbol = rest[0];
    aromatic = true;
  } else if (element) {
    symbol = element[0];
  } else {
    return fail('no atom symbol');
  }
  i += symbol.length;

  while (body[i] === '@') i++; // chirality: parsed past, not kept
  if (body.startsWith('TH', i) || body.startsWith('AL', i)) i += 2;

  let hCount: number | null = null;
  if (body[i] === 'H') {
    i++;
    const hStart = i;
    while (i < body.length && body[i] >= '0' && body[i] <= '9') i++;
    hCount = i > hStart ? parseInt(body.slice(hStart, i), 10) : 1;
  }

  let charge = 0;
  if (body[i] === '+' || body[i] === '-') {
    const sign = body[i] === '+' ? 1 : -1;
    let run = 0;
    while (body[i] === (sign > 0 ? '+' : '-')) {
      run++;
      i++;
    }
    const numStart = i;
    while (i < body.length && body[i] >= '0' && body[i] <= '9') i++;
    if (i > numStart) {
      if (run > 1) fail('charge has both a repeat and a number');
      charge = sign * parseInt(body.slice(numStart, i), 10);
    } else {
      charge = sign * run;
    }
  }

  if (body[i] === ':') {
    i++;
    const mapStart = i;
    while (i < body.length && body[i] >= '0' && body[i] <= '9') i++;
    if (i === mapStart) fail('empty atom map');
  }

  if (i !== body.length) fail(`trailing ${JSON.stringify(body.slice(i))}`);
  const out = atom(symbol, aromatic);
  out.charge = charge;
  out.hCount = hCount;
  out.isotope = isotope;
  out.rgroup = rgroup;
  return out;
}

/** Parse a SMILES string into a display graph; throws SmilesError. */
export function parseSmiles(text: string): MolGraph {
  const s = text.trim();
  if (!s) throw new SmilesError('empty string');

  const atoms: Atom[] = [];
  const bonds: Bond[] = [];
  const stack: number[] = [];
  let prev = -1;
  let pending: number | null = null; // explicit bond symbol waiting for an atom
  let pendingAromatic = false;
  const open = new Map<number, { atom: number; order: number | null; aromatic: boolean }>();

  const bondTo = (to: number) => {
    if (prev < 0) return;
    const both = atoms[prev].aromatic && atoms[to].aromatic;
    bonds.push({
      a: prev,
      b: to,
      order: pending ?? 1,
      aromatic: pending === null ? both : pendingAromatic,
    });
  };

  const addAtom = (a: Atom) => {
    atoms.push(a);
    const idx = atoms.length - 1;
    bondTo(idx);
    pending = null;
    pendingAromatic = false;
    prev = idx;
  };

  const closeRing = (num: number) => {
    if (prev < 0) throw new SmilesError(`ring bond ${num} before any atom`);
    const partner = open.get(num);
    if (partner === undefined) {
      open.set(num, { atom: prev, order: pending, aromatic: pendingAromatic });
      pending = null;
      pendingAromatic = false;
      return;
    }
    open.delete(num);
    if (partner.atom === prev) throw new SmilesError(`ring bond ${num} closes on itself`);
    if (partner.order !== null && pending !== null && partner.order !== pending) {
      throw new SmilesError(`ring bond ${num} has conflicting orders`);
    }
    const order = pending ?? partner.order;
    const both = atoms[partner.atom].aromatic && atoms[prev].aromatic;
    bonds.push({
      a: partner.atom,
      b: prev,
      order: order ?? 1,
      aromatic: order === null ? both : pendingAromatic || partner.aromatic,
    });
    pending = null;
    pendingAromatic = false;
  };

  let i = 0;
  while (i < s.length) {
    const ch = s[i];
    if (ch === '.') {
      throw new SmilesError('disconnected structures are not drawn');
    }
    if (ch in BOND_ORDERS) {
      if (pending !== null) throw new SmilesError(`two bond symbols in a row at ${i}`);
      pending = BOND_ORDERS[ch];
      pendingAromatic = ch === ':';
      i++;
      continue;
    }
    if (ch === '(') {
      if (prev < 0) throw new SmilesError('branch before any atom');
      stack.push(prev);
      i++;
      continue;
    }
    if (ch === ')') {
      const back = stack.pop();
      if (back === undefined) throw new SmilesError('unmatched )');
      prev = back;
      i++;
      continue;
    }
    if (ch >= '0' && ch <= '9') {
      closeRing(parseInt(ch, 10));
      i++;
      continue;
    }
    if (ch === '%') {
      const digits = s.slice(i + 1, i + 3);
      if (!/^\d\d$/.test(digits)) throw new SmilesError(`bad %nn ring bond at ${i}`);
      closeRing(parseInt(digits, 10));
      i += 3;
      continue;
    }
    if (ch === '[') {
      const end = s.indexOf(']', i);
      if (end < 0) throw new SmilesError('unterminated bracket atom');
      addAtom(parseBracket(s.slice(i + 1, end), s));
      i = end + 1;
      continue;
    }
    if (ch === '*') {
      // substituent fragments write their attachment point as a bare star
      const star = atom('*', false);
      star.rgroup = true;
      addAtom(star);
      i++;
      continue;
    }
    const two = s.slice(i, i + 2);
    if (TWO_LETTER.has(two)) {
      addAtom(atom(two, false));
      i += 2;
      continue;
    }
    if (ONE_LETTER.has(ch)) {
      addAtom(atom(ch, false));
      i++;
      continue;
    }
    if (AROMATIC.has(ch)) {
      addAtom(atom(ch.toUpperCase(), true));
      i++;
      continue;
    }
    throw new SmilesError(`unexpected ${JSON.stringify(ch)} at position ${i}`);
  }

  if (stack.length > 0) throw new SmilesError('unmatched (');
  if (open.size > 0) {
    const nums = [...open.keys()].sort((a, b) => a - b);
    throw new SmilesError(`unclosed ring bond ${nums.join(', ')}`);
  }
  if (pending !== null) throw new SmilesError('dangling bond symbol');
  if (atoms.length === 0) throw new SmilesError('no atoms');
  return { atoms, bonds };
}

/** Neighbor lists, index-aligned with g.atoms. */
export function adjacency(g: MolGraph): number[][] {
  const adj: number[][] = g.atoms.map(() => []);
  for (const b of g.bonds) {
    adj[b.a].push(b.b);
    adj[b.b].push(b.a);
  }
  return adj;
}
