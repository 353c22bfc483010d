// Markush table cell editing and client-side enumeration previews.
//
// The preview substitutes fragments into the scaffold at the graph level:
// the fragment's star atom marks which of its atoms bonds to the scaffold,
// and splicing by graph keeps branched substituents attached through the
// right atom (textual splicing of "*C(C)C" would not). The server's
// enumeration remains authoritative; a preview that cannot be built is
// simply not shown.

import type { MarkushTaskPayload, SubstituentCell } from './types.js';
import type { Atom, Bond, MolGraph } from './smiles.js';
import { parseSmiles, adjacency } from './smiles.js';

// Display mirror of the server's substituent abbreviation table. The
// server's copy is larger and is what enumeration actually uses; missing
// entries here only cost a preview.
export const PREVIEW_FRAGMENTS: Record<string, string> = {
  Me: '*C',
  Et: '*CC',
  Pr: '*CCC',
  nPr: '*CCC',
  iPr: '*C(C)C',
  Bu: '*CCCC',
  nBu: '*CCCC',
  iBu: '*CC(C)C',
  sBu: '*C(C)CC',
  tBu: '*C(C)(C)C',
  cPr: '*C1CC1',
  cPent: '*C1CCCC1',
  cHex: '*C1CCCCC1',
  vinyl: '*C=C',
  allyl: '*CC=C',
  Ph: '*c1ccccc1',
  Bn: '*Cc1ccccc1',
  Ac: '*C(C)=O',
  CHO: '*C=O',
  CO2H: '*C(=O)O',
  COOH: '*C(=O)O',
  CO2Me: '*C(=O)OC',
  CO2Et: '*C(=O)OCC',
  CONH2: '*C(N)=O',
  NH2: '*N',
  NHMe: '*NC',
  NMe2: '*N(C)C',
  NHAc: '*NC(C)=O',
  CN: '*C#N',
  NO2: '*[N+](=O)[O-]',
  OH: '*O',
  OMe: '*OC',
  OEt: '*OCC',
  OiPr: '*OC(C)C',
  OtBu: '*OC(C)(C)C',
  OPh: '*Oc1ccccc1',
  OBn: '*OCc1ccccc1',
  OAc: '*OC(C)=O',
  OCF3: '*OC(F)(F)F',
  SH: '*S',
  SMe: '*SC',
  SO2Me: '*S(C)(=O)=O',
  SO2NH2: '*S(N)(=O)=O',
  Ms: '*S(C)(=O)=O',
  Ts: '*S(=O)(=O)c1ccc(C)cc1',
  F: '*F',
  Cl: '*Cl',
  Br: '*Br',
  I: '*I',
  CF3: '*C(F)(F)F',
  CHF2: '*C(F)F',
  CH2OH: '*CO',
  CH2CN: '*CC#N',
  morpholino: '*N1CCOCC1',
};

/**
 * Resolve a cell to a starred fragment SMILES: '' means "replace with
 * hydrogen" (delete the placeholder), null means no preview is possible
 * for this cell kind or spelling.
 */
export function expandCell(cell: SubstituentCell): string | null {
  if (cell.kind === 'hydrogen') return '';
  if (cell.kind === 'fragment_smiles') {
    return cell.payload.includes('*') ? cell.payload : null;
  }
  if (cell.kind === 'abbreviation') {
    const exact = PREVIEW_FRAGMENTS[cell.payload];
    if (exact !== undefined) return exact;
    const folded = cell.payload.toLowerCase();
    const hits = Object.keys(PREVIEW_FRAGMENTS).filter((k) => k.toLowerCase() === folded);
    return hits.length === 1 ? PREVIEW_FRAGMENTS[hits[0]] : null;
  }
  // formula, iupac_name, visual_index: the server resolves these
  return null;
}

function starIndex(g: MolGraph): number {
  const stars = g.atoms
    .map((a, i) => (a.rgroup && a.symbol === '*' ? i : -1))
    .filter((i) => i >= 0);
  if (stars.length !== 1) {
    throw new Error(`fragment needs exactly one attachment star, found ${stars.length}`);
  }
  return stars[0];
}

/**
 * Replace the placeholder atom labeled `label` in `scaffold` with the
 * starred fragment, bonding the fragment through the star's neighbor.
 * An empty fragment deletes the placeholder (hydrogen). Throws when the
 * label is absent or the fragment is not a single-attachment piece.
 */
export function substituteInto(scaffold: MolGraph, label: string, fragment: string): MolGraph {
  const rIdx = scaffold.atoms.findIndex(
    (a) => a.rgroup && a.symbol.toLowerCase() === label.toLowerCase(),
  );
  if (rIdx < 0) throw new Error(`no placeholder ${label} on scaffold`);

  const scaffoldMap = new Map<number, number>();
  const atoms: Atom[] = [];
  const bonds: Bond[] = [];
  for (let i = 0; i < scaffold.atoms.length; i++) {
    if (i === rIdx) continue;
    scaffoldMap.set(i, atoms.length);
    atoms.push({ ...scaffold.atoms[i] });
  }
  let anchor = -1; // scaffold atom the placeholder was bonded to, reindexed
  let anchorOrder = 1;
  for (const b of scaffold.bonds) {
    if (b.a === rIdx || b.b === rIdx) {
      const other = b.a === rIdx ? b.b : b.a;
      if (anchor >= 0) throw new Error(`placeholder ${label} has more than one bond`);
      anchor = scaffoldMap.get(other)!;
      anchorOrder = b.order;
      continue;
    }
    bonds.push({ ...b, a: scaffoldMap.get(b.a)!, b: scaffoldMap.get(b.b)! });
  }

  if (fragment === '') {
    return { atoms, bonds };
  }
  if (anchor < 0) throw new Error(`placeholder ${label} is not bonded to the scaffold`);

  const frag = parseSmiles(fragment);
  const sIdx = starIndex(frag);
  const starNeighbors = adjacency(frag)[sIdx];
  if (starNeighbors.length !== 1) {
    throw new Error('attachment star must have exactly one neighbor');
  }
  const fragMap = new Map<number, number>();
  for (let i = 0; i < frag.atoms.length; i++) {
    if (i === sIdx) continue;
    fragMap.set(i, atoms.length);
    atoms.push({ ...frag.atoms[i] });
  }
  for (const b of frag.bonds) {
    if (b.a === sIdx || b.b === sIdx) continue;
    bonds.push({ ...b, a: fragMap.get(b.a)!, b: fragMap.get(b.b)! });
  }
  bonds.push({
    a: anchor,
    b: fragMap.get(starNeighbors[0])!,
    order: anchorOrder,
    aromatic: false,
  });
  return { atoms, bonds };
}

/**
 * Editing state for one Markush row task. Drafts live here only until
 * they are posted as an edit decision; the server re-enumerates and the
 * next task listing is the truth.
 */
export class MarkushEditorState {
  readonly payload: MarkushTaskPayload;
  readonly scaffoldSmiles: string | null;
  readonly imageUrl: string;
  private draft: Record<string, SubstituentCell>;

  constructor(payload: MarkushTaskPayload, scaffoldSmiles: string | null, imageUrl: string) {
    this.payload = payload;
    this.scaffoldSmiles = scaffoldSmiles;
    this.imageUrl = imageUrl;
    this.draft = {};
    for (const [label, cell] of Object.entries(payload.cells)) {
      this.draft[label] = { ...cell };
    }
  }

  labels(): string[] {
    return Object.keys(this.draft).sort();
  }

  cell(label: string): SubstituentCell {
    return this.draft[label];
  }

  setCell(label: string, kind: string, payload: string): void {
    this.draft[label] = { kind, payload };
  }

  reset(): void {
    for (const [label, cell] of Object.entries(this.payload.cells)) {
      this.draft[label] = { ...cell };
    }
  }

  changedLabels(): string[] {
    return this.labels().filter((label) => {
      const orig = this.payload.cells[label];
      const cur = this.draft[label];
      return orig === undefined || orig.kind !== cur.kind || orig.payload !== cur.payload;
    });
  }

  /** Edit payload for the decision endpoint: only the labels that changed. */
  decisionPayload(): { cells: Record<string, SubstituentCell> } {
    const cells: Record<string, SubstituentCell> = {};
    for (const label of this.changedLabels()) {
      cells[label] = { ...this.draft[label] };
    }
    return { cells };
  }

  /**
   * Graph for the draft row, or null when any cell is beyond the local
   * table. Placeholders the row does not bind default to hydrogen, same
   * as the server's enumeration rule.
   */
  previewGraph(): MolGraph | null {
    if (this.scaffoldSmiles === null) return null;
    try {
      let g = parseSmiles(this.scaffoldSmiles);
      for (const [label, cell] of Object.entries(this.draft)) {
        const fragment = expandCell(cell);
        if (fragment === null) return null;
        g = substituteInto(g, label, fragment);
      }
      for (const label of this.payload.hydrogen_default_labels) {
        if (this.draft[label] === undefined) {
          g = substituteInto(g, label, '');
        }
      }
      return g;
    } catch {
      return null;
    }
  }
}
