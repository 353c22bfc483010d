import { describe, expect, test } from 'vitest';
import { adjacency, parseSmiles } from '../src/smiles.js';
import { expandCell, MarkushEditorState, substituteInto } from '../src/markush.js';
import type { MarkushTaskPayload } from '../src/types.js';

describe('expandCell', () => {
  test('abbreviations resolve through the local table', () => {
    expect(expandCell({ kind: 'abbreviation', payload: 'Et' })).toBe('*CC');
    expect(expandCell({ kind: 'abbreviation', payload: 'OMe' })).toBe('*OC');
    // case-insensitive fallback, same as the server's lookup
    expect(expandCell({ kind: 'abbreviation', payload: 'ome' })).toBe('*OC');
    expect(expandCell({ kind: 'abbreviation', payload: 'NotAThing' })).toBeNull();
  });

  test('hydrogen is the empty fragment', () => {
    expect(expandCell({ kind: 'hydrogen', payload: 'H' })).toBe('');
  });

  test('starred fragments pass through, unstarred do not', () => {
    expect(expandCell({ kind: 'fragment_smiles', payload: '*C(C)C' })).toBe('*C(C)C');
    expect(expandCell({ kind: 'fragment_smiles', payload: 'CCC' })).toBeNull();
  });

  test('kinds the server must resolve give no preview', () => {
    expect(expandCell({ kind: 'formula', payload: 'C2H5' })).toBeNull();
    expect(expandCell({ kind: 'iupac_name', payload: 'cyclopropyl' })).toBeNull();
    expect(expandCell({ kind: 'visual_index', payload: '7' })).toBeNull();
  });
});

describe('substituteInto', () => {
  const scaffold = () => parseSmiles('c1ccc(cc1)[R1]');

  test('grafts through the starred atom, not the first written one', () => {
    // isopropyl: the attachment carbon carries both methyls, so after the
    // graft it has three neighbors (ring + 2 x C). A textual splice of
    // "*C(C)C" would have bonded the ring to a methyl instead.
    const out = substituteInto(scaffold(), 'R1', '*C(C)C');
    expect(out.atoms).toHaveLength(9);
    const joined = out.bonds[out.bonds.length - 1];
    expect(adjacency(out)[joined.b]).toHaveLength(3);
  });

  test('empty fragment deletes the placeholder', () => {
    const out = substituteInto(scaffold(), 'R1', '');
    expect(out.atoms).toHaveLength(6);
    expect(out.bonds).toHaveLength(6);
    expect(out.atoms.some((a) => a.rgroup)).toBe(false);
  });

  test('keeps the scaffold bond order on the attachment', () => {
    const g = parseSmiles('C=[R1]');
    const out = substituteInto(g, 'R1', '*C');
    expect(out.bonds[out.bonds.length - 1].order).toBe(2);
  });

  test('label matching ignores case', () => {
    const out = substituteInto(scaffold(), 'r1', '*C');
    expect(out.atoms).toHaveLength(7);
  });

  test('refuses absent labels and multi-star fragments', () => {
    expect(() => substituteInto(scaffold(), 'R9', '*C')).toThrow(/no placeholder/);
    expect(() => substituteInto(scaffold(), 'R1', '*C*')).toThrow(/exactly one attachment/);
  });
});

function rowPayload(): MarkushTaskPayload {
  return {
    scaffold_detection: 3,
    row: 0,
    coreference: '4a',
    cells: { R1: { kind: 'abbreviation', payload: 'Me' } },
    hydrogen_default_labels: [],
    enumerated: 'Cc1ccccc1',
    failure: null,
  };
}

describe('MarkushEditorState', () => {
  test('starts clean and tracks exactly what changed', () => {
    const state = new MarkushEditorState(rowPayload(), 'c1ccc(cc1)[R1]', 'img');
    expect(state.changedLabels()).toEqual([]);
    state.setCell('R1', 'abbreviation', 'Et');
    expect(state.changedLabels()).toEqual(['R1']);
    expect(state.decisionPayload()).toEqual({
      cells: { R1: { kind: 'abbreviation', payload: 'Et' } },
    });
    state.reset();
    expect(state.changedLabels()).toEqual([]);
  });

  test('draft previews substitute the draft cell', () => {
    const state = new MarkushEditorState(rowPayload(), 'c1ccc(cc1)[R1]', 'img');
    const clean = state.previewGraph();
    expect(clean?.atoms).toHaveLength(7); // toluene
    state.setCell('R1', 'abbreviation', 'tBu');
    const drafted = state.previewGraph();
    expect(drafted?.atoms).toHaveLength(10);
  });

  test('cells beyond the local table disable the preview', () => {
    const state = new MarkushEditorState(rowPayload(), 'c1ccc(cc1)[R1]', 'img');
    state.setCell('R1', 'iupac_name', 'cyclopropyl');
    expect(state.previewGraph()).toBeNull();
  });

  test('no scaffold string means no preview', () => {
    const state = new MarkushEditorState(rowPayload(), null, 'img');
    expect(state.previewGraph()).toBeNull();
  });

  test('unbound labels default to hydrogen like the enumerator', () => {
    const payload = rowPayload();
    payload.hydrogen_default_labels = ['R2'];
    const state = new MarkushEditorState(payload, 'c1cc([R2])cc(c1)[R1]', 'img');
    const g = state.previewGraph();
    // R1 -> methyl, R2 -> removed
    expect(g?.atoms).toHaveLength(7);
    expect(g?.atoms.some((a) => a.rgroup)).toBe(false);
  });
});
