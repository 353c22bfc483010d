// View behavior against a stub client: what gets posted, what gets
// painted, and the local-state invariant (a control posts a decision and
// triggers a refresh; it never rewrites the task list by itself).
import { describe, expect, test } from 'vitest';
import type {
  AnnotationRanking,
  AnnotationTaskPayload,
  DetectionTaskPayload,
  MarkushTaskPayload,
  MeasurementTaskPayload,
  OcsrTaskPayload,
  ReviewTask,
  Stage,
  TripletRecord,
} from '../src/types.js';
import type { CurationClient } from '../src/api.js';
import type { ViewContext } from '../src/views.js';
import {
  clampBox,
  renderAnnotationReview,
  renderCoreferenceReview,
  renderDetectionReview,
  renderMarkushReview,
  renderMeasurementReview,
  renderOcsrReview,
  shiftBox,
} from '../src/views.js';

interface Posted {
  taskId: string;
  decision: string;
  payload?: Record<string, unknown>;
}

class StubClient {
  posted: Posted[] = [];
  ranking: AnnotationRanking | null = null;

  async submitDecision(
    taskId: string,
    decision: string,
    payload?: Record<string, unknown>,
  ): Promise<unknown> {
    this.posted.push({ taskId, decision, payload });
    return {};
  }

  pageImageUrl(runId: string, page: number): string {
    return `/img/${runId}/${page}`;
  }

  async annotationCandidates(): Promise<AnnotationRanking> {
    if (this.ranking === null) throw new Error('no ranking stubbed');
    return this.ranking;
  }
}

interface Harness {
  root: HTMLElement;
  stub: StubClient;
  ctx: ViewContext;
  refreshes: () => number;
  notices: string[];
}

function harness(): Harness {
  const root = document.createElement('div');
  document.body.appendChild(root);
  const stub = new StubClient();
  let refreshes = 0;
  const notices: string[] = [];
  const ctx: ViewContext = {
    client: stub as unknown as CurationClient,
    runId: 'run-0001',
    refresh: async () => {
      refreshes++;
    },
    notify: (m) => notices.push(m),
  };
  return { root, stub, ctx, refreshes: () => refreshes, notices };
}

function task(id: string, stage: Stage, payload: object, status = 'pending'): ReviewTask {
  return {
    schema_version: 1,
    id,
    run_id: 'run-0001',
    stage,
    payload: payload as Record<string, unknown>,
    status: status as ReviewTask['status'],
    editor: null,
    decided_at: null,
  };
}

const flush = () => new Promise((r) => setTimeout(r, 0));

function click(node: Element | null): void {
  if (node === null) throw new Error('expected an element to click');
  (node as HTMLElement).click();
}

describe('box helpers', () => {
  test('shiftBox keeps size and stays on the page', () => {
    const moved = shiftBox([0.1, 0.1, 0.3, 0.2], 0.05, 0);
    [0.15, 0.1, 0.35, 0.2].forEach((v, i) => expect(moved[i]).toBeCloseTo(v, 10));
    const pinned = shiftBox([0.8, 0.8, 1.0, 0.95], 0.5, 0.5);
    expect(pinned[2]).toBeCloseTo(1.0);
    expect(pinned[2] - pinned[0]).toBeCloseTo(0.2);
  });

  test('clampBox orders corners and clips to the page', () => {
    expect(clampBox([0.5, 0.6, 0.2, 0.1])).toEqual([0.2, 0.1, 0.5, 0.6]);
    expect(clampBox([-0.2, 0.3, 1.4, 0.5])).toEqual([0, 0.3, 1, 0.5]);
  });
});

function detectionTask(): ReviewTask {
  const payload: DetectionTaskPayload = {
    detection: {
      id: 0,
      page: 1,
      box: [0.1, 0.2, 0.4, 0.5],
      raw_smiles: 'CC(=O)Oc1ccccc1C(=O)O',
      is_markush: false,
    },
    flags: [],
  };
  return task('run-0001:detection:0', 'detection', payload);
}

describe('detection review', () => {
  test('accept posts the decision and refreshes', async () => {
    const h = harness();
    renderDetectionReview(h.root, [detectionTask()], h.ctx);
    click(h.root.querySelector('button[data-action="accept"]'));
    await flush();
    expect(h.stub.posted).toEqual([
      { taskId: 'run-0001:detection:0', decision: 'accept', payload: undefined },
    ]);
    expect(h.refreshes()).toBe(1);
  });

  test('saving the box posts the typed corners, clamped', async () => {
    const h = harness();
    renderDetectionReview(h.root, [detectionTask()], h.ctx);
    const inputs = h.root.querySelectorAll<HTMLInputElement>('.coords input');
    inputs[0].value = '0.15';
    inputs[3].value = '1.7';
    click(h.root.querySelector('button[data-action="edit"]'));
    await flush();
    expect(h.stub.posted[0].decision).toBe('edit');
    expect(h.stub.posted[0].payload).toEqual({ box: [0.15, 0.2, 0.4, 1] });
  });

  test('dragging the overlay moves the box through the inputs', () => {
    const h = harness();
    renderDetectionReview(h.root, [detectionTask()], h.ctx);
    const overlay = h.root.querySelector('.det-box')!;
    const wrap = h.root.querySelector('.page-wrap')!;
    overlay.dispatchEvent(new MouseEvent('mousedown', { clientX: 100, clientY: 100, bubbles: true }));
    wrap.dispatchEvent(new MouseEvent('mousemove', { clientX: 160, clientY: 180, bubbles: true }));
    wrap.dispatchEvent(new MouseEvent('mouseup', { bubbles: true }));
    const inputs = h.root.querySelectorAll<HTMLInputElement>('.coords input');
    // jsdom has no layout, so the drag math falls back to a 600x800 page
    expect(parseFloat(inputs[0].value)).toBeCloseTo(0.1 + 60 / 600, 4);
    expect(parseFloat(inputs[1].value)).toBeCloseTo(0.2 + 80 / 800, 4);
    expect(h.stub.posted).toEqual([]); // nothing posts until Save
  });

  test('decided tasks show no controls', () => {
    const h = harness();
    const done = detectionTask();
    done.status = 'accepted';
    renderDetectionReview(h.root, [done], h.ctx);
    expect(h.root.querySelector('button[data-action="accept"]')).toBeNull();
    expect(h.root.querySelector('.status')?.textContent).toBe('accepted');
  });
});

function ocsrTask(raw: string | null, id = 'run-0001:ocsr:0'): ReviewTask {
  const payload: OcsrTaskPayload = {
    detection: 0,
    page: 1,
    box: [0.1, 0.2, 0.4, 0.5],
    raw_smiles: raw,
    is_markush: false,
  };
  return task(id, 'ocsr', payload);
}

describe('structure review', () => {
  test('valid strings draw, broken strings fall back to the page image', () => {
    const h = harness();
    renderOcsrReview(h.root, [ocsrTask('c1ccccc1')], h.ctx);
    expect(h.root.querySelector('.preview svg')).not.toBeNull();

    const input = h.root.querySelector<HTMLInputElement>('.smiles-input')!;
    input.value = 'c1ccccc'; // unclosed ring
    input.dispatchEvent(new Event('input', { bubbles: true }));
    expect(h.root.querySelector('.preview svg')).toBeNull();
    expect(h.root.querySelector<HTMLImageElement>('.preview img')?.src).toContain('/img/run-0001/1');
  });

  test('saving posts the corrected string', async () => {
    const h = harness();
    renderOcsrReview(h.root, [ocsrTask('CCCCCCC')], h.ctx);
    const input = h.root.querySelector<HTMLInputElement>('.smiles-input')!;
    input.value = '  Cc1ccccc1 ';
    click(h.root.querySelector('button[data-action="edit"]'));
    await flush();
    expect(h.stub.posted[0]).toEqual({
      taskId: 'run-0001:ocsr:0',
      decision: 'edit',
      payload: { smiles: 'Cc1ccccc1' },
    });
  });
});

test('coreference review saves the typed label', async () => {
  const h = harness();
  renderCoreferenceReview(
    h.root,
    [task('run-0001:coreference:0', 'coreference', { detection: 0, coreference: 'Compound 1' })],
    h.ctx,
  );
  const input = h.root.querySelector<HTMLInputElement>('.coref-input')!;
  expect(input.value).toBe('Compound 1');
  input.value = 'Compound 1a';
  click(h.root.querySelector('button[data-action="edit"]'));
  await flush();
  expect(h.stub.posted[0].payload).toEqual({ coreference: 'Compound 1a' });
});

function markushTask(): ReviewTask {
  const payload: MarkushTaskPayload = {
    scaffold_detection: 3,
    row: 0,
    coreference: '4a',
    cells: { R1: { kind: 'abbreviation', payload: 'Me' } },
    hydrogen_default_labels: [],
    enumerated: 'Cc1ccccc1',
    failure: null,
  };
  return task('run-0001:markush:3.0', 'markush', payload);
}

describe('markush review', () => {
  const scaffolds = () => new Map([[3, { smiles: 'c1ccc(cc1)[R1]', page: 2 }]]);

  test('editing a cell updates the preview and posts only that cell', async () => {
    const h = harness();
    renderMarkushReview(h.root, [markushTask()], scaffolds(), h.ctx);
    const before = h.root.querySelector('.preview')!.innerHTML;
    const payloadInput = h.root.querySelector<HTMLInputElement>('input[aria-label="R1 payload"]')!;
    payloadInput.value = 'Et';
    payloadInput.dispatchEvent(new Event('input', { bubbles: true }));
    expect(h.root.querySelector('.preview')!.innerHTML).not.toBe(before);
    click(h.root.querySelector('button[data-action="edit"]'));
    await flush();
    expect(h.stub.posted[0]).toEqual({
      taskId: 'run-0001:markush:3.0',
      decision: 'edit',
      payload: { cells: { R1: { kind: 'abbreviation', payload: 'Et' } } },
    });
  });

  test('saving with no changes is refused locally', async () => {
    const h = harness();
    renderMarkushReview(h.root, [markushTask()], scaffolds(), h.ctx);
    click(h.root.querySelector('button[data-action="edit"]'));
    await flush();
    expect(h.stub.posted).toEqual([]);
    expect(h.notices).toEqual(['no cell changes to save']);
  });

  test('rows without a scaffold string fall back to the page image', () => {
    const h = harness();
    const bare = markushTask();
    (bare.payload as unknown as MarkushTaskPayload).enumerated = null;
    renderMarkushReview(h.root, [bare], new Map(), h.ctx);
    expect(h.root.querySelector('.preview svg')).toBeNull();
    expect(h.root.querySelector('.preview img')).not.toBeNull();
  });
});

function measurementTask(): ReviewTask {
  const payload: MeasurementTaskPayload = {
    index: 0,
    inserted: false,
    record: {
      protein: 'EGFR',
      ligand_coreference: 'Compound 1',
      assay_type: 'IC50',
      relation: '=',
      value: '25',
      unit: 'nM',
      value_nM: '25',
      p_value: '7.602059991327962390427477789',
      modality: 'measured',
      provenance: [[3, 'table-1']],
    },
    measurement: {
      protein: 'EGFR',
      ligand_coreference: 'Compound 1',
      assay_type: 'IC50',
      relation: '=',
      value: '25',
      unit: 'nM',
      modality: 'measured',
      provenance: [[3, 'table-1']],
      uncertainty: null,
      range_low: false,
      range_high: false,
    },
  };
  return task('run-0001:measurement:0', 'measurement', payload);
}

describe('measurement review', () => {
  test('edit form posts the full measurement shape', async () => {
    const h = harness();
    renderMeasurementReview(h.root, [measurementTask()], h.ctx);
    click(h.root.querySelector('button[data-action="edit"]')); // reveal form
    const form = h.root.querySelector('.measure-form')!;
    expect(form.hasAttribute('hidden')).toBe(false);
    form.querySelector<HTMLInputElement>('input[name="value"]')!.value = '30';
    click(form.querySelector('button[data-action="save"]'));
    await flush();
    expect(h.stub.posted[0].taskId).toBe('run-0001:measurement:0');
    expect(h.stub.posted[0].payload).toEqual({
      protein: 'EGFR',
      ligand_coreference: 'Compound 1',
      assay_type: 'IC50',
      relation: '=',
      value: '30',
      unit: 'nM',
      modality: 'measured',
      uncertainty: null,
      range_low: false,
      range_high: false,
      provenance: [[3, 'table-1']],
    });
  });

  test('the insert card posts to the synthetic insert slot', async () => {
    const h = harness();
    renderMeasurementReview(h.root, [], h.ctx);
    const card = h.root.querySelector('.insert-card')!;
    const set = (name: string, v: string) => {
      card.querySelector<HTMLInputElement>(`input[name="${name}"]`)!.value = v;
    };
    set('protein', 'JAK2');
    set('ligand_coreference', 'Compound 9');
    set('assay_type', 'Ki');
    set('value', '12');
    set('page', '4');
    set('region', 'text');
    click(card.querySelector('button[data-action="insert"]'));
    await flush();
    expect(h.stub.posted[0].taskId).toBe('run-0001:measurement:insert');
    expect(h.stub.posted[0].decision).toBe('insert');
    expect(h.stub.posted[0].payload).toMatchObject({
      protein: 'JAK2',
      value: '12',
      unit: 'nM',
      provenance: [[4, 'text']],
    });
  });
});

function triplet(joinKey: string, protein: string, smiles: string): TripletRecord {
  return {
    protein,
    smiles,
    assay_type: 'IC50',
    relation: '=',
    value: '25',
    unit: 'nM',
    value_nM: '25',
    p_value: null,
    join_key: joinKey,
    provenance: [],
    flags: [],
  };
}

describe('annotation review', () => {
  function setup(h: Harness): ReviewTask[] {
    const tasks = [
      task('run-0001:annotation:1.0', 'annotation', {
        index: 0,
        triplet: triplet('1', 'EGFR', 'Cc1ccccc1'),
      } satisfies AnnotationTaskPayload),
      task('run-0001:annotation:1.1', 'annotation', {
        index: 1,
        triplet: triplet('4c', 'EGFR', 'c1ccc(cc1)Cl'),
      } satisfies AnnotationTaskPayload),
    ];
    h.stub.ranking = {
      schema_version: 1,
      run_id: 'run-0001',
      query_smiles: 'Clc1ccccc1',
      candidates: [
        {
          rank: 1,
          similarity: 1.0,
          perfect_match: true,
          exact_match: true,
          triplet: triplet('4c', 'EGFR', 'c1ccc(cc1)Cl'),
        },
        {
          rank: 2,
          similarity: 0.333333,
          perfect_match: false,
          exact_match: false,
          triplet: triplet('1', 'EGFR', 'Cc1ccccc1'),
        },
      ],
    };
    return tasks;
  }

  test('ranking paints candidates and picking accepts the matching task', async () => {
    const h = harness();
    const tasks = setup(h);
    renderAnnotationReview(h.root, tasks, h.ctx);
    h.root.querySelector<HTMLInputElement>('.query-input')!.value = 'Clc1ccccc1';
    click(h.root.querySelector('button[data-action="rank"]'));
    await flush();
    const cards = h.root.querySelectorAll('.candidate');
    expect(cards).toHaveLength(2);
    expect(cards[0].getAttribute('data-rank')).toBe('1');
    expect(cards[0].querySelector('.badge.perfect')).not.toBeNull();
    expect(cards[1].querySelector('.badge.perfect')).toBeNull();
    click(cards[0].querySelector('button[data-action="pick"]'));
    await flush();
    expect(h.stub.posted).toEqual([
      { taskId: 'run-0001:annotation:1.1', decision: 'accept', payload: undefined },
    ]);
  });

  test('picking a triplet with no open task only notifies', async () => {
    const h = harness();
    const tasks = setup(h);
    tasks[1].status = 'accepted';
    renderAnnotationReview(h.root, tasks, h.ctx);
    h.root.querySelector<HTMLInputElement>('.query-input')!.value = 'Clc1ccccc1';
    click(h.root.querySelector('button[data-action="rank"]'));
    await flush();
    const first = h.root.querySelector('.candidate');
    click(first!.querySelector('button[data-action="pick"]'));
    await flush();
    expect(h.stub.posted).toEqual([]);
    expect(h.notices).toEqual(['no open task holds that triplet']);
  });
});
