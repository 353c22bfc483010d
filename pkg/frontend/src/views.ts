// Stage views. Each render function paints one stage's task list into a
// container and wires its controls straight to the decision endpoint.
// Nothing here caches or mutates review state locally: a control posts a
// decision, then ctx.refresh() repaints from whatever the server says.

import type {
  AnnotationCandidate,
  AnnotationTaskPayload,
  CoreferenceTaskPayload,
  Decision,
  DetectionTaskPayload,
  MarkushTaskPayload,
  MeasurementJson,
  MeasurementTaskPayload,
  OcsrTaskPayload,
  ReviewTask,
  TripletRecord,
} from './types.js';
import { CurationClient } from './api.js';
import { graphSvg, moleculeSvg } from './draw.js';
import { MarkushEditorState } from './markush.js';

export interface ViewContext {
  client: CurationClient;
  runId: string;
  refresh: () => Promise<void>;
  notify?: (message: string) => void;
}

export interface ScaffoldInfo {
  smiles: string | null;
  page: number;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  if (text !== undefined) node.textContent = text;
  return node;
}

function say(ctx: ViewContext, message: string): void {
  if (ctx.notify) ctx.notify(message);
}

/** Post a decision, surface any server complaint, repaint regardless. */
async function decide(
  ctx: ViewContext,
  taskId: string,
  decision: Decision,
  payload?: Record<string, unknown>,
): Promise<void> {
  try {
    await ctx.client.submitDecision(taskId, decision, payload);
  } catch (err) {
    say(ctx, err instanceof Error ? err.message : String(err));
  } finally {
    await ctx.refresh();
  }
}

function statusChip(task: ReviewTask): HTMLElement {
  return el('span', { class: `status status-${task.status}` }, task.status);
}

function taskCard(task: ReviewTask, title: string): HTMLElement {
  const card = el('div', { class: 'task-card', 'data-task-id': task.id, tabindex: '0' });
  const head = el('div', { class: 'task-head' });
  head.appendChild(el('span', { class: 'task-title' }, title));
  head.appendChild(statusChip(task));
  card.appendChild(head);
  return card;
}

function actionButton(
  card: HTMLElement,
  action: string,
  label: string,
  onClick: () => void,
): HTMLButtonElement {
  const btn = el('button', { type: 'button', 'data-action': action }, label);
  btn.addEventListener('click', onClick);
  card.appendChild(btn);
  return btn;
}

function actionRow(card: HTMLElement): HTMLElement {
  const row = el('div', { class: 'actions' });
  card.appendChild(row);
  return row;
}

/** Move a box by (dx, dy) page fractions without letting it leave the page. */
export function shiftBox(box: number[], dx: number, dy: number): number[] {
  const w = box[2] - box[0];
  const h = box[3] - box[1];
  const x0 = Math.min(Math.max(box[0] + dx, 0), 1 - w);
  const y0 = Math.min(Math.max(box[1] + dy, 0), 1 - h);
  return [x0, y0, x0 + w, y0 + h];
}

/** Order the corners and clamp to the page. */
export function clampBox(box: number[]): number[] {
  let [x0, y0, x1, y1] = box;
  if (x1 < x0) [x0, x1] = [x1, x0];
  if (y1 < y0) [y0, y1] = [y1, y0];
  const c = (v: number) => Math.min(Math.max(v, 0), 1);
  return [c(x0), c(y0), c(x1), c(y1)];
}

export function renderDetectionReview(
  root: HTMLElement,
  tasks: ReviewTask[],
  ctx: ViewContext,
): void {
  root.textContent = '';
  for (const task of tasks) {
    const p = task.payload as unknown as DetectionTaskPayload;
    const d = p.detection;
    const card = taskCard(task, `Detection ${d.id} on page ${d.page}`);
    if (d.is_markush) card.appendChild(el('span', { class: 'badge' }, 'Markush'));
    for (const flag of p.flags) card.appendChild(el('span', { class: 'badge flag' }, flag));

    const wrap = el('div', { class: 'page-wrap', style: 'position:relative' });
    const img = el('img', {
      class: 'page-image',
      src: ctx.client.pageImageUrl(ctx.runId, d.page),
      alt: `page ${d.page}`,
    });
    wrap.appendChild(img);
    const overlay = el('div', { class: 'det-box' });
    wrap.appendChild(overlay);
    card.appendChild(wrap);

    const coordRow = el('div', { class: 'coords' });
    const inputs: HTMLInputElement[] = [];
    ['x0', 'y0', 'x1', 'y1'].forEach((name, k) => {
      const input = el('input', {
        type: 'number',
        step: '0.001',
        min: '0',
        max: '1',
        name,
        'aria-label': name,
      });
      input.value = String(d.box[k]);
      inputs.push(input);
      coordRow.appendChild(el('label', {}, name));
      coordRow.appendChild(input);
    });
    card.appendChild(coordRow);

    const paintOverlay = () => {
      const b = inputs.map((i) => parseFloat(i.value) || 0);
      overlay.setAttribute(
        'style',
        'position:absolute;border:2px solid #e33;pointer-events:auto;' +
          `left:${(b[0] * 100).toFixed(2)}%;top:${(b[1] * 100).toFixed(2)}%;` +
          `width:${((b[2] - b[0]) * 100).toFixed(2)}%;height:${((b[3] - b[1]) * 100).toFixed(2)}%`,
      );
    };
    paintOverlay();
    inputs.forEach((i) => i.addEventListener('input', paintOverlay));

    // drag the overlay to move the whole box; corners stay put until the
    // next Save. jsdom has no layout, hence the || fallbacks.
    let dragFrom: { x: number; y: number; box: number[] } | null = null;
    overlay.addEventListener('mousedown', (e: MouseEvent) => {
      dragFrom = { x: e.clientX, y: e.clientY, box: inputs.map((i) => parseFloat(i.value) || 0) };
      e.preventDefault();
    });
    wrap.addEventListener('mousemove', (e: MouseEvent) => {
      if (dragFrom === null) return;
      const pw = wrap.clientWidth || 600;
      const ph = wrap.clientHeight || 800;
      const moved = shiftBox(dragFrom.box, (e.clientX - dragFrom.x) / pw, (e.clientY - dragFrom.y) / ph);
      moved.forEach((v, k) => {
        inputs[k].value = v.toFixed(4);
      });
      paintOverlay();
    });
    wrap.addEventListener('mouseup', () => {
      dragFrom = null;
    });

    const actions = actionRow(card);
    if (task.status === 'pending') {
      actionButton(actions, 'accept', 'Accept', () => void decide(ctx, task.id, 'accept'));
      actionButton(actions, 'edit', 'Save box', () => {
        const box = clampBox(inputs.map((i) => parseFloat(i.value) || 0));
        void decide(ctx, task.id, 'edit', { box });
      });
      actionButton(actions, 'reject', 'Reject', () => void decide(ctx, task.id, 'reject'));
    }
    root.appendChild(card);
  }
}

export function renderOcsrReview(root: HTMLElement, tasks: ReviewTask[], ctx: ViewContext): void {
  root.textContent = '';
  for (const task of tasks) {
    const p = task.payload as unknown as OcsrTaskPayload;
    const card = taskCard(task, `Structure for detection ${p.detection}, page ${p.page}`);
    if (p.is_markush) card.appendChild(el('span', { class: 'badge' }, 'Markush scaffold'));

    const split = el('div', { class: 'split' });
    const left = el('div', { class: 'split-left' });
    const input = el('input', { type: 'text', class: 'smiles-input', 'aria-label': 'smiles' });
    input.value = p.raw_smiles ?? '';
    left.appendChild(input);
    split.appendChild(left);

    const preview = el('div', { class: 'preview' });
    split.appendChild(preview);
    card.appendChild(split);

    const paintPreview = () => {
      preview.textContent = '';
      const svg = input.value.trim() === '' ? null : moleculeSvg(input.value.trim());
      if (svg !== null) {
        preview.innerHTML = svg;
      } else {
        // reader could not draw it: show the region's page instead
        preview.appendChild(
          el('img', {
            class: 'page-image',
            src: ctx.client.pageImageUrl(ctx.runId, p.page),
            alt: `page ${p.page}`,
          }),
        );
        preview.appendChild(el('div', { class: 'note' }, 'no drawing for this string'));
      }
    };
    paintPreview();
    input.addEventListener('input', paintPreview);

    const actions = actionRow(card);
    if (task.status === 'pending') {
      actionButton(actions, 'accept', 'Accept', () => void decide(ctx, task.id, 'accept'));
      actionButton(actions, 'edit', 'Save reading', () => {
        void decide(ctx, task.id, 'edit', { smiles: input.value.trim() });
      });
      actionButton(actions, 'reject', 'Reject', () => void decide(ctx, task.id, 'reject'));
    }
    root.appendChild(card);
  }
}

export function renderCoreferenceReview(
  root: HTMLElement,
  tasks: ReviewTask[],
  ctx: ViewContext,
): void {
  root.textContent = '';
  for (const task of tasks) {
    const p = task.payload as unknown as CoreferenceTaskPayload;
    const card = taskCard(task, `Label for detection ${p.detection}`);
    const input = el('input', { type: 'text', class: 'coref-input', 'aria-label': 'coreference' });
    input.value = p.coreference ?? '';
    card.appendChild(input);

    const actions = actionRow(card);
    if (task.status === 'pending') {
      actionButton(actions, 'accept', 'Accept', () => void decide(ctx, task.id, 'accept'));
      actionButton(actions, 'edit', 'Save label', () => {
        void decide(ctx, task.id, 'edit', { coreference: input.value.trim() });
      });
      actionButton(actions, 'reject', 'Reject', () => void decide(ctx, task.id, 'reject'));
    }
    root.appendChild(card);
  }
}

const CELL_KINDS = [
  'hydrogen',
  'abbreviation',
  'formula',
  'fragment_smiles',
  'iupac_name',
  'visual_index',
];

export function renderMarkushReview(
  root: HTMLElement,
  tasks: ReviewTask[],
  scaffolds: Map<number, ScaffoldInfo>,
  ctx: ViewContext,
): void {
  root.textContent = '';
  for (const task of tasks) {
    const p = task.payload as unknown as MarkushTaskPayload;
    const info = scaffolds.get(p.scaffold_detection);
    const state = new MarkushEditorState(
      p,
      info?.smiles ?? null,
      ctx.client.pageImageUrl(ctx.runId, info?.page ?? 1),
    );
    const card = taskCard(task, `Row ${p.coreference} of scaffold ${p.scaffold_detection}`);

    const grid = el('div', { class: 'cell-grid' });
    const preview = el('div', { class: 'preview' });

    const paintPreview = () => {
      preview.textContent = '';
      const g = state.previewGraph();
      if (g !== null) {
        preview.innerHTML = graphSvg(g);
        return;
      }
      if (p.enumerated !== null) {
        const svg = moleculeSvg(p.enumerated);
        if (svg !== null) {
          preview.innerHTML = svg;
          return;
        }
      }
      if (p.failure !== null) {
        preview.appendChild(
          el('div', { class: 'note failure' }, `${p.failure.cause}: ${p.failure.detail}`),
        );
      }
      preview.appendChild(el('img', { class: 'page-image', src: state.imageUrl, alt: 'page' }));
    };

    for (const label of state.labels()) {
      const cell = state.cell(label);
      grid.appendChild(el('span', { class: 'cell-label' }, label));
      const kindSel = el('select', { 'aria-label': `${label} kind` });
      for (const kind of CELL_KINDS) {
        const opt = el('option', { value: kind }, kind);
        if (kind === cell.kind) opt.setAttribute('selected', '');
        kindSel.appendChild(opt);
      }
      const payloadInput = el('input', { type: 'text', 'aria-label': `${label} payload` });
      payloadInput.value = cell.payload;
      const sync = () => {
        state.setCell(label, kindSel.value, payloadInput.value.trim());
        paintPreview();
      };
      kindSel.addEventListener('change', sync);
      payloadInput.addEventListener('input', sync);
      grid.appendChild(kindSel);
      grid.appendChild(payloadInput);
    }
    card.appendChild(grid);
    card.appendChild(preview);
    paintPreview();

    const actions = actionRow(card);
    if (task.status === 'pending') {
      actionButton(actions, 'accept', 'Accept', () => void decide(ctx, task.id, 'accept'));
      actionButton(actions, 'edit', 'Save row', () => {
        const payload = state.decisionPayload();
        if (Object.keys(payload.cells).length === 0) {
          say(ctx, 'no cell changes to save');
          return;
        }
        void decide(ctx, task.id, 'edit', payload);
      });
      actionButton(actions, 'reject', 'Reject', () => void decide(ctx, task.id, 'reject'));
    }
    root.appendChild(card);
  }
}

function fmtProvenance(prov: [number, string][]): string {
  return prov.map(([page, region]) => `p${page}:${region}`).join(' ');
}

interface MeasurementForm {
  node: HTMLElement;
  read: () => Record<string, unknown>;
}

// full measurement shape; edits and inserts both post every field
function measurementForm(seed: MeasurementJson): MeasurementForm {
  const node = el('div', { class: 'measure-form' });
  const fields = new Map<string, HTMLInputElement>();
  const text = (name: string, value: string) => {
    node.appendChild(el('label', {}, name));
    const input = el('input', { type: 'text', name, 'aria-label': name });
    input.value = value;
    fields.set(name, input);
    node.appendChild(input);
  };
  text('protein', seed.protein);
  text('ligand_coreference', seed.ligand_coreference);
  text('assay_type', seed.assay_type);

  node.appendChild(el('label', {}, 'relation'));
  const relation = el('select', { name: 'relation', 'aria-label': 'relation' });
  for (const r of ['=', '<', '>', '≤', '≥', '~']) {
    const opt = el('option', { value: r }, r);
    if (r === seed.relation) opt.setAttribute('selected', '');
    relation.appendChild(opt);
  }
  node.appendChild(relation);

  text('value', seed.value);
  text('unit', seed.unit);
  text('modality', seed.modality);
  text('uncertainty', seed.uncertainty ?? '');

  const flag = (name: string, on: boolean) => {
    const label = el('label', { class: 'check' }, name);
    const box = el('input', { type: 'checkbox', name, 'aria-label': name });
    box.checked = on;
    fields.set(name, box);
    label.prepend(box);
    node.appendChild(label);
  };
  flag('range_low', seed.range_low);
  flag('range_high', seed.range_high);

  text('page', seed.provenance.length > 0 ? String(seed.provenance[0][0]) : '1');
  text('region', seed.provenance.length > 0 ? seed.provenance[0][1] : '');

  const read = (): Record<string, unknown> => {
    const get = (name: string) => fields.get(name)!.value.trim();
    const uncertainty = get('uncertainty');
    return {
      protein: get('protein'),
      ligand_coreference: get('ligand_coreference'),
      assay_type: get('assay_type'),
      relation: relation.value,
      value: get('value'),
      unit: get('unit'),
      modality: get('modality'),
      uncertainty: uncertainty === '' ? null : uncertainty,
      range_low: fields.get('range_low')!.checked,
      range_high: fields.get('range_high')!.checked,
      provenance: [[parseInt(get('page'), 10) || 1, get('region')]],
    };
  };
  return { node, read };
}

const EMPTY_MEASUREMENT: MeasurementJson = {
  protein: '',
  ligand_coreference: '',
  assay_type: '',
  relation: '=',
  value: '',
  unit: 'nM',
  modality: 'measured',
  provenance: [],
  uncertainty: null,
  range_low: false,
  range_high: false,
};

export function renderMeasurementReview(
  root: HTMLElement,
  tasks: ReviewTask[],
  ctx: ViewContext,
): void {
  root.textContent = '';
  for (const task of tasks) {
    const p = task.payload as unknown as MeasurementTaskPayload;
    const r = p.record;
    const card = taskCard(
      task,
      `${r.protein} ${r.assay_type} ${r.relation} ${r.value} ${r.unit} (${r.ligand_coreference})`,
    );
    if (p.inserted) card.appendChild(el('span', { class: 'badge' }, 'inserted'));
    const detail = el('div', { class: 'measure-detail' });
    detail.appendChild(el('span', {}, `modality ${r.modality}`));
    if (r.value_nM !== null) detail.appendChild(el('span', {}, `${r.value_nM} nM`));
    if (r.p_value !== null) detail.appendChild(el('span', {}, `p-value ${r.p_value}`));
    detail.appendChild(el('span', { class: 'prov' }, fmtProvenance(r.provenance)));
    card.appendChild(detail);

    const actions = actionRow(card);
    if (task.status === 'pending') {
      actionButton(actions, 'accept', 'Accept', () => void decide(ctx, task.id, 'accept'));
      const form = measurementForm(p.measurement);
      form.node.setAttribute('hidden', '');
      actionButton(actions, 'edit', 'Edit', () => {
        form.node.toggleAttribute('hidden');
      });
      actionButton(actions, 'reject', 'Reject', () => void decide(ctx, task.id, 'reject'));
      card.appendChild(form.node);
      const save = el('button', { type: 'button', 'data-action': 'save' }, 'Save measurement');
      save.addEventListener('click', () => void decide(ctx, task.id, 'edit', form.read()));
      form.node.appendChild(save);
    }
    root.appendChild(card);
  }

  // manual entry for anything the extractor missed entirely
  const insertCard = el('div', { class: 'task-card insert-card', tabindex: '0' });
  insertCard.appendChild(el('div', { class: 'task-title' }, 'Add missed measurement'));
  const form = measurementForm(EMPTY_MEASUREMENT);
  insertCard.appendChild(form.node);
  const insertBtn = el('button', { type: 'button', 'data-action': 'insert' }, 'Insert');
  insertBtn.addEventListener('click', () => {
    void decide(ctx, `${ctx.runId}:measurement:insert`, 'insert', form.read());
  });
  insertCard.appendChild(insertBtn);
  root.appendChild(insertCard);
}

function tripletLine(t: TripletRecord): string {
  return `${t.join_key} ${t.protein} ${t.assay_type} ${t.relation} ${t.value} ${t.unit}`;
}

function sameTriplet(a: TripletRecord, b: TripletRecord): boolean {
  return (
    a.join_key === b.join_key &&
    a.protein === b.protein &&
    a.assay_type === b.assay_type &&
    a.relation === b.relation &&
    a.value === b.value &&
    a.unit === b.unit
  );
}

export function renderAnnotationReview(
  root: HTMLElement,
  tasks: ReviewTask[],
  ctx: ViewContext,
): void {
  root.textContent = '';
  for (const task of tasks) {
    const p = task.payload as unknown as AnnotationTaskPayload;
    const card = taskCard(task, tripletLine(p.triplet));
    const svg = moleculeSvg(p.triplet.smiles);
    if (svg !== null) {
      const preview = el('div', { class: 'preview small' });
      preview.innerHTML = svg;
      card.appendChild(preview);
    }
    for (const flag of p.triplet.flags) card.appendChild(el('span', { class: 'badge flag' }, flag));
    const actions = actionRow(card);
    if (task.status === 'pending') {
      actionButton(actions, 'accept', 'Accept', () => void decide(ctx, task.id, 'accept'));
      actionButton(actions, 'reject', 'Reject', () => void decide(ctx, task.id, 'reject'));
    }
    root.appendChild(card);
  }

  // annotation helper: rank exported triplets against a query structure,
  // then accept whichever task holds the picked triplet
  const panel = el('div', { class: 'rank-panel' });
  panel.appendChild(el('div', { class: 'task-title' }, 'Find matching triplet'));
  const query = el('input', { type: 'text', 'aria-label': 'query smiles', class: 'query-input' });
  panel.appendChild(query);
  const results = el('div', { class: 'rank-results' });
  const runQuery = el('button', { type: 'button', 'data-action': 'rank' }, 'Rank');
  runQuery.addEventListener('click', () => {
    void (async () => {
      results.textContent = '';
      let ranking;
      try {
        ranking = await ctx.client.annotationCandidates(ctx.runId, query.value.trim(), 10);
      } catch (err) {
        say(ctx, err instanceof Error ? err.message : String(err));
        return;
      }
      for (const cand of ranking.candidates) {
        results.appendChild(candidateCard(cand, tasks, ctx));
      }
      if (ranking.candidates.length === 0) {
        results.appendChild(el('div', { class: 'note' }, 'no candidates'));
      }
    })();
  });
  panel.appendChild(runQuery);
  const clear = el('button', { type: 'button', 'data-action': 'clear' }, 'Clear');
  clear.addEventListener('click', () => {
    results.textContent = '';
    query.value = '';
  });
  panel.appendChild(clear);
  panel.appendChild(results);
  root.appendChild(panel);
}

function candidateCard(
  cand: AnnotationCandidate,
  tasks: ReviewTask[],
  ctx: ViewContext,
): HTMLElement {
  const card = el('div', { class: 'candidate', 'data-rank': String(cand.rank) });
  const head = el('div', { class: 'candidate-head' });
  head.appendChild(el('span', { class: 'rank' }, `#${cand.rank}`));
  head.appendChild(el('span', { class: 'similarity' }, cand.similarity.toFixed(3)));
  if (cand.perfect_match) head.appendChild(el('span', { class: 'badge perfect' }, 'perfect'));
  card.appendChild(head);
  card.appendChild(el('div', { class: 'candidate-line' }, tripletLine(cand.triplet)));
  const svg = moleculeSvg(cand.triplet.smiles);
  if (svg !== null) {
    const preview = el('div', { class: 'preview small' });
    preview.innerHTML = svg;
    card.appendChild(preview);
  }
  const pick = el('button', { type: 'button', 'data-action': 'pick' }, 'Pick');
  pick.addEventListener('click', () => {
    const target = tasks.find((t) => {
      if (t.status !== 'pending') return false;
      const tp = t.payload as unknown as AnnotationTaskPayload;
      return sameTriplet(tp.triplet, cand.triplet);
    });
    if (target === undefined) {
      say(ctx, 'no open task holds that triplet');
      return;
    }
    void decide(ctx, target.id, 'accept');
  });
  card.appendChild(pick);
  return card;
}
