// Application shell: run picker, stage tabs, status line, keyboard
// triage. The shell owns no review state; every repaint starts from a
// fresh summary and task listing, so reloading the page mid-review
// always lands on exactly what the server has.

import { CurationClient } from './api.js';
import { QueueView } from './queue.js';
import { STAGES } from './types.js';
import type { OcsrTaskPayload, RunSummary, Stage } from './types.js';
import type { ScaffoldInfo, ViewContext } from './views.js';
import {
  renderAnnotationReview,
  renderCoreferenceReview,
  renderDetectionReview,
  renderMarkushReview,
  renderMeasurementReview,
  renderOcsrReview,
} from './views.js';

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

export class App {
  readonly client: CurationClient;
  readonly root: HTMLElement;
  readonly queue = new QueueView();
  runId: string | null = null;
  stage: Stage = 'detection';
  private summary: RunSummary | null = null;
  private scaffolds = new Map<number, ScaffoldInfo>();
  private statusMessage = '';
  private chain: Promise<void> = Promise.resolve();

  constructor(root: HTMLElement, client: CurationClient) {
    this.root = root;
    this.client = client;
  }

  async start(): Promise<void> {
    document.addEventListener('keydown', (e) => this.onKey(e));
    const hash = window.location.hash.replace(/^#/, '');
    if (hash !== '') {
      const [runId, stage] = hash.split('/');
      await this.openRun(runId, STAGES.includes(stage as Stage) ? (stage as Stage) : 'detection');
    } else {
      await this.paintPicker();
    }
  }

  async openRun(runId: string, stage: Stage = 'detection'): Promise<void> {
    this.runId = runId;
    this.stage = stage;
    window.location.hash = `${runId}/${stage}`;
    await this.refresh();
  }

  async switchStage(stage: Stage): Promise<void> {
    this.stage = stage;
    if (this.runId !== null) window.location.hash = `${this.runId}/${stage}`;
    await this.refresh();
  }

  setStatus(message: string): void {
    this.statusMessage = message;
    const bar = this.root.querySelector('.status-bar');
    if (bar !== null) bar.textContent = message;
  }

  /**
   * Re-pull summary and the active stage's tasks, then repaint.
   * Refreshes are chained: overlapping triggers (a decision racing a
   * stage switch, say) paint one after the other instead of tearing
   * down DOM another handler is still writing into.
   */
  refresh(): Promise<void> {
    this.chain = this.chain.then(() => this.doRefresh());
    return this.chain;
  }

  /** Settles when every queued repaint has landed. */
  idle(): Promise<void> {
    return this.chain;
  }

  private async doRefresh(): Promise<void> {
    if (this.runId === null) {
      await this.paintPicker();
      return;
    }
    try {
      this.summary = await this.client.getRun(this.runId);
      this.queue.syncSummary(this.summary);
      const listing = await this.client.listTasks(this.runId, this.stage);
      this.queue.syncTasks(this.stage, listing.tasks);
      if (this.stage === 'markush') {
        // row previews need the scaffold strings, which live on the
        // ocsr tasks for the Markush-flagged detections
        const ocsr = await this.client.listTasks(this.runId, 'ocsr');
        this.scaffolds.clear();
        for (const t of ocsr.tasks) {
          const p = t.payload as unknown as OcsrTaskPayload;
          if (p.is_markush) this.scaffolds.set(p.detection, { smiles: p.raw_smiles, page: p.page });
        }
      }
    } catch (err) {
      this.setStatus(err instanceof Error ? err.message : String(err));
      return;
    }
    this.paint();
  }

  private viewContext(): ViewContext {
    return {
      client: this.client,
      runId: this.runId!,
      refresh: () => this.refresh(),
      notify: (m) => this.setStatus(m),
    };
  }

  private paint(): void {
    const focused = document.activeElement?.closest?.('.task-card')?.getAttribute('data-task-id');
    this.root.textContent = '';
    if (this.runId === null || this.summary === null) return;
    const s = this.summary;

    const header = el('header', { class: 'top' });
    header.appendChild(el('span', { class: 'app-name' }, 'extraction review'));
    header.appendChild(el('span', { class: 'run-id' }, this.runId));
    header.appendChild(el('span', { class: 'chip' }, `epoch ${s.epoch}`));
    header.appendChild(el('span', { class: 'chip' }, `export v${s.export_version}`));
    if (s.dirty.length > 0) {
      header.appendChild(el('span', { class: 'chip dirty' }, `dirty: ${s.dirty.join(', ')}`));
    }
    header.appendChild(
      el(
        'span',
        { class: 'chip counts' },
        `${s.counts.detections} det / ${s.counts.structures} str / ` +
          `${s.counts.measurements} meas / ${s.counts.triplets} trip`,
      ),
    );
    this.root.appendChild(header);

    const tabs = el('nav', { class: 'tabs' });
    STAGES.forEach((stage, i) => {
      const c = this.queue.counts(stage);
      const label = c === null ? stage : `${stage} ${c.pending}/${c.total}`;
      const tab = el(
        'button',
        { type: 'button', 'data-stage': stage, class: stage === this.stage ? 'tab active' : 'tab' },
        `${i + 1} ${label}`,
      );
      tab.addEventListener('click', () => void this.switchStage(stage));
      tabs.appendChild(tab);
    });
    this.root.appendChild(tabs);

    const toolbar = el('div', { class: 'toolbar' });
    const recompute = el('button', { type: 'button', 'data-action': 'recompute' }, 'Recompute');
    recompute.addEventListener('click', () => void this.recompute());
    toolbar.appendChild(recompute);
    toolbar.appendChild(
      el(
        'a',
        { href: this.client.exportUrl(this.runId, 'json'), 'data-action': 'export', download: '' },
        'Export JSON',
      ),
    );
    toolbar.appendChild(
      el(
        'a',
        {
          href: this.client.exportUrl(this.runId, 'jsonl'),
          'data-action': 'export-jsonl',
          download: '',
        },
        'Export JSONL',
      ),
    );
    const back = el('button', { type: 'button', 'data-action': 'runs' }, 'Runs');
    back.addEventListener('click', () => {
      this.runId = null;
      window.location.hash = '';
      void this.paintPicker();
    });
    toolbar.appendChild(back);
    this.root.appendChild(toolbar);

    this.root.appendChild(el('div', { class: 'status-bar' }, this.statusMessage));

    const stageRoot = el('div', { class: 'stage-root' });
    this.root.appendChild(stageRoot);
    const ctx = this.viewContext();
    const tasks = this.queue.tasks(this.stage);
    if (this.stage === 'detection') renderDetectionReview(stageRoot, tasks, ctx);
    else if (this.stage === 'ocsr') renderOcsrReview(stageRoot, tasks, ctx);
    else if (this.stage === 'coreference') renderCoreferenceReview(stageRoot, tasks, ctx);
    else if (this.stage === 'markush') renderMarkushReview(stageRoot, tasks, this.scaffolds, ctx);
    else if (this.stage === 'measurement') renderMeasurementReview(stageRoot, tasks, ctx);
    else renderAnnotationReview(stageRoot, tasks, ctx);

    if (focused) {
      const again = this.root.querySelector<HTMLElement>(`[data-task-id="${focused}"]`);
      if (again !== null) again.focus();
    }
  }

  async recompute(): Promise<void> {
    if (this.runId === null) return;
    try {
      await this.client.recompute(this.runId);
      this.setStatus('recomputed');
    } catch (err) {
      this.setStatus(err instanceof Error ? err.message : String(err));
    }
    await this.refresh();
  }

  private async paintPicker(): Promise<void> {
    this.root.textContent = '';
    const panel = el('div', { class: 'picker' });
    panel.appendChild(el('h1', {}, 'extraction review'));
    this.root.appendChild(panel);
    this.root.appendChild(el('div', { class: 'status-bar' }, this.statusMessage));

    let runs;
    try {
      runs = await this.client.listRuns();
    } catch (err) {
      this.setStatus(err instanceof Error ? err.message : String(err));
      return;
    }
    const list = el('ul', { class: 'run-list' });
    for (const meta of runs) {
      const item = el('li', {});
      const open = el('button', { type: 'button', 'data-run': meta.run_id }, meta.run_id);
      open.addEventListener('click', () => void this.openRun(meta.run_id));
      item.appendChild(open);
      item.appendChild(el('span', { class: 'doc-id' }, meta.doc_id));
      list.appendChild(item);
    }
    panel.appendChild(list);

    const form = el('div', { class: 'ingest' });
    const input = el('input', { type: 'text', 'aria-label': 'source path', class: 'source-path' });
    form.appendChild(input);
    const ingest = el('button', { type: 'button', 'data-action': 'ingest' }, 'Ingest');
    ingest.addEventListener('click', () => {
      void (async () => {
        try {
          const resp = await this.client.createRun({ source_path: input.value.trim() });
          await this.openRun(resp.run_id);
        } catch (err) {
          this.setStatus(err instanceof Error ? err.message : String(err));
        }
      })();
    });
    form.appendChild(ingest);
    panel.appendChild(form);
  }

  private onKey(e: KeyboardEvent): void {
    const target = e.target as HTMLElement | null;
    const tag = target?.tagName ?? '';
    if (tag === 'INPUT' || tag === 'TEXTAREA' || tag === 'SELECT') return;
    if (this.runId === null) return;

    const idx = parseInt(e.key, 10);
    if (idx >= 1 && idx <= STAGES.length) {
      void this.switchStage(STAGES[idx - 1]);
      return;
    }
    const cards = Array.from(this.root.querySelectorAll<HTMLElement>('.task-card'));
    const active = document.activeElement?.closest?.('.task-card') ?? null;
    const pos = active === null ? -1 : cards.indexOf(active as HTMLElement);
    if (e.key === 'j') {
      const next = cards[Math.min(pos + 1, cards.length - 1)];
      if (next !== undefined) next.focus();
    } else if (e.key === 'k') {
      const prior = cards[Math.max(pos - 1, 0)];
      if (prior !== undefined) prior.focus();
    } else if (e.key === 'a' && active !== null) {
      active.querySelector<HTMLButtonElement>('button[data-action="accept"]')?.click();
    } else if (e.key === 'x' && active !== null) {
      active.querySelector<HTMLButtonElement>('button[data-action="reject"]')?.click();
    } else if (e.key === 'e' && active !== null) {
      active.querySelector<HTMLElement>('input, select')?.focus();
    } else if (e.key === 'g') {
      void this.recompute();
    }
  }
}

/**
 * Mount the app on #app. Tests call this with an explicit base URL;
 * the browser entry point relies on same-origin serving (see server.js).
 */
export async function boot(baseUrl?: string): Promise<App | null> {
  const rootEl = document.getElementById('app');
  if (rootEl === null) return null;
  const client = new CurationClient(baseUrl ?? window.location.origin);
  const app = new App(rootEl, client);
  await app.start();
  return app;
}
