// Task queue bookkeeping for a single run. All counts come from the
// last server summary; nothing here increments or decrements locally,
// so a refresh after every decision keeps the display honest.

import { STAGES } from './types.js';
import type { ReviewTask, RunSummary, Stage, StageCounts } from './types.js';

export class QueueView {
  private summary: RunSummary | null = null;
  private taskLists: Map<Stage, ReviewTask[]> = new Map();

  syncSummary(summary: RunSummary): void {
    this.summary = summary;
  }

  syncTasks(stage: Stage, tasks: ReviewTask[]): void {
    this.taskLists.set(stage, [...tasks]);
  }

  counts(stage: Stage): StageCounts | null {
    if (this.summary === null) return null;
    return this.summary.stages[stage] ?? null;
  }

  tasks(stage: Stage): ReviewTask[] {
    return this.taskLists.get(stage) ?? [];
  }

  pending(stage: Stage): ReviewTask[] {
    return this.tasks(stage).filter((t) => t.status === 'pending');
  }

  nextPending(stage: Stage, afterTaskId?: string): ReviewTask | null {
    const open = this.pending(stage);
    if (open.length === 0) return null;
    if (afterTaskId !== undefined) {
      const idx = open.findIndex((t) => t.id === afterTaskId);
      if (idx >= 0 && idx + 1 < open.length) return open[idx + 1];
    }
    return open[0];
  }

  /** First stage, in review order, with pending work left. */
  firstOpenStage(): Stage | null {
    if (this.summary === null) return null;
    for (const stage of STAGES) {
      const c = this.summary.stages[stage];
      if (c !== undefined && c.pending > 0) return stage;
    }
    return null;
  }

  totalPending(): number {
    if (this.summary === null) return 0;
    let total = 0;
    for (const stage of STAGES) {
      const c = this.summary.stages[stage];
      if (c !== undefined) total += c.pending;
    }
    return total;
  }
}
