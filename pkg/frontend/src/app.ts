/**
 * Controller: wires API calls, view state, rendering, and the keyboard
 * flow (y / n / u to pick a verdict, Enter to submit with the comment).
 *
 * Answers are always submitted for the indicator and seq token of the
 * last `next` payload, so the client cannot answer a non-current
 * question; a 409 refreshes state from the server instead of retrying.
 */

import { ApiClient, ApiError } from './api.js';
import { applySessionUpdate, initialState, toggleBlock, type SessionViewState } from './state.js';
import { render, type Handlers } from './views.js';

export class App {
  state: SessionViewState = initialState();
  private lastFailed: (() => Promise<void>) | null = null;
  private keydownHandler = (event: KeyboardEvent) => this.onKeydown(event);

  constructor(
    private api: ApiClient,
    private mount: HTMLElement,
  ) {}

  async boot(): Promise<void> {
    document.addEventListener('keydown', this.keydownHandler);
    await this.guard(async () => {
      this.state.catalogs = await this.api.listCatalogs();
      if (this.state.catalogs.length === 1) {
        await this.pickCatalog(this.state.catalogs[0].catalog_id);
      }
    });
    this.draw();
  }

  dispose(): void {
    document.removeEventListener('keydown', this.keydownHandler);
  }

  private handlers(): Handlers {
    return {
      onToggleBlock: (blockId) => {
        toggleBlock(this.state, blockId);
        this.draw();
      },
      onPickCatalog: (catalogId) => {
        void this.guard(() => this.pickCatalog(catalogId)).then(() => this.draw());
      },
      onStart: () => void this.start(),
      onRetry: () => void this.retry(),
      onVerdict: (verdict) => void this.chooseVerdict(verdict),
      onSubmit: () => void this.submit(),
      onUndoLast: () => this.openRevision(undefined),
      onRevise: (blockId, number) => this.openRevision({ block_id: blockId, number }),
      onCancelRevise: () => {
        this.state.revising = null;
        this.draw();
      },
    };
  }

  draw(): void {
    // a redraw replaces the DOM; carry the draft comment across
    const draft = this.mount.querySelector<HTMLTextAreaElement>('#comment')?.value ?? '';
    render(this.state, this.handlers(), this.mount);
    const comment = this.mount.querySelector<HTMLTextAreaElement>('#comment');
    if (comment && this.state.pendingVerdict !== null) comment.value = draft;
  }

  private async guard(action: () => Promise<void>): Promise<void> {
    try {
      await action();
      this.state.error = null;
      this.lastFailed = null;
    } catch (err) {
      this.state.error = err instanceof ApiError ? `${err.code}: ${err.message}` : String(err);
      this.lastFailed = action;
    }
  }

  private async retry(): Promise<void> {
    const failed = this.lastFailed;
    if (failed) {
      await this.guard(failed);
    } else if (this.state.catalogs.length === 0) {
      await this.guard(async () => {
        this.state.catalogs = await this.api.listCatalogs();
      });
    }
    this.draw();
  }

  private async pickCatalog(catalogId: string): Promise<void> {
    const catalog = this.state.catalogs.find((c) => c.catalog_id === catalogId) ?? null;
    this.state.catalog = catalog;
    this.state.selectedBlocks = [];
    this.state.detail = catalog ? await this.api.catalogDetail(catalogId) : null;
  }

  private field(id: string): string {
    const input = this.mount.querySelector<HTMLInputElement>(`#${id}`);
    return input?.value.trim() ?? '';
  }

  private async start(): Promise<void> {
    const catalog = this.state.catalog;
    if (!catalog || this.state.selectedBlocks.length === 0) return;
    const participants = this.field('participants')
      .split(',')
      .map((p) => p.trim())
      .filter(Boolean);
    await this.guard(async () => {
      const created = await this.api.createSession(catalog.catalog_id, this.state.selectedBlocks, {
        use_case_id: this.field('use-case') || 'unnamed-use-case',
        title: this.field('meta-title'),
        participants,
        trl: this.field('trl') || null,
        session_date: this.field('session-date'),
      });
      applySessionUpdate(this.state, created.session, created.next);
    });
    if (this.state.phase === 'review') {
      await this.loadReview();
    }
    this.draw();
    this.focusComment();
  }

  private async chooseVerdict(verdict: 'yes' | 'no' | 'unsure'): Promise<void> {
    if (this.state.revising) {
      await this.applyRevision(verdict);
      return;
    }
    this.state.pendingVerdict = verdict;
    this.draw();
    this.focusComment();
  }

  private focusComment(): void {
    this.mount.querySelector<HTMLTextAreaElement>('#comment')?.focus();
  }

  private async submit(): Promise<void> {
    const { next, session, pendingVerdict } = this.state;
    if (!next || next.done || !session || !pendingVerdict) return;
    const comment = this.mount.querySelector<HTMLTextAreaElement>('#comment')?.value.trim() ?? '';
    await this.guard(async () => {
      const updated = await this.api.submitAnswer(session.session_id, {
        block_id: next.block_id ?? '',
        indicator: next.indicator_id ?? '',
        verdict: pendingVerdict === 'unsure' ? 'no' : pendingVerdict,
        unsure: pendingVerdict === 'unsure',
        comment: comment || null,
        expected_seq: next.seq,
      });
      applySessionUpdate(this.state, updated.session, updated.next);
    });
    if (this.state.error && this.isConflict()) {
      // server state moved on; re-sync rather than retrying blindly
      await this.refreshSession();
    }
    if (this.state.phase === 'review') {
      await this.loadReview();
    }
    this.draw();
  }

  private isConflict(): boolean {
    return (
      this.state.error !== null &&
      (this.state.error.startsWith('OutOfOrderAnswer') ||
        this.state.error.startsWith('StaleSequence') ||
        this.state.error.startsWith('SessionComplete'))
    );
  }

  private async refreshSession(): Promise<void> {
    const session = this.state.session;
    if (!session) return;
    const banner = this.state.error;
    await this.guard(async () => {
      const [fresh, next] = await Promise.all([
        this.api.getSession(session.session_id),
        this.api.next(session.session_id),
      ]);
      applySessionUpdate(this.state, fresh, next);
    });
    this.state.error = banner; // keep the conflict visible after the refresh
  }

  private openRevision(target: { block_id: string; number: string } | undefined): void {
    const answers = this.state.session?.answers ?? [];
    const chosen = target ?? (answers.length > 0
      ? { block_id: answers[answers.length - 1].block_id, number: answers[answers.length - 1].number }
      : undefined);
    if (!chosen) return;
    this.state.revising = chosen;
    this.draw();
  }

  private async applyRevision(verdict: 'yes' | 'no' | 'unsure'): Promise<void> {
    const { revising, session } = this.state;
    if (!revising || !session) return;
    const comment = this.mount.querySelector<HTMLTextAreaElement>('#comment')?.value.trim() ?? '';
    await this.guard(async () => {
      const updated = await this.api.reviseAnswer(
        session.session_id,
        revising.block_id,
        revising.number,
        verdict === 'unsure' ? 'no' : verdict,
        verdict === 'unsure',
        comment || null,
      );
      applySessionUpdate(this.state, updated.session, updated.next);
    });
    if (this.state.phase === 'review') {
      await this.loadReview();
    }
    this.draw();
  }

  private async loadReview(): Promise<void> {
    const session = this.state.session;
    if (!session) return;
    await this.guard(async () => {
      this.state.score = await this.api.score(session.session_id);
      this.state.timeline = await this.api.timeline(session.metadata.use_case_id);
      const points = this.state.timeline.points;
      this.state.deltas = [];
      for (let i = 1; i < points.length; i++) {
        this.state.deltas.push(
          await this.api.compare(points[i - 1].session_id, points[i].session_id),
        );
      }
    });
  }

  private onKeydown(event: KeyboardEvent): void {
    if (this.state.phase !== 'questioning') return;
    const target = event.target as HTMLElement | null;
    const inComment = target?.id === 'comment';

    if (inComment) {
      if (event.key === 'Enter' && !event.shiftKey) {
        event.preventDefault();
        void this.submit();
      } else if (event.key === 'Escape') {
        (target as HTMLTextAreaElement).blur();
      }
      return;
    }
    if (target instanceof HTMLInputElement || target instanceof HTMLTextAreaElement) return;

    const key = event.key.toLowerCase();
    if (key === 'y' || key === 'n' || key === 'u') {
      event.preventDefault();
      void this.chooseVerdict(key === 'y' ? 'yes' : key === 'n' ? 'no' : 'unsure');
    } else if (event.key === 'Enter') {
      event.preventDefault();
      void this.submit();
    } else if (event.key === 'Backspace') {
      event.preventDefault();
      this.openRevision(undefined);
    } else if (event.key === 'Escape' && this.state.revising) {
      this.state.revising = null;
      this.draw();
    }
  }
}
