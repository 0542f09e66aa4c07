/**
 * View state for one facilitated session.
 *
 * Every field is a projection of an API response; transitions replace the
 * relevant slice with fresh server data. The client holds no derived
 * scores and no branching rules, so stale state is always repairable by
 * re-fetching.
 */

import type {
  CatalogDetail,
  CatalogSummary,
  NextPayload,
  ScoreReportJson,
  SessionDiffJson,
  SessionJson,
  TimelineJson,
} from './types.js';

export type Phase = 'setup' | 'questioning' | 'review';

export interface FollowUp {
  block_id: string;
  number: string;
  text: string;
}

export interface SessionViewState {
  phase: Phase;
  catalogs: CatalogSummary[];
  catalog: CatalogSummary | null;
  detail: CatalogDetail | null;
  selectedBlocks: string[];
  session: SessionJson | null;
  next: NextPayload | null;
  pendingVerdict: 'yes' | 'no' | 'unsure' | null;
  revising: { block_id: string; number: string } | null;
  score: ScoreReportJson | null;
  timeline: TimelineJson | null;
  deltas: SessionDiffJson[];
  error: string | null;
}

export function initialState(): SessionViewState {
  return {
    phase: 'setup',
    catalogs: [],
    catalog: null,
    detail: null,
    selectedBlocks: [],
    session: null,
    next: null,
    pendingVerdict: null,
    revising: null,
    score: null,
    timeline: null,
    deltas: [],
    error: null,
  };
}

export function toggleBlock(state: SessionViewState, blockId: string): void {
  if (state.selectedBlocks.includes(blockId)) {
    state.selectedBlocks = state.selectedBlocks.filter((b) => b !== blockId);
  } else {
    state.selectedBlocks = [...state.selectedBlocks, blockId];
  }
}

export function applySessionUpdate(
  state: SessionViewState,
  session: SessionJson,
  next: NextPayload,
): void {
  state.session = session;
  state.next = next;
  state.pendingVerdict = null;
  state.revising = null;
  state.error = null;
  state.phase = next.done ? 'review' : 'questioning';
}

/** Unsure answers so far, with question text looked up from the catalog. */
export function followUps(state: SessionViewState): FollowUp[] {
  if (!state.session) return [];
  const texts = new Map<string, string>();
  for (const block of state.detail?.blocks ?? []) {
    for (const indicator of block.indicators) {
      texts.set(`${block.block_id}:${indicator.number}`, indicator.text);
    }
  }
  return state.session.answers
    .filter((a) => a.unsure)
    .map((a) => ({
      block_id: a.block_id,
      number: a.number,
      text: texts.get(`${a.block_id}:${a.number}`) ?? '',
    }));
}

/** Consecutive-session diffs keyed by the later session's id. */
export function deltasByTarget(state: SessionViewState): Map<string, SessionDiffJson> {
  const map = new Map<string, SessionDiffJson>();
  for (const diff of state.deltas) {
    map.set(diff.to_id, diff);
  }
  return map;
}
