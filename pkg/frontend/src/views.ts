/**
 * DOM rendering for the three phases. Render functions rebuild their
 * container from the current state; interaction is delegated to the
 * controller through the handler bundle.
 */

import { blockBars, timelineChart, waterfall } from './charts.js';
import { deltasByTarget, followUps, type SessionViewState } from './state.js';

export interface Handlers {
  onToggleBlock: (blockId: string) => void;
  onPickCatalog: (catalogId: string) => void;
  onStart: () => void;
  onRetry: () => void;
  onVerdict: (verdict: 'yes' | 'no' | 'unsure') => void;
  onSubmit: () => void;
  onUndoLast: () => void;
  onRevise: (blockId: string, number: string) => void;
  onCancelRevise: () => void;
}

function el(tag: string, className: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderErrorBanner(state: SessionViewState, handlers: Handlers): HTMLElement {
  const banner = el('div', 'error-banner');
  banner.id = 'error-banner';
  if (state.error) {
    banner.appendChild(el('span', 'error-text', state.error));
    const retry = el('button', 'retry', 'Retry') as HTMLButtonElement;
    retry.id = 'retry';
    retry.addEventListener('click', handlers.onRetry);
    banner.appendChild(retry);
  } else {
    banner.hidden = true;
  }
  return banner;
}

export function renderSetup(state: SessionViewState, handlers: Handlers): HTMLElement {
  const root = el('section', 'setup');
  root.appendChild(el('h1', '', 'New evaluation session'));

  const picker = el('div', 'catalog-picker');
  picker.appendChild(el('h2', '', 'Catalog'));
  for (const catalog of state.catalogs) {
    const label = el('label', 'catalog-option') as HTMLLabelElement;
    const radio = document.createElement('input');
    radio.type = 'radio';
    radio.name = 'catalog';
    radio.value = catalog.catalog_id;
    radio.checked = state.catalog?.catalog_id === catalog.catalog_id;
    radio.addEventListener('change', () => handlers.onPickCatalog(catalog.catalog_id));
    label.appendChild(radio);
    label.appendChild(
      el('span', '', `${catalog.catalog_id} v${catalog.version} (${catalog.indicator_count} indicators)`),
    );
    picker.appendChild(label);
  }
  root.appendChild(picker);

  const blocks = el('div', 'block-picker');
  blocks.appendChild(el('h2', '', 'Blocks'));
  for (const block of state.catalog?.blocks ?? []) {
    const label = el('label', 'block-option') as HTMLLabelElement;
    const box = document.createElement('input');
    box.type = 'checkbox';
    box.value = block.block_id;
    box.checked = state.selectedBlocks.includes(block.block_id);
    box.addEventListener('change', () => handlers.onToggleBlock(block.block_id));
    label.appendChild(box);
    label.appendChild(el('span', '', `${block.title} (${block.indicator_count})`));
    blocks.appendChild(label);
  }
  root.appendChild(blocks);

  const form = el('div', 'metadata-form');
  form.appendChild(el('h2', '', 'Session'));
  for (const [id, placeholder] of [
    ['use-case', 'use case id'],
    ['meta-title', 'title'],
    ['participants', 'participants (comma-separated roles)'],
    ['trl', 'TRL'],
    ['session-date', 'date (YYYY-MM-DD)'],
  ]) {
    const input = document.createElement('input');
    input.id = id;
    input.placeholder = placeholder;
    form.appendChild(input);
  }
  root.appendChild(form);

  const start = el('button', 'primary', 'Start session') as HTMLButtonElement;
  start.id = 'start-session';
  start.disabled = state.selectedBlocks.length === 0 || !state.catalog;
  start.addEventListener('click', handlers.onStart);
  root.appendChild(start);
  return root;
}

export function renderQuestioning(state: SessionViewState, handlers: Handlers): HTMLElement {
  const root = el('section', 'questioning');
  const next = state.next;
  const session = state.session;
  if (!next || next.done || !session) return root;

  const progress = el('div', 'progress');
  progress.id = 'progress';
  progress.textContent =
    `${next.progress.answered} answered, at most ` +
    `${next.progress.reachable_remaining_upper_bound} to go`;
  root.appendChild(progress);

  const card = el('div', 'question-card');
  card.appendChild(el('div', 'question-meta', `${next.block_id} ${next.indicator_id} · ${next.layer}`));
  const question = el('p', 'question-text', next.text ?? '');
  question.id = 'question-text';
  card.appendChild(question);

  const buttons = el('div', 'verdict-buttons');
  const verdicts: Array<['yes' | 'no' | 'unsure', string]> = [
    ['yes', 'Yes (y)'],
    ['no', 'No (n)'],
    ['unsure', 'No, unsure (u)'],
  ];
  for (const [verdict, label] of verdicts) {
    const button = el('button', 'verdict', label) as HTMLButtonElement;
    button.id = `verdict-${verdict}`;
    button.dataset.indicator = next.indicator_id;
    button.dataset.seq = String(next.seq);
    if (state.pendingVerdict === verdict) button.classList.add('selected');
    button.addEventListener('click', () => handlers.onVerdict(verdict));
    buttons.appendChild(button);
  }
  card.appendChild(buttons);

  const comment = document.createElement('textarea');
  comment.id = 'comment';
  comment.placeholder = 'Agreed comment (Enter submits, Shift+Enter for a new line)';
  card.appendChild(comment);

  const submit = el('button', 'primary', 'Submit answer') as HTMLButtonElement;
  submit.id = 'submit-answer';
  submit.disabled = state.pendingVerdict === null;
  submit.addEventListener('click', handlers.onSubmit);
  card.appendChild(submit);
  root.appendChild(card);

  const sidebar = el('aside', 'sidebar');

  const followups = el('div', 'followups');
  followups.id = 'followups';
  followups.appendChild(el('h3', '', 'Follow-ups (unsure)'));
  const list = el('ul', '');
  for (const item of followUps(state)) {
    list.appendChild(el('li', 'followup-item', `${item.block_id}:${item.number} ${item.text}`));
  }
  followups.appendChild(list);
  sidebar.appendChild(followups);

  const answered = el('div', 'answered');
  answered.appendChild(el('h3', '', 'Answered'));
  if (session.answers.length > 0) {
    const undo = el('button', '', 'Undo last') as HTMLButtonElement;
    undo.id = 'undo-last';
    undo.addEventListener('click', handlers.onUndoLast);
    answered.appendChild(undo);
  }
  const answeredList = el('ul', '');
  for (const answer of session.answers) {
    const item = el('li', 'answered-item');
    const jump = el('button', 'jump', `${answer.block_id}:${answer.number} = ${answer.verdict}${answer.unsure ? ' (unsure)' : ''}`) as HTMLButtonElement;
    jump.addEventListener('click', () => handlers.onRevise(answer.block_id, answer.number));
    item.appendChild(jump);
    answeredList.appendChild(item);
  }
  answered.appendChild(answeredList);
  sidebar.appendChild(answered);
  root.appendChild(sidebar);

  if (state.revising) {
    const panel = el('div', 'revise-panel');
    panel.id = 'revise-panel';
    panel.appendChild(
      el('p', '', `Revising ${state.revising.block_id}:${state.revising.number} — choose y / n / u`),
    );
    const cancel = el('button', '', 'Cancel') as HTMLButtonElement;
    cancel.id = 'cancel-revise';
    cancel.addEventListener('click', handlers.onCancelRevise);
    panel.appendChild(cancel);
    root.appendChild(panel);
  }
  return root;
}

export function renderReview(state: SessionViewState): HTMLElement {
  const root = el('section', 'review');
  const score = state.score;
  if (!score) {
    root.appendChild(el('p', 'empty-state', 'No saved sessions yet.'));
    return root;
  }

  const summary = el('div', 'score-summary');
  summary.appendChild(el('h1', '', 'Session review'));
  const global = el('span', 'global-score', score.global_score);
  global.id = 'global-score';
  summary.appendChild(global);
  const badge = el('span', `erl-badge level-${score.erl.level}`, `ERL ${score.erl.level} — ${score.erl.label}`);
  badge.id = 'erl-badge';
  summary.appendChild(badge);
  root.appendChild(summary);

  const blocks = el('div', 'panel');
  blocks.id = 'block-scores';
  blocks.appendChild(el('h2', '', 'Block scores (0–4)'));
  blocks.appendChild(blockBars(score.block_scores));
  root.appendChild(blocks);

  const impact = el('div', 'panel');
  impact.id = 'waterfall';
  impact.appendChild(el('h2', '', 'Contributions by impact'));
  impact.appendChild(waterfall(score.contributions));
  root.appendChild(impact);

  const todo = el('div', 'panel');
  todo.id = 'review-followups';
  todo.appendChild(el('h2', '', 'Follow-ups (answered unsure)'));
  const list = el('ul', '');
  for (const item of score.unsure_followups) {
    list.appendChild(el('li', 'followup-item', `${item.block_id}:${item.number}`));
  }
  if (score.unsure_followups.length === 0) {
    list.appendChild(el('li', 'empty-state', 'nothing flagged'));
  }
  todo.appendChild(list);
  root.appendChild(todo);

  if (state.timeline) {
    const progression = el('div', 'panel');
    progression.id = 'progression';
    progression.appendChild(el('h2', '', `Progression — ${state.timeline.use_case_id}`));
    progression.appendChild(timelineChart(state.timeline, deltasByTarget(state)));
    root.appendChild(progression);
  }
  return root;
}

export function render(state: SessionViewState, handlers: Handlers, mount: HTMLElement): void {
  mount.replaceChildren();
  mount.appendChild(renderErrorBanner(state, handlers));
  if (state.phase === 'setup') {
    mount.appendChild(renderSetup(state, handlers));
  } else if (state.phase === 'questioning') {
    mount.appendChild(renderQuestioning(state, handlers));
  } else {
    mount.appendChild(renderReview(state));
  }
}
