/**
 * SVG chart builders for the review dashboard.
 *
 * Numbers shown in labels are the API's three-decimal strings verbatim;
 * parsing happens only to place marks on the canvas.
 */

import type { BlockScoreJson, ContributionJson, SessionDiffJson, TimelineJson } from './types.js';

const SVG_NS = 'http://www.w3.org/2000/svg';

function svgElement<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string | number>,
  text?: string,
): SVGElementTagNameMap[K] {
  const el = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) {
    el.setAttribute(key, String(value));
  }
  if (text !== undefined) el.textContent = text;
  return el;
}

/** Horizontal per-block bars on the fixed 0..4 readiness scale. */
export function blockBars(scores: BlockScoreJson[]): SVGSVGElement {
  const rowHeight = 28;
  const width = 420;
  const barLeft = 110;
  const barWidth = 240;
  const svg = svgElement('svg', {
    width,
    height: scores.length * rowHeight + 8,
    class: 'block-bars',
    role: 'img',
  });
  scores.forEach((score, i) => {
    const y = i * rowHeight + 6;
    const fraction = Math.max(0, Math.min(1, parseFloat(score.normalized) / 4));
    svg.appendChild(svgElement('text', { x: 0, y: y + 13, class: 'chart-label' }, score.block_id));
    svg.appendChild(
      svgElement('rect', { x: barLeft, y, width: barWidth, height: 16, class: 'bar-track' }),
    );
    svg.appendChild(
      svgElement('rect', {
        x: barLeft,
        y,
        width: Math.round(barWidth * fraction),
        height: 16,
        class: 'bar-fill',
      }),
    );
    svg.appendChild(
      svgElement(
        'text',
        { x: barLeft + barWidth + 8, y: y + 13, class: 'chart-value', 'data-block': score.block_id },
        score.normalized,
      ),
    );
  });
  return svg;
}

/** Contribution waterfall, already sorted by impact on the server. */
export function waterfall(contributions: ContributionJson[]): SVGSVGElement {
  const rowHeight = 22;
  const width = 480;
  const mid = 280;
  const scale = 120; // px per score point
  const svg = svgElement('svg', {
    width,
    height: contributions.length * rowHeight + 8,
    class: 'waterfall',
    role: 'img',
  });
  svg.appendChild(
    svgElement('line', { x1: mid, y1: 0, x2: mid, y2: contributions.length * rowHeight + 8, class: 'axis' }),
  );
  contributions.forEach((entry, i) => {
    const y = i * rowHeight + 4;
    const value = parseFloat(entry.contribution);
    const length = Math.min(Math.abs(value) * scale, mid - 130);
    const x = value < 0 ? mid - length : mid;
    svg.appendChild(
      svgElement(
        'text',
        { x: 0, y: y + 12, class: 'chart-label' },
        `${entry.block_id}:${entry.number} ${entry.verdict}`,
      ),
    );
    svg.appendChild(
      svgElement('rect', {
        x,
        y,
        width: Math.max(length, value === 0 ? 1 : 2),
        height: 14,
        class: value < 0 ? 'bar-negative' : 'bar-positive',
      }),
    );
    svg.appendChild(
      svgElement(
        'text',
        { x: mid + (value < 0 ? -length - 6 : length + 6), y: y + 12, class: value < 0 ? 'chart-value negative' : 'chart-value', 'text-anchor': value < 0 ? 'end' : 'start' },
        entry.contribution,
      ),
    );
  });
  return svg;
}

/**
 * Score progression across the use case's sessions: one series per block,
 * a global track, and per-block delta annotations taken from the server's
 * session diffs (e.g. "ai-act +1.000").
 */
export function timelineChart(
  timeline: TimelineJson,
  deltasByTarget: Map<string, SessionDiffJson>,
): SVGSVGElement {
  const width = 520;
  const height = 240;
  const left = 40;
  const bottom = height - 30;
  const top = 16;
  const svg = svgElement('svg', { width, height, class: 'timeline', role: 'img' });

  const points = timeline.points;
  const blockIds = Array.from(
    new Set(points.flatMap((p) => p.block_scores.map((b) => b.block_id))),
  );
  const xFor = (i: number) =>
    points.length === 1 ? (left + width) / 2 : left + (i * (width - left - 20)) / (points.length - 1);
  const yFor = (score: number) => bottom - ((bottom - top) * Math.max(0, Math.min(4, score))) / 4;

  for (let grid = 0; grid <= 4; grid++) {
    const y = yFor(grid);
    svg.appendChild(svgElement('line', { x1: left, y1: y, x2: width - 10, y2: y, class: 'grid' }));
    svg.appendChild(svgElement('text', { x: 4, y: y + 4, class: 'chart-label' }, String(grid)));
  }

  blockIds.forEach((blockId, seriesIndex) => {
    const coords = points.map((p, i) => {
      const score = p.block_scores.find((b) => b.block_id === blockId);
      return score ? `${xFor(i)},${yFor(parseFloat(score.normalized))}` : '';
    });
    svg.appendChild(
      svgElement('polyline', {
        points: coords.filter(Boolean).join(' '),
        class: `series series-${seriesIndex}`,
        fill: 'none',
        'data-block': blockId,
      }),
    );
  });

  svg.appendChild(
    svgElement('polyline', {
      points: points.map((p, i) => `${xFor(i)},${yFor(parseFloat(p.global_score))}`).join(' '),
      class: 'series series-global',
      fill: 'none',
      'stroke-dasharray': '4 3',
      'data-block': '__global__',
    }),
  );

  points.forEach((point, i) => {
    svg.appendChild(
      svgElement('text', { x: xFor(i), y: height - 8, class: 'chart-label', 'text-anchor': 'middle' }, point.session_date),
    );
    const diff = deltasByTarget.get(point.session_id);
    if (!diff) return;
    let line = 0;
    for (const delta of diff.block_deltas) {
      if (delta.delta === '0.000') continue;
      const target = point.block_scores.find((b) => b.block_id === delta.block_id);
      const y = target ? yFor(parseFloat(target.normalized)) - 8 - line * 14 : top + line * 14;
      const label = delta.delta.startsWith('-') ? delta.delta : `+${delta.delta}`;
      svg.appendChild(
        svgElement(
          'text',
          { x: xFor(i), y, class: 'delta-annotation', 'text-anchor': 'middle', 'data-block': delta.block_id },
          `${delta.block_id} ${label}`,
        ),
      );
      line += 1;
    }
  });

  return svg;
}
