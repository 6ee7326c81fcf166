// DOM rendering of result blocks. The server supplies sentence and bold
// character spans, so the passage text is never re-tokenized here.

import type { AnswerResult } from "./api.js";
import type { ResultBlock } from "./state.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

interface Segment {
  start: number;
  end: number;
  bold: boolean;
  highlighted: boolean;
}

/**
 * Split [0, text.length) into runs of constant (bold, highlighted) state.
 * Exported for tests.
 */
export function segmentText(
  length: number,
  highlightSpans: [number, number][],
  boldSpans: [number, number][],
): Segment[] {
  const cuts = new Set<number>([0, length]);
  for (const [s, e] of [...highlightSpans, ...boldSpans]) {
    cuts.add(Math.max(0, Math.min(s, length)));
    cuts.add(Math.max(0, Math.min(e, length)));
  }
  const points = [...cuts].sort((a, b) => a - b);
  const inside = (pos: number, spans: [number, number][]) =>
    spans.some(([s, e]) => s <= pos && pos < e);
  const segments: Segment[] = [];
  for (let i = 0; i + 1 < points.length; i++) {
    const start = points[i]!;
    const end = points[i + 1]!;
    if (start >= end) continue;
    segments.push({
      start,
      end,
      bold: inside(start, boldSpans),
      highlighted: inside(start, highlightSpans),
    });
  }
  return segments;
}

function renderPassageText(result: AnswerResult): HTMLElement {
  const container = el("p", "passage-text");
  const highlightSpans = result.highlight
    .map((i) => result.sentences[i])
    .filter((s): s is [number, number] => s !== undefined);
  for (const seg of segmentText(result.text.length, highlightSpans, result.bold_spans)) {
    const piece = result.text.slice(seg.start, seg.end);
    let node: HTMLElement | Text = document.createTextNode(piece);
    if (seg.bold) {
      const strong = el("strong");
      strong.append(node);
      node = strong;
    }
    if (seg.highlighted) {
      const mark = el("span", "highlighted");
      mark.append(node);
      node = mark;
    }
    container.append(node);
  }
  return container;
}

function renderResult(result: AnswerResult, rank: number): HTMLElement {
  const card = el("div", "result-card");
  const header = el("div", "result-header");
  header.append(el("span", "result-rank", `#${rank}`));
  header.append(el("span", "result-id", result.id));
  header.append(el("span", "result-score", result.total.toFixed(4)));
  card.append(header);

  const chips = el("div", "result-chips");
  for (const n of result.top_nodes) {
    chips.append(el("span", "chip chip-node",
      `${n.word} ~ ${n.query_token} (${n.similarity.toFixed(2)})`));
  }
  for (const e of result.top_edges) {
    chips.append(el("span", "chip chip-edge",
      `(${e.words.join(", ")}) ${e.npmi.toFixed(2)}`));
  }
  if (chips.childElementCount > 0) card.append(chips);

  card.append(renderPassageText(result));

  const comp = result.components;
  card.append(el("div", "result-components",
    `prior ${comp.prior.toFixed(3)} · node ${comp.node.toFixed(3)} · ` +
    `edge ${comp.edge.toFixed(3)} · pos ${comp.pos.toFixed(3)}`));
  return card;
}

export function renderBlock(block: ResultBlock): HTMLElement {
  const wrap = el("section", "answer-block");
  wrap.append(el("h3", "block-question", `Turn ${block.turn}: ${block.question}`));
  if (block.results.length === 0) {
    wrap.append(el("p", "no-results", "No matching passages found."));
  }
  block.results.forEach((result, i) => wrap.append(renderResult(result, i + 1)));
  wrap.append(el("div", "block-timing", `${block.timingMs.toFixed(0)} ms`));
  return wrap;
}
