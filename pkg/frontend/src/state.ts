// Session state: conversation turns, rendered blocks, parameter editing.
// Pure logic, no DOM — the whole file is unit-testable with a mocked Api.

import type { Api, AnswerResult, DefaultsResponse, Params } from "./api.js";

export interface ResultBlock {
  turn: number;
  question: string;
  results: AnswerResult[];
  timingMs: number;
}

/** The 5-turn sample conversation played by the Answer Sample button. */
export const SAMPLE_CONVERSATION = [
  "when did nolan make his batman movies?",
  "who played the role of alfred?",
  "and what about harvey dent?",
  "how was the box office reception?",
  "compared to Batman v Superman?",
] as const;

export const UI_RANGES = {
  alpha: { min: 0.5, max: 1.0, step: 0.01 },
  beta: { min: 0.0, max: 0.1, step: 0.005 },
  h: { min: 0.0, max: 1.0, step: 0.05 },
} as const;

const SUM_TOLERANCE = 1e-6;

/**
 * Validate edited parameters against the constrained UI ranges.
 * Returns a human-readable problem or null when everything is fine.
 */
export function validateParams(params: Params): string | null {
  if (params.alpha < UI_RANGES.alpha.min || params.alpha > UI_RANGES.alpha.max) {
    return `node weight threshold must stay within ${UI_RANGES.alpha.min}–${UI_RANGES.alpha.max}`;
  }
  if (params.beta < UI_RANGES.beta.min || params.beta > UI_RANGES.beta.max) {
    return `edge weight threshold must stay within ${UI_RANGES.beta.min}–${UI_RANGES.beta.max}`;
  }
  const hs = [params.h1, params.h2, params.h3, params.h4];
  if (hs.some((h) => h < 0 || h > 1)) {
    return "hyperparameters must be between 0 and 1";
  }
  const sum = hs.reduce((a, b) => a + b, 0);
  if (Math.abs(sum - 1) > SUM_TOLERANCE) {
    return `hyperparameters must sum to one (currently ${sum.toFixed(2)})`;
  }
  if (params.display_k < 1 || params.pool_k < 1) {
    return "display and pool sizes must be at least 1";
  }
  if (params.union && params.h1 !== 0) {
    return "union retrieval needs the baseline weight h1 set to 0";
  }
  return null;
}

/**
 * One browser session. History lives entirely on the client and is sent
 * with every request; Clear Last / Clear All never talk to the server.
 */
export class Session {
  turns: string[] = [];
  /** newest first, matching the visual stream */
  blocks: ResultBlock[] = [];
  params!: Params;
  defaults!: Params;
  strategies: DefaultsResponse["strategies"] = [];
  pending = false;

  constructor(private api: Api) {}

  async init(): Promise<void> {
    const d = await this.api.defaults();
    this.defaults = { ...d.params };
    this.params = { ...d.params };
    this.strategies = d.strategies;
  }

  paramsProblem(): string | null {
    return validateParams(this.params);
  }

  canAsk(question: string): boolean {
    return !this.pending && question.trim().length > 0 && this.paramsProblem() === null;
  }

  /**
   * Send the question with the full accumulated history. The turn becomes
   * part of the history only after the server accepts it, so a rejected
   * question never pollutes later requests.
   */
  async ask(question: string): Promise<ResultBlock> {
    if (this.pending) {
      throw new Error("a request is already in flight");
    }
    const problem = this.paramsProblem();
    if (problem !== null) {
      throw new Error(problem);
    }
    if (!question.trim()) {
      throw new Error("question is empty");
    }
    this.pending = true;
    try {
      const resp = await this.api.answer({
        question,
        history: [...this.turns],
        params: { ...this.params },
      });
      this.turns.push(question);
      const block: ResultBlock = {
        turn: this.turns.length,
        question,
        results: resp.results,
        timingMs: resp.timing_ms,
      };
      this.blocks.unshift(block);
      return block;
    } finally {
      this.pending = false;
    }
  }

  canClearLast(): boolean {
    return this.turns.length > 0 && !this.pending;
  }

  clearLast(): void {
    if (!this.canClearLast()) {
      throw new Error("nothing to clear");
    }
    this.turns.pop();
    this.blocks.shift();
  }

  clearAll(): void {
    this.turns = [];
    this.blocks = [];
  }

  restoreDefaults(): void {
    this.params = { ...this.defaults };
  }

  /** Replay the sample conversation from a clean slate, turn by turn. */
  async playSample(): Promise<void> {
    this.clearAll();
    for (const question of SAMPLE_CONVERSATION) {
      await this.ask(question);
    }
  }
}
