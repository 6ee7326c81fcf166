// Typed client for the answering service JSON API.

export interface Params {
  alpha: number;
  beta: number;
  window: number;
  h1: number;
  h2: number;
  h3: number;
  h4: number;
  pool_k: number;
  display_k: number;
  strategy: string;
  union: boolean;
}

export interface TopNode {
  word: string;
  query_token: string;
  similarity: number;
}

export interface TopEdge {
  words: string[];
  npmi: number;
}

export interface AnswerResult {
  id: string;
  text: string;
  total: number;
  components: { prior: number; node: number; edge: number; pos: number };
  top_nodes: TopNode[];
  top_edges: TopEdge[];
  /** indices into `sentences` */
  highlight: number[];
  /** character spans [start, end) of each sentence in `text` */
  sentences: [number, number][];
  /** character spans of keyword occurrences to render bold */
  bold_spans: [number, number][];
}

export interface AnswerResponse {
  results: AnswerResult[];
  timing_ms: number;
}

export interface StrategyInfo {
  name: string;
  label: string;
}

export interface DefaultsResponse {
  params: Params;
  strategies: StrategyInfo[];
  ranges: { alpha: [number, number]; beta: [number, number]; h: [number, number] };
}

export interface AnswerRequest {
  question: string;
  history: string[];
  params: Partial<Params>;
}

/** Error carrying the field-level message from a 400 response. */
export class ApiError extends Error {
  constructor(message: string, readonly status: number, readonly field?: string) {
    super(message);
  }
}

export interface Api {
  defaults(): Promise<DefaultsResponse>;
  answer(request: AnswerRequest): Promise<AnswerResponse>;
}

export class HttpApi implements Api {
  constructor(private baseUrl: string) {}

  setBaseUrl(url: string): void {
    this.baseUrl = url.replace(/\/+$/, "");
  }

  async defaults(): Promise<DefaultsResponse> {
    const resp = await fetch(`${this.baseUrl}/defaults`);
    if (!resp.ok) {
      throw new ApiError(`defaults failed: HTTP ${resp.status}`, resp.status);
    }
    return (await resp.json()) as DefaultsResponse;
  }

  async answer(request: AnswerRequest): Promise<AnswerResponse> {
    const resp = await fetch(`${this.baseUrl}/answer`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(request),
    });
    if (resp.status === 400) {
      const body = await resp.json().catch(() => null);
      const first = body?.errors?.[0];
      throw new ApiError(first?.message ?? "invalid request", 400, first?.field);
    }
    if (!resp.ok) {
      throw new ApiError(`answer failed: HTTP ${resp.status}`, resp.status);
    }
    return (await resp.json()) as AnswerResponse;
  }
}
