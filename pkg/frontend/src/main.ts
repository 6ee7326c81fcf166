// Page wiring: search panel, sample conversation, results stream,
// advanced options.

import { ApiError, HttpApi } from "./api.js";
import { renderBlock } from "./render.js";
import { Session, UI_RANGES } from "./state.js";

const DEFAULT_API = "http://127.0.0.1:8000";

function byId<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const api = new HttpApi(DEFAULT_API);
const session = new Session(api);

const questionInput = byId<HTMLInputElement>("question");
const answerButton = byId<HTMLButtonElement>("answer");
const sampleButton = byId<HTMLButtonElement>("answer-sample");
const clearLastButton = byId<HTMLButtonElement>("clear-last");
const clearAllButton = byId<HTMLButtonElement>("clear-all");
const resultsPanel = byId<HTMLDivElement>("results");
const statusLine = byId<HTMLDivElement>("status");
const apiUrlInput = byId<HTMLInputElement>("api-url");

const paramInputs = {
  alpha: byId<HTMLInputElement>("opt-alpha"),
  beta: byId<HTMLInputElement>("opt-beta"),
  h1: byId<HTMLInputElement>("opt-h1"),
  h2: byId<HTMLInputElement>("opt-h2"),
  h3: byId<HTMLInputElement>("opt-h3"),
  h4: byId<HTMLInputElement>("opt-h4"),
  display_k: byId<HTMLInputElement>("opt-display"),
  pool_k: byId<HTMLInputElement>("opt-pool"),
} as const;
const strategySelect = byId<HTMLSelectElement>("opt-strategy");
const paramsWarning = byId<HTMLDivElement>("params-warning");

function showStatus(message: string, isError = false): void {
  statusLine.textContent = message;
  statusLine.className = isError ? "status error" : "status";
}

function paramsToForm(): void {
  for (const [key, input] of Object.entries(paramInputs)) {
    const value = session.params[key as keyof typeof paramInputs];
    input.value = String(value);
    const label = document.querySelector(`[data-value-for="${input.id}"]`);
    if (label) label.textContent = String(value);
  }
  strategySelect.innerHTML = "";
  for (const s of session.strategies) {
    const option = document.createElement("option");
    option.value = s.name;
    option.textContent = s.label;
    strategySelect.append(option);
  }
  strategySelect.value = session.params.strategy;
}

function formToParams(): void {
  session.params.alpha = Number(paramInputs.alpha.value);
  session.params.beta = Number(paramInputs.beta.value);
  session.params.h1 = Number(paramInputs.h1.value);
  session.params.h2 = Number(paramInputs.h2.value);
  session.params.h3 = Number(paramInputs.h3.value);
  session.params.h4 = Number(paramInputs.h4.value);
  session.params.display_k = Number(paramInputs.display_k.value);
  session.params.pool_k = Number(paramInputs.pool_k.value);
  session.params.strategy = strategySelect.value;
  refreshControls();
}

function refreshControls(): void {
  const problem = session.paramsProblem();
  paramsWarning.textContent = problem ?? "";
  paramsWarning.hidden = problem === null;
  answerButton.disabled = !session.canAsk(questionInput.value);
  sampleButton.disabled = session.pending || problem !== null;
  clearLastButton.disabled = !session.canClearLast();
  clearAllButton.disabled = session.pending;
}

function redrawResults(): void {
  resultsPanel.innerHTML = "";
  for (const block of session.blocks) {
    resultsPanel.append(renderBlock(block));
  }
}

async function ask(question: string): Promise<void> {
  showStatus("answering…");
  refreshControls();
  try {
    const block = await session.ask(question);
    resultsPanel.prepend(renderBlock(block));
    showStatus(`turn ${block.turn} answered in ${block.timingMs.toFixed(0)} ms`);
    questionInput.value = "";
  } catch (err) {
    if (err instanceof ApiError) {
      showStatus(`rejected: ${err.message}`, true);
    } else {
      showStatus(`request failed: ${(err as Error).message} — retry?`, true);
    }
  } finally {
    refreshControls();
  }
}

answerButton.addEventListener("click", () => void ask(questionInput.value));
questionInput.addEventListener("keydown", (ev) => {
  if (ev.key === "Enter" && session.canAsk(questionInput.value)) {
    void ask(questionInput.value);
  }
});
questionInput.addEventListener("input", refreshControls);

sampleButton.addEventListener("click", () => {
  void (async () => {
    try {
      await session.playSample();
      redrawResults();
      showStatus("sample conversation replayed");
    } catch (err) {
      redrawResults();
      showStatus(`sample failed: ${(err as Error).message}`, true);
    } finally {
      refreshControls();
    }
  })();
});

clearLastButton.addEventListener("click", () => {
  session.clearLast();
  redrawResults();
  showStatus("last turn cleared");
  refreshControls();
});

clearAllButton.addEventListener("click", () => {
  session.clearAll();
  redrawResults();
  showStatus("conversation cleared");
  refreshControls();
});

byId<HTMLButtonElement>("restore-defaults").addEventListener("click", () => {
  session.restoreDefaults();
  paramsToForm();
  refreshControls();
  showStatus("defaults restored");
});

for (const input of Object.values(paramInputs)) {
  input.addEventListener("input", formToParams);
}
strategySelect.addEventListener("change", formToParams);

apiUrlInput.value = DEFAULT_API;
apiUrlInput.addEventListener("change", () => {
  api.setBaseUrl(apiUrlInput.value);
  void boot();
});

function constrainSliders(): void {
  paramInputs.alpha.min = String(UI_RANGES.alpha.min);
  paramInputs.alpha.max = String(UI_RANGES.alpha.max);
  paramInputs.alpha.step = String(UI_RANGES.alpha.step);
  paramInputs.beta.min = String(UI_RANGES.beta.min);
  paramInputs.beta.max = String(UI_RANGES.beta.max);
  paramInputs.beta.step = String(UI_RANGES.beta.step);
}

async function boot(): Promise<void> {
  try {
    await session.init();
    constrainSliders();
    paramsToForm();
    refreshControls();
    showStatus("ready");
  } catch (err) {
    showStatus(
      `cannot reach the answering service at ${apiUrlInput.value}: ` +
      `${(err as Error).message}`, true);
  }
}

void boot();
