/** Application wiring: search box, similar panel, comparison view, subgraph,
 * and the citation/similarity task toggle. Routable via the location hash
 * (#case=ID or #compare=U,V) so views are directly addressable. */

import {
  ApiError,
  fetchExplanation,
  fetchSimilar,
  fetchSubgraph,
  searchCases,
  setBaseUrl,
  type Task,
} from "./api.js";
import { renderSubgraph } from "./graphview.js";
import { renderComparison, renderError, renderResults, renderSimilarPanel } from "./render.js";
import { Store } from "./state.js";

export interface AppOptions {
  baseUrl?: string;
  debounceMs?: number;
  similarK?: number;
  subgraphHops?: number;
}

export interface App {
  store: Store;
  search(query: string): Promise<void>;
  selectCase(id: string): Promise<void>;
  showComparison(u: string, v: string): Promise<void>;
  setTask(task: Task): Promise<void>;
}

function describe(error: unknown): string {
  if (error instanceof ApiError) return error.message;
  if (error instanceof Error) return `service unreachable: ${error.message}`;
  return String(error);
}

export function initApp(doc: Document, options: AppOptions = {}): App {
  if (options.baseUrl !== undefined) setBaseUrl(options.baseUrl);
  const debounceMs = options.debounceMs ?? 200;
  const similarK = options.similarK ?? 10;
  const subgraphHops = options.subgraphHops ?? 1;

  const input = doc.getElementById("search-input") as HTMLInputElement;
  const resultsEl = doc.getElementById("search-results")!;
  const similarEl = doc.getElementById("similar-panel")!;
  const comparisonEl = doc.getElementById("comparison-panel")!;
  const subgraphEl = doc.getElementById("subgraph-view")!;
  const bannerEl = doc.getElementById("error-banner")!;

  const store = new Store();

  store.subscribe((state) => {
    renderError(bannerEl, state.error);
    renderResults(resultsEl, state.results, state.selectedCase, (id) => void selectCase(id));
    renderSimilarPanel(similarEl, state.selectedCase, state.similar, (other) => {
      if (state.selectedCase) void showComparison(state.selectedCase, other);
    });
    renderComparison(comparisonEl, state.explanation);
  });

  async function search(query: string): Promise<void> {
    const seq = store.begin("search");
    store.update({ query });
    try {
      const results = await searchCases(query);
      if (!store.isCurrent("search", seq)) return;
      store.update({ results, error: null });
    } catch (error) {
      if (!store.isCurrent("search", seq)) return;
      store.update({ error: describe(error) });
    }
  }

  async function loadSimilar(id: string): Promise<void> {
    const seq = store.begin("similar");
    try {
      const similar = await fetchSimilar(id, similarK, store.state.task);
      if (!store.isCurrent("similar", seq)) return;
      store.update({ similar, error: null });
    } catch (error) {
      if (!store.isCurrent("similar", seq)) return;
      store.update({ error: describe(error) });
    }
  }

  async function loadSubgraph(id: string): Promise<void> {
    const seq = store.begin("subgraph");
    try {
      const subgraph = await fetchSubgraph(id, subgraphHops, store.state.task);
      if (!store.isCurrent("subgraph", seq)) return;
      renderSubgraph(subgraphEl, subgraph, (node) => void selectCase(node));
    } catch (error) {
      if (!store.isCurrent("subgraph", seq)) return;
      store.update({ error: describe(error) });
    }
  }

  async function selectCase(id: string): Promise<void> {
    store.update({ selectedCase: id, similar: [], comparison: null, explanation: null });
    await Promise.all([loadSimilar(id), loadSubgraph(id)]);
  }

  async function showComparison(u: string, v: string): Promise<void> {
    const seq = store.begin("explain");
    store.update({ comparison: [u, v] });
    try {
      const explanation = await fetchExplanation(u, v);
      if (!store.isCurrent("explain", seq)) return;
      store.update({ explanation, error: null });
    } catch (error) {
      if (!store.isCurrent("explain", seq)) return;
      store.update({ error: describe(error) });
    }
  }

  async function setTask(task: Task): Promise<void> {
    store.update({ task });
    const jobs: Array<Promise<void>> = [];
    if (store.state.selectedCase) {
      jobs.push(loadSimilar(store.state.selectedCase));
      jobs.push(loadSubgraph(store.state.selectedCase));
    }
    const pair = store.state.comparison;
    if (pair) jobs.push(showComparison(pair[0], pair[1]));
    await Promise.all(jobs);
  }

  let timer: ReturnType<typeof setTimeout> | undefined;
  input.addEventListener("input", () => {
    clearTimeout(timer);
    timer = setTimeout(() => void search(input.value), debounceMs);
  });

  for (const radio of doc.querySelectorAll<HTMLInputElement>("input[name=task]")) {
    radio.addEventListener("change", () => {
      if (radio.checked) void setTask(radio.value as Task);
    });
  }

  function applyHash(): void {
    const hash = doc.defaultView?.location.hash ?? "";
    const caseMatch = /^#case=([^,]+)$/.exec(hash);
    if (caseMatch) void selectCase(decodeURIComponent(caseMatch[1]));
    const compareMatch = /^#compare=([^,]+),([^,]+)$/.exec(hash);
    if (compareMatch) {
      void showComparison(
        decodeURIComponent(compareMatch[1]),
        decodeURIComponent(compareMatch[2]),
      );
    }
  }

  doc.defaultView?.addEventListener("hashchange", applyHash);
  applyHash();
  void search("");

  return { store, search, selectCase, showComparison, setTask };
}
