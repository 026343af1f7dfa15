/** Typed client for the lexgraph HTTP service. Read-only: the UI only ever
 * issues GETs plus the stateless POST /predict. */

export type Task = "cites" | "similar_to";

export interface CaseSummary {
  id: string;
  title: string;
  court: string;
  doc_type: string;
  date: string | null;
}

export interface CaseDetail extends CaseSummary {
  metadata: Record<string, string>;
  citations: string[];
  lawpoints: string[];
}

export interface SimilarRow {
  id: string;
  title: string;
  score: number;
}

export interface FeatureDiff {
  name: string;
  value_u: number;
  value_v: number;
  delta_normalized: number;
}

export interface Attribution {
  feature: string;
  drop: number;
}

export interface Explanation {
  u: string;
  v: string;
  link_score: number | null;
  shared_lawpoints: string[];
  feature_diffs: FeatureDiff[];
  metadata_pairs: Record<string, [string, string]>;
  top_attributions: Attribution[];
}

export interface SubgraphNode {
  id: string;
  title: string;
}

export interface SubgraphEdge {
  src: string;
  dst: string;
  score: number;
  observed: boolean;
}

export interface Subgraph {
  center: string;
  task: Task;
  nodes: SubgraphNode[];
  edges: SubgraphEdge[];
}

export interface Stats {
  documents: number;
  sentences: number;
  triples: number;
  entities: number;
  relations: number;
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

let baseUrl = "";

export function setBaseUrl(url: string): void {
  baseUrl = url.replace(/\/$/, "");
}

async function getJson<T>(path: string): Promise<T> {
  const response = await fetch(baseUrl + path);
  if (!response.ok) {
    let detail = `HTTP ${response.status}`;
    try {
      const body = (await response.json()) as { error?: string };
      if (body.error) detail = body.error;
    } catch {
      // non-JSON error body; keep the status line
    }
    throw new ApiError(response.status, detail);
  }
  return (await response.json()) as T;
}

export function fetchStats(): Promise<Stats> {
  return getJson("/stats");
}

export function searchCases(query: string, limit = 50): Promise<CaseSummary[]> {
  const params = new URLSearchParams({ q: query, limit: String(limit) });
  return getJson(`/cases?${params}`);
}

export function fetchCase(id: string): Promise<CaseDetail> {
  return getJson(`/cases/${encodeURIComponent(id)}`);
}

export function fetchSimilar(id: string, k: number, task: Task): Promise<SimilarRow[]> {
  const params = new URLSearchParams({ k: String(k), task });
  return getJson(`/cases/${encodeURIComponent(id)}/similar?${params}`);
}

export function fetchExplanation(u: string, v: string, k = 5): Promise<Explanation> {
  const params = new URLSearchParams({ u, v, k: String(k) });
  return getJson(`/explain?${params}`);
}

export function fetchSubgraph(center: string, hops: number, task: Task): Promise<Subgraph> {
  const params = new URLSearchParams({ center, hops: String(hops), task });
  return getJson(`/subgraph?${params}`);
}
