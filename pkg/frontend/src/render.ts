/** DOM builders. Every number shown comes straight from the API response;
 * the only client-side arithmetic is display rounding and bar scaling. */

import type { CaseSummary, Explanation, SimilarRow } from "./api.js";

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderResults(
  container: HTMLElement,
  cases: CaseSummary[],
  selected: string | null,
  onSelect: (id: string) => void,
): void {
  const doc = container.ownerDocument;
  container.replaceChildren();
  if (cases.length === 0) {
    container.append(el(doc, "p", "empty-state", "No cases match this search."));
    return;
  }
  const list = el(doc, "ul", "case-list");
  for (const item of cases) {
    const row = el(doc, "li", "case-row" + (item.id === selected ? " selected" : ""));
    row.dataset.id = item.id;
    row.append(
      el(doc, "span", "case-id", item.id),
      el(doc, "span", "case-title", item.title),
      el(doc, "span", "case-court", item.court),
      el(doc, "span", "case-date", item.date ?? ""),
    );
    row.addEventListener("click", () => onSelect(item.id));
    list.append(row);
  }
  container.append(list);
}

export function renderSimilarPanel(
  container: HTMLElement,
  caseId: string | null,
  rows: SimilarRow[],
  onCompare: (otherId: string) => void,
): void {
  const doc = container.ownerDocument;
  container.replaceChildren();
  if (caseId === null) {
    container.append(el(doc, "p", "empty-state", "Select a case to rank its neighbors."));
    return;
  }
  container.append(el(doc, "h3", undefined, `Similar to ${caseId}`));
  if (rows.length === 0) {
    container.append(el(doc, "p", "empty-state", "No other cases in the graph."));
    return;
  }
  const list = el(doc, "ol", "similar-list");
  for (const row of rows) {
    const item = el(doc, "li", "similar-row");
    item.dataset.id = row.id;
    item.dataset.score = String(row.score);
    item.append(
      el(doc, "span", "similar-id", row.id),
      el(doc, "span", "similar-title", row.title),
      el(doc, "span", "similar-score", row.score.toFixed(3)),
    );
    item.addEventListener("click", () => onCompare(row.id));
    list.append(item);
  }
  container.append(list);
}

export function renderComparison(container: HTMLElement, explanation: Explanation | null): void {
  const doc = container.ownerDocument;
  container.replaceChildren();
  if (explanation === null) {
    container.append(
      el(doc, "p", "empty-state", "Pick a similar case to compare it with the selection."),
    );
    return;
  }
  const heading = el(doc, "h3", undefined, `${explanation.u} vs ${explanation.v}`);
  container.append(heading);
  if (explanation.link_score !== null) {
    container.append(
      el(doc, "p", "link-score", `link score ${explanation.link_score.toFixed(3)}`),
    );
  }

  const tags = el(doc, "div", "lawpoint-tags");
  for (const concept of explanation.shared_lawpoints) {
    tags.append(el(doc, "span", "lawpoint-tag", concept));
  }
  container.append(tags);

  const metaTable = el(doc, "table", "metadata-table");
  const metaHead = el(doc, "tr");
  metaHead.append(el(doc, "th"), el(doc, "th", undefined, explanation.u), el(doc, "th", undefined, explanation.v));
  metaTable.append(metaHead);
  for (const [key, [left, right]] of Object.entries(explanation.metadata_pairs)) {
    const tr = el(doc, "tr", "metadata-row");
    tr.append(
      el(doc, "td", "metadata-key", key),
      el(doc, "td", undefined, left),
      el(doc, "td", undefined, right),
    );
    metaTable.append(tr);
  }
  container.append(metaTable);

  const diffTable = el(doc, "table", "diff-table");
  const diffHead = el(doc, "tr");
  for (const label of ["feature", explanation.u, explanation.v, "|Δ| (z)"]) {
    diffHead.append(el(doc, "th", undefined, label));
  }
  diffTable.append(diffHead);
  for (const diff of explanation.feature_diffs) {
    const tr = el(doc, "tr", "diff-row" + (diff.delta_normalized > 0 ? " nonzero" : ""));
    tr.dataset.feature = diff.name;
    tr.dataset.delta = String(diff.delta_normalized);
    tr.append(
      el(doc, "td", undefined, diff.name),
      el(doc, "td", undefined, String(diff.value_u)),
      el(doc, "td", undefined, String(diff.value_v)),
      el(doc, "td", undefined, diff.delta_normalized.toFixed(3)),
    );
    diffTable.append(tr);
  }
  container.append(diffTable);

  const attributions = el(doc, "div", "attributions");
  const maxDrop = Math.max(...explanation.top_attributions.map((a) => Math.abs(a.drop)), 0);
  for (const attribution of explanation.top_attributions) {
    const row = el(doc, "div", "attribution-row");
    row.append(el(doc, "span", "attribution-name", attribution.feature));
    const bar = el(doc, "span", "attribution-bar");
    const width = maxDrop > 0 ? (100 * Math.abs(attribution.drop)) / maxDrop : 0;
    bar.style.width = `${width.toFixed(1)}%`;
    bar.dataset.drop = String(attribution.drop);
    row.append(bar, el(doc, "span", "attribution-value", attribution.drop.toFixed(4)));
    attributions.append(row);
  }
  container.append(attributions);
}

export function renderError(banner: HTMLElement, message: string | null): void {
  if (message === null) {
    banner.textContent = "";
    banner.classList.add("hidden");
  } else {
    banner.textContent = message;
    banner.classList.remove("hidden");
  }
}
