/**
 * Result-table rendering.
 *
 * Rows are built verbatim from an API response document; nothing here
 * filters, sorts or merges. Each <tr> carries a data-key attribute with
 * the JSON-encoded (biobank, name) pair so a rendered table can be lined
 * up against the raw response it came from.
 */

import type { CollectionHitJson, ConceptJson, Highlight, SearchResponse } from "./api.js";

export interface TableRow {
  key: string;
  biobank: string;
  name: string;
  hit: CollectionHitJson;
}

export function rowKey(biobank: string, name: string): string {
  return JSON.stringify([biobank, name]);
}

export function rowsFromResponse(response: SearchResponse): TableRow[] {
  return response.hits.map((hit) => ({
    key: rowKey(hit.biobank, hit.name),
    biobank: hit.biobank,
    name: hit.name,
    hit,
  }));
}

const ESCAPES: Record<string, string> = {
  "&": "&amp;",
  "<": "&lt;",
  ">": "&gt;",
  '"': "&quot;",
  "'": "&#39;",
};

export function escapeHtml(text: string): string {
  return text.replace(/[&<>"']/g, (ch) => ESCAPES[ch]);
}

function conceptLabel(concept: ConceptJson): string {
  return `${concept.name} (${concept.code}, ${concept.vocabulary})`;
}

function highlightHtml(highlight: Highlight): string {
  const prefix =
    highlight.scope === "attribute" && highlight.attribute !== null
      ? `${highlight.attribute}: `
      : "";
  const label = escapeHtml(`${prefix}${highlight.characteristic}`);
  return `<span class="quality-highlight">${label} = ${highlight.value}</span>`;
}

function rowHtml(row: TableRow): string {
  const attributes = row.hit.matched_attributes
    .map(
      (m) =>
        `<li><strong>${escapeHtml(m.attribute)}</strong>: ` +
        `${m.concepts.map((c) => escapeHtml(conceptLabel(c))).join("; ")}</li>`,
    )
    .join("");
  const quality = row.hit.highlight === null ? "" : highlightHtml(row.hit.highlight);
  return (
    `<tr data-key="${escapeHtml(row.key)}">` +
    `<td>${escapeHtml(row.biobank)}</td>` +
    `<td>${escapeHtml(row.name)}</td>` +
    `<td><ul class="matches">${attributes}</ul></td>` +
    `<td>${quality}</td>` +
    `</tr>`
  );
}

/** Render a response as a table, or a short note when there is nothing. */
export function renderTable(response: SearchResponse | null): string {
  if (response === null) {
    return `<p class="empty-state">No search yet. Add a concept or pick a relationship.</p>`;
  }
  const rows = rowsFromResponse(response);
  if (rows.length === 0) {
    return `<p class="empty-state">No collections matched.</p>`;
  }
  return (
    `<table class="results">` +
    `<thead><tr><th>Biobank</th><th>Collection</th><th>Matched attributes</th><th>Quality</th></tr></thead>` +
    `<tbody>${rows.map(rowHtml).join("")}</tbody>` +
    `</table>`
  );
}

export function renderWarnings(warnings: string[]): string {
  if (warnings.length === 0) {
    return "";
  }
  const items = warnings.map((w) => `<li>${escapeHtml(w)}</li>`).join("");
  return `<ul class="warnings">${items}</ul>`;
}
