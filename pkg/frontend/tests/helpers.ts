/** Shared fixtures and small parsers used across the test files. */

import type {
  CollectionHitJson,
  Highlight,
  SearchResponse,
} from "../src/api.js";

/** Let every pending promise chain settle (real timers only). */
export function flush(): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, 0));
}

const UNESCAPES: Record<string, string> = {
  "&amp;": "&",
  "&lt;": "<",
  "&gt;": ">",
  "&quot;": '"',
  "&#39;": "'",
};

export function unescapeHtml(text: string): string {
  return text.replace(/&(?:amp|lt|gt|quot|#39);/g, (entity) => UNESCAPES[entity]);
}

/** Pull the data-key attribute of every rendered row, in document order. */
export function renderedRowKeys(html: string): string[] {
  const keys: string[] = [];
  const pattern = /data-key="([^"]*)"/g;
  for (const match of html.matchAll(pattern)) {
    keys.push(unescapeHtml(match[1]));
  }
  return keys;
}

export function makeHit(
  biobank: string,
  name: string,
  overrides: Partial<CollectionHitJson> = {},
): CollectionHitJson {
  return {
    biobank,
    name,
    matched_attributes: [
      {
        attribute: "attr1",
        concepts: [{ code: "C1", vocabulary: "VX", name: "Concept one" }],
      },
    ],
    highlight: null,
    ...overrides,
  };
}

export function makeResponse(
  hits: CollectionHitJson[],
  warnings: string[] = [],
): SearchResponse {
  return { hits, warnings };
}

export function makeHighlight(overrides: Partial<Highlight> = {}): Highlight {
  return {
    scope: "attribute",
    attribute: "attr1",
    characteristic: "completeness",
    value: 0.85,
    ...overrides,
  };
}
