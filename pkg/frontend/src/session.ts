/**
 * Search session state and its URL codec.
 *
 * The whole session rides in the URL fragment so a copied link replays the
 * same search somewhere else: seed concepts, operator, expansion and any
 * quality filters. Results are never encoded; loading a link re-queries
 * the API and renders whatever it answers.
 */

import type {
  AttributeQualityBody,
  CollectionQualityBody,
  ConceptSearchBody,
  SearchResponse,
} from "./api.js";

export interface SessionSeed {
  code: string;
  vocabulary: string;
  /** Display name, shown on the seed chip. Not sent to the API. */
  name: string;
}

export type FilterScope = "collection" | "attribute";

export interface QualityFilter {
  scope: FilterScope;
  characteristic: string;
  min: number;
  max: number;
}

export interface SearchSession {
  seeds: SessionSeed[];
  operator: "AND" | "OR";
  expansion: boolean;
  filters: QualityFilter[];
}

export function emptySession(): SearchSession {
  return { seeds: [], operator: "OR", expansion: true, filters: [] };
}

// Multi-part values are packed as percent-encoded fields joined by "|",
// then URLSearchParams escapes the whole value again. The inner layer is
// what lets a literal "|" inside a code or name survive the split.
function packParts(parts: Array<string | number>): string {
  return parts.map((part) => encodeURIComponent(String(part))).join("|");
}

function unpackParts(raw: string): string[] | null {
  try {
    return raw.split("|").map((part) => decodeURIComponent(part));
  } catch {
    return null; // malformed percent escape in a hand-edited URL
  }
}

export function encodeSession(session: SearchSession): string {
  const params = new URLSearchParams();
  for (const seed of session.seeds) {
    params.append("seed", packParts([seed.code, seed.vocabulary, seed.name]));
  }
  params.set("op", session.operator);
  params.set("exp", session.expansion ? "1" : "0");
  for (const filter of session.filters) {
    params.append(
      "qf",
      packParts([filter.scope, filter.characteristic, filter.min, filter.max]),
    );
  }
  return params.toString();
}

/** Inverse of encodeSession. Entries that do not parse are dropped. */
export function decodeSession(encoded: string): SearchSession {
  const params = new URLSearchParams(encoded);
  const session = emptySession();
  for (const raw of params.getAll("seed")) {
    const parts = unpackParts(raw);
    if (parts === null || parts.length < 2 || parts[0] === "" || parts[1] === "") {
      continue;
    }
    session.seeds.push({ code: parts[0], vocabulary: parts[1], name: parts[2] ?? "" });
  }
  if (params.get("op") === "AND") {
    session.operator = "AND";
  }
  session.expansion = params.get("exp") !== "0";
  for (const raw of params.getAll("qf")) {
    const parts = unpackParts(raw);
    if (parts === null || parts.length !== 4) {
      continue;
    }
    const [scope, characteristic, minRaw, maxRaw] = parts;
    if (scope !== "collection" && scope !== "attribute") {
      continue;
    }
    const min = Number(minRaw);
    const max = Number(maxRaw);
    if (!Number.isFinite(min) || !Number.isFinite(max)) {
      continue;
    }
    session.filters.push({ scope, characteristic, min, max });
  }
  return session;
}

/**
 * The one search request the session currently stands for.
 *
 * The most recently applied quality filter wins; without filters the seeds
 * drive a plain concept search. An attribute-scoped filter needs a seed
 * concept to anchor on, so a session with such a filter and no seeds plans
 * nothing.
 */
export type SessionPlan =
  | { kind: "none" }
  | { kind: "concepts"; body: ConceptSearchBody }
  | { kind: "collection-quality"; body: CollectionQualityBody }
  | { kind: "attribute-quality"; body: AttributeQualityBody };

export function planRequest(session: SearchSession): SessionPlan {
  const active = session.filters[session.filters.length - 1];
  if (active !== undefined) {
    if (active.scope === "collection") {
      return {
        kind: "collection-quality",
        body: { characteristic: active.characteristic, min: active.min, max: active.max },
      };
    }
    const seed = session.seeds[0];
    if (seed === undefined) {
      return { kind: "none" };
    }
    return {
      kind: "attribute-quality",
      body: {
        concept: { code: seed.code, vocabulary: seed.vocabulary },
        characteristic: active.characteristic,
        min: active.min,
        max: active.max,
        expansion: session.expansion,
      },
    };
  }
  if (session.seeds.length > 0) {
    return {
      kind: "concepts",
      body: {
        seeds: session.seeds.map((s) => ({ code: s.code, vocabulary: s.vocabulary })),
        operator: session.operator,
        expansion: session.expansion,
      },
    };
  }
  return { kind: "none" };
}

/** The slice of ApiClient that executeSession needs; tests stub this. */
export interface SessionSearchApi {
  searchConcepts(body: ConceptSearchBody, signal?: AbortSignal): Promise<SearchResponse>;
  searchCollectionQuality(
    body: CollectionQualityBody,
    signal?: AbortSignal,
  ): Promise<SearchResponse>;
  searchAttributeQuality(
    body: AttributeQualityBody,
    signal?: AbortSignal,
  ): Promise<SearchResponse>;
}

/** Run the session's planned request, or resolve null when there is none. */
export async function executeSession(
  client: SessionSearchApi,
  session: SearchSession,
  signal?: AbortSignal,
): Promise<SearchResponse | null> {
  const plan = planRequest(session);
  switch (plan.kind) {
    case "none":
      return null;
    case "concepts":
      return client.searchConcepts(plan.body, signal);
    case "collection-quality":
      return client.searchCollectionQuality(plan.body, signal);
    case "attribute-quality":
      return client.searchAttributeQuality(plan.body, signal);
  }
}
