/**
 * Typed client for the catalog's /api/v1 endpoints.
 *
 * Every result set the UI displays comes verbatim from one of these calls.
 * The client keeps a request log so tests can check that no table was
 * synthesized locally.
 */

export interface ConceptRef {
  code: string;
  vocabulary: string;
}

export interface ConceptJson extends ConceptRef {
  name: string;
}

export interface Suggestion extends ConceptJson {
  count: number;
}

export interface RemoteCandidate extends ConceptJson {
  remote_id: string;
}

export interface Highlight {
  scope: "collection" | "attribute";
  attribute: string | null;
  characteristic: string;
  value: number;
}

export interface MatchedAttribute {
  attribute: string;
  concepts: ConceptJson[];
}

export interface CollectionHitJson {
  biobank: string;
  name: string;
  matched_attributes: MatchedAttribute[];
  highlight: Highlight | null;
}

export interface SearchResponse {
  hits: CollectionHitJson[];
  warnings: string[];
}

export interface VocabularyInfo {
  id: string;
  concepts: number;
}

export interface ConceptSearchBody {
  seeds: ConceptRef[];
  operator: "AND" | "OR";
  expansion: boolean;
}

export interface RelationshipSearchBody {
  vocabulary: string;
  relationship: string;
  attributing: ConceptRef;
}

export interface CollectionQualityBody {
  characteristic: string;
  min: number;
  max: number;
}

export interface AttributeQualityBody {
  concept: ConceptRef;
  characteristic: string;
  min: number;
  max: number;
  expansion: boolean;
}

export interface ApiErrorBody {
  status: number;
  code: string;
  message: string;
  details?: string[];
}

/** Error envelope of a non-2xx response, thrown as an exception. */
export class ApiError extends Error {
  readonly status: number;
  readonly code: string;
  readonly details: string[];

  constructor(body: ApiErrorBody) {
    super(body.message);
    this.name = "ApiError";
    this.status = body.status;
    this.code = body.code;
    this.details = body.details ?? [];
  }
}

export interface LoggedRequest {
  method: string;
  path: string;
  body?: unknown;
}

export class ApiClient {
  /** One entry per request issued, in order. */
  readonly log: LoggedRequest[] = [];

  constructor(
    private readonly base: string = "",
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
    signal?: AbortSignal,
  ): Promise<T> {
    const entry: LoggedRequest = { method, path };
    if (body !== undefined) {
      entry.body = body;
    }
    this.log.push(entry);
    const init: RequestInit = { method, signal: signal ?? null };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchFn(this.base + path, init);
    let parsed: unknown;
    try {
      parsed = await response.json();
    } catch {
      throw new ApiError({
        status: response.status,
        code: "bad_response",
        message: `response body was not JSON (HTTP ${response.status})`,
      });
    }
    if (!response.ok) {
      throw new ApiError(parsed as ApiErrorBody);
    }
    return parsed as T;
  }

  searchConcepts(body: ConceptSearchBody, signal?: AbortSignal): Promise<SearchResponse> {
    return this.request("POST", "/api/v1/search/concepts", body, signal);
  }

  searchRelationship(body: RelationshipSearchBody, signal?: AbortSignal): Promise<SearchResponse> {
    return this.request("POST", "/api/v1/search/relationship", body, signal);
  }

  searchCollectionQuality(body: CollectionQualityBody, signal?: AbortSignal): Promise<SearchResponse> {
    return this.request("POST", "/api/v1/search/quality/collection", body, signal);
  }

  searchAttributeQuality(body: AttributeQualityBody, signal?: AbortSignal): Promise<SearchResponse> {
    return this.request("POST", "/api/v1/search/quality/attribute", body, signal);
  }

  suggest(q: string, limit = 10, signal?: AbortSignal): Promise<{ suggestions: Suggestion[] }> {
    const query = new URLSearchParams({ q, limit: String(limit) });
    return this.request("GET", `/api/v1/concepts/suggest?${query}`, undefined, signal);
  }

  remoteConcepts(q: string, signal?: AbortSignal): Promise<{ candidates: RemoteCandidate[] }> {
    const query = new URLSearchParams({ q });
    return this.request("GET", `/api/v1/remote/concepts?${query}`, undefined, signal);
  }

  vocabularies(signal?: AbortSignal): Promise<{ vocabularies: VocabularyInfo[] }> {
    return this.request("GET", "/api/v1/vocabularies", undefined, signal);
  }

  relationships(vocabulary: string, signal?: AbortSignal): Promise<{ relationships: string[] }> {
    const vocab = encodeURIComponent(vocabulary);
    return this.request("GET", `/api/v1/vocabularies/${vocab}/relationships`, undefined, signal);
  }

  attributingConcepts(
    vocabulary: string,
    relationship: string,
    signal?: AbortSignal,
  ): Promise<{ concepts: ConceptJson[] }> {
    const vocab = encodeURIComponent(vocabulary);
    const rel = encodeURIComponent(relationship);
    return this.request(
      "GET",
      `/api/v1/vocabularies/${vocab}/relationships/${rel}/attributing-concepts`,
      undefined,
      signal,
    );
  }

  health(signal?: AbortSignal): Promise<{ status: string }> {
    return this.request("GET", "/api/v1/health", undefined, signal);
  }
}

/**
 * Latest-wins guard for one logical request channel: asking for the next
 * signal aborts whatever was still in flight.
 */
export class LatestWins {
  private controller: AbortController | null = null;

  next(): AbortSignal {
    this.controller?.abort();
    this.controller = new AbortController();
    return this.controller.signal;
  }

  cancel(): void {
    this.controller?.abort();
    this.controller = null;
  }
}

export function isAbort(error: unknown): boolean {
  return error instanceof Error && error.name === "AbortError";
}
