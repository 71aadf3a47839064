/**
 * State for the vocabulary, relationship and attributing-concept pickers.
 *
 * Each selection loads the next level from the API and clears everything
 * below it, so a stale choice can never ride along into a search. Loads
 * that come back after the selection moved on are discarded.
 */

import type {
  ConceptJson,
  RelationshipSearchBody,
  SearchResponse,
  VocabularyInfo,
} from "./api.js";

export interface CascadeState {
  vocabularies: VocabularyInfo[];
  vocabulary: string | null;
  relationships: string[];
  relationship: string | null;
  concepts: ConceptJson[];
  concept: ConceptJson | null;
}

export function emptyCascade(): CascadeState {
  return {
    vocabularies: [],
    vocabulary: null,
    relationships: [],
    relationship: null,
    concepts: [],
    concept: null,
  };
}

/** The slice of ApiClient the picker needs; tests stub this. */
export interface CascadeApi {
  vocabularies(signal?: AbortSignal): Promise<{ vocabularies: VocabularyInfo[] }>;
  relationships(vocabulary: string, signal?: AbortSignal): Promise<{ relationships: string[] }>;
  attributingConcepts(
    vocabulary: string,
    relationship: string,
    signal?: AbortSignal,
  ): Promise<{ concepts: ConceptJson[] }>;
  searchRelationship(body: RelationshipSearchBody, signal?: AbortSignal): Promise<SearchResponse>;
}

export class CascadePicker {
  state: CascadeState = emptyCascade();

  constructor(private readonly client: CascadeApi) {}

  async loadVocabularies(signal?: AbortSignal): Promise<void> {
    const response = await this.client.vocabularies(signal);
    this.state = { ...emptyCascade(), vocabularies: response.vocabularies };
  }

  async selectVocabulary(id: string | null, signal?: AbortSignal): Promise<void> {
    this.state = {
      ...this.state,
      vocabulary: id,
      relationships: [],
      relationship: null,
      concepts: [],
      concept: null,
    };
    if (id === null) {
      return;
    }
    const response = await this.client.relationships(id, signal);
    if (this.state.vocabulary !== id) {
      return; // a newer selection already took over
    }
    this.state = { ...this.state, relationships: response.relationships };
  }

  async selectRelationship(name: string | null, signal?: AbortSignal): Promise<void> {
    this.state = { ...this.state, relationship: name, concepts: [], concept: null };
    const vocabulary = this.state.vocabulary;
    if (name === null || vocabulary === null) {
      return;
    }
    const response = await this.client.attributingConcepts(vocabulary, name, signal);
    if (this.state.vocabulary !== vocabulary || this.state.relationship !== name) {
      return;
    }
    this.state = { ...this.state, concepts: response.concepts };
  }

  selectConcept(concept: ConceptJson | null): void {
    this.state = { ...this.state, concept };
  }

  canSearch(): boolean {
    const s = this.state;
    return s.vocabulary !== null && s.relationship !== null && s.concept !== null;
  }

  async search(signal?: AbortSignal): Promise<SearchResponse> {
    const s = this.state;
    if (s.vocabulary === null || s.relationship === null || s.concept === null) {
      throw new Error("cascade incomplete: pick vocabulary, relationship and concept first");
    }
    return this.client.searchRelationship(
      {
        vocabulary: s.vocabulary,
        relationship: s.relationship,
        attributing: { code: s.concept.code, vocabulary: s.concept.vocabulary },
      },
      signal,
    );
  }
}
