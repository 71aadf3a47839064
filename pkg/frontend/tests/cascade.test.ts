import { describe, expect, test } from "vitest";

import type {
  ConceptJson,
  RelationshipSearchBody,
  SearchResponse,
  VocabularyInfo,
} from "../src/api.js";
import { CascadePicker, type CascadeApi } from "../src/cascade.js";
import { makeHit, makeResponse } from "./helpers.js";

const NOM: ConceptJson = { code: "SC-NOM", vocabulary: "LOINC", name: "Nom" };

class StubCascadeApi implements CascadeApi {
  calls: string[] = [];
  relationshipBodies: RelationshipSearchBody[] = [];
  relationshipsByVocab: Record<string, string[]> = {
    LOINC: ["Has scale", "Has method"],
    BARE: [],
  };
  conceptsByRelationship: Record<string, ConceptJson[]> = {
    "Has scale": [NOM, { code: "SC-ORD", vocabulary: "LOINC", name: "Ord" }],
    "Has method": [],
  };
  /** When set, the next relationships() call parks until this resolves. */
  relationshipsGate: Promise<void> | null = null;

  vocabularies(): Promise<{ vocabularies: VocabularyInfo[] }> {
    this.calls.push("vocabularies");
    return Promise.resolve({
      vocabularies: [
        { id: "LOINC", concepts: 20 },
        { id: "BARE", concepts: 3 },
      ],
    });
  }

  async relationships(vocabulary: string): Promise<{ relationships: string[] }> {
    this.calls.push(`relationships:${vocabulary}`);
    const gate = this.relationshipsGate;
    this.relationshipsGate = null;
    if (gate !== null) {
      await gate;
    }
    return { relationships: this.relationshipsByVocab[vocabulary] ?? [] };
  }

  attributingConcepts(
    vocabulary: string,
    relationship: string,
  ): Promise<{ concepts: ConceptJson[] }> {
    this.calls.push(`concepts:${vocabulary}:${relationship}`);
    return Promise.resolve({ concepts: this.conceptsByRelationship[relationship] ?? [] });
  }

  searchRelationship(body: RelationshipSearchBody): Promise<SearchResponse> {
    this.calls.push("search");
    this.relationshipBodies.push(body);
    return Promise.resolve(makeResponse([makeHit("BBG", "CRC1")]));
  }
}

describe("CascadePicker", () => {
  test("walks vocabulary to relationship to concept to search", async () => {
    const api = new StubCascadeApi();
    const picker = new CascadePicker(api);

    await picker.loadVocabularies();
    expect(picker.state.vocabularies.map((v) => v.id)).toEqual(["LOINC", "BARE"]);
    expect(picker.canSearch()).toBe(false);

    await picker.selectVocabulary("LOINC");
    expect(picker.state.relationships).toEqual(["Has scale", "Has method"]);

    await picker.selectRelationship("Has scale");
    expect(picker.state.concepts.map((c) => c.code)).toEqual(["SC-NOM", "SC-ORD"]);
    expect(picker.canSearch()).toBe(false);

    picker.selectConcept(NOM);
    expect(picker.canSearch()).toBe(true);

    const result = await picker.search();
    expect(result.hits).toHaveLength(1);
    expect(api.relationshipBodies).toEqual([
      {
        vocabulary: "LOINC",
        relationship: "Has scale",
        attributing: { code: "SC-NOM", vocabulary: "LOINC" },
      },
    ]);
  });

  test("changing vocabulary resets everything downstream", async () => {
    const api = new StubCascadeApi();
    const picker = new CascadePicker(api);
    await picker.loadVocabularies();
    await picker.selectVocabulary("LOINC");
    await picker.selectRelationship("Has scale");
    picker.selectConcept(NOM);
    expect(picker.canSearch()).toBe(true);

    await picker.selectVocabulary("BARE");
    expect(picker.state.relationship).toBeNull();
    expect(picker.state.relationships).toEqual([]);
    expect(picker.state.concepts).toEqual([]);
    expect(picker.state.concept).toBeNull();
    expect(picker.canSearch()).toBe(false);
    // no attributing-concept load may fire for the stale relationship
    const conceptCalls = api.calls.filter((c) => c.startsWith("concepts:"));
    expect(conceptCalls).toEqual(["concepts:LOINC:Has scale"]);
  });

  test("deselecting the relationship clears concepts without a request", async () => {
    const api = new StubCascadeApi();
    const picker = new CascadePicker(api);
    await picker.loadVocabularies();
    await picker.selectVocabulary("LOINC");
    await picker.selectRelationship("Has scale");
    const callsBefore = api.calls.length;

    await picker.selectRelationship(null);
    expect(picker.state.concepts).toEqual([]);
    expect(api.calls.length).toBe(callsBefore);
  });

  test("a slow stale load cannot overwrite a newer selection", async () => {
    const api = new StubCascadeApi();
    const picker = new CascadePicker(api);
    await picker.loadVocabularies();

    let release = (): void => {};
    api.relationshipsGate = new Promise((resolve) => {
      release = resolve;
    });
    const slow = picker.selectVocabulary("LOINC"); // parked on the gate
    await picker.selectVocabulary("BARE");
    expect(picker.state.vocabulary).toBe("BARE");

    release();
    await slow;
    expect(picker.state.vocabulary).toBe("BARE");
    expect(picker.state.relationships).toEqual([]); // LOINC's list was discarded
  });

  test("search before the cascade is complete throws", async () => {
    const picker = new CascadePicker(new StubCascadeApi());
    await expect(picker.search()).rejects.toThrow("cascade incomplete");
  });
});
