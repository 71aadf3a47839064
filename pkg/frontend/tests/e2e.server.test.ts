/**
 * End-to-end checks against a live service instance.
 *
 * A fixture repository is generated and imported with the catalog CLI,
 * served over HTTP, and then driven exactly the way the page drives it:
 * through the session executor, the cascade picker and the table renderer.
 * Every expectation comes from the fixture's ledger or from an independent
 * fetch of the same endpoint, never from the UI code under test.
 */

import { execFileSync, spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, readFileSync, rmSync } from "node:fs";
import { createServer } from "node:net";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, expect, test } from "vitest";

import { ApiClient } from "../src/api.js";
import { CascadePicker } from "../src/cascade.js";
import {
  decodeSession,
  encodeSession,
  executeSession,
  type SearchSession,
} from "../src/session.js";
import { renderTable, rowKey } from "../src/table.js";
import { renderedRowKeys } from "./helpers.js";

interface LedgerQuery {
  id: string;
  seeds: Array<[string, string]>;
  operator: "AND" | "OR";
  expansion: boolean;
  expected: string[];
}

interface Ledger {
  biobank: string;
  queries: LedgerQuery[];
  relationship_queries: Array<{
    vocabulary: string;
    relationship: string;
    attributing: [string, string];
    expected: string[];
  }>;
  quality_example: {
    concept: [string, string];
    characteristic: string;
    min: number;
    max: number;
    expected: string[];
    values: Record<string, number>;
  };
  collection_quality_query: {
    characteristic: string;
    min: number;
    max: number;
    expected: string[];
  };
  suggest: { prefix: string; expected_code: [string, string]; count: number };
}

let workDir = "";
let server: ChildProcess | null = null;
let serverErr = "";
let base = "";
let ledger: Ledger;

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const probe = createServer();
    probe.once("error", reject);
    probe.listen(0, "127.0.0.1", () => {
      const address = probe.address();
      if (address === null || typeof address === "string") {
        reject(new Error("could not allocate a port"));
        return;
      }
      const port = address.port;
      probe.close(() => resolve(port));
    });
  });
}

async function waitForHealth(deadlineMs: number): Promise<void> {
  const start = Date.now();
  for (;;) {
    try {
      const response = await fetch(`${base}/api/v1/health`);
      if (response.ok) {
        return;
      }
    } catch {
      // not listening yet
    }
    if (Date.now() - start > deadlineMs) {
      throw new Error(`service never became healthy; stderr so far:\n${serverErr}`);
    }
    await new Promise((resolve) => setTimeout(resolve, 150));
  }
}

/** Fetch an endpoint directly, bypassing all code under test. */
async function rawPost(path: string, body: unknown): Promise<{ hits: Array<{ biobank: string; name: string; highlight: { value: number } | null }> }> {
  const response = await fetch(`${base}${path}`, {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify(body),
  });
  expect(response.ok).toBe(true);
  return (await response.json()) as never;
}

beforeAll(async () => {
  workDir = mkdtempSync(join(tmpdir(), "bbui-e2e-"));
  const fixture = join(workDir, "fixture");
  const snapshot = join(workDir, "snapshot.json");
  execFileSync("bbcatalog", ["gen-testdata", "--out", fixture]);
  execFileSync("bbcatalog", [
    "--vocab",
    join(fixture, "vocabulary"),
    "--snapshot",
    snapshot,
    "import",
    join(fixture, "annotations.csv"),
  ]);
  ledger = JSON.parse(readFileSync(join(fixture, "ledger.json"), "utf8")) as Ledger;

  const port = await freePort();
  base = `http://127.0.0.1:${port}`;
  server = spawn(
    "bbcatalog",
    [
      "--vocab",
      join(fixture, "vocabulary"),
      "--snapshot",
      snapshot,
      "serve",
      "--host",
      "127.0.0.1",
      "--port",
      String(port),
    ],
    { stdio: ["ignore", "ignore", "pipe"] },
  );
  server.stderr?.on("data", (chunk: Buffer) => {
    serverErr += chunk.toString();
  });
  await waitForHealth(30_000);
}, 60_000);

afterAll(() => {
  server?.kill();
  if (workDir !== "") {
    rmSync(workDir, { recursive: true, force: true });
  }
});

function sessionFor(query: LedgerQuery): SearchSession {
  return {
    seeds: query.seeds.map(([code, vocabulary]) => ({ code, vocabulary, name: "" })),
    operator: query.operator,
    expansion: query.expansion,
    filters: [],
  };
}

test("two-concept OR search renders exactly the API's rows", async () => {
  const query = ledger.queries.find((q) => q.id === "or-disjoint");
  if (query === undefined) {
    throw new Error("fixture ledger lacks the or-disjoint query");
  }
  expect(query.seeds.length).toBe(2);
  expect(query.operator).toBe("OR");

  const client = new ApiClient(base);
  const response = await executeSession(client, sessionFor(query));
  expect(response).not.toBeNull();
  const html = renderTable(response);

  const direct = await rawPost("/api/v1/search/concepts", {
    seeds: query.seeds.map(([code, vocabulary]) => ({ code, vocabulary })),
    operator: query.operator,
    expansion: query.expansion,
  });
  expect(renderedRowKeys(html)).toEqual(direct.hits.map((h) => rowKey(h.biobank, h.name)));

  // and the ledger agrees on which collections those are
  expect(response!.hits.map((h) => h.name).sort()).toEqual([...query.expected].sort());
  // exactly one request went out, carrying the session verbatim
  expect(client.log).toEqual([
    {
      method: "POST",
      path: "/api/v1/search/concepts",
      body: {
        seeds: query.seeds.map(([code, vocabulary]) => ({ code, vocabulary })),
        operator: "OR",
        expansion: query.expansion,
      },
    },
  ]);
}, 30_000);

test("vocabulary cascade walks to a relationship search with matching rows", async () => {
  const rq = ledger.relationship_queries[0];
  const client = new ApiClient(base);
  const picker = new CascadePicker(client);

  await picker.loadVocabularies();
  expect(picker.state.vocabularies.map((v) => v.id)).toContain(rq.vocabulary);

  await picker.selectVocabulary(rq.vocabulary);
  expect(picker.state.relationships).toContain(rq.relationship);

  await picker.selectRelationship(rq.relationship);
  const [attrCode, attrVocab] = rq.attributing;
  const concept = picker.state.concepts.find(
    (c) => c.code === attrCode && c.vocabulary === attrVocab,
  );
  expect(concept).toBeDefined();

  picker.selectConcept(concept ?? null);
  expect(picker.canSearch()).toBe(true);
  const response = await picker.search();
  const html = renderTable(response);

  const direct = await rawPost("/api/v1/search/relationship", {
    vocabulary: rq.vocabulary,
    relationship: rq.relationship,
    attributing: { code: attrCode, vocabulary: attrVocab },
  });
  expect(renderedRowKeys(html)).toEqual(direct.hits.map((h) => rowKey(h.biobank, h.name)));
  expect(response.hits.map((h) => h.name).sort()).toEqual([...rq.expected].sort());
}, 30_000);

test("widening an attribute quality filter never removes rows", async () => {
  const example = ledger.quality_example;
  const [code, vocabulary] = example.concept;
  const client = new ApiClient(base);
  const session: SearchSession = {
    seeds: [{ code, vocabulary, name: "" }],
    operator: "OR",
    expansion: false,
    filters: [
      {
        scope: "attribute",
        characteristic: example.characteristic,
        min: example.min,
        max: example.max,
      },
    ],
  };

  const narrow = await executeSession(client, session);
  expect(narrow).not.toBeNull();
  const narrowKeys = renderedRowKeys(renderTable(narrow));
  expect(narrow!.hits.map((h) => h.name).sort()).toEqual([...example.expected].sort());
  // the highlighted value is the planted one
  for (const hit of narrow!.hits) {
    expect(hit.highlight?.value).toBe(example.values[hit.name]);
  }

  const widths: Array<[number, number]> = [
    [example.min / 2, example.max],
    [0, 1],
  ];
  let previous = narrowKeys;
  for (const [min, max] of widths) {
    session.filters = [
      { scope: "attribute", characteristic: example.characteristic, min, max },
    ];
    const wider = await executeSession(client, session);
    const widerKeys = renderedRowKeys(renderTable(wider));
    for (const key of previous) {
      expect(widerKeys).toContain(key);
    }
    previous = widerKeys;
  }
}, 30_000);

test("widening a collection quality filter never removes rows", async () => {
  const cq = ledger.collection_quality_query;
  const client = new ApiClient(base);
  const session: SearchSession = {
    seeds: [],
    operator: "OR",
    expansion: true,
    filters: [
      { scope: "collection", characteristic: cq.characteristic, min: cq.min, max: cq.max },
    ],
  };

  const narrow = await executeSession(client, session);
  expect(narrow!.hits.map((h) => h.name).sort()).toEqual([...cq.expected].sort());
  const narrowKeys = renderedRowKeys(renderTable(narrow));

  session.filters = [
    { scope: "collection", characteristic: cq.characteristic, min: 0, max: 1 },
  ];
  const wide = await executeSession(client, session);
  const wideKeys = renderedRowKeys(renderTable(wide));
  for (const key of narrowKeys) {
    expect(wideKeys).toContain(key);
  }
}, 30_000);

test("a deep link reproduces the request and the rendered table", async () => {
  const example = ledger.quality_example;
  const [code, vocabulary] = example.concept;
  const original: SearchSession = {
    seeds: [{ code, vocabulary, name: "Example concept" }],
    operator: "AND",
    expansion: false,
    filters: [
      {
        scope: "attribute",
        characteristic: example.characteristic,
        min: example.min,
        max: example.max,
      },
    ],
  };

  const firstClient = new ApiClient(base);
  const firstHtml = renderTable(await executeSession(firstClient, original));

  const link = encodeSession(original);
  const restored = decodeSession(link);
  expect(restored).toEqual(original);

  const secondClient = new ApiClient(base);
  const secondHtml = renderTable(await executeSession(secondClient, restored));

  expect(secondHtml).toBe(firstHtml);
  expect(secondClient.log).toEqual(firstClient.log);
}, 30_000);

test("autocomplete ranks the ledger's expected concept first", async () => {
  const client = new ApiClient(base);
  const response = await client.suggest(ledger.suggest.prefix, 5);
  expect(response.suggestions.length).toBeGreaterThan(0);
  const top = response.suggestions[0];
  expect([top.code, top.vocabulary]).toEqual(ledger.suggest.expected_code);
  expect(top.count).toBe(ledger.suggest.count);
}, 30_000);
