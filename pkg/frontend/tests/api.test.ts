import { describe, expect, test } from "vitest";

import { ApiClient, ApiError, isAbort, LatestWins } from "../src/api.js";

interface Captured {
  url: string;
  init: RequestInit;
}

function jsonFetch(
  status: number,
  body: unknown,
  captured: Captured[],
): typeof fetch {
  return (input, init) => {
    captured.push({ url: String(input), init: init ?? {} });
    return Promise.resolve(
      new Response(JSON.stringify(body), {
        status,
        headers: { "content-type": "application/json" },
      }),
    );
  };
}

describe("ApiClient", () => {
  test("POST sends a JSON body and logs the request", async () => {
    const captured: Captured[] = [];
    const client = new ApiClient(
      "http://api.test",
      jsonFetch(200, { hits: [], warnings: [] }, captured),
    );
    const body = {
      seeds: [{ code: "C1", vocabulary: "VX" }],
      operator: "OR" as const,
      expansion: true,
    };

    const response = await client.searchConcepts(body);
    expect(response).toEqual({ hits: [], warnings: [] });

    expect(captured).toHaveLength(1);
    expect(captured[0].url).toBe("http://api.test/api/v1/search/concepts");
    expect(captured[0].init.method).toBe("POST");
    expect(JSON.parse(String(captured[0].init.body))).toEqual(body);

    expect(client.log).toEqual([
      { method: "POST", path: "/api/v1/search/concepts", body },
    ]);
  });

  test("suggest builds an escaped query string", async () => {
    const captured: Captured[] = [];
    const client = new ApiClient("", jsonFetch(200, { suggestions: [] }, captured));

    await client.suggest("body mass & more", 5);
    expect(captured[0].url).toBe("/api/v1/concepts/suggest?q=body+mass+%26+more&limit=5");
    expect(captured[0].init.method).toBe("GET");
  });

  test("vocabulary path segments are escaped", async () => {
    const captured: Captured[] = [];
    const client = new ApiClient("", jsonFetch(200, { relationships: [] }, captured));

    await client.relationships("ICD/10 CM");
    expect(captured[0].url).toBe("/api/v1/vocabularies/ICD%2F10%20CM/relationships");
  });

  test("non-2xx envelope becomes an ApiError", async () => {
    const envelope = {
      status: 400,
      code: "unknown_concept",
      message: "unknown concept (ghost, VX)",
      details: ["(ghost, VX)"],
    };
    const client = new ApiClient("", jsonFetch(400, envelope, []));

    const error = await client
      .searchConcepts({ seeds: [{ code: "ghost", vocabulary: "VX" }], operator: "OR", expansion: true })
      .then(
        () => null,
        (e: unknown) => e,
      );
    expect(error).toBeInstanceOf(ApiError);
    const apiError = error as ApiError;
    expect(apiError.status).toBe(400);
    expect(apiError.code).toBe("unknown_concept");
    expect(apiError.message).toBe("unknown concept (ghost, VX)");
    expect(apiError.details).toEqual(["(ghost, VX)"]);
  });

  test("an HTML error page becomes a bad_response ApiError", async () => {
    const fetchFn: typeof fetch = () =>
      Promise.resolve(new Response("<html>gateway</html>", { status: 502 }));
    const client = new ApiClient("", fetchFn);

    await expect(client.vocabularies()).rejects.toMatchObject({
      code: "bad_response",
      status: 502,
    });
  });
});

describe("LatestWins", () => {
  test("the next signal aborts the previous one", () => {
    const channel = new LatestWins();
    const first = channel.next();
    expect(first.aborted).toBe(false);

    const second = channel.next();
    expect(first.aborted).toBe(true);
    expect(second.aborted).toBe(false);

    channel.cancel();
    expect(second.aborted).toBe(true);
  });

  test("aborted fetch rejections are recognizable", async () => {
    const channel = new LatestWins();
    const client = new ApiClient("", (_input, init) => {
      return new Promise((_resolve, reject) => {
        init?.signal?.addEventListener("abort", () => {
          reject(new DOMException("aborted", "AbortError"));
        });
      });
    });

    const pending = client.vocabularies(channel.next());
    channel.next(); // second request supersedes the first
    const error = await pending.then(
      () => null,
      (e: unknown) => e,
    );
    expect(isAbort(error)).toBe(true);
    expect(isAbort(new Error("boom"))).toBe(false);
  });
});
