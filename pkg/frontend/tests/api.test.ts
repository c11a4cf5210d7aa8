import { describe, expect, it } from "vitest";

import { ApiClient, ConflictError } from "../src/api.js";
import { fakeServer, recommendation } from "./helpers.js";

describe("api client", () => {
  it("sends the static token on every request when configured", async () => {
    const calls: RequestInit[] = [];
    const client = new ApiClient({
      token: "sekrit",
      fetchFn: async (_url, init) => {
        calls.push(init ?? {});
        return new Response("[]", { status: 200 });
      },
    });
    await client.listRules();
    expect((calls[0].headers as Record<string, string>)["X-API-Token"]).toBe("sekrit");
  });

  it("translates a 409 into ConflictError", async () => {
    const server = fakeServer();
    server.feedbackStatus = 409;
    const client = new ApiClient({ fetchFn: server.fetchFn });
    await expect(client.postFeedback("rec-x", "useful")).rejects.toBeInstanceOf(ConflictError);
  });

  it("filters recommendations by home and status in the query", async () => {
    const server = fakeServer();
    server.recommendations = [recommendation()];
    const client = new ApiClient({ fetchFn: server.fetchFn });
    await client.listRecommendations("H1", "pending");
    expect(server.calls[0].url).toContain("home=H1");
    expect(server.calls[0].url).toContain("status=pending");
  });

  it("raises on non-2xx GET responses", async () => {
    const client = new ApiClient({
      fetchFn: async () => new Response("boom", { status: 500 }),
    });
    await expect(client.listRules()).rejects.toThrow("500");
  });
});
