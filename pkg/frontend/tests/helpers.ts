// A scriptable fetch double: routes by path, records every call.

import { MetricsView, RecommendationView, RuleView } from "../src/api.js";

export interface Call {
  url: string;
  method: string;
  body?: unknown;
}

export interface FakeServer {
  recommendations: RecommendationView[];
  rules: RuleView[];
  metrics: MetricsView;
  calls: Call[];
  feedbackStatus: number;
  down: boolean;
  fetchFn: (url: string, init?: RequestInit) => Promise<Response>;
}

export function recommendation(overrides: Partial<RecommendationView> = {}): RecommendationView {
  return {
    id: "rec-H1-00001",
    rule_id: "r1",
    home: "H1",
    created_at: "2015-03-02T09:00:00Z",
    text: "Suggestion: living room / D17 / scene 422 in living room? Reply YES if useful, NO if not.",
    status: "pending",
    voted_at: null,
    rule: { confidence: 0.8, weight: 2.4, pattern_length: 3 },
    ...overrides,
  };
}

export function rule(overrides: Partial<RuleView> = {}): RuleView {
  return {
    id: "r1",
    home: "H1",
    antecedent: ["S1", "S2"],
    consequent: "S3",
    support_count: 20,
    confidence: 0.8,
    pattern_length: 3,
    action_position: 3,
    weight: 2.4,
    active: true,
    negative_streak: 0,
    retired_reason: null,
    ...overrides,
  };
}

export const PHASE1_METRICS: MetricsView = {
  from: "2015-03-01T00:00:00Z",
  to: "2015-03-15T00:00:00Z",
  recommendations_sent: 160,
  answered: 76,
  voted_useful: 7,
  voted_not_useful: 69,
  ratio_useful_answered: 7 / 76,
  active_rules: 54,
  rules_emitting: 23,
  rules_retired_by_streak: 5,
  recs_per_day_per_home: 160 / 14 / 8,
};

export const ZERO_METRICS: MetricsView = {
  from: "1970-01-01T00:00:00Z",
  to: "1970-01-02T00:00:00Z",
  recommendations_sent: 0,
  answered: 0,
  voted_useful: 0,
  voted_not_useful: 0,
  ratio_useful_answered: 0,
  active_rules: 0,
  rules_emitting: 0,
  rules_retired_by_streak: 0,
  recs_per_day_per_home: 0,
};

export function fakeServer(): FakeServer {
  const server: FakeServer = {
    recommendations: [],
    rules: [],
    metrics: ZERO_METRICS,
    calls: [],
    feedbackStatus: 200,
    down: false,
    fetchFn: async (url: string, init?: RequestInit) => {
      const method = init?.method ?? "GET";
      server.calls.push({
        url,
        method,
        body: init?.body ? JSON.parse(String(init.body)) : undefined,
      });
      if (server.down) throw new Error("connection refused");
      if (url.includes("/feedback")) {
        return new Response(JSON.stringify({ ok: true }), { status: server.feedbackStatus });
      }
      if (url.includes("/api/recommendations")) {
        return new Response(JSON.stringify(server.recommendations), { status: 200 });
      }
      if (url.includes("/api/rules")) {
        return new Response(JSON.stringify(server.rules), { status: 200 });
      }
      if (url.includes("/api/metrics")) {
        return new Response(JSON.stringify(server.metrics), { status: 200 });
      }
      return new Response("not found", { status: 404 });
    },
  };
  return server;
}

export function feedbackCalls(server: FakeServer): Call[] {
  return server.calls.filter((c) => c.url.includes("/feedback"));
}
