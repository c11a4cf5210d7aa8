// Typed client for the homeseq HTTP API. All state lives server-side; the
// UI only reads, plus the single feedback endpoint.

export type Vote = "useful" | "not_useful";

export interface RuleSummary {
  confidence: number;
  weight: number;
  pattern_length: number;
}

export interface RecommendationView {
  id: string;
  rule_id: string;
  home: string;
  created_at: string;
  text: string;
  status: "pending" | "accepted_useful" | "rejected_not_useful" | "expired";
  voted_at: string | null;
  rule: RuleSummary | null;
}

export interface RuleView {
  id: string;
  home: string;
  antecedent: string[];
  consequent: string;
  support_count: number;
  confidence: number;
  pattern_length: number;
  action_position: number;
  weight: number;
  active: boolean;
  negative_streak: number;
  retired_reason: string | null;
}

export interface MetricsView {
  from: string;
  to: string;
  recommendations_sent: number;
  answered: number;
  voted_useful: number;
  voted_not_useful: number;
  ratio_useful_answered: number;
  active_rules: number;
  rules_emitting: number;
  rules_retired_by_streak: number;
  recs_per_day_per_home: number;
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export interface ClientOptions {
  baseUrl?: string;
  token?: string;
  fetchFn?: FetchLike;
}

export class ConflictError extends Error {}

export class ApiClient {
  private baseUrl: string;
  private token?: string;
  private fetchFn: FetchLike;

  constructor(options: ClientOptions = {}) {
    this.baseUrl = (options.baseUrl ?? "").replace(/\/$/, "");
    this.token = options.token;
    this.fetchFn = options.fetchFn ?? ((url, init) => fetch(url, init));
  }

  private headers(json: boolean): Record<string, string> {
    const headers: Record<string, string> = {};
    if (json) headers["Content-Type"] = "application/json";
    if (this.token) headers["X-API-Token"] = this.token;
    return headers;
  }

  private async get<T>(path: string, params?: Record<string, string>): Promise<T> {
    const query = params
      ? "?" + new URLSearchParams(
          Object.entries(params).filter(([, v]) => v !== "")
        ).toString()
      : "";
    const response = await this.fetchFn(`${this.baseUrl}${path}${query}`, {
      headers: this.headers(false),
    });
    if (!response.ok) throw new Error(`GET ${path}: ${response.status}`);
    return (await response.json()) as T;
  }

  listRecommendations(home?: string, status?: string): Promise<RecommendationView[]> {
    const params: Record<string, string> = {};
    if (home) params.home = home;
    if (status) params.status = status;
    return this.get("/api/recommendations", params);
  }

  listRules(home?: string): Promise<RuleView[]> {
    return this.get("/api/rules", home ? { home } : undefined);
  }

  getMetrics(from?: string, to?: string): Promise<MetricsView> {
    const params: Record<string, string> = {};
    if (from) params.from = from;
    if (to) params.to = to;
    return this.get("/api/metrics", params);
  }

  /** One vote per recommendation; a 409 means someone voted first and is
   * swallowed as a ConflictError the caller may ignore. */
  async postFeedback(recId: string, vote: Vote): Promise<void> {
    const response = await this.fetchFn(
      `${this.baseUrl}/api/recommendations/${encodeURIComponent(recId)}/feedback`,
      { method: "POST", headers: this.headers(true), body: JSON.stringify({ vote }) },
    );
    if (response.status === 409) throw new ConflictError(recId);
    if (!response.ok) throw new Error(`feedback ${recId}: ${response.status}`);
  }
}
