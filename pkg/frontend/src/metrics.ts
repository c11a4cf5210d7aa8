// Metrics dashboard over a date window; numbers come straight from the API.

import { ApiClient, MetricsView } from "./api.js";
import { clear, el, formatPercent } from "./dom.js";

export class MetricsPanel {
  private client: ApiClient;
  private root: HTMLElement;
  private from = "";
  private to = "";
  private lastView: MetricsView | null = null;
  private offline = false;

  constructor(client: ApiClient, root: HTMLElement) {
    this.client = client;
    this.root = root;
  }

  setWindow(from: string, to: string): void {
    this.from = from;
    this.to = to;
  }

  async refresh(): Promise<void> {
    try {
      this.lastView = await this.client.getMetrics(this.from || undefined,
                                                   this.to || undefined);
      this.offline = false;
    } catch {
      this.offline = true;
    }
    this.render();
  }

  render(): void {
    clear(this.root);
    if (this.offline) {
      this.root.append(el("div", { class: "banner offline" },
        ["API unreachable; showing the last known state"]));
    }
    const m = this.lastView;
    const rows: [string, string][] = [
      ["Recommendations sent", String(m?.recommendations_sent ?? 0)],
      ["Answered", String(m?.answered ?? 0)],
      ["Voted useful", String(m?.voted_useful ?? 0)],
      ["Voted not useful", String(m?.voted_not_useful ?? 0)],
      ["Ratio useful/answered", formatPercent(m?.ratio_useful_answered ?? 0)],
      ["Active rules", String(m?.active_rules ?? 0)],
      ["Rules that recommended", String(m?.rules_emitting ?? 0)],
      ["Rules retired by streak", String(m?.rules_retired_by_streak ?? 0)],
      ["Recommendations/day/home", (m?.recs_per_day_per_home ?? 0).toFixed(2)],
    ];
    const table = el("table", { class: "metrics" });
    for (const [label, value] of rows) {
      table.append(el("tr", {}, [
        el("td", { class: "label" }, [label]),
        el("td", { class: "value" }, [value]),
      ]));
    }
    this.root.append(table);
  }
}
