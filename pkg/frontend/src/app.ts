// Wires the three panels to the API, polling every five seconds.

import { ApiClient } from "./api.js";
import { el } from "./dom.js";
import { Inbox } from "./inbox.js";
import { MetricsPanel } from "./metrics.js";
import { RulesPanel } from "./rules.js";

export const POLL_INTERVAL_MS = 5000;

export interface App {
  inbox: Inbox;
  rules: RulesPanel;
  metrics: MetricsPanel;
  refreshAll: () => Promise<void>;
  stop: () => void;
}

export function mountApp(root: HTMLElement, client?: ApiClient): App {
  const api = client ?? new ApiClient({});

  const homeInput = el("input", { placeholder: "home id (empty = all)", class: "home" });
  const fromInput = el("input", { type: "date", class: "from" });
  const toInput = el("input", { type: "date", class: "to" });
  const controls = el("div", { class: "controls" }, [
    homeInput, " metrics window: ", fromInput, " – ", toInput,
  ]);

  const inboxRoot = el("section", { class: "panel inbox-panel" });
  const rulesRoot = el("section", { class: "panel rules-panel" });
  const metricsRoot = el("section", { class: "panel metrics-panel" });
  root.append(
    controls,
    el("h2", {}, ["Recommendations"]), inboxRoot,
    el("h2", {}, ["Rules"]), rulesRoot,
    el("h2", {}, ["Metrics"]), metricsRoot,
  );

  const inbox = new Inbox(api, inboxRoot);
  const rules = new RulesPanel(api, rulesRoot);
  const metrics = new MetricsPanel(api, metricsRoot);

  const refreshAll = async () => {
    await Promise.all([inbox.refresh(), rules.refresh(), metrics.refresh()]);
  };

  homeInput.addEventListener("change", () => {
    inbox.setHome(homeInput.value.trim());
    rules.setHome(homeInput.value.trim());
    void refreshAll();
  });
  const windowChanged = () => {
    metrics.setWindow(
      fromInput.value ? `${fromInput.value}T00:00:00Z` : "",
      toInput.value ? `${toInput.value}T00:00:00Z` : "",
    );
    void metrics.refresh();
  };
  fromInput.addEventListener("change", windowChanged);
  toInput.addEventListener("change", windowChanged);

  const timer = setInterval(() => void refreshAll(), POLL_INTERVAL_MS);
  void refreshAll();
  return { inbox, rules, metrics, refreshAll, stop: () => clearInterval(timer) };
}
