// Read-only rule table: active flag, weight, streak; retirement is visible,
// never editable (the feedback endpoint is the only mutation path).

import { ApiClient, RuleView } from "./api.js";
import { clear, el } from "./dom.js";

const STREAK_WARNING_AT = 9;

export class RulesPanel {
  private client: ApiClient;
  private root: HTMLElement;
  private home: string;
  private lastView: RuleView[] = [];
  private offline = false;

  constructor(client: ApiClient, root: HTMLElement, home = "") {
    this.client = client;
    this.root = root;
    this.home = home;
  }

  setHome(home: string): void {
    this.home = home;
  }

  async refresh(): Promise<void> {
    try {
      this.lastView = await this.client.listRules(this.home || undefined);
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
    if (this.lastView.length === 0) {
      this.root.append(el("p", { class: "empty" }, ["No rules loaded."]));
      return;
    }
    const table = el("table", { class: "rules" });
    table.append(el("tr", {}, [
      el("th", {}, ["rule"]), el("th", {}, ["pattern"]), el("th", {}, ["confidence"]),
      el("th", {}, ["weight"]), el("th", {}, ["streak"]), el("th", {}, ["state"]),
    ]));
    for (const rule of this.lastView) {
      const classes = ["rule-row"];
      if (!rule.active) classes.push("retired");
      const row = el("tr", { class: classes.join(" "), "data-rule-id": rule.id });
      row.append(el("td", {}, [rule.id]));
      row.append(el("td", {}, [`${rule.antecedent.join(" → ")} ⇒ ${rule.consequent}`]));
      row.append(el("td", {}, [rule.confidence.toFixed(2)]));
      row.append(el("td", {}, [rule.weight.toFixed(2)]));
      const streak = el("td", { class: "streak" }, [String(rule.negative_streak)]);
      if (rule.active && rule.negative_streak >= STREAK_WARNING_AT) {
        streak.append(el("span", { class: "badge warning" }, ["near retirement"]));
      }
      row.append(streak);
      row.append(el("td", { class: "state" },
        [rule.active ? "active" : `retired (${rule.retired_reason ?? "manual"})`]));
      table.append(row);
    }
    this.root.append(table);
  }
}
