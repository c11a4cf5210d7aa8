// Recommendation inbox: pending first, newest on top, one vote per card.

import { ApiClient, ConflictError, RecommendationView, Vote } from "./api.js";
import { clear, el } from "./dom.js";

export class Inbox {
  private client: ApiClient;
  private root: HTMLElement;
  private home: string;
  /** ids with a vote in flight or already sent: the client-side lock */
  private voted = new Set<string>();
  private lastView: RecommendationView[] = [];
  private offline = false;

  constructor(client: ApiClient, root: HTMLElement, home = "") {
    this.client = client;
    this.root = root;
    this.home = home;
  }

  setHome(home: string): void {
    this.home = home;
    this.voted.clear();
  }

  async refresh(): Promise<void> {
    try {
      const recs = await this.client.listRecommendations(this.home || undefined);
      this.offline = false;
      this.lastView = recs.sort((a, b) => b.created_at.localeCompare(a.created_at));
    } catch {
      this.offline = true; // keep the cached view
    }
    this.render();
  }

  private async vote(rec: RecommendationView, vote: Vote): Promise<void> {
    if (this.voted.has(rec.id)) return; // duplicate click suppressed
    this.voted.add(rec.id);
    this.render();
    try {
      await this.client.postFeedback(rec.id, vote);
    } catch (err) {
      if (!(err instanceof ConflictError)) {
        this.voted.delete(rec.id); // roll back the optimistic lock
      }
      // 409: someone already voted; nothing to do
    }
    await this.refresh();
  }

  render(): void {
    clear(this.root);
    if (this.offline) {
      this.root.append(el("div", { class: "banner offline" },
        ["API unreachable; showing the last known state"]));
    }
    if (this.lastView.length === 0) {
      this.root.append(el("p", { class: "empty" }, ["No recommendations yet."]));
      return;
    }
    const list = el("ul", { class: "inbox" });
    for (const rec of this.lastView) {
      const card = el("li", { class: `card ${rec.status}`, "data-rec-id": rec.id });
      card.append(el("p", { class: "text" }, [rec.text]));
      card.append(el("p", { class: "meta" }, [
        `${rec.created_at} · ${rec.home} · ` +
        (rec.rule ? `confidence ${rec.rule.confidence.toFixed(2)}, weight ${rec.rule.weight.toFixed(2)}` : ""),
      ]));
      if (rec.status === "pending" && !this.voted.has(rec.id)) {
        const yes = el("button", { class: "vote yes" }, ["YES, useful"]);
        yes.addEventListener("click", () => void this.vote(rec, "useful"));
        const no = el("button", { class: "vote no" }, ["NO, not useful"]);
        no.addEventListener("click", () => void this.vote(rec, "not_useful"));
        card.append(el("div", { class: "actions" }, [yes, no]));
      } else {
        card.append(el("span", { class: "status" }, [rec.status.replace(/_/g, " ")]));
      }
      list.append(card);
    }
    this.root.append(list);
  }
}
