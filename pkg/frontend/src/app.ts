// The analyst console: create or resume a session, answer one pair at a
// time, watch the solve settle, inspect the final ranking.
//
// Every figure on screen (cost, tied-order count, metrics, the ranking
// itself) is rendered verbatim from service responses. The client holds no
// prioritization logic; its only state is the session id and the buffered,
// not-yet-submitted answers.

import { ApiClient, ApiError } from "./api";
import { AnswerBuffer } from "./buffer";
import type {
  PendingPair,
  RankingResponse,
  RequirementCard,
  ResponseItem,
  SessionState,
  Verdict,
} from "./types";

export interface AppOptions {
  pollIntervalMs?: number;
  storage?: Storage;
}

function escape(text: string): string {
  const div = document.createElement("div");
  div.textContent = text;
  return div.innerHTML;
}

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

const STATUS_LABELS: Record<string, string> = {
  converged: "Converged: a single optimal ordering remains.",
  budget_exhausted: "Budget exhausted: the question allowance is spent.",
  plateau: "Plateau: tied orderings remain but every informative pair has been asked.",
};

export class App {
  private readonly root: HTMLElement;
  private readonly api: ApiClient;
  private readonly pollIntervalMs: number;
  private readonly storage: Storage;

  private sessionId: string | null = null;
  private state: SessionState | null = null;
  private ranking: RankingResponse | null = null;
  private buffer: AnswerBuffer | null = null;
  private conflict = false;

  constructor(root: HTMLElement, api: ApiClient, options: AppOptions = {}) {
    this.root = root;
    this.api = api;
    this.pollIntervalMs = options.pollIntervalMs ?? 1000;
    this.storage = options.storage ?? window.localStorage;
    this.renderCreate();
  }

  // -- session lifecycle -------------------------------------------------

  async createSession(projectText: string, budget: number): Promise<void> {
    let project: unknown;
    try {
      project = JSON.parse(projectText);
    } catch (error) {
      this.renderCreate([`not valid JSON: ${(error as Error).message}`]);
      return;
    }
    try {
      const created = await this.api.createSession(project, budget);
      this.adopt(created.session_id, created.state);
    } catch (error) {
      if (error instanceof ApiError) {
        const messages = error.issues.length
          ? error.issues.map((issue) => `${issue.path}: ${issue.message}`)
          : [error.message];
        this.renderCreate(messages);
        return;
      }
      throw error;
    }
    await this.sync();
  }

  async resumeSession(sessionId: string): Promise<void> {
    try {
      const state = await this.api.getState(sessionId);
      this.adopt(sessionId, state);
    } catch (error) {
      if (error instanceof ApiError) {
        this.renderCreate([error.message]);
        return;
      }
      throw error;
    }
    await this.sync();
  }

  private adopt(sessionId: string, state: SessionState): void {
    this.sessionId = sessionId;
    this.state = state;
    this.ranking = null;
    this.conflict = false;
    this.buffer = new AnswerBuffer(sessionId, this.storage);
  }

  /** Poll until the service is idle, then render whichever view applies. */
  private async sync(): Promise<void> {
    if (!this.sessionId || !this.state) {
      return;
    }
    while (this.state.solving) {
      this.renderSolving();
      await sleep(this.pollIntervalMs);
      this.state = await this.api.getState(this.sessionId);
    }
    if (this.state.status === "active") {
      this.renderComparison();
      return;
    }
    this.ranking = await this.api.getRanking(this.sessionId);
    this.renderResults();
  }

  // -- answering ---------------------------------------------------------

  private unansweredPending(): PendingPair[] {
    if (!this.state || !this.buffer) {
      return [];
    }
    return this.state.pending.filter((p) => this.buffer!.get(p.pair) === undefined);
  }

  async answerCurrent(verdict: Verdict): Promise<void> {
    const open = this.unansweredPending();
    if (!open.length || !this.buffer) {
      return;
    }
    this.buffer.set(open[0].pair, verdict);
    if (this.unansweredPending().length === 0) {
      await this.submitBuffered();
    } else {
      this.renderComparison();
    }
  }

  /** Send every buffered verdict for a still-pending pair. */
  async submitBuffered(): Promise<void> {
    if (!this.sessionId || !this.state || !this.buffer) {
      return;
    }
    const responses: ResponseItem[] = [];
    for (const pending of this.state.pending) {
      const verdict = this.buffer.get(pending.pair);
      if (verdict !== undefined) {
        responses.push({ pair: pending.pair, verdict });
      }
    }
    if (!responses.length) {
      return;
    }
    try {
      const reply = await this.api.submitResponses(this.sessionId, responses);
      this.state = reply.state;
    } catch (error) {
      if (error instanceof ApiError && error.status === 409) {
        this.conflict = true;
        this.renderComparison();
        return;
      }
      throw error;
    }
    this.buffer.clear();
    await this.sync();
  }

  /** Conflict recovery: refetch the authoritative state and carry on. */
  async reloadSession(): Promise<void> {
    if (!this.sessionId) {
      return;
    }
    this.conflict = false;
    this.state = await this.api.getState(this.sessionId);
    await this.sync();
  }

  // -- views ---------------------------------------------------------------

  private renderCreate(errors: string[] = []): void {
    const errorList = errors.length
      ? `<ul class="errors" data-testid="create-errors">${errors
          .map((message) => `<li>${escape(message)}</li>`)
          .join("")}</ul>`
      : "";
    this.root.innerHTML = `
      <section class="panel" data-view="create">
        <h1>priorank</h1>
        <p>Upload a project file, set the question budget, and start prioritizing.</p>
        ${errorList}
        <form data-testid="create-form">
          <label>Project file <input type="file" accept=".project,.json" data-testid="project-file"></label>
          <label>Question budget <input type="number" min="0" value="100" data-testid="budget-input"></label>
          <button type="submit" data-testid="create-button">Start session</button>
        </form>
        <form data-testid="resume-form">
          <label>Or resume a session id <input type="text" data-testid="resume-input"></label>
          <button type="submit" data-testid="resume-button">Resume</button>
        </form>
      </section>`;

    const createForm = this.root.querySelector<HTMLFormElement>('[data-testid="create-form"]')!;
    createForm.addEventListener("submit", (event) => {
      event.preventDefault();
      const fileInput = this.root.querySelector<HTMLInputElement>('[data-testid="project-file"]')!;
      const budgetInput = this.root.querySelector<HTMLInputElement>('[data-testid="budget-input"]')!;
      const file = fileInput.files?.[0];
      if (!file) {
        this.renderCreate(["choose a project file first"]);
        return;
      }
      const reader = new FileReader();
      reader.onload = () => {
        void this.createSession(String(reader.result), Number(budgetInput.value));
      };
      reader.readAsText(file);
    });

    const resumeForm = this.root.querySelector<HTMLFormElement>('[data-testid="resume-form"]')!;
    resumeForm.addEventListener("submit", (event) => {
      event.preventDefault();
      const input = this.root.querySelector<HTMLInputElement>('[data-testid="resume-input"]')!;
      if (input.value.trim()) {
        void this.resumeSession(input.value.trim());
      }
    });
  }

  private requirementCard(id: string, slot: string): string {
    const requirement: RequirementCard | undefined = this.state?.requirements.find((r) => r.id === id);
    const title = requirement?.title ? escape(requirement.title) : "";
    return `
      <div class="card" data-testid="${slot}">
        <div class="card-id">${escape(id)}</div>
        <div class="card-title">${title}</div>
      </div>`;
  }

  private statusBar(): string {
    const state = this.state!;
    const cost = state.cost === null ? "?" : String(state.cost);
    return `
      <div class="statusbar">
        <span class="chip" data-testid="cost-chip">cost ${escape(cost)}</span>
        <span class="chip" data-testid="tied-chip">${state.solution_count} candidate orderings</span>
        <span class="chip" data-testid="budget-chip">${state.budget.used}/${state.budget.max} questions used</span>
      </div>`;
  }

  private renderComparison(): void {
    const state = this.state!;
    const open = this.unansweredPending();
    const buffered = state.pending.length - open.length;
    const conflictBanner = this.conflict
      ? `<div class="conflict" data-testid="conflict-banner">
           Someone else updated this session. <button data-testid="reload-button">Reload session</button>
         </div>`
      : "";
    if (!open.length) {
      // everything buffered; waiting on submit (or a conflict)
      this.root.innerHTML = `
        <section class="panel" data-view="comparison">
          ${conflictBanner}
          ${this.statusBar()}
          <p>All ${state.pending.length} answers buffered.</p>
          <button data-testid="submit-now">Submit answers</button>
        </section>`;
      this.bindComparisonActions();
      return;
    }
    const current = open[0];
    const [first, second] = current.pair;
    const progress = state.budget.max
      ? Math.round((state.budget.used / state.budget.max) * 100)
      : 100;
    this.root.innerHTML = `
      <section class="panel" data-view="comparison">
        ${conflictBanner}
        ${this.statusBar()}
        <div class="progress"><div class="progress-fill" style="width:${progress}%"></div></div>
        <p data-testid="progress-text">${state.budget.used} of ${state.budget.max} questions used;
          ${buffered} buffered, ${open.length} to go in this round.</p>
        <h2>Which should come first?</h2>
        <div class="pair">
          ${this.requirementCard(first, "card-first")}
          ${this.requirementCard(second, "card-second")}
        </div>
        <p class="hint">${current.frequency} pairs of tied orderings differ on this choice.</p>
        <div class="actions">
          <button data-testid="answer-first">${escape(first)} first</button>
          <button data-testid="answer-second">${escape(second)} first</button>
          <button data-testid="answer-undecided">Undecided</button>
        </div>
        <button class="secondary" data-testid="submit-now" ${buffered ? "" : "disabled"}>
          Submit ${buffered} buffered now</button>
      </section>`;
    this.bindComparisonActions();
  }

  private bindComparisonActions(): void {
    this.root
      .querySelector('[data-testid="answer-first"]')
      ?.addEventListener("click", () => void this.answerCurrent("first_precedes"));
    this.root
      .querySelector('[data-testid="answer-second"]')
      ?.addEventListener("click", () => void this.answerCurrent("second_precedes"));
    this.root
      .querySelector('[data-testid="answer-undecided"]')
      ?.addEventListener("click", () => void this.answerCurrent("undecided"));
    this.root
      .querySelector('[data-testid="submit-now"]')
      ?.addEventListener("click", () => void this.submitBuffered());
    this.root
      .querySelector('[data-testid="reload-button"]')
      ?.addEventListener("click", () => void this.reloadSession());
  }

  private renderSolving(): void {
    this.root.innerHTML = `
      <section class="panel" data-view="solving">
        <h2 data-testid="solving-note">Re-solving with your answers...</h2>
        <p>The ordering engine is recomputing the tied optima.</p>
      </section>`;
  }

  private renderResults(): void {
    const state = this.state!;
    const ranking = this.ranking!;
    const titles = new Map(state.requirements.map((r) => [r.id, r.title]));
    const rows = ranking.ranking
      .map(
        (id, index) => `
        <tr data-testid="ranking-row">
          <td>${index + 1}</td>
          <td class="rid">${escape(id)}</td>
          <td>${escape(titles.get(id) ?? "")}</td>
        </tr>`,
      )
      .join("");
    const metrics = state.metrics ?? { cost: ranking.cost };
    const metricChips = [
      `<span class="chip" data-testid="result-cost">cost ${escape(String(ranking.cost))}</span>`,
      metrics.disagreement_gs !== undefined
        ? `<span class="chip" data-testid="result-disagreement">disagreement vs gold ${metrics.disagreement_gs}</span>`
        : "",
      metrics.avg_distance_gs !== undefined
        ? `<span class="chip" data-testid="result-distance">avg distance vs gold ${metrics.avg_distance_gs}</span>`
        : "",
    ].join("");
    const warnings = state.warnings.length
      ? `<ul class="warnings">${state.warnings.map((w) => `<li>${escape(w)}</li>`).join("")}</ul>`
      : "";
    this.root.innerHTML = `
      <section class="panel" data-view="results">
        <h1>Final ranking</h1>
        <span class="badge badge-${state.status}" data-testid="status-badge">${state.status}</span>
        <p data-testid="status-explanation">${STATUS_LABELS[state.status] ?? ""}</p>
        <div class="statusbar">${metricChips}</div>
        <table class="ranking" data-testid="ranking-table">
          <thead><tr><th>#</th><th>id</th><th>title</th></tr></thead>
          <tbody>${rows}</tbody>
        </table>
        ${warnings}
        <div class="actions">
          <button data-testid="download-ranking">Download ranking</button>
          <button data-testid="download-snapshot">Download session snapshot</button>
          <button class="secondary" data-testid="new-session">Start another session</button>
        </div>
      </section>`;

    this.root
      .querySelector('[data-testid="download-ranking"]')
      ?.addEventListener("click", () => this.download("ranking.json", JSON.stringify(ranking, null, 2)));
    this.root
      .querySelector('[data-testid="download-snapshot"]')
      ?.addEventListener("click", () => this.download("session.json", JSON.stringify(state, null, 2)));
    this.root
      .querySelector('[data-testid="new-session"]')
      ?.addEventListener("click", () => this.renderCreate());
  }

  private download(filename: string, content: string): void {
    const blob = new Blob([content], { type: "application/json" });
    const url = URL.createObjectURL(blob);
    const anchor = document.createElement("a");
    anchor.href = url;
    anchor.download = filename;
    anchor.click();
    URL.revokeObjectURL(url);
  }
}
