// End-to-end UI tests against the real prioritization service (started by
// global-setup). All traffic flows through a recording fetch proxy so the
// tests can assert that every number on screen came from a service response,
// never from client-side recomputation.

import { readFileSync } from "node:fs";
import { join, dirname } from "node:path";
import { fileURLToPath } from "node:url";
import { beforeEach, describe, expect, it } from "vitest";

import { ApiClient, type FetchLike } from "../src/api";
import { App } from "../src/app";
import { SERVICE_URL } from "./global-setup";

const HERE = dirname(fileURLToPath(import.meta.url));
const PROJECT_TEXT = readFileSync(
  join(HERE, "..", "..", "src", "priorank", "data", "worked_example.project"),
  "utf-8",
);

interface RecordedCall {
  method: string;
  url: string;
  body: unknown;
}

class RecordingFetch {
  calls: RecordedCall[] = [];

  fetchFn: FetchLike = async (input, init) => {
    const response = await fetch(input, init);
    const clone = response.clone();
    let body: unknown = null;
    try {
      body = await clone.json();
    } catch {
      body = null;
    }
    this.calls.push({ method: init?.method ?? "GET", url: input, body });
    return response;
  };

  /** Every JSON value the service returned, flattened for containment checks. */
  servedValues(): Set<string> {
    const seen = new Set<string>();
    const visit = (value: unknown): void => {
      if (value === null || value === undefined) {
        return;
      }
      if (Array.isArray(value)) {
        value.forEach(visit);
      } else if (typeof value === "object") {
        Object.values(value as Record<string, unknown>).forEach(visit);
      } else {
        seen.add(String(value));
      }
    };
    this.calls.forEach((call) => visit(call.body));
    return seen;
  }

  lastBody(match: (call: RecordedCall) => boolean): unknown {
    const hits = this.calls.filter(match);
    return hits.length ? hits[hits.length - 1].body : undefined;
  }
}

function mount(): HTMLElement {
  document.body.innerHTML = '<div id="app"></div>';
  return document.getElementById("app")!;
}

async function waitFor(check: () => boolean, timeoutMs = 15_000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    if (check()) {
      return;
    }
    await new Promise((resolve) => setTimeout(resolve, 20));
  }
  throw new Error("condition never became true; body:\n" + document.body.innerHTML);
}

function text(selector: string): string {
  return document.querySelector(selector)?.textContent?.trim() ?? "";
}

function view(): string {
  return document.querySelector("section[data-view]")?.getAttribute("data-view") ?? "";
}

function makeApp(recorder: RecordingFetch): App {
  const api = new ApiClient(SERVICE_URL, recorder.fetchFn);
  return new App(mount(), api, { pollIntervalMs: 25, storage: window.localStorage });
}

async function uploadProject(app: App, budget: number, projectText = PROJECT_TEXT): Promise<void> {
  const file = new File([projectText], "sample.project", { type: "application/json" });
  const input = document.querySelector<HTMLInputElement>('[data-testid="project-file"]')!;
  Object.defineProperty(input, "files", { value: [file], configurable: true });
  const budgetInput = document.querySelector<HTMLInputElement>('[data-testid="budget-input"]')!;
  budgetInput.value = String(budget);
  document
    .querySelector<HTMLFormElement>('[data-testid="create-form"]')!
    .dispatchEvent(new Event("submit", { bubbles: true, cancelable: true }));
  void app;
}

function click(testid: string): void {
  document
    .querySelector<HTMLButtonElement>(`[data-testid="${testid}"]`)!
    .dispatchEvent(new Event("click", { bubbles: true }));
}

beforeEach(() => {
  window.localStorage.clear();
});

describe("analyst console", () => {
  it("runs the full elicitation flow and displays only service-provided numbers", async () => {
    const recorder = new RecordingFetch();
    const app = makeApp(recorder);
    await uploadProject(app, 2);

    await waitFor(() => view() === "comparison");
    expect(text('[data-testid="cost-chip"]')).toBe("cost 2");
    expect(text('[data-testid="tied-chip"]')).toBe("3 candidate orderings");

    // the analyst prefers the second card in both rounds
    expect(text('[data-testid="card-first"]')).toContain("R1");
    expect(text('[data-testid="card-second"]')).toContain("R3");
    click("answer-second");
    await waitFor(() => text('[data-testid="card-first"]').includes("R3"));
    expect(text('[data-testid="card-second"]')).toContain("R4");
    click("answer-second");

    await waitFor(() => view() === "results");
    expect(text('[data-testid="status-badge"]')).toBe("budget_exhausted");

    const rankingBody = recorder.lastBody(
      (call) => call.method === "GET" && call.url.endsWith("/ranking"),
    ) as { ranking: string[]; cost: number };
    expect(rankingBody.ranking).toEqual(["R2", "R1", "R4", "R3", "R5"]);

    const shownIds = Array.from(document.querySelectorAll('[data-testid="ranking-row"] td.rid')).map(
      (cell) => cell.textContent,
    );
    expect(shownIds).toEqual(rankingBody.ranking);
    expect(text('[data-testid="result-cost"]')).toBe(`cost ${rankingBody.cost}`);

    // traffic interception: every figure on screen exists in a served payload
    const served = recorder.servedValues();
    for (const id of shownIds) {
      expect(served.has(id!)).toBe(true);
    }
    expect(served.has(String(rankingBody.cost))).toBe(true);
    // ...and the client only ever talked to the documented endpoints
    for (const call of recorder.calls) {
      expect(call.url).toMatch(/\/(healthz|sessions(\/[0-9a-f]+(\/responses|\/ranking)?)?)$/);
    }
  });

  it("goes straight to results for a zero budget", async () => {
    const recorder = new RecordingFetch();
    const app = makeApp(recorder);
    await uploadProject(app, 0);

    await waitFor(() => view() === "results");
    expect(text('[data-testid="status-badge"]')).toBe("budget_exhausted");
    const rankingBody = recorder.lastBody(
      (call) => call.method === "GET" && call.url.endsWith("/ranking"),
    ) as { ranking: string[] };
    const shownIds = Array.from(document.querySelectorAll('[data-testid="ranking-row"] td.rid')).map(
      (cell) => cell.textContent,
    );
    expect(shownIds).toEqual(rankingBody.ranking);
    expect(text('[data-testid="result-disagreement"]')).toContain("disagreement vs gold 0");
  });

  it("surfaces validation issues inline for a bad project file", async () => {
    const recorder = new RecordingFetch();
    const app = makeApp(recorder);
    const broken = JSON.stringify({ schema_version: 1, requirements: [], dependencies: [] });
    await uploadProject(app, 10, broken);

    await waitFor(() => document.querySelector('[data-testid="create-errors"]') !== null);
    expect(text('[data-testid="create-errors"]')).toContain("requirements");
  });

  it("keeps buffered answers across a reload until submitted", async () => {
    const recorder = new RecordingFetch();
    const app = makeApp(recorder);
    await uploadProject(app, 100);
    await waitFor(() => view() === "comparison");
    const sessionId = (
      recorder.lastBody((call) => call.method === "POST" && call.url.endsWith("/sessions")) as {
        session_id: string;
      }
    ).session_id;

    click("answer-first");
    await waitFor(() => text('[data-testid="progress-text"]').includes("1 buffered"));

    // simulate a reload: a fresh app over the same storage resumes the session
    const reloaded = new App(mount(), new ApiClient(SERVICE_URL, recorder.fetchFn), {
      pollIntervalMs: 25,
      storage: window.localStorage,
    });
    await reloaded.resumeSession(sessionId);
    await waitFor(() => view() === "comparison");
    expect(text('[data-testid="progress-text"]')).toContain("1 buffered");
    // the buffered first pair is skipped; the open question is the second pair
    expect(text('[data-testid="card-first"]')).toContain("R3");
    expect(text('[data-testid="card-second"]')).toContain("R4");
  });

  it("undecided on everything drains budget without changing the tied set", async () => {
    const recorder = new RecordingFetch();
    const app = makeApp(recorder);
    await uploadProject(app, 100);
    await waitFor(() => view() === "comparison");

    click("answer-undecided");
    await waitFor(() => text('[data-testid="progress-text"]').includes("1 buffered"));
    click("answer-undecided");

    await waitFor(() => view() === "results");
    expect(text('[data-testid="status-badge"]')).toBe("plateau");
    expect(text('[data-testid="status-explanation"]')).toContain("every informative pair");
    // the settled state arrives via a poll, or already inside the submit reply
    // when the re-solve wins the race
    const polled = recorder.lastBody(
      (call) => call.method === "GET" && /\/sessions\/[0-9a-f]+$/.test(call.url),
    ) as { cost: number; solution_count: number; budget: { used: number } } | undefined;
    const submitted = recorder.lastBody(
      (call) => call.method === "POST" && call.url.endsWith("/responses"),
    ) as { state: { cost: number; solution_count: number; budget: { used: number } } };
    const state = polled ?? submitted.state;
    expect(state.cost).toBe(2);
    expect(state.solution_count).toBe(3);
    expect(state.budget.used).toBe(2);
  });

  it("shows a reload prompt on a stale batch and recovers", async () => {
    const recorder = new RecordingFetch();
    const app = makeApp(recorder);
    await uploadProject(app, 100);
    await waitFor(() => view() === "comparison");
    const sessionId = (
      recorder.lastBody((call) => call.method === "POST" && call.url.endsWith("/sessions")) as {
        session_id: string;
      }
    ).session_id;

    // another client answers the whole batch first
    const rival = new ApiClient(SERVICE_URL, recorder.fetchFn);
    await rival.submitResponses(sessionId, [
      { pair: ["R1", "R3"], verdict: "first_precedes" },
      { pair: ["R3", "R4"], verdict: "first_precedes" },
    ]);
    // wait for the rival's re-solve to land so our submit hits "stale pair"
    const deadline = Date.now() + 15_000;
    while (Date.now() < deadline && (await rival.getState(sessionId)).solving) {
      await new Promise((resolve) => setTimeout(resolve, 20));
    }

    click("answer-first");
    await waitFor(() => text('[data-testid="progress-text"]').includes("1 buffered"));
    click("answer-first");

    await waitFor(() => document.querySelector('[data-testid="conflict-banner"]') !== null);
    click("reload-button");
    await waitFor(() => document.querySelector('[data-testid="conflict-banner"]') === null);
    expect(["comparison", "results"]).toContain(view());
  });
});
