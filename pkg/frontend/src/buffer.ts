// Client-side answer buffer. Verdicts are kept per session in localStorage so
// a page reload never loses unsubmitted answers.

import type { Verdict } from "./types";

const STORAGE_PREFIX = "priorank.answers.";

export function pairKey(pair: [string, string]): string {
  return `${pair[0]}|${pair[1]}`;
}

export class AnswerBuffer {
  private readonly storageKey: string;
  private readonly storage: Storage;
  private answers: Record<string, Verdict>;

  constructor(sessionId: string, storage: Storage) {
    this.storage = storage;
    this.storageKey = STORAGE_PREFIX + sessionId;
    this.answers = this.load();
  }

  private load(): Record<string, Verdict> {
    try {
      const raw = this.storage.getItem(this.storageKey);
      return raw ? (JSON.parse(raw) as Record<string, Verdict>) : {};
    } catch {
      return {};
    }
  }

  private save(): void {
    this.storage.setItem(this.storageKey, JSON.stringify(this.answers));
  }

  set(pair: [string, string], verdict: Verdict): void {
    this.answers[pairKey(pair)] = verdict;
    this.save();
  }

  get(pair: [string, string]): Verdict | undefined {
    return this.answers[pairKey(pair)];
  }

  size(): number {
    return Object.keys(this.answers).length;
  }

  clear(): void {
    this.answers = {};
    this.storage.removeItem(this.storageKey);
  }
}
