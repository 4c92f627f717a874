// Payload shapes of the prioritization service; field names mirror the HTTP API.

export type Verdict = "first_precedes" | "second_precedes" | "undecided";

export type SessionStatus = "active" | "converged" | "budget_exhausted" | "plateau";

export interface PendingPair {
  pair: [string, string];
  frequency: number;
}

export interface RequirementCard {
  id: string;
  title: string;
  priority: number;
}

export interface BudgetInfo {
  max: number;
  used: number;
  remaining: number;
}

export interface HistoryEntry {
  pair: [string, string];
  verdict: Verdict;
  iteration: number;
}

export interface SessionMetrics {
  cost: number | string;
  disagreement_gs?: number;
  avg_distance_gs?: number;
}

export interface SessionState {
  session_id: string;
  status: SessionStatus;
  solving: boolean;
  iteration: number;
  cost: number | string | null;
  solution_count: number;
  exhausted: boolean | null;
  budget: BudgetInfo;
  pending: PendingPair[];
  requirements: RequirementCard[];
  history: HistoryEntry[];
  warnings: string[];
  metrics: SessionMetrics | null;
  ranking: string[] | null;
}

export interface CreateSessionResponse {
  session_id: string;
  state: SessionState;
}

export interface RankingResponse {
  session_id: string;
  status: SessionStatus;
  cost: number | string;
  ranking: string[];
}

export interface ApiIssue {
  path: string;
  message: string;
}

export interface ResponseItem {
  pair: [string, string];
  verdict: Verdict;
}
