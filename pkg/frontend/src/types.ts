/** Wire types for the /study HTTP API. Field names mirror the server JSON. */

export type Task = "comprehension" | "production";

export interface StudyConfigInfo {
  task: Task;
  min_think_s: number;
  items_per_session: number;
  n_problems: number;
}

/** One delivered item. `clue` is present for comprehension studies,
 * `target` for production studies. */
export interface DeliveredItem {
  problem_id: string;
  task: Task;
  left: string;
  right: string;
  nonce: string;
  clue?: string;
  target?: number;
}

export interface NextItemResponse {
  session_id: string;
  item: DeliveredItem;
  min_think_s: number;
  items_remaining: number;
}

export interface ProgressSnapshot {
  counts: Record<string, number>;
  sessions: number;
  [key: string]: unknown;
}

/** Submission outcomes the UI has to handle distinctly. Anything else
 * (validation errors, server faults) surfaces as a thrown ApiError. */
export type SubmitOutcome =
  | { kind: "accepted"; itemsRemaining: number; advisories: string[] }
  | { kind: "too-early"; retryAfterS: number; elapsedS: number }
  | { kind: "exhausted"; detail: string };

export interface GuessSubmission {
  sessionId: string;
  problemId: string;
  guess: number;
  /** Echo of the delivered clue; the server cross-checks it. */
  clue?: string;
  nonce: string;
}

export interface ClueSubmission {
  sessionId: string;
  problemId: string;
  clue: string;
  nonce: string;
}
