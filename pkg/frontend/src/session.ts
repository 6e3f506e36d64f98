import type { DeliveredItem, NextItemResponse, SubmitOutcome } from "./types.js";

/** What the participant is looking at right now.
 *
 * loading   -> an item fetch is in flight
 * thinking  -> item shown, countdown still running
 * ready     -> countdown done, submission allowed
 * submitting-> a submission is in flight
 * finished  -> session exhausted or item budget spent
 * error     -> something unrecoverable; message in `notice`
 */
export type Phase = "loading" | "thinking" | "ready" | "submitting" | "finished" | "error";

export interface SessionState {
  phase: Phase;
  sessionId: string | null;
  item: DeliveredItem | null;
  minThinkS: number;
  itemsRemaining: number;
  itemsDone: number;
  /** Advisory rule names from the last accepted clue, for a brief flash. */
  lastAdvisories: string[];
  notice: string | null;
}

export type SessionEvent =
  | { type: "fetch-started" }
  | { type: "item-received"; response: NextItemResponse }
  | { type: "countdown-finished" }
  | { type: "submit-started" }
  | { type: "submit-resolved"; outcome: SubmitOutcome }
  | { type: "exhausted"; detail: string }
  | { type: "failed"; message: string };

export function initialState(): SessionState {
  return {
    phase: "loading",
    sessionId: null,
    item: null,
    minThinkS: 0,
    itemsRemaining: 0,
    itemsDone: 0,
    lastAdvisories: [],
    notice: null,
  };
}

export function reduce(state: SessionState, event: SessionEvent): SessionState {
  switch (event.type) {
    case "fetch-started":
      return { ...state, phase: "loading", item: null, notice: null };

    case "item-received":
      return {
        ...state,
        phase: "thinking",
        sessionId: event.response.session_id,
        item: event.response.item,
        minThinkS: event.response.min_think_s,
        itemsRemaining: event.response.items_remaining,
        notice: null,
      };

    case "countdown-finished":
      return state.phase === "thinking" ? { ...state, phase: "ready" } : state;

    case "submit-started":
      return { ...state, phase: "submitting", notice: null };

    case "submit-resolved":
      return applyOutcome(state, event.outcome);

    case "exhausted":
      return { ...state, phase: "finished", item: null, notice: event.detail };

    case "failed":
      return { ...state, phase: "error", notice: event.message };
  }
}

function applyOutcome(state: SessionState, outcome: SubmitOutcome): SessionState {
  switch (outcome.kind) {
    case "accepted": {
      const done = state.itemsDone + 1;
      if (outcome.itemsRemaining <= 0) {
        return {
          ...state,
          phase: "finished",
          item: null,
          itemsRemaining: 0,
          itemsDone: done,
          lastAdvisories: outcome.advisories,
          notice: null,
        };
      }
      return {
        ...state,
        phase: "loading",
        item: null,
        itemsRemaining: outcome.itemsRemaining,
        itemsDone: done,
        lastAdvisories: outcome.advisories,
        notice: null,
      };
    }
    case "too-early":
      // The server measured less think time than we did; keep the item up
      // and go back to waiting out the difference.
      return {
        ...state,
        phase: "thinking",
        notice: `a little longer: ${outcome.retryAfterS.toFixed(0)}s`,
      };
    case "exhausted":
      return { ...state, phase: "finished", item: null, notice: outcome.detail };
  }
}
