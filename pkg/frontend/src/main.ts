import { ApiError, PayloadError, StudyClient } from "./api.js";
import { Countdown } from "./countdown.js";
import { initialState, reduce } from "./session.js";
import type { SessionEvent, SessionState } from "./session.js";
import { validateClue } from "./validation.js";
import {
  renderAdvisories,
  renderCountdown,
  renderFinished,
  renderGuessSlider,
  renderItemCard,
  renderNotice,
  renderProgress,
} from "./views.js";

const client = new StudyClient("");
let state: SessionState = initialState();
let countdown = new Countdown(0);
let guessValue = 50;
let clueDraft = "";

const root = document.getElementById("app");
if (!root) throw new Error("missing #app container");
const app: HTMLElement = root;

function dispatch(event: SessionEvent): void {
  state = reduce(state, event);
  render();
}

async function fetchNext(): Promise<void> {
  dispatch({ type: "fetch-started" });
  try {
    const response = await client.nextItem(state.sessionId ?? undefined);
    if ("kind" in response) {
      dispatch({ type: "exhausted", detail: response.detail });
      return;
    }
    guessValue = 50;
    clueDraft = "";
    countdown = new Countdown(response.min_think_s);
    countdown.start();
    dispatch({ type: "item-received", response });
  } catch (error) {
    dispatch({ type: "failed", message: describe(error) });
  }
}

async function submit(): Promise<void> {
  const item = state.item;
  if (!item || !state.sessionId || !countdown.ready()) return;
  dispatch({ type: "submit-started" });
  try {
    const outcome =
      item.task === "comprehension"
        ? await client.submitGuess({
            sessionId: state.sessionId,
            problemId: item.problem_id,
            guess: guessValue,
            clue: item.clue,
            nonce: item.nonce,
          })
        : await client.submitClue({
            sessionId: state.sessionId,
            problemId: item.problem_id,
            clue: clueDraft,
            nonce: item.nonce,
          });
    if (outcome.kind === "too-early") countdown.applyRetryAfter(outcome.retryAfterS);
    dispatch({ type: "submit-resolved", outcome });
    if (state.phase === "loading") void fetchNext();
  } catch (error) {
    if (error instanceof PayloadError) {
      // Client-side guard fired (blank clue, bad guess); stay on the item.
      dispatch({ type: "submit-resolved", outcome: { kind: "too-early", retryAfterS: 0, elapsedS: 0 } });
      state = { ...state, notice: error.message };
      render();
      return;
    }
    dispatch({ type: "failed", message: describe(error) });
  }
}

function describe(error: unknown): string {
  if (error instanceof ApiError) return `${error.message} (status ${error.status})`;
  return error instanceof Error ? error.message : String(error);
}

function render(): void {
  app.replaceChildren();
  if (state.phase === "finished") {
    app.append(renderFinished(state.notice));
    return;
  }
  if (state.phase === "error") {
    app.append(renderNotice(state.notice ?? "something went wrong"));
    return;
  }
  if (state.phase === "loading" || !state.item) {
    app.append(renderNotice("loading…"));
    return;
  }

  app.append(renderProgress(state));
  app.append(renderItemCard(state));

  if (state.item.task === "comprehension") {
    const slider = renderGuessSlider(guessValue);
    slider.addEventListener("input", () => {
      guessValue = Number(slider.value);
    });
    app.append(slider);
  } else {
    const input = document.createElement("input");
    input.type = "text";
    input.className = "clue-input";
    input.placeholder = "your clue (a word or short phrase)";
    input.value = clueDraft;
    input.addEventListener("input", () => {
      clueDraft = input.value;
      const preview = document.getElementById("advisory-preview");
      if (preview && state.item) {
        preview.replaceChildren(
          renderAdvisories(validateClue(clueDraft, state.item.left, state.item.right)),
        );
      }
    });
    app.append(input);
    const preview = document.createElement("div");
    preview.id = "advisory-preview";
    app.append(preview);
  }

  app.append(renderCountdown(countdown.remainingS()));
  if (state.notice) app.append(renderNotice(state.notice));

  const button = document.createElement("button");
  button.className = "submit-button";
  button.textContent = "submit";
  button.disabled = state.phase === "submitting" || !countdown.ready();
  button.addEventListener("click", () => void submit());
  app.append(button);
}

window.setInterval(() => {
  if (state.phase === "thinking" && countdown.ready()) {
    dispatch({ type: "countdown-finished" });
  } else if (state.phase === "thinking" || state.phase === "ready") {
    render(); // refresh the countdown label
  }
}, 250);

void fetchNext();
