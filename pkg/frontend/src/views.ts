import type { SessionState } from "./session.js";
import type { ClueIssue } from "./validation.js";

/** DOM builders. Pure functions from state to elements; main.ts owns all
 * event wiring and replaces the container's children on every state change. */

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderScale(left: string, right: string): HTMLElement {
  const scale = el("div", "scale");
  scale.append(el("span", "scale-end scale-left", left), el("span", "scale-end scale-right", right));
  return scale;
}

/** The slider participants answer comprehension items with. */
export function renderGuessSlider(initial: number): HTMLInputElement {
  const slider = el("input", "guess-slider");
  slider.type = "range";
  slider.min = "0";
  slider.max = "100";
  slider.step = "1";
  slider.value = String(initial);
  return slider;
}

export function renderTargetMarker(target: number): HTMLElement {
  const marker = el("div", "target-marker");
  marker.style.left = `${target}%`;
  marker.title = `target: ${target}`;
  const label = el("div", "target-label", String(target));
  marker.append(label);
  return marker;
}

export function renderCountdown(remainingS: number): HTMLElement {
  const wrap = el("div", "countdown");
  if (remainingS > 0) {
    wrap.append(el("span", "countdown-label", `think for ${Math.ceil(remainingS)}s more`));
    wrap.classList.add("countdown-waiting");
  } else {
    wrap.append(el("span", "countdown-label", "ready"));
    wrap.classList.add("countdown-ready");
  }
  return wrap;
}

const ADVISORY_TEXT: Record<string, string> = {
  "too-many-words": "keep clues to five words or fewer",
  "reuses-concept-word": "the clue repeats a word from the scale",
  "contains-number": "clues may not contain numbers",
  "contains-modifier": "avoid hedges like “very” or “almost”",
};

export function renderAdvisories(issues: ClueIssue[]): HTMLElement {
  const list = el("ul", "advisories");
  for (const issue of issues) {
    const entry = el("li", "advisory", ADVISORY_TEXT[issue.rule] ?? issue.detail);
    entry.dataset.rule = issue.rule;
    list.append(entry);
  }
  return list;
}

export function renderItemCard(state: SessionState): HTMLElement {
  const card = el("section", "item-card");
  const item = state.item;
  if (!item) return card;
  card.append(renderScale(item.left, item.right));
  if (item.task === "comprehension") {
    card.append(el("p", "clue-display", `clue: “${item.clue ?? ""}”`));
  } else if (item.target !== undefined) {
    card.append(renderTargetMarker(item.target));
  }
  return card;
}

export function renderProgress(state: SessionState): HTMLElement {
  const total = state.itemsDone + state.itemsRemaining;
  return el("div", "progress", `item ${Math.min(state.itemsDone + 1, total)} of ${total}`);
}

export function renderNotice(text: string | null): HTMLElement {
  return el("div", "notice", text ?? "");
}

export function renderFinished(notice: string | null): HTMLElement {
  const done = el("section", "finished");
  done.append(el("h2", undefined, "all done"));
  done.append(el("p", undefined, notice ?? "thanks for taking part"));
  return done;
}
