/** Client-side mirror of the server's advisory clue checks.
 *
 * Rule names match the server's exactly so advisory lists from either side
 * render the same way. These are previews: the server re-checks on submit
 * and its verdict is the one recorded.
 */

export const MAX_CLUE_WORDS = 5;

const MODIFIER_WORDS = new Set(["but", "very", "almost", "slightly"]);

const WORD = /\p{L}+(?:'\p{L}+)?/gu;

export interface ClueIssue {
  rule: string;
  detail: string;
}

function wordTokens(text: string): Set<string> {
  const tokens = new Set<string>();
  for (const match of text.matchAll(WORD)) {
    tokens.add(match[0].toLowerCase());
  }
  return tokens;
}

export function validateClue(clue: string, left: string, right: string): ClueIssue[] {
  const issues: ClueIssue[] = [];
  const words = clue.split(/\s+/).filter((w) => w.length > 0);
  if (words.length > MAX_CLUE_WORDS) {
    issues.push({
      rule: "too-many-words",
      detail: `${words.length} words, at most ${MAX_CLUE_WORDS} allowed`,
    });
  }
  const clueTokens = wordTokens(clue);
  const conceptTokens = wordTokens(`${left} ${right}`);
  const reused = [...clueTokens].filter((t) => conceptTokens.has(t)).sort();
  if (reused.length > 0) {
    issues.push({ rule: "reuses-concept-word", detail: `clue repeats ${reused.join(", ")}` });
  }
  if (/\d/.test(clue)) {
    issues.push({ rule: "contains-number", detail: "clues may not use numeric values" });
  }
  const hedges = [...clueTokens].filter((t) => MODIFIER_WORDS.has(t)).sort();
  if (hedges.length > 0) {
    issues.push({ rule: "contains-modifier", detail: `clue uses ${hedges.join(", ")}` });
  }
  return issues;
}
