import { describe, expect, it } from "vitest";

import { validateClue } from "../src/validation.js";

const LEFT = "Freezing cold";
const RIGHT = "Boiling hot";

function rules(clue: string): string[] {
  return validateClue(clue, LEFT, RIGHT).map((issue) => issue.rule);
}

describe("advisory clue rules", () => {
  it("passes a clean clue", () => {
    expect(rules("steam")).toEqual([]);
    expect(rules("a nice warm bath")).toEqual([]);
  });

  it("flags clues over five words", () => {
    expect(rules("one two three four five")).toEqual([]);
    expect(rules("one two three four five six")).toEqual(["too-many-words"]);
  });

  it("flags reuse of a concept word, case-insensitively", () => {
    expect(rules("kind of FREEZING thing")).toEqual(["reuses-concept-word"]);
    expect(rules("hot springs")).toEqual(["reuses-concept-word"]);
  });

  it("flags digits anywhere in the clue", () => {
    expect(rules("route 66")).toEqual(["contains-number"]);
    expect(rules("a4 paper")).toEqual(["contains-number"]);
  });

  it("flags hedging modifiers", () => {
    expect(rules("very warm")).toEqual(["contains-modifier"]);
    expect(rules("warm almost")).toEqual(["contains-modifier"]);
    expect(rules("slightly warm")).toEqual(["contains-modifier"]);
    expect(rules("warm but wet")).toEqual(["contains-modifier"]);
  });

  it("does not flag modifiers embedded in other words", () => {
    expect(rules("butter")).toEqual([]);
    expect(rules("everything")).toEqual([]);
  });

  it("handles apostrophe words as single tokens", () => {
    expect(rules("winter's bite")).toEqual([]);
  });

  it("stacks multiple advisories in server order", () => {
    expect(rules("very freezing 42 thing with extra words")).toEqual([
      "too-many-words",
      "reuses-concept-word",
      "contains-number",
      "contains-modifier",
    ]);
  });

  it("ignores surrounding whitespace when counting words", () => {
    expect(rules("  two   words  ")).toEqual([]);
  });
});
