import { describe, expect, it } from "vitest";

import { highlightSegments, highlightedOccurrences } from "../src/highlight.js";

describe("highlightSegments", () => {
  it("marks keyword occurrences at token boundaries, case-insensitive", () => {
    const text = "War began. The war-torn city saw WAR again.";
    const hits = highlightedOccurrences(text, ["war"]);
    expect(hits).toEqual(["War", "war", "WAR"]);
  });

  it("never marks partial-token matches", () => {
    const text = "wars and warfare are not the word war alone";
    const hits = highlightedOccurrences(text, ["war"]);
    expect(hits).toEqual(["war"]);
  });

  it("concatenation of segments reproduces the text exactly", () => {
    const text = 'He said: "kill the lights, KILL them!" and left.';
    const joined = highlightSegments(text, ["kill", "them"])
      .map((s) => s.text)
      .join("");
    expect(joined).toBe(text);
  });

  it("handles multiple keywords", () => {
    const hits = highlightedOccurrences("flood storm flood", ["flood", "storm"]);
    expect(hits).toEqual(["flood", "storm", "flood"]);
  });

  it("handles digits in tokens", () => {
    expect(highlightedOccurrences("in 2003 the 2003rd", ["2003"])).toEqual(["2003"]);
  });

  it("returns the whole text unhighlighted without keywords", () => {
    const segments = highlightSegments("nothing to see", []);
    expect(segments).toEqual([{ text: "nothing to see", hit: false }]);
  });

  it("returns no segments for empty text", () => {
    expect(highlightSegments("", ["war"])).toEqual([]);
  });

  it("marks nothing else than keyword tokens", () => {
    const segments = highlightSegments("alpha beta gamma", ["beta"]);
    expect(segments).toEqual([
      { text: "alpha ", hit: false },
      { text: "beta", hit: true },
      { text: " gamma", hit: false },
    ]);
  });
});
