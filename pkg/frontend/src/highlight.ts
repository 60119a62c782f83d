/**
 * Keyword highlighting for the detailed view: marks exactly the occurrences
 * of the keywords-attribute tokens at token boundaries, case-insensitive,
 * and nothing else. Tokens are maximal ASCII alphanumeric runs, matching
 * the engine's tokenizer.
 */

export interface Segment {
  text: string;
  hit: boolean;
}

const TOKEN_RE = /[A-Za-z0-9]+/g;

export function highlightSegments(text: string, keywords: readonly string[]): Segment[] {
  const targets = new Set(keywords.map((k) => k.toLowerCase()));
  if (targets.size === 0 || text === "") {
    return text === "" ? [] : [{ text, hit: false }];
  }
  const segments: Segment[] = [];
  let cursor = 0;
  for (const match of text.matchAll(TOKEN_RE)) {
    const start = match.index ?? 0;
    const token = match[0];
    if (!targets.has(token.toLowerCase())) {
      continue;
    }
    if (start > cursor) {
      segments.push({ text: text.slice(cursor, start), hit: false });
    }
    segments.push({ text: token, hit: true });
    cursor = start + token.length;
  }
  if (cursor < text.length) {
    segments.push({ text: text.slice(cursor), hit: false });
  }
  return segments;
}

/** The exact substrings that would be wrapped in highlight spans. */
export function highlightedOccurrences(text: string, keywords: readonly string[]): string[] {
  return highlightSegments(text, keywords)
    .filter((s) => s.hit)
    .map((s) => s.text);
}
