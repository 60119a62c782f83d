/**
 * Thin client of the gateway's XML endpoints. At most one search is in
 * flight: a newer request aborts the older one.
 */

import { parseResultsXml, type DomParserLike, type ResultsDoc } from "./xml.js";

export type SearchMode = "exact" | "boolean" | "wildcard" | "proximity";

export class ApiError extends Error {}

type FetchLike = (url: string, init?: { signal?: AbortSignal }) => Promise<{
  ok: boolean;
  status: number;
  text(): Promise<string>;
}>;

export class SearchClient {
  private inflight: AbortController | null = null;

  constructor(
    private readonly baseUrl: string,
    private readonly parser: DomParserLike,
    private readonly fetchImpl: FetchLike = fetch,
  ) {}

  searchUrl(q: string, mode: SearchMode, expand: boolean): string {
    const params = new URLSearchParams({
      q,
      mode,
      expand: expand ? "1" : "0",
    });
    return `${this.baseUrl.replace(/\/$/, "")}/search?${params.toString()}`;
  }

  async search(q: string, mode: SearchMode, expand: boolean): Promise<ResultsDoc> {
    this.inflight?.abort();
    const controller = new AbortController();
    this.inflight = controller;
    let response;
    try {
      response = await this.fetchImpl(this.searchUrl(q, mode, expand), {
        signal: controller.signal,
      });
    } catch (err) {
      throw new ApiError(`request failed: ${String(err)}`);
    }
    if (!response.ok) {
      throw new ApiError(`HTTP ${response.status}: ${await response.text()}`);
    }
    return parseResultsXml(await response.text(), this.parser);
  }
}
