import type {
  ClueSubmission,
  GuessSubmission,
  NextItemResponse,
  ProgressSnapshot,
  StudyConfigInfo,
  SubmitOutcome,
} from "./types.js";

/** A request that was rejected client-side before touching the network. */
export class PayloadError extends Error {}

/** A non-OK server response outside the outcomes the UI handles inline. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    detail: string,
  ) {
    super(detail);
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

async function detailOf(response: Response): Promise<string> {
  try {
    const body = (await response.json()) as { detail?: unknown };
    if (typeof body.detail === "string") return body.detail;
  } catch {
    // non-JSON error body; fall through to the status line
  }
  return `request failed with status ${response.status}`;
}

function requireId(value: string, name: string): string {
  if (!value || !value.trim()) throw new PayloadError(`${name} must be non-empty`);
  return value;
}

/** Thin client for the study endpoints.
 *
 * Submissions are guarded locally: an out-of-range guess or a blank clue
 * never leaves the browser, so the server only ever sees payloads that can
 * fail for timing or assignment reasons.
 */
export class StudyClient {
  private readonly fetchFn: FetchLike;

  constructor(
    private readonly baseUrl: string = "",
    fetchFn?: FetchLike,
  ) {
    this.fetchFn = fetchFn ?? ((url, init) => fetch(url, init));
  }

  async config(): Promise<StudyConfigInfo> {
    return this.getJson<StudyConfigInfo>("/study/config");
  }

  async nextItem(sessionId?: string): Promise<NextItemResponse | { kind: "exhausted"; detail: string }> {
    const query = sessionId ? `?session_id=${encodeURIComponent(sessionId)}` : "";
    const response = await this.fetchFn(`${this.baseUrl}/study/next${query}`);
    if (response.status === 409) return { kind: "exhausted", detail: await detailOf(response) };
    if (!response.ok) throw new ApiError(response.status, await detailOf(response));
    return (await response.json()) as NextItemResponse;
  }

  async progress(): Promise<ProgressSnapshot> {
    return this.getJson<ProgressSnapshot>("/study/progress");
  }

  async submitGuess(submission: GuessSubmission): Promise<SubmitOutcome> {
    const { guess } = submission;
    if (!Number.isFinite(guess) || guess < 0 || guess > 100) {
      throw new PayloadError("guess must lie within [0, 100]");
    }
    const body: Record<string, unknown> = {
      session_id: requireId(submission.sessionId, "session_id"),
      problem_id: requireId(submission.problemId, "problem_id"),
      guess,
      nonce: requireId(submission.nonce, "nonce"),
    };
    if (submission.clue !== undefined) body.clue = submission.clue;
    return this.postSubmission("/study/guess", body);
  }

  async submitClue(submission: ClueSubmission): Promise<SubmitOutcome> {
    const clue = submission.clue.trim();
    if (!clue) throw new PayloadError("clue must be non-empty");
    return this.postSubmission("/study/clue", {
      session_id: requireId(submission.sessionId, "session_id"),
      problem_id: requireId(submission.problemId, "problem_id"),
      clue,
      nonce: requireId(submission.nonce, "nonce"),
    });
  }

  private async getJson<T>(path: string): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`);
    if (!response.ok) throw new ApiError(response.status, await detailOf(response));
    return (await response.json()) as T;
  }

  private async postSubmission(path: string, body: Record<string, unknown>): Promise<SubmitOutcome> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    if (response.status === 429) {
      const rejection = (await response.json()) as { retry_after_s?: number; elapsed_s?: number };
      return {
        kind: "too-early",
        retryAfterS: rejection.retry_after_s ?? 1,
        elapsedS: rejection.elapsed_s ?? 0,
      };
    }
    if (response.status === 409) {
      return { kind: "exhausted", detail: await detailOf(response) };
    }
    if (!response.ok) throw new ApiError(response.status, await detailOf(response));
    const accepted = (await response.json()) as {
      items_remaining: number;
      advisories?: string[];
    };
    return {
      kind: "accepted",
      itemsRemaining: accepted.items_remaining,
      advisories: accepted.advisories ?? [],
    };
  }
}
