/** Session runner state machine.
 *
 * Mirrors server state after every round trip: the only writes are
 * answer / resolve submissions, and whatever comes back (next question,
 * counts, conflict details) replaces the local view wholesale.  One
 * request is in flight at a time; while busy, answering is disabled.
 * A stale-sequence rejection means another tab advanced the session, so
 * the runner re-syncs and shows a banner instead of retrying.
 */

import { ApiClient, ApiError } from "./api.js";
import type { ConflictingAnswer, NextPayload } from "./types.js";

export interface ConflictView {
  point: number[];
  value: number;
  conflicting: ConflictingAnswer[];
}

export interface SessionView {
  sessionId: string;
  status: string;
  done: boolean;
  counts: { asked: number; inferred: number; remaining: number };
  seq?: number;
  point?: number[];
  prompt?: string;
  scenario?: NextPayload["scenario"];
  outScale: string[];
  busy: boolean;
  conflict: ConflictView | null;
  banner: string | null;
  lastInferredJump: number;
}

export class SessionRunner {
  private view: SessionView;

  constructor(
    private readonly api: ApiClient,
    sessionId: string,
    private readonly onChange: (view: SessionView) => void = () => {},
  ) {
    this.view = {
      sessionId,
      status: "unknown",
      done: false,
      counts: { asked: 0, inferred: 0, remaining: 0 },
      outScale: [],
      busy: false,
      conflict: null,
      banner: null,
      lastInferredJump: 0,
    };
  }

  get current(): SessionView {
    return this.view;
  }

  private update(patch: Partial<SessionView>): void {
    this.view = { ...this.view, ...patch };
    this.onChange(this.view);
  }

  private absorb(payload: NextPayload): void {
    this.update({
      status: payload.status,
      done: payload.done,
      counts: payload.counts,
      seq: payload.seq,
      point: payload.point,
      prompt: payload.prompt,
      scenario: payload.scenario,
      outScale: payload.out_scale ?? this.view.outScale,
      conflict: null,
      lastInferredJump: payload.inferred_jump ?? 0,
    });
  }

  /** Initial load, and the resume path after a page reload. */
  async load(): Promise<SessionView> {
    this.update({ busy: true, banner: null });
    try {
      this.absorb(await this.api.next(this.view.sessionId));
    } catch (error) {
      if (error instanceof ApiError && error.reason === "contradiction") {
        this.absorbConflict(error);
      } else if (error instanceof ApiError && error.category === "conflict") {
        // parked on a conflict from an earlier submission
        this.absorbConflict(error);
      } else {
        throw error;
      }
    } finally {
      this.update({ busy: false });
    }
    return this.view;
  }

  private absorbConflict(error: ApiError): void {
    const details = error.envelope.details;
    this.update({
      status: "conflicted",
      conflict: {
        point: (details.point as number[]) ?? [],
        value: (details.value as number) ?? 0,
        conflicting: details.conflicting ?? [],
      },
    });
  }

  /** Submit the answer for the pending question. No-op while busy. */
  async answer(value: number | string): Promise<SessionView> {
    if (this.view.busy || this.view.done || this.view.conflict) {
      return this.view;
    }
    this.update({ busy: true, banner: null });
    try {
      this.absorb(await this.api.answer(this.view.sessionId, value, this.view.seq));
    } catch (error) {
      if (!(error instanceof ApiError)) {
        throw error;
      }
      if (error.reason === "stale") {
        this.update({ banner: "session advanced elsewhere" });
        this.absorb(await this.api.next(this.view.sessionId));
        this.update({ banner: "session advanced elsewhere" });
      } else if (error.reason === "contradiction") {
        this.absorbConflict(error);
      } else if (error.reason === "complete") {
        this.absorb(await this.api.next(this.view.sessionId));
      } else {
        throw error;
      }
    } finally {
      this.update({ busy: false });
    }
    return this.view;
  }

  /** Leave the conflict dialog: reject the new answer or revise history. */
  async resolve(strategy: "reject" | "revise"): Promise<SessionView> {
    if (!this.view.conflict || this.view.busy) {
      return this.view;
    }
    this.update({ busy: true });
    try {
      this.absorb(await this.api.resolve(this.view.sessionId, strategy));
    } finally {
      this.update({ busy: false });
    }
    return this.view;
  }
}
