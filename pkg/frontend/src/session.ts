import { ApiClient, ApiError } from "./api";
import { hashSeed, isPermutationOf, move, seededShuffle } from "./ordering";
import type { Task } from "./types";

export type Phase = "idle" | "loading" | "load-error" | "ready" | "submitting" | "done";

/**
 * Headless judge session: task queue, current ordering, and submission flow.
 * The DOM layer renders this state and forwards user events; tests drive it
 * directly.
 */
export class JudgeSession {
  phase: Phase = "idle";
  tasks: Task[] = [];
  /** Index into `tasks` of the task on screen, or -1 when none remain. */
  currentIndex = -1;
  ordering: string[] = [];
  /** Submission stays disabled until the judge reorders at least once. */
  touched = false;
  lastError = "";

  constructor(
    private readonly api: ApiClient,
    readonly judgeId: string,
    private readonly shuffle: boolean = false,
  ) {}

  get current(): Task | null {
    return this.currentIndex >= 0 ? (this.tasks[this.currentIndex] ?? null) : null;
  }

  get total(): number {
    return this.tasks.length;
  }

  get submittedCount(): number {
    return this.tasks.filter((t) => t.submitted).length;
  }

  /** Fetch the task list; previously submitted gaps stay marked complete. */
  async load(): Promise<void> {
    this.phase = "loading";
    this.lastError = "";
    try {
      this.tasks = await this.api.fetchTasks(this.judgeId);
    } catch (err) {
      this.phase = "load-error";
      this.lastError = err instanceof Error ? err.message : String(err);
      return;
    }
    this.advance();
  }

  /** Show the first unsubmitted task, or finish. */
  private advance(): void {
    this.currentIndex = this.tasks.findIndex((t) => !t.submitted);
    this.touched = false;
    this.lastError = "";
    if (this.currentIndex < 0) {
      this.phase = "done";
      this.ordering = [];
      return;
    }
    const served = (this.tasks[this.currentIndex] as Task).candidates;
    this.ordering = this.shuffle
      ? seededShuffle(served, hashSeed(`${this.judgeId}:${this.current?.gap_id}`))
      : [...served];
    this.phase = "ready";
  }

  /** Move one candidate; out-of-bounds moves are no-ops and do not count as interaction. */
  reorder(from: number, to: number): void {
    const task = this.current;
    if (!task || this.phase !== "ready") return;
    const next = move(this.ordering, from, to);
    const changedPosition =
      from !== to && from >= 0 && from < this.ordering.length && to >= 0 && to < this.ordering.length;
    this.ordering = next;
    if (changedPosition) this.touched = true;
    if (!isPermutationOf(this.ordering, task.candidates)) {
      throw new Error(`ordering lost candidates for gap ${task.gap_id}`);
    }
  }

  get canSubmit(): boolean {
    return this.phase === "ready" && this.touched;
  }

  /**
   * POST the current ordering. On success the task is marked complete and the
   * next one comes up; on rejection or network failure the ordering is kept
   * and the message exposed.
   */
  async submit(): Promise<boolean> {
    const task = this.current;
    if (!task || !this.canSubmit) return false;
    if (!isPermutationOf(this.ordering, task.candidates)) {
      throw new Error(`ordering lost candidates for gap ${task.gap_id}`);
    }
    this.phase = "submitting";
    this.lastError = "";
    try {
      await this.api.submitRanking({
        judge_id: this.judgeId,
        gap_id: task.gap_id,
        ordered_candidates: [...this.ordering],
      });
    } catch (err) {
      this.phase = "ready";
      this.lastError =
        err instanceof ApiError ? err.message : err instanceof Error ? err.message : String(err);
      return false;
    }
    task.submitted = true;
    this.advance();
    return true;
  }
}
