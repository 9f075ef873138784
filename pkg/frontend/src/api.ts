import type { SubmitPayload, SubmitResponse, Task } from "./types";

/** Server-side rejection (4xx/5xx) with the server's error detail. */
export class ApiError extends Error {
  constructor(
    public readonly status: number,
    detail: string,
  ) {
    super(detail);
    this.name = "ApiError";
  }
}

async function errorDetail(resp: Response): Promise<string> {
  try {
    const body = (await resp.json()) as { error?: string };
    if (body && typeof body.error === "string") return body.error;
  } catch {
    // fall through to the status line
  }
  return `HTTP ${resp.status}`;
}

export class ApiClient {
  constructor(private readonly baseUrl: string = "") {}

  async fetchTasks(judgeId: string): Promise<Task[]> {
    const url = `${this.baseUrl}/api/tasks?judge=${encodeURIComponent(judgeId)}`;
    const resp = await fetch(url);
    if (!resp.ok) throw new ApiError(resp.status, await errorDetail(resp));
    const tasks = (await resp.json()) as Task[];
    if (!Array.isArray(tasks)) throw new ApiError(500, "malformed task list");
    return tasks;
  }

  async submitRanking(payload: SubmitPayload): Promise<SubmitResponse> {
    const resp = await fetch(`${this.baseUrl}/api/rankings`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
    if (!resp.ok) throw new ApiError(resp.status, await errorDetail(resp));
    return (await resp.json()) as SubmitResponse;
  }
}
