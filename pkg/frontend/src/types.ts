/** Wire types of the ranking server's JSON API. */

export interface Task {
  gap_id: number;
  context: string;
  candidates: string[];
  submitted: boolean;
}

export interface SubmitPayload {
  judge_id: string;
  gap_id: number;
  /** Position 1 (index 0) = most appropriate. */
  ordered_candidates: string[];
}

export interface SubmitResponse {
  status: string;
  gap_id: number;
  submitted: number;
  complete: boolean;
}
