import { ApiClient, ApiError } from "./api";

export type Phase = "idle" | "uploading" | "generating" | "done" | "error";

export interface SubmissionResult {
  id: string;
  paintingDataUrl: string;
  latencyMs: number;
}

export interface SubmissionState {
  phase: Phase;
  result: SubmissionResult | null;
  error: { message: string; retryable: boolean } | null;
}

type Listener = (state: SubmissionState) => void;

/**
 * One in-flight generation at a time: submit is accepted only from the
 * idle or done phase, so double-clicks and concurrent submits are dropped.
 */
export class SubmissionMachine {
  private state: SubmissionState = { phase: "idle", result: null, error: null };
  private listeners: Listener[] = [];

  constructor(private readonly api: ApiClient) {}

  get current(): SubmissionState {
    return this.state;
  }

  get phase(): Phase {
    return this.state.phase;
  }

  canSubmit(): boolean {
    return this.state.phase === "idle" || this.state.phase === "done";
  }

  /** After an error the user may retry; that re-arms the machine. */
  reset(): void {
    if (this.state.phase === "uploading" || this.state.phase === "generating") return;
    this.setState({ phase: "idle", result: null, error: null });
  }

  onChange(listener: Listener): void {
    this.listeners.push(listener);
  }

  private setState(state: SubmissionState): void {
    this.state = state;
    for (const listener of this.listeners) listener(state);
  }

  /** Returns true when the submission was accepted (phase guard passed). */
  async submit(exportPng: () => Promise<Blob>): Promise<boolean> {
    if (!this.canSubmit()) return false;
    this.setState({ phase: "uploading", result: null, error: null });
    try {
      const png = await exportPng();
      this.setState({ phase: "generating", result: null, error: null });
      const resp = await this.api.generate(png);
      this.setState({
        phase: "done",
        result: {
          id: resp.id,
          paintingDataUrl: `data:image/png;base64,${resp.painting_base64}`,
          latencyMs: resp.latency_ms,
        },
        error: null,
      });
    } catch (err) {
      const retryable = err instanceof ApiError ? err.retryable : true;
      const message = err instanceof Error ? err.message : String(err);
      this.setState({ phase: "error", result: null, error: { message, retryable } });
    }
    return true;
  }
}
