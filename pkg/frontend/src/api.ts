export interface GenerateResponse {
  id: string;
  painting_base64: string;
  latency_ms: number;
}

export interface GalleryRecord {
  id: string;
  created_at: string;
  latency_ms: number;
  checkpoint_id: string;
  sketch_url: string;
  painting_url: string;
}

export interface GalleryPage {
  page: number;
  page_size: number;
  total: number;
  records: GalleryRecord[];
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }

  get retryable(): boolean {
    return this.status === 503;
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function raiseForStatus(resp: Response): Promise<Response> {
  if (resp.ok) return resp;
  let code = "error";
  let message = `request failed with ${resp.status}`;
  try {
    const body = await resp.json();
    if (body?.error) {
      code = body.error.code ?? code;
      message = body.error.message ?? message;
    }
  } catch {
    // non-JSON error body; keep the generic message
  }
  throw new ApiError(resp.status, code, message);
}

/** Thin typed client over the documented endpoints, nothing else. */
export class ApiClient {
  constructor(
    private readonly fetchFn: FetchLike = (...args) => fetch(...args),
    private readonly base = "",
  ) {}

  async generate(sketchPng: Blob): Promise<GenerateResponse> {
    const form = new FormData();
    form.append("sketch", sketchPng, "sketch.png");
    const resp = await this.fetchFn(`${this.base}/api/generate`, {
      method: "POST",
      body: form,
    });
    await raiseForStatus(resp);
    return (await resp.json()) as GenerateResponse;
  }

  async galleryPage(page: number, pageSize: number): Promise<GalleryPage> {
    const resp = await this.fetchFn(
      `${this.base}/api/gallery?page=${page}&page_size=${pageSize}`,
    );
    await raiseForStatus(resp);
    return (await resp.json()) as GalleryPage;
  }

  async health(): Promise<boolean> {
    try {
      const resp = await this.fetchFn(`${this.base}/healthz`);
      return resp.ok;
    } catch {
      return false;
    }
  }
}
