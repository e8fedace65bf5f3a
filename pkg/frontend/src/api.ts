/** Typed client for the inference service's /v1 API. */

export type TaskName = "recognition" | "gender" | "face_shape" | "emotion";

export interface PredictionResponse {
  task: TaskName;
  label: string;
  probabilities: Record<string, number>;
  top2: [string, number][];
  model_version: string;
  latency_ms: number;
}

export interface ModelInfo {
  task: TaskName;
  label_map: string[];
  input: number[];
  model_version: string;
  offline_only: boolean;
}

export interface ModelInventory {
  models: ModelInfo[];
  frame_rate_cap: number;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

async function raiseForStatus(res: Response): Promise<void> {
  if (res.ok) return;
  let code = "http_error";
  let message = `request failed with status ${res.status}`;
  try {
    const body = await res.json();
    if (body?.error?.code) {
      code = body.error.code;
      message = body.error.message ?? message;
    }
  } catch {
    // non-JSON error body; keep the generic message
  }
  throw new ApiError(res.status, code, message);
}

export class ApiClient {
  constructor(
    private baseUrl = "",
    private fetchFn: typeof fetch = fetch,
  ) {}

  async models(): Promise<ModelInventory> {
    const res = await this.fetchFn(`${this.baseUrl}/v1/models`);
    await raiseForStatus(res);
    return (await res.json()) as ModelInventory;
  }

  async predictImage(task: TaskName, image: Blob): Promise<PredictionResponse> {
    const res = await this.fetchFn(`${this.baseUrl}/v1/predict/${task}`, {
      method: "POST",
      headers: { "content-type": "application/octet-stream" },
      body: image,
    });
    await raiseForStatus(res);
    return (await res.json()) as PredictionResponse;
  }

  async predictFrame(tasks: TaskName[], frame: Blob): Promise<PredictionResponse[]> {
    const query = encodeURIComponent(tasks.join(","));
    const res = await this.fetchFn(`${this.baseUrl}/v1/predict/frame?tasks=${query}`, {
      method: "POST",
      headers: { "content-type": "application/octet-stream" },
      body: frame,
    });
    await raiseForStatus(res);
    return (await res.json()) as PredictionResponse[];
  }
}
