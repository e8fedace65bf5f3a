import { describe, expect, it, vi } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";
import type { PredictionResponse } from "../src/api.js";

const sampleResponse: PredictionResponse = {
  task: "emotion",
  label: "happy",
  probabilities: { neutral: 0.2, happy: 0.61, angry: 0.05, surprise: 0.09, sad: 0.05 },
  top2: [["happy", 61.0], ["neutral", 20.0]],
  model_version: "abc123",
  latency_ms: 2.5,
};

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

describe("ApiClient", () => {
  it("fetches the model inventory", async () => {
    const fetchFn = vi.fn().mockResolvedValue(
      jsonResponse({ models: [], frame_rate_cap: 3 }),
    );
    const client = new ApiClient("http://svc", fetchFn as unknown as typeof fetch);
    const inventory = await client.models();
    expect(inventory.frame_rate_cap).toBe(3);
    expect(fetchFn).toHaveBeenCalledWith("http://svc/v1/models");
  });

  it("posts an image and returns the prediction", async () => {
    const fetchFn = vi.fn().mockResolvedValue(jsonResponse(sampleResponse));
    const client = new ApiClient("", fetchFn as unknown as typeof fetch);
    const blob = new Blob([new Uint8Array([1, 2, 3])]);
    const response = await client.predictImage("emotion", blob);
    expect(response.label).toBe("happy");
    const [url, init] = fetchFn.mock.calls[0]!;
    expect(url).toBe("/v1/predict/emotion");
    expect(init.method).toBe("POST");
  });

  it("joins frame tasks into the query string", async () => {
    const fetchFn = vi.fn().mockResolvedValue(jsonResponse([sampleResponse]));
    const client = new ApiClient("", fetchFn as unknown as typeof fetch);
    await client.predictFrame(["gender", "emotion"], new Blob([]));
    const [url] = fetchFn.mock.calls[0]!;
    expect(url).toBe("/v1/predict/frame?tasks=gender%2Cemotion");
  });

  it("surfaces service error bodies as ApiError", async () => {
    const fetchFn = vi.fn().mockResolvedValue(
      jsonResponse(
        { error: { code: "recognition_offline_only", message: "offline only" } },
        422,
      ),
    );
    const client = new ApiClient("", fetchFn as unknown as typeof fetch);
    await expect(client.predictFrame(["recognition"], new Blob([]))).rejects.toMatchObject({
      status: 422,
      code: "recognition_offline_only",
    });
  });

  it("degrades gracefully on non-JSON errors", async () => {
    const fetchFn = vi.fn().mockResolvedValue(new Response("boom", { status: 502 }));
    const client = new ApiClient("", fetchFn as unknown as typeof fetch);
    try {
      await client.models();
      expect.unreachable();
    } catch (error) {
      expect(error).toBeInstanceOf(ApiError);
      expect((error as ApiError).status).toBe(502);
      expect((error as ApiError).code).toBe("http_error");
    }
  });
});
