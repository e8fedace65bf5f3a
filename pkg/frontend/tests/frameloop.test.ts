import { describe, expect, it } from "vitest";

import { ApiError } from "../src/api.js";
import type { PredictionResponse, TaskName } from "../src/api.js";
import { FrameLoop, MIN_FPS } from "../src/frameloop.js";
import { UiSession } from "../src/session.js";

function response(label: string): PredictionResponse {
  return {
    task: "emotion",
    label,
    probabilities: { [label]: 1.0 },
    top2: [[label, 100.0], [label, 0.0]],
    model_version: "v",
    latency_ms: 1,
  };
}

/** Manual timer queue so tests drive each tick deterministically. */
class TimerQueue {
  pending: (() => void)[] = [];
  set = (fn: () => void, _ms: number) => {
    this.pending.push(fn);
    return this.pending.length as unknown as ReturnType<typeof setTimeout>;
  };
  clear = (_h: ReturnType<typeof setTimeout>) => {
    this.pending = [];
  };
  async fire(): Promise<void> {
    const fn = this.pending.shift();
    fn?.();
    await Promise.resolve();
    await Promise.resolve();
  }
}

type Sender = (tasks: TaskName[], frame: Blob) => Promise<PredictionResponse[]>;

function makeLoop(capFps: number, send: Sender, timers: TimerQueue,
                  onResults: (seq: number, r: PredictionResponse[]) => void,
                  onRateChange?: (fps: number) => void) {
  return new FrameLoop(capFps, ["emotion"], {
    capture: async () => new Blob([new Uint8Array([0])]),
    send,
    onResults,
    onRateChange,
    setTimer: timers.set,
    clearTimer: timers.clear,
  });
}

async function settle(): Promise<void> {
  await Promise.resolve();
  await Promise.resolve();
  await Promise.resolve();
}

describe("FrameLoop", () => {
  it("sends frames with increasing sequence numbers", async () => {
    const timers = new TimerQueue();
    const seen: number[] = [];
    const loop = makeLoop(4, async () => [response("happy")], timers,
                          (seq) => seen.push(seq));
    loop.start();
    await settle();
    await timers.fire();
    await timers.fire();
    loop.stop();
    expect(seen).toEqual([0, 1, 2]);
  });

  it("halves the frame rate on 429 and keeps running", async () => {
    const timers = new TimerQueue();
    const rates: number[] = [];
    let calls = 0;
    const send: Sender = async () => {
      calls += 1;
      if (calls <= 2) {
        throw new ApiError(429, "frame_rate_exceeded", "too fast");
      }
      return [response("happy")];
    };
    const seen: number[] = [];
    const loop = makeLoop(8, send, timers, (seq) => seen.push(seq),
                          (fps) => rates.push(fps));
    loop.start();
    await settle();       // first send -> 429 -> fps 4
    expect(loop.currentFps).toBe(4);
    await timers.fire();  // second send -> 429 -> fps 2
    expect(loop.currentFps).toBe(2);
    await timers.fire();  // third send succeeds at the reduced rate
    loop.stop();
    expect(rates).toEqual([4, 2]);
    expect(seen).toEqual([2]);
  });

  it("never drops below the minimum frame rate", async () => {
    const timers = new TimerQueue();
    const send: Sender = async () => {
      throw new ApiError(429, "frame_rate_exceeded", "too fast");
    };
    const loop = makeLoop(1, send, timers, () => {});
    loop.start();
    await settle();
    for (let i = 0; i < 8; i++) await timers.fire();
    loop.stop();
    expect(loop.currentFps).toBe(MIN_FPS);
  });

  it("stale responses never overwrite newer ones", async () => {
    // scripted mock server: the first request resolves AFTER the second
    const timers = new TimerQueue();
    const session = new UiSession();
    session.enterOnline();

    const resolvers: ((r: PredictionResponse[]) => void)[] = [];
    const send: Sender = () =>
      new Promise<PredictionResponse[]>((resolve) => resolvers.push(resolve));

    const loop = makeLoop(4, send, timers, (seq, responses) => {
      session.applyResults(seq, responses);
    });
    loop.start();
    await settle();                 // request seq 0 pending
    expect(resolvers.length).toBe(1);
    loop.stop();

    const loop2 = makeLoop(4, send, timers, (seq, responses) => {
      // second loop continues the session's sequence numbering
      session.applyResults(seq + 1, responses);
    });
    loop2.start();
    await settle();                 // request (seq 0 in loop2 -> applied as 1)
    expect(resolvers.length).toBe(2);

    resolvers[1]!([response("new")]);   // newer frame answers first
    await settle();
    resolvers[0]!([response("old")]);   // stale answer arrives late
    await settle();
    loop2.stop();

    expect(session.resultFor("emotion")?.label).toBe("new");
  });

  it("stop cancels scheduled ticks and in-flight results are discarded", async () => {
    const timers = new TimerQueue();
    const seen: number[] = [];
    const resolvers: ((r: PredictionResponse[]) => void)[] = [];
    const send: Sender = () =>
      new Promise<PredictionResponse[]>((resolve) => resolvers.push(resolve));
    const loop = makeLoop(4, send, timers, (seq) => seen.push(seq));
    loop.start();
    await settle();
    loop.stop();
    resolvers[0]!([response("late")]);
    await settle();
    expect(seen).toEqual([]);
    expect(timers.pending.length).toBe(0);
  });

  it("sends at most one request at a time", async () => {
    const timers = new TimerQueue();
    let inFlight = 0;
    let maxInFlight = 0;
    const resolvers: ((r: PredictionResponse[]) => void)[] = [];
    const send: Sender = () => {
      inFlight += 1;
      maxInFlight = Math.max(maxInFlight, inFlight);
      return new Promise<PredictionResponse[]>((resolve) =>
        resolvers.push((r) => {
          inFlight -= 1;
          resolve(r);
        }),
      );
    };
    const loop = makeLoop(4, send, timers, () => {});
    loop.start();
    await settle();
    await timers.fire();  // tick while request 0 still pending: must skip
    await timers.fire();
    expect(maxInFlight).toBe(1);
    loop.stop();
  });
});
