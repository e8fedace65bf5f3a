/** Webcam frame scheduler for online mode.
 *
 * Sends at most one frame request at a time, never faster than the
 * service's advertised cap, and halves the frame rate whenever the service
 * answers 429. Results carry the frame's sequence number; the consumer
 * (UiSession.applyResults) drops anything stale. Timers are injectable so
 * tests can drive the loop deterministically.
 */

import { ApiError } from "./api.js";
import type { PredictionResponse, TaskName } from "./api.js";

export interface FrameLoopDeps {
  capture: () => Promise<Blob | null>;
  send: (tasks: TaskName[], frame: Blob) => Promise<PredictionResponse[]>;
  onResults: (seq: number, responses: PredictionResponse[]) => void;
  onError?: (error: unknown) => void;
  onRateChange?: (fps: number) => void;
  setTimer?: (fn: () => void, ms: number) => ReturnType<typeof setTimeout>;
  clearTimer?: (handle: ReturnType<typeof setTimeout>) => void;
}

export const MIN_FPS = 0.25;

export class FrameLoop {
  private seq = 0;
  private running = false;
  private inFlight = false;
  private timer: ReturnType<typeof setTimeout> | null = null;
  private fps: number;
  private readonly setTimer: NonNullable<FrameLoopDeps["setTimer"]>;
  private readonly clearTimer: NonNullable<FrameLoopDeps["clearTimer"]>;

  constructor(
    private capFps: number,
    private tasks: TaskName[],
    private deps: FrameLoopDeps,
  ) {
    this.fps = capFps;
    this.setTimer = deps.setTimer ?? ((fn, ms) => setTimeout(fn, ms));
    this.clearTimer = deps.clearTimer ?? ((h) => clearTimeout(h));
  }

  get currentFps(): number {
    return this.fps;
  }

  get nextSeq(): number {
    return this.seq;
  }

  start(): void {
    if (this.running) return;
    this.running = true;
    void this.tick();
  }

  stop(): void {
    this.running = false;
    if (this.timer !== null) {
      this.clearTimer(this.timer);
      this.timer = null;
    }
  }

  setTasks(tasks: TaskName[]): void {
    this.tasks = tasks;
  }

  private scheduleNext(): void {
    if (!this.running) return;
    this.timer = this.setTimer(() => void this.tick(), 1000 / this.fps);
  }

  private async tick(): Promise<void> {
    if (!this.running) return;
    if (this.inFlight || this.tasks.length === 0) {
      this.scheduleNext();
      return;
    }
    const frame = await this.deps.capture();
    if (!this.running) return;
    if (!frame) {
      this.scheduleNext();
      return;
    }
    const seq = this.seq++;
    this.inFlight = true;
    try {
      const responses = await this.deps.send(this.tasks, frame);
      if (this.running) this.deps.onResults(seq, responses);
    } catch (error) {
      if (error instanceof ApiError && error.status === 429) {
        this.fps = Math.max(MIN_FPS, this.fps / 2);
        this.deps.onRateChange?.(this.fps);
      } else {
        this.deps.onError?.(error);
      }
    } finally {
      this.inFlight = false;
    }
    this.scheduleNext();
  }
}
