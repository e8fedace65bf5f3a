/** UI session state: screen mode, selected tasks, latest results.
 *
 * The rules live here rather than in DOM code so they are testable:
 * recognition is selectable only in offline mode, and results are applied
 * by sequence number so a stale response can never overwrite a newer one.
 */

import type { PredictionResponse, TaskName } from "./api.js";

export type Mode = "welcome" | "offline" | "online";
export type CameraState = "off" | "active" | "error";

export const ALL_TASKS: TaskName[] = ["recognition", "gender", "face_shape", "emotion"];

export class UiSession {
  mode: Mode = "welcome";
  cameraState: CameraState = "off";
  private selected = new Set<TaskName>();
  private results = new Map<TaskName, PredictionResponse>();
  private lastAppliedSeq = -1;

  availableTasks(): TaskName[] {
    if (this.mode === "online") {
      return ALL_TASKS.filter((t) => t !== "recognition");
    }
    return [...ALL_TASKS];
  }

  isSelectable(task: TaskName): boolean {
    return this.availableTasks().includes(task);
  }

  selectedTasks(): TaskName[] {
    return ALL_TASKS.filter((t) => this.selected.has(t));
  }

  /** Returns false (and changes nothing) when the task is not selectable
   * in the current mode — e.g. recognition while online. */
  toggleTask(task: TaskName): boolean {
    if (!this.isSelectable(task)) return false;
    if (this.selected.has(task)) this.selected.delete(task);
    else this.selected.add(task);
    return true;
  }

  enterOffline(): void {
    this.leaveOnlineIfNeeded();
    this.mode = "offline";
  }

  enterOnline(): void {
    this.mode = "online";
    // recognition is offline-only; drop it from any carried-over selection
    this.selected.delete("recognition");
    this.lastAppliedSeq = -1;
  }

  enterWelcome(): void {
    this.leaveOnlineIfNeeded();
    this.mode = "welcome";
  }

  private leaveOnlineIfNeeded(): void {
    if (this.mode === "online") {
      this.cameraState = "off"; // DOM layer must stop the MediaStream tracks
    }
  }

  setCameraState(state: CameraState): void {
    this.cameraState = state;
  }

  /** Apply a batch of responses tagged with a frame sequence number.
   * Stale batches (seq <= newest applied) are dropped entirely. */
  applyResults(seq: number, responses: PredictionResponse[]): boolean {
    if (seq <= this.lastAppliedSeq) return false;
    this.lastAppliedSeq = seq;
    for (const response of responses) {
      this.results.set(response.task, response);
    }
    return true;
  }

  /** Offline results are not sequenced; they always apply. */
  applyOfflineResult(response: PredictionResponse): void {
    this.results.set(response.task, response);
  }

  resultFor(task: TaskName): PredictionResponse | undefined {
    return this.results.get(task);
  }

  clearResults(): void {
    this.results.clear();
    this.lastAppliedSeq = -1;
  }
}
