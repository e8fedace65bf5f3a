/** DOM wiring for the three-screen app: welcome, offline, online. */

import { ApiClient, ApiError } from "./api.js";
import type { ModelInventory, PredictionResponse, TaskName } from "./api.js";
import { FrameLoop } from "./frameloop.js";
import { errorBanner, infoBanner, resultPanel } from "./render.js";
import { UiSession } from "./session.js";

const api = new ApiClient("");
const session = new UiSession();

let inventory: ModelInventory = { models: [], frame_rate_cap: 4 };
let frameLoop: FrameLoop | null = null;
let mediaStream: MediaStream | null = null;

const el = (id: string) => document.getElementById(id) as HTMLElement;

function showScreen(mode: "welcome" | "offline" | "online"): void {
  for (const name of ["welcome", "offline", "online"]) {
    el(`screen-${name}`).hidden = name !== mode;
  }
}

function loadedTasks(): TaskName[] {
  return inventory.models.map((m) => m.task);
}

function renderTaskChecklist(container: HTMLElement, online: boolean): void {
  container.innerHTML = "";
  for (const model of inventory.models) {
    const offlineOnly = model.offline_only;
    const disabled = online && offlineOnly;
    const id = `${container.id}-${model.task}`;
    const label = document.createElement("label");
    label.className = "task-toggle" + (disabled ? " disabled" : "");
    if (disabled) {
      label.title = "offline-only model: it needs high-quality stills, " +
        "use the offline screen";
    }
    const box = document.createElement("input");
    box.type = "checkbox";
    box.id = id;
    box.disabled = disabled;
    box.checked = session.selectedTasks().includes(model.task);
    box.addEventListener("change", () => {
      if (!session.toggleTask(model.task)) box.checked = false;
      frameLoop?.setTasks(onlineSelection());
    });
    label.appendChild(box);
    label.appendChild(document.createTextNode(` ${model.task}`));
    container.appendChild(label);
  }
}

function onlineSelection(): TaskName[] {
  return session.selectedTasks().filter((t) => t !== "recognition");
}

function renderResults(container: HTMLElement): void {
  const panels: string[] = [];
  for (const task of session.selectedTasks()) {
    const result = session.resultFor(task);
    if (result) panels.push(resultPanel(result));
  }
  if (panels.length) container.innerHTML = panels.join("");
}

function showBanner(container: HTMLElement, html: string): void {
  const zone = container.querySelector(".banner-zone") as HTMLElement;
  zone.innerHTML = html;
}

// --- offline screen ----------------------------------------------------------

async function classifyUpload(file: File): Promise<void> {
  const offline = el("screen-offline");
  const tasks = session.selectedTasks();
  if (tasks.length === 0) {
    showBanner(offline, infoBanner("select at least one task first"));
    return;
  }
  showBanner(offline, "");
  for (const task of tasks) {
    try {
      const response: PredictionResponse = await api.predictImage(task, file);
      session.applyOfflineResult(response);
    } catch (error) {
      // render the failure inline; earlier results stay on screen
      if (error instanceof ApiError) {
        showBanner(offline, errorBanner(error.code, `${task}: ${error.message}`));
      } else {
        showBanner(offline, errorBanner("network_error", `${task}: ${String(error)}`));
      }
    }
  }
  renderResults(el("offline-results"));
}

// --- online screen -----------------------------------------------------------

async function captureFrame(video: HTMLVideoElement): Promise<Blob | null> {
  if (!video.videoWidth) return null;
  const canvas = document.createElement("canvas");
  canvas.width = video.videoWidth;
  canvas.height = video.videoHeight;
  const ctx = canvas.getContext("2d");
  if (!ctx) return null;
  ctx.drawImage(video, 0, 0);
  return new Promise((resolve) => canvas.toBlob(resolve, "image/png"));
}

async function startOnline(): Promise<void> {
  const online = el("screen-online");
  const video = el("camera") as HTMLVideoElement;
  try {
    mediaStream = await navigator.mediaDevices.getUserMedia({ video: true });
    video.srcObject = mediaStream;
    await video.play();
    session.setCameraState("active");
    showBanner(online, "");
  } catch {
    session.setCameraState("error");
    showBanner(
      online,
      errorBanner("camera_denied", "camera unavailable or denied; fix permissions and retry"),
    );
    return; // no request traffic without a camera
  }

  frameLoop = new FrameLoop(inventory.frame_rate_cap, onlineSelection(), {
    capture: () => captureFrame(video),
    send: (tasks, frame) => api.predictFrame(tasks, frame),
    onResults: (seq, responses) => {
      if (session.applyResults(seq, responses)) {
        renderResults(el("online-results"));
      }
    },
    onRateChange: (fps) => {
      showBanner(online, infoBanner(`server is busy; frame rate reduced to ${fps}/s`));
    },
    onError: (error) => {
      if (error instanceof ApiError) {
        showBanner(online, errorBanner(error.code, error.message));
      }
    },
  });
  frameLoop.start();
}

function stopOnline(): void {
  frameLoop?.stop();
  frameLoop = null;
  if (mediaStream) {
    for (const track of mediaStream.getTracks()) track.stop();
    mediaStream = null;
  }
  const video = el("camera") as HTMLVideoElement;
  video.srcObject = null;
  session.setCameraState("off");
}

// --- navigation ---------------------------------------------------------------

function goto(mode: "welcome" | "offline" | "online"): void {
  if (session.mode === "online" && mode !== "online") stopOnline();
  if (mode === "offline") session.enterOffline();
  else if (mode === "online") session.enterOnline();
  else session.enterWelcome();
  showScreen(mode);
  if (mode === "offline") renderTaskChecklist(el("offline-tasks"), false);
  if (mode === "online") {
    renderTaskChecklist(el("online-tasks"), true);
    void startOnline();
  }
}

async function init(): Promise<void> {
  try {
    inventory = await api.models();
  } catch (error) {
    showBanner(el("screen-welcome"),
               errorBanner("service_unreachable", String(error)));
  }
  el("welcome-model-count").textContent =
    `${loadedTasks().length} model(s) loaded: ${loadedTasks().join(", ") || "none"}`;

  el("nav-offline").addEventListener("click", () => goto("offline"));
  el("nav-online").addEventListener("click", () => goto("online"));
  for (const back of document.querySelectorAll(".nav-welcome")) {
    back.addEventListener("click", () => goto("welcome"));
  }
  el("camera-retry").addEventListener("click", () => void startOnline());

  const picker = el("file-input") as HTMLInputElement;
  picker.addEventListener("change", () => {
    const file = picker.files?.[0];
    if (file) void classifyUpload(file);
  });

  showScreen("welcome");
}

window.addEventListener("load", () => void init());
