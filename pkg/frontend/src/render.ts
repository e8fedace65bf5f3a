/** HTML fragments for result panels and error banners.
 *
 * Every displayed number comes straight from a PredictionResponse: top-2
 * percentages are shown exactly as the service rounded them; per-class
 * probabilities are shown as fractions (bar widths are layout, not
 * displayed numbers).
 */

import type { PredictionResponse } from "./api.js";

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function probabilityRows(response: PredictionResponse): string {
  const entries = Object.entries(response.probabilities).sort((a, b) => b[1] - a[1]);
  return entries
    .map(([label, p]) => {
      const width = Math.max(0, Math.min(100, p * 100));
      const highlight = label === response.label ? " row-top" : "";
      return (
        `<div class="prob-row${highlight}">` +
        `<span class="prob-label">${escapeHtml(label)}</span>` +
        `<span class="prob-bar"><span class="prob-fill" style="width:${width}%"></span></span>` +
        `<span class="prob-value">${p.toFixed(3)}</span>` +
        `</div>`
      );
    })
    .join("");
}

export function top2Line(response: PredictionResponse): string {
  const parts = response.top2.map(
    ([label, pct]) => `${escapeHtml(label)} ${pct}%`,
  );
  return `<div class="top2">top-2: ${parts.join(" · ")}</div>`;
}

export function resultPanel(response: PredictionResponse): string {
  const top2 = response.task === "emotion" ? top2Line(response) : "";
  return (
    `<section class="result-card" data-task="${response.task}">` +
    `<header><span class="task-name">${escapeHtml(response.task)}</span>` +
    `<span class="verdict">${escapeHtml(response.label)}</span></header>` +
    probabilityRows(response) +
    top2 +
    `<footer class="meta">model ${escapeHtml(response.model_version)} · ` +
    `${response.latency_ms} ms</footer>` +
    `</section>`
  );
}

export function errorBanner(code: string, message: string): string {
  return (
    `<div class="banner error" data-code="${escapeHtml(code)}">` +
    `<strong>${escapeHtml(code)}</strong> ${escapeHtml(message)}</div>`
  );
}

export function infoBanner(message: string): string {
  return `<div class="banner info">${escapeHtml(message)}</div>`;
}
