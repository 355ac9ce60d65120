import type { HeatmapScale } from "./state";
import { gaugeLevel, toGray } from "./state";

// DOM painters. Everything here draws numbers the service produced;
// nothing is recomputed client-side beyond color mapping.

export function drawHeatmap(
  canvas: HTMLCanvasElement,
  values: number[],
  rows: number,
  cols: number,
  scale: HeatmapScale,
): void {
  canvas.width = cols;
  canvas.height = rows;
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const gray = toGray(values, scale);
  const img = ctx.createImageData(cols, rows);
  for (let i = 0; i < gray.length; i++) {
    img.data[4 * i] = gray[i];
    img.data[4 * i + 1] = gray[i];
    img.data[4 * i + 2] = gray[i];
    img.data[4 * i + 3] = 255;
  }
  ctx.putImageData(img, 0, 0);
}

export function drawCouplingHeatmap(
  canvas: HTMLCanvasElement,
  coupling: number[][],
): void {
  const n = coupling.length;
  canvas.width = n;
  canvas.height = n;
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const img = ctx.createImageData(n, n);
  for (let i = 0; i < n; i++) {
    for (let j = 0; j < n; j++) {
      const v = Math.min(1, Math.abs(coupling[i][j]));
      const k = 4 * (i * n + j);
      img.data[k] = Math.round(255 * v);
      img.data[k + 1] = Math.round(64 * v);
      img.data[k + 2] = Math.round(255 * (1 - v));
      img.data[k + 3] = 255;
    }
  }
  ctx.putImageData(img, 0, 0);
}

export function renderSpectrumBars(
  container: HTMLElement,
  values: number[],
  highlightUpTo = 0,
): void {
  container.replaceChildren();
  const top = Math.max(...values, 1e-300);
  for (let i = 0; i < values.length; i++) {
    const bar = document.createElement("div");
    bar.className = "bar" + (i < highlightUpTo ? " bar-top" : "");
    // log scale over 12 decades so small eigenvalues stay visible
    const rel = Math.max(values[i], top * 1e-12) / top;
    const h = Math.max(2, Math.round(60 * (1 + Math.log10(rel) / 12)));
    bar.style.height = `${h}px`;
    bar.title = `#${i + 1}: ${values[i].toExponential(2)}`;
    container.appendChild(bar);
  }
}

export function renderCorrelations(
  container: HTMLElement,
  correlations: number[],
  removed: Set<number>,
): void {
  container.replaceChildren();
  for (let i = 0; i < correlations.length; i++) {
    const bar = document.createElement("div");
    bar.className = "bar" + (removed.has(i + 1) ? " bar-removed" : "");
    bar.style.height = `${Math.max(2, Math.round(60 * correlations[i]))}px`;
    bar.title = `|d . u${i + 1}| = ${correlations[i].toExponential(2)}`;
    container.appendChild(bar);
  }
}

export function renderGauge(el: HTMLElement, residual: number): void {
  const level = gaugeLevel(residual);
  el.textContent = `residual ${residual.toExponential(2)}`;
  el.className = `gauge gauge-${level}`;
}

export function renderBanner(el: HTMLElement, message: string | null): void {
  el.textContent = message ?? "";
  el.style.display = message ? "block" : "none";
}
