import { ApiClient, ApiError } from "./api";
import { debounce } from "./debounce";
import * as render from "./render";
import * as st from "./state";
import type { PresetName } from "./types";
import { STEP_DEBOUNCE_MS } from "./types";

const api = new ApiClient(
  (window as { EGLASS_API_URL?: string }).EGLASS_API_URL ?? "http://127.0.0.1:8710",
);

let state = st.initialState();

function $(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el;
}

function canvas(id: string): HTMLCanvasElement {
  return $(id) as HTMLCanvasElement;
}

function redraw(): void {
  render.renderBanner($("banner"), state.banner);
  $("collapse-hint").textContent = state.collapseHint ?? "";

  const sess = state.session;
  if (sess && state.scale) {
    const [rows, cols] = sess.signal_shape;
    render.drawHeatmap(canvas("base-canvas"), sess.base_solution.x0, rows, cols, state.scale);
    const ySide = Math.round(Math.sqrt(sess.y.length));
    if (ySide * ySide === sess.y.length) {
      render.drawHeatmap(canvas("y-canvas"), sess.y, ySide, ySide, st.heatmapScale(sess.y));
    }
    const shown = st.displayedSignal(state);
    if (shown) {
      render.drawHeatmap(canvas("step-canvas"), shown, rows, cols, state.scale);
    }
  }

  if (state.spectra) {
    render.renderSpectrumBars($("lambda-bars"), state.spectra.lambda, state.spectra.k_top);
    render.renderSpectrumBars($("omega-bars"), state.spectra.omega);
    render.drawCouplingHeatmap(canvas("coupling-canvas"), state.spectra.coupling);
  }

  if (state.direction) {
    render.renderCorrelations(
      $("correlation-bars"),
      state.direction.residual_correlations,
      new Set(state.direction.removed_set),
    );
    const slider = $("eta-slider") as HTMLInputElement;
    const bounds = st.etaBounds(state);
    slider.min = String(bounds.min);
    slider.max = String(bounds.max);
    slider.step = String((bounds.max - bounds.min) / 200 || 1);
    slider.disabled = false;
    ($("pin-button") as HTMLButtonElement).disabled = false;
  }

  const residual = st.displayedResidual(state);
  if (residual !== null) {
    render.renderGauge($("gauge"), residual);
  }

  const gallery = $("gallery");
  gallery.replaceChildren();
  for (const pin of state.pinned) {
    const cell = document.createElement("div");
    cell.className = "pin";
    const c = document.createElement("canvas");
    if (state.session && state.scale) {
      const [rows, cols] = state.session.signal_shape;
      render.drawHeatmap(c, pin.x, rows, cols, state.scale);
    }
    const label = document.createElement("span");
    label.textContent = `${pin.direction_id} @ ${pin.eta.toFixed(3)}`;
    cell.append(c, label);
    gallery.appendChild(cell);
  }
}

function fail(err: unknown): void {
  const message = err instanceof ApiError ? `${err.code}: ${err.message}` : String(err);
  state = st.bannerShown(state, message);
  redraw();
}

async function createSession(preset: PresetName): Promise<void> {
  state = st.selectPreset(state, preset);
  redraw();
  try {
    const sess = await api.createSession(preset);
    state = st.sessionCreated(state, sess);
    state = st.spectraLoaded(state, await api.getSpectra(sess.session_id));
  } catch (err) {
    fail(err);
    return;
  }
  redraw();
}

async function buildDirection(): Promise<void> {
  if (!state.sessionId) return;
  const kRaw = ($("k-input") as HTMLInputElement).value;
  const tauRaw = ($("tau-input") as HTMLInputElement).value;
  const params: { K?: number; tau?: number } = {};
  if (kRaw) params.K = parseInt(kRaw, 10);
  if (tauRaw) params.tau = parseFloat(tauRaw);
  try {
    state = st.directionBuilt(state, await api.buildDirection(state.sessionId, params));
  } catch (err) {
    if (err instanceof ApiError && err.status === 409) {
      const retry = params.K !== undefined ? st.collapseRetryK(params.K) : null;
      const hint = retry !== null ? ` (try K=${retry})` : "";
      state = st.directionCollapsed(state, `${err.message}${hint}`);
    } else {
      fail(err);
      return;
    }
  }
  redraw();
}

const requestStep = debounce((eta: number) => {
  if (!state.sessionId || !state.direction) return;
  const sessionId = state.sessionId;
  const directionId = state.direction.direction_id;
  const begun = st.beginStep(state);
  state = begun.state;
  api
    .step(sessionId, directionId, eta)
    .then((resp) => {
      state = st.stepResolved(state, begun.token, resp);
      redraw();
    })
    .catch(fail);
}, STEP_DEBOUNCE_MS);

async function pinCurrent(): Promise<void> {
  if (!state.sessionId || !state.direction) return;
  try {
    const pin = await api.pin(state.sessionId, state.direction.direction_id, state.eta);
    state = st.pinAdded(state, pin);
  } catch (err) {
    fail(err);
    return;
  }
  redraw();
}

export function wire(): void {
  $("preset-select").addEventListener("change", (ev) => {
    void createSession((ev.target as HTMLSelectElement).value as PresetName);
  });
  $("create-button").addEventListener("click", () => {
    void createSession(($("preset-select") as HTMLSelectElement).value as PresetName);
  });
  $("direction-button").addEventListener("click", () => void buildDirection());
  $("eta-slider").addEventListener("input", (ev) => {
    const eta = parseFloat((ev.target as HTMLInputElement).value);
    state = st.etaChanged(state, eta);
    requestStep(state.eta);
  });
  $("pin-button").addEventListener("click", () => void pinCurrent());
  $("banner").addEventListener("click", () => {
    state = st.bannerDismissed(state);
    redraw();
  });
}

if (typeof document !== "undefined" && document.getElementById("preset-select")) {
  wire();
}
