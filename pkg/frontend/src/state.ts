import type {
  DirectionResponse,
  PinnedSolution,
  PresetName,
  SessionResponse,
  SpectraResponse,
  StepResponse,
} from "./types";
import { FEASIBILITY_THRESHOLD } from "./types";

// Pure view-state transitions. The UI layer owns nothing but rendering;
// every update flows through these functions so they can be tested without
// a DOM or a server.

export interface HeatmapScale {
  min: number;
  max: number;
}

export interface ViewState {
  preset: PresetName;
  sessionId: string | null;
  session: SessionResponse | null;
  spectra: SpectraResponse | null;
  direction: DirectionResponse | null;
  collapseHint: string | null;
  eta: number;
  step: StepResponse | null;
  stepToken: number;
  pinned: PinnedSolution[];
  banner: string | null;
  // fixed per session so perceptual change stays visible across steps
  scale: HeatmapScale | null;
}

export function initialState(preset: PresetName = "sr"): ViewState {
  return {
    preset,
    sessionId: null,
    session: null,
    spectra: null,
    direction: null,
    collapseHint: null,
    eta: 0,
    step: null,
    stepToken: 0,
    pinned: [],
    banner: null,
    scale: null,
  };
}

export function heatmapScale(values: number[]): HeatmapScale {
  let min = Infinity;
  let max = -Infinity;
  for (const v of values) {
    if (v < min) min = v;
    if (v > max) max = v;
  }
  if (!(max > min)) {
    min -= 0.5;
    max += 0.5;
  }
  return { min, max };
}

// Map signal values to grayscale bytes under a fixed scale.
export function toGray(values: number[], scale: HeatmapScale): Uint8ClampedArray {
  const out = new Uint8ClampedArray(values.length);
  const span = scale.max - scale.min;
  for (let i = 0; i < values.length; i++) {
    out[i] = Math.round((255 * (values[i] - scale.min)) / span);
  }
  return out;
}

export function selectPreset(state: ViewState, preset: PresetName): ViewState {
  // switching presets abandons the old session entirely
  return initialState(preset);
}

export function sessionCreated(state: ViewState, resp: SessionResponse): ViewState {
  return {
    ...initialState(state.preset),
    sessionId: resp.session_id,
    session: resp,
    scale: heatmapScale(resp.base_solution.x0),
  };
}

export function spectraLoaded(state: ViewState, resp: SpectraResponse): ViewState {
  return { ...state, spectra: resp };
}

export function directionBuilt(state: ViewState, resp: DirectionResponse): ViewState {
  return {
    ...state,
    direction: resp,
    collapseHint: null,
    eta: 0,
    step: null,
    banner: null,
  };
}

export function directionCollapsed(state: ViewState, message: string): ViewState {
  return { ...state, direction: null, step: null, collapseHint: message };
}

export function etaChanged(state: ViewState, eta: number): ViewState {
  const bounds = etaBounds(state);
  const clamped = Math.min(bounds.max, Math.max(bounds.min, eta));
  return { ...state, eta: clamped };
}

export function etaBounds(state: ViewState): { min: number; max: number } {
  const etaMax = state.direction ? state.direction.eta_max : 0;
  return { min: -etaMax, max: etaMax };
}

// Latest-wins step requests: begin issues a token, resolve discards any
// response whose token is stale.
export function beginStep(state: ViewState): { state: ViewState; token: number } {
  const token = state.stepToken + 1;
  return { state: { ...state, stepToken: token }, token };
}

export function stepResolved(
  state: ViewState,
  token: number,
  resp: StepResponse,
): ViewState {
  if (token !== state.stepToken) return state; // stale response
  return { ...state, step: resp };
}

export function pinAdded(state: ViewState, pin: PinnedSolution): ViewState {
  return { ...state, pinned: [...state.pinned, pin] };
}

export function solutionsLoaded(state: ViewState, pins: PinnedSolution[]): ViewState {
  return { ...state, pinned: pins.filter((p) => p.pin_id >= 0) };
}

export function bannerShown(state: ViewState, message: string): ViewState {
  return { ...state, banner: message };
}

export function bannerDismissed(state: ViewState): ViewState {
  return { ...state, banner: null };
}

export type GaugeLevel = "feasible" | "infeasible";

export function gaugeLevel(residual: number): GaugeLevel {
  return residual <= FEASIBILITY_THRESHOLD ? "feasible" : "infeasible";
}

// "try K-1" recovery: the next source index to offer after a collapse
export function collapseRetryK(requestedK: number): number | null {
  return requestedK > 1 ? requestedK - 1 : null;
}

// Currently displayed reconstruction: last step result, else the base.
export function displayedSignal(state: ViewState): number[] | null {
  if (state.step) return state.step.x;
  if (state.session) return state.session.base_solution.x0;
  return null;
}

export function displayedResidual(state: ViewState): number | null {
  if (state.step) return state.step.measurement_residual;
  if (state.session) return state.session.base_solution.residual;
  return null;
}
