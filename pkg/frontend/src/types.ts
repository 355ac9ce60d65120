// Payload shapes of the exploration service. Every quantitative value the
// UI shows comes from one of these; the client never recomputes numbers
// from raw grids.

export interface BaseSolution {
  z0: number[];
  x0: number[];
  residual: number;
}

export interface SessionResponse {
  session_id: string;
  preset: string;
  config_hash: string;
  latent_dim: number;
  signal_shape: [number, number];
  y: number[];
  base_solution: BaseSolution;
}

export interface SpectraResponse {
  lambda: number[];
  omega: number[];
  coupling: number[][];
  participation_ratio_y: number;
  participation_ratio_x: number;
  k_top: number;
}

export interface DirectionResponse {
  direction_id: string;
  source_index: number;
  removed_set: number[];
  residual_correlations: number[];
  rayleigh_y: number;
  rayleigh_x: number;
  eta_max: number;
}

export interface StepResponse {
  direction_id: string;
  eta: number;
  measurement_residual: number;
  perceptual_from_base: number;
  feasible: boolean;
  x: number[];
  z: number[];
}

export interface PinnedSolution {
  pin_id: number;
  direction_id: string;
  eta: number;
  measurement_residual: number;
  perceptual_from_base: number;
  feasible: boolean;
  x: number[];
}

export interface ServiceError {
  code: string;
  message: string;
}

export type PresetName = "sr" | "ip" | "cs";

export const FEASIBILITY_THRESHOLD = 1e-2;
export const STEP_DEBOUNCE_MS = 80;
