import type {
  DirectionResponse,
  PinnedSolution,
  ServiceError,
  SessionResponse,
  SpectraResponse,
  StepResponse,
} from "./types";

export class ApiError extends Error {
  readonly code: string;
  readonly status: number;

  constructor(status: number, err: ServiceError) {
    super(err.message);
    this.code = err.code;
    this.status = status;
  }
}

type Fetcher = typeof fetch;

// Thin typed wrapper over the service endpoints. `fetcher` is injectable
// so tests can run without a live server.
export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetcher: Fetcher = fetch,
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetcher(`${this.baseUrl}${path}`, init);
    const body = await resp.json();
    if (!resp.ok) {
      const err: ServiceError =
        body && typeof body.code === "string"
          ? body
          : { code: "unknown_error", message: JSON.stringify(body) };
      throw new ApiError(resp.status, err);
    }
    return body as T;
  }

  private post<T>(path: string, payload: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  createSession(preset: string): Promise<SessionResponse> {
    return this.post("/sessions", { config: preset });
  }

  getSpectra(sessionId: string): Promise<SpectraResponse> {
    return this.request(`/sessions/${sessionId}/spectra`);
  }

  buildDirection(
    sessionId: string,
    params: { K?: number; tau?: number; k_top?: number },
  ): Promise<DirectionResponse> {
    return this.post(`/sessions/${sessionId}/direction`, params);
  }

  step(sessionId: string, directionId: string, eta: number): Promise<StepResponse> {
    const q = `direction=${encodeURIComponent(directionId)}&eta=${eta}`;
    return this.request(`/sessions/${sessionId}/step?${q}`);
  }

  pin(sessionId: string, directionId: string, eta: number): Promise<PinnedSolution> {
    return this.post(`/sessions/${sessionId}/pin`, {
      direction: directionId,
      eta,
    });
  }

  solutions(sessionId: string): Promise<{ solutions: PinnedSolution[] }> {
    return this.request(`/sessions/${sessionId}/solutions`);
  }
}
