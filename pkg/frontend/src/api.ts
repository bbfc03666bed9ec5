import type { ActionBody, ActionResponse, Dashboard, WireSession } from "./types.js";

// Thin typed client; the controller depends on this interface so tests can
// substitute a fake.
export interface ApiClient {
  createSession(mode: string, seed?: number): Promise<WireSession>;
  postAction(sessionId: string, body: ActionBody): Promise<ActionResponse>;
  getDashboard(sessionId: string): Promise<Dashboard>;
}

export class HttpApiClient implements ApiClient {
  constructor(private baseUrl: string) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await fetch(this.baseUrl + path, {
      method,
      headers: body !== undefined ? { "Content-Type": "application/json" } : undefined,
      body: body !== undefined ? JSON.stringify(body) : undefined,
    });
    if (!response.ok) {
      const detail = await response.text();
      throw new Error(`${method} ${path} -> ${response.status}: ${detail}`);
    }
    return (await response.json()) as T;
  }

  createSession(mode: string, seed?: number): Promise<WireSession> {
    return this.request("POST", "/sessions", seed === undefined ? { mode } : { mode, seed });
  }

  postAction(sessionId: string, body: ActionBody): Promise<ActionResponse> {
    return this.request("POST", `/sessions/${sessionId}/actions`, body);
  }

  getDashboard(sessionId: string): Promise<Dashboard> {
    return this.request("GET", `/sessions/${sessionId}/dashboard`);
  }
}
