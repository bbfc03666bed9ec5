import type { ApiClient } from "./api.js";
import type { ActionBody, Dashboard, WireSession } from "./types.js";

// Session flow with a hard one-action-per-step rule: while a post (and the
// dashboard refresh that follows it) is in flight, further submissions are
// ignored, never queued.

export class SessionController {
  session: WireSession | null = null;
  dashboard: Dashboard | null = null;
  lastDecision: number | null = null;
  connectionLost = false;
  dashboardStale = false;

  private inFlight = false;

  constructor(
    private api: ApiClient,
    private onChange: () => void = () => {},
  ) {}

  get busy(): boolean {
    return this.inFlight;
  }

  async create(mode: string, seed?: number): Promise<void> {
    this.session = await this.api.createSession(mode, seed);
    this.lastDecision = null;
    this.connectionLost = false;
    await this.refreshDashboard();
    this.onChange();
  }

  /** Submit one action; returns false when ignored (busy, done, or no session). */
  async submit(body: ActionBody): Promise<boolean> {
    if (this.inFlight || !this.session || this.session.complete) {
      return false;
    }
    this.inFlight = true;
    try {
      const response = await this.api.postAction(this.session.session_id, body);
      this.session = response.session;
      this.lastDecision = response.decision ?? null;
      this.connectionLost = false;
      await this.refreshDashboard();
    } catch (err) {
      this.connectionLost = true;
      throw err;
    } finally {
      this.inFlight = false;
      this.onChange();
    }
    return true;
  }

  async refreshDashboard(): Promise<void> {
    if (!this.session) return;
    try {
      this.dashboard = await this.api.getDashboard(this.session.session_id);
      this.dashboardStale = false;
    } catch {
      this.dashboardStale = true; // keep showing the previous panels
    }
  }
}
