// Wire types mirroring the session service's JSON payloads.

export type Color = "yellow" | "grey";

export interface WireSession {
  session_id: string;
  mode: string;
  coloring: Color[];
  posterior: number[];
  valid: boolean[];
  pin_slots: number[];
  step_index: number;
  complete: boolean;
  button_count?: number;
  button_colors?: (Color | null)[];
}

export interface DashboardItem {
  color: Color;
  button?: number;
  x?: number;
  y?: number;
}

export interface DashboardGrid {
  size: number;
  bounds: [number, number, number, number];
  colors: Color[][];
}

export interface DashboardPanel {
  digit: number;
  valid: boolean;
  score: number;
  items: DashboardItem[];
  grid: DashboardGrid | null;
}

export interface Dashboard {
  mode: string;
  panels: DashboardPanel[];
}

export type ActionBody =
  | { type: "button"; button: number }
  | { type: "point"; x: number; y: number }
  | { type: "sketch"; points: [number, number][] };

export interface ActionResponse {
  session: WireSession;
  decision?: number;
}
