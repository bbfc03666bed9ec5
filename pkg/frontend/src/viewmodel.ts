import type { Color, Dashboard, DashboardGrid, DashboardItem, DashboardPanel, WireSession } from "./types.js";

// Pure view-model builders. Every color, flag and value comes straight from
// a server payload: the page never infers anything on its own.

export const PIN_LENGTH = 4;

export interface PinSlotView {
  value: number | null;
  current: boolean;
}

export interface DigitView {
  digit: number;
  color: Color;
}

export interface ButtonView {
  index: number;
  color: Color | "black";
}

export interface MainView {
  mode: string;
  pinSlots: PinSlotView[];
  digits: DigitView[];
  buttons: ButtonView[] | null;
  complete: boolean;
}

export function mainView(session: WireSession): MainView {
  const filled = session.pin_slots;
  const pinSlots: PinSlotView[] = [];
  for (let i = 0; i < PIN_LENGTH; i++) {
    pinSlots.push({
      value: i < filled.length ? filled[i] : null,
      current: !session.complete && i === filled.length,
    });
  }
  const digits = session.coloring.map((color, digit) => ({ digit, color }));
  let buttons: ButtonView[] | null = null;
  if (session.button_colors) {
    buttons = session.button_colors.map((color, index) => ({
      index,
      color: color ?? "black",
    }));
  }
  return { mode: session.mode, pinSlots, digits, buttons, complete: session.complete };
}

export interface PanelView {
  digit: number;
  sizeClass: "large" | "small";
  toneClass: "green" | "red";
  score: number;
  dots: { button: number; color: Color }[] | null;
  points: { x: number; y: number; color: Color }[] | null;
  grid: DashboardGrid | null;
}

export function panelView(panel: DashboardPanel, discrete: boolean): PanelView {
  const dots = discrete
    ? panel.items.map((item: DashboardItem) => ({ button: item.button!, color: item.color }))
    : null;
  const points = discrete
    ? null
    : panel.items.map((item: DashboardItem) => ({ x: item.x!, y: item.y!, color: item.color }));
  return {
    digit: panel.digit,
    sizeClass: panel.valid ? "large" : "small",
    toneClass: panel.valid ? "green" : "red",
    score: panel.score,
    dots,
    points,
    grid: panel.grid,
  };
}

export function dashboardView(dashboard: Dashboard): PanelView[] {
  const discrete = dashboard.mode === "known" || dashboard.mode === "buttons";
  return dashboard.panels.map((p) => panelView(p, discrete));
}
