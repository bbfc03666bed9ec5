import { SessionController } from "./controller.js";
import { StrokeRecorder, strokeToAction, tapToPoint } from "./capture.js";
import { dashboardView, mainView, PanelView } from "./viewmodel.js";
import type { DashboardGrid } from "./types.js";

// DOM rendering. Everything displayed is read off the controller's last
// server payloads; the only local state is the in-progress pen stroke.

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export class App {
  private root: HTMLElement;
  private recorder = new StrokeRecorder();
  private showDashboard = false;
  private hint = "";

  constructor(root: HTMLElement, private controller: SessionController) {
    this.root = root;
  }

  render(): void {
    this.root.replaceChildren();
    const session = this.controller.session;
    if (!session) return;
    const view = mainView(session);

    if (this.controller.connectionLost) {
      this.root.append(el("div", "banner error", "connection lost - actions are not being recorded"));
    }
    if (this.controller.lastDecision !== null) {
      this.root.append(
        el("div", "banner info", `digit identified: ${this.controller.lastDecision}`),
      );
    }

    const pinRow = el("div", "pin-row");
    for (const slot of view.pinSlots) {
      const cell = el("div", slot.current ? "pin-slot current" : "pin-slot");
      cell.textContent = slot.value === null ? "_" : String(slot.value);
      pinRow.append(cell);
    }
    this.root.append(pinRow);

    const digitRow = el("div", "digit-row");
    for (const d of view.digits) {
      digitRow.append(el("div", `digit ${d.color}`, String(d.digit)));
    }
    this.root.append(digitRow);

    if (view.complete) {
      this.root.append(el("div", "banner info", "PIN complete"));
    } else if (view.buttons) {
      const grid = el("div", view.buttons.length === 2 ? "buttons two" : "buttons nine");
      for (const b of view.buttons) {
        const btn = el("button", `action-button ${b.color}`);
        btn.addEventListener("click", () => {
          void this.controller.submit({ type: "button", button: b.index });
        });
        grid.append(btn);
      }
      this.root.append(grid);
    } else if (view.mode === "touch") {
      this.root.append(this.touchPad());
    } else if (view.mode === "sketch") {
      this.root.append(this.sketchPad());
    }

    if (this.hint) {
      this.root.append(el("div", "banner hint", this.hint));
    }

    const toggle = el("button", "toggle", this.showDashboard ? "hide explanation" : "show explanation");
    toggle.addEventListener("click", () => {
      this.showDashboard = !this.showDashboard;
      this.render();
    });
    this.root.append(toggle);

    if (this.showDashboard && this.controller.dashboard) {
      if (this.controller.dashboardStale) {
        this.root.append(el("div", "banner hint", "explanation panel is stale"));
      }
      this.root.append(this.dashboardElement());
    }
  }

  private touchPad(): HTMLElement {
    const canvas = el("canvas", "pad touch-pad");
    canvas.width = 320;
    canvas.height = 320;
    canvas.addEventListener("click", (e: MouseEvent) => {
      const rect = canvas.getBoundingClientRect();
      const body = tapToPoint(e.clientX - rect.left, e.clientY - rect.top, rect.width, rect.height);
      void this.controller.submit(body);
    });
    return canvas;
  }

  private sketchPad(): HTMLElement {
    const canvas = el("canvas", "pad sketch-pad");
    canvas.width = 320;
    canvas.height = 320;
    const ctx = canvas.getContext("2d")!;
    const pos = (e: MouseEvent): [number, number] => {
      const rect = canvas.getBoundingClientRect();
      return [e.clientX - rect.left, e.clientY - rect.top];
    };
    const redraw = () => {
      ctx.clearRect(0, 0, canvas.width, canvas.height);
      const stroke = this.recorder.current;
      if (stroke.length < 2) return;
      ctx.beginPath();
      ctx.moveTo(stroke[0][0], stroke[0][1]);
      for (const [x, y] of stroke.slice(1)) ctx.lineTo(x, y);
      ctx.stroke();
    };
    canvas.addEventListener("mousedown", (e) => {
      const [x, y] = pos(e);
      this.recorder.down(x, y);
    });
    canvas.addEventListener("mousemove", (e) => {
      if (!this.recorder.drawing) return;
      const [x, y] = pos(e);
      this.recorder.move(x, y);
      redraw();
    });
    canvas.addEventListener("mouseup", () => {
      const stroke = this.recorder.up();
      if (!stroke) {
        this.hint = "draw a stroke with at least two points";
        this.render();
        return;
      }
      this.hint = "";
      void this.controller.submit(strokeToAction(stroke));
    });
    return canvas;
  }

  private dashboardElement(): HTMLElement {
    const wrap = el("div", "dashboard");
    for (const panel of dashboardView(this.controller.dashboard!)) {
      wrap.append(this.panelElement(panel));
    }
    return wrap;
  }

  private panelElement(panel: PanelView): HTMLElement {
    const node = el("div", `panel ${panel.sizeClass} ${panel.toneClass}`);
    node.append(el("div", "panel-title", `${panel.digit} (${panel.score.toFixed(2)})`));
    const canvas = el("canvas", "panel-canvas");
    canvas.width = panel.sizeClass === "large" ? 120 : 70;
    canvas.height = canvas.width;
    const ctx = canvas.getContext("2d")!;
    if (panel.grid) {
      drawGrid(ctx, canvas.width, panel.grid);
    }
    if (panel.dots) {
      const columns = 3;
      panel.dots.forEach((dot) => {
        const cx = ((dot.button % columns) + 0.5) * (canvas.width / columns);
        const cy = (Math.floor(dot.button / columns) + 0.5) * (canvas.width / columns);
        drawDot(ctx, cx, cy, dot.color);
      });
    }
    if (panel.points && panel.points.length) {
      const bounds = panel.grid?.bounds ?? [0, 0, 1, 1];
      for (const p of panel.points) {
        const cx = ((p.x - bounds[0]) / (bounds[2] - bounds[0])) * canvas.width;
        const cy = ((p.y - bounds[1]) / (bounds[3] - bounds[1])) * canvas.height;
        drawDot(ctx, cx, cy, p.color);
      }
    }
    node.append(canvas);
    return node;
  }
}

const PALETTE = { yellow: "#e7c418", grey: "#8a8a8a" };

function drawDot(ctx: CanvasRenderingContext2D, x: number, y: number, color: "yellow" | "grey") {
  ctx.beginPath();
  ctx.arc(x, y, 4, 0, Math.PI * 2);
  ctx.fillStyle = PALETTE[color];
  ctx.fill();
  ctx.strokeStyle = "#222";
  ctx.stroke();
}

function drawGrid(ctx: CanvasRenderingContext2D, size: number, grid: DashboardGrid) {
  const cell = size / grid.size;
  for (let row = 0; row < grid.size; row++) {
    for (let col = 0; col < grid.size; col++) {
      ctx.fillStyle = grid.colors[row][col] === "yellow" ? "#f5e9b8" : "#d9d9d9";
      ctx.fillRect(col * cell, row * cell, cell + 1, cell + 1);
    }
  }
}
