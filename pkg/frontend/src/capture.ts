import type { ActionBody } from "./types.js";

// Input capture helpers, kept free of DOM types so they are unit-testable.

/** Map a tap in pixel coordinates to the unit square the engine works in. */
export function tapToPoint(
  px: number,
  py: number,
  width: number,
  height: number,
): ActionBody {
  return { type: "point", x: px / width, y: py / height };
}

/**
 * Single-stroke recorder: pen down starts a fresh stroke, moves extend it,
 * pen up finishes it.  Strokes with fewer than two points are discarded
 * (returned as null) and must never be submitted.
 */
export class StrokeRecorder {
  private points: [number, number][] | null = null;

  get drawing(): boolean {
    return this.points !== null;
  }

  get current(): [number, number][] {
    return this.points ? [...this.points] : [];
  }

  down(x: number, y: number): void {
    this.points = [[x, y]];
  }

  move(x: number, y: number): void {
    if (this.points) {
      this.points.push([x, y]);
    }
  }

  up(): [number, number][] | null {
    const stroke = this.points;
    this.points = null;
    if (!stroke || stroke.length < 2) {
      return null;
    }
    return stroke;
  }
}

export function strokeToAction(stroke: [number, number][]): ActionBody {
  return { type: "sketch", points: stroke };
}
