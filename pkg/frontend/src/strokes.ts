export type Tool = "ink" | "eraser";

export interface Point {
  x: number;
  y: number;
}

export interface Stroke {
  tool: Tool;
  width: number;
  points: Point[];
}

export interface CanvasState {
  size: number;
  strokes: Stroke[];
}

/** Minimal 2D-context surface so replay stays testable without a DOM. */
export interface StrokeSurface {
  fillStyle: string;
  strokeStyle: string;
  lineWidth: number;
  lineCap: string;
  lineJoin: string;
  fillRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  stroke(): void;
}

export const INK_COLOR = "#1a1a1a";
export const PAPER_COLOR = "#ffffff";

export function emptyCanvas(size: number): CanvasState {
  return { size, strokes: [] };
}

export function startStroke(state: CanvasState, tool: Tool, width: number, p: Point): CanvasState {
  return { ...state, strokes: [...state.strokes, { tool, width, points: [p] }] };
}

export function extendStroke(state: CanvasState, p: Point): CanvasState {
  if (state.strokes.length === 0) return state;
  const strokes = state.strokes.slice();
  const last = strokes[strokes.length - 1];
  strokes[strokes.length - 1] = { ...last, points: [...last.points, p] };
  return { ...state, strokes };
}

/** Undo never underflows: on an empty list it is a no-op. */
export function undo(state: CanvasState): CanvasState {
  if (state.strokes.length === 0) return state;
  return { ...state, strokes: state.strokes.slice(0, -1) };
}

export function clear(state: CanvasState): CanvasState {
  return { ...state, strokes: [] };
}

/**
 * Deterministically rebuild the bitmap from the stroke list: white paper,
 * then each stroke as a round-capped polyline (eraser paints paper color).
 */
export function replay(state: CanvasState, ctx: StrokeSurface): void {
  ctx.fillStyle = PAPER_COLOR;
  ctx.fillRect(0, 0, state.size, state.size);
  for (const stroke of state.strokes) {
    if (stroke.points.length === 0) continue;
    ctx.strokeStyle = stroke.tool === "ink" ? INK_COLOR : PAPER_COLOR;
    ctx.lineWidth = stroke.width;
    ctx.lineCap = "round";
    ctx.lineJoin = "round";
    ctx.beginPath();
    ctx.moveTo(stroke.points[0].x, stroke.points[0].y);
    for (const p of stroke.points.slice(1)) {
      ctx.lineTo(p.x, p.y);
    }
    if (stroke.points.length === 1) {
      // Dot: a zero-length segment still draws with round caps.
      ctx.lineTo(stroke.points[0].x + 0.01, stroke.points[0].y);
    }
    ctx.stroke();
  }
}
