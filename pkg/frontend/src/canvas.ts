import {
  CanvasState,
  Point,
  Tool,
  clear,
  emptyCanvas,
  extendStroke,
  replay,
  startStroke,
  undo,
} from "./strokes";

export const CANVAS_SIZE = 512;

/**
 * Binds the stroke model to a real <canvas>: pointer events append to the
 * model and every change re-renders by replaying the stroke list, so the
 * bitmap is always the pure function of the state.
 */
export class DrawingPad {
  state: CanvasState = emptyCanvas(CANVAS_SIZE);
  tool: Tool = "ink";
  brushWidth = 4;
  private drawing = false;
  private readonly ctx: CanvasRenderingContext2D;

  constructor(private readonly canvas: HTMLCanvasElement) {
    const ratio = window.devicePixelRatio || 1;
    canvas.width = CANVAS_SIZE * ratio;
    canvas.height = CANVAS_SIZE * ratio;
    canvas.style.width = `${CANVAS_SIZE}px`;
    canvas.style.height = `${CANVAS_SIZE}px`;
    const ctx = canvas.getContext("2d");
    if (!ctx) throw new Error("2d canvas unavailable");
    this.ctx = ctx;
    this.ctx.scale(ratio, ratio);

    canvas.addEventListener("pointerdown", (e) => this.onDown(e));
    canvas.addEventListener("pointermove", (e) => this.onMove(e));
    window.addEventListener("pointerup", () => this.onUp());
    this.render();
  }

  private position(e: PointerEvent): Point {
    const rect = this.canvas.getBoundingClientRect();
    return {
      x: ((e.clientX - rect.left) / rect.width) * CANVAS_SIZE,
      y: ((e.clientY - rect.top) / rect.height) * CANVAS_SIZE,
    };
  }

  private onDown(e: PointerEvent): void {
    this.canvas.setPointerCapture(e.pointerId);
    this.drawing = true;
    const width = this.tool === "eraser" ? this.brushWidth * 4 : this.brushWidth;
    this.state = startStroke(this.state, this.tool, width, this.position(e));
    this.render();
  }

  private onMove(e: PointerEvent): void {
    if (!this.drawing) return;
    this.state = extendStroke(this.state, this.position(e));
    this.render();
  }

  private onUp(): void {
    this.drawing = false;
  }

  undo(): void {
    this.state = undo(this.state);
    this.render();
  }

  clear(): void {
    this.state = clear(this.state);
    this.render();
  }

  private render(): void {
    replay(this.state, this.ctx as unknown as Parameters<typeof replay>[1]);
  }

  /** White-backed PNG at the canvas's logical pixel size. */
  exportPng(): Promise<Blob> {
    const plain = document.createElement("canvas");
    plain.width = CANVAS_SIZE;
    plain.height = CANVAS_SIZE;
    const ctx = plain.getContext("2d");
    if (!ctx) return Promise.reject(new Error("2d canvas unavailable"));
    replay(this.state, ctx as unknown as Parameters<typeof replay>[1]);
    return new Promise((resolve, reject) => {
      plain.toBlob(
        (blob) => (blob ? resolve(blob) : reject(new Error("PNG export failed"))),
        "image/png",
      );
    });
  }
}
