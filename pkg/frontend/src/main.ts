import { ApiClient } from "./api";
import { CANVAS_SIZE, DrawingPad } from "./canvas";
import { GalleryController } from "./gallery";
import { SubmissionMachine } from "./submission";

function byId<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
}

const api = new ApiClient();
const pad = new DrawingPad(byId<HTMLCanvasElement>("sketch-canvas"));
const machine = new SubmissionMachine(api);
const gallery = new GalleryController(api, 6);

const submitBtn = byId<HTMLButtonElement>("submit");
const retryBtn = byId<HTMLButtonElement>("retry");
const statusEl = byId<HTMLSpanElement>("status");
const paintingImg = byId<HTMLImageElement>("painting");
const paintingEmpty = byId<HTMLDivElement>("painting-empty");

machine.onChange((state) => {
  submitBtn.disabled = !machine.canSubmit();
  retryBtn.hidden = !(state.phase === "error" && state.error?.retryable);
  switch (state.phase) {
    case "idle":
      statusEl.textContent = "draw, then generate";
      break;
    case "uploading":
      statusEl.textContent = "uploading sketch…";
      break;
    case "generating":
      statusEl.textContent = "painting in progress…";
      break;
    case "done":
      statusEl.textContent = `done in ${Math.round(state.result?.latencyMs ?? 0)} ms`;
      if (state.result) {
        paintingImg.src = state.result.paintingDataUrl;
        paintingImg.hidden = false;
        paintingEmpty.hidden = true;
      }
      break;
    case "error":
      statusEl.textContent = `failed: ${state.error?.message ?? "unknown error"}`;
      break;
  }
});

const doSubmit = () => void machine.submit(() => pad.exportPng());
submitBtn.addEventListener("click", doSubmit);
retryBtn.addEventListener("click", () => {
  machine.reset();
  doSubmit();
});

byId<HTMLButtonElement>("undo").addEventListener("click", () => pad.undo());
byId<HTMLButtonElement>("clear").addEventListener("click", () => pad.clear());

for (const tool of ["ink", "eraser"] as const) {
  byId<HTMLButtonElement>(`tool-${tool}`).addEventListener("click", () => {
    pad.tool = tool;
    byId<HTMLButtonElement>("tool-ink").classList.toggle("active", tool === "ink");
    byId<HTMLButtonElement>("tool-eraser").classList.toggle("active", tool === "eraser");
  });
}
byId<HTMLInputElement>("brush").addEventListener("input", (e) => {
  pad.brushWidth = Number((e.target as HTMLInputElement).value);
});

// Tab switching between drawing board and the collection.
const views = { draw: byId<HTMLElement>("view-draw"), gallery: byId<HTMLElement>("view-gallery") };
for (const name of ["draw", "gallery"] as const) {
  byId<HTMLButtonElement>(`tab-${name}`).addEventListener("click", () => {
    views.draw.hidden = name !== "draw";
    views.gallery.hidden = name !== "gallery";
    byId<HTMLButtonElement>("tab-draw").classList.toggle("active", name === "draw");
    byId<HTMLButtonElement>("tab-gallery").classList.toggle("active", name === "gallery");
    if (name === "gallery") void gallery.load(1);
  });
}

const galleryGrid = byId<HTMLDivElement>("gallery-grid");
const galleryStatus = byId<HTMLDivElement>("gallery-status");
const pageLabel = byId<HTMLSpanElement>("page-label");

gallery.onChange((state) => {
  if (state.status === "loading") {
    galleryStatus.textContent = "loading…";
    galleryStatus.hidden = false;
    return;
  }
  if (state.status === "error") {
    galleryStatus.innerHTML = "";
    galleryStatus.append(`could not load the collection: ${state.message} `);
    const retry = document.createElement("button");
    retry.textContent = "retry";
    retry.addEventListener("click", () => void gallery.load());
    galleryStatus.append(retry);
    galleryStatus.hidden = false;
    return;
  }
  const data = state.data;
  galleryGrid.innerHTML = "";
  if (!data || data.total === 0) {
    galleryStatus.textContent = "no paintings yet — draw the first one";
    galleryStatus.hidden = false;
    pageLabel.textContent = "";
    return;
  }
  galleryStatus.hidden = true;
  pageLabel.textContent = `page ${state.page} / ${state.pageCount}`;
  for (const record of data.records) {
    const card = document.createElement("figure");
    card.className = "pair";
    for (const url of [record.sketch_url, record.painting_url]) {
      const img = document.createElement("img");
      img.src = url;
      img.loading = "lazy";
      img.width = 160;
      img.height = 160;
      card.append(img);
    }
    const caption = document.createElement("figcaption");
    caption.textContent = new Date(record.created_at).toLocaleString();
    card.append(caption);
    galleryGrid.append(card);
  }
});

byId<HTMLButtonElement>("page-prev").addEventListener("click", () => void gallery.previous());
byId<HTMLButtonElement>("page-next").addEventListener("click", () => void gallery.next());

void api.health().then((ok) => {
  if (!ok) statusEl.textContent = "backend not ready yet — hold on";
});

export { CANVAS_SIZE };
