import { ApiClient, GalleryPage } from "./api";

export interface GalleryViewState {
  status: "loading" | "loaded" | "error";
  page: number;
  pageCount: number;
  data: GalleryPage | null;
  message: string | null;
}

export function pageCount(total: number, pageSize: number): number {
  return total === 0 ? 0 : Math.ceil(total / pageSize);
}

type Listener = (state: GalleryViewState) => void;

/** Pagination + fetch state for the collection view, newest first. */
export class GalleryController {
  private state: GalleryViewState = {
    status: "loading",
    page: 1,
    pageCount: 0,
    data: null,
    message: null,
  };
  private listeners: Listener[] = [];

  constructor(
    private readonly api: ApiClient,
    readonly pageSize: number = 6,
  ) {}

  get current(): GalleryViewState {
    return this.state;
  }

  onChange(listener: Listener): void {
    this.listeners.push(listener);
  }

  private setState(state: GalleryViewState): void {
    this.state = state;
    for (const listener of this.listeners) listener(state);
  }

  async load(page: number = this.state.page): Promise<void> {
    this.setState({ ...this.state, status: "loading", message: null });
    try {
      const data = await this.api.galleryPage(page, this.pageSize);
      this.setState({
        status: "loaded",
        page,
        pageCount: pageCount(data.total, this.pageSize),
        data,
        message: null,
      });
    } catch (err) {
      const message = err instanceof Error ? err.message : String(err);
      this.setState({ ...this.state, status: "error", message });
    }
  }

  async next(): Promise<void> {
    if (this.state.page < this.state.pageCount) await this.load(this.state.page + 1);
  }

  async previous(): Promise<void> {
    if (this.state.page > 1) await this.load(this.state.page - 1);
  }
}
