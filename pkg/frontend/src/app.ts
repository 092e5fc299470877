import { ApiError, type FilterRequest } from "./api.js";
import type { SubmissionPage, SessionInfo, ViewPayload } from "./types.js";
import { renderDetailView } from "./detailView.js";
import { renderFlowView } from "./flowView.js";
import { renderHistogramView } from "./histogramView.js";

/** The slice of the API client the app drives; tests substitute a stub. */
export interface AppApi {
  createSession(): Promise<SessionInfo>;
  getView(sessionId: string): Promise<ViewPayload>;
  pushFilter(sessionId: string, term: FilterRequest): Promise<ViewPayload>;
  popFilter(sessionId: string): Promise<ViewPayload>;
  clearFilters(sessionId: string): Promise<ViewPayload>;
  getSubmissions(
    sessionId: string,
    variantId: string,
    query?: { errorKind?: string | null; page?: number },
  ): Promise<SubmissionPage>;
}

/**
 * Wires the three views to one server session.  The app holds nothing but
 * the session token and the payloads most recently returned by the service;
 * every number on screen is copied from those payloads, never recomputed.
 * At most one request is in flight at a time, and all controls are disabled
 * while one is.
 */
export class App {
  private readonly api: AppApi;
  private readonly root: HTMLElement;
  private sid: string | null = null;
  private view: ViewPayload | null = null;
  private detail: SubmissionPage | null = null;
  private readonly expanded = new Set<number>();
  private pending: Promise<void> | null = null;
  private errorText = "";

  private countsEl!: HTMLElement;
  private crumbsEl!: HTMLElement;
  private backBtn!: HTMLButtonElement;
  private clearBtn!: HTMLButtonElement;
  private statusEl!: HTMLElement;
  private errorEl!: HTMLElement;
  private flowEl!: HTMLElement;
  private histEl!: HTMLElement;
  private detailEl!: HTMLElement;

  constructor(root: HTMLElement, api: AppApi) {
    this.root = root;
    this.api = api;
    this.buildSkeleton();
    this.render();
  }

  get sessionId(): string | null {
    return this.sid;
  }

  /** The latest view payload, exactly as the service returned it. */
  get currentView(): ViewPayload | null {
    return this.view;
  }

  /** The latest detail page payload, exactly as the service returned it. */
  get currentDetail(): SubmissionPage | null {
    return this.detail;
  }

  get busy(): boolean {
    return this.pending !== null;
  }

  /** Resolves once no request is in flight; lets tests await a click. */
  async whenIdle(): Promise<void> {
    while (this.pending !== null) {
      await this.pending;
    }
  }

  init(): Promise<void> {
    return this.track(async () => {
      const session = await this.api.createSession();
      this.sid = session.session_id;
      this.applyView(await this.api.getView(session.session_id));
    });
  }

  applyFilter(term: FilterRequest): Promise<void> {
    return this.track(async () => {
      this.applyView(await this.api.pushFilter(this.requireSession(), term));
    });
  }

  goBack(): Promise<void> {
    if (this.view === null || this.view.stack.length === 0) {
      // The control is disabled in this state; a stray call stays local
      // instead of asking the service for a guaranteed conflict.
      return Promise.resolve();
    }
    return this.track(async () => {
      this.applyView(await this.api.popFilter(this.requireSession()));
    });
  }

  clearAll(): Promise<void> {
    return this.track(async () => {
      this.applyView(await this.api.clearFilters(this.requireSession()));
    });
  }

  openFacet(errorKind: string): Promise<void> {
    const detail = this.detail;
    if (detail === null) {
      return Promise.resolve();
    }
    return this.applyFilter({ variant_id: detail.variant_id, error_kind: errorKind });
  }

  /** Fetch another page of the current detail scope; aggregates stay put. */
  loadPage(page: number): Promise<void> {
    const detail = this.detail;
    if (detail === null) {
      return Promise.resolve();
    }
    return this.track(async () => {
      this.detail = await this.api.getSubmissions(this.requireSession(), detail.variant_id, {
        errorKind: detail.error_kind,
        page,
      });
    });
  }

  /** Expansion is pure presentation state; no request is made. */
  toggleStep(step: number): void {
    if (this.expanded.has(step)) {
      this.expanded.delete(step);
    } else {
      this.expanded.add(step);
    }
    this.render();
  }

  private applyView(view: ViewPayload): void {
    this.view = view;
    this.detail = view.detail;
  }

  private requireSession(): string {
    if (this.sid === null) {
      throw new Error("no active session");
    }
    return this.sid;
  }

  private track(fn: () => Promise<void>): Promise<void> {
    if (this.pending !== null) {
      // One request at a time: interactions during a flight are dropped,
      // not queued, so the screen always matches the answered request.
      return Promise.resolve();
    }
    let settled = false;
    const run = (async () => {
      this.errorText = "";
      try {
        await fn();
      } catch (err) {
        if (err instanceof ApiError) {
          this.errorText = err.detail;
        } else {
          throw err;
        }
      } finally {
        settled = true;
        this.pending = null;
        this.render();
      }
    })();
    if (!settled) {
      this.pending = run;
      this.render();
    }
    return run;
  }

  private buildSkeleton(): void {
    const doc = this.root.ownerDocument;
    this.root.textContent = "";

    const bar = doc.createElement("header");
    bar.className = "topbar";
    const title = doc.createElement("h1");
    title.textContent = "flowlens";
    bar.appendChild(title);

    this.countsEl = doc.createElement("span");
    this.countsEl.className = "counts";
    bar.appendChild(this.countsEl);

    this.crumbsEl = doc.createElement("span");
    this.crumbsEl.className = "stack-crumbs";
    bar.appendChild(this.crumbsEl);

    this.backBtn = doc.createElement("button");
    this.backBtn.type = "button";
    this.backBtn.className = "btn-back";
    this.backBtn.textContent = "Go Back";
    this.backBtn.addEventListener("click", () => {
      void this.goBack();
    });
    bar.appendChild(this.backBtn);

    this.clearBtn = doc.createElement("button");
    this.clearBtn.type = "button";
    this.clearBtn.className = "btn-clear";
    this.clearBtn.textContent = "Clear";
    this.clearBtn.addEventListener("click", () => {
      void this.clearAll();
    });
    bar.appendChild(this.clearBtn);

    this.statusEl = doc.createElement("span");
    this.statusEl.className = "status";
    bar.appendChild(this.statusEl);

    this.errorEl = doc.createElement("span");
    this.errorEl.className = "error";
    this.errorEl.setAttribute("role", "alert");
    bar.appendChild(this.errorEl);
    this.root.appendChild(bar);

    const main = doc.createElement("main");
    this.flowEl = this.addPanel(doc, main, "Flow", "flow");
    this.histEl = this.addPanel(doc, main, "Histogram", "histogram");
    this.detailEl = this.addPanel(doc, main, "Submissions", "detail");
    this.root.appendChild(main);
  }

  private addPanel(doc: Document, main: HTMLElement, label: string, cls: string): HTMLElement {
    const section = doc.createElement("section");
    section.className = `panel panel-${cls}`;
    const heading = doc.createElement("h2");
    heading.textContent = label;
    section.appendChild(heading);
    const body = doc.createElement("div");
    body.className = cls;
    section.appendChild(body);
    main.appendChild(section);
    return body;
  }

  private render(): void {
    const busy = this.pending !== null;
    const view = this.view;
    this.root.dataset.busy = String(busy);
    this.statusEl.textContent = busy ? "loading" : "ready";
    this.errorEl.textContent = this.errorText;

    if (view === null) {
      this.countsEl.textContent = "";
      this.crumbsEl.textContent = "";
      this.backBtn.disabled = true;
      this.clearBtn.disabled = true;
      return;
    }

    this.countsEl.textContent =
      `${view.active_submissions} of ${view.total_submissions} submissions`;
    this.countsEl.dataset.active = String(view.active_submissions);
    this.countsEl.dataset.total = String(view.total_submissions);
    this.crumbsEl.textContent = view.stack.map(formatTerm).join(" > ");
    this.crumbsEl.dataset.depth = String(view.stack.length);
    this.backBtn.disabled = busy || view.stack.length === 0;
    this.clearBtn.disabled = busy || view.stack.length === 0;

    renderFlowView(this.flowEl, view, {
      isExpanded: (step) => this.expanded.has(step),
      onToggle: (step) => this.toggleStep(step),
      onVariant: (variantId) => {
        void this.applyFilter({ variant_id: variantId });
      },
    });
    renderHistogramView(this.histEl, view, {
      onVariant: (variantId) => {
        void this.applyFilter({ variant_id: variantId });
      },
    });
    renderDetailView(this.detailEl, view, this.detail, {
      onFacet: (kind) => {
        void this.openFacet(kind);
      },
      onPage: (page) => {
        void this.loadPage(page);
      },
    });

    if (busy) {
      for (const el of Array.from(this.root.querySelectorAll("button"))) {
        (el as HTMLButtonElement).disabled = true;
      }
    }
  }
}

function formatTerm(term: { variant_id: string; error_kind: string | null }): string {
  return term.error_kind === null ? term.variant_id : `${term.variant_id}:${term.error_kind}`;
}
