import type {
  SubmissionEntry,
  SubmissionPage,
  VariantAggregate,
  ViewPayload,
} from "./types.js";

export interface DetailHandlers {
  onFacet(errorKind: string): void;
  onPage(page: number): void;
}

/** Find the aggregate entry for the variant a detail page is scoped to. */
export function findVariant(view: ViewPayload, variantId: string): VariantAggregate | null {
  for (const step of view.steps) {
    for (const variant of step.variants) {
      if (variant.variant_id === variantId) {
        return variant;
      }
    }
  }
  return null;
}

/**
 * The detail view: error-kind facet chips for the active variant, then the
 * current page of matching submissions with the variant's lines
 * highlighted, then pager controls.  Facet counts come straight from the
 * variant aggregate in the view payload; page members come from the page
 * payload.  Nothing is recounted locally.
 */
export function renderDetailView(
  container: HTMLElement,
  view: ViewPayload,
  page: SubmissionPage | null,
  handlers: DetailHandlers,
): void {
  const doc = container.ownerDocument;
  container.textContent = "";
  if (page === null) {
    const hint = doc.createElement("p");
    hint.className = "detail-empty";
    hint.textContent = "Click a variant or a histogram segment to inspect submissions.";
    container.appendChild(hint);
    return;
  }

  container.appendChild(renderHeader(doc, page));
  const variant = findVariant(view, page.variant_id);
  if (variant !== null) {
    container.appendChild(renderFacets(doc, page, variant, handlers));
  }
  const list = doc.createElement("div");
  list.className = "submission-list";
  for (const entry of page.entries) {
    list.appendChild(renderEntry(doc, entry));
  }
  container.appendChild(list);
  container.appendChild(renderPager(doc, page, handlers));
}

function renderHeader(doc: Document, page: SubmissionPage): HTMLElement {
  const head = doc.createElement("div");
  head.className = "detail-head";

  const title = doc.createElement("span");
  title.className = "detail-title";
  title.textContent =
    page.error_kind === null
      ? `Variant ${page.variant_id}`
      : `Variant ${page.variant_id}, ${page.error_kind}`;
  head.appendChild(title);

  const total = doc.createElement("span");
  total.className = "detail-total";
  total.dataset.totalMatches = String(page.total_matches);
  total.textContent = `${page.total_matches} matching submissions`;
  head.appendChild(total);
  return head;
}

function renderFacets(
  doc: Document,
  page: SubmissionPage,
  variant: VariantAggregate,
  handlers: DetailHandlers,
): HTMLElement {
  const bar = doc.createElement("div");
  bar.className = "facet-bar";
  for (const kind of Object.keys(variant.error_facets).sort()) {
    const count = variant.error_facets[kind];
    const chip = doc.createElement("button");
    chip.type = "button";
    chip.className = "facet-chip";
    chip.dataset.kind = kind;
    chip.dataset.count = String(count);
    chip.textContent = `${kind} (${count})`;
    chip.disabled = page.error_kind === kind;
    chip.addEventListener("click", () => handlers.onFacet(kind));
    bar.appendChild(chip);
  }
  return bar;
}

function renderEntry(doc: Document, entry: SubmissionEntry): HTMLElement {
  const card = doc.createElement("article");
  card.className = "submission";
  card.dataset.submissionId = entry.submission_id;

  const head = doc.createElement("header");
  head.className = "submission-head";
  const name = doc.createElement("span");
  name.className = "submission-id";
  name.textContent = entry.submission_id;
  head.appendChild(name);
  const status = doc.createElement("span");
  status.className = entry.passed ? "status status-passed" : "status status-failed";
  status.textContent = entry.passed ? "passed" : "failed";
  head.appendChild(status);
  card.appendChild(head);

  const code = doc.createElement("pre");
  code.className = "submission-code";
  for (const line of entry.lines) {
    const el = doc.createElement("div");
    el.className = line.matched ? "code-line matched" : "code-line";
    el.dataset.matched = String(line.matched);
    el.textContent = line.text;
    code.appendChild(el);
  }
  card.appendChild(code);
  return card;
}

function renderPager(doc: Document, page: SubmissionPage, handlers: DetailHandlers): HTMLElement {
  const pager = doc.createElement("div");
  pager.className = "pager";

  const prev = doc.createElement("button");
  prev.type = "button";
  prev.className = "pager-prev";
  prev.textContent = "prev";
  prev.disabled = page.page <= 1;
  prev.addEventListener("click", () => handlers.onPage(page.page - 1));
  pager.appendChild(prev);

  const label = doc.createElement("span");
  label.className = "pager-label";
  label.textContent = `page ${page.page} of ${page.page_count}`;
  pager.appendChild(label);

  const next = doc.createElement("button");
  next.type = "button";
  next.className = "pager-next";
  next.textContent = "next";
  next.disabled = page.page >= page.page_count;
  next.addEventListener("click", () => handlers.onPage(page.page + 1));
  pager.appendChild(next);
  return pager;
}
