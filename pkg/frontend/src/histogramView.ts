import type { StepAggregate, VariantAggregate, ViewPayload } from "./types.js";

export interface HistogramHandlers {
  onVariant(variantId: string): void;
}

/**
 * The histogram view: a stacked bar per step, flanked by the correct count
 * on the left and the incorrect count on the right.  The bar holds one
 * green segment per variant for its correct occurrences followed by one red
 * segment per variant for its incorrect ones, each sized proportionally to
 * its count.  Clicking any segment filters to that variant.
 */
export function renderHistogramView(
  container: HTMLElement,
  view: ViewPayload,
  handlers: HistogramHandlers,
): void {
  const doc = container.ownerDocument;
  container.textContent = "";
  let maxLines = 1;
  for (const step of view.steps) {
    maxLines = Math.max(maxLines, step.member_lines);
  }
  for (const step of view.steps) {
    container.appendChild(renderBar(doc, step, maxLines, handlers));
  }
}

function renderBar(
  doc: Document,
  step: StepAggregate,
  maxLines: number,
  handlers: HistogramHandlers,
): HTMLElement {
  const row = doc.createElement("div");
  row.className = "hist-row";
  row.dataset.step = String(step.step);

  const correct = doc.createElement("span");
  correct.className = "hist-count hist-count-correct";
  correct.textContent = String(step.correct_count);
  row.appendChild(correct);

  const bar = doc.createElement("div");
  bar.className = "hist-bar";
  bar.style.width = percent(step.member_lines, maxLines);
  for (const variant of step.variants) {
    if (variant.correct_count > 0) {
      bar.appendChild(segment(doc, variant, "correct", step.member_lines, handlers));
    }
  }
  for (const variant of step.variants) {
    if (variant.incorrect_count > 0) {
      bar.appendChild(segment(doc, variant, "incorrect", step.member_lines, handlers));
    }
  }
  row.appendChild(bar);

  const incorrect = doc.createElement("span");
  incorrect.className = "hist-count hist-count-incorrect";
  incorrect.textContent = String(step.incorrect_count);
  row.appendChild(incorrect);
  return row;
}

function segment(
  doc: Document,
  variant: VariantAggregate,
  kind: "correct" | "incorrect",
  memberLines: number,
  handlers: HistogramHandlers,
): HTMLElement {
  const count = kind === "correct" ? variant.correct_count : variant.incorrect_count;
  const seg = doc.createElement("button");
  seg.type = "button";
  seg.className = `hist-segment hist-${kind}`;
  seg.dataset.variantId = variant.variant_id;
  seg.dataset.count = String(count);
  seg.style.width = percent(count, memberLines);
  seg.title = `${variant.display_text}: ${count} ${kind}`;
  seg.addEventListener("click", () => handlers.onVariant(variant.variant_id));
  return seg;
}

function percent(part: number, whole: number): string {
  return `${(100 * part) / Math.max(1, whole)}%`;
}
