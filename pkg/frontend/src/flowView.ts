import type { StepAggregate, ViewPayload } from "./types.js";

export interface FlowHandlers {
  isExpanded(step: number): boolean;
  onToggle(step: number): void;
  onVariant(variantId: string): void;
}

/**
 * The flow view: one row per mined step, in payload order.  Each row shows
 * the step's representative line on the server-assigned background color,
 * with an expand control on the left.  Expanding reveals the variants
 * grouped under the step; clicking a variant asks the app to filter on it.
 */
export function renderFlowView(
  container: HTMLElement,
  view: ViewPayload,
  handlers: FlowHandlers,
): void {
  const doc = container.ownerDocument;
  container.textContent = "";
  for (const step of view.steps) {
    container.appendChild(renderRow(doc, step, handlers));
  }
}

function renderRow(doc: Document, step: StepAggregate, handlers: FlowHandlers): HTMLElement {
  const row = doc.createElement("div");
  row.className = "flow-row";
  row.dataset.step = String(step.step);

  const head = doc.createElement("div");
  head.className = "flow-head";

  const expanded = handlers.isExpanded(step.step);
  const toggle = doc.createElement("button");
  toggle.type = "button";
  toggle.className = "flow-toggle";
  toggle.textContent = expanded ? "-" : "+";
  toggle.setAttribute("aria-expanded", String(expanded));
  toggle.addEventListener("click", () => handlers.onToggle(step.step));
  head.appendChild(toggle);

  const line = doc.createElement("span");
  line.className = "flow-line";
  line.textContent = step.display_label;
  line.style.backgroundColor = step.color;
  line.dataset.color = step.color;
  head.appendChild(line);

  row.appendChild(head);
  if (expanded) {
    row.appendChild(renderVariants(doc, step, handlers));
  }
  return row;
}

function renderVariants(doc: Document, step: StepAggregate, handlers: FlowHandlers): HTMLElement {
  const list = doc.createElement("ul");
  list.className = "variant-list";
  for (const variant of step.variants) {
    const item = doc.createElement("li");
    const button = doc.createElement("button");
    button.type = "button";
    button.className = "variant-button";
    button.dataset.variantId = variant.variant_id;
    button.textContent =
      `${variant.display_text} (${variant.correct_count} ok / ${variant.incorrect_count} wrong)`;
    button.addEventListener("click", () => handlers.onVariant(variant.variant_id));
    item.appendChild(button);
    list.appendChild(item);
  }
  return list;
}
