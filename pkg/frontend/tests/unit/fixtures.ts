import type {
  StepAggregate,
  SubmissionEntry,
  SubmissionPage,
  VariantAggregate,
  ViewPayload,
} from "../../src/types.js";

export function makeVariant(
  id: string,
  overrides: Partial<VariantAggregate> = {},
): VariantAggregate {
  return {
    variant_id: id,
    display_text: `line for ${id}`,
    correct_count: 10,
    incorrect_count: 2,
    submission_count: 12,
    error_facets: {},
    ...overrides,
  };
}

export function makeStep(
  step: number,
  variants: VariantAggregate[],
  overrides: Partial<StepAggregate> = {},
): StepAggregate {
  let correct = 0;
  let incorrect = 0;
  for (const v of variants) {
    correct += v.correct_count;
    incorrect += v.incorrect_count;
  }
  return {
    step,
    display_label: `label ${step}`,
    member_lines: correct + incorrect,
    correct_count: correct,
    incorrect_count: incorrect,
    ratio: correct / Math.max(1, correct + incorrect),
    color: "#5F7639",
    color_rgb: [95, 118, 57],
    variants,
    ...overrides,
  };
}

export function makeView(overrides: Partial<ViewPayload> = {}): ViewPayload {
  return {
    steps: [
      makeStep(0, [makeVariant("t0v0", { error_facets: { LogicalError: 2 } })]),
      makeStep(1, [
        makeVariant("t1v0", { correct_count: 8, incorrect_count: 1 }),
        makeVariant("t1v1", {
          correct_count: 3,
          incorrect_count: 4,
          error_facets: { LogicalError: 3, RuntimeError: 1 },
        }),
      ]),
      makeStep(2, [makeVariant("t2v0", { incorrect_count: 0 })]),
    ],
    stack: [],
    active_submissions: 24,
    total_submissions: 24,
    detail: null,
    session_id: "a".repeat(32),
    analysis_hash: "b".repeat(64),
    ...overrides,
  };
}

export function makeEntry(
  id: string,
  overrides: Partial<SubmissionEntry> = {},
): SubmissionEntry {
  return {
    submission_id: id,
    passed: true,
    source: "v0 = int(input())\nprint(v0)",
    lines: [
      {
        index: 0,
        text: "v0 = int(input())",
        raw_start: 0,
        raw_end: 0,
        step: 0,
        tag: 0,
        variant_id: "t0v0",
        label_class: "Correct",
        label_kind: "",
        matched: true,
      },
      {
        index: 1,
        text: "print(v0)",
        raw_start: 1,
        raw_end: 1,
        step: null,
        tag: 1,
        variant_id: "t1v0",
        label_class: "Correct",
        label_kind: "",
        matched: false,
      },
    ],
    ...overrides,
  };
}

export function makePage(overrides: Partial<SubmissionPage> = {}): SubmissionPage {
  return {
    variant_id: "t0v0",
    error_kind: null,
    page: 1,
    page_size: 50,
    total_matches: 2,
    page_count: 1,
    entries: [makeEntry("s00"), makeEntry("s01", { passed: false })],
    ...overrides,
  };
}
