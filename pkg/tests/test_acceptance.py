"""Top-level acceptance gate.

One test per criterion; each reports an ACCEPTANCE <name>: PASS/FAIL line
through the terminal reporter (see conftest). These tests deliberately lean
on the independent reference implementations in oracles.py rather than on
unit-test fixtures, and they run the real CLI where the criterion is about
operator-visible behavior.
"""

import json
import random
import resource
import time
from pathlib import Path

import numpy as np
import pytest

from flowlens import aggregate, align, analysis, cli, kernels, label
from flowlens.aggregate import FilterTerm, LineFacts, ViewIndex
from flowlens.config import ViewConfig
from flowlens.errors import ConfigError
from flowlens.corpus import Submission

import oracles
from conftest import build_index, make_cfg, structured_records, synth_records, \
    synth_source, write_jsonl, mock_chat_client
from test_normalize import alpha_mutate, norm

GOLDEN = json.loads(
    (Path(__file__).parent / "data" / "normalize_golden.json").read_text()
)

KINDS = (
    "SyntaxError",
    "IndentationError",
    "TypeError",
    "NameError",
    "ValueError",
    "ZeroDivisionError",
    "IndexError",
    "KeyError",
    "LogicalError",
)


# --------------------------------------------------------------------------
# corpora
# --------------------------------------------------------------------------

_FILLER = (
    "{a} = {b} + {c}",
    "{a} = {b} * 2",
    "{a} = {b} - 1",
    "{a} = []",
    "for {b} in range({a}):",
    "    {c} = {c} + {b}",
    "if {a} > {b}:",
    "    {a} = {b}",
    "{a}.append({b})",
    "{a} = len({b})",
    "{a} = max({b}, {c})",
    "{a} = str({b})",
)

_NAMES = ("a", "b", "c", "n", "m", "k", "x", "y", "total", "count", "result")


def scale_records(seed, count):
    """Exercise-shaped synthetic corpus: everyone reads input the same way,
    a few common second moves, then bodies diverge. 3 to 15 source lines."""
    rng = random.Random(seed)
    second = ("{b} = int(input())", "{b} = input().split()", "{b} = 0")
    records = []
    for i in range(count):
        names = rng.sample(_NAMES, 3)
        n_lines = rng.randint(3, 15)
        lines = [f"{names[0]} = int(input())"]
        if n_lines >= 4:
            roll = rng.random()
            pick = second[0] if roll < 0.55 else second[1] if roll < 0.85 else second[2]
            lines.append(pick.format(b=names[1]))
        while len(lines) < n_lines - 1:
            lines.append(
                rng.choice(_FILLER).format(a=names[0], b=names[1], c=names[2])
            )
            rng.shuffle(names)
        lines.append(f"print({names[0]})")
        records.append(
            {
                "id": f"sub{i:05d}",
                "source": "\n".join(lines),
                "passed": rng.random() < 0.55,
                "meta": {},
            }
        )
    return records


def planted_defect_records():
    """Passed submissions share one program (alpha-renamed); every failed
    submission replaces exactly one statement with a line seen nowhere else,
    keeping the identifier it defines so the other lines normalize as in the
    passed copies. Returns (records, {submission_id: planted line index})."""
    base_lines = [
        "a = int(input())",
        "b = int(input())",
        "c = a + b",
        "d = c - a",
        "print(d)",
    ]
    base = "\n".join(base_lines)
    rng = random.Random(5150)
    records = []
    for i in range(40):
        source = base if i % 3 == 0 else alpha_mutate(base, rng)
        records.append({"id": f"ok{i:03d}", "source": source, "passed": True})
    planted = {}
    for i in range(25):
        idx = rng.randrange(4)
        name = base_lines[idx].split(" ", 1)[0]
        wrong = f'{name} = ord("{chr(ord("A") + i)}") % {i + 2}'
        lines = list(base_lines)
        lines[idx] = wrong
        sub_id = f"bad{i:03d}"
        planted[sub_id] = idx
        records.append({"id": sub_id, "source": "\n".join(lines), "passed": False})
    return records, planted


def run_analyze(tmp_path, records, name="run"):
    """Drive the real CLI; returns (exit_code, out_path)."""
    from conftest import write_config

    input_path = tmp_path / f"{name}.jsonl"
    write_jsonl(input_path, records)
    config_path = write_config(tmp_path / f"{name}.yaml")
    out_path = tmp_path / f"{name}.json"
    code = cli.main(
        ["analyze", "--input", str(input_path), "--config", config_path,
         "--out", str(out_path)]
    )
    return code, out_path


@pytest.fixture(scope="module")
def corpus_docs(tmp_path_factory):
    """Every analysis this gate produces, for the conservation sweep."""
    docs = {}
    docs["structured"] = build_index(structured_records())[1]
    records = synth_records(101, 60, max_lines=10)
    records[0]["passed"] = True
    docs["mixed"] = build_index(records)[1]
    all_passed = [dict(rec, passed=True) for rec in synth_records(202, 40, max_lines=6)]
    docs["all_passed"] = build_index(all_passed)[1]
    docs["planted"] = build_index(planted_defect_records()[0])[1]
    return docs


# --------------------------------------------------------------------------
# criteria
# --------------------------------------------------------------------------

@pytest.mark.acceptance("Scale")
def test_scale_3500_submissions(tmp_path):
    records = scale_records(7, 3500)
    assert len(records) == 3500
    assert all(3 <= len(r["source"].splitlines()) <= 15 for r in records)
    start = time.monotonic()
    code, out_path = run_analyze(tmp_path, records, "scale")
    elapsed = time.monotonic() - start
    peak_bytes = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss * 1024
    assert code == 0
    assert elapsed < 60.0, f"analyze took {elapsed:.1f}s"
    assert peak_bytes < 1_000_000_000, f"peak rss {peak_bytes / 1e6:.0f} MB"
    doc, _ = analysis.load_document(str(out_path))
    assert len(doc["steps"]) >= 1
    assert len(doc["submissions"]) == 3500


@pytest.mark.acceptance("Determinism")
def test_reruns_byte_identical(tmp_path):
    records = scale_records(11, 500)
    code_a, path_a = run_analyze(tmp_path, records, "first")
    code_b, path_b = run_analyze(tmp_path, records, "second")
    assert code_a == code_b == 0
    blob_a = path_a.read_bytes()
    assert blob_a == path_b.read_bytes()
    assert len(blob_a) > 1000


@pytest.mark.acceptance("LCS oracle")
def test_alignment_agrees_with_oracles():
    rng = random.Random(1311)
    mismatches = 0
    for _ in range(10_000):
        a = [rng.randrange(8) for _ in range(rng.randint(0, 12))]
        b = [rng.randrange(8) for _ in range(rng.randint(0, 12))]
        got = kernels.lcs_leftmost(
            np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64)
        )
        if [tuple(p) for p in got] != [tuple(p) for p in oracles.lcs_exhaustive(a, b)]:
            mismatches += 1
    for _ in range(1_000):
        a = [rng.randrange(8) for _ in range(rng.randint(0, 40))]
        b = [rng.randrange(8) for _ in range(rng.randint(0, 40))]
        got = kernels.lcs_leftmost(
            np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64)
        )
        if [tuple(p) for p in got] != oracles.lcs_reference_dp(a, b):
            mismatches += 1
    assert mismatches == 0


@pytest.mark.acceptance("Progression oracle")
def test_progression_agrees_with_oracle():
    rng = random.Random(4242)
    mismatches = 0
    for _ in range(100):
        sequences = [
            [rng.randrange(6) for _ in range(rng.randint(0, 12))]
            for _ in range(rng.randint(1, 25))
        ]
        alpha = rng.choice((0.2, 0.3, 0.4, 0.6))
        beta = rng.choice((0.1, 0.2, 0.3, 0.5))
        got = align.mine_progression(sequences, alpha, beta)
        want_steps, want_agreement = oracles.mine_progression_reference(
            sequences, alpha, beta
        )
        if list(got.step_tags) != want_steps or list(got.agreement) != want_agreement:
            mismatches += 1
    assert mismatches == 0


def random_view_index(rng):
    n_tags = rng.randint(1, 4)
    variants = []
    for tag in range(n_tags):
        for v in range(rng.randint(1, 3)):
            variants.append((tag, f"t{tag}v{v}"))
    step_tags = tuple(t for t in range(n_tags) if rng.random() < 0.8)
    sub_ids = [f"s{i:02d}" for i in range(rng.randint(3, 12))]
    facts = []
    passed = {}
    sources = {}
    for sub_id in sub_ids:
        passed[sub_id] = rng.random() < 0.5
        sources[sub_id] = f"code of {sub_id}"
        for index in range(rng.randint(1, 6)):
            tag, variant_id = rng.choice(variants)
            correct = passed[sub_id] or rng.random() < 0.5
            cls = "Correct" if correct else rng.choice(("Syntax", "Runtime", "Semantic"))
            kind = "" if correct else rng.choice(KINDS[:5])
            step = rng.randrange(len(step_tags)) if step_tags and rng.random() < 0.7 else None
            facts.append(
                LineFacts(sub_id, index, f"{variant_id} text", index, index,
                          step, tag, variant_id, cls, kind)
            )
    return ViewIndex(
        line_facts=facts,
        submission_ids=sub_ids,
        passed=passed,
        sources=sources,
        step_tags=step_tags,
        tag_labels={t: f"role {t}" for t in range(n_tags)},
        variant_display={vid: f"{vid} text" for _, vid in variants},
        view_cfg=ViewConfig(),
    )


@pytest.mark.acceptance("Filter oracle")
def test_filters_agree_with_linear_scan():
    rng = random.Random(9090)
    mismatches = 0
    for _ in range(100):
        index = random_view_index(rng)
        variant_ids = sorted(index.subs_with_variant)
        kinds = sorted(index.known_kinds)
        by_sub = {sub_id: [] for sub_id in index.submission_ids}
        for facts in index.line_facts:
            by_sub[facts.submission_id].append((facts.variant_id, facts.label_kind))
        for _ in range(5):
            stack = tuple(
                FilterTerm(
                    rng.choice(variant_ids),
                    rng.choice(kinds) if kinds and rng.random() < 0.5 else None,
                )
                for _ in range(rng.randint(0, 3))
            )
            want = oracles.active_set_reference(
                by_sub, [(t.variant_id, t.error_kind) for t in stack]
            )
            if index.active_set(stack) != want:
                mismatches += 1

        # push/pop/clear round-trips land back on the initial view model
        initial = index.build_view(())
        stack = ()
        terms = [FilterTerm(rng.choice(variant_ids)) for _ in range(rng.randint(1, 3))]
        for term in terms:
            stack, _ = aggregate.push_filter(index, stack, term)
        view = None
        for _ in terms:
            stack, view = aggregate.pop_filter(index, stack)
        if stack != () or view != initial:
            mismatches += 1
        stack, _ = aggregate.push_filter(index, (), terms[0])
        stack, view = aggregate.clear_filters(index, stack)
        if stack != () or view != initial:
            mismatches += 1
    assert mismatches == 0


def check_document_conservation(doc):
    for step in doc["steps"]:
        assert step["correct_count"] + step["incorrect_count"] == step["member_lines"]
        assert 0.0 <= step["ratio"] <= 1.0
        assert sum(v["correct_count"] + v["incorrect_count"] for v in step["variants"]) \
            == step["member_lines"]
        for variant in step["variants"]:
            for count in variant["error_facets"].values():
                assert 1 <= count <= variant["submission_count"]
    for sub in doc["submissions"]:
        rows = doc["labels"][sub["id"]]
        assert [r["index"] for r in rows] == [line["index"] for line in sub["lines"]]
        if sub["passed"]:
            assert all(r["class"] == "Correct" for r in rows)


@pytest.mark.acceptance("Conservation")
def test_counts_conserved_on_every_analysis(corpus_docs):
    rng = random.Random(7171)
    for doc in corpus_docs.values():
        check_document_conservation(doc)
        # the same holds for filtered snapshots the UI would see
        index = analysis.index_from_document(doc)
        variant_ids = sorted(index.subs_with_variant)
        for _ in range(5):
            stack = tuple(
                FilterTerm(rng.choice(variant_ids))
                for _ in range(rng.randint(1, 2))
            )
            view = index.build_view(stack)
            for step in view.steps:
                assert step.correct_count + step.incorrect_count == step.member_lines
                assert sum(v.member_lines for v in step.variants) == step.member_lines
                for variant in step.variants:
                    for count in variant.error_facets.values():
                        assert 1 <= count <= variant.submission_count


@pytest.mark.acceptance("Clustering laws")
def test_cluster_assignment_laws(corpus_docs):
    for doc in corpus_docs.values():
        seen = {}
        for sub in doc["submissions"]:
            for line in sub["lines"]:
                key = line["text"]
                assignment = (line["tag"], line["variant_id"])
                assert seen.setdefault(key, assignment) == assignment
                # variants refine tags: the id names its parent tag
                assert line["variant_id"].startswith(f"t{line['tag']}v")
        for row in doc["clusters"]["distinct_lines"]:
            assert row["variant_id"].startswith(f"t{row['tag']}v")
    with pytest.raises(ConfigError):
        make_cfg(cluster={"theta_fine": 0.25})  # equal to theta_coarse
    with pytest.raises(ConfigError):
        make_cfg(cluster={"theta_fine": 0.30})


@pytest.mark.acceptance("Normalization")
def test_normalization_invariants_on_mutated_programs():
    rng = random.Random(6006)
    violations = 0
    for _ in range(1_000):
        source = synth_source(rng, rng.randint(1, 12))
        base = [(l.text, l.kind) for l in norm(source)]
        renamed = [(l.text, l.kind) for l in norm(alpha_mutate(source, rng))]
        if renamed != base:
            violations += 1
        rendered = "\n".join(text for text, _ in base)
        again = [(l.text, l.kind) for l in norm(rendered)]
        if again != base:
            violations += 1
    assert violations == 0
    for case in GOLDEN:
        lines = norm(
            case["source"],
            allowlist=case.get("allowlist", ()),
            output_functions=case.get("output_functions", ("print",)),
        )
        assert [[l.text, l.kind] for l in lines] == case["expected"], case["name"]
    assert len(GOLDEN) == 30


@pytest.mark.acceptance("Labeler parser")
def test_error_report_grammar_round_trip():
    rng = random.Random(8008)
    words = ("object", "is", "not", "callable", "before", "assignment", "bad",
             "operand", "loop", "index")
    for trial in range(200):
        records = []
        for _ in range(rng.randint(1, 7)):
            message = " ".join(rng.sample(words, rng.randint(2, 5)))
            records.append(
                (rng.randrange(30), rng.choice(KINDS), message, "x = y + 1")
            )
        text = label.render_llm_output(records)
        if trial % 3 == 0:
            text = f"Looking at the code:\n```\n{text}\n```\nThat is all."
        parsed = label.parse_llm_output(text)
        assert parsed == [(line, kind, msg) for line, kind, msg, _ in records]

    # the 7-record cap
    source = "\n".join(f"x{i} = {i}" for i in range(12))
    sub = Submission(id="cap", source=source, passed=False, meta={})
    lines = norm(source)
    reply = label.render_llm_output(
        [(i, "TypeError", f"problem {i}", f"x{i} = {i}") for i in range(10)]
    )
    client, _ = mock_chat_client(reply_fn=lambda prompt: reply)
    backend = label.ChatBackend("http://chat.test", client=client)
    report = label.LabelerReport(sub.id)
    labels = label.label_llm(
        sub, lines, backend, label.load_prompt_template(), report=report
    )
    flagged = [l for l in labels if l.cls != "Correct"]
    assert len(flagged) == 7
    assert [l.index for l in flagged] == list(range(7))
    assert any("cap" in w for w in report.warnings)

    # raw line numbers count from 0 and map through the raw spans
    source = "# read the input\nx = 1\n\ny = x + 2"
    sub = Submission(id="map", source=source, passed=False, meta={})
    lines = norm(source)
    assert [l.raw_span for l in lines] == [(1, 1), (3, 3)]
    reply = label.render_llm_output(
        [
            (3, "TypeError", "bad add", "y = x + 2"),
            (0, "NameError", "ghost", "# read the input"),
        ]
    )
    client, _ = mock_chat_client(reply_fn=lambda prompt: reply)
    backend = label.ChatBackend("http://chat.test", client=client)
    report = label.LabelerReport(sub.id)
    labels = label.label_llm(
        sub, lines, backend, label.load_prompt_template(), report=report
    )
    assert [(l.index, l.cls, l.kind) for l in labels] == [
        (0, "Correct", ""),
        (1, "Runtime", "TypeError"),
    ]
    assert any("0" in w for w in report.warnings)  # the comment line is unmappable


@pytest.mark.acceptance("Divergence labeler")
def test_divergence_flags_exactly_planted_lines(corpus_docs):
    _, planted = planted_defect_records()
    doc = corpus_docs["planted"]
    flagged = set()
    for sub in doc["submissions"]:
        for row in doc["labels"][sub["id"]]:
            if row["class"] != "Correct":
                assert row["source"] == "divergence"
                flagged.add((sub["id"], row["index"]))
    expected = {(sub_id, idx) for sub_id, idx in planted.items()}
    true_hits = len(flagged & expected)
    precision = true_hits / len(flagged)
    recall = true_hits / len(expected)
    assert precision == 1.0
    assert recall == 1.0


@pytest.mark.acceptance("Color")
def test_color_endpoints_and_monotonicity():
    red = aggregate.parse_hex_color("#D32F2F")
    green = aggregate.parse_hex_color("#388E3C")
    assert aggregate.ratio_color(0.0, "#D32F2F", "#388E3C") == red
    assert aggregate.ratio_color(1.0, "#D32F2F", "#388E3C") == green
    previous = None
    for i in range(1001):
        color = aggregate.ratio_color(i / 1000, "#D32F2F", "#388E3C")
        assert all(0 <= channel <= 255 for channel in color)
        if previous is not None:
            for prev_c, cur_c, lo, hi in zip(previous, color, red, green):
                if hi >= lo:
                    assert cur_c >= prev_c
                else:
                    assert cur_c <= prev_c
        previous = color
