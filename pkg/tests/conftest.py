import hashlib
import json
import random

import httpx
import numpy as np
import pytest

from flowlens import config as config_mod
from flowlens.corpus import Corpus, Submission


def pytest_configure(config):
    config.addinivalue_line(
        "markers",
        "acceptance(name): top-level acceptance criterion; one PASS/FAIL line each",
    )


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when != "call":
        return
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    reporter = item.config.pluginmanager.get_plugin("terminalreporter")
    if reporter is not None:
        status = "PASS" if report.passed else "FAIL"
        reporter.write_line(f"ACCEPTANCE {marker.args[0]}: {status}")


def make_cfg(**sections) -> config_mod.Config:
    base = {
        "corpus": {
            "exercise_id": "ex-test",
            "prompt_text": "Read two integers and print their sum.",
            "input_example": "1 2",
            "output_example": "3",
        }
    }
    for name, values in sections.items():
        base.setdefault(name, {}).update(values)
    return config_mod.from_mapping(base)


@pytest.fixture
def cfg():
    return make_cfg()


def make_corpus(sources_passed, exercise_id="ex-test"):
    """Build a corpus from [(source, passed), ...] with ids s0, s1, ..."""
    subs = tuple(
        Submission(id=f"s{i}", source=src, passed=passed, meta={})
        for i, (src, passed) in enumerate(sources_passed)
    )
    return Corpus(exercise_id=exercise_id, prompt_text="test prompt", submissions=subs)


def write_jsonl(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec) + "\n")


def write_config(path, **sections):
    """Write a YAML run config built on the same base mapping as make_cfg."""
    import yaml

    base = {
        "corpus": {
            "exercise_id": "ex-test",
            "prompt_text": "Read two integers and print their sum.",
            "input_example": "1 2",
            "output_example": "3",
        }
    }
    for name, values in sections.items():
        base.setdefault(name, {}).update(values)
    with open(path, "w", encoding="utf-8") as fh:
        yaml.safe_dump(base, fh, sort_keys=True)
    return str(path)


def structured_records():
    """A corpus with a clear progression, shared variants, and error facets.

    Passed submissions agree on a three-statement shape (two alpha-equivalent
    spellings). Some failures reuse the common lines verbatim (labeled as
    whole-submission semantic failures, so facets land on step variants);
    others plant a novel wrong line.
    """
    canonical = "a = int(input())\nb = int(input())\nc = a + b\nprint(c)"
    renamed = "x = int(input())\ny = int(input())\ntotal = x + y\nprint(total)"
    wrong = "a = int(input())\nb = int(input())\nc = a - b\nprint(c)"
    records = []
    for i in range(14):
        source = canonical if i % 2 == 0 else renamed
        records.append({"id": f"s{i:02d}", "source": source, "passed": True})
    for i in range(14, 20):
        records.append({"id": f"s{i:02d}", "source": canonical, "passed": False})
    for i in range(20, 24):
        records.append({"id": f"s{i:02d}", "source": wrong, "passed": False})
    return records


# A pool of line templates for synthetic programs. `{v}` slots are filled
# with identifiers so alpha-equivalent copies cluster together.
_LINE_TEMPLATES = (
    "{a} = int(input())",
    "{a} = input().split()",
    "{a} = [int({b}) for {b} in input().split()]",
    "{a} = {b} + {c}",
    "{a} = {b} * 2",
    "{a} = {b} - 1",
    "{a} = 0",
    "{a} = []",
    "for {b} in range({a}):",
    "    {c} = {c} + {b}",
    "if {a} > {b}:",
    "    {a} = {b}",
    "while {a} < 10:",
    "    {a} = {a} + 1",
    "{a}.append({b})",
    "{a} = len({b})",
    "{a} = max({b}, {c})",
    "{a} = min({b}, {c})",
    "{a} = str({b})",
    "{a} = {b} % {c}",
)

_NAME_POOL = (
    "a", "b", "c", "n", "m", "k", "x", "y", "z", "total",
    "count", "result", "value", "item", "acc", "num", "line", "data",
)


def synth_source(rng: random.Random, n_lines: int) -> str:
    names = rng.sample(_NAME_POOL, 3)
    lines = []
    for _ in range(n_lines):
        template = rng.choice(_LINE_TEMPLATES)
        lines.append(
            template.format(a=names[0], b=names[1], c=names[2])
        )
        rng.shuffle(names)
    lines.append(f"print({names[0]})")
    return "\n".join(lines)


def synth_records(seed: int, count: int, min_lines=3, max_lines=15, pass_rate=0.6):
    rng = random.Random(seed)
    records = []
    for i in range(count):
        records.append(
            {
                "id": f"sub{i:05d}",
                "source": synth_source(rng, rng.randint(min_lines, max_lines)),
                "passed": rng.random() < pass_rate,
                "meta": {},
            }
        )
    return records


def build_index(records, cfg=None):
    """Run the full pipeline over in-memory records; returns (index, doc)."""
    import os
    import tempfile

    from flowlens import analysis, pipeline

    cfg = cfg or make_cfg()
    fd, path = tempfile.mkstemp(suffix=".jsonl")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            for rec in records:
                fh.write(json.dumps(rec) + "\n")
        result = pipeline.run(path, cfg)
    finally:
        os.unlink(path)
    doc = result.document
    return analysis.index_from_document(doc), doc


def mock_embed_client(dim=768, fail_first=0, status=200):
    """httpx client answering the /embed wire contract with unit vectors."""
    calls = {"count": 0}

    def handler(request: httpx.Request) -> httpx.Response:
        calls["count"] += 1
        if calls["count"] <= fail_first:
            return httpx.Response(503, json={"error": "busy"})
        if status != 200:
            return httpx.Response(status, json={"error": "nope"})
        payload = json.loads(request.content)
        vectors = []
        for text in payload["texts"]:
            digest = hashlib.blake2b(text.encode(), digest_size=4).digest()
            rng = np.random.default_rng(int.from_bytes(digest, "little"))
            vec = rng.standard_normal(dim)
            vec = vec / np.linalg.norm(vec)
            vectors.append([float(v) for v in vec])
        return httpx.Response(200, json={"vectors": vectors, "dim": dim})

    return httpx.Client(transport=httpx.MockTransport(handler)), calls


def mock_chat_client(reply_fn=None, fail_first=0):
    """httpx client answering the chat wire contract with canned text."""
    calls = {"count": 0, "prompts": []}

    def handler(request: httpx.Request) -> httpx.Response:
        calls["count"] += 1
        if calls["count"] <= fail_first:
            return httpx.Response(503, json={"error": "busy"})
        payload = json.loads(request.content)
        calls["prompts"].append(payload["prompt"])
        text = reply_fn(payload["prompt"]) if reply_fn else "No errors found."
        return httpx.Response(200, json={"text": text})

    return httpx.Client(transport=httpx.MockTransport(handler)), calls
