import json

import pytest

from flowlens import analysis, pipeline
from flowlens.aggregate import FilterTerm

from conftest import build_index, make_cfg, synth_records, write_jsonl


@pytest.fixture(scope="module")
def doc():
    records = synth_records(31, 15, max_lines=8)
    records[0]["passed"] = True
    _, doc = build_index(records)
    return doc


class TestDocument:
    def test_top_level_keys(self, doc):
        assert set(doc) == {
            "schema_version",
            "config",
            "progression",
            "steps",
            "variants",
            "clusters",
            "alignments",
            "labels",
            "submissions",
            "labeler_reports",
            "provenance",
        }
        assert doc["schema_version"] == analysis.SCHEMA_VERSION

    def test_provenance_block(self, doc):
        prov = doc["provenance"]
        assert prov["seeds"]["embed_seed"] == 42
        assert prov["thresholds"] == {
            "theta_coarse": 0.25,
            "theta_fine": 0.10,
            "min_agreement": 0.30,
            "min_coverage": 0.20,
        }
        assert prov["backend_ids"]["embed"] == "local"
        assert prov["backend_ids"]["chat"] is None
        assert prov["kernels"]["implementation"] in ("cython", "python")

    def test_config_echo_carries_all_knobs(self, doc):
        cfg = doc["config"]
        assert cfg["embed"]["dim"] == 256
        assert cfg["normalize"]["output_functions"] == ["print"]
        assert cfg["view"]["color_incorrect"] == "#D32F2F"
        assert cfg["serve"]["session_timeout_s"] == 7200
        assert cfg["embed"]["batch_size"] == 64
        assert cfg["label"]["max_retries"] == 3

    def test_labels_total(self, doc):
        for sub in doc["submissions"]:
            label_rows = doc["labels"][sub["id"]]
            assert len(label_rows) == len(sub["lines"])
            assert [r["index"] for r in label_rows] == list(range(len(label_rows)))

    def test_passed_submissions_all_correct(self, doc):
        for sub in doc["submissions"]:
            if sub["passed"]:
                assert all(r["class"] == "Correct" for r in doc["labels"][sub["id"]])

    def test_alignment_slots_cover_lines(self, doc):
        for sub in doc["submissions"]:
            slots = doc["alignments"][sub["id"]]["slot"]
            assert len(slots) == len(sub["lines"])

    def test_variant_rows_complete(self, doc):
        listed = {row["variant_id"] for row in doc["variants"]}
        used = {
            line["variant_id"] for sub in doc["submissions"] for line in sub["lines"]
        }
        assert used <= listed

    def test_canonical_encoding(self, doc):
        text = analysis.dumps_document(doc)
        assert text.endswith("\n")
        parsed = json.loads(text)
        assert analysis.dumps_document(parsed) == text
        # canonical form: sorted keys, no spaces
        assert ": " not in text.split('"source"')[0][:200]

    def test_dumps_deterministic(self, doc):
        assert analysis.dumps_document(doc) == analysis.dumps_document(
            json.loads(analysis.dumps_document(doc))
        )


class TestRoundTrip:
    def test_load_verifies_schema(self, doc, tmp_path):
        bad = dict(doc, schema_version="999")
        path = tmp_path / "bad.json"
        analysis.write_document(bad, str(path))
        with pytest.raises(analysis.SchemaMismatch):
            analysis.load_document(str(path))

    def test_hash_is_of_file_bytes(self, doc, tmp_path):
        import hashlib

        path = tmp_path / "a.json"
        analysis.write_document(doc, str(path))
        _, digest = analysis.load_document(str(path))
        assert digest == hashlib.sha256(path.read_bytes()).hexdigest()

    def test_index_round_trip_preserves_views(self, doc, tmp_path):
        path = tmp_path / "a.json"
        analysis.write_document(doc, str(path))
        loaded, _ = analysis.load_document(str(path))
        index = analysis.index_from_document(loaded)
        base = index.build_view(())
        assert [s.to_dict() for s in base.steps] == doc["steps"]
        # filtered views keep working after the round trip
        variant = next(iter(index.subs_with_variant))
        filtered = index.build_view((FilterTerm(variant),))
        assert filtered.active_submissions <= base.active_submissions


class TestPipeline:
    def test_stage_stats_complete(self, tmp_path):
        records = synth_records(5, 6, max_lines=5)
        records[0]["passed"] = True
        path = tmp_path / "subs.jsonl"
        write_jsonl(path, records)
        result = pipeline.run(str(path), make_cfg())
        names = [s.name for s in result.stats]
        assert names == [
            "ingest",
            "normalize",
            "embed",
            "cluster",
            "align",
            "label",
            "aggregate",
        ]
        assert all(s.seconds >= 0 for s in result.stats)

    def test_submission_lines_match_labels(self, tmp_path):
        records = synth_records(6, 6, max_lines=5)
        records[0]["passed"] = True
        path = tmp_path / "subs.jsonl"
        write_jsonl(path, records)
        doc = pipeline.run(str(path), make_cfg()).document
        for sub in doc["submissions"]:
            classes = {r["index"]: r["class"] for r in doc["labels"][sub["id"]]}
            for line in sub["lines"]:
                assert line["label_class"] == classes[line["index"]]

    def test_sources_kept_verbatim_in_document(self, tmp_path):
        # Scrubbing is an export-time concern; the analysis document keeps
        # the original text so the detail view can show real code.
        literal = "a fairly long string literal"
        source = f"x = '{literal}'\nprint(x)"
        records = [{"id": "s0", "source": source, "passed": True}]
        path = tmp_path / "subs.jsonl"
        write_jsonl(path, records)
        doc = pipeline.run(str(path), make_cfg()).document
        by_id = {sub["id"]: sub for sub in doc["submissions"]}
        assert by_id["s0"]["source"] == source
