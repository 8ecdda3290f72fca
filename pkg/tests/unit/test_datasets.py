"""Unit tests for the benchmark JSONL loaders."""

import json
import logging

import numpy as np
import pytest

from comclip.datasets import (
    ImageStore,
    MissingImage,
    SchemaError,
    count_by_neg_type,
    dump_jsonl,
    load_comvg,
    load_dataset,
    load_retrieval,
    load_svo_probes,
    load_vl_checklist,
    load_winoground,
)
from comclip.errors import DataError
from comclip.evaluation import DatasetKind, NegType, VLCategory
from comclip.grounding import Box
from comclip.parsing import EntityTriple, Role
from tests.conftest import make_image, write_jsonl


def _svo_row(i: int, neg_type: str) -> dict:
    return {
        "id": f"s{i}",
        "sentence": "A man is hitting a baseball",
        "triplet": {"subject": "man", "predicate": "hitting", "object": "baseball"},
        "neg_type": neg_type,
        "pos_image": "a.png",
        "neg_image": "b.png",
    }


class TestMatchingLoaders:
    """ComVG and SVO-Probes rows."""

    def test_load_comvg(self, comvg_file):
        instances = load_comvg(comvg_file)

        assert [inst.id for inst in instances] == ["c1", "c2", "c3", "c4"]
        assert instances[0].triplet == EntityTriple(subject="man", predicate="hitting", object="baseball")
        assert instances[1].neg_type is NegType.PREDICATE

    def test_ground_truth_regions(self, comvg_file):
        instance = load_comvg(comvg_file)[3]

        assert instance.pos_regions == {
            Role.SUBJECT: [Box(0, 0, 20, 32)],
            Role.OBJECT: [Box(20, 0, 48, 32)],
        }
        assert instance.neg_regions is None

    def test_count_by_neg_type(self, comvg_file):
        assert count_by_neg_type(load_comvg(comvg_file)) == {
            "subject": 1,
            "predicate": 1,
            "object": 2,
        }

    def test_full_svo_split_counts(self, tmp_path):
        rows = (
            [_svo_row(i, "subject") for i in range(2584)]
            + [_svo_row(2584 + i, "predicate") for i in range(1536)]
            + [_svo_row(4120 + i, "object") for i in range(1280)]
        )
        path = write_jsonl(tmp_path / "svo.jsonl", rows)

        instances = load_svo_probes(path, check_images=False)

        assert len(instances) == 5400
        assert count_by_neg_type(instances) == {"subject": 2584, "predicate": 1536, "object": 1280}

    def test_missing_image(self, comvg_file):
        (comvg_file.parent / "img3.png").unlink()

        with pytest.raises(MissingImage, match="line 2"):
            load_comvg(comvg_file)

    def test_images_not_checked_when_disabled(self, comvg_file):
        (comvg_file.parent / "img3.png").unlink()

        assert len(load_comvg(comvg_file, check_images=False)) == 4

    def test_explicit_root(self, comvg_file, tmp_path):
        with pytest.raises(MissingImage):
            load_comvg(comvg_file, root=tmp_path / "elsewhere")


class TestRowErrors:
    """Malformed rows name their line."""

    @pytest.mark.parametrize(
        ("line", "message"),
        [
            ("{not json", "invalid JSON"),
            ("[1, 2]", "row must be a JSON object"),
            ('{"id": "x"}', "sentence"),
        ],
    )
    def test_bad_second_line(self, tmp_path, line, message):
        path = tmp_path / "data.jsonl"
        path.write_text(
            "\n".join([json.dumps(_svo_row(0, "subject")), line]) + "\n",
            encoding="utf-8",
        )

        with pytest.raises(SchemaError, match=message) as exc_info:
            load_comvg(path, check_images=False)

        assert exc_info.value.line == 2
        assert str(exc_info.value).startswith("line 2: ")

    def test_invalid_utf8_names_its_line(self, tmp_path):
        path = tmp_path / "data.jsonl"
        path.write_bytes(json.dumps(_svo_row(0, "subject")).encode() + b'\n{"id": "caf\xe9"}\n')

        with pytest.raises(SchemaError, match="invalid UTF-8") as exc_info:
            load_comvg(path, check_images=False)

        assert exc_info.value.line == 2

    def test_non_ascii_utf8_is_read(self, tmp_path):
        row = _svo_row(0, "subject") | {"sentence": "A café owner holds a crêpe"}
        path = tmp_path / "d.jsonl"
        path.write_bytes(json.dumps(row, ensure_ascii=False).encode("utf-8") + b"\n")

        assert load_comvg(path, check_images=False)[0].sentence == "A café owner holds a crêpe"

    def test_duplicate_id(self, tmp_path):
        path = write_jsonl(tmp_path / "d.jsonl", [_svo_row(0, "subject"), _svo_row(0, "object")])

        with pytest.raises(SchemaError, match="duplicate id 's0'"):
            load_comvg(path, check_images=False)

    def test_unknown_neg_type(self, tmp_path):
        path = write_jsonl(tmp_path / "d.jsonl", [_svo_row(0, "verb")])

        with pytest.raises(SchemaError, match="neg_type"):
            load_comvg(path, check_images=False)

    def test_same_pos_and_neg_image(self, tmp_path):
        row = _svo_row(0, "subject") | {"neg_image": "a.png"}
        path = write_jsonl(tmp_path / "d.jsonl", [row])

        with pytest.raises(SchemaError, match="must differ"):
            load_comvg(path, check_images=False)

    def test_blank_lines_ignored(self, tmp_path):
        path = tmp_path / "d.jsonl"
        path.write_text("\n" + json.dumps(_svo_row(0, "subject")) + "\n\n", encoding="utf-8")

        assert len(load_comvg(path, check_images=False)) == 1

    def test_missing_file(self, tmp_path):
        with pytest.raises(SchemaError, match="not found"):
            load_comvg(tmp_path / "absent.jsonl")

    def test_schema_errors_are_data_errors(self):
        assert issubclass(SchemaError, DataError)
        assert SchemaError("bad", line=3).exit_code == 2

    def test_lenient_skips_bad_rows(self, tmp_path, caplog):
        path = write_jsonl(
            tmp_path / "d.jsonl", [_svo_row(0, "subject"), _svo_row(0, "object"), _svo_row(1, "object")]
        )

        with caplog.at_level(logging.WARNING, logger="comclip.datasets.loader"):
            instances, manifest = load_dataset("comvg", path, lenient=True, check_images=False)

        assert [inst.id for inst in instances] == ["s0", "s1"]
        assert manifest.skipped_lines == [2]
        assert manifest.count == 2
        assert "duplicate id" in caplog.text


class TestWinoground:
    def test_load(self, winoground_file):
        instances = load_winoground(winoground_file)

        assert [inst.id for inst in instances] == ["w1", "w2"]
        assert instances[0].caption_1 == "some grass in a mug"

    def test_partial_file_warns(self, winoground_file, caplog):
        with caplog.at_level(logging.WARNING, logger="comclip.datasets.loader"):
            load_winoground(winoground_file)

        assert "holds 2 instances, the full set has 400" in caplog.text

    def test_full_file_does_not_warn(self, tmp_path, caplog):
        rows = [
            {"id": str(i), "caption_0": "a b", "caption_1": "b a", "image_0": "x", "image_1": "y"}
            for i in range(400)
        ]
        path = write_jsonl(tmp_path / "w.jsonl", rows)

        with caplog.at_level(logging.WARNING, logger="comclip.datasets.loader"):
            assert len(load_winoground(path, check_images=False)) == 400

        assert caplog.text == ""

    def test_empty_file_warns(self, tmp_path, caplog):
        path = tmp_path / "w.jsonl"
        path.write_text("", encoding="utf-8")

        with caplog.at_level(logging.WARNING, logger="comclip.datasets.loader"):
            assert load_winoground(path) == []

        assert "holds no instances" in caplog.text


class TestVLChecklist:
    def test_categories_lowercased(self, vl_checklist_file):
        pairs = load_vl_checklist(vl_checklist_file)

        assert [p.category for p in pairs] == [VLCategory.ATTRIBUTE, VLCategory.OBJECT, VLCategory.RELATION]

    def test_unknown_category(self, tmp_path):
        row = {"image": "x", "pos_caption": "a", "neg_caption": "b", "category": "action"}
        path = write_jsonl(tmp_path / "v.jsonl", [row])

        with pytest.raises(SchemaError, match="category"):
            load_vl_checklist(path, check_images=False)


class TestRetrieval:
    def test_one_query_per_image(self, retrieval_file):
        queries, gallery = load_retrieval(retrieval_file, seed=0)

        assert gallery == [f"img{i}.png" for i in range(6)]
        assert [q.image for q in queries] == gallery
        assert queries[0].caption in {"a man riding a bike down a street", "a cyclist on a city road"}
        assert queries[1].caption == "two dogs playing with a frisbee"

    def test_caption_choice_is_seeded(self, retrieval_file):
        assert load_retrieval(retrieval_file, seed=5) == load_retrieval(retrieval_file, seed=5)

    def test_manifest(self, retrieval_file):
        queries, manifest = load_dataset(DatasetKind.RETRIEVAL, retrieval_file)

        assert manifest.kind is DatasetKind.RETRIEVAL
        assert manifest.count == len(queries) == 6
        assert len(manifest.checksum) == 64
        assert manifest.root == retrieval_file.parent


class TestDumpJsonl:
    def test_dump_then_load(self, comvg_file, tmp_path):
        instances = load_comvg(comvg_file)
        out = tmp_path / "copy" / "comvg.jsonl"

        dump_jsonl(instances, out)

        assert load_comvg(out, root=comvg_file.parent) == instances
        assert "neg_regions" not in out.read_text(encoding="utf-8")


class TestImageStore:
    def test_get_decodes(self, image_dir):
        store = ImageStore(image_dir)

        assert np.array_equal(store.get("img2.png"), make_image(seed=2))
        assert store.get("img2.png") is store.get("img2.png")

    def test_missing(self, image_dir):
        with pytest.raises(MissingImage, match="nope.png"):
            ImageStore(image_dir).get("nope.png")
