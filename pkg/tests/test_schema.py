import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wsc_hardness.errors import (DegenerateSplitError, EmptyEligibleSetError,
                                 ParseError, ValidationError)
from wsc_hardness.schema import (Dataset, HardnessLabel, SchemaHalf,
                                 dumps_dataset, load_dataset, load_id_list,
                                 oversample_balance, replication_factor,
                                 round_half_up, save_dataset, split_by_ids,
                                 split_train_test)

from conftest import labelled


def record(**kw):
    rec = {"id": "x1", "source": "WSC-original",
           "sentence": "The cat caught the mouse because it was clever.",
           "question": "Who is clever?", "answers": ["The cat", "The mouse"],
           "correct": 1, "hardness": 0.9, "respondents": 10}
    rec.update(kw)
    return rec


class TestSchemaHalf:
    def test_candidates_must_occur(self):
        with pytest.raises(ValidationError, match="x9"):
            SchemaHalf("x9", "The cat ran.", "Who ran?", ("The cat", "dog"))

    def test_case_insensitive_span(self):
        h = SchemaHalf("a", "the Cat caught THE mouse.", "Who?",
                       ("The cat", "the Mouse"))
        assert h.candidates == ("The cat", "the Mouse")

    def test_partial_word_is_not_a_span(self):
        with pytest.raises(ValidationError):
            SchemaHalf("a", "The cats ran after the mouse.", "Who?",
                       ("The cat", "the mouse"))

    @pytest.mark.parametrize("bad", [-0.1, 1.5])
    def test_hardness_range(self, bad):
        with pytest.raises(ValidationError):
            SchemaHalf("a", "The cat saw the dog.", "Who?", ("The cat",
                                                             "the dog"),
                       hardness=bad)

    def test_identical_candidates(self):
        with pytest.raises(ValidationError):
            SchemaHalf("a", "The cat saw the cat.", "Who?", ("The cat",
                                                             "the cat"))

    def test_label_from_counts(self):
        lab = HardnessLabel.from_counts(46, 50)
        assert lab.value == pytest.approx(0.92)
        assert lab.respondent_count == 50


class TestLoading:
    def test_json_roundtrip_is_byte_identical(self, tmp_path, synthetic):
        p = tmp_path / "d.json"
        save_dataset(synthetic, p)
        assert load_dataset(p).halves == synthetic.halves
        save_dataset(load_dataset(p), tmp_path / "e.json")
        assert p.read_bytes() == (tmp_path / "e.json").read_bytes()

    def test_csv_roundtrip(self, tmp_path, synthetic):
        p = tmp_path / "d.csv"
        save_dataset(synthetic, p)
        assert load_dataset(p).halves == synthetic.halves

    def test_bundled_set_has_286_halves(self, synthetic):
        assert len(synthetic) == 286

    def test_empty_file(self, tmp_path):
        p = tmp_path / "e.json"
        p.write_text("")
        assert len(load_dataset(p)) == 0

    def test_missing_candidate_names_the_id(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text(json.dumps([record(id="lonely", answers=["The cat"])]))
        with pytest.raises(ValidationError, match="lonely"):
            load_dataset(p)

    def test_malformed_json(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("[{")
        with pytest.raises(ParseError):
            load_dataset(p)

    def test_csv_extra_column_reports_line(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("id,sentence,question,answers\n"
                     "a,The cat ran.,Who?,The cat|x,EXTRA\n")
        with pytest.raises(ParseError, match="line 2"):
            load_dataset(p)

    def test_duplicate_ids(self):
        h = SchemaHalf("a", "The cat saw the dog.", "Who?", ("The cat",
                                                            "the dog"))
        with pytest.raises(ValidationError):
            Dataset([h, h])

    def test_id_list_comments(self, tmp_path):
        p = tmp_path / "ids"
        p.write_text("# header\na\n\nb  # trailing\n")
        assert load_id_list(p) == ["a", "b"]


class TestSplit:
    def test_round_half_up(self):
        assert [round_half_up(x) for x in (85.8, 0.5, 1.5, 2.5)] == [86, 1, 2, 3]

    def test_reference_sizes(self, synthetic):
        train, test = split_train_test(synthetic, 0.3, seed=1)
        assert (len(train), len(test)) == (200, 86)

    def test_first_hundred_fraction(self, synthetic):
        _, test = split_train_test(synthetic, 0.3497, seed=1)
        assert len(test) == 100

    def test_matches_reference_shuffle(self, synthetic):
        # oracle: the first round(n*f) positions of the seeded permutation
        _, test = split_train_test(synthetic, 0.3, seed=42)
        order = np.random.default_rng(42).permutation(len(synthetic))
        expect = {synthetic.halves[i].id for i in order[:86]}
        assert set(test.ids) == expect

    def test_deterministic(self, synthetic):
        a = split_train_test(synthetic, 0.3, seed=3)
        b = split_train_test(synthetic, 0.3, seed=3)
        assert a[1].ids == b[1].ids

    def test_single_half_is_degenerate(self):
        with pytest.raises(DegenerateSplitError):
            split_train_test(labelled(1), 0.3, seed=0)

    @settings(max_examples=40, deadline=None)
    @given(n=st.integers(2, 60), f=st.floats(0.05, 0.95),
           seed=st.integers(0, 2 ** 31))
    def test_partition_property(self, n, f, seed):
        d = labelled(n)
        try:
            train, test = split_train_test(d, f, seed)
        except DegenerateSplitError:
            assert round_half_up(n * f) in (0, n)
            return
        assert set(train.ids).isdisjoint(test.ids)
        assert sorted(train.ids + test.ids) == sorted(d.ids)
        assert len(test) == round_half_up(n * f)

    def test_split_by_ids(self, synthetic):
        ids = synthetic.ids[:100]
        train, test = split_by_ids(synthetic, ids)
        assert test.ids == ids and len(train) == 186

    def test_split_by_unknown_id(self, synthetic):
        with pytest.raises(ValidationError):
            split_by_ids(synthetic, ["nope"])


class TestOversample:
    def test_oversample_arithmetic(self):
        orig, dpr = labelled(286, 1, "w"), labelled(943, 2, "d")
        excluded = orig.ids[:100]
        assert replication_factor(943, 186) == 5
        full = oversample_balance(orig, dpr, excluded)
        assert len(full) == 943 + 5 * 186 == 1873
        out = oversample_balance(orig, dpr, excluded, target_total=1872)
        assert len(out) == 1872
        assert len(set(out.ids)) == 1872

    def test_labels_replicated_verbatim(self):
        orig, dpr = labelled(30, 1, "w"), labelled(100, 2, "d")
        out = oversample_balance(orig, dpr)
        k = replication_factor(100, 30)
        copies = [h for h in out if h.base_id in set(orig.ids)]
        assert sorted(h.hardness for h in copies) == sorted(
            [h.hardness for h in orig] * k)
        by_id = orig.by_id()
        for h in copies:
            src = by_id[h.base_id]
            assert (h.sentence, h.question, h.candidates, h.hardness) == (
                src.sentence, src.question, src.candidates, src.hardness)

    def test_empty_dpr_is_identity(self):
        orig = labelled(10)
        out = oversample_balance(orig, Dataset([]))
        assert out.halves == orig.halves

    def test_all_excluded(self):
        orig = labelled(5)
        with pytest.raises(EmptyEligibleSetError):
            oversample_balance(orig, labelled(3, prefix="d"), orig.ids)

    def test_trim_drops_highest_replica_first(self):
        orig, dpr = labelled(4, 1, "w"), labelled(12, 2, "d")
        out = oversample_balance(orig, dpr, target_total=12 + 3 * 4 - 2)
        reps = [h.id for h in out if "#rep-3" in h.id]
        assert reps == ["w2#rep-3", "w3#rep-3"]

    def test_unlabelled_input_rejected(self):
        orig = Dataset([SchemaHalf("u", "The cat saw the dog.", "Who?",
                                   ("The cat", "the dog"))])
        with pytest.raises(ValidationError):
            oversample_balance(orig, Dataset([]))


def test_dumps_is_canonical(synthetic):
    text = dumps_dataset(synthetic)
    assert text.endswith("\n")
    assert json.loads(text)[0]["id"] == "syn-000a"
