import itertools
from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wsc_hardness.features import (CATEGORICAL, COMPONENTS, FEATURE_NAMES,
                                   ExtractionConfig, FeatureSchema,
                                   analyze, build_queries, extract_all,
                                   f_connective, f_length, f_narrative_chain,
                                   f_negation, f_polarity_machine,
                                   f_polarity_rule, f_polarity_simple,
                                   f_relatedness, f_search_queries,
                                   f_search_queries_framed, f_semantic_role,
                                   f_sentence_pattern, f_word_relations,
                                   majority, pair_decision, read_features_csv,
                                   swap_candidates, write_features_csv)
from wsc_hardness.knowledge import (CorpusIndex, FrameRoleTable,
                                    HitCountProvider, NarrativeChainDb,
                                    PolarityLexicon, RelatednessTable,
                                    ResourceBundle, ScoreTable,
                                    build_corpus_index)
from wsc_hardness.schema import SchemaHalf
from wsc_hardness.text import tokenize, word_tokens


def half(sentence, question, cands, hid="x"):
    return SchemaHalf(hid, sentence, question, cands)


def bare(sentence):
    """Just enough analysis for the sentence-level components."""
    return SimpleNamespace(half=SimpleNamespace(sentence=sentence),
                           words=word_tokens(tokenize(sentence)))


PROPER = half("John caught Bill because he was clever.", "Who was clever?",
              ("John", "Bill"))


class TestFeatureList:
    def test_count_and_order(self):
        assert len(FEATURE_NAMES) == 47 == len(set(FEATURE_NAMES))
        assert len(COMPONENTS) == 12
        assert FEATURE_NAMES[:4] == ["ST", "SP", "STN", "QTN"]

    def test_config_validation(self):
        with pytest.raises(ValueError):
            ExtractionConfig(threshold=1.0)
        with pytest.raises(ValueError):
            ExtractionConfig(min_connective_count=0)


class TestSimpleComponents:
    def test_pattern(self, councilmen):
        assert f_sentence_pattern(analyze(councilmen)) == {
            "ST": "complex", "SP": "SV because SV"}
        assert f_sentence_pattern(bare("The cat ran.")) == {"ST": "simple",
                                                            "SP": "SV"}

    def test_negation(self, catch):
        assert f_negation(analyze(catch)) == {"STN": 0, "QTN": 0}
        neg_s = half("The cat did not catch the mouse because it was clever.",
                     "Who is clever?", ("The cat", "The mouse"))
        assert f_negation(analyze(neg_s)) == {"STN": 1, "QTN": 0}
        neg_q = half("The cat caught the mouse because it was not clever.",
                     "Who is not clever?", ("The cat", "The mouse"))
        assert f_negation(analyze(neg_q)) == {"STN": 0, "QTN": 1}

    @pytest.mark.parametrize("sentence,n", [
        ("The city councilmen refused the demonstrators a permit because "
         "they advocated violence.", 12),
        ("Cats sleep.", 2),
        ("The cat caught the mouse because it was clever.", 9)])
    def test_length(self, sentence, n):
        assert f_length(bare(sentence)) == {"SL": n}

    def test_semantic_role_counting(self, councilmen, catch):
        idx = build_corpus_index(["The councilmen refused the visitors.",
                                  "The councilmen met the mayor.",
                                  "The police arrested the demonstrators."])
        # councilman: subject 2, demonstrator: subject 0; pronoun is subject
        assert f_semantic_role(analyze(councilmen), idx) == {"SEM": 1}
        assert f_semantic_role(analyze(catch), CorpusIndex()) == {"SEM": -1}
        obj_q = half("The cat caught the mouse because the dog chased it.",
                     "Whom did the dog chase?", ("The cat", "The mouse"))
        idx = build_corpus_index(["The owl caught the mouse.",
                                  "The dog chased the mouse."])
        assert analyze(obj_q).question_role == "object"
        assert f_semantic_role(analyze(obj_q), idx) == {"SEM": 2}


def enumerate_word_relations(sentence, candidates, connective):
    """Brute-force WN/WP over the tagged tokens."""
    words = word_tokens(tokenize(sentence))
    cand = set()
    for c in candidates:
        for w in c.lower().split():
            if w not in ("the", "a", "an"):
                cand.add(w)
    rest = [w for w in words if w.lower not in cand and w.lower != connective]
    k = next(w.index for w in words if w.lower == connective)
    wp = 0
    for b, c in itertools.product(rest, rest):
        if b.index < k < c.index and {b.pos, c.pos} != {"adj", "noun"}:
            wp += 1
    return len(rest), wp


class TestWordRelations:
    def test_catch_golden(self, catch):
        assert f_word_relations(analyze(catch)) == {
            "WN": 6, "WP": 9, "HN": 1, "VF": 1, "JF": 0}

    @pytest.mark.parametrize("sentence,question,cands", [
        ("The city councilmen refused the demonstrators a permit because "
         "they advocated violence.", "Who advocated violence?",
         ("The city councilmen", "The demonstrators")),
        ("The cat caught the mouse because it was clever.", "Who is clever?",
         ("The cat", "The mouse")),
        ("The tall teacher thanked the student in the park because he was "
         "kind.", "Who was kind?", ("The tall teacher", "The student")),
    ])
    def test_enumeration_oracle(self, sentence, question, cands):
        out = f_word_relations(analyze(half(sentence, question, cands)))
        assert (out["WN"], out["WP"]) == enumerate_word_relations(
            sentence, cands, "because")

    def test_adjective_modifiers(self):
        h = half("The tall teacher thanked the student because he was kind.",
                 "Who was kind?", ("The tall teacher", "The student"))
        assert f_word_relations(analyze(h))["JF"] == 1

    def test_no_connective_zeroed(self, resources):
        h = half("The cat caught the mouse.", "Who caught the mouse?",
                 ("The cat", "The mouse"))
        v = extract_all(h, resources)
        assert [v[n] for n in COMPONENTS["word-relations"]] == [0] * 5
        assert v.coverage["word-relations"] is False


class TestQueries:
    def test_catch_six(self, catch):
        assert build_queries(analyze(catch)).as_tuple() == (
            "cat was", "mouse was", "cat was clever", "mouse was clever",
            "clever cat", "clever mouse")

    def test_councilmen(self, samples):
        q = build_queries(analyze(samples["councilmen-1"]))
        assert (q.QR1, q.QR2) == ("councilmen feared", "demonstrators feared")
        assert q.QR5 is None and q.QR6 is None

    def test_no_adjective_forces_gl3(self, samples):
        q = build_queries(analyze(samples["councilmen-2"]))
        hits = HitCountProvider({q.QR1: 10, q.QR2: 1000, q.QR3: 5, q.QR4: 900})
        out = f_search_queries(analyze(samples["councilmen-2"]), hits)
        assert (out["GL3i1"], out["GL3i2"]) == (0, 0)
        assert (out["GL1i1"], out["GL1i2"]) == (0, 1)
        assert (out["GL4i1"], out["GL4i2"]) == (0, 1)

    @pytest.mark.parametrize("a,b,d", [(1000, 500, 1), (100, 100, 0),
                                       (500, 1000, 2), (0, 0, 0), (1, 0, 1),
                                       (110, 100, 0)])
    def test_pair_decision(self, a, b, d):
        assert pair_decision(a, b, 0.2) == d

    def test_majority(self):
        assert majority([1, 1, 2]) == 1
        assert majority([1, 2, 0]) == 0
        assert majority([0, 0, 0]) == 0
        assert majority([0, 2, 0]) == 2

    def test_gl1_from_fixture_hits(self, catch, resources):
        out = f_search_queries(analyze(catch), resources.hits)
        assert (out["GL1i1"], out["GL1i2"]) == (1, 0)

    @settings(max_examples=200, deadline=None)
    @given(st.integers(0, 10 ** 6), st.integers(0, 10 ** 6),
           st.floats(0.01, 0.98), st.floats(0.01, 0.98))
    def test_threshold_monotone(self, a, b, t1, t2):
        lo, hi = sorted((t1, t2))
        d_lo, d_hi = pair_decision(a, b, lo), pair_decision(a, b, hi)
        assert d_hi == d_lo or d_hi == 0

    @settings(max_examples=200, deadline=None)
    @given(st.integers(0, 10 ** 6), st.integers(0, 10 ** 6))
    def test_swap_antisymmetry(self, a, b):
        assert pair_decision(b, a, 0.2) == {1: 2, 2: 1, 0: 0}[
            pair_decision(a, b, 0.2)]


class TestFramedQueries:
    def test_substitution(self):
        frames = FrameRoleTable({"catch": ("captor", "captive")})
        hits = HitCountProvider({"captor was": 900, "captive was": 100})
        out = f_search_queries_framed(analyze(PROPER), frames, hits)
        assert (out["GLF1i1"], out["GLF1i2"]) == (1, 0)

    def test_common_nouns_zero(self, catch):
        frames = FrameRoleTable({"catch": ("captor", "captive")})
        hits = HitCountProvider({"captor was": 900, "captive was": 100})
        out = f_search_queries_framed(analyze(catch), frames, hits)
        assert set(out.values()) == {0}

    def test_missing_frame_zero(self):
        out = f_search_queries_framed(analyze(PROPER), FrameRoleTable(),
                                      HitCountProvider())
        assert set(out.values()) == {0} and len(out) == 8


class TestRelatedness:
    def table(self, cat, mouse):
        t = RelatednessTable()
        t.add("cat", "clever", cat)
        t.add("mouse", "clever", mouse)
        return t

    def test_comparison(self, catch):
        a = analyze(catch)
        assert f_relatedness(a, self.table(0.4, 0.2))["CN"] == 1
        assert f_relatedness(a, self.table(0.2, 0.4))["CN"] == 2
        assert f_relatedness(a, RelatednessTable()) == {"CN": -1, "CNF": -1}

    def test_framed(self):
        t = RelatednessTable()
        t.add("captive", "clever", 0.5)
        frames = FrameRoleTable({"catch": ("captor", "captive")})
        assert f_relatedness(analyze(PROPER), t, frames)["CNF"] == 2


class TestConnective:
    def test_adjective_subject_rule(self, catch):
        idx = build_corpus_index(
            ["The cat caught the mouse because it was clever."] * 150)
        assert f_connective(analyze(catch), idx)["CNT"] == 1

    def test_below_threshold(self, catch):
        idx = build_corpus_index(
            ["The cat caught the mouse because it was clever."] * 99)
        assert f_connective(analyze(catch), idx)["CNT"] == -1
        cfg = ExtractionConfig(min_connective_count=99)
        assert f_connective(analyze(catch), idx, cfg)["CNT"] == 1

    def test_verb_role_rule(self, councilmen):
        idx = build_corpus_index(
            ["The councilmen refused the visitors because they advocated "
             "calm."] * 100)
        assert f_connective(analyze(councilmen), idx)["CNT"] == 1

    def test_comparison_blocks(self):
        h = half("The cat caught the mouse because it was faster.",
                 "Who was faster?", ("The cat", "The mouse"))
        idx = build_corpus_index(
            ["The cat caught the mouse because it was faster."] * 200)
        assert f_connective(analyze(h), idx)["CNT"] == -1


class TestNarrativeChain:
    def test_councilmen_protagonist(self, councilmen):
        db = NarrativeChainDb([[("refuse", "o"), ("advocate", "s")]])
        assert f_narrative_chain(analyze(councilmen), db)["NCH"] == 2

    def test_stem_fallback_equivalent(self, councilmen):
        exact = NarrativeChainDb([[("refuse", "o"), ("advocate", "s")]])
        stemmed = NarrativeChainDb([[("refused", "o"), ("advocates", "s")]])
        a = analyze(councilmen)
        assert f_narrative_chain(a, stemmed) == f_narrative_chain(a, exact)
        off = ExtractionConfig(similarity_fallback=False)
        assert f_narrative_chain(a, stemmed, off)["NCH"] == -1

    def test_no_triples(self):
        h = half("Violence and peace.", "Who?", ("Violence", "peace"))
        db = NarrativeChainDb([[("refuse", "o"), ("advocate", "s")]])
        assert f_narrative_chain(analyze(h), db)["NCH"] == -1


class TestPolarity:
    def test_councilmen_rule(self, councilmen, resources):
        out = f_polarity_rule(analyze(councilmen), resources.polarity)
        assert (out["RP1i1"], out["RP1i2"]) == (0, 1)
        assert out["RP2i1"] == "negative-positive"
        assert out["RP2i2"] == "positive-positive"
        assert out["RP3i1"] == out["RP2i1"]
        assert out["RPTL"] == 2

    def test_neutral_lexicon(self, councilmen):
        out = f_polarity_rule(analyze(councilmen), PolarityLexicon())
        assert (out["RP1i1"], out["RP1i2"], out["RPTL"]) == (0, 0, -1)

    def test_reversing_connective(self, resources):
        h = half("The city councilmen refused the demonstrators a permit "
                 "although they advocated violence.",
                 "Who advocated violence?",
                 ("The city councilmen", "The demonstrators"))
        out = f_polarity_rule(analyze(h), resources.polarity)
        assert out["RP3i1"] == out["RP2i1"] + "-although"
        assert out["RP3i2"] == out["RP2i2"] + "-although"

    def test_machine_agrees_with_rule(self, councilmen, resources):
        a = analyze(councilmen)
        rule = f_polarity_rule(a, resources.polarity)
        machine = f_polarity_machine(
            a, lambda tok, tr: resources.polarity.lookup(tok.lemma)[0])
        assert {k.replace("RP", "OP"): v for k, v in rule.items()} == machine

    def test_machine_neutral_and_flipped(self, councilmen, resources):
        a = analyze(councilmen)
        assert f_polarity_machine(a, lambda t, tr: "neutral")["OPTL"] == -1

        def flipped(tok, triple):
            if tok.lemma == "refuse":
                return "positive"
            return resources.polarity.lookup(tok.lemma)[0]
        rp = f_polarity_rule(a, resources.polarity)
        op = f_polarity_machine(a, flipped)
        assert (op["OP1i1"], op["OP1i2"]) == (rp["RP1i2"], rp["RP1i1"])

    def test_simple_scores(self, catch, councilmen):
        table = ScoreTable({"refuse": -0.4, "clever": 0.3})
        assert f_polarity_simple(analyze(councilmen), table)["TBSPOL"] == \
            "negative"
        assert f_polarity_simple(analyze(catch), table) == {
            "TBSPOL": "neutral", "TBQPOL": "positive"}


class TestExtractAll:
    def test_catch_complete(self, samples, resources):
        v = extract_all(samples["catch-a"], resources)
        assert list(v.values) == FEATURE_NAMES
        expected = {"ST": "complex", "SP": "SV because SV", "STN": 0,
                    "QTN": 0, "SL": 9, "WN": 6, "WP": 9, "HN": 1, "VF": 1,
                    "JF": 0, "GL1i1": 1, "GL1i2": 0}
        assert {k: v[k] for k in expected} == expected

    def test_councilmen_components(self, samples, resources):
        v1 = extract_all(samples["councilmen-1"], resources)
        v2 = extract_all(samples["councilmen-2"], resources)
        assert (v1["CNT"], v1["NCH"]) == (1, 1)
        assert (v2["RP1i1"], v2["RP1i2"], v2["RPTL"], v2["NCH"]) == (0, 1, 2,
                                                                     2)

    def test_deterministic(self, samples, resources):
        h = samples["councilmen-2"]
        assert extract_all(h, resources) == extract_all(h, resources)

    def test_offline_empty_cache(self, samples, resources):
        bare = ResourceBundle(index=resources.index,
                              polarity=resources.polarity,
                              hits=HitCountProvider())
        v = extract_all(samples["catch-a"], bare)
        gl = [n for n in COMPONENTS["search-queries"]]
        assert all(v[n] == 0 for n in gl)
        assert v.coverage["search-queries"] is False

    def test_pair_exclusivity(self, synthetic, resources):
        for h in synthetic.halves[:60]:
            v = extract_all(h, resources)
            for n in COMPONENTS["search-queries"]:
                if n.endswith("i1"):
                    assert v[n] * v[n[:-1] + "2"] == 0

    def test_candidate_swap(self, synthetic, samples, resources):
        halves = list(samples.values()) + list(synthetic.halves[:30])
        for h in halves:
            swapped = SchemaHalf(h.id, h.sentence, h.question,
                                 h.candidates[::-1])
            v = extract_all(h, resources)
            w = extract_all(swapped, resources)
            expected = swap_candidates(v)
            for n in ("SL", "ST", "SP", "STN", "QTN", "WN", "WP"):
                assert w[n] == v[n]
            for n in ("SEM", "CN", "CNT", "NCH", "RPTL", "OPTL"):
                assert w[n] == expected[n], (h.id, n)
            for n in FEATURE_NAMES:
                if n.startswith(("GL", "RP1", "OP1")):
                    assert w[n] == expected[n], (h.id, n)


class TestEncoding:
    def vectors(self, samples, resources):
        return [extract_all(h, resources) for h in samples.values()]

    def test_passthrough_and_codes(self, samples, resources):
        vs = self.vectors(samples, resources)
        schema = FeatureSchema.fit(vs)
        row = schema.encode(vs[0])
        j = schema.names.index("SL")
        assert row[j] == 9.0
        st_codes = schema.categories["ST"]
        assert row[schema.names.index("ST")] == st_codes.index("complex") + 1

    def test_unseen_category(self, samples, resources):
        vs = self.vectors(samples, resources)
        schema = FeatureSchema.fit(vs)
        odd = type(vs[0])(dict(vs[0].values, SP="SV and SV"), {})
        assert schema.encode(odd)[schema.names.index("SP")] == 0.0

    def test_injective_on_dictionary(self, samples, resources):
        schema = FeatureSchema.fit(self.vectors(samples, resources))
        for name, cats in schema.categories.items():
            codes = [schema._codes[name][c] for c in cats]
            assert len(set(codes)) == len(cats) and 0 not in codes

    def test_schema_roundtrip(self, samples, resources):
        vs = self.vectors(samples, resources)
        schema = FeatureSchema.fit(vs)
        again = FeatureSchema.from_dict(schema.to_dict())
        np.testing.assert_array_equal(again.encode_matrix(vs),
                                      schema.encode_matrix(vs))

    def test_csv_roundtrip(self, tmp_path, samples, resources):
        vs = self.vectors(samples, resources)
        ids = list(samples)
        write_features_csv(tmp_path / "f.csv", ids, vs)
        ids2, vs2 = read_features_csv(tmp_path / "f.csv")
        assert ids2 == ids and vs2 == vs
        write_features_csv(tmp_path / "g.csv", ids2, vs2)
        assert (tmp_path / "f.csv").read_bytes() == \
            (tmp_path / "g.csv").read_bytes()

    def test_csv_missing_columns(self, tmp_path):
        (tmp_path / "f.csv").write_text("id,ST\nx,simple\n")
        with pytest.raises(ValueError):
            read_features_csv(tmp_path / "f.csv")

    def test_categorical_set(self):
        assert CATEGORICAL <= set(FEATURE_NAMES)
