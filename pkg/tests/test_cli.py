import csv
import json

import pytest

from wsc_hardness.cli import (DEFAULTS, UsageError, build_parser,
                              read_config_file, resolve_config, run_cli)
from wsc_hardness.features import COMPONENTS, FEATURE_NAMES
from wsc_hardness.tables import bundled_path

SYN = bundled_path("synthetic")
HALVES = str(SYN / "halves.json")
SAMPLES = str(bundled_path("samples.json"))


def cli(*argv, env=None):
    return run_cli([str(a) for a in argv], environ=env or {})


@pytest.fixture(scope="module")
def work(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    assert cli("extract", "--data", HALVES, "--out", d / "f.csv") == 0
    assert cli("train-rf", "--features", d / "f.csv", "--labels", HALVES,
               "--exclude", SYN / "test.ids", "--n-trees", 15, "--seed", 7,
               "--out", d / "rf.model") == 0
    return d


def parse(argv):
    return build_parser().parse_args(argv)


class TestConfig:
    def test_defaults(self):
        cfg = resolve_config(parse(["extract", "--data", "x", "--out", "y"]),
                             {})
        assert cfg["seed"] == 0 and cfg["network"] is False
        assert cfg["resources"] == str(bundled_path("resources"))

    def test_precedence(self, tmp_path):
        conf = tmp_path / "c.conf"
        conf.write_text("# settings\nseed = 3\nthreshold = 0.3\n"
                        "resources = /from/file\nnetwork = off\n")
        argv = ["extract", "--data", "x", "--out", "y", "--config", str(conf)]
        cfg = resolve_config(parse(argv), {})
        assert (cfg["seed"], cfg["threshold"]) == (3, 0.3)
        assert cfg["resources"] == "/from/file"
        env = {"WSC_HARDNESS_RESOURCES": "/from/env",
               "WSC_HARDNESS_NETWORK": "1"}
        cfg = resolve_config(parse(argv), env)
        assert cfg["resources"] == "/from/env" and cfg["network"] is True
        cfg = resolve_config(parse(argv + ["--seed", "9", "--resources",
                                           "/from/flag", "--network", "off"]),
                             env)
        assert (cfg["seed"], cfg["resources"], cfg["network"]) == \
            (9, "/from/flag", False)
        assert cfg["extraction"].threshold == 0.3

    def test_bad_config(self, tmp_path):
        conf = tmp_path / "c.conf"
        conf.write_text("colour = blue\n")
        with pytest.raises(UsageError):
            read_config_file(conf)
        conf.write_text("seed = many\n")
        with pytest.raises(UsageError):
            read_config_file(conf)

    def test_all_keys_settable(self, tmp_path):
        conf = tmp_path / "c.conf"
        conf.write_text("".join(f"{k} = {v}\n" for k, v in DEFAULTS.items()
                                if v is not None))
        assert set(read_config_file(conf)) <= set(DEFAULTS)

    def test_threshold_out_of_range_is_usage(self):
        assert cli("extract", "--data", HALVES, "--out", "x",
                   "--threshold", 1.5) == 2


class TestExitCodes:
    def test_unknown_command(self):
        assert cli("frobnicate") == 2

    def test_unknown_flag(self):
        assert cli("extract", "--data", HALVES, "--out", "x", "--bogus") == 2

    def test_no_command(self):
        assert cli() == 2

    def test_missing_file(self, tmp_path):
        assert cli("extract", "--data", tmp_path / "none.json",
                   "--out", tmp_path / "f.csv") == 15

    def test_parse_error(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert cli("extract", "--data", bad, "--out", tmp_path / "f.csv") == 3

    def test_validation_error(self, tmp_path):
        bad = tmp_path / "bad.json"
        rows = json.loads(open(SAMPLES).read())
        rows[0]["answers"] = ["The cat", "The dog"]
        bad.write_text(json.dumps(rows))
        assert cli("extract", "--data", bad, "--out", tmp_path / "f.csv") == 4

    def test_missing_resources(self, tmp_path):
        assert cli("extract", "--data", SAMPLES, "--out", tmp_path / "f.csv",
                   "--resources", tmp_path / "absent") == 9

    def test_not_a_model(self, tmp_path):
        junk = tmp_path / "m.model"
        junk.write_text("hello")
        assert cli("predict", "--model", junk, "--data", SAMPLES,
                   "--out", tmp_path / "p.csv") == 11

    def test_model_version(self, tmp_path, work):
        text = (work / "rf.model").read_text()
        old = tmp_path / "old.model"
        old.write_text(text.replace("FOREST 1", "FOREST 0", 1))
        assert cli("predict", "--model", old, "--data", SAMPLES,
                   "--out", tmp_path / "p.csv") == 12

    def test_unlabelled_evaluation(self, tmp_path, work):
        assert cli("evaluate", "--model", work / "rf.model",
                   "--data", SAMPLES) == 13

    def test_bad_hyperparameter(self, tmp_path, work):
        assert cli("train-rf", "--features", work / "f.csv", "--labels",
                   HALVES, "--n-trees", 0, "--out", tmp_path / "m") == 10


class TestSubcommands:
    def test_ingest(self, tmp_path):
        corpus = tmp_path / "c.txt"
        corpus.write_text("The councilmen refused the demonstrators a permit "
                          "because they feared violence.\n")
        assert cli("ingest-corpus", "--corpus", corpus,
                   "--out", tmp_path / "i.json") == 0
        idx = json.loads((tmp_path / "i.json").read_text())
        assert idx["doc_count"] == 1

    def test_extract_csv(self, tmp_path, capsys):
        out = tmp_path / "s.csv"
        assert cli("extract", "--data", SAMPLES, "--out", out) == 0
        rows = list(csv.DictReader(out.open()))
        header = out.read_text().splitlines()[0].split(",")
        assert header == ["id"] + FEATURE_NAMES + [f"cov:{c}"
                                                  for c in COMPONENTS]
        catch = rows[0]
        assert (catch["id"], catch["SL"], catch["WN"], catch["WP"],
                catch["SP"]) == ("catch-a", "9", "6", "9", "SV because SV")
        again = tmp_path / "t.csv"
        cli("extract", "--data", SAMPLES, "--out", again)
        assert out.read_bytes() == again.read_bytes()
        assert "extracted 4 halves" in capsys.readouterr().out

    def test_train_rf_reproducible(self, tmp_path, work):
        args = ["train-rf", "--features", work / "f.csv", "--labels", HALVES,
                "--exclude", SYN / "test.ids", "--n-trees", 15, "--seed", 7]
        assert cli(*args, "--out", tmp_path / "again.model") == 0
        assert (tmp_path / "again.model").read_bytes() == \
            (work / "rf.model").read_bytes()
        assert cli(*args[:-1], 8, "--out", tmp_path / "other.model") == 0
        assert (tmp_path / "other.model").read_bytes() != \
            (work / "rf.model").read_bytes()

    def test_predict(self, tmp_path, work):
        out = tmp_path / "p.csv"
        assert cli("predict", "--model", work / "rf.model", "--data", SAMPLES,
                   "--out", out) == 0
        rows = list(csv.DictReader(out.open()))
        assert [r["id"] for r in rows] == ["catch-a", "catch-b",
                                           "councilmen-1", "councilmen-2"]
        assert all(0.0 <= float(r["hardness"]) <= 1.0 for r in rows)

    def test_evaluate_with_subset(self, tmp_path, work, capsys):
        from wsc_hardness.schema import load_dataset, load_id_list
        test = load_dataset(HALVES).subset(load_id_list(SYN / "test.ids"))
        test_path = tmp_path / "test.json"
        from wsc_hardness.schema import save_dataset
        save_dataset(test, test_path)
        out = tmp_path / "r.json"
        assert cli("evaluate", "--model", work / "rf.model", "--data",
                   test_path, "--subset", SYN / "subset57.ids",
                   "--baseline", 0.91, "--out", out) == 0
        rep = json.loads(out.read_text())
        assert rep["Forest"]["n"] == 100
        assert rep["Forest (subset)"]["n"] == 57
        assert rep["Fixed baseline"]["pearson"] is None
        text = capsys.readouterr().out
        assert "Forest (subset)" in text and "undefined" in text

    def test_importance(self, tmp_path, work):
        out = tmp_path / "imp.json"
        assert cli("importance", "--features", work / "f.csv", "--labels",
                   HALVES, "--test-ids", SYN / "test.ids", "--n-trees", 5,
                   "--inject-dummy", "--out", out) == 0
        rep = json.loads(out.read_text())
        assert [r["component"] for r in rep["rows"]] == list(COMPONENTS)
        assert all({"accuracy", "pearson"} <= set(r) for r in rep["rows"])
        assert abs(rep["control"]["accuracy"]
                   - rep["reference"]["accuracy"]) < 1e-9

    def test_train_lstm_and_bench(self, tmp_path):
        model, hist = tmp_path / "m.lstm", tmp_path / "h.csv"
        assert cli("train-lstm", "--data", HALVES, "--epochs", 2,
                   "--units", 6, "--embed-dim", 4, "--history", hist,
                   "--out", model) == 0
        assert len(hist.read_text().splitlines()) == 3
        out = tmp_path / "b.json"
        assert cli("bench", "--model", model, "--data", SAMPLES,
                   "--warmup", 1, "--with-extraction", "--out", out) == 0
        rep = json.loads(out.read_text())
        assert rep["n"] == 3 and rep["model"] == "lstm"
        assert rep["feature_extraction"]["mean"] > 0
        assert cli("bench", "--model", model, "--data", SAMPLES,
                   "--warmup", 4) == 13
