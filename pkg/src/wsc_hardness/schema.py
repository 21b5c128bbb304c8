"""Schema halves, datasets and hardness labels.

A half is the scoring unit: a sentence, a question about its definite
pronoun, and the two candidate noun phrases.  Hardness is crowd accuracy
on that half (1.0 means everybody answered it correctly).
"""

import csv
import io
import json
import math
import re
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import (DegenerateSplitError, EmptyEligibleSetError, ParseError,
                     ValidationError)

SOURCES = ("WSC-original", "DPR", "other")
FIELDS = ("id", "source", "sentence", "question", "answers", "correct",
          "hardness", "respondents")
REP_SEPARATOR = "#rep-"

_WORD = re.compile(r"[A-Za-z0-9]+(?:['\-][A-Za-z0-9]+)*")


def _words(text):
    return [w.lower() for w in _WORD.findall(text)]


def _contains_span(haystack, needle):
    n = len(needle)
    return n > 0 and any(haystack[i:i + n] == needle
                         for i in range(len(haystack) - n + 1))


@dataclass(frozen=True)
class HardnessLabel:
    value: float
    respondent_count: int = 0

    def __post_init__(self):
        if not 0.0 <= self.value <= 1.0:
            raise ValueError(f"hardness {self.value} outside [0, 1]")
        if self.respondent_count < 0:
            raise ValueError("respondent_count must be >= 0")

    @classmethod
    def from_counts(cls, correct_responses, respondent_count):
        if respondent_count <= 0:
            raise ValueError("need at least one respondent")
        if not 0 <= correct_responses <= respondent_count:
            raise ValueError("correct responses exceed respondents")
        return cls(correct_responses / respondent_count, respondent_count)


@dataclass(frozen=True)
class SchemaHalf:
    id: str
    sentence: str
    question: str
    candidates: tuple
    source: str = "other"
    correct: int = None
    hardness: float = None
    respondents: int = None

    def __post_init__(self):
        object.__setattr__(self, "candidates", tuple(self.candidates))
        self.validate()

    def validate(self):
        if not self.id:
            raise ValidationError("empty id")
        if self.source not in SOURCES:
            raise ValidationError(f"unknown source {self.source!r}", self.id)
        if not self.sentence.strip():
            raise ValidationError("empty sentence", self.id)
        if not self.question.strip():
            raise ValidationError("empty question", self.id)
        if len(self.candidates) != 2 or not all(
                isinstance(c, str) and c.strip() for c in self.candidates):
            raise ValidationError("exactly two candidates required", self.id)
        a1, a2 = (c.strip().lower() for c in self.candidates)
        if a1 == a2:
            raise ValidationError("candidates must differ", self.id)
        words = _words(self.sentence)
        for cand in self.candidates:
            if not _contains_span(words, _words(cand)):
                raise ValidationError(
                    f"candidate {cand!r} does not occur in the sentence",
                    self.id)
        if self.correct is not None and self.correct not in (1, 2):
            raise ValidationError("correct must be 1, 2 or null", self.id)
        if self.hardness is not None:
            h = float(self.hardness)
            if not math.isfinite(h) or not 0.0 <= h <= 1.0:
                raise ValidationError(f"hardness {h} outside [0, 1]", self.id)
        if self.respondents is not None and self.respondents < 0:
            raise ValidationError("negative respondent count", self.id)

    @property
    def label(self):
        if self.hardness is None:
            return None
        return HardnessLabel(float(self.hardness), self.respondents or 0)

    @property
    def base_id(self):
        """Id with any oversampling suffix removed."""
        return self.id.split(REP_SEPARATOR, 1)[0]

    def to_record(self):
        return {
            "id": self.id,
            "source": self.source,
            "sentence": self.sentence,
            "question": self.question,
            "answers": list(self.candidates),
            "correct": self.correct,
            "hardness": self.hardness,
            "respondents": self.respondents,
        }

    @classmethod
    def from_record(cls, rec, index=None):
        if not isinstance(rec, dict):
            raise ParseError("expected an object", index)
        missing = [k for k in ("id", "sentence", "question", "answers")
                   if k not in rec]
        if missing:
            raise ParseError(f"missing field(s) {missing}", index)
        answers = rec["answers"]
        if not isinstance(answers, (list, tuple)):
            raise ParseError("answers must be a list", index)
        if len(answers) != 2:
            raise ValidationError("exactly two candidates required",
                                  str(rec["id"]))
        try:
            hardness = rec.get("hardness")
            hardness = None if hardness is None else float(hardness)
            correct = rec.get("correct")
            correct = None if correct is None else int(correct)
            respondents = rec.get("respondents")
            respondents = None if respondents is None else int(respondents)
        except (TypeError, ValueError) as exc:
            raise ParseError(str(exc), index) from None
        return cls(id=str(rec["id"]), source=rec.get("source", "other"),
                   sentence=rec["sentence"], question=rec["question"],
                   candidates=tuple(answers), correct=correct,
                   hardness=hardness, respondents=respondents)


@dataclass(frozen=True)
class Dataset:
    halves: tuple = ()
    provenance: str = ""

    def __post_init__(self):
        object.__setattr__(self, "halves", tuple(self.halves))
        seen = set()
        for h in self.halves:
            if h.id in seen:
                raise ValidationError("duplicate id", h.id)
            seen.add(h.id)

    def __len__(self):
        return len(self.halves)

    def __iter__(self):
        return iter(self.halves)

    def __getitem__(self, i):
        return self.halves[i]

    @property
    def ids(self):
        return [h.id for h in self.halves]

    def by_id(self):
        return {h.id: h for h in self.halves}

    def subset(self, ids, provenance=None):
        wanted = set(ids)
        return Dataset([h for h in self.halves if h.id in wanted],
                       provenance or self.provenance)

    def labels(self):
        if any(h.hardness is None for h in self.halves):
            raise ValidationError("dataset contains unlabeled halves")
        return np.array([h.hardness for h in self.halves], dtype=np.float64)


def load_dataset(path, format=None):
    path = Path(path)
    if format is None:
        format = "csv" if path.suffix.lower() == ".csv" else "json"
    text = path.read_text(encoding="utf-8")
    if format == "json":
        return _load_json(text, str(path))
    if format == "csv":
        return _load_csv(text, str(path))
    raise ValueError(f"unknown dataset format {format!r}")


def _load_json(text, provenance):
    if not text.strip():
        return Dataset((), provenance)
    try:
        records = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON at line {exc.lineno}: {exc.msg}")
    if not isinstance(records, list):
        raise ParseError("top-level value must be an array")
    return Dataset([SchemaHalf.from_record(r, i)
                    for i, r in enumerate(records)], provenance)


def _load_csv(text, provenance):
    if not text.strip():
        return Dataset((), provenance)
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None or "id" not in reader.fieldnames:
        raise ParseError("CSV header row with an 'id' column is required")
    halves = []
    for i, row in enumerate(reader):
        # header is line 1
        line = i + 2
        if None in row:
            raise ParseError("too many columns", f"line {line}")
        answers = row.get("answers")
        if answers is None:
            raise ParseError("missing answers column", f"line {line}")
        rec = dict(row)
        rec["answers"] = answers.split("|") if answers else []
        for key in ("correct", "hardness", "respondents"):
            if rec.get(key, "") in ("", None):
                rec[key] = None
        if not rec.get("source"):
            rec["source"] = "other"
        halves.append(SchemaHalf.from_record(rec, f"line {line}"))
    return Dataset(halves, provenance)


def dumps_dataset(d):
    """Canonical JSON text for a dataset (stable key order, trailing newline)."""
    return json.dumps([h.to_record() for h in d.halves], indent=2,
                      ensure_ascii=False) + "\n"


def save_dataset(d, path, format=None):
    path = Path(path)
    if format is None:
        format = "csv" if path.suffix.lower() == ".csv" else "json"
    if format == "json":
        path.write_text(dumps_dataset(d), encoding="utf-8")
        return
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=FIELDS, lineterminator="\n")
    writer.writeheader()
    for h in d.halves:
        rec = h.to_record()
        rec["answers"] = "|".join(rec["answers"])
        writer.writerow({k: "" if v is None else v for k, v in rec.items()})
    path.write_text(buf.getvalue(), encoding="utf-8")


def load_id_list(path):
    """Read an id-list file: one id per line, '#' starts a comment."""
    ids = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            ids.append(line)
    return ids


def round_half_up(x):
    return int(math.floor(x + 0.5))


def split_train_test(d, test_fraction, seed):
    """Random partition; returns (train, test) with original order kept."""
    if not 0.0 < test_fraction < 1.0:
        raise ValueError("test_fraction must lie in (0, 1)")
    n = len(d)
    n_test = round_half_up(n * test_fraction)
    if n_test == 0 or n_test == n:
        raise DegenerateSplitError(
            f"splitting {n} halves at {test_fraction} leaves an empty side")
    order = np.random.default_rng(seed).permutation(n)
    test_idx = set(order[:n_test].tolist())
    train = [h for i, h in enumerate(d.halves) if i not in test_idx]
    test = [h for i, h in enumerate(d.halves) if i in test_idx]
    return Dataset(train, d.provenance), Dataset(test, d.provenance)


def split_by_ids(d, test_ids):
    """Fixed split: the listed ids form the test side."""
    test_ids = set(test_ids)
    unknown = test_ids - set(d.ids)
    if unknown:
        raise ValidationError(f"{len(unknown)} test id(s) not in dataset: "
                              f"{sorted(unknown)[:5]}")
    train = [h for h in d.halves if h.id not in test_ids]
    test = [h for h in d.halves if h.id in test_ids]
    if not train or not test:
        raise DegenerateSplitError("id split leaves an empty side")
    return Dataset(train, d.provenance), Dataset(test, d.provenance)


def replication_factor(n_dpr, n_eligible):
    return max(1, round_half_up(n_dpr / n_eligible))


def oversample_balance(original, dpr, excluded_ids=(), target_total=None):
    """Balance the original set against DPR by replicating its halves.

    Every eligible original half appears k times; the first occurrence keeps
    its id, later ones get ``#rep-n``.  With ``target_total`` surplus
    replicas are dropped round-robin, highest replica number first.
    """
    excluded = set(excluded_ids)
    unknown = excluded - set(original.ids)
    if unknown:
        raise ValidationError(f"excluded ids not in original: "
                              f"{sorted(unknown)[:5]}")
    for h in list(original) + list(dpr):
        if h.hardness is None:
            raise ValidationError("unlabeled half in oversampling input", h.id)
    eligible = [h for h in original.halves if h.id not in excluded]
    if not eligible:
        raise EmptyEligibleSetError("every original half is excluded")
    k = replication_factor(len(dpr), len(eligible))

    reps = {rep: [h if rep == 1 else
                  replace(h, id=f"{h.id}{REP_SEPARATOR}{rep}")
                  for h in eligible]
            for rep in range(1, k + 1)}
    total = len(dpr) + k * len(eligible)
    if target_total is not None:
        surplus = total - target_total
        if surplus < 0:
            raise ValueError(f"target_total {target_total} exceeds the "
                             f"{total} halves available")
        if surplus > (k - 1) * len(eligible):
            raise ValueError("target_total would require dropping originals")
        dropped = set()
        rep, pos = k, 0
        for _ in range(surplus):
            dropped.add((rep, pos))
            pos += 1
            if pos == len(eligible):
                rep, pos = rep - 1, 0
        reps = {r: [h for i, h in enumerate(hs) if (r, i) not in dropped]
                for r, hs in reps.items()}

    halves = list(dpr.halves)
    for rep in range(1, k + 1):
        halves.extend(reps[rep])
    return Dataset(halves, f"oversampled k={k}")
