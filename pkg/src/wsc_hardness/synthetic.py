"""Synthetic schema halves and offline fixture resources.

The labelled set stands in for crowd-sourced hardness when real labels are
unavailable.  Each label is a known function of three extractable
properties plus Gaussian noise:

    hardness = 0.97 - 0.015 * (SL - 9) - 0.12 * negated - 0.10 * reversing

where SL is the sentence length in words, ``negated`` marks a negated
pronoun clause and ``reversing`` a contrastive connective (although, but).
"""

import hashlib
import json
from pathlib import Path

import numpy as np

from .knowledge import build_corpus_index
from .schema import Dataset, SchemaHalf, _words, dumps_dataset

PEOPLE = ["teacher", "student", "doctor", "farmer", "soldier", "lawyer",
          "nurse", "pilot", "baker", "driver", "singer", "painter"]
VERBS = ["chased", "helped", "thanked", "called", "visited", "warned",
         "praised", "blamed", "followed", "watched", "hired", "fired"]
# antonym-ish pairs: the special word of each schema flips the referent
TRAITS = [("clever", "careless"), ("tired", "strong"), ("angry", "kind"),
          ("happy", "nervous"), ("brave", "weak"), ("rude", "polite"),
          ("hungry", "lazy"), ("quiet", "angry")]
MODIFIERS = ["old", "young", "tall", "quiet"]
PLACES = ["in the park", "at the station", "after the meeting",
          "in the office", "at the market", "near the library",
          "in the garden one morning"]
CONNECTIVES = ["because", "because", "although", "but"]
REVERSING = {"although", "but"}

BASE, SLOPE_LEN, NEG_DROP, REV_DROP, NOISE = 0.97, 0.015, 0.12, 0.10, 0.04


def label_function(n_words, negated, reversing):
    """Noise-free hardness of a synthetic half."""
    return (BASE - SLOPE_LEN * (n_words - 9) - NEG_DROP * int(negated)
            - REV_DROP * int(reversing))


def _phrase(rng, noun):
    if rng.random() < 0.4:
        return f"the {rng.choice(MODIFIERS)} {noun}"
    return f"the {noun}"


def make_schema(rng, k):
    a, b = rng.choice(PEOPLE, size=2, replace=False)
    verb = rng.choice(VERBS)
    traits = TRAITS[rng.integers(len(TRAITS))]
    cn = rng.choice(CONNECTIVES)
    pa, pb = _phrase(rng, a), _phrase(rng, b)
    place = f" {rng.choice(PLACES)}" if rng.random() < 0.6 else ""
    out = []
    for side, trait in zip("ab", traits):
        negated = bool(rng.random() < 0.3)
        be = "was not" if negated else "was"
        sentence = f"{pa.capitalize()} {verb} {pb}{place} {cn} he {be} {trait}."
        question = f"Who {be} {trait}?"
        n = len(_words(sentence))
        mean = label_function(n, negated, cn in REVERSING)
        y = float(np.clip(mean + rng.normal(0.0, NOISE), 0.0, 1.0))
        out.append(SchemaHalf(
            id=f"syn-{k:03d}{side}", sentence=sentence, question=question,
            candidates=(pa.capitalize(), pb.capitalize()), source="other",
            correct=1 if side == "a" else 2, hardness=round(y, 4),
            respondents=None))
    return out


def generate_dataset(n_schemas=143, seed=2024):
    rng = np.random.default_rng(seed)
    halves = []
    for k in range(n_schemas):
        halves.extend(make_schema(rng, k))
    return Dataset(halves, f"synthetic seed={seed}")


def pick_ids(ids, n, seed):
    order = np.random.default_rng(seed).permutation(len(ids))
    return [ids[i] for i in sorted(order[:n])]


# -- fixture resources ------------------------------------------------------

def sample_halves():
    """The two classic worked schemas, both halves each."""
    return Dataset([
        SchemaHalf("catch-a", "The cat caught the mouse because it was "
                   "clever.", "Who is clever?", ("The cat", "The mouse"),
                   "WSC-original", 1),
        SchemaHalf("catch-b", "The cat caught the mouse because it was "
                   "careless.", "Who is careless?", ("The cat", "The mouse"),
                   "WSC-original", 2),
        SchemaHalf("councilmen-1", "The city councilmen refused the "
                   "demonstrators a permit because they feared violence.",
                   "Who feared violence?",
                   ("The city councilmen", "The demonstrators"),
                   "WSC-original", 1),
        SchemaHalf("councilmen-2", "The city councilmen refused the "
                   "demonstrators a permit because they advocated violence.",
                   "Who advocated violence?",
                   ("The city councilmen", "The demonstrators"),
                   "WSC-original", 2),
    ], "worked examples")


POLARITY = [("refuse", "negative"), ("advocate", "positive"),
            ("blame", "negative"), ("warn", "negative"), ("fire", "negative"),
            ("praise", "positive"), ("thank", "positive"),
            ("help", "positive"), ("hire", "positive"),
            ("fear", "negative"), ("angry", "negative"),
            ("rude", "negative"), ("lazy", "negative"),
            ("careless", "negative"), ("weak", "negative"),
            ("kind", "positive"), ("polite", "positive"),
            ("brave", "positive"), ("clever", "positive"),
            ("happy", "positive"), ("strong", "positive")]

CHAINS = [
    "refuse-o advocate-s protest-s arrest-o",
    "refuse-s fear-s deny-s",
    "chase-s catch-s eat-s",
    "hire-s pay-s fire-s",
    "hire-o work-s quit-s",
    "warn-s ignore-o punish-s",
    "help-s thank-o",
    "help-o thank-s",
    "blame-s accuse-s",
    "praise-o reward-o",
]

FRAMES = [("refuse", "authority", "applicant"),
          ("hire", "employer", "employee"), ("fire", "employer", "employee"),
          ("help", "helper", "beneficiary"), ("warn", "adviser", "listener")]


def _pseudo_count(phrase, scale=100000):
    h = hashlib.sha256(phrase.encode("utf-8")).digest()
    return int.from_bytes(h[:4], "little") % scale


def corpus_lines(seed=7, n_random=1500):
    rng = np.random.default_rng(seed)
    adjs = sorted({t for pair in TRAITS for t in pair})
    lines = []
    for _ in range(n_random):
        a, b = rng.choice(PEOPLE, size=2, replace=False)
        verb = rng.choice(VERBS)
        if rng.random() < 0.5:
            lines.append(f"The {a} {verb} the {b}.")
        else:
            cn = rng.choice(CONNECTIVES)
            lines.append(f"The {a} {verb} the {b} {cn} he was "
                         f"{rng.choice(adjs)}.")
    # dense (refuse, because, fear) evidence for the connective rule
    groups = ["councilmen", "officials", "guards", "managers"]
    for i in range(120):
        lines.append(f"The {groups[i % 4]} refused the visitors a permit "
                     f"because they feared trouble.")
    lines.append("The cat caught the mouse.")
    lines.append("The demonstrators advocated reform.")
    return lines


def relatedness_rows(seed=11):
    rng = np.random.default_rng(seed)
    adjs = sorted({t for pair in TRAITS for t in pair})
    rows = [("councilman", "fear", 0.6), ("demonstrator", "fear", 0.3),
            ("councilman", "advocate", 0.2), ("demonstrator", "advocate", 0.7),
            ("authority", "fear", 0.5), ("applicant", "advocate", 0.6),
            ("cat", "clever", 0.4), ("mouse", "clever", 0.3)]
    for p in PEOPLE:
        for adj in adjs:
            if rng.random() < 0.35:
                rows.append((p, adj, round(float(rng.random()), 3)))
    return rows


def hit_cache_for(dataset):
    """Deterministic pseudo hit counts for every query of ``dataset``."""
    from .features import analyze, build_queries
    from .errors import HardnessError

    cache = {}
    for h in dataset.halves:
        try:
            q = build_queries(analyze(h))
        except HardnessError:
            continue
        for a, b in q.pairs():
            for phrase in (a, b):
                if phrase is not None:
                    cache[phrase] = _pseudo_count(phrase)
    return cache


def write_fixture_bundle(root):
    """Write resources/, samples and the synthetic set below ``root``."""
    root = Path(root)
    res = root / "resources"
    res.mkdir(parents=True, exist_ok=True)
    (res / "polarity.tsv").write_text(
        "# lemma\tpolarity\n"
        + "".join(f"{w}\t{p}\n" for w, p in POLARITY), encoding="utf-8")
    (res / "scores.tsv").write_text(
        "# word\tscore in [-1, 1]\n"
        + "".join(f"{w}\t{0.6 if p == 'positive' else -0.6}\n"
                  for w, p in POLARITY), encoding="utf-8")
    (res / "chains.txt").write_text(
        "# one chain per line: verb-s / verb-o events\n"
        + "\n".join(CHAINS) + "\n", encoding="utf-8")
    (res / "frames.tsv").write_text(
        "# verb\tsubject role\tobject role\n"
        + "".join(f"{v}\t{s}\t{o}\n" for v, s, o in FRAMES), encoding="utf-8")
    (res / "relatedness.tsv").write_text(
        "# word\tword\trelatedness in [0, 1]\n"
        + "".join(f"{a}\t{b}\t{v}\n" for a, b, v in relatedness_rows()),
        encoding="utf-8")
    lines = corpus_lines()
    (res / "corpus.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    build_corpus_index(lines).save(res / "corpus_index.json")

    data = generate_dataset()
    samples = sample_halves()
    cache = hit_cache_for(data)
    # the worked example's two subject queries carry hand-set counts
    cache.update({"cat was": 1000, "mouse was": 500})
    (res / "hits.json").write_text(
        json.dumps(dict(sorted(cache.items())), indent=1) + "\n",
        encoding="utf-8")

    (root / "samples.json").write_text(dumps_dataset(samples),
                                       encoding="utf-8")
    syn = root / "synthetic"
    syn.mkdir(exist_ok=True)
    (syn / "halves.json").write_text(dumps_dataset(data), encoding="utf-8")
    test_ids = pick_ids(data.ids, 100, seed=5)
    subset = pick_ids(test_ids, 57, seed=6)
    (syn / "test.ids").write_text("\n".join(test_ids) + "\n", encoding="utf-8")
    (syn / "subset57.ids").write_text("\n".join(subset) + "\n",
                                      encoding="utf-8")
    return root
