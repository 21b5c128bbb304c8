"""Per-half feature extraction for the forest regressor.

Twelve components produce 47 named features.  Each ``f_*`` function takes
a :class:`HalfAnalysis` (tokens, clauses, triples and the located
candidates/pronoun of one half) plus whatever resource it needs, and
returns its block of features.  When a component cannot be applied it
returns its sentinels (-1, 0 or "neutral") and :func:`extract_all` marks it
as not covered.
"""

import csv
import io
import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import (CacheMissOffline, HardnessError, NetworkError,
                     NoVerbFoundError, UndeterminedError)
from .knowledge import (chains_containing, connective_triple_frequency,
                        frame_roles_for, governing_word, polarity_of,
                        relatedness, role_frequency)
from .text import (PERSONAL_PRONOUNS, WH_WORDS, connective_table,
                   classify_sentence, detect_negation, extract_triples,
                   split_clauses, stem, tokenize, word_tokens)

log = logging.getLogger(__name__)

COMPONENTS = {
    "sentence-pattern": ["ST", "SP"],
    "sentence-negation": ["STN", "QTN"],
    "semantic-relations": ["SEM"],
    "number-of-words": ["SL"],
    "word-relations": ["WN", "WP", "HN", "VF", "JF"],
    "search-queries": [f"GL{k}i{i}" for k in (1, 2, 3, 4) for i in (1, 2)]
    + [f"GLF{k}i{i}" for k in (1, 2, 3, 4) for i in (1, 2)],
    "relatedness": ["CN", "CNF"],
    "discourse-connective": ["CNT"],
    "narrative-chains": ["NCH"],
    "polarity-rules": ["RP1i1", "RP1i2", "RP2i1", "RP2i2", "RP3i1", "RP3i2",
                       "RPTL"],
    "polarity-machine": ["OP1i1", "OP1i2", "OP2i1", "OP2i2", "OP3i1", "OP3i2",
                         "OPTL"],
    "polarity-simple": ["TBSPOL", "TBQPOL"],
}
FEATURE_NAMES = [n for names in COMPONENTS.values() for n in names]
CATEGORICAL = frozenset(["ST", "SP", "RP2i1", "RP2i2", "RP3i1", "RP3i2",
                         "OP2i1", "OP2i2", "OP3i1", "OP3i2", "TBSPOL",
                         "TBQPOL"])
# features whose value 1/2 names a candidate
CHOICE_FEATURES = ("SEM", "CN", "CNF", "CNT", "NCH", "RPTL", "OPTL")

_COMPARATIVE_IRREGULAR = frozenset({"better", "worse", "more", "less"})


@dataclass(frozen=True)
class ExtractionConfig:
    threshold: float = 0.20
    min_connective_count: int = 100
    neutral_band: float = 0.1
    similarity_fallback: bool = True

    def __post_init__(self):
        if not 0.0 < self.threshold < 1.0:
            raise ValueError("threshold must lie in (0, 1)")
        if self.min_connective_count < 1:
            raise ValueError("min_connective_count must be >= 1")


@dataclass(frozen=True)
class QuerySet:
    QR1: str
    QR2: str
    QR3: str = None
    QR4: str = None
    QR5: str = None
    QR6: str = None
    th: float = 0.20

    def pairs(self):
        return [(self.QR1, self.QR2), (self.QR3, self.QR4),
                (self.QR5, self.QR6)]

    def as_tuple(self):
        return (self.QR1, self.QR2, self.QR3, self.QR4, self.QR5, self.QR6)


@dataclass
class FeatureVector:
    values: dict
    coverage: dict = field(default_factory=dict)

    def __getitem__(self, name):
        return self.values[name]

    def as_list(self, names=FEATURE_NAMES):
        return [self.values[n] for n in names]


# -- analysis ---------------------------------------------------------------

def _find_span(words, phrase_words):
    n = len(phrase_words)
    low = [w.lower for w in words]
    for i in range(len(words) - n + 1):
        if low[i:i + n] == phrase_words:
            return words[i:i + n]
    return None


@dataclass
class Candidate:
    text: str
    tokens: list            # core tokens in the sentence, determiners removed
    head: object            # Token
    proper: bool
    role: str = None        # role w.r.t. its governing verb
    triple: object = None

    @property
    def query_form(self):
        s = self.head.surface
        return s if self.proper else s.lower()


@dataclass
class HalfAnalysis:
    half: object
    tokens: list
    words: list
    clauses: list
    triples: list
    q_tokens: list
    q_triples: list
    candidates: list
    pronoun: object = None          # Token in the sentence
    pronoun_triple: object = None
    pronoun_role: str = None        # role in its sentence clause
    question_role: str = None       # role of the wh-word in the question
    question_verb: object = None
    connective: object = None       # first clause-linking connective Token
    verb_triple: object = None      # clause governing the candidates

    @property
    def verb(self):
        return None if self.verb_triple is None else self.verb_triple.verb

    @property
    def governor(self):
        """Word governing the definite pronoun (verb or adjective)."""
        if self.pronoun_triple is None:
            return None
        return governing_word(self.pronoun_triple)


def _role_in(triple, tok):
    if triple.subject is not None and triple.subject.index == tok.index:
        return "subject"
    if triple.object is not None and triple.object.index == tok.index:
        return "object"
    return None


def analyze(half, annotations=None):
    """Run the text layer over one half and locate its participants."""
    ann = (annotations or {}).get(half.id, {})
    tokens = tokenize(half.sentence)
    words = word_tokens(tokens)
    clauses = split_clauses(tokens)
    try:
        triples = extract_triples(half.sentence, ann.get("sentence"))
    except NoVerbFoundError:
        triples = []
    q_tokens = tokenize(half.question)
    try:
        q_triples = extract_triples(half.question, ann.get("question"))
    except NoVerbFoundError:
        q_triples = []
    plain = [t for t in triples if not t.is_link]

    cands = []
    for text in half.candidates:
        ws = [w.lower() for w in text.split()]
        span = _find_span(words, [w.strip(".,;:!?").lower() for w in ws])
        core = [t for t in (span or []) if t.pos != "det"] or list(span or [])
        head = core[-1] if core else None
        first = text.split()[0]
        proper = (first[0].isupper()
                  and tokenize(first)[0].pos not in ("det", "pronoun")
                  and all(w[0].isupper() for w in text.split()))
        cand = Candidate(text, core, head, proper)
        if head is not None:
            for t in plain:
                role = _role_in(t, head)
                if role is not None:
                    cand.role, cand.triple = role, t
                    break
        cands.append(cand)

    a = HalfAnalysis(half, tokens, words, clauses, triples, q_tokens,
                     q_triples, cands)
    located = [c.triple for c in cands if c.triple is not None]
    if located:
        a.verb_triple = min(located, key=lambda t: t.clause)

    cand_idx = {t.index for c in cands for t in c.tokens}
    after = max((c.head.index for c in cands if c.head is not None),
                default=-1)
    pron = [t for t in words if t.pos == "pronoun"
            and t.lower in PERSONAL_PRONOUNS and t.index not in cand_idx]
    pron = [t for t in pron if t.index > after] or pron
    for p in pron:
        for t in plain:
            role = _role_in(t, p)
            if role is not None:
                a.pronoun, a.pronoun_triple, a.pronoun_role = p, t, role
                break
        if a.pronoun is not None:
            break
    if a.pronoun is None and pron:
        a.pronoun = pron[0]

    for t in q_triples:
        if t.is_link:
            continue
        for tok in (t.subject, t.object):
            if tok is not None and tok.lower in WH_WORDS | PERSONAL_PRONOUNS:
                a.question_role = _role_in(t, tok)
                a.question_verb = t.verb
                break
        if a.question_role:
            break
    if a.question_verb is None:
        a.question_verb = next((t for t in word_tokens(q_tokens)
                                if t.pos in ("verb", "aux-verb")), None)

    a.connective = next((c.connective for c in clauses
                         if c.connective is not None), None)
    return a


# -- components -------------------------------------------------------------

def _choice(c1, c2):
    if c1 > c2:
        return 1
    if c2 > c1:
        return 2
    return -1


def f_sentence_pattern(a):
    shape = classify_sentence(a.half.sentence)
    return {"ST": shape.sentence_type, "SP": shape.pattern}


def f_negation(a):
    """STN: candidates' clause negated; QTN: the pronoun's clause negated.

    Raises UndeterminedError when neither scope can be found.
    """
    out, found = {"STN": 0, "QTN": 0}, False
    try:
        out["STN"] = int(detect_negation(a.triples, "candidates-clause"))
        found = True
    except UndeterminedError:
        pass
    qtn = None
    for triples in (a.triples, a.q_triples):
        try:
            qtn = bool(qtn) | detect_negation(triples, "pronoun-clause")
        except UndeterminedError:
            continue
    if qtn is not None:
        out["QTN"] = int(qtn)
        found = True
    if not found:
        raise UndeterminedError("no clause to test for negation")
    return out


def f_semantic_role(a, idx):
    role = a.question_role or a.pronoun_role
    c1, c2 = (c.head for c in a.candidates)
    if role is None or c1 is None or c2 is None:
        return {"SEM": -1}
    return {"SEM": _choice(role_frequency(idx, c1.lemma, role),
                           role_frequency(idx, c2.lemma, role))}


def f_length(a):
    return {"SL": len(a.words)}


def word_pairs(before, after):
    """Cross-connective word pairs minus adjective/noun pairs."""
    return [(b, c) for b in before for c in after
            if {b.pos, c.pos} != {"adj", "noun"}]


def candidate_heads(a):
    """Governing token of each located candidate."""
    heads = []
    for c in a.candidates:
        if c.head is None:
            continue
        if c.triple is not None:
            heads.append(c.triple.verb)
            continue
        prev = [t for t in a.words if t.index < c.tokens[0].index
                and t.pos in ("verb", "aux-verb", "other")]
        if prev:
            heads.append(prev[-1])
    return heads


def f_word_relations(a):
    zero = {"WN": 0, "WP": 0, "HN": 0, "VF": 0, "JF": 0}
    cn = a.connective
    if cn is None:
        raise UndeterminedError("no connective in the sentence")
    cand_idx = {t.index for c in a.candidates for t in c.tokens}
    rest = [t for t in a.words if t.index not in cand_idx and t is not cn]
    out = dict(zero)
    out["WN"] = len(rest)
    before = [t for t in rest if t.index < cn.index]
    after = [t for t in rest if t.index > cn.index]
    out["WP"] = len(word_pairs(before, after))
    if all(c.head is not None for c in a.candidates):
        heads = {t.index: t for t in candidate_heads(a)}
        out["HN"] = len(heads)
        out["VF"] = sum(1 for t in heads.values()
                        if t.pos in ("verb", "aux-verb"))
    jf = 0
    for c in a.candidates:
        if c.head is None:
            continue
        k = a.words.index(c.head) - 1
        while k >= 0 and a.words[k].pos in ("adj", "noun", "det"):
            jf += a.words[k].pos == "adj"
            k -= 1
    out["JF"] = jf
    return out


def _question_adjective(q_tokens):
    qw = word_tokens(q_tokens)
    for i, t in enumerate(qw):
        if t.lemma == "be":
            for nxt in qw[i + 1:]:
                if nxt.pos == "adj":
                    return nxt.surface.lower()
                if nxt.pos != "other":
                    break
    return None


def build_queries(a, names=None, th=0.20):
    """The six hit-count queries; ``names`` overrides the candidate strings.

    Raises UndeterminedError when no verb governs the pronoun.
    """
    vq = a.pronoun_triple.verb if a.pronoun_triple is not None \
        else a.question_verb
    if vq is None:
        raise UndeterminedError("no verb governs the definite pronoun")
    a1, a2 = names or [c.query_form for c in a.candidates]
    vq_s = vq.surface.lower()
    w = []
    if a.question_verb is not None:
        w = [t.surface.lower() for t in word_tokens(a.q_tokens)
             if t.index > a.question_verb.index]
    j = _question_adjective(a.q_tokens)
    qr3 = qr4 = qr5 = qr6 = None
    if w:
        tail = " ".join(w)
        qr3, qr4 = f"{a1} {vq_s} {tail}", f"{a2} {vq_s} {tail}"
    if j:
        qr5, qr6 = f"{j} {a1}", f"{j} {a2}"
    return QuerySet(f"{a1} {vq_s}", f"{a2} {vq_s}", qr3, qr4, qr5, qr6, th)


def pair_decision(h_a, h_b, th):
    """1 when the first count wins by more than th (relative), 2 for the
    second, 0 otherwise."""
    diff = (h_a - h_b) / max(h_a, h_b, 1)
    if diff > th:
        return 1
    if diff < -th:
        return 2
    return 0


def majority(decisions):
    ones = sum(d == 1 for d in decisions)
    twos = sum(d == 2 for d in decisions)
    return _choice(ones, twos) if ones != twos else 0


def _onehot(d):
    return (int(d == 1), int(d == 2))


def search_features(queries, hits, prefix, th):
    """GL-style block from a QuerySet and a hit-count provider.

    Pairs whose counts are unavailable stay undecided.  Returns
    (features, number of decided pairs attempted).
    """
    decisions, looked_up = [], 0
    for qa, qb in queries.pairs():
        d = 0
        if qa is not None and qb is not None:
            try:
                d = pair_decision(hits.hit_count(qa), hits.hit_count(qb), th)
                looked_up += 1
            except (CacheMissOffline, NetworkError) as exc:
                log.debug("hit count unavailable: %s", exc)
        decisions.append(d)
    decisions.append(majority(decisions))
    out = {}
    for k, d in enumerate(decisions, start=1):
        out[f"{prefix}{k}i1"], out[f"{prefix}{k}i2"] = _onehot(d)
    return out, looked_up


def f_search_queries(a, hits, cfg=ExtractionConfig()):
    try:
        q = build_queries(a, th=cfg.threshold)
    except UndeterminedError:
        return search_features(QuerySet(None, None), hits, "GL",
                               cfg.threshold)[0]
    return search_features(q, hits, "GL", cfg.threshold)[0]


def framed_names(a, frames):
    """Role nouns replacing proper-name candidates, or None."""
    c1, c2 = a.candidates
    if not (c1.proper and c2.proper) or a.verb is None:
        return None
    roles = frame_roles_for(frames, a.verb.lemma)
    if roles is None:
        return None
    by_role = {"subject": roles[0], "object": roles[1]}
    if c1.role is None or c2.role is None or c1.role == c2.role:
        return None
    if c1.triple is not c2.triple:
        return None
    return [by_role[c1.role], by_role[c2.role]]


def f_search_queries_framed(a, frames, hits, cfg=ExtractionConfig()):
    names = framed_names(a, frames)
    blank = {f"GLF{k}i{i}": 0 for k in (1, 2, 3, 4) for i in (1, 2)}
    if names is None:
        return blank
    try:
        q = build_queries(a, names=names, th=cfg.threshold)
    except UndeterminedError:
        return blank
    return search_features(q, hits, "GLF", cfg.threshold)[0]


def f_relatedness(a, tbl, frames=None):
    gov = a.governor
    out = {"CN": -1, "CNF": -1}
    if gov is None or any(c.head is None for c in a.candidates):
        return out
    x = gov.lemma
    c1, c2 = a.candidates
    out["CN"] = _choice(relatedness(tbl, c1.head.lemma, x),
                        relatedness(tbl, c2.head.lemma, x))
    names = framed_names(a, frames) if frames is not None else None
    if names is not None:
        out["CNF"] = _choice(relatedness(tbl, names[0], x),
                             relatedness(tbl, names[1], x))
    return out


def involves_comparison(a):
    for t in a.words:
        if t.lower == "than" or t.lower in _COMPARATIVE_IRREGULAR:
            return True
        if t.pos == "adj" and t.lemma != t.lower \
                and t.lower.endswith(("er", "est")):
            return True
    return False


def _candidate_with_role(a, role):
    hits = [i for i, c in enumerate(a.candidates, start=1)
            if c.role == role and c.triple is a.verb_triple]
    return hits[0] if len(hits) == 1 else -1


def f_connective(a, idx, cfg=ExtractionConfig()):
    gov = a.governor
    if a.verb is None or gov is None or a.connective is None:
        return {"CNT": -1}
    x = stem(gov.lemma)
    count = connective_triple_frequency(idx, a.verb.lemma, a.connective.lower,
                                        x)
    if count < cfg.min_connective_count:
        return {"CNT": -1}
    if gov.pos == "verb":
        return {"CNT": _candidate_with_role(a, a.pronoun_role)}
    if gov.pos == "adj" and not involves_comparison(a):
        return {"CNT": _candidate_with_role(a, "subject")}
    return {"CNT": -1}


def f_narrative_chain(a, db, cfg=ExtractionConfig()):
    gov = a.governor
    if a.verb is None or gov is None or a.pronoun_role is None:
        return {"NCH": -1}
    pr_event = (gov.lemma, a.pronoun_role[0])
    roles = [c.role if c.triple is a.verb_triple else None
             for c in a.candidates]
    if None in roles or roles[0] == roles[1]:
        return {"NCH": -1}
    passes = [False, True] if cfg.similarity_fallback else [False]
    for fallback in passes:
        counts = [len(chains_containing(db, (a.verb.lemma, r[0]), pr_event,
                                        fallback)) for r in roles]
        if any(counts):
            return {"NCH": _choice(*counts)}
    return {"NCH": -1}


_OPPOSITE = {"negative": "positive", "positive": "negative",
             "neutral": "neutral"}


def project_polarity(event_polarity, role):
    """Participant polarity: a subject shares its event's polarity, an
    object takes the opposite one."""
    if role == "subject":
        return event_polarity
    if role == "object":
        return _OPPOSITE[event_polarity]
    return "neutral"


def polarity_block(a, event_polarity, prefix):
    """RP/OP-style features given ``event_polarity(token, triple)``."""
    cand_pol = ["neutral", "neutral"]
    if a.verb_triple is not None:
        p_v = event_polarity(a.verb, a.verb_triple)
        for i, c in enumerate(a.candidates):
            if c.triple is a.verb_triple:
                cand_pol[i] = project_polarity(p_v, c.role)
    pron_pol = "neutral"
    gov = a.governor
    if gov is not None:
        p_x = event_polarity(gov, a.pronoun_triple)
        pron_pol = p_x if gov.pos == "adj" \
            else project_polarity(p_x, a.pronoun_role)
    r1 = [0, 0]
    if pron_pol != "neutral":
        matches = [i for i in (0, 1) if cand_pol[i] == pron_pol]
        if len(matches) == 1:
            r1[matches[0]] = 1
    r2 = [f"{cand_pol[i]}-{pron_pol}" for i in (0, 1)]
    conn = connective_table()
    reversing = next((c.connective.lower for c in a.clauses
                      if c.connective is not None
                      and conn[c.connective.lower][1]), None)
    r3 = [f"{s}-{reversing}" if reversing else s for s in r2]
    return {
        f"{prefix}1i1": r1[0], f"{prefix}1i2": r1[1],
        f"{prefix}2i1": r2[0], f"{prefix}2i2": r2[1],
        f"{prefix}3i1": r3[0], f"{prefix}3i2": r3[1],
        f"{prefix}TL": _choice(r1[0], r1[1]),
    }


def f_polarity_rule(a, lex):
    return polarity_block(a, lambda tok, triple: polarity_of(lex, tok.lemma),
                          "RP")


class LexiconNegationAnalyzer:
    """Default machine analyzer: lexicon polarity, flipped under negation."""

    def __init__(self, lex):
        self.lex = lex

    def __call__(self, tok, triple):
        p = polarity_of(self.lex, tok.lemma)
        if triple is not None and triple.negated:
            p = _OPPOSITE[p]
        return p


def f_polarity_machine(a, analyzer):
    return polarity_block(a, analyzer, "OP")


def bucket(score, band=0.1):
    if abs(score) < band:
        return "neutral"
    return "positive" if score > 0 else "negative"


def f_polarity_simple(a, table, cfg=ExtractionConfig()):
    out = {"TBSPOL": "neutral", "TBQPOL": "neutral"}
    if a.verb is not None:
        out["TBSPOL"] = bucket(table.score(a.verb.lemma), cfg.neutral_band)
    if a.governor is not None:
        out["TBQPOL"] = bucket(table.score(a.governor.lemma),
                               cfg.neutral_band)
    return out


# -- full vector ------------------------------------------------------------

def sentinels(component):
    out = {}
    for name in COMPONENTS[component]:
        if name in ("SEM", "CN", "CNF", "CNT", "NCH", "RPTL", "OPTL"):
            out[name] = -1
        elif name in ("TBSPOL", "TBQPOL"):
            out[name] = "neutral"
        elif name[:3] in ("RP2", "RP3", "OP2", "OP3"):
            out[name] = "neutral-neutral"
        else:
            out[name] = 0
    return out


def extract_all(half, resources, cfg=ExtractionConfig(), analyzer=None):
    """Complete feature vector for one half, with a coverage record.

    Component failures never propagate: the component emits its sentinels
    and its coverage flag is False.
    """
    a = analyze(half, resources.annotations)
    analyzer = analyzer or LexiconNegationAnalyzer(resources.polarity)
    values, coverage = {}, {}

    def run(component, fn, applicable=lambda out: True):
        try:
            out = fn()
            coverage[component] = bool(applicable(out))
        except HardnessError as exc:
            log.debug("%s: %s undetermined (%s)", half.id, component, exc)
            out = sentinels(component)
            coverage[component] = False
        values.update(out)

    def decided(names):
        return lambda out: any(out[n] != -1 for n in names)

    run("sentence-pattern", lambda: f_sentence_pattern(a))
    run("sentence-negation", lambda: f_negation(a))
    run("semantic-relations", lambda: f_semantic_role(a, resources.index),
        decided(["SEM"]))
    run("number-of-words", lambda: f_length(a))
    run("word-relations", lambda: f_word_relations(a))

    def search():
        out = {}
        try:
            q = build_queries(a, th=cfg.threshold)
            gl, n = search_features(q, resources.hits, "GL", cfg.threshold)
        except UndeterminedError:
            gl, n = search_features(QuerySet(None, None), resources.hits,
                                    "GL", cfg.threshold)
        out.update(gl)
        out.update(f_search_queries_framed(a, resources.frames,
                                           resources.hits, cfg))
        search.looked_up = n
        return out
    search.looked_up = 0
    run("search-queries", search, lambda out: search.looked_up > 0)
    run("relatedness", lambda: f_relatedness(a, resources.relatedness,
                                             resources.frames),
        decided(["CN", "CNF"]))
    run("discourse-connective", lambda: f_connective(a, resources.index, cfg),
        decided(["CNT"]))
    run("narrative-chains", lambda: f_narrative_chain(a, resources.chains,
                                                      cfg),
        decided(["NCH"]))
    run("polarity-rules", lambda: f_polarity_rule(a, resources.polarity),
        decided(["RPTL"]))
    run("polarity-machine", lambda: f_polarity_machine(a, analyzer),
        decided(["OPTL"]))
    run("polarity-simple", lambda: f_polarity_simple(a, resources.scores,
                                                     cfg),
        lambda out: a.verb is not None)
    return FeatureVector({n: values[n] for n in FEATURE_NAMES}, coverage)


def swap_candidates(v):
    """The vector expected after exchanging A1 and A2 (for testing)."""
    out = dict(v.values)
    for name in FEATURE_NAMES:
        if name.endswith("i1"):
            out[name], out[name[:-1] + "2"] = v.values[name[:-1] + "2"], \
                v.values[name]
    for name in CHOICE_FEATURES:
        out[name] = {1: 2, 2: 1}.get(v.values[name], v.values[name])
    return FeatureVector(out, dict(v.coverage))


# -- numeric encoding -------------------------------------------------------

class FeatureSchema:
    """Column order plus label dictionaries for categorical features.

    Codes start at 1; 0 is reserved for categories unseen at training time.
    """

    def __init__(self, names=None, categories=None):
        self.names = list(FEATURE_NAMES if names is None else names)
        self.categories = {k: list(v) for k, v in (categories or {}).items()}
        self._codes = {k: {c: i for i, c in enumerate(v, start=1)}
                       for k, v in self.categories.items()}

    @classmethod
    def fit(cls, vectors, names=None):
        names = list(FEATURE_NAMES if names is None else names)
        cats = {}
        for n in names:
            if n in CATEGORICAL:
                cats[n] = sorted({str(v[n]) for v in vectors})
        return cls(names, cats)

    def drop(self, removed):
        removed = set(removed)
        return FeatureSchema([n for n in self.names if n not in removed],
                             {k: v for k, v in self.categories.items()
                              if k not in removed})

    def encode(self, v):
        row = np.empty(len(self.names), dtype=np.float64)
        for j, n in enumerate(self.names):
            x = v[n]
            if n in self._codes:
                row[j] = self._codes[n].get(str(x), 0)
            else:
                row[j] = float(x)
        return row

    def encode_matrix(self, vectors):
        if not vectors:
            return np.zeros((0, len(self.names)))
        return np.vstack([self.encode(v) for v in vectors])

    def to_dict(self):
        return {"names": self.names, "categories": self.categories}

    @classmethod
    def from_dict(cls, d):
        return cls(d["names"], d["categories"])


def encode_numeric(v, schema):
    return schema.encode(v)


# -- feature dump -----------------------------------------------------------

COVERAGE_PREFIX = "cov:"


def dumps_features_csv(ids, vectors):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["id"] + FEATURE_NAMES
               + [COVERAGE_PREFIX + c for c in COMPONENTS])
    for hid, v in zip(ids, vectors):
        w.writerow([hid] + v.as_list()
                   + [int(v.coverage.get(c, False)) for c in COMPONENTS])
    return buf.getvalue()


def write_features_csv(path, ids, vectors):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(dumps_features_csv(ids, vectors))


def read_features_csv(path):
    """Returns (ids, vectors) from a feature dump."""
    ids, vectors = [], []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        missing = [n for n in FEATURE_NAMES if n not in reader.fieldnames]
        if missing:
            raise ValueError(f"feature file lacks columns {missing[:5]}")
        for row in reader:
            vals = {n: row[n] if n in CATEGORICAL else int(row[n])
                    for n in FEATURE_NAMES}
            cov = {c: row.get(COVERAGE_PREFIX + c) == "1" for c in COMPONENTS}
            ids.append(row["id"])
            vectors.append(FeatureVector(vals, cov))
    return ids, vectors
