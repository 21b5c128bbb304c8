"""File-backed knowledge providers.

Everything the feature extractor knows about the world comes from here:
role and connective counts over a plain-text corpus, a polarity lexicon,
narrative chains, a relatedness table, frame roles for proper-name
substitution, a polarity score table and search hit counts.  Hit counts
are served from a JSON cache; live lookups are opt-in and write through
to that cache before returning.
"""

import json
import os
import threading
import urllib.error
import urllib.parse
import urllib.request
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from .errors import (CacheMissOffline, HardnessError, NetworkError,
                     ResourceError)
from .tables import bundled_path, read_rows
from .text import (extract_triples, split_clauses, stem, tokenize)

INDEX_FORMAT = "wsc-hardness-corpus-index"
INDEX_VERSION = 1
ROLES = ("subject", "object")
POLARITIES = ("negative", "neutral", "positive")
MAX_CHAIN = 12

NETWORK_ENV = "WSC_HARDNESS_NETWORK"
ENDPOINT_ENV = "WSC_HARDNESS_SEARCH_ENDPOINT"


def governing_word(triple):
    """The word a clause's subject is predicated by.

    For copular clauses ("it was clever") that is the adjective, otherwise
    the verb.
    """
    if (triple.verb.pos == "aux-verb" and triple.object is not None
            and triple.object.pos == "adj"):
        return triple.object
    return triple.verb


# -- corpus index -----------------------------------------------------------

@dataclass
class CorpusIndex:
    role_counts: Counter = field(default_factory=Counter)
    connective_triple_counts: Counter = field(default_factory=Counter)
    doc_count: int = 0

    def __eq__(self, other):
        return (isinstance(other, CorpusIndex)
                and self.doc_count == other.doc_count
                and +self.role_counts == +other.role_counts
                and +self.connective_triple_counts
                == +other.connective_triple_counts)

    def to_json(self):
        return json.dumps({
            "format": INDEX_FORMAT,
            "version": INDEX_VERSION,
            "doc_count": self.doc_count,
            "role_counts": sorted([k[0], k[1], c]
                                  for k, c in self.role_counts.items()),
            "connective_triple_counts": sorted(
                [k[0], k[1], k[2], c]
                for k, c in self.connective_triple_counts.items()),
        }, indent=1, ensure_ascii=False) + "\n"

    @classmethod
    def from_json(cls, text):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ResourceError(f"corpus index is not JSON: {exc}") from None
        if data.get("format") != INDEX_FORMAT:
            raise ResourceError("not a corpus index file")
        if data.get("version") != INDEX_VERSION:
            raise ResourceError(f"unsupported index version "
                                f"{data.get('version')}")
        idx = cls(doc_count=int(data["doc_count"]))
        for lemma, role, c in data["role_counts"]:
            idx.role_counts[(lemma, role)] = int(c)
        for v, cn, x, c in data["connective_triple_counts"]:
            idx.connective_triple_counts[(v, cn, x)] = int(c)
        return idx

    def save(self, path):
        Path(path).write_text(self.to_json(), encoding="utf-8")

    @classmethod
    def load(cls, path):
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


def _count_sentence(idx, line, triple_extractor):
    try:
        triples = triple_extractor(line)
    except HardnessError:
        return
    plain = {}
    for t in triples:
        if t.is_link:
            continue
        plain.setdefault(t.clause, t)
        if t.subject is not None and t.subject.pos in ("noun", "pronoun"):
            idx.role_counts[(t.subject.lemma, "subject")] += 1
        if t.object is not None and t.object.pos in ("noun", "pronoun"):
            idx.role_counts[(t.object.lemma, "object")] += 1
    clauses = split_clauses(tokenize(line))
    for i in range(1, len(clauses)):
        cn = clauses[i].connective
        if cn is None or (i - 1) not in plain or i not in plain:
            continue
        v = plain[i - 1].verb.lemma
        x = stem(governing_word(plain[i]).lemma)
        idx.connective_triple_counts[(v, cn.lower, x)] += 1


def build_corpus_index(corpus, triple_extractor=extract_triples):
    """Count subject/object roles and (V, Cn, X) triples in a corpus.

    ``corpus`` is an iterable of lines (one sentence per line) or a path.
    """
    if isinstance(corpus, (str, os.PathLike)):
        with open(corpus, encoding="utf-8") as fh:
            return build_corpus_index(fh.read().splitlines(), triple_extractor)
    idx = CorpusIndex()
    for line in corpus:
        line = line.strip()
        if not line:
            continue
        idx.doc_count += 1
        _count_sentence(idx, line, triple_extractor)
    return idx


def role_frequency(idx, lemma, role):
    if role not in ROLES:
        raise ValueError(f"role must be one of {ROLES}")
    return idx.role_counts.get((lemma, role), 0)


def connective_triple_frequency(idx, v, cn, x):
    return idx.connective_triple_counts.get((v, cn, x), 0)


# -- lexical tables ---------------------------------------------------------

@dataclass
class PolarityLexicon:
    entries: dict = field(default_factory=dict)

    @classmethod
    def load(cls, path):
        entries = {}
        for row in read_rows(path):
            pol = row[1]
            if pol not in POLARITIES:
                raise ResourceError(f"bad polarity {pol!r} for {row[0]!r}")
            strength = float(row[2]) if len(row) > 2 else 1.0
            entries[row[0]] = (pol, strength)
        return cls(entries)

    def lookup(self, lemma):
        return self.entries.get(lemma, ("neutral", 0.0))


def polarity_of(lex, lemma):
    return lex.lookup(lemma)[0]


@dataclass
class ScoreTable:
    """Real-valued polarity scores in [-1, 1]; missing words score 0."""
    scores: dict = field(default_factory=dict)

    @classmethod
    def load(cls, path):
        scores = {}
        for row in read_rows(path):
            s = float(row[1])
            if not -1.0 <= s <= 1.0:
                raise ResourceError(f"score {s} for {row[0]!r} outside [-1, 1]")
            scores[row[0]] = s
        return cls(scores)

    def score(self, word):
        return self.scores.get(word, 0.0)


@dataclass
class RelatednessTable:
    pairs: dict = field(default_factory=dict)

    @classmethod
    def load(cls, path):
        tbl = cls()
        for a, b, v in read_rows(path):
            tbl.add(a, b, float(v))
        return tbl

    def add(self, a, b, value):
        if not 0.0 <= value <= 1.0:
            raise ResourceError(f"relatedness {value} outside [0, 1]")
        self.pairs[(a, b)] = value
        self.pairs[(b, a)] = value


def relatedness(tbl, a, b):
    return tbl.pairs.get((a, b), 0.0)


@dataclass
class FrameRoleTable:
    roles: dict = field(default_factory=dict)

    @classmethod
    def load(cls, path):
        roles = {}
        for row in read_rows(path):
            if len(row) < 3 or not row[1] or not row[2]:
                raise ResourceError(f"frame entry for {row[0]!r} needs two "
                                    f"role nouns")
            roles[row[0]] = (row[1], row[2])
        return cls(roles)


def frame_roles_for(tbl, verb):
    return tbl.roles.get(verb)


def load_synonyms(path=None):
    """Symmetric synonym map: word -> frozenset of its synonyms."""
    path = bundled_path("synonyms.tsv") if path is None else path
    groups = {}
    for row in read_rows(path):
        words = [row[0]] + [w for w in row[1].split(",") if w]
        for w in words:
            groups.setdefault(w, set()).update(x for x in words if x != w)
    return {w: frozenset(s) for w, s in groups.items()}


# -- narrative chains -------------------------------------------------------

def parse_event(tok):
    verb, sep, role = tok.rpartition("-")
    if not sep or role not in ("s", "o") or not verb:
        raise ResourceError(f"chain element {tok!r} lacks a -s/-o marker")
    return (verb, role)


@dataclass
class NarrativeChainDb:
    chains: list = field(default_factory=list)
    synonyms: dict = field(default_factory=dict)

    def __post_init__(self):
        self.chains = [tuple(c) for c in self.chains]
        for c in self.chains:
            if not c:
                raise ResourceError("empty narrative chain")
            if len(c) > MAX_CHAIN:
                raise ResourceError(f"chain longer than {MAX_CHAIN} events")

    @classmethod
    def load(cls, path, synonyms=None):
        chains = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.split("#", 1)[0].strip()
                if line:
                    chains.append([parse_event(t) for t in line.split()])
        return cls(chains, load_synonyms() if synonyms is None else synonyms)


def chains_containing(db, e1, e2, similarity_fallback=False):
    """Chains holding both (verb, role) events.

    With ``similarity_fallback`` an empty exact result is retried with
    Porter-stem matching, then with the synonym table.
    """
    def search(match):
        return [c for c in db.chains
                if any(match(ev, e1) for ev in c)
                and any(match(ev, e2) for ev in c)]

    found = search(lambda ev, q: ev == q)
    if found or not similarity_fallback:
        return found
    found = search(lambda ev, q: ev[1] == q[1] and stem(ev[0]) == stem(q[0]))
    if found:
        return found

    def synonymous(ev, q):
        if ev[1] != q[1]:
            return False
        a, b = stem(ev[0]), stem(q[0])
        syn = db.synonyms
        return a == b or any(stem(s) == a for s in syn.get(q[0], ())) \
            or any(stem(s) == b for s in syn.get(ev[0], ()))
    return search(synonymous)


# -- hit counts -------------------------------------------------------------

def _normalize(phrase):
    return " ".join(phrase.split())


class HitCountProvider:
    """Exact-phrase hit counts backed by a JSON cache file.

    Live lookups are disabled unless ``network_enabled``; every live result
    is persisted to the cache before it is returned.
    """

    def __init__(self, cache=None, cache_path=None, network_enabled=False,
                 endpoint=None, count_field="count", timeout=10.0,
                 opener=None):
        self.cache = dict(cache or {})
        self.cache_path = None if cache_path is None else Path(cache_path)
        if self.cache_path is not None and self.cache_path.exists():
            self.cache.update(load_hit_cache(self.cache_path))
        self.network_enabled = network_enabled
        self.endpoint = endpoint
        self.count_field = count_field
        self.timeout = timeout
        self._open = opener or urllib.request.urlopen
        self._lock = threading.Lock()
        self.live_queries = 0

    @classmethod
    def from_env(cls, cache_path=None, **kw):
        kw.setdefault("network_enabled",
                      os.environ.get(NETWORK_ENV, "") in ("1", "true", "yes"))
        kw.setdefault("endpoint", os.environ.get(ENDPOINT_ENV))
        return cls(cache_path=cache_path, **kw)

    def _query(self, phrase):
        if not self.endpoint:
            raise NetworkError("network enabled but no search endpoint set")
        url = self.endpoint + ("&" if "?" in self.endpoint else "?") + \
            urllib.parse.urlencode({"q": f'"{phrase}"'})
        try:
            with self._open(url, timeout=self.timeout) as resp:
                body = resp.read().decode("utf-8")
        except (urllib.error.URLError, OSError, ValueError) as exc:
            raise NetworkError(f"hit-count query failed: {exc}") from None
        try:
            data = json.loads(body)
            count = data[self.count_field] if isinstance(data, dict) else data
            count = int(count)
        except (ValueError, KeyError, TypeError):
            raise NetworkError(f"unparseable hit-count response "
                               f"{body[:80]!r}") from None
        if count < 0:
            raise NetworkError(f"negative hit count {count}")
        return count

    def _persist(self):
        if self.cache_path is None:
            return
        tmp = self.cache_path.with_suffix(self.cache_path.suffix + ".tmp")
        tmp.write_text(dump_hit_cache(self.cache), encoding="utf-8")
        os.replace(tmp, self.cache_path)

    def hit_count(self, phrase):
        phrase = _normalize(phrase)
        if not phrase:
            raise ValueError("empty query phrase")
        cached = self.cache.get(phrase)
        if cached is not None:
            return cached
        if not self.network_enabled:
            raise CacheMissOffline(f"{phrase!r} not cached and network is off")
        count = self._query(phrase)
        with self._lock:
            self.live_queries += 1
            self.cache[phrase] = count
            self._persist()
        return count


def hit_count(provider, phrase):
    return provider.hit_count(phrase)


def load_hit_cache(path):
    data = json.loads(Path(path).read_text(encoding="utf-8") or "{}")
    if not isinstance(data, dict):
        raise ResourceError("hit cache must be a JSON object")
    out = {}
    for k, v in data.items():
        if not isinstance(v, int) or v < 0:
            raise ResourceError(f"bad cached count for {k!r}: {v!r}")
        out[_normalize(k)] = v
    return out


def dump_hit_cache(cache):
    return json.dumps(dict(sorted(cache.items())), indent=1,
                      ensure_ascii=False) + "\n"


# -- bundle -----------------------------------------------------------------

RESOURCE_FILES = {
    "index": "corpus_index.json",
    "corpus": "corpus.txt",
    "polarity": "polarity.tsv",
    "scores": "scores.tsv",
    "chains": "chains.txt",
    "synonyms": "synonyms.tsv",
    "relatedness": "relatedness.tsv",
    "frames": "frames.tsv",
    "hits": "hits.json",
    "annotations": "annotations.json",
}


@dataclass
class ResourceBundle:
    index: CorpusIndex = field(default_factory=CorpusIndex)
    polarity: PolarityLexicon = field(default_factory=PolarityLexicon)
    scores: ScoreTable = field(default_factory=ScoreTable)
    chains: NarrativeChainDb = field(default_factory=NarrativeChainDb)
    relatedness: RelatednessTable = field(default_factory=RelatednessTable)
    frames: FrameRoleTable = field(default_factory=FrameRoleTable)
    hits: HitCountProvider = field(default_factory=HitCountProvider)
    annotations: dict = field(default_factory=dict)


def load_annotations(path):
    """Parse-annotation side file: half id -> per-text annotation dicts."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    out = {}
    for hid, rec in data.items():
        out[hid] = {
            "sentence": {"triples": rec.get("sentence_triples", []),
                         "pos": rec.get("pos")},
            "question": {"triples": rec.get("question_triples", []),
                         "pos": rec.get("question_pos")},
        }
    return out


def load_resources(directory, network_enabled=None, endpoint=None):
    """Load whichever resource files exist under ``directory``."""
    d = Path(directory)
    if not d.is_dir():
        raise ResourceError(f"resource directory {d} does not exist")
    f = {k: d / name for k, name in RESOURCE_FILES.items()}
    b = ResourceBundle()
    if f["index"].exists():
        b.index = CorpusIndex.load(f["index"])
    elif f["corpus"].exists():
        b.index = build_corpus_index(f["corpus"])
    if f["polarity"].exists():
        b.polarity = PolarityLexicon.load(f["polarity"])
    if f["scores"].exists():
        b.scores = ScoreTable.load(f["scores"])
    synonyms = load_synonyms(f["synonyms"] if f["synonyms"].exists() else None)
    if f["chains"].exists():
        b.chains = NarrativeChainDb.load(f["chains"], synonyms)
    else:
        b.chains = NarrativeChainDb([], synonyms)
    if f["relatedness"].exists():
        b.relatedness = RelatednessTable.load(f["relatedness"])
    if f["frames"].exists():
        b.frames = FrameRoleTable.load(f["frames"])
    kw = {}
    if network_enabled is not None:
        kw["network_enabled"] = network_enabled
    if endpoint is not None:
        kw["endpoint"] = endpoint
    b.hits = HitCountProvider.from_env(cache_path=f["hits"], **kw)
    if f["annotations"].exists():
        b.annotations = load_annotations(f["annotations"])
    return b
